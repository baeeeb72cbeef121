"""Command line entry point.

    seaice-stress bench scale     problem-size sweep
    seaice-stress bench variants  single-axis variant comparison
    seaice-stress verify          oracle check of all variants
    seaice-stress tables          dump PSI tables and quadrature rules
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..basis import gauss_rule, ngp_for_dofs, psi_table
from ..fields import Precision, StorageLayout
from ..kernels import MapMode, Scenario, VPParams
from .harness import (DEFAULT_RESOLUTIONS_KM, BenchConfig, ConfigError, ExecKind,
                      default_variants, elements_for_resolution, run_scaling,
                      run_variant_comparison)
from .report import emit_csv, format_csv
from .verify import run_verification

_KERNELS = {"element": None, "bmm": ExecKind.TENSOR_BMM, "sum": ExecKind.TENSOR_SUM}


def _list_of(kind):
    def parse(text):
        try:
            return [kind(v) for v in text.split(",") if v]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated values, got {text!r}")
    return parse


def _add_problem_flags(p: argparse.ArgumentParser, elements_default=None):
    size = p.add_mutually_exclusive_group()
    size.add_argument("--resolution-km", type=_list_of(float), metavar="KM[,KM...]",
                      help="mesh resolution(s) on the 512 km domain")
    size.add_argument("--elements", type=_list_of(int), metavar="N[,N...]",
                      default=elements_default, help="element count(s)")
    p.add_argument("--dg-stress", type=int, choices=(3, 8), default=3)
    p.add_argument("--dg-advection", type=int, choices=(1, 3, 6), default=1)
    p.add_argument("--distortion", type=float, default=None,
                   help="interior vertex perturbation in [0, 0.3)")
    p.add_argument("--threads", type=_list_of(int), metavar="W[,W...]", default=None,
                   help="worker count(s); 1 means serial")


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--layout", choices=("row", "col"), default="row")
    p.add_argument("--map", choices=("pre", "fly"), default="pre")
    p.add_argument("--kernel", choices=tuple(_KERNELS), default="element",
                   help="per-element loop or tensorized whole-field update")
    p.add_argument("--precision", choices=("f64", "f32"), default="f64")
    p.add_argument("--iterations", type=int, default=3000)
    p.add_argument("--scenario", choices=("uniform", "vortex"), default="vortex")
    p.add_argument("--alpha", type=float, default=VPParams.alpha)
    p.add_argument("--oracle-cap", type=int, default=100_000)
    p.add_argument("--out", help="CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seaice-stress", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="timed benchmark runs")
    bench_sub = bench.add_subparsers(dest="mode", required=True)
    for name, help_text in (("scale", "problem-size sweep"),
                            ("variants", "single-axis variant comparison")):
        p = bench_sub.add_parser(name, help=help_text)
        _add_problem_flags(p)
        _add_run_flags(p)

    verify = sub.add_parser("verify", help="check every variant against the reference")
    _add_problem_flags(verify, elements_default=[1024])
    verify.add_argument("--precision", choices=("f64", "f32"), default=None,
                        help="check one precision only (default: both)")

    tables = sub.add_parser("tables", help="print PSI tables and quadrature rules")
    tables.add_argument("--dg-stress", type=int, choices=(3, 8), default=3)
    tables.add_argument("--dg-advection", type=int, choices=(1, 3, 6), default=None)
    return parser


def _sizes(args) -> list[int]:
    if args.elements:
        return args.elements
    resolutions = args.resolution_km or DEFAULT_RESOLUTIONS_KM
    return [elements_for_resolution(r) for r in resolutions]


def _base_config(args, n_elements: int) -> BenchConfig:
    kind = _KERNELS[args.kernel]
    return BenchConfig(
        n_elements=n_elements, dg_stress=args.dg_stress, dg_advection=args.dg_advection,
        layout=StorageLayout(args.layout), map_mode=MapMode(args.map),
        exec=kind or ExecKind.SERIAL, precision=Precision(args.precision),
        iterations=args.iterations, scenario=Scenario(args.scenario),
        distortion=args.distortion or 0.0, oracle_cap=args.oracle_cap,
        params=VPParams(alpha=args.alpha))


def _write(records, out):
    if out:
        emit_csv(records, out)
    else:
        sys.stdout.write(format_csv(records))


def _cmd_bench(args) -> int:
    sizes = _sizes(args)
    config = _base_config(args, sizes[0])
    threads = args.threads
    if threads and config.exec.tensorized:
        raise ConfigError("--threads applies to the per-element kernel only")
    if args.mode == "scale":
        records = run_scaling(sizes, config, workers=threads)
    else:
        if len(sizes) != 1:
            raise ConfigError("bench variants takes a single problem size")
        workers = max(threads) if threads else 4
        if threads and len(threads) == 1 and threads[0] > 1:
            config = config.with_workers(threads[0])
        records = run_variant_comparison(config, default_variants(config, workers))
    _write(records, args.out)
    return 0


def _cmd_verify(args) -> int:
    sizes = _sizes(args)
    precisions = ([Precision(args.precision)] if args.precision
                  else [Precision.F64, Precision.F32])
    workers = max(args.threads) if args.threads else 4
    distortion = 0.2 if args.distortion is None else args.distortion
    failed = 0
    for n in sizes:
        for check in run_verification(n, distortion, precisions, workers=workers):
            print(check)
            failed += not check.passed
    print(f"{'FAILED' if failed else 'OK'}: {failed} deviation(s) above tolerance")
    return 1 if failed else 0


def _print_matrix(values: np.ndarray):
    for row in values:
        print("  " + " ".join(f"{v: .17g}" for v in row))


def _cmd_tables(args) -> int:
    ngp = ngp_for_dofs(args.dg_stress)
    rule = gauss_rule(ngp)
    print(f"Gauss rule: {ngp} point(s) per direction on [0, 1]")
    print("  points :", " ".join(f"{v:.17g}" for v in rule.points_1d))
    print("  weights:", " ".join(f"{v:.17g}" for v in rule.weights_1d))
    spaces = [("stress", args.dg_stress)]
    if args.dg_advection is not None:
        spaces.append(("advection", args.dg_advection))
    for name, n in spaces:
        table = psi_table(n, ngp)
        print(f"PSI<{n},{ngp}> ({name}, {n} x {table.n_g}):")
        _print_matrix(table.values)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_tables(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
