"""Benchmark runs of the stress update over the experiment axes.

Only the update loop is timed. Each run gets one untimed warm-up update on
a throwaway copy (JIT compilation, first touch), then ``iterations`` timed
updates starting from the synthesized state. The deviation column compares
a single update of the run's variant against the extended-precision
reference, from the same starting state.
"""
from __future__ import annotations

import enum
import logging
import math
import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from ..basis import ADVECTION_DOFS, STRESS_DOFS, gauss_rule, ngp_for_dofs
from ..fields import Precision, StorageLayout
from ..mesh import Mesh, build_structured_mesh
from ..kernels import (ExecPolicy, InverseMapTable, MapMode, Scenario, StressState,
                       TensorStrategy, VPParams, precompute_inverse_maps,
                       relative_max_deviation, stress_update, stress_update_reference,
                       synth_fields, tensorized_stress_update)

log = logging.getLogger(__name__)

DOMAIN_KM = 512.0
DEFAULT_RESOLUTIONS_KM = (4.0, 2.0, 1.0, 0.5, 0.25)
DEFAULT_ORACLE_CAP = 100_000
F64_TOLERANCE = 1e-12
F32_TOLERANCE = 1e-4


class ExecKind(enum.Enum):
    SERIAL = "serial"
    PARALLEL = "parallel"
    TENSOR_BMM = "tensor-bmm"
    TENSOR_SUM = "tensor-sum"

    @property
    def tensorized(self) -> bool:
        return self in (ExecKind.TENSOR_BMM, ExecKind.TENSOR_SUM)


_STRATEGY = {ExecKind.TENSOR_BMM: TensorStrategy.BATCHED_MATVEC,
             ExecKind.TENSOR_SUM: TensorStrategy.MULTIPLY_REDUCE}


class ConfigError(ValueError):
    pass


def elements_for_resolution(resolution_km: float, domain_km: float = DOMAIN_KM) -> int:
    per_side = domain_km / resolution_km
    if abs(per_side - round(per_side)) > 1e-9 or round(per_side) < 1:
        raise ConfigError(f"{resolution_km} km does not divide the {domain_km} km domain")
    return int(round(per_side)) ** 2


def grid_shape(n_elements: int) -> tuple[int, int]:
    """Most nearly square (nx, ny) with nx * ny == n_elements."""
    if n_elements < 1:
        raise ConfigError(f"element count must be positive, got {n_elements}")
    ny = math.isqrt(n_elements)
    while n_elements % ny:
        ny -= 1
    return n_elements // ny, ny


@dataclass(frozen=True)
class BenchConfig:
    n_elements: int = 16384
    dg_stress: int = 3
    dg_advection: int = 1
    layout: StorageLayout = StorageLayout.ROW
    map_mode: MapMode = MapMode.PRECOMPUTED
    exec: ExecKind = ExecKind.SERIAL
    workers: int = 1
    precision: Precision = Precision.F64
    iterations: int = 3000
    scenario: Scenario = Scenario.VORTEX
    distortion: float = 0.0
    domain_km: float = DOMAIN_KM
    oracle_cap: int = DEFAULT_ORACLE_CAP
    params: VPParams = field(default_factory=VPParams)

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if self.dg_stress not in STRESS_DOFS:
            raise ConfigError(f"unsupported stress DOFs {self.dg_stress}")
        if self.dg_advection not in ADVECTION_DOFS:
            raise ConfigError(f"unsupported advection DOFs {self.dg_advection}")
        if self.exec.tensorized and self.map_mode is MapMode.ON_THE_FLY:
            raise ConfigError("the tensorized update needs precomputed maps")
        if self.exec is ExecKind.PARALLEL and self.workers < 1:
            raise ConfigError("parallel execution needs at least one worker")
        if self.exec is not ExecKind.PARALLEL and self.workers != 1:
            raise ConfigError(f"{self.exec.value} execution uses one worker")

    @classmethod
    def from_resolution(cls, resolution_km: float, **kw) -> "BenchConfig":
        domain = kw.get("domain_km", DOMAIN_KM)
        return cls(n_elements=elements_for_resolution(resolution_km, domain), **kw)

    def with_workers(self, workers: int) -> "BenchConfig":
        if workers <= 1:
            return replace(self, exec=ExecKind.SERIAL, workers=1)
        return replace(self, exec=ExecKind.PARALLEL, workers=workers)

    @property
    def policy(self) -> ExecPolicy:
        if self.exec is ExecKind.PARALLEL:
            return ExecPolicy.threads(self.workers)
        return ExecPolicy.serial()

    @property
    def needs_maps(self) -> bool:
        return self.map_mode is MapMode.PRECOMPUTED

    def axes(self) -> dict:
        """The experiment axes a variant may change relative to a baseline."""
        return {"layout": self.layout, "map_mode": self.map_mode,
                "exec": (self.exec, self.workers), "precision": self.precision}

    def inputs_key(self) -> tuple:
        return (self.n_elements, self.dg_stress, self.dg_advection, self.scenario,
                self.distortion, self.domain_km)


@dataclass
class BenchRecord:
    scenario: str
    n_elements: int
    dg_stress: int
    dg_advection: int
    layout: str
    map_mode: str
    exec: str
    workers: int
    precision: str
    iterations: int
    wall_seconds: float
    elements_per_second: float
    max_deviation: float | None
    checksum: float


CSV_COLUMNS = tuple(f.name for f in fields(BenchRecord))


@dataclass
class BenchInputs:
    """Mesh, F64 row-major starting state and (optionally) inverse maps."""

    mesh: Mesh
    state: StressState
    maps: InverseMapTable | None
    _reference: dict = field(default_factory=dict)

    def state_for(self, config: BenchConfig) -> StressState:
        state = self.state.with_layout(config.layout)
        if config.precision is not Precision.F64:
            state = state.astype(config.precision)
        return state

    def reference(self, config: BenchConfig, start: StressState):
        key = config.precision
        if key not in self._reference:
            self._reference[key] = stress_update_reference(start, self.mesh, config.params)
        return self._reference[key]


def estimated_bytes(config: BenchConfig) -> int:
    n = config.n_elements
    field_entries = (6 * config.dg_stress + 2 * config.dg_advection) * n
    # base state, working copy, layout/precision conversion, warm-up copy
    total = 4 * 8 * field_entries
    if config.needs_maps or config.exec.tensorized:
        ng = gauss_rule(ngp_for_dofs(config.dg_stress)).n_g
        total += 8 * n * config.dg_stress * ng * (2 if config.precision is Precision.F32 else 1)
    if config.exec.tensorized:
        total += 8 * n * config.dg_stress * ng * 2
    return total


def available_bytes() -> int | None:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None


def prepare_inputs(config: BenchConfig, need_maps: bool = True) -> BenchInputs:
    need = estimated_bytes(config)
    avail = available_bytes()
    if avail is not None and need > avail:
        raise MemoryError(f"{config.n_elements} elements need about {need / 2**30:.1f} GiB, "
                          f"{avail / 2**30:.1f} GiB available")
    nx, ny = grid_shape(config.n_elements)
    extent = config.domain_km * 1e3
    mesh = build_structured_mesh(nx, ny, extent, extent, config.distortion)
    state = synth_fields(mesh, config.dg_advection, config.dg_stress, config.scenario)
    maps = precompute_inverse_maps(mesh, config.dg_stress) if need_maps else None
    return BenchInputs(mesh, state, maps)


def _updater(config: BenchConfig, inputs: BenchInputs):
    params = config.params
    if config.exec.tensorized:
        strategy = _STRATEGY[config.exec]
        return lambda s: tensorized_stress_update(s, inputs.maps, params, strategy)
    policy = config.policy
    return lambda s: stress_update(s, params, maps=inputs.maps, mesh=inputs.mesh,
                                   mode=config.map_mode, policy=policy)


def checksum(state: StressState) -> float:
    """Exactly rounded sum of |S| over all stress coefficients, in F64."""
    return math.fsum(np.abs(state.stress_arrays()).ravel().tolist())


def run_single(config: BenchConfig, inputs: BenchInputs) -> BenchRecord:
    update = _updater(config, inputs)
    start = inputs.state_for(config)

    update(start.copy())  # warm-up

    state = start.copy()
    t0 = time.perf_counter()
    for _ in range(config.iterations):
        update(state)
    wall = time.perf_counter() - t0

    deviation = None
    if config.n_elements <= config.oracle_cap:
        once = start.copy()
        update(once)
        deviation = relative_max_deviation(once.stresses, inputs.reference(config, start))

    return BenchRecord(
        scenario=config.scenario.value, n_elements=config.n_elements,
        dg_stress=config.dg_stress, dg_advection=config.dg_advection,
        layout=config.layout.value, map_mode=config.map_mode.value,
        exec=config.exec.value, workers=config.workers,
        precision=config.precision.value, iterations=config.iterations,
        wall_seconds=wall,
        elements_per_second=config.n_elements * config.iterations / wall,
        max_deviation=deviation, checksum=checksum(state))


def default_variants(baseline: BenchConfig, workers: int = 4) -> list[dict]:
    """One-axis modifications of ``baseline``, each tested independently."""
    other_layout = (StorageLayout.COL if baseline.layout is StorageLayout.ROW
                    else StorageLayout.ROW)
    other_map = (MapMode.ON_THE_FLY if baseline.map_mode is MapMode.PRECOMPUTED
                 else MapMode.PRECOMPUTED)
    other_precision = (Precision.F32 if baseline.precision is Precision.F64
                       else Precision.F64)
    variants = [{"layout": other_layout}, {"map_mode": other_map},
                {"precision": other_precision}]
    if baseline.exec is not ExecKind.PARALLEL:
        variants.append({"exec": ExecKind.PARALLEL, "workers": workers})
    if baseline.map_mode is MapMode.PRECOMPUTED:
        variants += [{"exec": kind, "workers": 1}
                     for kind in (ExecKind.TENSOR_BMM, ExecKind.TENSOR_SUM)
                     if kind is not baseline.exec]
    return variants


def run_variant_comparison(baseline: BenchConfig,
                           variants: list[dict] | None = None) -> list[BenchRecord]:
    """Baseline record followed by one record per single-axis variant."""
    if variants is None:
        variants = default_variants(baseline)
    configs = [baseline]
    base_axes = baseline.axes()
    for change in variants:
        try:
            cfg = replace(baseline, **change)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        changed = [k for k, v in cfg.axes().items() if v != base_axes[k]]
        if len(changed) != 1:
            raise ConfigError(f"variant {change} changes {changed or 'no'} axes; "
                              "exactly one is allowed")
        if cfg.inputs_key() != baseline.inputs_key():
            raise ConfigError(f"variant {change} changes the problem, not an axis")
        configs.append(cfg)
    inputs = prepare_inputs(baseline)
    return [run_single(cfg, inputs) for cfg in configs]


def run_scaling(sizes, config: BenchConfig, workers=None) -> list[BenchRecord]:
    """One record per (size, worker count); sizes that cannot be allocated are skipped."""
    if workers is None:
        configs_for = lambda n: [replace(config, n_elements=n)]
    else:
        configs_for = lambda n: [replace(config, n_elements=n).with_workers(w)
                                 for w in workers]
    records = []
    inputs = None
    for n in sizes:
        cfgs = configs_for(int(n))
        inputs = None  # release the previous size first
        try:
            inputs = prepare_inputs(cfgs[0], need_maps=any(
                c.needs_maps or c.exec.tensorized for c in cfgs))
            for cfg in cfgs:
                records.append(run_single(cfg, inputs))
                log.info("N=%d %s/%d: %.3g elements/s", cfg.n_elements, cfg.exec.value,
                         cfg.workers, records[-1].elements_per_second)
        except MemoryError as exc:
            log.warning("skipping N=%d: %s", n, exc)
    return records
