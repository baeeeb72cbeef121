"""Benchmark harness and command line interface."""
from .harness import (BenchConfig, BenchRecord, ConfigError, ExecKind, run_scaling,
                      run_variant_comparison)
from .report import emit_csv

__all__ = ["BenchConfig", "BenchRecord", "ConfigError", "ExecKind", "emit_csv",
           "run_scaling", "run_variant_comparison"]
