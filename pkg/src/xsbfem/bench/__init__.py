"""Benchmark problems, configuration, reporting and the command line runner."""

from .config import BenchmarkConfig, default_config, load_config
from .problems import BUILDERS, edge_tension_factor, run_setup
from .report import emit_report, read_csv
from .runner import run_benchmark

__all__ = ["BenchmarkConfig", "default_config", "load_config", "BUILDERS",
           "edge_tension_factor", "run_setup", "emit_report", "read_csv", "run_benchmark"]
