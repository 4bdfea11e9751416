"""Adaptive DNN control of Euler-Lagrange systems with a skew-symmetry prediction error.

Typical use::

    from sslbpinn import load_config, run, compare
    cfg = load_config()                 # shipped defaults
    trace = run(cfg)
    report, _ = compare(cfg, range(10))
    print(report.to_table())
"""

from .config import SimConfig, load_config, parse_config
from .errors import ConfigError, DimensionError, InvariantViolation
from .metrics import ComparisonReport, rms, percent_improvement
from .simulator import SimTrace, compare, run

__all__ = [
    "SimConfig", "load_config", "parse_config",
    "ConfigError", "DimensionError", "InvariantViolation",
    "ComparisonReport", "rms", "percent_improvement",
    "SimTrace", "compare", "run",
]

__version__ = "0.1.0"
