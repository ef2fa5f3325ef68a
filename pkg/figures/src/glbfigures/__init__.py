"""Figure regeneration and Cover Type preprocessing for glbandit CSVs."""

__version__ = "0.1.0"

from .covertype import preprocess_covertype, write_arm_file
from .plots import plot_regret, plot_runtime
from .runcsv import (
    EXPECTED_HEADER,
    RegretStats,
    SchemaError,
    read_run_csv,
    regret_stats,
    total_runtime_seconds,
)

__all__ = [
    "__version__",
    "preprocess_covertype", "write_arm_file",
    "plot_regret", "plot_runtime",
    "EXPECTED_HEADER", "RegretStats", "SchemaError",
    "read_run_csv", "regret_stats", "total_runtime_seconds",
]
