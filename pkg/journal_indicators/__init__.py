"""
Journal Indicators

Journal citation indicators (impact factor, h-index, citation success index,
minimum representative size, average rank) estimated from the mean and
standard deviation of a journal's citations under a log-normal model, plus
the empirical counterparts and a Monte Carlo harness that checks one against
the other.
"""

__version__ = "1.0.0"

from .dataset import load_citations, load_summary, write_results
from .empirical import CitationVector, empirical_average_rank, empirical_csi, empirical_group_csi, empirical_h_index, empirical_kappa
from .estimated import JournalRecord, MomentSource, average_rank, compare, csi, estimate_h_index, group_csi, min_representative_size
from .lognormal import ArithMoments, LogMoments, arith_to_log, log_to_arith
from .montecarlo import SimulationConfig, validate_all

__all__ = [
    "ArithMoments",
    "CitationVector",
    "JournalRecord",
    "LogMoments",
    "MomentSource",
    "SimulationConfig",
    "arith_to_log",
    "average_rank",
    "compare",
    "csi",
    "empirical_average_rank",
    "empirical_csi",
    "empirical_group_csi",
    "empirical_h_index",
    "empirical_kappa",
    "estimate_h_index",
    "group_csi",
    "load_citations",
    "load_summary",
    "log_to_arith",
    "min_representative_size",
    "validate_all",
    "write_results",
]
