"""Quantile-correlation safe-haven tests and rolling extreme-event counts."""

__version__ = "0.1.0"

from .errors import TailhavenError  # noqa: E402
from .extreme_events import ExtremeCountSeries, count_extremes  # noqa: E402
from .market_data import (  # noqa: E402
    AlignedReturnPair,
    PriceSeries,
    ReturnSeries,
    StandardizedSeries,
    align_and_return,
    log_returns,
    parse_price_csv,
    read_price_csv,
    standardize,
)
from .quantile_stats import QCorEstimate, empirical_quantile, psi, qcor, qcor_curve, quantile_correlation  # noqa: E402
from .resampling import BootstrapConfig, QuantileCurve, bootstrap_qcor, derive_replicate_seed  # noqa: E402
from .synthetic import GaussianPairSpec, gen_bivariate_normal, gen_student_t_pair  # noqa: E402

__all__ = [
    "AlignedReturnPair",
    "BootstrapConfig",
    "ExtremeCountSeries",
    "GaussianPairSpec",
    "PriceSeries",
    "QCorEstimate",
    "QuantileCurve",
    "ReturnSeries",
    "StandardizedSeries",
    "TailhavenError",
    "align_and_return",
    "bootstrap_qcor",
    "count_extremes",
    "derive_replicate_seed",
    "empirical_quantile",
    "gen_bivariate_normal",
    "gen_student_t_pair",
    "log_returns",
    "parse_price_csv",
    "psi",
    "qcor",
    "qcor_curve",
    "quantile_correlation",
    "read_price_csv",
    "standardize",
]
