"""Mixed-frequency nowcasting toolkit.

Builds nowcasts of slow-publishing annual indicators from timelier monthly
and quarterly series: pseudo-real-time data vintages, growth/seasonal
transforms, a from-scratch LSTM regressor, random variable search, vintage
backtesting, and a rule cascade for indicator feasibility classification.
"""

from .series import (
    Frequency,
    Observation,
    Period,
    PublicationSchedule,
    TimeSeries,
    YearRange,
    observation_count,
    period_to_month,
    validate_series,
)
from .vintage import (
    DatasetSnapshot,
    VintageDate,
    checkpoint_schedule,
    snapshot_at,
    trace_schedule,
)
from .lstm import Hyperparams, LstmParams, TrainedModel, predict, train
from .evaluation import Metrics, SplitSpec, default_splits, mae, rmse
from .selection import SearchConfig, TrialResult, random_search, refine_top_k
from .feasibility import (
    FeasibilityLabel,
    IndicatorRecord,
    classify_explanatory,
    classify_overall,
)

__version__ = "0.1.0"

__all__ = [
    "Frequency", "Observation", "Period", "PublicationSchedule", "TimeSeries",
    "YearRange", "observation_count", "period_to_month", "validate_series",
    "DatasetSnapshot", "VintageDate", "checkpoint_schedule", "snapshot_at",
    "trace_schedule",
    "Hyperparams", "LstmParams", "TrainedModel", "predict", "train",
    "Metrics", "SplitSpec", "default_splits", "mae", "rmse",
    "SearchConfig", "TrialResult", "random_search", "refine_top_k",
    "FeasibilityLabel", "IndicatorRecord", "classify_explanatory",
    "classify_overall",
    "__version__",
]
