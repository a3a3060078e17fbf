"""Annual range forecasts for monthly route-level count series.

An ensemble of Levenberg-Marquardt-trained feed-forward networks consumes the
calendar position and a three-level (but continuous) class covariate; the
per-month ensemble outputs are quantile-trimmed and bootstrap-aggregated into
one [min, max] range for the horizon.
"""

from .classify import (
    CLASS_LEVELS,
    ClassCase,
    ClassSeries,
    MonthlyStats,
    alter_case,
    classify_series,
    classify_value,
    monthly_stats,
    zscore_classify,
)
from .dataio import (
    CovariateRow,
    MonthlySeries,
    ScalingParams,
    TimePoint,
    ValidationWindow,
    build_design,
    encode_month,
    fit_scaling,
    make_windows,
    parse_route_csv,
    serialize_route_csv,
)
from .evaluate import (
    BacktestConfig,
    CvOptions,
    MetricsReport,
    TuneResult,
    backtest,
    metrics,
    nearest_bound_error,
    sensitivity,
    tune_hyperparams,
)
from .forecast import (
    ForecastRange,
    HorizonRequest,
    bootstrap_range,
    forecast_route,
    load_ensemble,
    predict_months,
    save_ensemble,
    trim_quantiles,
)
from .neuralnet import (
    NetworkSpec,
    TrainedNetwork,
    TrainOptions,
    forward,
    init_weights,
    jacobian,
    lm_train,
    pipeline_spec,
)
from .sieve import Ensemble, SieveOptions, candidate_seed, sieve_select

__version__ = "0.1.0"
