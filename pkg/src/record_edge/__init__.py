"""Sub-threshold sports-result modelling: bounded-tail margin distribution,
maximum-likelihood fitting, record-probability prediction, profile-likelihood
confidence curves, and bootstrap adequacy checks."""

from .errors import DomainError, ParseError, ParseWarning, RecordEdgeError
from .evd import (
    A_EPS,
    ModelParams,
    cdf,
    endpoint,
    log_likelihood,
    pdf,
    quantile,
    sample_margins,
    survival,
)
from .estimation import FitResult, fit_mle, observed_information_se
from .prediction import (
    PredictionCurve,
    VolumeModel,
    best_of_season_cdf,
    default_time_grid,
    prediction_curve,
    prob_break,
)
from .confidence import (
    ConfidenceCurve,
    EndpointEstimate,
    Interval,
    chi2_1_cdf,
    interval_from_curve,
    profile_endpoint,
    profile_prob,
)
from .adequacy import (
    MonitorResult,
    TrendFit,
    fit_trend,
    monitor_envelope,
    monitor_process,
    monitor_sup,
)
from .records import RecordCountStats, expected_records, simulate_record_counts
from .ingest import (
    ExceedanceSample,
    RaceResult,
    format_time,
    lap_schedule,
    parse_time,
    read_national_records,
    read_results_csv,
    season_of,
    to_exceedance,
)

__version__ = "0.1.0"
