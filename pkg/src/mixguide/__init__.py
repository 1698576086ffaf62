"""Analytic Gaussian-mixture laboratory for diffusion guidance schemes."""

from .guidance import (
    GuidanceConfig,
    PosteriorState,
    Scheme,
    SldConfig,
    SldState,
    combine_noise,
    dynamic_lambda,
    mean_from_noise,
    sld_lambda,
    update_posterior,
)
from .metrics import (
    ClassHistogram,
    FieldGrid,
    GridSpec2D,
    Histogram1D,
    TrackingComparison,
    class_histogram,
    field_grid,
    guided_field,
    histogram_1d,
    kl_to_ideal,
    posterior_tracking_error,
    safety,
)
from .mixture import (
    AnalyticNoisePredictor,
    GaussianMixture,
    MixtureSplit,
    ScoreProvider,
    classify_mode,
    diffuse_mixture,
    exact_posterior,
    forbidden_log_odds,
    log_density,
    mixture_cdf,
    noise_from_score,
    sample_mixture,
    score,
    score_from_noise,
)
from .presets import (
    TRACKER_HIGH_PRIOR,
    TRACKER_LOW_PRIOR,
    class_removal_mixture,
    reference_mixture_1d,
    three_point_mixture_2d,
)
from .sampler import RunConfig, TrajectoryRecord, ddpm_step, run_batch, run_chain
from .schedule import (
    NoiseSchedule,
    forward_sample,
    linear_schedule,
    rescaled_linear_schedule,
)

__version__ = "0.1.0"
