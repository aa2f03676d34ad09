//! Consistent scoring functions for point-process forecasts.

pub mod hyvarinen;
pub mod intensity;
pub mod moment;
pub mod summary;
pub mod temporal;

pub use hyvarinen::hyvarinen_pp_score;
pub use intensity::{
    bin_reports_from_intensity, distance_integral, score_bin, score_intensity_combined, score_intensity_poisson,
    score_normalized_intensity, spatial_correction_term, BinForecast, IntensityForecast,
};
pub use moment::{
    falling_factorial, pair_mass, score_factorial_moment, score_product_density, FactorialMomentForecast,
    ProductDensityForecast,
};
pub use summary::{
    kappa, kappa_minus, kappa_st, score_k_function, score_l_function, unit_ball_volume, KForecast, KScoreOptions,
    KappaEstimator,
};
pub use temporal::{
    estimate_entropy_gain, information_gain, interval_reports_from_cond_intensity, score_cond_intensity_log,
    score_interval, score_temporal_stepwise, temporal_correction_term, CondIntensityForecast, ConditionalIntensity,
    HawkesIntensity, IntervalProbForecast, QuadratureIntensity, WaitingTime, WaitingTimeCrps, WaitingTimeScore,
};
