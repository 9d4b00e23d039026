//! Data reduction: sinusoid fits, correlation estimates, error propagation and S′.

mod chsh;
mod fit;
mod pipeline;

pub use chsh::{
    bootstrap_counts_sigma, bootstrap_fits_sigma, chsh_combination, e_obs_from_counts, e_obs_from_fits,
    max_violation_settings, s_of_visibility, s_prime, visibility_threshold, weighted_average, ChshResult, ChshSettings,
    ExpectationEstimate, SignConvention, SETTING_MATCH_TOLERANCE,
};
pub use fit::{fit_points, fit_sinusoid, FitResult, Matrix3, MIN_DISTINCT_CHI};
pub use pipeline::{chsh_from_fits, chsh_from_repetitions, required_alphas, RepeatedChsh, TermSummary};
