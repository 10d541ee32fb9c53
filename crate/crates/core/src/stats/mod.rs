//! Empirical distribution tools, Monte Carlo orchestration and the
//! inequality and renewal checks.

mod ecdf;
mod kolmogorov;
mod mc;
mod renewal;

pub use ecdf::{count_functional_distance, ks_two_sample, spearman, tv_distance, Ecdf};
pub use kolmogorov::{
    kolmogorov_inequality_check, KolmogorovCase, KolmogorovResult, StepLaw, StoppingRule,
};
pub use mc::{run_mc, McPlan};
pub use renewal::{renewal_mean_ratio, renewal_straddle, RenewalMean, Straddle};

pub use crate::rng::{mix, rng_from_seed};
