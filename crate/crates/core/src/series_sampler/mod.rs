//! Exact samplers for the limit processes built from truncated Poisson series.

mod driver;
mod limits;
mod path;

pub use driver::{default_truncation_depth, sample_driver, PoissonDriver};
pub use limits::{
    backward_limit, forward_limit, limit_marked_points, limit_positions,
    limit_residual_order_stats, operator_levy_path, subordinator_path, LimitCoupling, LimitDrivers,
    LimitMode, LimitPositions, ResidualLimitSequence,
};
pub use path::{hitting_time, StepPath};

#[cfg(test)]
mod tests;
