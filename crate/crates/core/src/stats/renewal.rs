use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

use super::mc::{run_mc, McPlan};

/// Renewal times around a level: `left = T_N ≤ level < right = T_{N+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Straddle {
    pub count: u64,
    pub left: f64,
    pub right: f64,
}

/// Renewal process with Pareto waits `P(J > x) = c_time·x^(-α)` above the
/// floor `c_time^(1/α)`, run until it passes `level`. Kept separate from the
/// walk engine so it can serve as an independent oracle.
pub fn renewal_straddle<R: Rng + ?Sized>(
    alpha: f64,
    c_time: f64,
    level: f64,
    rng: &mut R,
) -> Straddle {
    let floor = c_time.powf(1.0 / alpha);
    let exponent = -1.0 / alpha;
    let mut count = 0u64;
    let mut t = 0.0f64;
    loop {
        let u: f64 = rng.random();
        let next = t + floor * (1.0 - u).powf(exponent);
        if next > level {
            return Straddle {
                count,
                left: t,
                right: next,
            };
        }
        t = next;
        count += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalMean {
    pub t: f64,
    /// `E(N_t + 1) · Γ(1-α) · Γ(1+α) · (1 - F(t))`.
    pub ratio: f64,
    pub stderr: f64,
    pub mean_count: f64,
}

pub fn renewal_mean_ratio(alpha: f64, c_time: f64, t: f64, plan: &McPlan) -> Result<RenewalMean> {
    if !(alpha > 0.0 && alpha < 1.0 && c_time > 0.0) {
        return Err(Error::domain(
            "renewal check needs alpha in (0,1) and c_time > 0",
        ));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain("renewal time must be finite and >= 0"));
    }
    let counts = run_mc(plan, |_, seed| {
        let mut rng = rng_from_seed(seed);
        Ok((renewal_straddle(alpha, c_time, t, &mut rng).count + 1) as f64)
    })?;
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let survival = if t > 0.0 {
        (c_time * t.powf(-alpha)).min(1.0)
    } else {
        1.0
    };
    let factor = libm::tgamma(1.0 - alpha) * libm::tgamma(1.0 + alpha) * survival;
    Ok(RenewalMean {
        t,
        ratio: mean * factor,
        stderr: (var / n).sqrt() * factor,
        mean_count: mean,
    })
}
