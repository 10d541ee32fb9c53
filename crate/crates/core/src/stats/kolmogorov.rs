use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

use super::mc::{run_mc, McPlan};

/// Centered step laws with finite variance.
#[derive(Debug, Clone, PartialEq)]
pub enum StepLaw {
    Rademacher,
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    /// Finitely many values with the given probabilities.
    Discrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

impl StepLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            StepLaw::Rademacher => Ok(()),
            StepLaw::Uniform { half_width } => {
                if half_width.is_finite() && *half_width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(
                        "uniform step law needs a positive half width",
                    ))
                }
            }
            StepLaw::Discrete { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(Error::domain(
                        "discrete step law needs matching values and probs",
                    ));
                }
                if probs.iter().any(|&p| !(p > 0.0)) || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::domain("discrete step law has invalid entries"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::domain(format!("step probabilities sum to {total}")));
                }
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let mean: f64 = values.iter().zip(probs).map(|(v, p)| v * p).sum();
                if mean.abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::domain(format!(
                        "step law is not centered (mean {mean})"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            StepLaw::Rademacher => 1.0,
            StepLaw::Uniform { half_width } => half_width * half_width / 3.0,
            StepLaw::Discrete { values, probs } => {
                values.iter().zip(probs).map(|(v, p)| v * v * p).sum()
            }
        }
    }

    /// `P(|Y| > threshold)`.
    pub fn exceedance(&self, threshold: f64) -> f64 {
        match self {
            StepLaw::Rademacher => f64::from(threshold < 1.0),
            StepLaw::Uniform { half_width } => (1.0 - threshold / half_width).clamp(0.0, 1.0),
            StepLaw::Discrete { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| v.abs() > threshold)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            StepLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            StepLaw::Uniform { half_width } => rng.random_range(-*half_width..=*half_width),
            StepLaw::Discrete { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("non-empty law")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// `T ≡ m`.
    Fixed { m: u32 },
    /// First `k` with `|Y_k| > threshold`, capped at `cap`.
    FirstExceedance { threshold: f64, cap: u32 },
}

impl StoppingRule {
    /// `E(T)`; for the capped first exceedance `Σ_{k<cap} (1-p)^k`.
    pub fn mean(&self, law: &StepLaw) -> f64 {
        match *self {
            StoppingRule::Fixed { m } => f64::from(m),
            StoppingRule::FirstExceedance { threshold, cap } => {
                let p = law.exceedance(threshold);
                if p == 0.0 {
                    f64::from(cap)
                } else {
                    (1.0 - (1.0 - p).powi(cap as i32)) / p
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let cap = match *self {
            StoppingRule::Fixed { m } => m,
            StoppingRule::FirstExceedance { threshold, cap } => {
                if !(threshold >= 0.0) {
                    return Err(Error::domain("exceedance threshold must be >= 0"));
                }
                cap
            }
        };
        if cap == 0 {
            return Err(Error::domain("stopping rule needs at least one step"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KolmogorovCase {
    pub law: StepLaw,
    pub rule: StoppingRule,
    pub delta: f64,
    pub replicates: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KolmogorovResult {
    /// Monte Carlo estimate of `P(max_{k≤T} |S_k| ≥ δ)`.
    pub lhs: f64,
    pub stderr: f64,
    /// `δ^(-2) · E(T) · Var(Y)`.
    pub rhs: f64,
    pub mean_stopping_time: f64,
}

impl KolmogorovResult {
    /// `lhs − 3·stderr ≤ rhs`.
    pub fn holds(&self) -> bool {
        self.lhs - 3.0 * self.stderr <= self.rhs
    }
}

pub fn kolmogorov_inequality_check(
    case: &KolmogorovCase,
    workers: Option<usize>,
) -> Result<KolmogorovResult> {
    case.law.validate()?;
    case.rule.validate()?;
    if !(case.delta > 0.0) {
        return Err(Error::domain("delta must be positive"));
    }
    let plan = McPlan::new(case.replicates, case.seed).with_workers(workers);
    let hits = run_mc(&plan, |_, seed| {
        let mut rng = rng_from_seed(seed);
        let mut s = 0.0f64;
        let mut k = 0u32;
        loop {
            let y = case.law.sample(&mut rng);
            s += y;
            k += 1;
            if s.abs() >= case.delta {
                return Ok(true);
            }
            let stop = match case.rule {
                StoppingRule::Fixed { m } => k >= m,
                StoppingRule::FirstExceedance { threshold, cap } => y.abs() > threshold || k >= cap,
            };
            if stop {
                return Ok(false);
            }
        }
    })?;
    let n = hits.len() as f64;
    let lhs = hits.iter().filter(|&&h| h).count() as f64 / n;
    let mean_t = case.rule.mean(&case.law);
    Ok(KolmogorovResult {
        lhs,
        stderr: (lhs * (1.0 - lhs) / n).sqrt(),
        rhs: mean_t * case.law.variance() / (case.delta * case.delta),
        mean_stopping_time: mean_t,
    })
}
