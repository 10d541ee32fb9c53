use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::mix;

/// Replicate `r` of a plan runs with seed `mix(base_seed, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McPlan {
    pub replicates: u64,
    pub base_seed: u64,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl McPlan {
    pub fn new(replicates: u64, base_seed: u64) -> Self {
        Self {
            replicates,
            base_seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn seed(&self, replicate: u64) -> u64 {
        mix(self.base_seed, replicate)
    }
}

/// Runs `experiment(replicate, seed)` for every replicate and returns the
/// results in replicate order. Output depends only on the plan's seed and
/// replicate count, never on the worker count. The first failing replicate
/// (by index) is reported.
pub fn run_mc<T, F>(plan: &McPlan, experiment: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, u64) -> Result<T> + Sync,
{
    if plan.replicates == 0 {
        return Err(Error::domain(
            "a Monte Carlo plan needs at least one replicate",
        ));
    }
    let work = || -> Vec<Result<T>> {
        (0..plan.replicates)
            .into_par_iter()
            .map(|r| experiment(r, plan.seed(r)))
            .collect()
    };
    let results = match plan.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    results
        .into_iter()
        .enumerate()
        .map(|(r, res)| {
            res.map_err(|e| Error::Replicate {
                replicate: r as u64,
                source: Box::new(e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::Exp1;

    #[test]
    fn single_replicate_uses_first_child_seed() {
        let plan = McPlan::new(1, 42);
        let out = run_mc(&plan, |r, s| Ok((r, s))).unwrap();
        assert_eq!(out, vec![(0, mix(42, 0))]);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let f = |_r: u64, s: u64| -> Result<f64> {
            let mut rng = rng_from_seed(s);
            Ok((0..100).map(|_| rng.random::<f64>()).sum())
        };
        let base = run_mc(&McPlan::new(500, 9).with_workers(Some(1)), f).unwrap();
        for w in [2, 3, 8] {
            assert_eq!(
                base,
                run_mc(&McPlan::new(500, 9).with_workers(Some(w)), f).unwrap()
            );
        }
    }

    #[test]
    fn exponential_mean() {
        let plan = McPlan::new(10_000, 3);
        let draws = run_mc(&plan, |_, s| Ok(rng_from_seed(s).sample::<f64, _>(Exp1))).unwrap();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 1.0).abs() < 0.03, "{mean}");
    }

    #[test]
    fn first_failing_replicate_is_reported() {
        let plan = McPlan::new(50, 1).with_workers(Some(4));
        let err = run_mc(&plan, |r, _| {
            if r == 17 || r == 30 {
                Err(Error::domain("boom"))
            } else {
                Ok(r)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Replicate { replicate: 17, .. }));
        assert!(matches!(err.root(), Error::Domain(_)));
    }
}
