use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::levy_measure::{SpectralMeasure, SubordinatorTail};
use crate::rng::{rng_on_stream, SimRng};

/// Poisson arrival levels `Γ_k`, uniform locations `τ_k` and directions `V_k`.
///
/// Entries are indexed by arrival order `k`; [`PoissonDriver::order`] lists
/// the same indices sorted by location.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonDriver {
    gammas: Vec<f64>,
    taus: Vec<f64>,
    atoms: Vec<u32>,
    dirs: Vec<f64>,
    order: Vec<u32>,
    dimension: usize,
    seed: u64,
}

/// Draws a driver of depth `k`. Deterministic in `(k, seed, spectral)`.
///
/// Draw order on the generator: `k` exponentials for the Γ increments, `k + 1`
/// exponentials whose normalized partial sums are the sorted locations, a
/// shuffle assigning sorted locations to arrival indices, then the directions.
/// A draw with coincident locations or non-increasing Γ (floating-point
/// coincidences only) is discarded and redrawn on the next ChaCha stream.
pub fn sample_driver(k: usize, seed: u64, spectral: &SpectralMeasure) -> Result<PoissonDriver> {
    if k == 0 {
        return Err(Error::domain("truncation depth K must be >= 1"));
    }
    if k > u32::MAX as usize {
        return Err(Error::domain("truncation depth K too large"));
    }
    let dimension = spectral.dimension();
    let sampler = spectral.sampler();
    let mut stream = 0u64;
    loop {
        let mut rng = rng_on_stream(seed, stream);
        if let Some((gammas, taus, order)) = draw_levels(&mut rng, k) {
            let mut atoms = Vec::with_capacity(k);
            let mut dirs = vec![0.0; k * dimension];
            for chunk in dirs.chunks_exact_mut(dimension) {
                atoms.push(sampler.sample(&mut rng, chunk) as u32);
            }
            return Ok(PoissonDriver {
                gammas,
                taus,
                atoms,
                dirs,
                order,
                dimension,
                seed,
            });
        }
        stream += 1;
    }
}

type Levels = (Vec<f64>, Vec<f64>, Vec<u32>);

fn draw_levels(rng: &mut SimRng, k: usize) -> Option<Levels> {
    let mut gammas = Vec::with_capacity(k);
    let mut acc = 0.0f64;
    for _ in 0..k {
        let next = acc + rng.sample::<f64, _>(Exp1);
        if !(next > acc) {
            return None;
        }
        gammas.push(next);
        acc = next;
    }

    let mut sorted = Vec::with_capacity(k);
    let mut s = 0.0f64;
    for _ in 0..k {
        s += rng.sample::<f64, _>(Exp1);
        sorted.push(s);
    }
    let total = s + rng.sample::<f64, _>(Exp1);
    let mut prev = 0.0;
    for u in sorted.iter_mut() {
        *u /= total;
        if !(*u > prev && *u < 1.0) {
            return None;
        }
        prev = *u;
    }

    let mut order: Vec<u32> = (0..k as u32).collect();
    order.shuffle(rng);
    let mut taus = vec![0.0; k];
    for (&idx, &u) in order.iter().zip(&sorted) {
        taus[idx as usize] = u;
    }
    Some((gammas, taus, order))
}

impl PoissonDriver {
    /// Builds a driver from explicit sequences; `dirs` is `k × dimension`
    /// row-major and `atoms` names the atom each direction belongs to.
    pub fn from_parts(
        gammas: Vec<f64>,
        taus: Vec<f64>,
        atoms: Vec<u32>,
        dirs: Vec<f64>,
        dimension: usize,
    ) -> Result<Self> {
        let k = gammas.len();
        if k == 0 {
            return Err(Error::domain("a driver needs at least one point"));
        }
        if taus.len() != k || atoms.len() != k || dirs.len() != k * dimension {
            return Err(Error::domain("driver sequences have inconsistent lengths"));
        }
        if !(gammas[0] > 0.0) || gammas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "gammas must be positive and strictly increasing",
            ));
        }
        if taus.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::domain("taus must lie in (0, 1)"));
        }
        let mut order: Vec<u32> = (0..k as u32).collect();
        order.sort_by(|&a, &b| taus[a as usize].total_cmp(&taus[b as usize]));
        if order
            .windows(2)
            .any(|w| taus[w[0] as usize] == taus[w[1] as usize])
        {
            return Err(Error::domain("taus must be pairwise distinct"));
        }
        Ok(Self {
            gammas,
            taus,
            atoms,
            dirs,
            order,
            dimension,
            seed: 0,
        })
    }

    /// The driver restricted to its first `k` arrivals. Marks of the retained
    /// arrivals are unchanged; this is what a shallower truncation of the same
    /// infinite series looks like.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.depth() {
            return Err(Error::domain(
                "truncation must keep between 1 and K arrivals",
            ));
        }
        let mut out = Self::from_parts(
            self.gammas[..k].to_vec(),
            self.taus[..k].to_vec(),
            self.atoms[..k].to_vec(),
            self.dirs[..k * self.dimension].to_vec(),
            self.dimension,
        )?;
        out.seed = self.seed;
        Ok(out)
    }

    /// One-dimensional driver with all directions `+1`.
    pub fn from_levels(gammas: Vec<f64>, taus: Vec<f64>) -> Result<Self> {
        let k = gammas.len();
        Self::from_parts(gammas, taus, vec![0; k], vec![1.0; k], 1)
    }

    pub fn depth(&self) -> usize {
        self.gammas.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn atoms(&self) -> &[u32] {
        &self.atoms
    }

    /// Arrival indices sorted by location.
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    pub fn direction(&self, k: usize) -> &[f64] {
        &self.dirs[k * self.dimension..(k + 1) * self.dimension]
    }
}

/// Depth `K` whose expected temporal mass beyond `K`,
/// `(c_time·T)^(1/α) · K^(1-1/α) / (1/α - 1)`, is at most `tol`.
pub fn default_truncation_depth(sub: &SubordinatorTail, horizon: f64, tol: f64) -> Result<usize> {
    if !(horizon > 0.0 && tol > 0.0) {
        return Err(Error::domain("horizon and tolerance must be positive"));
    }
    let p = 1.0 / sub.alpha() - 1.0;
    let scale = (sub.c_time() * horizon).powf(1.0 / sub.alpha());
    let k = (scale / (tol * p)).powf(1.0 / p).ceil();
    if !k.is_finite() || k > u32::MAX as f64 {
        return Err(Error::domain(
            "requested tolerance needs an unrepresentable depth",
        ));
    }
    Ok((k as usize).max(1))
}
