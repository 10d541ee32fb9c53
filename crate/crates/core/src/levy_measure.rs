//! Lévy measures of the spatial and temporal limits in radial form.
//!
//! A spatial model is a spectral measure on the unit sphere together with a
//! Pareto tail per direction, `η̃([u, ∞), v) = c(v) · u^(-β(v))`. The
//! temporal limit is a stable subordinator with tail `c_time · x^(-α)`.
//! Everything here is closed form.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for unit norms and probability sums.
pub const CLOSED_FORM_TOL: f64 = 1e-12;

/// Pareto tail `c · u^(-β)` of one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalTail {
    c: f64,
    beta: f64,
    inv_beta: f64,
}

impl DirectionalTail {
    pub fn new(c: f64, beta: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::model(format!(
                "tail scale c must be positive, got {c}"
            )));
        }
        if !(beta > 0.0 && beta < 2.0) || beta == 1.0 {
            return Err(Error::model(format!(
                "tail index beta must lie in (0,1) or (1,2), got {beta}"
            )));
        }
        Ok(Self {
            c,
            beta,
            inv_beta: 1.0 / beta,
        })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `c · u^(-β)`.
    pub fn tail(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::domain(format!(
                "tail argument must be positive, got {u}"
            )));
        }
        Ok(self.tail_unchecked(u))
    }

    /// Right-continuous inverse `sup{u > 0 : tail(u) ≥ x} = (c / x)^(1/β)`.
    pub fn inverse_tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!(
                "inverse tail argument must be positive, got {x}"
            )));
        }
        Ok(self.inverse_tail_unchecked(x))
    }

    #[inline]
    pub(crate) fn tail_unchecked(&self, u: f64) -> f64 {
        self.c * u.powf(-self.beta)
    }

    #[inline]
    pub(crate) fn inverse_tail_unchecked(&self, x: f64) -> f64 {
        (self.c / x).powf(self.inv_beta)
    }

    /// `∫_0^1 u² · cβ u^(-β-1) du = cβ / (2 - β)`, finite since β < 2.
    pub fn small_jump_second_moment(&self) -> f64 {
        self.c * self.beta / (2.0 - self.beta)
    }

    /// Smallest radius of the Pareto law with this tail.
    pub fn scale_floor(&self) -> f64 {
        self.c.powf(self.inv_beta)
    }
}

/// Tail `c_time · x^(-α)` of the α-stable subordinator, α ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinatorTail {
    alpha: f64,
    c_time: f64,
    inv_alpha: f64,
}

impl SubordinatorTail {
    pub fn new(alpha: f64, c_time: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::model(format!(
                "subordinator index alpha must lie in (0,1), got {alpha}"
            )));
        }
        if !(c_time.is_finite() && c_time > 0.0) {
            return Err(Error::model(format!(
                "c_time must be positive, got {c_time}"
            )));
        }
        Ok(Self {
            alpha,
            c_time,
            inv_alpha: 1.0 / alpha,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_time(&self) -> f64 {
        self.c_time
    }

    pub fn tail(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!(
                "tail argument must be positive, got {x}"
            )));
        }
        Ok(self.c_time * x.powf(-self.alpha))
    }

    #[inline]
    pub(crate) fn inverse_tail_unchecked(&self, x: f64) -> f64 {
        (self.c_time / x).powf(self.inv_alpha)
    }

    /// The same tail viewed as a one-dimensional spatial model on `+e₁`.
    pub fn as_directional(&self) -> DirectionalTail {
        DirectionalTail {
            c: self.c_time,
            beta: self.alpha,
            inv_beta: self.inv_alpha,
        }
    }

    /// `E[E(t)] = t^α / (c_time · Γ(1-α) · Γ(1+α))` for the hitting-time process.
    pub fn mean_hitting_time(&self, t: f64) -> f64 {
        t.powf(self.alpha)
            / (self.c_time * libm::tgamma(1.0 - self.alpha) * libm::tgamma(1.0 + self.alpha))
    }
}

/// `(η^α)^←(x) = (c_time / x)^(1/α)`.
pub fn subordinator_inverse_tail(x: f64, sub: &SubordinatorTail) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "inverse tail argument must be positive, got {x}"
        )));
    }
    Ok(sub.inverse_tail_unchecked(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

/// Probability measure σ on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralMeasure {
    Atoms(Vec<Atom>),
    UniformSphere { dimension: usize },
}

impl SpectralMeasure {
    /// Validates a finite atom set.
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        let Some(first) = atoms.first() else {
            return Err(Error::model("spectral measure needs at least one atom"));
        };
        let dimension = first.direction.len();
        if dimension == 0 {
            return Err(Error::model("atom directions must have dimension >= 1"));
        }
        let mut total = 0.0;
        for (i, atom) in atoms.iter().enumerate() {
            if atom.direction.len() != dimension {
                return Err(Error::model(format!("atom {i} has the wrong dimension")));
            }
            let norm = euclidean_norm(&atom.direction);
            if (norm - 1.0).abs() > CLOSED_FORM_TOL {
                return Err(Error::model(format!(
                    "atom {i} direction has norm {norm}, expected 1"
                )));
            }
            if !(atom.weight > 0.0 && atom.weight.is_finite()) {
                return Err(Error::model(format!("atom {i} weight must be positive")));
            }
            total += atom.weight;
        }
        if (total - 1.0).abs() > CLOSED_FORM_TOL {
            return Err(Error::model(format!(
                "atom weights sum to {total}, expected 1"
            )));
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let dist = atoms[i]
                    .direction
                    .iter()
                    .zip(&atoms[j].direction)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if dist <= CLOSED_FORM_TOL {
                    return Err(Error::model(format!("atoms {i} and {j} share a direction")));
                }
            }
        }
        Ok(SpectralMeasure::Atoms(atoms))
    }

    pub fn uniform_sphere(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::model("uniform sphere needs dimension >= 1"));
        }
        Ok(SpectralMeasure::UniformSphere { dimension })
    }

    /// Unit mass at `+e₁` in one dimension, used for purely temporal drivers.
    pub fn point_mass_1d() -> Self {
        SpectralMeasure::Atoms(vec![Atom {
            direction: vec![1.0],
            weight: 1.0,
        }])
    }

    pub fn dimension(&self) -> usize {
        match self {
            SpectralMeasure::Atoms(atoms) => atoms[0].direction.len(),
            SpectralMeasure::UniformSphere { dimension } => *dimension,
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            SpectralMeasure::Atoms(atoms) => atoms.len(),
            SpectralMeasure::UniformSphere { .. } => 1,
        }
    }

    pub(crate) fn sampler(&self) -> DirectionSampler<'_> {
        match self {
            SpectralMeasure::Atoms(atoms) => {
                let mut acc = 0.0;
                let cumulative = atoms
                    .iter()
                    .map(|a| {
                        acc += a.weight;
                        acc
                    })
                    .collect();
                DirectionSampler::Atoms { atoms, cumulative }
            }
            SpectralMeasure::UniformSphere { dimension } => DirectionSampler::Sphere {
                dimension: *dimension,
            },
        }
    }
}

/// Draws directions `V ~ σ`, writing the unit vector and returning the atom
/// index (always 0 for the uniform sphere).
pub(crate) enum DirectionSampler<'a> {
    Atoms {
        atoms: &'a [Atom],
        cumulative: Vec<f64>,
    },
    Sphere {
        dimension: usize,
    },
}

impl DirectionSampler<'_> {
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> usize {
        match self {
            DirectionSampler::Atoms { atoms, cumulative } => {
                let idx = if atoms.len() == 1 {
                    0
                } else {
                    let u: f64 = rng.random();
                    cumulative
                        .iter()
                        .position(|&c| u < c)
                        .unwrap_or(atoms.len() - 1)
                };
                out.copy_from_slice(&atoms[idx].direction);
                idx
            }
            DirectionSampler::Sphere { dimension } => loop {
                let mut sq = 0.0;
                for slot in out.iter_mut().take(*dimension) {
                    let g: f64 = rng.sample(StandardNormal);
                    *slot = g;
                    sq += g * g;
                }
                if sq > 0.0 {
                    let inv = 1.0 / sq.sqrt();
                    out.iter_mut().for_each(|x| *x *= inv);
                    return 0;
                }
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenteringMode {
    /// All indices below 1: no centering (truncation level 0).
    None,
    /// All indices above 1: centering by the full mean (truncation level ∞).
    FullMean,
}

/// Lévy measure of the spatial limit in radial form.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasureModel {
    dimension: usize,
    spectral: SpectralMeasure,
    tails: Vec<DirectionalTail>,
    centering: CenteringMode,
    symmetric: bool,
}

impl LevyMeasureModel {
    /// Finite atom model; `tails[i]` belongs to `atoms[i]`.
    pub fn from_atoms(atoms: Vec<Atom>, tails: Vec<DirectionalTail>) -> Result<Self> {
        if atoms.len() != tails.len() {
            return Err(Error::model("one tail per atom is required"));
        }
        let spectral = SpectralMeasure::atoms(atoms)?;
        let dimension = spectral.dimension();
        let symmetric = match &spectral {
            SpectralMeasure::Atoms(atoms) => pairs_symmetric(atoms, &tails),
            SpectralMeasure::UniformSphere { .. } => unreachable!(),
        };
        Self::finish(dimension, spectral, tails, symmetric)
    }

    /// Multivariate stable case: σ uniform on the sphere, one shared tail.
    pub fn uniform_sphere(dimension: usize, tail: DirectionalTail) -> Result<Self> {
        let spectral = SpectralMeasure::uniform_sphere(dimension)?;
        Self::finish(dimension, spectral, vec![tail], true)
    }

    /// One-dimensional model whose marks are the subordinator's own jumps.
    pub fn tight(sub: &SubordinatorTail) -> Self {
        Self {
            dimension: 1,
            spectral: SpectralMeasure::point_mass_1d(),
            tails: vec![sub.as_directional()],
            centering: CenteringMode::None,
            symmetric: false,
        }
    }

    fn finish(
        dimension: usize,
        spectral: SpectralMeasure,
        tails: Vec<DirectionalTail>,
        symmetric: bool,
    ) -> Result<Self> {
        let below = tails.iter().filter(|t| t.beta < 1.0).count();
        let centering = if below == tails.len() {
            CenteringMode::None
        } else if below == 0 {
            CenteringMode::FullMean
        } else {
            return Err(Error::model(
                "tail indices on both sides of 1 are not supported",
            ));
        };
        if centering == CenteringMode::FullMean && !symmetric {
            return Err(Error::model(
                "tail indices above 1 require a symmetric spectral measure",
            ));
        }
        Ok(Self {
            dimension,
            spectral,
            tails,
            centering,
            symmetric,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn spectral(&self) -> &SpectralMeasure {
        &self.spectral
    }

    /// Per-atom tails, indexed like the atoms (a single entry for the sphere).
    pub fn tails(&self) -> &[DirectionalTail] {
        &self.tails
    }

    pub fn centering(&self) -> CenteringMode {
        self.centering
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// True when `η̃^←(x, v)` does not depend on `v`.
    pub fn is_direction_independent(&self) -> bool {
        self.tails.windows(2).all(|w| w[0] == w[1])
    }

    fn tail_of(&self, atom: usize) -> Result<&DirectionalTail> {
        self.tails
            .get(atom)
            .ok_or_else(|| Error::domain(format!("atom index {atom} out of range")))
    }

    pub fn tail(&self, u: f64, atom: usize) -> Result<f64> {
        self.tail_of(atom)?.tail(u)
    }

    pub fn inverse_tail(&self, x: f64, atom: usize) -> Result<f64> {
        self.tail_of(atom)?.inverse_tail(x)
    }

    /// `η({‖x‖ ≥ u}) = Σ_v σ(v) · c(v) · u^(-β(v))`.
    pub fn radial_tail(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::domain(format!(
                "tail argument must be positive, got {u}"
            )));
        }
        Ok(match &self.spectral {
            SpectralMeasure::Atoms(atoms) => atoms
                .iter()
                .zip(&self.tails)
                .map(|(a, t)| a.weight * t.tail_unchecked(u))
                .sum(),
            SpectralMeasure::UniformSphere { .. } => self.tails[0].tail_unchecked(u),
        })
    }

    /// `∫_{ε ≤ ‖x‖ ≤ τ} x dη(x)` with τ fixed by the centering mode.
    pub fn compensator(&self, eps: f64) -> Result<Vec<f64>> {
        if !(eps > 0.0) {
            return Err(Error::domain(format!("eps must be positive, got {eps}")));
        }
        let zero = vec![0.0; self.dimension];
        if self.centering == CenteringMode::None || self.symmetric {
            return Ok(zero);
        }
        // Not reachable through the public constructors, kept for completeness.
        let SpectralMeasure::Atoms(atoms) = &self.spectral else {
            return Ok(zero);
        };
        let mut total = zero;
        for (atom, tail) in atoms.iter().zip(&self.tails) {
            let part = atom_compensator(eps, atom.weight, &atom.direction, tail)?;
            total.iter_mut().zip(part).for_each(|(s, p)| *s += p);
        }
        Ok(total)
    }

    /// Norming constants `b_n = n^(1/α)` and diagonal `A_n`.
    pub fn normalization(&self, n: u64, sub: &SubordinatorTail) -> Result<Normalization> {
        if n == 0 {
            return Err(Error::domain("normalization index n must be >= 1"));
        }
        Ok(Normalization {
            b_n: (n as f64).powf(1.0 / sub.alpha()),
            a_diag: self.jump_normalization(n)?,
        })
    }

    /// Diagonal of `A_n` alone.
    pub fn jump_normalization(&self, n: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::domain("normalization index n must be >= 1"));
        }
        let nf = n as f64;
        Ok(self
            .diagonal_exponents()?
            .into_iter()
            .map(|inv_beta| nf.powf(-inv_beta))
            .collect())
    }

    /// Per-coordinate exponent `1/β_i` of the diagonal norming operator.
    fn diagonal_exponents(&self) -> Result<Vec<f64>> {
        if self.is_direction_independent() {
            return Ok(vec![1.0 / self.tails[0].beta; self.dimension]);
        }
        let SpectralMeasure::Atoms(atoms) = &self.spectral else {
            unreachable!("the uniform sphere carries a single tail")
        };
        let mut exps: Vec<Option<f64>> = vec![None; self.dimension];
        for (i, (atom, tail)) in atoms.iter().zip(&self.tails).enumerate() {
            let axis = axis_of(&atom.direction).ok_or_else(|| {
                Error::Unsupported(format!(
                    "atom {i} is off the coordinate axes and indices differ; a diagonal norming operator does not exist"
                ))
            })?;
            match exps[axis] {
                None => exps[axis] = Some(1.0 / tail.beta),
                Some(e) if e == 1.0 / tail.beta => {}
                Some(_) => {
                    return Err(Error::Unsupported(format!(
                        "coordinate {axis} carries two different tail indices"
                    )))
                }
            }
        }
        exps.into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.ok_or_else(|| Error::Unsupported(format!("coordinate {i} carries no atom")))
            })
            .collect()
    }
}

/// Closed form of one atom's contribution to `∫_{‖x‖ ≥ ε} x dη(x)` for β > 1:
/// `weight · v · c · β · ε^(1-β) / (β - 1)`.
pub fn atom_compensator(
    eps: f64,
    weight: f64,
    direction: &[f64],
    tail: &DirectionalTail,
) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    if tail.beta < 1.0 {
        return Err(Error::domain(
            "the full mean diverges for tail indices below 1",
        ));
    }
    let radial = weight * tail.c * tail.beta * eps.powf(1.0 - tail.beta) / (tail.beta - 1.0);
    Ok(direction.iter().map(|v| v * radial).collect())
}

/// Norming sequences for the waiting times (`b_n`) and the jumps (`A_n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub b_n: f64,
    pub a_diag: Vec<f64>,
}

impl Normalization {
    /// `A_n x` written into `out`.
    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for ((o, a), v) in out.iter_mut().zip(&self.a_diag).zip(x) {
            *o = a * v;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

pub(crate) fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn axis_of(direction: &[f64]) -> Option<usize> {
    let mut axis = None;
    for (i, v) in direction.iter().enumerate() {
        if v.abs() > CLOSED_FORM_TOL {
            if axis.is_some() {
                return None;
            }
            axis = Some(i);
        }
    }
    axis
}

fn pairs_symmetric(atoms: &[Atom], tails: &[DirectionalTail]) -> bool {
    atoms.iter().zip(tails).all(|(atom, tail)| {
        atoms.iter().zip(tails).any(|(other, other_tail)| {
            other.weight == atom.weight
                && other_tail == tail
                && other
                    .direction
                    .iter()
                    .zip(&atom.direction)
                    .all(|(a, b)| (a + b).abs() <= CLOSED_FORM_TOL)
        })
    })
}

/// Pareto radius `floor · U^(-1/β)`.
#[inline]
pub(crate) fn pareto_draw<R: Rng + ?Sized>(rng: &mut R, floor: f64, inv_index: f64) -> f64 {
    let u: f64 = rng.sample(Open01);
    floor * u.powf(-inv_index)
}
