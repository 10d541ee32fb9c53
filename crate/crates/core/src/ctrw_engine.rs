//! Finite-n coupled walks: waiting times `J_k`, jumps `X_k`, renewal counts and
//! normalized positions, residual order statistics and marked point processes.

use rand::distr::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::levy_measure::{
    pareto_draw, DirectionSampler, LevyMeasureModel, Normalization, SubordinatorTail,
};
use crate::mpp::{MarkedPoint, TimeMarking};
use crate::rng::{rng_on_stream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// `J` and `X` from independent generators.
    Uncoupled,
    /// One-dimensional, `X = J`.
    Tight,
    /// One Pareto shock `W` per step drives both `J = (c_time·W)^(1/α)` and
    /// `‖X‖ = (c(V)·W)^(1/β(V))`.
    CommonShock,
}

/// Joint law of a step `(J, X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    mode: CouplingMode,
    sub: SubordinatorTail,
    model: LevyMeasureModel,
}

impl CouplingSpec {
    /// In tight mode `model` must be one-dimensional and is replaced by the
    /// waiting-time tail itself.
    pub fn new(mode: CouplingMode, model: LevyMeasureModel, sub: SubordinatorTail) -> Result<Self> {
        let model = match mode {
            CouplingMode::Tight => {
                if model.dimension() != 1 {
                    return Err(Error::model("tight coupling needs a one-dimensional model"));
                }
                LevyMeasureModel::tight(&sub)
            }
            _ => model,
        };
        Ok(Self { mode, sub, model })
    }

    pub fn tight(sub: SubordinatorTail) -> Self {
        Self {
            mode: CouplingMode::Tight,
            model: LevyMeasureModel::tight(&sub),
            sub,
        }
    }

    pub fn mode(&self) -> CouplingMode {
        self.mode
    }

    pub fn sub(&self) -> &SubordinatorTail {
        &self.sub
    }

    pub fn model(&self) -> &LevyMeasureModel {
        &self.model
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn normalization(&self, n_scale: u64) -> Result<Normalization> {
        self.model.normalization(n_scale, &self.sub)
    }
}

/// Sequential generator of steps. Generator layout for seed `s`: the waiting
/// times (and the shared shock in common-shock mode) come from ChaCha stream 0
/// of `s`, uncoupled jumps from stream 1.
pub struct StepSampler<'a> {
    mode: CouplingMode,
    time_floor: f64,
    inv_alpha: f64,
    floors: Vec<f64>,
    inv_betas: Vec<f64>,
    directions: DirectionSampler<'a>,
    time_rng: SimRng,
    space_rng: SimRng,
}

impl<'a> StepSampler<'a> {
    pub fn new(coupling: &'a CouplingSpec, seed: u64) -> Self {
        let tails = coupling.model.tails();
        Self {
            mode: coupling.mode,
            time_floor: coupling.sub.as_directional().scale_floor(),
            inv_alpha: 1.0 / coupling.sub.alpha(),
            floors: tails.iter().map(|t| t.scale_floor()).collect(),
            inv_betas: tails.iter().map(|t| 1.0 / t.beta()).collect(),
            directions: coupling.model.spectral().sampler(),
            time_rng: rng_on_stream(seed, 0),
            space_rng: rng_on_stream(seed, 1),
        }
    }

    /// Writes `X` into `jump` and returns `J`.
    #[inline]
    pub fn next_step(&mut self, jump: &mut [f64]) -> f64 {
        match self.mode {
            CouplingMode::Uncoupled => {
                let wait = pareto_draw(&mut self.time_rng, self.time_floor, self.inv_alpha);
                self.spatial(jump);
                wait
            }
            CouplingMode::Tight => {
                let wait = pareto_draw(&mut self.time_rng, self.time_floor, self.inv_alpha);
                jump[0] = wait;
                wait
            }
            CouplingMode::CommonShock => {
                let u: f64 = self.time_rng.sample(Open01);
                let atom = self.directions.sample(&mut self.time_rng, jump);
                let radius = self.floors[atom] * u.powf(-self.inv_betas[atom]);
                jump.iter_mut().for_each(|x| *x *= radius);
                self.time_floor * u.powf(-self.inv_alpha)
            }
        }
    }

    #[inline]
    fn spatial(&mut self, jump: &mut [f64]) {
        let atom = self.directions.sample(&mut self.space_rng, jump);
        let radius = pareto_draw(&mut self.space_rng, self.floors[atom], self.inv_betas[atom]);
        jump.iter_mut().for_each(|x| *x *= radius);
    }
}

/// `n` coupled steps; `jumps` is `n × d` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkSample {
    waits: Vec<f64>,
    jumps: Vec<f64>,
    dimension: usize,
    seed: u64,
}

impl WalkSample {
    pub fn from_parts(waits: Vec<f64>, jumps: Vec<f64>, dimension: usize) -> Result<Self> {
        if waits.is_empty() || dimension == 0 || jumps.len() != waits.len() * dimension {
            return Err(Error::domain("walk arrays have inconsistent lengths"));
        }
        if waits.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::domain("waiting times must be positive"));
        }
        Ok(Self {
            waits,
            jumps,
            dimension,
            seed: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.waits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waits.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn waits(&self) -> &[f64] {
        &self.waits
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn jump(&self, k: usize) -> &[f64] {
        &self.jumps[k * self.dimension..(k + 1) * self.dimension]
    }
}

pub fn sample_walk(n: usize, coupling: &CouplingSpec, seed: u64) -> Result<WalkSample> {
    if n == 0 {
        return Err(Error::domain("walk length must be >= 1"));
    }
    let d = coupling.dimension();
    let mut sampler = StepSampler::new(coupling, seed);
    let mut waits = Vec::with_capacity(n);
    let mut jumps = vec![0.0; n * d];
    for row in jumps.chunks_exact_mut(d) {
        waits.push(sampler.next_step(row));
    }
    Ok(WalkSample {
        waits,
        jumps,
        dimension: d,
        seed,
    })
}

/// The jumps of an uncoupled walk without its waiting times: identical to
/// `sample_walk(n, uncoupled, seed).jumps()`.
pub fn sample_jumps(n: usize, model: &LevyMeasureModel, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("walk length must be >= 1"));
    }
    let tails = model.tails();
    let floors: Vec<f64> = tails.iter().map(|t| t.scale_floor()).collect();
    let inv_betas: Vec<f64> = tails.iter().map(|t| 1.0 / t.beta()).collect();
    let directions = model.spectral().sampler();
    let mut rng = rng_on_stream(seed, 1);
    let d = model.dimension();
    let mut jumps = vec![0.0; n * d];
    for row in jumps.chunks_exact_mut(d) {
        let atom = directions.sample(&mut rng, row);
        let radius = pareto_draw(&mut rng, floors[atom], inv_betas[atom]);
        row.iter_mut().for_each(|x| *x *= radius);
    }
    Ok(jumps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count {
    pub n: usize,
    /// Every step of the sample renews by `t`; the true count may be larger.
    pub saturated: bool,
}

/// `N_t = max{n : T_n ≤ t}` with `T_0 = 0`.
pub fn counting(walk: &WalkSample, t: f64) -> Result<Count> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let mut renewal = 0.0;
    for (k, &w) in walk.waits.iter().enumerate() {
        renewal += w;
        if renewal > t {
            return Ok(Count {
                n: k,
                saturated: false,
            });
        }
    }
    Ok(Count {
        n: walk.len(),
        saturated: true,
    })
}

/// Normalized walk around time `t`: the count `N = N_{t·b_n}`, the positions
/// `Σ_{k≤N} A_n X_k` and `Σ_{k≤N+1} A_n X_k`, and the straddling renewal times
/// `T_N / b_n ≤ t < T_{N+1} / b_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Positions {
    pub count: u64,
    pub backward: Vec<f64>,
    pub forward: Vec<f64>,
    pub renewal_left: f64,
    pub renewal_right: f64,
}

fn positions(walk: &WalkSample, t: f64, norm: &Normalization) -> Result<Positions> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let level = t * norm.b_n;
    let d = walk.dimension;
    let mut acc = PositionAccumulator::new(d);
    for (k, &w) in walk.waits.iter().enumerate() {
        if let Some(done) = acc.push(w, walk.jump(k), level, norm) {
            return Ok(done);
        }
    }
    Err(Error::WalkSaturated {
        level,
        steps: walk.len(),
    })
}

/// Running state shared by the array and streaming position code so both
/// perform the same floating-point operations in the same order.
struct PositionAccumulator {
    renewal: f64,
    count: u64,
    position: Vec<f64>,
    scaled: Vec<f64>,
}

impl PositionAccumulator {
    fn new(d: usize) -> Self {
        Self {
            renewal: 0.0,
            count: 0,
            position: vec![0.0; d],
            scaled: vec![0.0; d],
        }
    }

    #[inline]
    fn push(
        &mut self,
        wait: f64,
        jump: &[f64],
        level: f64,
        norm: &Normalization,
    ) -> Option<Positions> {
        norm.apply_into(jump, &mut self.scaled);
        let previous = self.renewal;
        self.renewal += wait;
        if self.renewal > level {
            let forward = self
                .position
                .iter()
                .zip(&self.scaled)
                .map(|(p, s)| p + s)
                .collect();
            return Some(Positions {
                count: self.count,
                backward: self.position.clone(),
                forward,
                renewal_left: previous / norm.b_n,
                renewal_right: self.renewal / norm.b_n,
            });
        }
        self.count += 1;
        self.position
            .iter_mut()
            .zip(&self.scaled)
            .for_each(|(p, s)| *p += s);
        None
    }
}

/// `Σ_{k ≤ N_{t·b_n}} A_n X_k`; centering is zero under the model policy.
pub fn ctrw_position_backward(
    walk: &WalkSample,
    t: f64,
    n_scale: u64,
    coupling: &CouplingSpec,
) -> Result<Vec<f64>> {
    Ok(positions(walk, t, &coupling.normalization(n_scale)?)?.backward)
}

/// `Σ_{k ≤ N_{t·b_n}+1} A_n X_k`.
pub fn ctrw_position_forward(
    walk: &WalkSample,
    t: f64,
    n_scale: u64,
    coupling: &CouplingSpec,
) -> Result<Vec<f64>> {
    Ok(positions(walk, t, &coupling.normalization(n_scale)?)?.forward)
}

/// Both positions and the straddling renewal times from one walk.
pub fn ctrw_positions(
    walk: &WalkSample,
    t: f64,
    n_scale: u64,
    coupling: &CouplingSpec,
) -> Result<Positions> {
    positions(walk, t, &coupling.normalization(n_scale)?)
}

/// Generates steps one at a time until the renewal time passes `t·b_n`; the
/// result equals [`ctrw_positions`] on `sample_walk(m, coupling, seed)` for any
/// long enough `m`, without storing the walk. Gives up after `max_steps`.
pub fn stream_positions(
    coupling: &CouplingSpec,
    n_scale: u64,
    t: f64,
    seed: u64,
    max_steps: usize,
) -> Result<Positions> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    let norm = coupling.normalization(n_scale)?;
    let level = t * norm.b_n;
    let d = coupling.dimension();
    let mut sampler = StepSampler::new(coupling, seed);
    let mut acc = PositionAccumulator::new(d);
    let mut jump = vec![0.0; d];
    for _ in 0..max_steps {
        let wait = sampler.next_step(&mut jump);
        if let Some(done) = acc.push(wait, &jump, level, &norm) {
            return Ok(done);
        }
    }
    Err(Error::WalkSaturated {
        level,
        steps: max_steps,
    })
}

/// Top `k_max` rows by Euclidean norm, largest first, with their 1-based
/// original indices (antiranks). Equal norms keep the smaller index first.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualOrder {
    pub vectors: Vec<f64>,
    pub norms: Vec<f64>,
    pub antiranks: Vec<usize>,
    pub dimension: usize,
}

impl ResidualOrder {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dimension..(k + 1) * self.dimension]
    }
}

pub fn residual_order_statistics(
    vectors: &[f64],
    dimension: usize,
    k_max: usize,
) -> Result<ResidualOrder> {
    if dimension == 0 || !vectors.len().is_multiple_of(dimension) {
        return Err(Error::domain(
            "vector array length is not a multiple of the dimension",
        ));
    }
    let n = vectors.len() / dimension;
    if n == 0 {
        return Err(Error::domain(
            "residual order statistics of an empty sample",
        ));
    }
    if k_max == 0 || k_max > n {
        return Err(Error::domain(format!(
            "k_max must lie in 1..={n}, got {k_max}"
        )));
    }
    let norms: Vec<f64> = vectors
        .chunks_exact(dimension)
        .map(crate::levy_measure::euclidean_norm)
        .collect();
    let cmp = |a: &usize, b: &usize| norms[*b].total_cmp(&norms[*a]).then(a.cmp(b));
    let mut idx: Vec<usize> = (0..n).collect();
    if k_max < n {
        idx.select_nth_unstable_by(k_max - 1, cmp);
        idx.truncate(k_max);
    }
    idx.sort_unstable_by(cmp);
    let mut out = Vec::with_capacity(k_max * dimension);
    for &i in &idx {
        out.extend_from_slice(&vectors[i * dimension..(i + 1) * dimension]);
    }
    Ok(ResidualOrder {
        vectors: out,
        norms: idx.iter().map(|&i| norms[i]).collect(),
        antiranks: idx.into_iter().map(|i| i + 1).collect(),
        dimension,
    })
}

/// Points `(T_k / b_n, A_n X_k)` (backward) or `(T_{k-1} / b_n, A_n X_k)`
/// (forward) over all steps of the walk with `‖A_n X_k‖ ≥ eps`.
pub fn marked_point_process(
    walk: &WalkSample,
    n_scale: u64,
    marking: TimeMarking,
    eps: f64,
    coupling: &CouplingSpec,
) -> Result<Vec<MarkedPoint>> {
    if !(eps > 0.0) {
        return Err(Error::domain(
            "marked point processes are restricted to marks of norm >= eps > 0",
        ));
    }
    let norm = coupling.normalization(n_scale)?;
    let mut points = Vec::new();
    let mut renewal = 0.0;
    let mut scaled = vec![0.0; walk.dimension];
    for (k, &w) in walk.waits.iter().enumerate() {
        let previous = renewal;
        renewal += w;
        norm.apply_into(walk.jump(k), &mut scaled);
        if crate::levy_measure::euclidean_norm(&scaled) >= eps {
            let time = match marking {
                TimeMarking::Backward => renewal,
                TimeMarking::Forward => previous,
            } / norm.b_n;
            points.push(MarkedPoint {
                time,
                mark: scaled.clone(),
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_measure::{Atom, DirectionalTail};
    use crate::rng::mix;

    fn sub05() -> SubordinatorTail {
        SubordinatorTail::new(0.5, 1.0).unwrap()
    }

    fn two_axis(c: f64, b1: f64, b2: f64) -> LevyMeasureModel {
        let mut atoms = Vec::new();
        let mut tails = Vec::new();
        for (axis, beta) in [(0usize, b1), (1, b2)] {
            for sign in [1.0, -1.0] {
                let mut dir = vec![0.0; 2];
                dir[axis] = sign;
                atoms.push(Atom {
                    direction: dir,
                    weight: 0.25,
                });
                tails.push(DirectionalTail::new(c, beta).unwrap());
            }
        }
        LevyMeasureModel::from_atoms(atoms, tails).unwrap()
    }

    fn hand_walk() -> WalkSample {
        WalkSample::from_parts(vec![0.5, 0.7, 0.8], vec![1.0, -2.0, 3.0], 1).unwrap()
    }

    #[test]
    fn counting_by_hand() {
        let w = hand_walk();
        assert_eq!(counting(&w, 1.2).unwrap().n, 2);
        assert_eq!(counting(&w, 0.0).unwrap().n, 0);
        assert_eq!(counting(&w, 0.49).unwrap().n, 0);
        let c = counting(&w, 5.0).unwrap();
        assert!(c.saturated && c.n == 3);
    }

    #[test]
    fn renewal_duality_exhaustive() {
        let coupling = CouplingSpec::tight(sub05());
        for r in 0..50 {
            let w = sample_walk(12, &coupling, mix(1, r)).unwrap();
            let mut renewals = vec![0.0];
            for &x in w.waits() {
                renewals.push(renewals.last().unwrap() + x);
            }
            for &t in renewals.iter().chain(&[0.3, 2.0, 17.0, 1e3]) {
                let c = counting(&w, t).unwrap();
                for (m, &tm) in renewals.iter().enumerate() {
                    assert_eq!(tm <= t, c.n >= m);
                }
            }
        }
    }

    #[test]
    fn tight_steps_coincide_and_determinism() {
        let coupling = CouplingSpec::tight(sub05());
        let w = sample_walk(1000, &coupling, 5).unwrap();
        assert_eq!(w.waits(), w.jumps());
        assert_eq!(w, sample_walk(1000, &coupling, 5).unwrap());
        assert!(w.waits().iter().all(|&j| j >= 1.0));
    }

    #[test]
    fn waiting_time_tail() {
        let coupling = CouplingSpec::tight(sub05());
        let w = sample_walk(1_000_000, &coupling, 77).unwrap();
        let frac = w.waits().iter().filter(|&&j| j > 10.0).count() as f64 / 1e6;
        assert!((frac - 10f64.powf(-0.5)).abs() < 0.002, "{frac}");
    }

    #[test]
    fn conditional_jump_tail_per_atom() {
        let model = two_axis(2.0, 0.6, 0.8);
        let sub = SubordinatorTail::new(0.7, 1.5).unwrap();
        for mode in [CouplingMode::Uncoupled, CouplingMode::CommonShock] {
            let coupling = CouplingSpec::new(mode, model.clone(), sub).unwrap();
            let w = sample_walk(400_000, &coupling, 9).unwrap();
            for (axis, beta) in [(0usize, 0.6f64), (1, 0.8)] {
                let rows: Vec<&[f64]> = w
                    .jumps()
                    .chunks_exact(2)
                    .filter(|r| r[axis] != 0.0)
                    .collect();
                let u = 9.0;
                let frac =
                    rows.iter().filter(|r| r[axis].abs() > u).count() as f64 / rows.len() as f64;
                let want = 2.0 * u.powf(-beta);
                let se = (want * (1.0 - want) / rows.len() as f64).sqrt();
                assert!(
                    (frac - want).abs() < 4.0 * se,
                    "{mode:?} {axis} {frac} {want}"
                );
            }
            let frac = w.waits().iter().filter(|&&j| j > 20.0).count() as f64 / 400_000.0;
            let want = 1.5 * 20f64.powf(-0.7);
            assert!((frac - want).abs() < 4.0 * (want / 400_000.0).sqrt());
        }
    }

    #[test]
    fn jumps_only_matches_uncoupled_walk() {
        let model = two_axis(1.0, 0.6, 0.8);
        let coupling = CouplingSpec::new(CouplingMode::Uncoupled, model.clone(), sub05()).unwrap();
        let w = sample_walk(5000, &coupling, 31).unwrap();
        assert_eq!(w.jumps(), &sample_jumps(5000, &model, 31).unwrap()[..]);
    }

    #[test]
    fn positions_by_hand() {
        let w = hand_walk();
        let coupling = CouplingSpec::tight(SubordinatorTail::new(0.5, 1.0).unwrap());
        // n_scale = 1 gives b_n = 1 and A_n = 1.
        let p = ctrw_positions(&w, 1.3, 1, &coupling).unwrap();
        assert_eq!(p.count, 2);
        assert_eq!(p.backward, vec![-1.0]);
        assert_eq!(p.forward, vec![2.0]);
        assert_eq!(
            ctrw_position_backward(&w, 0.0, 1, &coupling).unwrap(),
            vec![0.0]
        );
        assert_eq!(
            ctrw_position_forward(&w, 0.0, 1, &coupling).unwrap(),
            vec![1.0]
        );
        assert!(matches!(
            ctrw_position_backward(&w, 2.0, 1, &coupling),
            Err(Error::WalkSaturated { .. })
        ));
        let big = WalkSample::from_parts(vec![1e9], vec![1.0], 1).unwrap();
        assert_eq!(
            ctrw_position_backward(&big, 10.0, 1, &coupling).unwrap(),
            vec![0.0]
        );
    }

    #[test]
    fn tight_position_is_last_renewal() {
        let coupling = CouplingSpec::tight(sub05());
        let n = 1000u64;
        for r in 0..40 {
            let w = sample_walk(20_000, &coupling, mix(4, r)).unwrap();
            let b_n = (n as f64).powf(2.0);
            let c = counting(&w, b_n).unwrap();
            assert!(!c.saturated);
            let last: f64 = w.waits()[..c.n].iter().sum::<f64>() / b_n;
            let next: f64 = w.waits()[..=c.n].iter().sum::<f64>() / b_n;
            let p = ctrw_positions(&w, 1.0, n, &coupling).unwrap();
            assert!((p.backward[0] - last).abs() <= 1e-12 * last.max(1.0));
            assert!((p.forward[0] - next).abs() <= 1e-12 * next.max(1.0));
            assert_eq!(p.count as usize, c.n);
        }
    }

    #[test]
    fn streaming_equals_array() {
        let sub = sub05();
        for coupling in [
            CouplingSpec::tight(sub),
            CouplingSpec::new(CouplingMode::Uncoupled, two_axis(1.0, 0.6, 0.8), sub).unwrap(),
            CouplingSpec::new(CouplingMode::CommonShock, two_axis(1.0, 0.6, 0.8), sub).unwrap(),
        ] {
            for r in 0..20 {
                let seed = mix(6, r);
                let s = stream_positions(&coupling, 500, 1.0, seed, 1_000_000).unwrap();
                let w = sample_walk(s.count as usize + 1, &coupling, seed).unwrap();
                assert_eq!(ctrw_positions(&w, 1.0, 500, &coupling).unwrap(), s);
                let fwd = ctrw_position_forward(&w, 1.0, 500, &coupling).unwrap();
                let bwd = ctrw_position_backward(&w, 1.0, 500, &coupling).unwrap();
                let norm = coupling.normalization(500).unwrap();
                let last = norm.apply(w.jump(s.count as usize));
                for i in 0..fwd.len() {
                    assert_eq!(fwd[i], bwd[i] + last[i]);
                }
            }
        }
    }

    #[test]
    fn sorting_by_hand() {
        let r = residual_order_statistics(&[3.0, 0.0, 0.0, -5.0, 1.0, 1.0], 2, 3).unwrap();
        assert_eq!(r.vectors, vec![0.0, -5.0, 3.0, 0.0, 1.0, 1.0]);
        assert_eq!(r.antiranks, vec![2, 1, 3]);
        let r = residual_order_statistics(&[4.0, 2.0], 2, 1).unwrap();
        assert_eq!(r.antiranks, vec![1]);
        let r = residual_order_statistics(&[1.0, -1.0, 1.0, -1.0], 1, 4).unwrap();
        assert_eq!(r.antiranks, vec![1, 2, 3, 4]);
        let r = residual_order_statistics(&[1.0, -1.0, 2.0, -1.0], 1, 2).unwrap();
        assert_eq!(r.antiranks, vec![3, 1]);
        assert!(residual_order_statistics(&[], 2, 1).is_err());
        assert!(residual_order_statistics(&[1.0], 1, 2).is_err());
    }

    #[test]
    fn mpp_by_hand() {
        let w = hand_walk();
        let coupling = CouplingSpec::tight(sub05());
        let back = marked_point_process(&w, 1, TimeMarking::Backward, 1.5, &coupling).unwrap();
        let times: Vec<f64> = back.iter().map(|p| p.time).collect();
        assert_eq!(times, vec![1.2, 0.5 + 0.7 + 0.8]);
        let all = marked_point_process(&w, 1, TimeMarking::Backward, 0.1, &coupling).unwrap();
        let fwd = marked_point_process(&w, 1, TimeMarking::Forward, 0.1, &coupling).unwrap();
        assert_eq!(fwd[0].time, 0.0);
        for k in 1..3 {
            assert_eq!(fwd[k].time, all[k - 1].time);
            assert_eq!(fwd[k].mark, all[k].mark);
        }
        assert!(
            marked_point_process(&w, 1, TimeMarking::Backward, 1e9, &coupling)
                .unwrap()
                .is_empty()
        );
        assert!(marked_point_process(&w, 1, TimeMarking::Backward, 0.0, &coupling).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn residual_order_is_sorted_top_multiset(
                rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..60),
                k in 1usize..60,
            ) {
                let n = rows.len();
                let k = k.min(n);
                let flat: Vec<f64> = rows.concat();
                let r = residual_order_statistics(&flat, 3, k).unwrap();
                prop_assert!(r.norms.windows(2).all(|w| w[0] >= w[1]));
                let mut all: Vec<(f64, usize)> = rows
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (crate::levy_measure::euclidean_norm(v), i))
                    .collect();
                all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                for (j, &(_, i)) in all.iter().take(k).enumerate() {
                    prop_assert_eq!(r.antiranks[j], i + 1);
                    prop_assert_eq!(r.vector(j), &rows[i][..]);
                }
            }

            #[test]
            fn forward_minus_backward_is_next_jump(seed in any::<u64>(), t in 0.0f64..5.0) {
                let coupling = CouplingSpec::tight(SubordinatorTail::new(0.6, 1.0).unwrap());
                let w = sample_walk(2000, &coupling, seed).unwrap();
                let norm = coupling.normalization(50).unwrap();
                if let Ok(p) = ctrw_positions(&w, t, 50, &coupling) {
                    let next = norm.apply(w.jump(p.count as usize))[0];
                    prop_assert_eq!(p.forward[0], p.backward[0] + next);
                }
            }
        }
    }
}
