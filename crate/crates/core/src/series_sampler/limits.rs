use crate::error::{Error, Result};
use crate::levy_measure::{
    CenteringMode, DirectionalTail, LevyMeasureModel, SpectralMeasure, SubordinatorTail,
};
use crate::mpp::{MarkedPoint, TimeMarking};
use crate::rng::mix;

use super::driver::{sample_driver, PoissonDriver};
use super::path::StepPath;

#[inline]
fn temporal_mark(sub: &SubordinatorTail, gamma: f64, horizon: f64) -> f64 {
    sub.inverse_tail_unchecked(gamma / horizon)
}

#[inline]
fn spatial_mark(tail: &DirectionalTail, gamma: f64, horizon: f64) -> f64 {
    tail.inverse_tail_unchecked(gamma / horizon)
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    Ok(())
}

fn tail_for(tails: &[DirectionalTail], atom: u32) -> Result<&DirectionalTail> {
    tails
        .get(atom as usize)
        .ok_or_else(|| Error::domain(format!("driver atom {atom} has no tail")))
}

fn check_eps(model: &LevyMeasureModel, eps: f64) -> Result<()> {
    if !(eps >= 0.0) {
        return Err(Error::domain(format!("eps must be >= 0, got {eps}")));
    }
    if eps == 0.0 && model.centering() == CenteringMode::FullMean {
        return Err(Error::domain(
            "eps = 0 needs all tail indices below 1; the series does not converge absolutely",
        ));
    }
    Ok(())
}

fn compensator_or_zero(model: &LevyMeasureModel, eps: f64) -> Result<Vec<f64>> {
    if eps > 0.0 {
        model.compensator(eps)
    } else {
        Ok(vec![0.0; model.dimension()])
    }
}

/// Ferguson–Klass path of the stable subordinator: a jump
/// `(c_time·T/Γ_l)^(1/α)` at `T·τ_l` for every arrival.
pub fn subordinator_path(
    driver: &PoissonDriver,
    horizon: f64,
    sub: &SubordinatorTail,
) -> Result<StepPath> {
    check_horizon(horizon)?;
    let mut locations = Vec::with_capacity(driver.depth());
    let mut jumps = Vec::with_capacity(driver.depth());
    for &k in driver.order() {
        let k = k as usize;
        locations.push(horizon * driver.taus()[k]);
        jumps.push(temporal_mark(sub, driver.gammas()[k], horizon));
    }
    StepPath::new(locations, jumps, 1, horizon, vec![0.0])
}

/// LePage path of the spatial limit: a jump `η̃^←(Γ_k/T, V_k)·V_k` at `T·τ_k`,
/// kept when its magnitude exceeds `eps`, with drift `-compensator(eps)`.
pub fn operator_levy_path(
    driver: &PoissonDriver,
    horizon: f64,
    model: &LevyMeasureModel,
    eps: f64,
) -> Result<StepPath> {
    check_horizon(horizon)?;
    check_eps(model, eps)?;
    if driver.dimension() != model.dimension() {
        return Err(Error::domain("driver and model dimensions differ"));
    }
    let d = model.dimension();
    let mut locations = Vec::new();
    let mut jumps = Vec::new();
    for &k in driver.order() {
        let k = k as usize;
        let m = spatial_mark(
            tail_for(model.tails(), driver.atoms()[k])?,
            driver.gammas()[k],
            horizon,
        );
        if m > eps {
            locations.push(horizon * driver.taus()[k]);
            jumps.extend(driver.direction(k).iter().map(|v| m * v));
        }
    }
    let drift = compensator_or_zero(model, eps)?
        .into_iter()
        .map(|c| -c)
        .collect();
    StepPath::new(locations, jumps, d, horizon, drift)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    /// Independent drivers for the temporal and spatial series.
    Uncoupled,
    /// One-dimensional; every spatial mark is the temporal mark itself.
    Tight,
    /// Temporal and spatial marks share `Γ_k` and `τ_k`.
    CommonGamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitCoupling {
    mode: LimitMode,
    model: LevyMeasureModel,
    sub: SubordinatorTail,
}

/// Randomness behind one draw of the coupled limit.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitDrivers {
    Shared(PoissonDriver),
    Independent {
        temporal: PoissonDriver,
        spatial: PoissonDriver,
    },
}

impl LimitCoupling {
    /// In tight mode the spatial model is replaced by the subordinator's own
    /// tail, so `model` must be one-dimensional.
    pub fn new(mode: LimitMode, model: LevyMeasureModel, sub: SubordinatorTail) -> Result<Self> {
        let model = match mode {
            LimitMode::Tight => {
                if model.dimension() != 1 {
                    return Err(Error::model("tight coupling needs a one-dimensional model"));
                }
                LevyMeasureModel::tight(&sub)
            }
            _ => model,
        };
        Ok(Self { mode, model, sub })
    }

    pub fn tight(sub: SubordinatorTail) -> Self {
        Self {
            mode: LimitMode::Tight,
            model: LevyMeasureModel::tight(&sub),
            sub,
        }
    }

    pub fn mode(&self) -> LimitMode {
        self.mode
    }

    pub fn model(&self) -> &LevyMeasureModel {
        &self.model
    }

    pub fn sub(&self) -> &SubordinatorTail {
        &self.sub
    }

    /// Drivers of depth `k`; the shared or temporal driver uses seed
    /// `mix(seed, 0)`, an independent spatial driver `mix(seed, 1)`.
    pub fn sample_drivers(&self, k: usize, seed: u64) -> Result<LimitDrivers> {
        Ok(match self.mode {
            LimitMode::Uncoupled => LimitDrivers::Independent {
                temporal: sample_driver(k, mix(seed, 0), &SpectralMeasure::point_mass_1d())?,
                spatial: sample_driver(k, mix(seed, 1), self.model.spectral())?,
            },
            LimitMode::Tight | LimitMode::CommonGamma => {
                LimitDrivers::Shared(sample_driver(k, mix(seed, 0), self.model.spectral())?)
            }
        })
    }

    fn check_drivers(&self, drivers: &LimitDrivers) -> Result<()> {
        let ok = match (self.mode, drivers) {
            (LimitMode::Uncoupled, LimitDrivers::Independent { spatial, .. }) => {
                spatial.dimension() == self.model.dimension()
            }
            (LimitMode::Tight | LimitMode::CommonGamma, LimitDrivers::Shared(d)) => {
                d.dimension() == self.model.dimension()
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain("drivers do not match the coupling mode"))
        }
    }
}

/// Backward and forward limit positions at one time, with the hitting time and
/// the subordinator values straddling the level.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPositions {
    /// `E(t)`.
    pub hitting_time: f64,
    /// `D(E(t)-) ≤ t`.
    pub d_left: f64,
    /// `D(E(t)) > t`.
    pub d_right: f64,
    /// Sum of spatial marks over `k` with `D(T·τ_k) ≤ t`.
    pub backward: Vec<f64>,
    /// Sum of spatial marks over `k` with `D(T·τ_k-) ≤ t`.
    pub forward: Vec<f64>,
}

/// Single scan of the temporal series in location order. Arrivals before the
/// first location where `D` passes `t` are exactly those with `D(T·τ_k) ≤ t`;
/// the passing arrival additionally has `D(T·τ_k-) ≤ t`.
pub fn limit_positions(
    coupling: &LimitCoupling,
    drivers: &LimitDrivers,
    horizon: f64,
    t: f64,
    eps: f64,
) -> Result<LimitPositions> {
    check_horizon(horizon)?;
    check_eps(&coupling.model, eps)?;
    coupling.check_drivers(drivers)?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "evaluation time must be >= 0, got {t}"
        )));
    }
    let sub = &coupling.sub;
    let model = &coupling.model;
    let tails = model.tails();
    let d = model.dimension();
    let temporal = match drivers {
        LimitDrivers::Shared(p) => p,
        LimitDrivers::Independent { temporal, .. } => temporal,
    };

    let mut backward = vec![0.0; d];
    let mut cum = 0.0f64;
    let mut straddle = None;
    for &k in temporal.order() {
        let k = k as usize;
        let m = temporal_mark(sub, temporal.gammas()[k], horizon);
        let next = cum + m;
        if next > t {
            straddle = Some((k, m));
            break;
        }
        cum = next;
        if let LimitDrivers::Shared(p) = drivers {
            add_spatial(coupling, p, k, m, horizon, eps, &mut backward)?;
        }
    }
    let Some((k_star, m_star)) = straddle else {
        return Err(Error::TruncationExhausted {
            level: t,
            mass: cum,
        });
    };
    let x_star = temporal.taus()[k_star];
    let hitting_time = horizon * x_star;

    let mut forward;
    match drivers {
        LimitDrivers::Shared(p) => {
            forward = backward.clone();
            add_spatial(coupling, p, k_star, m_star, horizon, eps, &mut forward)?;
        }
        LimitDrivers::Independent { spatial, .. } => {
            for &k in spatial.order() {
                let k = k as usize;
                let tau = spatial.taus()[k];
                if tau > x_star {
                    break;
                }
                if tau == x_star {
                    // Coincident locations across drivers: counted forward only.
                    continue;
                }
                let m = spatial_mark(
                    tail_for(tails, spatial.atoms()[k])?,
                    spatial.gammas()[k],
                    horizon,
                );
                if m > eps {
                    for (b, v) in backward.iter_mut().zip(spatial.direction(k)) {
                        *b += m * v;
                    }
                }
            }
            forward = backward.clone();
            for &k in spatial.order() {
                let k = k as usize;
                let tau = spatial.taus()[k];
                if tau > x_star {
                    break;
                }
                if tau == x_star {
                    let m = spatial_mark(
                        tail_for(tails, spatial.atoms()[k])?,
                        spatial.gammas()[k],
                        horizon,
                    );
                    if m > eps {
                        for (f, v) in forward.iter_mut().zip(spatial.direction(k)) {
                            *f += m * v;
                        }
                    }
                }
            }
        }
    }

    let comp = compensator_or_zero(model, eps)?;
    if comp.iter().any(|&c| c != 0.0) {
        for i in 0..d {
            backward[i] -= hitting_time * comp[i];
            forward[i] -= hitting_time * comp[i];
        }
    }

    Ok(LimitPositions {
        hitting_time,
        d_left: cum,
        d_right: cum + m_star,
        backward,
        forward,
    })
}

fn add_spatial(
    coupling: &LimitCoupling,
    driver: &PoissonDriver,
    k: usize,
    temporal: f64,
    horizon: f64,
    eps: f64,
    acc: &mut [f64],
) -> Result<()> {
    let m = match coupling.mode {
        LimitMode::Tight => temporal,
        _ => spatial_mark(
            tail_for(coupling.model.tails(), driver.atoms()[k])?,
            driver.gammas()[k],
            horizon,
        ),
    };
    if m > eps {
        for (a, v) in acc.iter_mut().zip(driver.direction(k)) {
            *a += m * v;
        }
    }
    Ok(())
}

/// `Σ_{D(T·τ_k) ≤ t} η̃^←(Γ_k/T, V_k)·V_k − E(t)·compensator`.
pub fn backward_limit(
    coupling: &LimitCoupling,
    drivers: &LimitDrivers,
    horizon: f64,
    t: f64,
    eps: f64,
) -> Result<Vec<f64>> {
    Ok(limit_positions(coupling, drivers, horizon, t, eps)?.backward)
}

/// `Σ_{D(T·τ_k-) ≤ t} η̃^←(Γ_k/T, V_k)·V_k − E(t)·compensator`.
pub fn forward_limit(
    coupling: &LimitCoupling,
    drivers: &LimitDrivers,
    horizon: f64,
    t: f64,
    eps: f64,
) -> Result<Vec<f64>> {
    Ok(limit_positions(coupling, drivers, horizon, t, eps)?.forward)
}

/// Limit of the normalized marked point process: points
/// `(D(T·τ_k), mark_k)` for the backward marking or `(D(T·τ_k-), mark_k)` for
/// the forward one, over marks of norm at least `eps`, sorted by time.
///
/// Fails when the truncation could have dropped a mark above `eps`.
pub fn limit_marked_points(
    coupling: &LimitCoupling,
    drivers: &LimitDrivers,
    horizon: f64,
    eps: f64,
    marking: TimeMarking,
) -> Result<Vec<MarkedPoint>> {
    check_horizon(horizon)?;
    coupling.check_drivers(drivers)?;
    if !(eps > 0.0) {
        return Err(Error::domain(
            "marked point processes are restricted to marks of norm >= eps > 0",
        ));
    }
    let sub = &coupling.sub;
    let tails = coupling.model.tails();
    let spatial = match drivers {
        LimitDrivers::Shared(p) => p,
        LimitDrivers::Independent { spatial, .. } => spatial,
    };
    let last_gamma = *spatial.gammas().last().expect("non-empty driver");
    let bound = tails
        .iter()
        .map(|tail| spatial_mark(tail, last_gamma, horizon))
        .fold(0.0, f64::max);
    if bound >= eps {
        return Err(Error::IncompleteSeries { eps, bound });
    }

    let mut points = Vec::new();
    let mark_of = |p: &PoissonDriver, k: usize, temporal: f64| -> Result<f64> {
        Ok(match coupling.mode {
            LimitMode::Tight => temporal,
            _ => spatial_mark(tail_for(tails, p.atoms()[k])?, p.gammas()[k], horizon),
        })
    };
    match drivers {
        LimitDrivers::Shared(p) => {
            let mut cum = 0.0f64;
            for &k in p.order() {
                let k = k as usize;
                let tm = temporal_mark(sub, p.gammas()[k], horizon);
                let before = cum;
                cum += tm;
                let m = mark_of(p, k, tm)?;
                if m >= eps {
                    let mark: Vec<f64> = p.direction(k).iter().map(|v| m * v).collect();
                    let time = match marking {
                        TimeMarking::Backward => cum,
                        TimeMarking::Forward => before,
                    };
                    points.push(MarkedPoint { time, mark });
                }
            }
        }
        LimitDrivers::Independent { temporal, spatial } => {
            // Merge the two location orders; the temporal prefix sum at a spatial
            // location is D there (no temporal jump coincides a.s.).
            let t_order = temporal.order();
            let mut ti = 0usize;
            let mut cum = 0.0f64;
            for &k in spatial.order() {
                let k = k as usize;
                let tau = spatial.taus()[k];
                while ti < t_order.len() && temporal.taus()[t_order[ti] as usize] < tau {
                    cum += temporal_mark(sub, temporal.gammas()[t_order[ti] as usize], horizon);
                    ti += 1;
                }
                let left = cum;
                let mut right = cum;
                if ti < t_order.len() && temporal.taus()[t_order[ti] as usize] == tau {
                    right += temporal_mark(sub, temporal.gammas()[t_order[ti] as usize], horizon);
                }
                let m = mark_of(spatial, k, 0.0)?;
                if m >= eps {
                    let mark: Vec<f64> = spatial.direction(k).iter().map(|v| m * v).collect();
                    let time = match marking {
                        TimeMarking::Backward => right,
                        TimeMarking::Forward => left,
                    };
                    points.push(MarkedPoint { time, mark });
                }
            }
        }
    }
    Ok(points)
}

/// Limit of the residual order statistics: Poisson marks sorted by magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLimitSequence {
    /// Top `k_max` mark vectors, `k_max × d` row-major, largest first.
    pub marks: Vec<f64>,
    /// Magnitudes of the returned marks.
    pub magnitudes: Vec<f64>,
    /// `d̂_k` (1-based): arrival index of the k-th largest mark, for all `K`.
    pub dhat: Vec<usize>,
    /// `r_k` (1-based): rank of arrival `k`; the inverse permutation of `dhat`.
    pub ranks: Vec<usize>,
    pub dimension: usize,
    /// Upper bound on any mark beyond the truncation depth.
    pub omitted_bound: f64,
}

impl ResidualLimitSequence {
    pub fn k_max(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn mark(&self, k: usize) -> &[f64] {
        &self.marks[k * self.dimension..(k + 1) * self.dimension]
    }

    /// True when no arrival beyond the truncation can enter the top `k_max`.
    pub fn is_certified(&self) -> bool {
        self.magnitudes
            .last()
            .is_some_and(|&m| m > self.omitted_bound)
    }
}

/// Marks `m_k = η̃^←(Γ_k/T, V_k)` sorted descending; `tails[a]` is the tail of
/// atom `a` as recorded in the driver.
pub fn limit_residual_order_stats(
    driver: &PoissonDriver,
    horizon: f64,
    tails: &[DirectionalTail],
    k_max: usize,
) -> Result<ResidualLimitSequence> {
    check_horizon(horizon)?;
    let depth = driver.depth();
    if k_max == 0 || k_max > depth {
        return Err(Error::domain(format!(
            "k_max must lie in 1..={depth}, got {k_max}"
        )));
    }
    let mags = (0..depth)
        .map(|k| {
            Ok(spatial_mark(
                tail_for(tails, driver.atoms()[k])?,
                driver.gammas()[k],
                horizon,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut idx: Vec<usize> = (0..depth).collect();
    idx.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]));
    if idx.windows(2).any(|w| mags[w[0]] == mags[w[1]]) {
        return Err(Error::domain("two limit marks have equal magnitude"));
    }
    let mut ranks = vec![0usize; depth];
    for (pos, &k) in idx.iter().enumerate() {
        ranks[k] = pos + 1;
    }
    let d = driver.dimension();
    let mut marks = Vec::with_capacity(k_max * d);
    let mut magnitudes = Vec::with_capacity(k_max);
    for &k in &idx[..k_max] {
        magnitudes.push(mags[k]);
        marks.extend(driver.direction(k).iter().map(|v| mags[k] * v));
    }
    let last_gamma = driver.gammas()[depth - 1];
    let omitted_bound = tails
        .iter()
        .map(|tail| spatial_mark(tail, last_gamma, horizon))
        .fold(0.0, f64::max);
    Ok(ResidualLimitSequence {
        marks,
        magnitudes,
        dhat: idx.into_iter().map(|k| k + 1).collect(),
        ranks,
        dimension: d,
        omitted_bound,
    })
}
