use crate::error::{Error, Result};
use crate::mpp::{window_count, MarkedPoint};

/// Empirical distribution function `F̂(x) = #{values ≤ x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empirical distribution of an empty sample"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::domain("sample contains NaN"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }
}

/// `sup_x |F̂_a(x) − F̂_b(x)|` by a merge scan over both sorted samples; tied
/// values are consumed together before the gap is read.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (ea, eb) = (Ecdf::new(a)?, Ecdf::new(b)?);
    let (xa, xb) = (ea.sorted(), eb.sorted());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] == x {
            i += 1;
        }
        while j < xb.len() && xb[j] == x {
            j += 1;
        }
        best = best.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(best)
}

/// Total-variation distance `½ Σ_k |p_k − q_k|` between two empirical count
/// distributions.
pub fn tv_distance(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("total variation of an empty sample"));
    }
    let max = a.iter().chain(b).copied().max().unwrap_or(0);
    let mut ha = vec![0usize; max + 1];
    let mut hb = vec![0usize; max + 1];
    a.iter().for_each(|&k| ha[k] += 1);
    b.iter().for_each(|&k| hb[k] += 1);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    Ok(0.5
        * ha.iter()
            .zip(&hb)
            .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
            .sum::<f64>())
}

/// TV distance between the laws of `N([0, s] × {‖x‖ > δ})` under two sets of
/// point-process draws.
pub fn count_functional_distance(
    a: &[Vec<MarkedPoint>],
    b: &[Vec<MarkedPoint>],
    s: f64,
    delta: f64,
) -> Result<f64> {
    if !(s > 0.0 && delta > 0.0) {
        return Err(Error::domain("window needs s > 0 and delta > 0"));
    }
    let ca: Vec<usize> = a.iter().map(|p| window_count(p, s, delta)).collect();
    let cb: Vec<usize> = b.iter().map(|p| window_count(p, s, delta)).collect();
    tv_distance(&ca, &cb)
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::domain(
            "rank correlation needs two equal samples of size >= 2",
        ));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - mean) * (y - mean);
        saa += (x - mean) * (x - mean);
        sbb += (y - mean) * (y - mean);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::domain("rank correlation of a constant sample"));
    }
    Ok(sab / (saa * sbb).sqrt())
}
