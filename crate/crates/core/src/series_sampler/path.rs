use std::io::Write;

use crate::error::{Error, Result};

/// Càdlàg pure-jump path on `[0, T]`: sorted jump locations, one jump vector per
/// location, and a linear drift.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    locations: Vec<f64>,
    jumps: Vec<f64>,
    // Prefix sums of `jumps` in location order; row i is the sum of rows 0..=i.
    cumulative: Vec<f64>,
    drift: Vec<f64>,
    dimension: usize,
    horizon: f64,
}

impl StepPath {
    /// `jumps` is `locations.len() × dimension`, row-major, already in
    /// location order.
    pub fn new(
        locations: Vec<f64>,
        jumps: Vec<f64>,
        dimension: usize,
        horizon: f64,
        drift: Vec<f64>,
    ) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::domain("path horizon must be positive"));
        }
        if dimension == 0 || jumps.len() != locations.len() * dimension || drift.len() != dimension
        {
            return Err(Error::domain("path arrays have inconsistent lengths"));
        }
        if locations.windows(2).any(|w| !(w[1] > w[0]))
            || locations.iter().any(|&x| !(0.0..=horizon).contains(&x))
        {
            return Err(Error::domain(
                "jump locations must be strictly increasing within [0, T]",
            ));
        }
        let mut cumulative = Vec::with_capacity(jumps.len());
        let mut acc = vec![0.0; dimension];
        for row in jumps.chunks_exact(dimension) {
            for (a, j) in acc.iter_mut().zip(row) {
                *a += j;
            }
            cumulative.extend_from_slice(&acc);
        }
        Ok(Self {
            locations,
            jumps,
            cumulative,
            drift,
            dimension,
            horizon,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn jump(&self, i: usize) -> &[f64] {
        &self.jumps[i * self.dimension..(i + 1) * self.dimension]
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::domain(format!(
                "evaluation point {t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    fn value_at_count(&self, count: usize, t: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.drift.iter().map(|d| d * t).collect();
        if count > 0 {
            let row = &self.cumulative[(count - 1) * self.dimension..count * self.dimension];
            for (o, c) in out.iter_mut().zip(row) {
                *o += c;
            }
        }
        out
    }

    /// Sum of jumps at locations `≤ t`, plus `drift · t`.
    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        self.check(t)?;
        let count = self.locations.partition_point(|&x| x <= t);
        Ok(self.value_at_count(count, t))
    }

    /// Left limit: sum of jumps at locations `< t`, plus `drift · t`.
    pub fn left_limit(&self, t: f64) -> Result<Vec<f64>> {
        self.check(t)?;
        let count = self.locations.partition_point(|&x| x < t);
        Ok(self.value_at_count(count, t))
    }

    /// Scalar value for one-dimensional paths.
    pub fn value1(&self, t: f64) -> Result<f64> {
        self.require_scalar()?;
        Ok(self.value(t)?[0])
    }

    pub fn left_limit1(&self, t: f64) -> Result<f64> {
        self.require_scalar()?;
        Ok(self.left_limit(t)?[0])
    }

    fn require_scalar(&self) -> Result<()> {
        if self.dimension != 1 {
            return Err(Error::domain(
                "scalar evaluation needs a one-dimensional path",
            ));
        }
        Ok(())
    }

    /// Total mass of a one-dimensional driftless path.
    pub fn total1(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Writes `location,value_1,…,value_d` after each jump.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["location".to_string()];
        header.extend((1..=self.dimension).map(|i| format!("value_{i}")));
        w.write_record(&header)?;
        for (i, &x) in self.locations.iter().enumerate() {
            let value = self.value_at_count(i + 1, x);
            let mut rec = vec![x.to_string()];
            rec.extend(value.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `E(t) = inf{x : D(x) > t}` for a nondecreasing one-dimensional path: the
/// first jump location where the path exceeds `t`.
pub fn hitting_time(path: &StepPath, t: f64) -> Result<f64> {
    path.require_scalar()?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!(
            "hitting level must be >= 0, got {t}"
        )));
    }
    if path.drift[0] != 0.0 {
        return Err(Error::domain(
            "hitting times need a pure-jump subordinator path",
        ));
    }
    let idx = path.cumulative.partition_point(|&c| c <= t);
    path.locations
        .get(idx)
        .copied()
        .ok_or(Error::TruncationExhausted {
            level: t,
            mass: path.total1(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_path() -> StepPath {
        StepPath::new(
            vec![0.2, 0.5, 0.9],
            vec![0.25, 1.0, 1.0 / 9.0],
            1,
            1.0,
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn evaluation() {
        let p = hand_path();
        assert_eq!(p.value1(0.1).unwrap(), 0.0);
        assert_eq!(p.value1(0.5).unwrap(), 1.25);
        assert_eq!(p.left_limit1(0.5).unwrap(), 0.25);
        assert!(p.value1(1.5).is_err());
        let empty = StepPath::new(vec![], vec![], 2, 1.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(empty.value(0.7).unwrap(), vec![0.0, 0.0]);
        let drifting = StepPath::new(vec![0.5], vec![1.0], 1, 1.0, vec![2.0]).unwrap();
        assert_eq!(drifting.value1(0.25).unwrap(), 0.5);
        assert_eq!(drifting.value1(1.0).unwrap(), 3.0);
    }

    #[test]
    fn hitting_examples() {
        let p = hand_path();
        assert_eq!(hitting_time(&p, 0.3).unwrap(), 0.5);
        assert_eq!(hitting_time(&p, 0.0).unwrap(), 0.2);
        assert!(matches!(
            hitting_time(&p, 2.0),
            Err(Error::TruncationExhausted { .. })
        ));
    }

    #[test]
    fn rejects_unsorted() {
        assert!(StepPath::new(vec![0.5, 0.2], vec![1.0, 1.0], 1, 1.0, vec![0.0]).is_err());
        assert!(StepPath::new(vec![0.5, 1.5], vec![1.0, 1.0], 1, 1.0, vec![0.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        hand_path().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "location,value_1");
        assert_eq!(lines[2], "0.5,1.25");
        assert_eq!(lines.len(), 4);
    }
}
