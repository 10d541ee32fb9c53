//! Marked point processes of (time, mark) pairs and their counting functionals.

use std::io::Write;

use crate::error::Result;
use crate::levy_measure::euclidean_norm;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPoint {
    pub time: f64,
    pub mark: Vec<f64>,
}

impl MarkedPoint {
    pub fn norm(&self) -> f64 {
        euclidean_norm(&self.mark)
    }
}

/// How a jump is placed in time: at the end of its waiting time (`Backward`,
/// jump after the wait) or at its start (`Forward`, jump before the wait).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMarking {
    Backward,
    Forward,
}

/// `N([0, s] × {‖x‖ > δ})`.
pub fn window_count(points: &[MarkedPoint], s: f64, delta: f64) -> usize {
    points
        .iter()
        .filter(|p| p.time <= s && p.norm() > delta)
        .count()
}

/// Columns `time,mark_1,…,mark_d`.
pub fn write_csv<W: Write>(points: &[MarkedPoint], dimension: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    header.extend((1..=dimension).map(|i| format!("mark_{i}")));
    w.write_record(&header)?;
    for p in points {
        let mut rec = vec![p.time.to_string()];
        rec.extend(p.mark.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_window() {
        let pts = vec![
            MarkedPoint {
                time: 0.1,
                mark: vec![3.0, 4.0],
            },
            MarkedPoint {
                time: 0.5,
                mark: vec![0.5, 0.0],
            },
            MarkedPoint {
                time: 0.9,
                mark: vec![-2.0, 0.0],
            },
        ];
        assert_eq!(window_count(&pts, 1.0, 1.0), 2);
        assert_eq!(window_count(&pts, 0.5, 0.1), 2);
        assert_eq!(window_count(&pts, 0.1, 5.0), 0);
        let mut buf = Vec::new();
        write_csv(&pts, 2, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("time,mark_1,mark_2\n0.1,3,4\n"));
    }
}
