use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Sample mean and standard error (`sample stddev / sqrt(n)`, zero for a
/// single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Linear interpolation on an abscissa-sorted curve; `None` outside it.
pub fn interpolate(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let i = curve.partition_point(|&(cx, _)| cx < x);
    if i < curve.len() && curve[i].0 == x {
        return Some(curve[i].1);
    }
    if i == 0 || i == curve.len() {
        return None;
    }
    let (x0, y0) = curve[i - 1];
    let (x1, y1) = curve[i];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// First sign change of `y` along the sorted curve, linearly interpolated.
pub fn zero_crossing(curve: &[(f64, f64)]) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 == 0.0 {
            Some(x0)
        } else if y0.signum() != y1.signum() {
            Some(x0 + y0 * (x1 - x0) / (y0 - y1))
        } else {
            None
        }
    })
}

/// Minimum number of system sizes for a collapse.
pub const MIN_COLLAPSE_SIZES: usize = 3;
/// Points of the shared abscissa grid.
pub const COLLAPSE_GRID: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct CollapseRow {
    pub n: usize,
    pub p: f64,
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Collapse {
    pub nu: f64,
    pub p_c: f64,
    pub rows: Vec<CollapseRow>,
    /// Mean over the shared grid of the summed squared deviation of the
    /// interpolated curves from their average.
    pub score: f64,
}

/// Rescale `(N, p, value)` records to `x = (p - p_c) N^(1/nu)` and score how
/// well the sizes collapse.
pub fn scaling_collapse(records: &[(usize, f64, f64)], nu: f64, p_c: f64) -> Result<Collapse> {
    if !(nu > 0.0) {
        return Err(Error::Input(format!("exponent nu={nu} must be positive")));
    }
    let mut curves: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(records.len());
    for &(n, p, v) in records {
        let x = (p - p_c) * (n as f64).powf(1.0 / nu);
        curves.entry(n).or_default().push((x, v));
        rows.push(CollapseRow { n, p, x, value: v });
    }
    if curves.len() < MIN_COLLAPSE_SIZES {
        return Err(Error::Input(format!(
            "collapse needs at least {MIN_COLLAPSE_SIZES} system sizes, got {}",
            curves.len()
        )));
    }
    for c in curves.values_mut() {
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let lo = curves.values().map(|c| c[0].0).fold(f64::NEG_INFINITY, f64::max);
    let hi = curves.values().map(|c| c[c.len() - 1].0).fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::Input("rescaled curves do not overlap".into()));
    }
    let mut total = 0.0;
    for i in 0..COLLAPSE_GRID {
        let x = lo + (hi - lo) * i as f64 / (COLLAPSE_GRID - 1) as f64;
        let ys: Vec<f64> = curves.values().filter_map(|c| interpolate(c, x)).collect();
        let m = ys.iter().sum::<f64>() / ys.len() as f64;
        total += ys.iter().map(|y| (y - m).powi(2)).sum::<f64>();
    }
    Ok(Collapse { nu, p_c, rows, score: total / COLLAPSE_GRID as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean_stderr(&[1.0, 1.0, 1.0]), (1.0, 0.0));
        assert_eq!(mean_stderr(&[2.5]), (2.5, 0.0));
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn crossings_and_interpolation() {
        let c = vec![(0.0, 1.0), (1.0, 0.5), (2.0, -0.5)];
        assert_eq!(zero_crossing(&c), Some(1.5));
        assert_eq!(interpolate(&c, 0.5), Some(0.75));
        assert_eq!(interpolate(&c, 3.0), None);
        assert_eq!(zero_crossing(&[(0.0, 1.0), (1.0, 2.0)]), None);
    }

    #[test]
    fn collapse_prefers_the_true_exponent() {
        let mut recs = Vec::new();
        for n in [8usize, 16, 32, 64] {
            for i in 0..=40 {
                let p = 0.1 + 0.005 * i as f64;
                recs.push((n, p, ((p - 0.2) * (n as f64).sqrt()).tanh()));
            }
        }
        let two = scaling_collapse(&recs, 2.0, 0.2).unwrap();
        let one = scaling_collapse(&recs, 1.0, 0.2).unwrap();
        assert!(two.score < 1e-4 && two.score < one.score);
    }

    #[test]
    fn collapse_needs_sizes() {
        let recs = vec![(5, 0.1, 1.0), (5, 0.2, 0.0)];
        assert!(matches!(scaling_collapse(&recs, 1.0, 0.19), Err(Error::Input(_))));
    }
}
