//! Marchenko-Pastur law in the mean-normalized variable.
//!
//! For dimension-to-rank ratio `c` the nonzero eigenvalues, rescaled to unit
//! mean, follow `r sqrt((x+ - x)(x - x-)) / (2 pi x)` with `r = max(c, 1/c)`
//! and edges `(1 +- r^(-1/2))^2`. Using `r` rather than `c` keeps the density
//! normalized on both sides of `c = 1`.

use crate::error::{domain, Result};
use std::f64::consts::PI;

fn ratio(c: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain!("Marchenko-Pastur parameter c={c} must be positive and finite"));
    }
    Ok(c.max(1.0 / c))
}

pub fn mp_edges(c: f64) -> Result<(f64, f64)> {
    let s = ratio(c)?.sqrt().recip();
    Ok(((1.0 - s).powi(2), (1.0 + s).powi(2)))
}

pub fn mp_density(c: f64, x: f64) -> Result<f64> {
    let r = ratio(c)?;
    let (lo, hi) = mp_edges(c)?;
    if x <= lo || x >= hi || x <= 0.0 {
        return Ok(0.0);
    }
    Ok(r * ((hi - x) * (x - lo)).sqrt() / (2.0 * PI * x))
}

const CDF_PANELS: usize = 512;

/// Cumulative distribution, integrated in the angle `x = mid - half cos t`
/// where the square-root edges become smooth.
pub fn mp_cdf(c: f64, x: f64) -> Result<f64> {
    let r = ratio(c)?;
    let (lo, hi) = mp_edges(c)?;
    if x <= lo {
        return Ok(0.0);
    }
    if x >= hi {
        return Ok(1.0);
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let theta = ((mid - x) / half).clamp(-1.0, 1.0).acos();
    let f = |t: f64| {
        let s = t.sin();
        let xt = mid - half * t.cos();
        if xt <= 0.0 {
            0.0
        } else {
            r * half * half * s * s / (2.0 * PI * xt)
        }
    };
    // composite Simpson; `r = 1` puts the lower edge at 0 where the
    // integrand still stays bounded
    let n = CDF_PANELS;
    let h = theta / n as f64;
    let mut acc = f(0.0) + f(theta);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    Ok((acc * h / 3.0).clamp(0.0, 1.0))
}

/// Mean and variance of the rescaled law: `1` and `1/r`.
pub fn mp_variance(c: f64) -> Result<f64> {
    Ok(ratio(c)?.recip())
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid(c: f64, g: impl Fn(f64) -> f64) -> f64 {
        let (lo, hi) = mp_edges(c).unwrap();
        let n = 200_000;
        let h = (hi - lo) / n as f64;
        (0..n).map(|i| {
            let x = lo + (i as f64 + 0.5) * h;
            g(x) * mp_density(c, x).unwrap() * h
        }).sum()
    }

    #[test]
    fn edges_at_unit_ratio() {
        assert_eq!(mp_edges(1.0).unwrap(), (0.0, 4.0));
    }

    #[test]
    fn rejects_nonpositive_ratio() {
        assert!(mp_edges(0.0).is_err());
        assert!(mp_density(-1.0, 1.0).is_err());
    }

    #[test]
    fn density_is_normalized_with_unit_mean() {
        for c in [1.5, 2.07, 4.0, 31.0, 0.3] {
            assert!((trapezoid(c, |_| 1.0) - 1.0).abs() < 1e-6, "c={c}");
            assert!((trapezoid(c, |x| x) - 1.0).abs() < 1e-6, "c={c}");
            let var = trapezoid(c, |x| (x - 1.0).powi(2));
            assert!((var - mp_variance(c).unwrap()).abs() < 1e-5);
        }
    }

    #[test]
    fn cdf_matches_quadrature() {
        let c = 3.0;
        let (lo, hi) = mp_edges(c).unwrap();
        for t in [0.1, 0.35, 0.5, 0.8] {
            let x = lo + t * (hi - lo);
            let n = 100_000;
            let h = (x - lo) / n as f64;
            let q: f64 = (0..n).map(|i| mp_density(c, lo + (i as f64 + 0.5) * h).unwrap() * h).sum();
            assert!((mp_cdf(c, x).unwrap() - q).abs() < 1e-6);
        }
        assert_eq!(mp_cdf(c, hi + 1.0).unwrap(), 1.0);
    }

    #[test]
    fn large_ratio_concentrates() {
        let (lo, hi) = mp_edges(1e8).unwrap();
        assert!(hi - lo < 1e-3);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let samples: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&samples, |x| x.clamp(0.0, 1.0)) <= 0.5e-3 + 1e-12);
    }
}
