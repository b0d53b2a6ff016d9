//! Classical error entropies, dominant reweighted weights and thresholds.

use crate::error::{domain, Error, Result};
use crate::spectra::Alpha;

fn log_q(x: f64, q: usize) -> f64 {
    x.ln() / (q as f64).ln()
}

fn qq1(q: usize) -> f64 {
    (q * q - 1) as f64
}

/// Renyi-Shannon entropy (base `q`) of the single-site error distribution
/// `(1 - p, p/(q^2-1), ..., p/(q^2-1))`.
pub fn shannon_entropy(p: f64, q: usize, alpha: Alpha) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1]"));
    }
    if q < 2 {
        return Err(domain!("qudit dimension {q} < 2"));
    }
    let e = p / qq1(q);
    Ok(match alpha {
        Alpha::Infinity => -log_q((1.0 - p).max(e), q),
        Alpha::Finite(a) if a < 1.0 => return Err(domain!("Renyi index {a} < 1")),
        Alpha::Finite(a) if a == 1.0 => {
            let mut h = 0.0;
            if p < 1.0 {
                h -= (1.0 - p) * log_q(1.0 - p, q);
            }
            if p > 0.0 {
                h -= p * log_q(e, q);
            }
            h
        }
        Alpha::Finite(a) => {
            let mut logs = Vec::with_capacity(2);
            if p < 1.0 {
                logs.push(a * (1.0 - p).ln());
            }
            if p > 0.0 {
                logs.push(qq1(q).ln() + a * e.ln());
            }
            let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
            lse / ((1.0 - a) * (q as f64).ln())
        }
    })
}

/// Fraction `w*/N` of the dominant weight after reweighting by `alpha`;
/// also the effective error rate `p_alpha`.
pub fn w_star_fraction(p: f64, alpha: Alpha, q: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1)"));
    }
    let e = p / qq1(q);
    Ok(match alpha {
        Alpha::Infinity => {
            if 1.0 - p > e {
                0.0
            } else if 1.0 - p < e {
                1.0
            } else {
                qq1(q) / (1.0 + qq1(q))
            }
        }
        Alpha::Finite(a) if a < 1.0 => return Err(domain!("Renyi index {a} < 1")),
        Alpha::Finite(a) => {
            if p == 0.0 {
                return Ok(0.0);
            }
            // (q^2-1) r / (1 + (q^2-1) r), r = (e / (1-p))^a
            let r = (a * (e / (1.0 - p)).ln()).exp();
            qq1(q) * r / (1.0 + qq1(q) * r)
        }
    })
}

pub fn w_star(p: f64, alpha: Alpha, n: usize, q: usize) -> Result<f64> {
    Ok(n as f64 * w_star_fraction(p, alpha, q)?)
}

pub fn p_alpha(p: f64, alpha: Alpha, q: usize) -> Result<f64> {
    w_star_fraction(p, alpha, q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdKind {
    /// Root of `H_alpha(p) = 1 - k/N`.
    Renyi(Alpha),
    /// Postselection onto weight fraction `w/N`.
    Postselected(f64),
    /// Closed form `1 - q^(r - 1)` at rate `r`.
    Detection(f64),
}

pub const BISECTION_TOL: f64 = 1e-10;

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!("no sign change on [{lo}, {hi}] (f = {flo}, {fhi})")));
    }
    let increasing = fhi > flo;
    while hi - lo > BISECTION_TOL * 1e-3 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solve for the threshold error rate of the given kind.
pub fn threshold_solve(kind: ThresholdKind, k_over_n: f64, q: usize) -> Result<f64> {
    let p_max = 1.0 - 1.0 / (q * q) as f64;
    let target = 1.0 - k_over_n;
    match kind {
        ThresholdKind::Detection(r) => {
            if !(0.0..=1.0).contains(&r) {
                return Err(domain!("rate {r} outside [0,1]"));
            }
            Ok(1.0 - (q as f64).powf(r - 1.0))
        }
        ThresholdKind::Renyi(alpha) => bisect(
            |p| shannon_entropy(p, q, alpha).unwrap_or(f64::NAN) - target,
            1e-12,
            p_max - 1e-12,
        ),
        ThresholdKind::Postselected(f) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(domain!("weight fraction {f} outside [0,1]"));
            }
            let g = |p: f64| {
                let mut v = -(1.0 - f) * log_q(1.0 - p, q);
                if f > 0.0 {
                    v -= f * log_q(p / qq1(q), q);
                }
                v - target
            };
            bisect(g, f.max(1e-12), p_max - 1e-12)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        for a in [Alpha::Finite(1.0), Alpha::Finite(2.0), Alpha::Infinity] {
            assert_eq!(shannon_entropy(0.0, 2, a).unwrap(), 0.0);
            assert_eq!(shannon_entropy(0.0, 3, a).unwrap(), 0.0);
        }
        let p = 0.3;
        assert!((shannon_entropy(p, 2, Alpha::Infinity).unwrap() + (1.0 - p).log2()).abs() < 1e-15);
        let pc = threshold_solve(ThresholdKind::Renyi(Alpha::VON_NEUMANN), 0.0, 2).unwrap();
        assert!((pc - 0.1893).abs() < 5e-5, "{pc}");
        let pinf = threshold_solve(ThresholdKind::Renyi(Alpha::Infinity), 0.0, 2).unwrap();
        assert!((pinf - 0.5).abs() < 1e-10);
    }

    #[test]
    fn renyi_limit_is_continuous() {
        let h1 = shannon_entropy(0.2, 2, Alpha::VON_NEUMANN).unwrap();
        let h = shannon_entropy(0.2, 2, Alpha::Finite(1.0 + 1e-7)).unwrap();
        assert!((h - h1).abs() < 1e-6);
        let hbig = shannon_entropy(0.2, 2, Alpha::Finite(1e6)).unwrap();
        let hinf = shannon_entropy(0.2, 2, Alpha::Infinity).unwrap();
        assert!((hbig - hinf).abs() < 1e-5);
    }

    #[test]
    fn renyi_two_threshold() {
        let p2 = threshold_solve(ThresholdKind::Renyi(Alpha::Finite(2.0)), 0.0, 2).unwrap();
        assert!((p2 - (3.0 - 3f64.sqrt()) / 4.0).abs() < 1e-9);
    }

    #[test]
    fn postselected_and_detection_thresholds() {
        let p = threshold_solve(ThresholdKind::Postselected(0.0), 0.0, 2).unwrap();
        assert!((p - 0.5).abs() < 1e-10);
        assert!((threshold_solve(ThresholdKind::Detection(0.0), 0.0, 2).unwrap() - 0.5).abs() < 1e-15);
        // the boundary meets the hashing point at the hashing weight
        let pc = threshold_solve(ThresholdKind::Renyi(Alpha::VON_NEUMANN), 0.0, 2).unwrap();
        let at_pc = threshold_solve(ThresholdKind::Postselected(pc - 1e-6), 0.0, 2).unwrap();
        assert!((at_pc - pc).abs() < 1e-2);
    }

    #[test]
    fn w_star_examples() {
        assert!((w_star_fraction(0.3, Alpha::VON_NEUMANN, 2).unwrap() - 0.3).abs() < 1e-15);
        assert!(w_star_fraction(0.3, Alpha::Finite(200.0), 2).unwrap() < 1e-30);
        assert_eq!(w_star_fraction(0.3, Alpha::Infinity, 2).unwrap(), 0.0);
        // (q=2, alpha=2, p=0.3): 3 (0.1)^2 / (0.49 + 3 (0.1)^2) = 0.03/0.52
        let v = w_star_fraction(0.3, Alpha::Finite(2.0), 2).unwrap();
        assert!((v - 0.03 / 0.52).abs() < 1e-15);
        assert!((v - 0.058).abs() < 5e-4);
    }

    #[test]
    fn solver_reports_missing_root() {
        // k/N = 1 makes the target 0, which only p = 0 reaches
        assert!(matches!(
            threshold_solve(ThresholdKind::Renyi(Alpha::VON_NEUMANN), 1.0, 2),
            Err(Error::Solver(_))
        ));
    }
}
