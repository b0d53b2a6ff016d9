//! Leading-order Haar-averaged entropies and coherent information.

use super::entropy::{shannon_entropy, threshold_solve, w_star_fraction, ThresholdKind};
use crate::error::Result;
use crate::spectra::Alpha;

/// `k`, `-k`, or `N (1 - H(p))` in between.
pub fn coherent_info_leading(p: f64, n: usize, k: usize, q: usize) -> Result<f64> {
    let h = shannon_entropy(p, q, Alpha::VON_NEUMANN)?;
    let (n, k) = (n as f64, k as f64);
    Ok((n * (1.0 - h)).clamp(-k, k))
}

/// `S_alpha(Q) = min(k + N H_alpha, N)` and `S_alpha(RQ) = min(N H_alpha, N + k)`.
pub fn renyi_entropy_leading(p: f64, alpha: Alpha, n: usize, k: usize, q: usize) -> Result<(f64, f64)> {
    let h = shannon_entropy(p, q, alpha)?;
    let (n, k) = (n as f64, k as f64);
    Ok(((k + n * h).min(n), (n * h).min(n + k)))
}

/// Von Neumann entropy of the reweighted state: `N H(w*/N) + k` below the
/// Renyi threshold and `N` above it, so it jumps at the threshold for
/// `alpha > 1`.
pub fn reweighted_vn_leading(p: f64, alpha: Alpha, n: usize, k: usize, q: usize) -> Result<f64> {
    let pc = threshold_solve(ThresholdKind::Renyi(alpha), k as f64 / n as f64, q)?;
    if p > pc {
        return Ok(n as f64);
    }
    let f = w_star_fraction(p, alpha, q)?;
    Ok((n as f64 * shannon_entropy(f, q, Alpha::VON_NEUMANN)? + k as f64).min(n as f64))
}
