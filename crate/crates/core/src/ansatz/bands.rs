//! Band models of the decohered spectrum: zeroth order and mean-shift.

use super::mp;
use crate::channels::weight_probability;
use crate::density::Register;
use crate::error::{domain, Result};
use crate::pauli::{omega, omega_f64};
use num_bigint::BigUint;
use serde::Serialize;

fn check(n: usize, k: usize, q: usize) -> Result<()> {
    if n == 0 || k == 0 || k > n || q < 2 {
        return Err(domain!("invalid code parameters N={n}, k={k}, q={q}"));
    }
    Ok(())
}

fn threshold_exponent(n: usize, k: usize, register: Register) -> Result<usize> {
    match register {
        Register::RQ => Ok(n + k),
        Register::Q => Ok(n - k),
        Register::Other => Err(domain!("band models exist for Q and RQ only")),
    }
}

/// Smallest `w` with `sum_{w' <= w} Omega(w') >= q^(N+k)` (RQ) or
/// `q^(N-k)` (Q). Exact integer arithmetic.
pub fn critical_weight(n: usize, k: usize, q: usize, register: Register) -> Result<usize> {
    check(n, k, q)?;
    let target = BigUint::from(q).pow(threshold_exponent(n, k, register)? as u32);
    let mut acc = BigUint::from(0u32);
    for w in 0..=n {
        acc += omega(n, w, q)?;
        if acc >= target {
            return Ok(w);
        }
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandRecord {
    pub w: usize,
    pub multiplicity: f64,
    pub mean: f64,
    /// Probability of the weight class, `P_w`.
    pub weight_probability: f64,
    /// Dimension-to-rank ratio of the microcanonical band.
    pub c: f64,
    /// `4 P_w / sqrt(multiplicity * dim)`.
    pub width: f64,
    /// `mean - P_w / multiplicity`.
    pub shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reservoir {
    pub w: usize,
    pub multiplicity: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandModel {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub p: f64,
    pub register: Register,
    pub dim: f64,
    pub bands: Vec<BandRecord>,
    pub reservoir: Reservoir,
}

impl BandModel {
    /// `sum multiplicity * mean`, bands plus reservoir.
    pub fn trace(&self) -> f64 {
        self.bands.iter().map(|b| b.multiplicity * b.mean).sum::<f64>()
            + self.reservoir.multiplicity * self.reservoir.mean
    }

    pub fn band(&self, w: usize) -> Option<&BandRecord> {
        self.bands.iter().find(|b| b.w == w)
    }
}

struct Counts {
    dim: f64,
    /// Multiplicity factor per Pauli string: 1 on RQ, `q^k` on Q.
    per_string: f64,
    w_c: usize,
    omegas: Vec<f64>,
    probs: Vec<f64>,
}

fn counts(p: f64, n: usize, k: usize, q: usize, register: Register) -> Result<Counts> {
    check(n, k, q)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1]"));
    }
    let w_c = critical_weight(n, k, q, register)?;
    let qf = q as f64;
    let (dim, per_string) = match register {
        Register::RQ => (qf.powi((n + k) as i32), 1.0),
        _ => (qf.powi(n as i32), qf.powi(k as i32)),
    };
    let omegas = (0..=n).map(|w| omega_f64(n, w, q)).collect::<Result<Vec<_>>>()?;
    let probs = (0..=n).map(|w| weight_probability(n, w, p)).collect::<Result<Vec<_>>>()?;
    Ok(Counts { dim, per_string, w_c, omegas, probs })
}

fn assemble(
    p: f64,
    n: usize,
    k: usize,
    q: usize,
    register: Register,
    c: &Counts,
    mean_of: impl Fn(usize) -> f64,
) -> BandModel {
    let mut bands = Vec::with_capacity(c.w_c);
    let mut used = 0.0;
    for w in 0..c.w_c {
        let m = c.per_string * c.omegas[w];
        let pw = c.probs[w];
        let mean = mean_of(w);
        used += m;
        bands.push(BandRecord {
            w,
            multiplicity: m,
            mean,
            weight_probability: pw,
            c: c.dim / m,
            width: 4.0 * pw / (m * c.dim).sqrt(),
            shift: mean - pw / m,
        });
    }
    let res_mult = c.dim - used;
    let mass: f64 = bands.iter().map(|b| b.multiplicity * b.mean).sum();
    let reservoir = Reservoir { w: c.w_c, multiplicity: res_mult, mean: (1.0 - mass) / res_mult };
    BandModel { n, k, q, p, register, dim: c.dim, bands, reservoir }
}

/// Every weight class `w = 0..=N` as `Omega(w)` (RQ) or `q^k Omega(w)` (Q)
/// degenerate eigenvalues `P_w / multiplicity`, ignoring the dimension cap.
/// The reservoir is empty; multiplicities past `w_c` overcount the rank.
pub fn zeroth_order_bands(p: f64, n: usize, k: usize, q: usize, register: Register) -> Result<BandModel> {
    let c = counts(p, n, k, q, register)?;
    let bands = (0..=n)
        .map(|w| {
            let m = c.per_string * c.omegas[w];
            let pw = c.probs[w];
            BandRecord {
                w,
                multiplicity: m,
                mean: pw / m,
                weight_probability: pw,
                c: c.dim / m,
                width: 4.0 * pw / (m * c.dim).sqrt(),
                shift: 0.0,
            }
        })
        .collect();
    let reservoir = Reservoir { w: n + 1, multiplicity: 0.0, mean: 0.0 };
    Ok(BandModel { n, k, q, p, register, dim: c.dim, bands, reservoir })
}

/// First-order level repulsion from lower bands and attraction from higher
/// ones:
/// `lambda(w) = P_w/m(w) * (1 - sum_{w'<w} m(w')/D) + sum_{w'>w} P_w'/D`.
/// The reservoir mean follows from the trace.
pub fn mean_shift_bands(p: f64, n: usize, k: usize, q: usize, register: Register) -> Result<BandModel> {
    let c = counts(p, n, k, q, register)?;
    Ok(assemble(p, n, k, q, register, &c, |w| {
        let below: f64 = (0..w).map(|v| c.per_string * c.omegas[v]).sum();
        let above: f64 = c.probs[w + 1..].iter().sum();
        c.probs[w] / (c.per_string * c.omegas[w]) * (1.0 - below / c.dim) + above / c.dim
    }))
}

fn unit(band: &BandRecord) -> Result<f64> {
    let s = band.weight_probability / band.multiplicity;
    if !(s > 0.0) {
        return Err(domain!("band {} carries no weight", band.w));
    }
    Ok(s)
}

/// Microcanonical law of one band scaled by `P_w` and rigidly shifted so its
/// mean sits at the mean-shift value.
pub fn band_model_density(band: &BandRecord, lambda: f64) -> Result<f64> {
    let s = unit(band)?;
    Ok(mp::mp_density(band.c, (lambda - band.shift) / s)? / s)
}

pub fn band_model_cdf(band: &BandRecord, lambda: f64) -> Result<f64> {
    let s = unit(band)?;
    mp::mp_cdf(band.c, (lambda - band.shift) / s)
}

/// Support `[lo, hi]` of the shifted band.
pub fn band_model_support(band: &BandRecord) -> Result<(f64, f64)> {
    let s = unit(band)?;
    let (lo, hi) = mp::mp_edges(band.c)?;
    Ok((band.shift + s * lo, band.shift + s * hi))
}
