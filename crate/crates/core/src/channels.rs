//! Depolarizing noise in both parametrizations, the fixed-weight channel,
//! Gram-matrix spectra and a brute-force convex-sum oracle.

use crate::code::EncodedState;
use crate::density::{DensityMatrix, Register};
use crate::error::{capacity, domain, Result};
use crate::linalg::{CMat, Layout, ZERO};
use crate::pauli::{self, FixedWeightIter, PauliIndex};
use crate::spectra::{self, Spectrum};

/// `gamma = q^2 p / (q^2 - 1)`
pub fn gamma_from_p(p: f64, q: usize) -> f64 {
    let qq = (q * q) as f64;
    qq * p / (qq - 1.0)
}

/// `p = (q^2 - 1) gamma / q^2`
pub fn p_from_gamma(gamma: f64, q: usize) -> f64 {
    let qq = (q * q) as f64;
    (qq - 1.0) * gamma / qq
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Depolarizing { p: f64 },
    Dual { gamma: f64 },
    FixedWeight { w: usize },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Depolarizing { p } if !(0.0..=1.0).contains(&p) => Err(domain!("p={p} outside [0,1]")),
            ChannelSpec::Dual { gamma } if !(0.0..=1.0).contains(&gamma) => {
                Err(domain!("gamma={gamma} outside [0,1]"))
            }
            _ => Ok(()),
        }
    }

    /// Per-site error probability, when the channel is i.i.d.
    pub fn p(&self, q: usize) -> Option<f64> {
        match *self {
            ChannelSpec::Depolarizing { p } => Some(p),
            ChannelSpec::Dual { gamma } => Some(p_from_gamma(gamma, q)),
            ChannelSpec::FixedWeight { .. } => None,
        }
    }

    pub fn gamma(&self, q: usize) -> Option<f64> {
        match *self {
            ChannelSpec::Depolarizing { p } => Some(gamma_from_p(p, q)),
            ChannelSpec::Dual { gamma } => Some(gamma),
            ChannelSpec::FixedWeight { .. } => None,
        }
    }

    /// `-2 ln(1 - gamma)`
    pub fn eta(&self, q: usize) -> Option<f64> {
        self.gamma(q).map(|g| -2.0 * (1.0 - g).ln())
    }

    pub fn apply(&self, rho: &DensityMatrix, sites: &[usize], budget_mb: usize) -> Result<DensityMatrix> {
        self.validate()?;
        match *self {
            ChannelSpec::Depolarizing { p } => depolarize(rho, p, sites),
            ChannelSpec::Dual { gamma } => depolarize_dual(rho, gamma, sites),
            ChannelSpec::FixedWeight { w } => fixed_weight_apply(rho, w, sites, budget_mb),
        }
    }
}

fn site_geometry(layout: &Layout, sites: &[usize]) -> Result<Vec<(usize, usize)>> {
    let mut seen = vec![false; layout.len()];
    sites
        .iter()
        .map(|&f| {
            if f >= layout.len() {
                return Err(domain!("site {f} outside the {} tensor factors", layout.len()));
            }
            if seen[f] {
                return Err(domain!("site {f} listed twice"));
            }
            seen[f] = true;
            Ok((layout.stride(f), layout.dims()[f]))
        })
        .collect()
}

/// Indices whose digit at the factor with `stride` is zero.
fn zero_digit_indices(dim: usize, stride: usize, q: usize) -> Vec<usize> {
    let block = stride * q;
    let mut out = Vec::with_capacity(dim / q);
    for hi in (0..dim).step_by(block) {
        for lo in 0..stride {
            out.push(hi + lo);
        }
    }
    out
}

/// `m <- (1 - gamma) m + gamma Tr_site(m) (x) I/q`, in place.
fn replace_site(m: &mut CMat, stride: usize, q: usize, gamma: f64) {
    let dim = m.nrows();
    let base = zero_digit_indices(dim, stride, q);
    let keep = 1.0 - gamma;
    let mut sums = vec![ZERO; base.len()];
    for &j0 in &base {
        sums.iter_mut().for_each(|x| *x = ZERO);
        for t in 0..q {
            let col = m.col_as_slice(j0 + t * stride);
            for (s, &i0) in sums.iter_mut().zip(&base) {
                *s += col[i0 + t * stride];
            }
        }
        for t in 0..q {
            let col = m.col_as_slice_mut(j0 + t * stride);
            for x in col.iter_mut() {
                *x *= keep;
            }
            for (s, &i0) in sums.iter().zip(&base) {
                col[i0 + t * stride] += s * (gamma / q as f64);
            }
        }
    }
}

/// `dst += q Tr_site(src) (x) I - src`: the sum of all nonidentity
/// single-site Pauli conjugations of `src`.
fn add_site_twirl(dst: &mut CMat, src: &CMat, stride: usize, q: usize) {
    let dim = src.nrows();
    let base = zero_digit_indices(dim, stride, q);
    let mut sums = vec![ZERO; base.len()];
    let qf = q as f64;
    for &j0 in &base {
        sums.iter_mut().for_each(|x| *x = ZERO);
        for t in 0..q {
            let col = src.col_as_slice(j0 + t * stride);
            for (s, &i0) in sums.iter_mut().zip(&base) {
                *s += col[i0 + t * stride];
            }
        }
        for t in 0..q {
            let j = j0 + t * stride;
            let s_col = src.col_as_slice(j);
            let d_col = dst.col_as_slice_mut(j);
            for (d, x) in d_col.iter_mut().zip(s_col) {
                *d -= x;
            }
            for (s, &i0) in sums.iter().zip(&base) {
                d_col[i0 + t * stride] += s * qf;
            }
        }
    }
}

/// Depolarizing channel at rate `p` on each listed site.
///
/// Each single-site channel is evaluated in its replacement form, which is
/// the same map as the Kraus sum (see `depolarize_kraus`).
pub fn depolarize(rho: &DensityMatrix, p: f64, sites: &[usize]) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1]"));
    }
    let q = uniform_q(rho, sites)?;
    depolarize_dual(rho, gamma_from_p(p, q), sites)
}

/// `D_gamma`: with weight `gamma` replace each listed site by `I/q`.
pub fn depolarize_dual(rho: &DensityMatrix, gamma: f64, sites: &[usize]) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    depolarize_dual_in_place(&mut out, gamma, sites)?;
    Ok(out)
}

pub fn depolarize_dual_in_place(rho: &mut DensityMatrix, gamma: f64, sites: &[usize]) -> Result<()> {
    let geom = site_geometry(&rho.layout(), sites)?;
    // gamma above 1 is still a Pauli channel up to the fully twirled point q^2/(q^2-1)
    let qmin = geom.iter().map(|g| g.1).min().unwrap_or(2);
    let gmax = gamma_from_p(1.0, qmin);
    if !(0.0..=gmax + 1e-12).contains(&gamma) {
        return Err(domain!("gamma={gamma} outside [0,{gmax}]"));
    }
    if gamma == 0.0 {
        return Ok(());
    }
    for (stride, q) in geom {
        replace_site(rho.matrix_mut(), stride, q, gamma);
    }
    Ok(())
}

fn uniform_q(rho: &DensityMatrix, sites: &[usize]) -> Result<usize> {
    let geom = site_geometry(&rho.layout(), sites)?;
    let q = geom.first().map(|g| g.1).unwrap_or(2);
    if geom.iter().any(|g| g.1 != q) {
        return Err(domain!("sites have different dimensions"));
    }
    Ok(q)
}

/// Depolarizing channel by explicit single-site Kraus sums.
pub fn depolarize_kraus(rho: &DensityMatrix, p: f64, sites: &[usize]) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1]"));
    }
    let q = uniform_q(rho, sites)?;
    let layout = rho.layout();
    let mut cur = rho.matrix().clone();
    let dim = cur.nrows();
    for &f in sites {
        let mut next = CMat::zeros(dim, dim);
        for v in 0..q * q {
            let mu = PauliIndex::new(q, vec![v as u32])?;
            let weight = if v == 0 { 1.0 - p } else { p / (q * q - 1) as f64 };
            if weight == 0.0 {
                continue;
            }
            conjugate_accumulate(&mut next, &cur, &layout, &mu, &[f], weight)?;
        }
        cur = next;
    }
    DensityMatrix::new(cur, rho.dims().to_vec(), rho.register())
}

/// `dst += weight * E rho E^dagger`
fn conjugate_accumulate(dst: &mut CMat, rho: &CMat, layout: &Layout, mu: &PauliIndex, sites: &[usize], weight: f64) -> Result<()> {
    let (target, phase) = pauli::action_table(layout, mu, sites)?;
    for j in 0..rho.ncols() {
        let pj = phase[j].conj() * weight;
        let col = rho.col_as_slice(j);
        let out = dst.col_as_slice_mut(target[j]);
        for (i, &x) in col.iter().enumerate() {
            out[target[i]] += phase[i] * pj * x;
        }
    }
    Ok(())
}

/// `P_w = C(N, w) p^w (1 - p)^(N - w)`
pub fn weight_probability(n: usize, w: usize, p: f64) -> Result<f64> {
    if w > n {
        return Err(domain!("weight {w} exceeds site count {n}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1]"));
    }
    Ok(pauli::binomial_f64(n, w) * p.powi(w as i32) * (1.0 - p).powi((n - w) as i32))
}

/// Uniform average over all weight-`w` errors on `sites`.
///
/// Evaluated as the elementary symmetric polynomial of the commuting
/// single-site twirls, which costs `O(N w D^2)` instead of `O(Omega D^2)`.
pub fn fixed_weight_apply(rho: &DensityMatrix, w: usize, sites: &[usize], budget_mb: usize) -> Result<DensityMatrix> {
    let q = uniform_q(rho, sites)?;
    let n = sites.len();
    if w > n {
        return Err(domain!("weight {w} exceeds {n} sites"));
    }
    if w == 0 {
        return Ok(rho.clone());
    }
    let dim = rho.dim();
    let bytes = (w as f64 + 1.0) * (dim as f64).powi(2) * 16.0;
    if bytes > budget_mb as f64 * 1048576.0 {
        return Err(capacity!(
            "dense fixed-weight channel needs {:.0} MiB (budget {budget_mb} MiB); use fixed_weight_spectrum",
            bytes / 1048576.0
        ));
    }
    let layout = rho.layout();
    let geom = site_geometry(&layout, sites)?;
    let mut acc: Vec<CMat> = vec![rho.matrix().clone()];
    acc.extend((0..w).map(|_| CMat::zeros(dim, dim)));
    for (stride, _) in geom {
        for ww in (1..=w).rev() {
            let (lo, hi) = acc.split_at_mut(ww);
            add_site_twirl(&mut hi[0], &lo[ww - 1], stride, q);
        }
    }
    let mut out = acc.pop().expect("w >= 1");
    crate::linalg::scale(&mut out, 1.0 / pauli::omega_f64(n, w, q)?);
    DensityMatrix::new(out, rho.dims().to_vec(), rho.register())
}

/// Same average by enumerating every weight-`w` error.
pub fn fixed_weight_apply_direct(rho: &DensityMatrix, w: usize, sites: &[usize]) -> Result<DensityMatrix> {
    let q = uniform_q(rho, sites)?;
    let layout = rho.layout();
    let dim = rho.dim();
    let mut out = CMat::zeros(dim, dim);
    let norm = 1.0 / pauli::omega_f64(sites.len(), w, q)?;
    for mu in FixedWeightIter::new(sites.len(), w, q)? {
        conjugate_accumulate(&mut out, rho.matrix(), &layout, &mu, sites, norm)?;
    }
    DensityMatrix::new(out, rho.dims().to_vec(), rho.register())
}

/// Whether `fixed_weight_spectrum` takes the Gram route.
pub fn uses_gram(psi: &EncodedState, w: usize, register: Register) -> Result<bool> {
    let (count, dim) = gram_size(psi, w, register)?;
    Ok(count < dim as f64)
}

fn gram_size(psi: &EncodedState, w: usize, register: Register) -> Result<(f64, usize)> {
    let p = psi.params();
    let om = pauli::omega_f64(p.n, w, p.q)?;
    match register {
        Register::RQ => Ok((om, p.dim_rq())),
        Register::Q => Ok((om * p.dim_r() as f64, p.dim_q())),
        Register::Other => Err(domain!("fixed-weight spectra are defined on Q or RQ")),
    }
}

/// Spectrum of the fixed-weight-decohered Q or RQ state.
///
/// When fewer corrupted vectors than the Hilbert dimension exist, their Gram
/// matrix is diagonalized instead of the density matrix; the result is padded
/// with zeros to the full dimension.
pub fn fixed_weight_spectrum(psi: &EncodedState, w: usize, register: Register, budget_mb: usize) -> Result<Spectrum> {
    let p = psi.params();
    if w > p.n {
        return Err(domain!("weight {w} exceeds site count {}", p.n));
    }
    let (count, dim) = gram_size(psi, w, register)?;
    if count < dim as f64 {
        let g = fixed_weight_gram(psi, w, register, budget_mb)?;
        let vals = spectra::hermitian_eigenvalues(&g)?;
        return Spectrum::from_eigenvalues(vals, dim);
    }
    let (rho, sites) = match register {
        Register::RQ => (psi.rho_rq(), p.q_sites()),
        _ => (psi.rho_q(), (0..p.n).collect()),
    };
    let out = fixed_weight_apply(&rho, w, &sites, budget_mb)?;
    spectra::spectrum(&out)
}

/// Gram matrix `A^dagger A` of the normalized corrupted vectors.
pub fn fixed_weight_gram(psi: &EncodedState, w: usize, register: Register, budget_mb: usize) -> Result<CMat> {
    let p = psi.params();
    let (count, dim) = gram_size(psi, w, register)?;
    let bytes = count * (count + dim as f64) * 16.0;
    if bytes > budget_mb as f64 * 1048576.0 {
        return Err(capacity!("Gram matrix of {count:.0} vectors exceeds {budget_mb} MiB"));
    }
    let count = count as usize;
    let (seeds, layout, sites) = match register {
        Register::RQ => {
            let a = psi.amplitudes();
            (CMat::from_fn(a.len(), 1, |i, _| a[i]), p.rq_layout(), p.q_sites())
        }
        _ => (psi.codewords(), p.q_layout(), (0..p.n).collect::<Vec<_>>()),
    };
    let scale = 1.0 / (count as f64).sqrt();
    let mut a = CMat::zeros(dim, count);
    let mut col = 0;
    let mut buf = vec![ZERO; dim];
    for mu in FixedWeightIter::new(p.n, w, p.q)? {
        for s in 0..seeds.ncols() {
            pauli::apply_error_into(seeds.col_as_slice(s), &layout, &mu, &sites, &mut buf)?;
            for (dst, x) in a.col_as_slice_mut(col).iter_mut().zip(&buf) {
                *dst = x * scale;
            }
            col += 1;
        }
    }
    Ok(a.adjoint() * &a)
}

/// Largest site count accepted by `convex_sum_oracle`.
pub const ORACLE_MAX_SITES: usize = 5;

/// `sum_w P_w N^(w)(rho)` by explicit enumeration of all `q^(2N)` errors.
pub fn convex_sum_oracle(rho: &DensityMatrix, p: f64, sites: &[usize]) -> Result<DensityMatrix> {
    if sites.len() > ORACLE_MAX_SITES {
        return Err(capacity!("convex-sum oracle is limited to {ORACLE_MAX_SITES} sites"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain!("p={p} outside [0,1]"));
    }
    let q = uniform_q(rho, sites)?;
    let n = sites.len();
    let layout = rho.layout();
    let dim = rho.dim();
    let mut out = CMat::zeros(dim, dim);
    for w in 0..=n {
        let pw = weight_probability(n, w, p)?;
        if pw == 0.0 {
            continue;
        }
        let per = pw / pauli::omega_f64(n, w, q)?;
        for mu in FixedWeightIter::new(n, w, q)? {
            conjugate_accumulate(&mut out, rho.matrix(), &layout, &mu, sites, per)?;
        }
    }
    DensityMatrix::new(out, rho.dims().to_vec(), rho.register())
}

/// `Tr[rho D_gamma(rho)]` on all sites of `rho`.
pub fn average_fidelity(rho: &DensityMatrix, spec: ChannelSpec) -> Result<f64> {
    let q = rho.dims().first().copied().unwrap_or(2);
    let gamma = spec
        .gamma(q)
        .ok_or_else(|| domain!("average fidelity needs an i.i.d. channel"))?;
    let sites: Vec<usize> = (0..rho.dims().len()).collect();
    let out = depolarize_dual(rho, gamma, &sites)?;
    let mut acc = 0.0;
    for j in 0..rho.dim() {
        for (a, b) in rho.matrix().col_as_slice(j).iter().zip(out.matrix().col_as_slice(j)) {
            acc += (a.conj() * b).re;
        }
    }
    Ok(acc)
}

/// Entrywise `max |a - b|` between two density matrices.
pub fn max_deviation(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    crate::linalg::max_abs_diff(a.matrix().as_ref(), b.matrix().as_ref())
}
