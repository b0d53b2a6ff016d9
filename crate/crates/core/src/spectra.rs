//! Spectra, entropies, coherent information and the hierarchical band
//! subspaces spanned by weight-`w` corrupted codewords.

use faer::Side;

use crate::code::EncodedState;
use crate::density::{DensityMatrix, Register};
use crate::error::{capacity, domain, Error, Result};
use crate::linalg::{self, CMat, Layout, ZERO};
use crate::pauli::{self, FixedWeightIter};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const ZERO_CUTOFF: f64 = 1e-12;
/// Inputs whose Hermiticity defect exceeds this are rejected.
pub const HERMITICITY_TOL: f64 = 1e-8;
/// Relative singular-value threshold deciding band ranks.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    dim: usize,
    trace: f64,
}

impl Spectrum {
    /// Sort descending, clamp values below `ZERO_CUTOFF * max` (and
    /// negatives) to zero, and pad with zeros up to `dim`.
    pub fn from_eigenvalues(mut values: Vec<f64>, dim: usize) -> Result<Self> {
        if values.len() > dim {
            return Err(domain!("{} eigenvalues for dimension {dim}", values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let max = values.first().copied().unwrap_or(0.0).max(0.0);
        let cut = ZERO_CUTOFF * max;
        for v in values.iter_mut() {
            if *v < cut {
                *v = 0.0;
            }
        }
        values.resize(dim, 0.0);
        let trace = values.iter().sum();
        Ok(Self { values, dim, trace })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn nonzero(&self) -> &[f64] {
        let n = self.values.iter().take_while(|&&v| v > 0.0).count();
        &self.values[..n]
    }

    pub fn rank(&self) -> usize {
        self.nonzero().len()
    }

    /// `sum lambda^alpha`
    pub fn power_sum(&self, alpha: f64) -> f64 {
        self.nonzero().iter().map(|v| v.powf(alpha)).sum()
    }
}

fn check_hermitian(m: &CMat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Input(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    let defect = linalg::hermiticity_defect(m.as_ref());
    if defect > HERMITICITY_TOL {
        return Err(Error::Input(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    Ok(())
}

pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Eigenvalues (ascending) and eigenvectors as columns.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_hermitian(m)?;
    let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S();
    let vals = (0..m.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn spectrum(rho: &DensityMatrix) -> Result<Spectrum> {
    Spectrum::from_eigenvalues(hermitian_eigenvalues(rho.matrix())?, rho.dim())
}

/// `max |rho - V diag(lambda) V^dagger|`
pub fn reconstruction_residual(rho: &CMat) -> Result<f64> {
    let (vals, v) = hermitian_eigen(rho)?;
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * vals[j]);
    let back = &scaled * v.adjoint();
    Ok(linalg::max_abs_diff(back.as_ref(), rho.as_ref()))
}

/// Renyi index: `Finite(1.0)` is von Neumann.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinity,
}

impl Alpha {
    pub const VON_NEUMANN: Alpha = Alpha::Finite(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_infinite() && alpha > 0.0 {
            return Ok(Alpha::Infinity);
        }
        if !(alpha >= 1.0) {
            return Err(domain!("Renyi index {alpha} < 1"));
        }
        Ok(Alpha::Finite(alpha))
    }

    pub fn value(&self) -> f64 {
        match self {
            Alpha::Finite(a) => *a,
            Alpha::Infinity => f64::INFINITY,
        }
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinity => write!(f, "inf"),
        }
    }
}

/// Entropy in base `q`, normalizing by the spectrum's trace.
pub fn entropy(spec: &Spectrum, alpha: Alpha, q: f64) -> Result<f64> {
    let t = spec.trace();
    if !(t > 0.0) {
        return Err(domain!("spectrum has zero trace"));
    }
    let ln_q = q.ln();
    let nz = spec.nonzero();
    let s = match alpha {
        Alpha::Infinity => -(nz[0] / t).ln() / ln_q,
        Alpha::Finite(a) if a < 1.0 => return Err(domain!("Renyi index {a} < 1")),
        Alpha::Finite(a) if a == 1.0 => {
            -nz.iter().map(|&v| {
                let x = v / t;
                x * x.ln()
            }).sum::<f64>()
                / ln_q
        }
        Alpha::Finite(a) => {
            // log-sum-exp keeps large alpha finite
            let logs: Vec<f64> = nz.iter().map(|&v| a * (v / t).ln()).collect();
            let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
            lse / ((1.0 - a) * ln_q)
        }
    };
    Ok(s.max(0.0))
}

/// `S_alpha(Q) - S_alpha(RQ)`.
pub fn coherent_information(spec_q: &Spectrum, spec_rq: &Spectrum, alpha: Alpha, q: f64) -> Result<f64> {
    Ok(entropy(spec_q, alpha, q)? - entropy(spec_rq, alpha, q)?)
}

/// Orthonormal band blocks `pi^(w)`, lowest weight first.
#[derive(Debug, Clone)]
pub struct BandDecomposition {
    pub register: Register,
    pub bands: Vec<CMat>,
    pub dim: usize,
}

impl BandDecomposition {
    pub fn ranks(&self) -> Vec<usize> {
        self.bands.iter().map(|b| b.ncols()).collect()
    }

    /// Dimension left over after the computed bands (the reservoir when
    /// `w_max` stops below the critical weight).
    pub fn residual_rank(&self) -> usize {
        self.dim - self.ranks().iter().sum::<usize>()
    }

    pub fn band(&self, w: usize) -> Option<&CMat> {
        self.bands.get(w)
    }

    /// Largest entry of `pi^(w)^dagger pi^(w')` over distinct pairs.
    pub fn max_overlap(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.bands.len() {
            for b in a + 1..self.bands.len() {
                if self.bands[a].ncols() == 0 || self.bands[b].ncols() == 0 {
                    continue;
                }
                let o = self.bands[a].adjoint() * &self.bands[b];
                for j in 0..o.ncols() {
                    for x in o.col_as_slice(j) {
                        worst = worst.max(x.norm());
                    }
                }
            }
        }
        worst
    }
}

/// Build the band subspaces for `psi` up to weight `w_max`.
///
/// `Register::RQ` starts from `|Psi>` and corrupts it; `Register::Q` starts
/// from the codeword span and corrupts every codeword.
pub fn band_projectors(psi: &EncodedState, w_max: usize, register: Register, budget_mb: usize) -> Result<BandDecomposition> {
    let p = psi.params();
    let (seed_vectors, layout, sites): (CMat, Layout, Vec<usize>) = match register {
        Register::RQ => {
            let a = psi.amplitudes();
            (CMat::from_fn(a.len(), 1, |i, _| a[i]), p.rq_layout(), p.q_sites())
        }
        Register::Q => (psi.codewords(), p.q_layout(), (0..p.n).collect()),
        Register::Other => return Err(domain!("bands are defined on Q or RQ")),
    };
    let dim = layout.total();
    let n_seed = seed_vectors.ncols();
    let mut bands: Vec<CMat> = Vec::new();
    let mut basis = CMat::zeros(dim, 0);
    for w in 0..=w_max.min(p.n) {
        if basis.ncols() == dim {
            bands.push(CMat::zeros(dim, 0));
            continue;
        }
        let count = pauli::omega_f64(p.n, w, p.q)? * n_seed as f64;
        let bytes = count * dim as f64 * 16.0 * 3.0;
        if bytes > (budget_mb as f64) * 1048576.0 {
            return Err(capacity!("band {w} needs {:.0} candidate vectors of length {dim}", count));
        }
        let mut cand = CMat::zeros(dim, count as usize);
        let mut col = 0;
        let mut buf = vec![ZERO; dim];
        for mu in FixedWeightIter::new(p.n, w, p.q)? {
            for s in 0..n_seed {
                pauli::apply_error_into(seed_vectors.col_as_slice(s), &layout, &mu, &sites, &mut buf)?;
                cand.col_as_slice_mut(col).copy_from_slice(&buf);
                col += 1;
            }
        }
        let against = if basis.ncols() > 0 { Some(basis.as_ref()) } else { None };
        let block = linalg::orthonormal_complement_basis(cand.as_ref(), against, RANK_TOL);
        let mut grown = CMat::zeros(dim, basis.ncols() + block.ncols());
        for j in 0..basis.ncols() {
            grown.col_as_slice_mut(j).copy_from_slice(basis.col_as_slice(j));
        }
        for j in 0..block.ncols() {
            grown.col_as_slice_mut(basis.ncols() + j).copy_from_slice(block.col_as_slice(j));
        }
        basis = grown;
        bands.push(block);
    }
    Ok(BandDecomposition { register, bands, dim })
}

/// Projector `B B^dagger` for an orthonormal block.
pub fn projector(block: &CMat) -> CMat {
    block * block.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{encode_sample, CodeParams};
    use crate::linalg::C64;

    fn diag(v: &[f64]) -> DensityMatrix {
        let n = v.len();
        let m = CMat::from_fn(n, n, |i, j| if i == j { C64::new(v[i], 0.0) } else { ZERO });
        DensityMatrix::new(m, vec![n], Register::Other).unwrap()
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(&diag(&[0.3, 0.7])).unwrap();
        assert!((s.values()[0] - 0.7).abs() < 1e-15 && (s.values()[1] - 0.3).abs() < 1e-15);
        let s = spectrum(&diag(&[0.125; 8])).unwrap();
        assert!(s.values().iter().all(|v| (v - 0.125).abs() < 1e-15));
        let v: Vec<C64> = (0..4).map(|i| C64::new(0.5, 0.0) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = spectrum(&DensityMatrix::from_pure(&v, vec![4], Register::Other).unwrap()).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-14);
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMat::identity(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::new(m, vec![2], Register::Other).unwrap();
        assert!(matches!(spectrum(&rho), Err(Error::Input(_))));
    }

    #[test]
    fn entropy_examples() {
        let uniform = Spectrum::from_eigenvalues(vec![0.2; 5], 5).unwrap();
        for a in [Alpha::Finite(1.0), Alpha::Finite(2.0), Alpha::Finite(7.5), Alpha::Infinity] {
            assert!((entropy(&uniform, a, 2.0).unwrap() - 5f64.log2()).abs() < 1e-12);
        }
        let pure = Spectrum::from_eigenvalues(vec![1.0, 0.0, 0.0], 3).unwrap();
        assert!(entropy(&pure, Alpha::VON_NEUMANN, 2.0).unwrap().abs() < 1e-15);
        let s = Spectrum::from_eigenvalues(vec![0.5, 0.3, 0.2], 3).unwrap();
        assert!((entropy(&s, Alpha::Infinity, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let s1 = entropy(&s, Alpha::Finite(1.0), 2.0).unwrap();
        for a in [1.0 + 1e-6, 1.0 - 1e-6] {
            let sa = if a < 1.0 {
                // continuity from below, evaluated directly
                s.values().iter().map(|v| v.powf(a)).sum::<f64>().log2() / (1.0 - a)
            } else {
                entropy(&s, Alpha::Finite(a), 2.0).unwrap()
            };
            assert!((sa - s1).abs() < 1e-4);
        }
        assert!(Alpha::new(0.5).is_err());
    }

    #[test]
    fn coherent_information_examples() {
        let mixed_q = Spectrum::from_eigenvalues(vec![1.0 / 8.0; 8], 8).unwrap();
        let mixed_rq = Spectrum::from_eigenvalues(vec![1.0 / 16.0; 16], 16).unwrap();
        let ic = coherent_information(&mixed_q, &mixed_rq, Alpha::VON_NEUMANN, 2.0).unwrap();
        assert!((ic + 1.0).abs() < 1e-12);

        let p = CodeParams::new(3, 1, 2, 3).unwrap();
        let psi = encode_sample(&p, 0).unwrap();
        let sq = spectrum(&psi.rho_q()).unwrap();
        let srq = spectrum(&psi.rho_rq()).unwrap();
        for a in [Alpha::VON_NEUMANN, Alpha::Infinity] {
            assert!((coherent_information(&sq, &srq, a, 2.0).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn bands_resolve_identity() {
        let p = CodeParams::new(5, 1, 2, 11).unwrap();
        let psi = encode_sample(&p, 0).unwrap();
        let b = band_projectors(&psi, 5, Register::RQ, 1024).unwrap();
        let r = b.ranks();
        assert_eq!(r[0], 1);
        assert_eq!(r[1], 15);
        assert_eq!(r.iter().sum::<usize>(), 64);
        assert!(b.max_overlap() < 1e-8);

        let bq = band_projectors(&psi, 5, Register::Q, 1024).unwrap();
        assert_eq!(bq.ranks()[0], 2);
        assert_eq!(bq.ranks().iter().sum::<usize>(), 32);
        assert!(bq.max_overlap() < 1e-8);
    }
}
