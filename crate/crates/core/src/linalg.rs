//! Dense complex linear algebra helpers shared by the state, channel and
//! spectral modules. Matrices are `faer::Mat<C64>` (column-major).

use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{domain, shape, Error, Result};

pub type C64 = Complex64;
pub type CMat = Mat<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Row-major tensor-product layout: factor 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Layout {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(domain!("tensor factor of dimension 0 in {dims:?}"));
        }
        let mut strides = vec![1usize; dims.len()];
        let mut total = 1usize;
        for f in (0..dims.len()).rev() {
            strides[f] = total;
            total = total
                .checked_mul(dims[f])
                .ok_or_else(|| Error::Capacity(format!("dimension overflow for {dims:?}")))?;
        }
        Ok(Self { dims: dims.to_vec(), strides, total })
    }

    pub fn uniform(q: usize, n: usize) -> Result<Self> {
        Self::new(&vec![q; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn stride(&self, factor: usize) -> usize {
        self.strides[factor]
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    #[inline]
    pub fn digit(&self, index: usize, factor: usize) -> usize {
        (index / self.strides[factor]) % self.dims[factor]
    }
}

/// `|v><v|`
pub fn dyad(v: &[C64]) -> CMat {
    let n = v.len();
    let mut m = CMat::zeros(n, n);
    for j in 0..n {
        let cj = v[j].conj();
        let col = m.col_as_slice_mut(j);
        for (i, x) in col.iter_mut().enumerate() {
            *x = v[i] * cj;
        }
    }
    m
}

pub fn scale(m: &mut CMat, s: f64) {
    for j in 0..m.ncols() {
        for x in m.col_as_slice_mut(j) {
            *x *= s;
        }
    }
}

pub fn trace(m: MatRef<'_, C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Largest entrywise deviation from Hermiticity, `max |m - m^dagger|`.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Replace `m` by `(m + m^dagger)/2`.
pub fn symmetrize(m: &mut CMat) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
        let d = m[(j, j)].re;
        m[(j, j)] = C64::new(d, 0.0);
    }
}

/// Partial trace of an operator on `layout`, keeping the listed factors in
/// their original order.
pub fn partial_trace(m: MatRef<'_, C64>, layout: &Layout, keep: &[usize]) -> Result<CMat> {
    if m.nrows() != layout.total() || m.ncols() != layout.total() {
        return Err(shape!(
            "operator is {}x{}, layout has dimension {}",
            m.nrows(),
            m.ncols(),
            layout.total()
        ));
    }
    check_factor_set(layout, keep)?;
    let traced: Vec<usize> = (0..layout.len()).filter(|f| !keep.contains(f)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&f| layout.dims()[f]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&f| layout.dims()[f]).collect();
    let kl = Layout::new(&keep_dims)?;
    let tl = Layout::new(&traced_dims)?;
    let embed = |kept: usize, env: usize| -> usize {
        let mut idx = 0;
        for (slot, &f) in keep.iter().enumerate() {
            idx += kl.digit(kept, slot) * layout.stride(f);
        }
        for (slot, &f) in traced.iter().enumerate() {
            idx += tl.digit(env, slot) * layout.stride(f);
        }
        idx
    };
    let dk = kl.total();
    let de = tl.total();
    // Precompute the full index map once: (kept, env) -> global.
    let mut map = vec![0usize; dk * de];
    for a in 0..dk {
        for e in 0..de {
            map[a * de + e] = embed(a, e);
        }
    }
    let mut out = CMat::zeros(dk, dk);
    for b in 0..dk {
        for e in 0..de {
            let col = m.col(map[b * de + e]);
            for a in 0..dk {
                out[(a, b)] += col[map[a * de + e]];
            }
        }
    }
    Ok(out)
}

/// Reduced density matrix of a pure state, keeping `keep`.
pub fn reduce_pure(state: &[C64], layout: &Layout, keep: &[usize]) -> Result<CMat> {
    if state.len() != layout.total() {
        return Err(shape!("state has length {}, layout has dimension {}", state.len(), layout.total()));
    }
    check_factor_set(layout, keep)?;
    let traced: Vec<usize> = (0..layout.len()).filter(|f| !keep.contains(f)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&f| layout.dims()[f]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&f| layout.dims()[f]).collect();
    let kl = Layout::new(&keep_dims)?;
    let tl = Layout::new(&traced_dims)?;
    let dk = kl.total();
    let de = tl.total();
    // reshape to dk x de, then M M^dagger
    let mut mat = CMat::zeros(dk, de);
    for a in 0..dk {
        let mut base = 0;
        for (slot, &f) in keep.iter().enumerate() {
            base += kl.digit(a, slot) * layout.stride(f);
        }
        for e in 0..de {
            let mut idx = base;
            for (slot, &f) in traced.iter().enumerate() {
                idx += tl.digit(e, slot) * layout.stride(f);
            }
            mat[(a, e)] = state[idx];
        }
    }
    Ok(&mat * mat.adjoint())
}

fn check_factor_set(layout: &Layout, factors: &[usize]) -> Result<()> {
    let mut seen = vec![false; layout.len()];
    for &f in factors {
        if f >= layout.len() {
            return Err(domain!("factor {f} out of range for {} factors", layout.len()));
        }
        if seen[f] {
            return Err(domain!("factor {f} listed twice"));
        }
        seen[f] = true;
    }
    Ok(())
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal basis for the span of the columns of `candidates` after
/// removing their components along `against` (orthonormal columns).
///
/// Block projection is applied twice before a column-pivoted QR; columns
/// whose pivot falls below `rel_tol` times the largest pivot are dropped.
pub fn orthonormal_complement_basis(
    candidates: MatRef<'_, C64>,
    against: Option<MatRef<'_, C64>>,
    rel_tol: f64,
) -> CMat {
    let mut c = candidates.to_owned();
    if let Some(b) = against {
        if b.ncols() > 0 {
            for _ in 0..2 {
                let coeffs = b.adjoint() * &c;
                c -= b * &coeffs;
            }
        }
    }
    let n = c.nrows();
    if c.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    let ref_norm = (0..candidates.ncols())
        .map(|j| candidates.col(j).norm_l2())
        .fold(0.0f64, f64::max);
    if ref_norm == 0.0 {
        return CMat::zeros(n, 0);
    }
    let qr = c.col_piv_qr();
    let r = qr.thin_R();
    let rank = (0..r.nrows().min(r.ncols()))
        .take_while(|&i| r[(i, i)].norm() > rel_tol * ref_norm)
        .count();
    let q = qr.compute_thin_Q();
    let mut basis = q.subcols(0, rank).to_owned();
    // second pass against the previous bands keeps the blocks orthogonal
    // to working precision
    if let Some(b) = against {
        if b.ncols() > 0 && rank > 0 {
            let coeffs = b.adjoint() * &basis;
            basis -= b * &coeffs;
            let qr2 = basis.qr();
            basis = qr2.compute_thin_Q();
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_digits_are_row_major() {
        let l = Layout::new(&[2, 3, 2]).unwrap();
        assert_eq!(l.total(), 12);
        // index = d0*6 + d1*2 + d2
        assert_eq!(l.digit(11, 0), 1);
        assert_eq!(l.digit(11, 1), 2);
        assert_eq!(l.digit(11, 2), 1);
    }

    #[test]
    fn bell_pair_reduces_to_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)];
        let l = Layout::uniform(2, 2).unwrap();
        for keep in [[0usize], [1]] {
            let r = reduce_pure(&bell, &l, &keep).unwrap();
            assert!((r[(0, 0)].re - 0.5).abs() < 1e-15);
            assert!((r[(1, 1)].re - 0.5).abs() < 1e-15);
            assert!(r[(0, 1)].norm() < 1e-15);
            let rho = dyad(&bell);
            let r2 = partial_trace(rho.as_ref(), &l, &keep).unwrap();
            assert!(max_abs_diff(r.as_ref(), r2.as_ref()) < 1e-15);
        }
    }

    #[test]
    fn trace_over_nothing_is_the_dyad() {
        let v: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0 - i as f64)).collect();
        let l = Layout::new(&[2, 3]).unwrap();
        let r = reduce_pure(&v, &l, &[0, 1]).unwrap();
        assert!(max_abs_diff(r.as_ref(), dyad(&v).as_ref()) < 1e-13);
    }

    #[test]
    fn bad_factor_sets_are_rejected() {
        let l = Layout::uniform(2, 2).unwrap();
        let v = vec![ONE, ZERO, ZERO, ZERO];
        assert!(matches!(reduce_pure(&v, &l, &[2]), Err(Error::Domain(_))));
        assert!(matches!(reduce_pure(&v, &l, &[0, 0]), Err(Error::Domain(_))));
        assert!(matches!(reduce_pure(&v[..3], &l, &[0]), Err(Error::Shape(_))));
    }

    #[test]
    fn complement_basis_drops_dependent_columns() {
        // columns: e0, e1, e0+e1 -> rank 2; against e0 -> rank 1
        let mut c = CMat::zeros(3, 3);
        c[(0, 0)] = ONE;
        c[(1, 1)] = ONE;
        c[(0, 2)] = ONE;
        c[(1, 2)] = ONE;
        let b = orthonormal_complement_basis(c.as_ref(), None, 1e-8);
        assert_eq!(b.ncols(), 2);
        let mut e0 = CMat::zeros(3, 1);
        e0[(0, 0)] = ONE;
        let b2 = orthonormal_complement_basis(c.as_ref(), Some(e0.as_ref()), 1e-8);
        assert_eq!(b2.ncols(), 1);
        assert!(b2[(0, 0)].norm() < 1e-14);
    }
}
