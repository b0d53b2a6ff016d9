//! Soft (alpha-reweighting) and hard (band projector) postselection.

use faer::MatRef;

use crate::density::{DensityMatrix, Register};
use crate::error::{domain, shape, Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::spectra::{self, Alpha, BandDecomposition, Spectrum, ZERO_CUTOFF};

/// Acceptance below this is reported as a failed postselection.
pub const MIN_ACCEPTANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    /// POVM element `M_alpha^dagger M_alpha = rho_Q^(alpha - 1)`.
    Soft { alpha: f64 },
    /// Projector onto the weight-`w` band.
    Band { w: usize },
}

#[derive(Debug, Clone)]
pub struct PostselectedState {
    pub sigma: DensityMatrix,
    pub acceptance: f64,
    pub protocol: Protocol,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(domain!("postselection needs finite alpha >= 1, got {alpha}"));
    }
    Ok(())
}

/// `V diag(f(lambda)) V^dagger`.
fn spectral_function(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let scaled = CMat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * f(vals[j]));
    let mut m = &scaled * vecs.adjoint();
    linalg::symmetrize(&mut m);
    m
}

fn clamp_spectrum(vals: &mut [f64]) {
    let top = vals.iter().cloned().fold(0.0, f64::max);
    for v in vals.iter_mut() {
        if *v <= ZERO_CUTOFF * top {
            *v = 0.0;
        }
    }
}

/// Apply `1_R (x) A` on both sides of an RQ operator, block by block:
/// `sigma_{r r'} = A rho_{r r'} B`.
fn conjugate_blocks(rho: MatRef<'_, C64>, left: MatRef<'_, C64>, right: MatRef<'_, C64>) -> Result<CMat> {
    let dq_in = left.ncols();
    if rho.nrows() % dq_in != 0 {
        return Err(shape!("RQ dimension {} is not a multiple of {dq_in}", rho.nrows()));
    }
    let dr = rho.nrows() / dq_in;
    let dq = left.nrows();
    let mut out = CMat::zeros(dr * dq, dr * dq);
    for r in 0..dr {
        for s in 0..dr {
            let block = rho.submatrix(r * dq_in, s * dq_in, dq_in, dq_in);
            let prod = left * block * right;
            out.as_mut().submatrix_mut(r * dq, s * dq, dq, dq).copy_from(&prod);
        }
    }
    Ok(out)
}

fn renormalized(mut m: CMat, acceptance: f64, like: &DensityMatrix) -> Result<DensityMatrix> {
    linalg::scale(&mut m, 1.0 / acceptance);
    linalg::symmetrize(&mut m);
    DensityMatrix::new(m, like.dims().to_vec(), like.register())
}

/// `sigma_Q = rho_Q^alpha / Tr rho_Q^alpha` and, when `rho_rq` is given,
/// `sigma_RQ = (1 (x) M) rho_RQ (1 (x) M) / Tr rho_Q^alpha` with
/// `M = rho_Q^((alpha - 1)/2)`.
pub fn soft_reweight(
    rho_q: &DensityMatrix,
    rho_rq: Option<&DensityMatrix>,
    alpha: f64,
) -> Result<(PostselectedState, Option<PostselectedState>)> {
    check_alpha(alpha)?;
    let protocol = Protocol::Soft { alpha };
    if alpha == 1.0 {
        let q = PostselectedState { sigma: rho_q.clone(), acceptance: 1.0, protocol };
        let rq = rho_rq.map(|r| PostselectedState { sigma: r.clone(), acceptance: 1.0, protocol });
        return Ok((q, rq));
    }
    let (vals, vecs) = spectra::hermitian_eigen(rho_q.matrix())?;
    soft_reweight_from_eigen(rho_q, vals, &vecs, rho_rq, alpha)
}

/// As `soft_reweight` with a precomputed eigendecomposition of `rho_q`
/// (eigenvalues in any order, eigenvectors as columns).
pub fn soft_reweight_from_eigen(
    rho_q: &DensityMatrix,
    mut vals: Vec<f64>,
    vecs: &CMat,
    rho_rq: Option<&DensityMatrix>,
    alpha: f64,
) -> Result<(PostselectedState, Option<PostselectedState>)> {
    check_alpha(alpha)?;
    let protocol = Protocol::Soft { alpha };
    if alpha == 1.0 {
        let q = PostselectedState { sigma: rho_q.clone(), acceptance: 1.0, protocol };
        let rq = rho_rq.map(|r| PostselectedState { sigma: r.clone(), acceptance: 1.0, protocol });
        return Ok((q, rq));
    }
    clamp_spectrum(&mut vals);
    let acceptance: f64 = vals.iter().map(|&l| l.powf(alpha)).sum();
    if !(acceptance >= MIN_ACCEPTANCE) {
        return Err(Error::DegeneratePostselection(acceptance));
    }
    let sigma_q = spectral_function(&vals, vecs, |l| l.powf(alpha));
    let q_state = PostselectedState { sigma: renormalized(sigma_q, acceptance, rho_q)?, acceptance, protocol };
    let rq_state = match rho_rq {
        None => None,
        Some(rq) => {
            let m = spectral_function(&vals, vecs, |l| if l > 0.0 { l.powf(0.5 * (alpha - 1.0)) } else { 0.0 });
            let conj = conjugate_blocks(rq.matrix().as_ref(), m.as_ref(), m.as_ref())?;
            Some(PostselectedState { sigma: renormalized(conj, acceptance, rq)?, acceptance, protocol })
        }
    };
    Ok((q_state, rq_state))
}

/// `Tr rho_Q^alpha`.
pub fn acceptance_probability(spec_q: &Spectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(spec_q.power_sum(alpha))
}

/// Project onto band `w` and renormalize. An RQ state with Q bands uses the
/// lifted projector `1_R (x) Pi_w`.
pub fn hard_band_postselect(rho: &DensityMatrix, bands: &BandDecomposition, w: usize) -> Result<PostselectedState> {
    let block = bands
        .band(w)
        .ok_or_else(|| domain!("band {w} not computed (have {})", bands.bands.len()))?;
    let protocol = Protocol::Band { w };
    let projected = match (rho.register(), bands.register) {
        (a, b) if a == b => {
            if rho.dim() != bands.dim {
                return Err(shape!("state dimension {} vs band dimension {}", rho.dim(), bands.dim));
            }
            // B (B^dagger rho B) B^dagger
            let inner = block.adjoint() * rho.matrix() * block;
            block * &inner * block.adjoint()
        }
        (Register::RQ, Register::Q) => {
            let p = crate::spectra::projector(block);
            conjugate_blocks(rho.matrix().as_ref(), p.as_ref(), p.as_ref())?
        }
        (a, b) => return Err(Error::Protocol(format!("cannot project a {a:?} state with {b:?} bands"))),
    };
    let acceptance = linalg::trace(projected.as_ref()).re;
    if !(acceptance >= MIN_ACCEPTANCE) {
        return Err(Error::DegeneratePostselection(acceptance));
    }
    Ok(PostselectedState { sigma: renormalized(projected, acceptance, rho)?, acceptance, protocol })
}

/// `S(sigma_Q) - S(sigma_RQ)` in base `q`; both states must come from the
/// same protocol parameter.
pub fn postselected_coherent_info(state_q: &PostselectedState, state_rq: &PostselectedState, q: f64) -> Result<f64> {
    if state_q.protocol != state_rq.protocol {
        return Err(Error::Protocol(format!("{:?} vs {:?}", state_q.protocol, state_rq.protocol)));
    }
    let sq = spectra::spectrum(&state_q.sigma)?;
    let srq = spectra::spectrum(&state_rq.sigma)?;
    spectra::coherent_information(&sq, &srq, Alpha::VON_NEUMANN, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::depolarize;
    use crate::code::{encode_sample, CodeParams};
    use crate::spectra::{band_projectors, entropy, spectrum};

    fn noisy(n: usize, p: f64, seed: u64) -> (DensityMatrix, DensityMatrix, crate::code::EncodedState) {
        let params = CodeParams::new(n, 1, 2, seed).unwrap();
        let psi = encode_sample(&params, 0).unwrap();
        let rq = depolarize(&psi.rho_rq(), p, &params.q_sites()).unwrap();
        let q = rq.reduce(&(1..=n).collect::<Vec<_>>(), Register::Q).unwrap();
        (q, rq, psi)
    }

    #[test]
    fn alpha_one_is_identity() {
        let (q, rq, _) = noisy(4, 0.2, 1);
        let (sq, srq) = soft_reweight(&q, Some(&rq), 1.0).unwrap();
        assert_eq!(sq.acceptance, 1.0);
        let ic = postselected_coherent_info(&sq, &srq.unwrap(), 2.0).unwrap();
        let direct = spectra::coherent_information(&spectrum(&q).unwrap(), &spectrum(&rq).unwrap(), Alpha::VON_NEUMANN, 2.0).unwrap();
        assert!((ic - direct).abs() < 1e-12);
        assert!(soft_reweight(&q, None, 0.5).is_err());
    }

    #[test]
    fn reweighting_is_spectral() {
        let (q, rq, _) = noisy(5, 0.25, 2);
        let alpha = 2.0;
        let (sq, srq) = soft_reweight(&q, Some(&rq), alpha).unwrap();
        let base = spectrum(&q).unwrap();
        let total = base.power_sum(alpha);
        let got = spectrum(&sq.sigma).unwrap();
        for (a, b) in base.values().iter().zip(got.values()) {
            assert!((a.powf(alpha) / total - b).abs() < 1e-10);
        }
        // acceptance is the purity and links to the Renyi-2 entropy
        let purity = linalg::trace((q.matrix() * q.matrix()).as_ref()).re;
        assert!((sq.acceptance - purity).abs() < 1e-11);
        let s2 = entropy(&base, Alpha::Finite(2.0), 2.0).unwrap();
        assert!((-sq.acceptance.log2() - s2).abs() < 1e-9);
        // partial trace consistency
        let srq = srq.unwrap();
        let back = srq.sigma.reduce(&(1..=5).collect::<Vec<_>>(), Register::Q).unwrap();
        assert!(linalg::max_abs_diff(back.matrix().as_ref(), sq.sigma.matrix().as_ref()) < 1e-9);
        assert!((srq.sigma.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn povm_element_is_bounded() {
        let (q, _, _) = noisy(4, 0.3, 3);
        let (mut vals, vecs) = spectra::hermitian_eigen(q.matrix()).unwrap();
        clamp_spectrum(&mut vals);
        let e = spectral_function(&vals, &vecs, |l| l.powf(2.0));
        let ev = spectra::hermitian_eigenvalues(&e).unwrap();
        assert!(ev.iter().all(|&x| x > -1e-10 && x <= 1.0 + 1e-10));
    }

    #[test]
    fn hard_band_at_zero_noise() {
        let (_, rq, psi) = noisy(4, 0.0, 4);
        let bands = band_projectors(&psi, 4, Register::RQ, 256).unwrap();
        let s = hard_band_postselect(&rq, &bands, 0).unwrap();
        assert!((s.acceptance - 1.0).abs() < 1e-12);
        assert!(linalg::max_abs_diff(s.sigma.matrix().as_ref(), psi.rho_rq().matrix().as_ref()) < 1e-12);
        assert!(matches!(hard_band_postselect(&rq, &bands, 1), Err(Error::DegeneratePostselection(_))));
    }

    #[test]
    fn hard_band_accounting_and_rank() {
        let (q, rq, psi) = noisy(5, 0.2, 5);
        let bands = band_projectors(&psi, 5, Register::Q, 256).unwrap();
        let mut total = 0.0;
        for (w, r) in bands.ranks().iter().enumerate() {
            if *r == 0 {
                continue;
            }
            let s = hard_band_postselect(&q, &bands, w).unwrap();
            total += s.acceptance;
            assert!(spectrum(&s.sigma).unwrap().rank() <= *r);
            let lifted = hard_band_postselect(&rq, &bands, w).unwrap();
            assert!((lifted.acceptance - s.acceptance).abs() < 1e-10);
            let back = lifted.sigma.reduce(&(1..=5).collect::<Vec<_>>(), Register::Q).unwrap();
            assert!(linalg::max_abs_diff(back.matrix().as_ref(), s.sigma.matrix().as_ref()) < 1e-9);
        }
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn protocol_mismatch() {
        let (q, rq, _) = noisy(3, 0.1, 6);
        let (a, _) = soft_reweight(&q, None, 2.0).unwrap();
        let (_, b) = soft_reweight(&q, Some(&rq), 3.0).unwrap();
        assert!(matches!(postselected_coherent_info(&a, &b.unwrap(), 2.0), Err(Error::Protocol(_))));
    }

    #[test]
    fn zero_noise_keeps_logical_qubit() {
        let (q, rq, _) = noisy(4, 0.0, 7);
        let (a, b) = soft_reweight(&q, Some(&rq), 3.0).unwrap();
        assert!((postselected_coherent_info(&a, &b.unwrap(), 2.0).unwrap() - 1.0).abs() < 1e-9);
    }
}
