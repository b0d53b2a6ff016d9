//! Weight enumerators `A(u)`, `B(u)` of a code and their Haar average.

use crate::code::EncodedState;
use crate::error::{domain, Error, Result};
use crate::pauli::pauli_weights_pure;

#[derive(Debug, Clone, PartialEq)]
pub enum Enumerators {
    /// Coefficients `A_w`, `B_w` of one code.
    Numeric { a: Vec<f64>, b: Vec<f64> },
    /// Closed-form Haar average with `a = (q^(N-k) - 1)/(q^(2N) - 1)`.
    Haar { a: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratorPair {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub kind: Enumerators,
}

fn poly(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

impl EnumeratorPair {
    pub fn haar(n: usize, k: usize, q: usize) -> Result<Self> {
        if n == 0 || k > n || q < 2 {
            return Err(domain!("invalid code parameters N={n}, k={k}, q={q}"));
        }
        let qf = q as f64;
        let a = (qf.powi((n - k) as i32) - 1.0) / (qf.powi(2 * n as i32) - 1.0);
        Ok(Self { n, k, q, kind: Enumerators::Haar { a } })
    }

    /// `A_w` from strings trivial on the reference, `B_w` from all strings,
    /// both weighted by `|Tr(S rho)|^2` and counted on the physical sites.
    pub fn from_state(psi: &EncodedState) -> Result<Self> {
        let p = psi.params();
        let spec = pauli_weights_pure(psi.amplitudes(), p.q, Some(p.k))?;
        let lw = spec.logical.ok_or_else(|| Error::Input("missing logical split".into()))?;
        Ok(Self { n: p.n, k: p.k, q: p.q, kind: Enumerators::Numeric { a: lw.phi_identity, b: lw.phi_sigma } })
    }

    fn qf(&self) -> f64 {
        self.q as f64
    }

    pub fn a(&self, u: f64) -> f64 {
        match &self.kind {
            Enumerators::Numeric { a, .. } => poly(a, u),
            Enumerators::Haar { a } => {
                let g = (1.0 + (self.qf().powi(2) - 1.0) * u).powi(self.n as i32);
                1.0 - a + a * g
            }
        }
    }

    pub fn b(&self, u: f64) -> f64 {
        match &self.kind {
            Enumerators::Numeric { b, .. } => poly(b, u),
            Enumerators::Haar { a } => {
                let (n, k, q) = (self.n as i32, self.k as i32, self.qf());
                let g = (1.0 + (q * q - 1.0) * u).powi(n);
                q.powi(n + k) * a + q.powi(k - n) * (1.0 - a) * g
            }
        }
    }
}

/// Map from error rate to enumerator argument, `u = p / ((q^2-1)(1-p))`.
pub fn u_from_p(p: f64, q: usize) -> f64 {
    p / (((q * q - 1) as f64) * (1.0 - p))
}

/// Residuals of the MacWilliams duality at `u` and of the crossing identity
/// at `u* = 1/(q+1)`.
pub fn macwilliams_check(pair: &EnumeratorPair, u: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&u) {
        return Err(domain!("u={u} outside [0,1]"));
    }
    let q = pair.qf();
    let s = 1.0 + (q * q - 1.0) * u;
    let n = pair.n as i32;
    let r1 = pair.a((1.0 - u) / s) - q.powi(n - pair.k as i32) * s.powi(-n) * pair.b(u);
    let us = 1.0 / (q + 1.0);
    let r2 = pair.a(us) - q.powi(-(pair.k as i32)) * pair.b(us);
    Ok((r1, r2))
}

/// Failure probability after postselecting on no detected error,
/// `q^k/(q^k+1) (1 - A/B)`.
pub fn postselect_failure(pair: &EnumeratorPair, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(domain!("u={u} outside [0,1]"));
    }
    let b = pair.b(u);
    if !(b > 0.0) {
        return Err(domain!("B({u}) = {b} is not positive"));
    }
    let qk = pair.qf().powi(pair.k as i32);
    Ok(qk / (qk + 1.0) * (1.0 - pair.a(u) / b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Renyi2 {
    pub s2_q: f64,
    pub s2_rq: f64,
    pub ic2: f64,
}

/// Purities of the dual channel output with coefficients damped by
/// `(1-gamma)^w`: `S2(Q) = N - log_q A((1-gamma)^2)` and
/// `S2(RQ) = N + k - log_q B((1-gamma)^2)`.
pub fn renyi2_from_enumerators(pair: &EnumeratorPair, gamma: f64) -> Result<Renyi2> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(domain!("gamma={gamma} outside [0,1]"));
    }
    let u = (1.0 - gamma).powi(2);
    let ln_q = pair.qf().ln();
    let (a, b) = (pair.a(u), pair.b(u));
    let (n, k) = (pair.n as f64, pair.k as f64);
    let s2_q = n - a.ln() / ln_q;
    let s2_rq = n + k - b.ln() / ln_q;
    Ok(Renyi2 { s2_q, s2_rq, ic2: (b / a).ln() / ln_q - k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{encode_sample, CodeParams};

    #[test]
    fn haar_endpoints() {
        for (n, k, q) in [(5, 1, 2), (9, 1, 2), (4, 2, 3), (7, 7, 2)] {
            let h = EnumeratorPair::haar(n, k, q).unwrap();
            let qf = q as f64;
            assert!((h.a(0.0) - 1.0).abs() < 1e-12);
            assert!((h.b(0.0) - 1.0).abs() < 1e-12);
            assert!((h.a(1.0) / qf.powi((n - k) as i32) - 1.0).abs() < 1e-12);
            assert!((h.b(1.0) / qf.powi((n + k) as i32) - 1.0).abs() < 1e-12);
        }
        let full = EnumeratorPair::haar(6, 6, 2).unwrap();
        assert!([0.0, 0.3, 1.0].iter().all(|&u| full.a(u) == 1.0));
    }

    #[test]
    fn haar_pair_is_self_dual() {
        for (n, k, q) in [(5, 1, 2), (11, 1, 2), (6, 2, 3)] {
            let h = EnumeratorPair::haar(n, k, q).unwrap();
            for i in 0..=20 {
                let (r1, r2) = macwilliams_check(&h, i as f64 / 20.0).unwrap();
                let scale = h.a(1.0);
                assert!(r1.abs() / scale < 1e-10 && r2.abs() < 1e-10, "{n} {r1} {r2}");
            }
        }
    }

    #[test]
    fn numeric_pair_is_self_dual() {
        let p = CodeParams::new(5, 1, 2, 17).unwrap();
        let pair = EnumeratorPair::from_state(&encode_sample(&p, 0).unwrap()).unwrap();
        assert!((pair.a(0.0) - 1.0).abs() < 1e-12 && (pair.b(0.0) - 1.0).abs() < 1e-12);
        assert!((pair.a(1.0) - 16.0).abs() < 1e-10 && (pair.b(1.0) - 64.0).abs() < 1e-9);
        for u in [0.0, 0.2, 1.0 / 3.0, 0.7, 1.0] {
            let (r1, r2) = macwilliams_check(&pair, u).unwrap();
            assert!(r1.abs() < 1e-9 && r2.abs() < 1e-9);
        }
    }

    #[test]
    fn failure_probability() {
        let h = EnumeratorPair::haar(11, 1, 2).unwrap();
        assert_eq!(postselect_failure(&h, 0.0).unwrap(), 0.0);
        assert!((postselect_failure(&h, 1.0 / 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let h3 = EnumeratorPair::haar(5, 2, 3).unwrap();
        assert!((postselect_failure(&h3, 0.25).unwrap() - 8.0 / 10.0).abs() < 1e-12);
        let v = postselect_failure(&h, u_from_p(0.3, 2)).unwrap();
        assert!(v > 0.0 && v < 1.0 / 3.0);
        let mut last = 0.0;
        for i in 1..=50 {
            let f = postselect_failure(&h, u_from_p(0.5 * i as f64 / 50.0, 2)).unwrap();
            assert!(f >= last - 1e-15);
            last = f;
        }
    }

    #[test]
    fn renyi2_endpoints() {
        let h = EnumeratorPair::haar(20, 1, 2).unwrap();
        let r = renyi2_from_enumerators(&h, 0.0).unwrap();
        assert!((r.s2_q - 1.0).abs() < 1e-9 && r.s2_rq.abs() < 1e-9 && (r.ic2 - 1.0).abs() < 1e-9);
        // crossing of the zero-rate curve at 1 - 1/sqrt(q+1)
        let g2 = 1.0 - 1.0 / 3f64.sqrt();
        let big = EnumeratorPair::haar(200, 1, 2).unwrap();
        let below = renyi2_from_enumerators(&big, g2 - 0.02).unwrap().ic2;
        let above = renyi2_from_enumerators(&big, g2 + 0.02).unwrap().ic2;
        assert!(below > 0.9 && above < -0.9, "{below} {above}");
        let p2 = crate::channels::p_from_gamma(g2, 2);
        assert!((p2 - (3.0 - 3f64.sqrt()) / 4.0).abs() < 1e-12);
    }
}
