//! Fast exact-identity checks run by the `selftest` command.

use serde::Serialize;

use crate::ansatz::{macwilliams_check, mean_shift_bands, postselect_failure, u_from_p, EnumeratorPair};
use crate::channels::{convex_sum_oracle, depolarize, depolarize_dual, depolarize_kraus, gamma_from_p, max_deviation};
use crate::code::{encode_sample, CodeParams};
use crate::density::Register;
use crate::error::Result;
use crate::pauli::pauli_weights_pure;
use crate::spectra;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Largest deviation seen.
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, tol, pass: value <= tol }
    }
}

const U_GRID: [f64; 5] = [0.0, 0.1, 1.0 / 3.0, 0.6, 1.0];

pub fn run_selftest(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();

    let (mut tr, mut psd, mut convex, mut dual, mut kraus) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (n, k, q) in [(2, 1, 2), (3, 1, 2), (2, 1, 3)] {
        let params = CodeParams::new(n, k, q, seed)?;
        let psi = encode_sample(&params, 0)?;
        let rq = psi.rho_rq();
        let sites = params.q_sites();
        for p in [0.0, 0.05, 0.3, 0.75] {
            let rho = depolarize(&rq, p, &sites)?;
            tr = tr.max((rho.trace() - 1.0).abs());
            let min = spectra::hermitian_eigenvalues(rho.matrix())?.into_iter().fold(f64::INFINITY, f64::min);
            psd = psd.max((-min).max(0.0));
            convex = convex.max(max_deviation(&rho, &convex_sum_oracle(&rq, p, &sites)?));
            dual = dual.max(max_deviation(&rho, &depolarize_dual(&rq, gamma_from_p(p, q), &sites)?));
            kraus = kraus.max(max_deviation(&rho, &depolarize_kraus(&rq, p, &sites)?));
        }
    }
    out.push(Check::new("channel trace preserved", tr, 1e-12));
    out.push(Check::new("channel output positive", psd, 1e-12));
    out.push(Check::new("channel equals convex sum over errors", convex, 1e-10));
    out.push(Check::new("dual parametrization", dual, 1e-12));
    out.push(Check::new("replacement form equals Kraus form", kraus, 1e-12));

    let (mut parseval, mut mw) = (0.0f64, 0.0f64);
    for (n, k, q) in [(4, 1, 2), (5, 1, 2), (6, 2, 2), (7, 1, 2), (3, 1, 3)] {
        let params = CodeParams::new(n, k, q, seed)?;
        for i in 0..3 {
            let psi = encode_sample(&params, i)?;
            let w = pauli_weights_pure(psi.amplitudes(), q, Some(k))?;
            let total: f64 = w.phi.iter().sum();
            let d = (q as f64).powi((n + k) as i32);
            parseval = parseval.max((total / d - 1.0).abs());
            let pair = EnumeratorPair::from_state(&psi)?;
            for u in U_GRID {
                let (r1, r2) = macwilliams_check(&pair, u)?;
                mw = mw.max(r1.abs()).max(r2.abs());
            }
        }
    }
    out.push(Check::new("Pauli weight sum rule", parseval, 1e-10));
    out.push(Check::new("MacWilliams identity on sampled codes", mw, 1e-9));

    let mut trace = 0.0f64;
    for (n, k, q) in [(5, 1, 2), (9, 1, 2), (11, 1, 2), (13, 2, 2), (6, 1, 3)] {
        for p in [0.0, 0.02, 0.1, 0.19, 0.4, 0.7] {
            for reg in [Register::Q, Register::RQ] {
                trace = trace.max((mean_shift_bands(p, n, k, q, reg)?.trace() - 1.0).abs());
            }
        }
    }
    out.push(Check::new("band model trace", trace, 1e-10));

    let mut pf = 0.0f64;
    for n in [3, 5, 9, 13] {
        let pair = EnumeratorPair::haar(n, 1, 2)?;
        pf = pf.max((postselect_failure(&pair, u_from_p(0.5, 2))? - 1.0 / 3.0).abs());
    }
    out.push(Check::new("postselection failure at p = 1/2", pf, 1e-12));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        for c in run_selftest(1).unwrap() {
            assert!(c.pass, "{c:?}");
        }
    }
}
