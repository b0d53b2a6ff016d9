use proptest::prelude::*;

use haarcode::ansatz::{
    macwilliams_check, mean_shift_bands, mp_cdf, mp_edges, shannon_entropy, zeroth_order_bands, EnumeratorPair,
};
use haarcode::channels::{depolarize, depolarize_dual, gamma_from_p, max_deviation};
use haarcode::code::{encode_sample, CodeParams};
use haarcode::density::Register;
use haarcode::experiments::stats::{mean_stderr, scaling_collapse, zero_crossing};
use haarcode::experiments::sweep::fmt_sig;
use haarcode::postselect::soft_reweight;
use haarcode::spectra::{self, Alpha};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn channel_is_trace_preserving_and_positive(n in 1usize..4, seed in 0u64..1000, p in 0.0f64..=1.0) {
        let params = CodeParams::new(n, 1, 2, seed).unwrap();
        let rq = encode_sample(&params, 0).unwrap().rho_rq();
        let rho = depolarize(&rq, p, &params.q_sites()).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        let min = spectra::hermitian_eigenvalues(rho.matrix()).unwrap().into_iter().fold(f64::INFINITY, f64::min);
        prop_assert!(min > -1e-12);
        let dual = depolarize_dual(&rq, gamma_from_p(p, 2), &params.q_sites()).unwrap();
        prop_assert!(max_deviation(&rho, &dual) < 1e-12);
    }

    #[test]
    fn band_models_keep_unit_trace(n in 1usize..14, k in 1usize..3, p in 0.0f64..=1.0, q_reg in any::<bool>()) {
        prop_assume!(k <= n);
        let reg = if q_reg { Register::Q } else { Register::RQ };
        let m = mean_shift_bands(p, n, k, 2, reg).unwrap();
        prop_assert!((m.trace() - 1.0).abs() < 1e-10);
        for b in &m.bands {
            prop_assert!(b.mean >= 0.0);
        }
        let z = zeroth_order_bands(p, n, k, 2, reg).unwrap();
        prop_assert!((z.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn haar_enumerators_obey_macwilliams(n in 1usize..16, k in 1usize..4, u in 0.0f64..=1.0) {
        prop_assume!(k <= n);
        let pair = EnumeratorPair::haar(n, k, 2).unwrap();
        let (r1, r2) = macwilliams_check(&pair, u).unwrap();
        let scale = pair.b(1.0);
        prop_assert!(r1.abs() < 1e-9 * scale && r2.abs() < 1e-9 * scale, "{r1} {r2}");
        prop_assert!((pair.a(0.0) - 1.0).abs() < 1e-12 && (pair.b(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn renyi_entropy_decreases_with_alpha(p in 0.0f64..0.75, a in 1.0f64..8.0, da in 0.0f64..4.0) {
        let h1 = shannon_entropy(p, 2, Alpha::Finite(a)).unwrap();
        let h2 = shannon_entropy(p, 2, Alpha::Finite(a + da)).unwrap();
        let hinf = shannon_entropy(p, 2, Alpha::Infinity).unwrap();
        prop_assert!(h2 <= h1 + 1e-12 && hinf <= h2 + 1e-12);
        prop_assert!(h1 <= 2.0 + 1e-12);
    }

    #[test]
    fn mp_cdf_is_monotone(c in 0.05f64..50.0, t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let (lo, hi) = mp_edges(c).unwrap();
        let (a, b) = (lo + (hi - lo) * t1.min(t2), lo + (hi - lo) * t1.max(t2));
        let (fa, fb) = (mp_cdf(c, a).unwrap(), mp_cdf(c, b).unwrap());
        prop_assert!((0.0..=1.0 + 1e-9).contains(&fa) && fa <= fb + 1e-9);
        prop_assert!((mp_cdf(c, hi).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn soft_reweighting_acceptance_is_a_probability(seed in 0u64..1000, p in 0.0f64..0.75, alpha in 1.0f64..6.0) {
        let params = CodeParams::new(2, 1, 2, seed).unwrap();
        let psi = encode_sample(&params, 0).unwrap();
        let rho = depolarize(&psi.rho_q(), p, &[0, 1]).unwrap();
        let s = soft_reweight(&rho, None, alpha).unwrap().0;
        prop_assert!(s.acceptance > 0.0 && s.acceptance <= 1.0 + 1e-12);
        prop_assert!((s.sigma.trace() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn formatted_floats_round_trip(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_sig(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }

    #[test]
    fn stderr_is_scale_covariant(xs in prop::collection::vec(-1e3f64..1e3, 2..40), s in 0.1f64..10.0) {
        let (m, e) = mean_stderr(&xs);
        let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
        let (m2, e2) = mean_stderr(&scaled);
        prop_assert!((m2 - m * s).abs() <= 1e-9 * (1.0 + m.abs() * s));
        prop_assert!((e2 - e * s).abs() <= 1e-9 * (1.0 + e * s));
    }

    #[test]
    fn zero_crossing_is_bracketed(ys in prop::collection::vec(-1.0f64..1.0, 2..12)) {
        let curve: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        if let Some(x) = zero_crossing(&curve) {
            let i = (x.floor() as usize).min(curve.len() - 2);
            let (y0, y1) = (curve[i].1, curve[i + 1].1);
            prop_assert!(y0 == 0.0 || y0.signum() != y1.signum() || x == i as f64 + 1.0);
        }
    }

    #[test]
    fn exact_collapse_scores_zero(p_c in 0.1f64..0.3, nu in 0.5f64..3.0) {
        let mut recs = Vec::new();
        for n in [5usize, 7, 9, 11] {
            for i in 0..=20 {
                let p = p_c - 0.1 + 0.01 * i as f64;
                let x = (p - p_c) * (n as f64).powf(1.0 / nu);
                recs.push((n, p, 0.3 * x - 0.1));
            }
        }
        let c = scaling_collapse(&recs, nu, p_c).unwrap();
        prop_assert!(c.score < 1e-20, "{}", c.score);
    }
}
