//! WebAssembly bindings behind `www/index.html`. Every export returns a JSON
//! string so the page needs no generated type glue beyond `wasm-bindgen`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use haarcode::ansatz::{
    coherent_info_leading, critical_weight, mean_shift_bands, mp_density, mp_edges, threshold_solve, zeroth_order_bands,
    ThresholdKind,
};
use haarcode::code::CodeParams;
use haarcode::density::Register;
use haarcode::experiments::figures::{micro_data, micro_histogram};
use haarcode::spectra::Alpha;

/// Largest N the page samples codes for; larger sizes stall the tab.
pub const MAX_SAMPLED_N: usize = 7;
const BUDGET_MB: usize = 256;

fn to_js<T: Serialize>(v: &T) -> Result<String, JsError> {
    serde_json::to_string(v).map_err(|e| JsError::new(&e.to_string()))
}

fn err(e: haarcode::error::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[derive(Serialize)]
struct MicroView {
    c: f64,
    ks: f64,
    x_plus: f64,
    bins: Vec<[f64; 4]>,
    curve: Vec<[f64; 2]>,
}

/// Sample weight-`w` codes, histogram the rescaled eigenvalues of the
/// microcanonical state on Q and overlay the Marchenko-Pastur law.
#[wasm_bindgen]
pub fn micro_histogram_json(n: usize, w: usize, samples: usize, seed: u64) -> Result<String, JsError> {
    if n > MAX_SAMPLED_N {
        return Err(JsError::new(&format!("N={n} exceeds the in-browser limit {MAX_SAMPLED_N}")));
    }
    let params = CodeParams::new(n, 1, 2, seed).map_err(err)?;
    let data = micro_data(&params, w, samples.max(1), BUDGET_MB, None).map_err(err)?;
    let bins = micro_histogram(&data).map_err(err)?.into_iter().map(|(a, b, d, m)| [a, b, d, m]).collect();
    let s = &data.summary;
    let top = 1.05 * s.x_plus;
    let curve = (0..=400)
        .map(|i| {
            let x = top * i as f64 / 400.0;
            [x, mp_density(s.c, x).unwrap_or(0.0)]
        })
        .collect();
    to_js(&MicroView { c: s.c, ks: s.ks, x_plus: s.x_plus, bins, curve })
}

#[derive(Serialize)]
struct BandView {
    w: usize,
    multiplicity: f64,
    mean_shift: f64,
    zeroth: f64,
}

#[derive(Serialize)]
struct BandsView {
    critical_weight: usize,
    bands: Vec<BandView>,
    reservoir_multiplicity: f64,
    reservoir_mean: f64,
}

/// Mean-shift and zeroth-order band means at one error rate.
#[wasm_bindgen]
pub fn band_model_json(p: f64, n: usize, k: usize, on_q: bool) -> Result<String, JsError> {
    let reg = if on_q { Register::Q } else { Register::RQ };
    let ms = mean_shift_bands(p, n, k, 2, reg).map_err(err)?;
    let z = zeroth_order_bands(p, n, k, 2, reg).map_err(err)?;
    let bands = ms
        .bands
        .iter()
        .map(|b| BandView {
            w: b.w,
            multiplicity: b.multiplicity,
            mean_shift: b.mean,
            zeroth: z.band(b.w).map_or(f64::NAN, |x| x.mean),
        })
        .collect();
    to_js(&BandsView {
        critical_weight: critical_weight(n, k, 2, reg).map_err(err)?,
        bands,
        reservoir_multiplicity: ms.reservoir.multiplicity,
        reservoir_mean: ms.reservoir.mean,
    })
}

#[derive(Serialize)]
struct ThresholdView {
    /// `(alpha, p_c)`; the last entry is alpha = infinity, sent as `null`.
    renyi: Vec<(Option<f64>, f64)>,
    /// `(w/N, p)` boundary of hard postselection.
    postselected: Vec<[f64; 2]>,
    /// `(p, I_c / N)` at leading order for the given N.
    coherent_info: Vec<[f64; 2]>,
}

/// Threshold versus alpha, the postselected phase boundary and the
/// leading-order coherent information, all at rate `k/N`.
#[wasm_bindgen]
pub fn thresholds_json(n: usize, k: usize) -> Result<String, JsError> {
    let r = k as f64 / n as f64;
    let mut renyi = Vec::new();
    for i in 0..=36 {
        let a = 1.0 + 0.25 * i as f64;
        renyi.push((Some(a), threshold_solve(ThresholdKind::Renyi(Alpha::Finite(a)), r, 2).map_err(err)?));
    }
    renyi.push((None, threshold_solve(ThresholdKind::Renyi(Alpha::Infinity), r, 2).map_err(err)?));
    let postselected = (0..=150)
        .filter_map(|i| {
            let f = 0.75 * i as f64 / 150.0;
            threshold_solve(ThresholdKind::Postselected(f), r, 2).ok().map(|p| [f, p])
        })
        .collect();
    let coherent_info = (0..=150)
        .map(|i| {
            let p = 0.75 * i as f64 / 150.0;
            Ok([p, coherent_info_leading(p, n, k, 2).map_err(err)? / n as f64])
        })
        .collect::<Result<_, JsError>>()?;
    to_js(&ThresholdView { renyi, postselected, coherent_info })
}

/// Marchenko-Pastur edges for the page's axis labels.
#[wasm_bindgen]
pub fn mp_edges_json(c: f64) -> Result<String, JsError> {
    to_js(&mp_edges(c).map_err(err)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exports_produce_json() {
        let m: serde_json::Value = serde_json::from_str(&micro_histogram_json(4, 1, 2, 1).unwrap()).unwrap();
        assert_eq!(m["bins"].as_array().unwrap().len(), 60);
        let b: serde_json::Value = serde_json::from_str(&band_model_json(0.1, 9, 1, true).unwrap()).unwrap();
        assert_eq!(b["critical_weight"], 2);
        let t: serde_json::Value = serde_json::from_str(&thresholds_json(11, 1).unwrap()).unwrap();
        assert!(t["renyi"][0][1].as_f64().unwrap() < t["renyi"][36][1].as_f64().unwrap());
        assert!(t["renyi"][37][0].is_null());
        let e: (f64, f64) = serde_json::from_str(&mp_edges_json(1.0).unwrap()).unwrap();
        assert_eq!(e, (0.0, 4.0));
    }
}
