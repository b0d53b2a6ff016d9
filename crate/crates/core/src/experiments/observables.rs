//! Per-sample observables and the resumable on-disk sample cache.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::channels::{depolarize_dual_in_place, fixed_weight_spectrum, gamma_from_p};
use crate::code::{encode_sample, CodeParams, EncodedState};
use crate::density::{DensityMatrix, Register};
use crate::error::{Error, Result};
use crate::postselect::{hard_band_postselect, postselected_coherent_info, soft_reweight_from_eigen};
use crate::spectra::{self, band_projectors, entropy, Alpha, Spectrum};

/// Observables of one sample at one `(p, alpha)` point. For `alpha > 1` the
/// von Neumann quantities refer to the reweighted states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalSample {
    pub ic: f64,
    pub s1q: f64,
    pub s1rq: f64,
    /// Renyi-2 entropy of the unreweighted `rho_Q`.
    pub s2q: f64,
    /// `Tr rho_Q^alpha`.
    pub accept: f64,
}

impl CanonicalSample {
    pub const FIELDS: usize = 5;

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.ic, self.s1q, self.s1rq, self.s2q, self.accept]
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        (v.len() == Self::FIELDS).then(|| Self { ic: v[0], s1q: v[1], s1rq: v[2], s2q: v[3], accept: v[4] })
    }
}

/// Noisy RQ state and its Q marginal at depolarizing rate `p`.
pub fn noisy_states(psi: &EncodedState, p: f64) -> Result<(DensityMatrix, DensityMatrix)> {
    let params = psi.params();
    let mut rq = psi.rho_rq();
    depolarize_dual_in_place(&mut rq, gamma_from_p(p, params.q), &params.q_sites())?;
    let q = rq.reduce(&params.q_sites(), Register::Q)?;
    Ok((rq, q))
}

/// Observables for every `alpha` in `alphas` (all `>= 1`) on one code.
pub fn canonical_sample(psi: &EncodedState, p: f64, alphas: &[f64]) -> Result<Vec<CanonicalSample>> {
    let qf = psi.params().q as f64;
    let (rq, q) = noisy_states(psi, p)?;
    let need_vectors = alphas.iter().any(|&a| a != 1.0);
    let (vals, vecs) = if need_vectors {
        let (v, u) = spectra::hermitian_eigen(q.matrix())?;
        (v, Some(u))
    } else {
        (spectra::hermitian_eigenvalues(q.matrix())?, None)
    };
    let spec_q = Spectrum::from_eigenvalues(vals.clone(), q.dim())?;
    let s2q = entropy(&spec_q, Alpha::Finite(2.0), qf)?;
    let mut plain: Option<CanonicalSample> = None;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if alpha == 1.0 {
            if plain.is_none() {
                let s1q = entropy(&spec_q, Alpha::VON_NEUMANN, qf)?;
                let s1rq = entropy(&spectra::spectrum(&rq)?, Alpha::VON_NEUMANN, qf)?;
                plain = Some(CanonicalSample { ic: s1q - s1rq, s1q, s1rq, s2q, accept: 1.0 });
            }
            out.push(plain.expect("set above"));
            continue;
        }
        let vecs = vecs.as_ref().expect("eigenvectors computed when alpha > 1");
        let (sq, srq) = soft_reweight_from_eigen(&q, vals.clone(), vecs, Some(&rq), alpha)?;
        let srq = srq.expect("RQ state supplied");
        let s1q = entropy(&spectra::spectrum(&sq.sigma)?, Alpha::VON_NEUMANN, qf)?;
        let s1rq = entropy(&spectra::spectrum(&srq.sigma)?, Alpha::VON_NEUMANN, qf)?;
        out.push(CanonicalSample { ic: s1q - s1rq, s1q, s1rq, s2q, accept: sq.acceptance });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedWeightSample {
    pub ic: f64,
    pub s1q: f64,
    pub s1rq: f64,
    pub s2q: f64,
}

impl FixedWeightSample {
    pub const FIELDS: usize = 4;

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.ic, self.s1q, self.s1rq, self.s2q]
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        (v.len() == Self::FIELDS).then(|| Self { ic: v[0], s1q: v[1], s1rq: v[2], s2q: v[3] })
    }
}

pub fn fixed_weight_sample(psi: &EncodedState, w: usize, budget_mb: usize) -> Result<FixedWeightSample> {
    let qf = psi.params().q as f64;
    let sq = fixed_weight_spectrum(psi, w, Register::Q, budget_mb)?;
    let srq = fixed_weight_spectrum(psi, w, Register::RQ, budget_mb)?;
    let s1q = entropy(&sq, Alpha::VON_NEUMANN, qf)?;
    let s1rq = entropy(&srq, Alpha::VON_NEUMANN, qf)?;
    Ok(FixedWeightSample { ic: s1q - s1rq, s1q, s1rq, s2q: entropy(&sq, Alpha::Finite(2.0), qf)? })
}

/// Hard projection onto the weight-`w` band of Q (lifted to RQ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardBandSample {
    pub ic_post: f64,
    pub ic: f64,
    pub accept: f64,
}

impl HardBandSample {
    pub const FIELDS: usize = 3;

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.ic_post, self.ic, self.accept]
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        (v.len() == Self::FIELDS).then(|| Self { ic_post: v[0], ic: v[1], accept: v[2] })
    }
}

pub fn hard_band_sample(psi: &EncodedState, p: f64, w: usize, budget_mb: usize) -> Result<HardBandSample> {
    let qf = psi.params().q as f64;
    let (rq, q) = noisy_states(psi, p)?;
    let ic = spectra::coherent_information(
        &spectra::spectrum(&q)?,
        &spectra::spectrum(&rq)?,
        Alpha::VON_NEUMANN,
        qf,
    )?;
    let bands = band_projectors(psi, w, Register::Q, budget_mb)?;
    let sq = hard_band_postselect(&q, &bands, w)?;
    let srq = hard_band_postselect(&rq, &bands, w)?;
    Ok(HardBandSample { ic_post: postselected_coherent_info(&sq, &srq, qf)?, ic, accept: sq.acceptance })
}

/// Append-only text cache of per-sample value vectors, one file per grid
/// point. Values are written in shortest round-trip form, so a cached run is
/// bit-identical to a fresh one.
pub struct SampleCache {
    path: Option<PathBuf>,
    entries: HashMap<u64, Vec<f64>>,
    writer: Option<Mutex<File>>,
}

impl SampleCache {
    pub fn disabled() -> Self {
        Self { path: None, entries: HashMap::new(), writer: None }
    }

    pub fn open(dir: Option<&Path>, key: &str) -> Result<Self> {
        let Some(dir) = dir else {
            return Ok(Self::disabled());
        };
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{key}.txt"));
        let mut entries = HashMap::new();
        if path.exists() {
            for line in BufReader::new(File::open(&path)?).lines() {
                let line = line?;
                let mut it = line.split_whitespace();
                let Some(Ok(idx)) = it.next().map(str::parse::<u64>) else { continue };
                let vals: std::result::Result<Vec<f64>, _> = it.map(str::parse::<f64>).collect();
                // a torn last line from an interrupted run is skipped
                if let Ok(v) = vals {
                    entries.insert(idx, v);
                }
            }
        }
        let writer = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self { path: Some(path), entries, writer: Some(Mutex::new(writer)) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, index: u64, len: usize) -> Option<&[f64]> {
        self.entries.get(&index).map(Vec::as_slice).filter(|v| v.len() == len)
    }

    pub fn put(&self, index: u64, values: &[f64]) -> Result<()> {
        if let Some(w) = &self.writer {
            let mut line = index.to_string();
            for v in values {
                line.push(' ');
                line.push_str(&format!("{v:?}"));
            }
            line.push('\n');
            let mut f = w.lock().map_err(|_| Error::Input("cache lock poisoned".into()))?;
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        Ok(())
    }
}

/// Cache file stem for one grid point.
pub fn cache_key(kind: &str, params: &CodeParams, point: &str) -> String {
    format!("{kind}_N{}_k{}_q{}_seed{}_{point}", params.n, params.k, params.q, params.seed)
}

/// Values for samples `0..samples`, reading the cache first and computing
/// (in parallel when enabled) whatever is missing.
pub fn collect_samples<F>(cache: &SampleCache, samples: usize, len: usize, compute: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(u64) -> Result<Vec<f64>> + Sync + Send,
{
    let run = |i: u64| -> Result<Vec<f64>> {
        if let Some(v) = cache.get(i, len) {
            return Ok(v.to_vec());
        }
        let v = compute(i)?;
        cache.put(i, &v)?;
        Ok(v)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..samples as u64).into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..samples as u64).map(run).collect()
    }
}

/// Encoded state for `index`, shared by every grid point.
pub fn sample_state(params: &CodeParams, index: u64) -> Result<EncodedState> {
    encode_sample(params, index)
}
