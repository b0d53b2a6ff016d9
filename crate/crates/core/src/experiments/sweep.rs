//! Monte-Carlo sweeps over depolarizing rates and fixed error weights.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::observables::{
    cache_key, canonical_sample, collect_samples, fixed_weight_sample, sample_state, CanonicalSample,
    FixedWeightSample, SampleCache,
};
use super::stats::mean_stderr;
use crate::ansatz::{coherent_info_leading, renyi2_from_enumerators, threshold_solve, EnumeratorPair, ThresholdKind};
use crate::channels::gamma_from_p;
use crate::code::CodeParams;
use crate::error::Result;
use crate::spectra::Alpha;

pub const SWEEP_HEADER: &str = "N,k,q,p,alpha,samples,ic_mean,ic_stderr,s1q_mean,s1q_stderr,s1rq_mean,s1rq_stderr,s2q_mean,s2q_stderr,accept_mean,accept_stderr,ic_ansatz,s2q_ansatz";

pub const FIXED_WEIGHT_HEADER: &str =
    "N,k,q,w,x,samples,ic_mean,ic_stderr,s1q_mean,s1q_stderr,s1rq_mean,s1rq_stderr,s2q_mean,s2q_stderr";

/// Hashing-bound error rate of zero-rate codes on qudits of dimension `q`.
pub fn hashing_point(q: usize) -> Result<f64> {
    threshold_solve(ThresholdKind::Renyi(Alpha::VON_NEUMANN), 0.0, q)
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanErr {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanErr {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(xs);
        Self { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub p: f64,
    pub alpha: f64,
    pub samples: usize,
    pub ic: MeanErr,
    pub s1q: MeanErr,
    pub s1rq: MeanErr,
    pub s2q: MeanErr,
    pub accept: MeanErr,
    /// Leading-order coherent information; NaN for `alpha > 1`, where no
    /// closed form is available.
    pub ic_ansatz: f64,
    /// Renyi-2 entropy from the Haar-averaged enumerator.
    pub s2q_ansatz: f64,
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        let mut f = vec![self.n.to_string(), self.k.to_string(), self.q.to_string(), fmt_sig(self.p), fmt_sig(self.alpha)];
        f.push(self.samples.to_string());
        for m in [self.ic, self.s1q, self.s1rq, self.s2q, self.accept] {
            f.push(fmt_sig(m.mean));
            f.push(fmt_sig(m.stderr));
        }
        f.push(fmt_sig(self.ic_ansatz));
        f.push(fmt_sig(self.s2q_ansatz));
        f.join(",")
    }
}

/// Per-sample rows kept for the optional dump.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub p: f64,
    pub alpha: f64,
    pub index: u64,
    pub values: CanonicalSample,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub samples: Vec<SampleRow>,
}

/// Ansatz columns; pure functions of the grid point.
pub fn sweep_ansatz(n: usize, k: usize, q: usize, p: f64, alpha: f64) -> Result<(f64, f64)> {
    let ic = if alpha == 1.0 { coherent_info_leading(p, n, k, q)? } else { f64::NAN };
    let pair = EnumeratorPair::haar(n, k, q)?;
    // only (1 - gamma)^2 enters, so gamma > 1 (p above 1 - 1/q^2) folds back
    let g = gamma_from_p(p, q);
    let s2 = renyi2_from_enumerators(&pair, if g > 1.0 { 2.0 - g } else { g })?.s2_q;
    Ok((ic, s2))
}

fn point_key(p: f64, alpha: f64) -> String {
    format!("p{p:?}_a{alpha:?}")
}

/// One grid point at a time: every sample for every alpha, then aggregate.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    config.validate()?;
    config.require_p_grid()?;
    let mut out = SweepOutput::default();
    for params in config.code_params() {
        if config.dump_states {
            dump_states(config, &params)?;
        }
        for &p in &config.p_grid {
            let caches = config
                .alpha
                .iter()
                .map(|&a| SampleCache::open(config.cache_dir.as_deref(), &cache_key("canonical", &params, &point_key(p, a))))
                .collect::<Result<Vec<_>>>()?;
            // Samples are computed jointly for all alphas; the per-alpha
            // caches are consulted first.
            let joint = SampleCache::disabled();
            let width = CanonicalSample::FIELDS * config.alpha.len();
            let rows = collect_samples(&joint, config.samples, width, |i| {
                let cached: Option<Vec<f64>> = caches
                    .iter()
                    .map(|c| c.get(i, CanonicalSample::FIELDS).map(<[f64]>::to_vec))
                    .collect::<Option<Vec<_>>>()
                    .map(|v| v.concat());
                if let Some(v) = cached {
                    return Ok(v);
                }
                let psi = sample_state(&params, i)?;
                let vals = canonical_sample(&psi, p, &config.alpha)?;
                for (c, v) in caches.iter().zip(&vals) {
                    c.put(i, &v.to_vec())?;
                }
                Ok(vals.iter().flat_map(CanonicalSample::to_vec).collect())
            })?;
            for (ai, &alpha) in config.alpha.iter().enumerate() {
                let per: Vec<CanonicalSample> = rows
                    .iter()
                    .map(|r| {
                        CanonicalSample::from_slice(&r[ai * CanonicalSample::FIELDS..(ai + 1) * CanonicalSample::FIELDS])
                            .expect("fixed width")
                    })
                    .collect();
                let col = |f: fn(&CanonicalSample) -> f64| per.iter().map(f).collect::<Vec<_>>();
                let (ic_ansatz, s2q_ansatz) = sweep_ansatz(params.n, params.k, params.q, p, alpha)?;
                out.records.push(SweepRecord {
                    n: params.n,
                    k: params.k,
                    q: params.q,
                    p,
                    alpha,
                    samples: config.samples,
                    ic: MeanErr::of(&col(|s| s.ic)),
                    s1q: MeanErr::of(&col(|s| s.s1q)),
                    s1rq: MeanErr::of(&col(|s| s.s1rq)),
                    s2q: MeanErr::of(&col(|s| s.s2q)),
                    accept: MeanErr::of(&col(|s| s.accept)),
                    ic_ansatz,
                    s2q_ansatz,
                });
                for (i, v) in per.into_iter().enumerate() {
                    out.samples.push(SampleRow { n: params.n, k: params.k, q: params.q, p, alpha, index: i as u64, values: v });
                }
            }
        }
    }
    Ok(out)
}

fn dump_states(config: &ExperimentConfig, params: &CodeParams) -> Result<()> {
    let dir = config.out.join("states");
    std::fs::create_dir_all(&dir)?;
    for i in 0..config.samples as u64 {
        let psi = sample_state(params, i)?;
        let name = format!("N{}_k{}_q{}_seed{}_{i}.bin", params.n, params.k, params.q, params.seed);
        psi.write_to(std::io::BufWriter::new(std::fs::File::create(dir.join(name))?))?;
    }
    Ok(())
}

pub fn write_sweep_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(f, "{}", r.csv_row())?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_sample_csv(rows: &[SampleRow], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "N,k,q,p,alpha,sample,ic,s1q,s1rq,s2q,accept")?;
    for r in rows {
        let v = r.values;
        writeln!(
            f,
            "{},{},{},{},{},{},{:?},{:?},{:?},{:?},{:?}",
            r.n,
            r.k,
            r.q,
            fmt_sig(r.p),
            fmt_sig(r.alpha),
            r.index,
            v.ic,
            v.s1q,
            v.s1rq,
            v.s2q,
            v.accept
        )?;
    }
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedWeightRecord {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub w: usize,
    /// `w - p_c N`
    pub x: f64,
    pub samples: usize,
    pub ic: MeanErr,
    pub s1q: MeanErr,
    pub s1rq: MeanErr,
    pub s2q: MeanErr,
}

impl FixedWeightRecord {
    pub fn csv_row(&self) -> String {
        let mut f = vec![self.n.to_string(), self.k.to_string(), self.q.to_string(), self.w.to_string(), fmt_sig(self.x)];
        f.push(self.samples.to_string());
        for m in [self.ic, self.s1q, self.s1rq, self.s2q] {
            f.push(fmt_sig(m.mean));
            f.push(fmt_sig(m.stderr));
        }
        f.join(",")
    }
}

/// Fixed-weight ensemble over `config.w_grid` (weights above `N` skipped).
pub fn run_fixed_weight_sweep(config: &ExperimentConfig) -> Result<Vec<FixedWeightRecord>> {
    config.validate()?;
    config.require_w_grid()?;
    let mut out = Vec::new();
    for params in config.code_params() {
        let p_c = hashing_point(params.q)?;
        for &w in config.w_grid.iter().filter(|&&w| w <= params.n) {
            let cache = SampleCache::open(config.cache_dir.as_deref(), &cache_key("fixed", &params, &format!("w{w}")))?;
            let rows = collect_samples(&cache, config.samples, FixedWeightSample::FIELDS, |i| {
                let psi = sample_state(&params, i)?;
                Ok(fixed_weight_sample(&psi, w, config.budget_mb)?.to_vec())
            })?;
            let per: Vec<FixedWeightSample> =
                rows.iter().map(|r| FixedWeightSample::from_slice(r).expect("fixed width")).collect();
            let col = |f: fn(&FixedWeightSample) -> f64| per.iter().map(f).collect::<Vec<_>>();
            out.push(FixedWeightRecord {
                n: params.n,
                k: params.k,
                q: params.q,
                w,
                x: w as f64 - p_c * params.n as f64,
                samples: config.samples,
                ic: MeanErr::of(&col(|s| s.ic)),
                s1q: MeanErr::of(&col(|s| s.s1q)),
                s1rq: MeanErr::of(&col(|s| s.s1rq)),
                s2q: MeanErr::of(&col(|s| s.s2q)),
            });
        }
    }
    Ok(out)
}

pub fn write_fixed_weight_csv(records: &[FixedWeightRecord], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{FIXED_WEIGHT_HEADER}")?;
    for r in records {
        writeln!(f, "{}", r.csv_row())?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_format() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e-7), "1e-07");
        assert_eq!(fmt_sig(2.5e15), "2.5e+15");
        assert_eq!(fmt_sig(f64::NAN), "nan");
        assert_eq!(fmt_sig(0.99999999999999), "1");
    }

    #[test]
    fn aggregates_recompute_from_the_sample_dump() {
        let config = ExperimentConfig {
            n: vec![4],
            p_grid: vec![0.1, 0.3],
            alpha: vec![1.0, 3.0],
            samples: 5,
            ..Default::default()
        };
        let out = run_sweep(&config).unwrap();
        assert_eq!(out.records.len(), 4);
        for r in &out.records {
            let ic: Vec<f64> =
                out.samples.iter().filter(|s| s.p == r.p && s.alpha == r.alpha).map(|s| s.values.ic).collect();
            assert_eq!(ic.len(), 5);
            let (m, e) = mean_stderr(&ic);
            assert!((m - r.ic.mean).abs() < 1e-12 && (e - r.ic.stderr).abs() < 1e-12);
            let sd = (ic.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 4.0).sqrt();
            assert!((r.ic.stderr - sd / 5f64.sqrt()).abs() < 1e-12);
        }
    }
}
