//! Data sets behind the three figure families.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Workload};
use super::observables::{cache_key, collect_samples, hard_band_sample, sample_state, HardBandSample, SampleCache};
use super::stats::{scaling_collapse, Collapse};
use super::sweep::{fmt_sig, hashing_point, run_sweep, write_sample_csv, write_sweep_csv, MeanErr, SweepRecord};
use crate::ansatz::{
    band_model_cdf, critical_weight, ks_statistic, mean_shift_bands, mp_cdf, mp_density, mp_edges, renyi2_from_enumerators,
    renyi_entropy_leading, reweighted_vn_leading, threshold_solve, zeroth_order_bands, EnumeratorPair, ThresholdKind,
};
use crate::channels::{depolarize_dual_in_place, fixed_weight_spectrum, gamma_from_p};
use crate::code::{CodeParams, EncodedState};
use crate::density::Register;
use crate::error::{Error, Result};
use crate::pauli::omega_f64;
use crate::spectra::{self, Alpha};

pub const HIST_BINS: usize = 60;
/// Histogram range is `[0, HIST_RANGE * x_plus]`.
pub const HIST_RANGE: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Micro,
    Canonical,
    Postselect,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(Figure::Micro),
            "canonical" => Ok(Figure::Canonical),
            "postselect" => Ok(Figure::Postselect),
            other => Err(Error::Config(format!("unknown figure '{other}' (micro, canonical, postselect)"))),
        }
    }
}

/// Files written by one command plus a few headline numbers for the
/// manifest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FigureOutput {
    pub files: Vec<PathBuf>,
    pub extras: serde_json::Map<String, serde_json::Value>,
}

impl FigureOutput {
    fn extra(&mut self, key: impl Into<String>, v: impl Serialize) {
        self.extras.insert(key.into(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null));
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

pub fn emit_figure_data(figure: Figure, config: &ExperimentConfig) -> Result<FigureOutput> {
    std::fs::create_dir_all(&config.out)?;
    match figure {
        Figure::Micro => micro(config),
        Figure::Canonical => canonical(config),
        Figure::Postselect => postselect(config),
    }
}

// ---------------------------------------------------------------- micro

/// Pooled rescaled eigenvalues of the weight-`w` ensemble on Q.
#[derive(Debug, Clone, Serialize)]
pub struct MicroSummary {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub w: usize,
    pub c: f64,
    pub samples: usize,
    pub eigenvalues: usize,
    pub ks: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    pub mean: f64,
    pub variance: f64,
    pub mp_variance: f64,
}

pub struct MicroData {
    pub summary: MicroSummary,
    /// Rescaled nonzero eigenvalues, `lambda * rank`.
    pub values: Vec<f64>,
}

/// Rank and `c = dim / (q^k Omega(w))` of the weight-`w` band on Q.
pub fn micro_shape(params: &CodeParams, w: usize) -> Result<(usize, f64)> {
    let dim = params.dim_q() as f64;
    let m = params.dim_r() as f64 * omega_f64(params.n, w, params.q)?;
    Ok((dim.min(m) as usize, dim / m))
}

pub fn micro_data(params: &CodeParams, w: usize, samples: usize, budget_mb: usize, cache_dir: Option<&Path>) -> Result<MicroData> {
    let (rank, c) = micro_shape(params, w)?;
    let cache = SampleCache::open(cache_dir, &cache_key("micro", params, &format!("w{w}")))?;
    let rows = collect_samples(&cache, samples, rank, |i| {
        let psi = sample_state(params, i)?;
        let spec = fixed_weight_spectrum(&psi, w, Register::Q, budget_mb)?;
        Ok(spec.values()[..rank].to_vec())
    })?;
    let values: Vec<f64> = rows.iter().flatten().map(|l| l * rank as f64).collect();
    let (x_minus, x_plus) = mp_edges(c)?;
    let ks = ks_statistic(&values, |x| mp_cdf(c, x).unwrap_or(f64::NAN));
    let MeanErr { mean, .. } = MeanErr::of(&values);
    let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / values.len() as f64;
    let r = c.max(1.0 / c);
    Ok(MicroData {
        summary: MicroSummary {
            n: params.n,
            k: params.k,
            q: params.q,
            w,
            c,
            samples,
            eigenvalues: values.len(),
            ks,
            x_minus,
            x_plus,
            mean,
            variance,
            mp_variance: 1.0 / r,
        },
        values,
    })
}

/// `(lo, hi, empirical density, MP density at the bin center)`.
pub fn micro_histogram(data: &MicroData) -> Result<Vec<(f64, f64, f64, f64)>> {
    let s = &data.summary;
    let top = HIST_RANGE * s.x_plus;
    let width = top / HIST_BINS as f64;
    let mut counts = [0usize; HIST_BINS];
    for &x in &data.values {
        if (0.0..top).contains(&x) {
            counts[((x / width) as usize).min(HIST_BINS - 1)] += 1;
        }
    }
    let total = data.values.len() as f64;
    (0..HIST_BINS)
        .map(|b| {
            let lo = b as f64 * width;
            let mid = lo + 0.5 * width;
            Ok((lo, lo + width, counts[b] as f64 / (total * width), mp_density(s.c, mid)?))
        })
        .collect()
}

fn micro(config: &ExperimentConfig) -> Result<FigureOutput> {
    config.validate_for(Workload::QOnly)?;
    config.require_w_grid()?;
    let mut out = FigureOutput::default();
    let hist_path = config.out.join("micro_hist.csv");
    let sum_path = config.out.join("micro_summary.csv");
    let mut hist = create(&hist_path)?;
    let mut sum = create(&sum_path)?;
    writeln!(hist, "N,k,q,w,c,bin_lo,bin_hi,bin_center,density,mp_density")?;
    writeln!(sum, "N,k,q,w,c,samples,eigenvalues,ks,x_minus,x_plus,mean,variance,mp_variance")?;
    let mut summaries = Vec::new();
    for params in config.code_params() {
        for &w in config.w_grid.iter().filter(|&&w| w >= 1 && w <= params.n) {
            let data = micro_data(&params, w, config.samples, config.budget_mb, config.cache_dir.as_deref())?;
            let s = &data.summary;
            for (lo, hi, d, mp) in micro_histogram(&data)? {
                let f = [
                    s.n.to_string(),
                    s.k.to_string(),
                    s.q.to_string(),
                    s.w.to_string(),
                    fmt_sig(s.c),
                    fmt_sig(lo),
                    fmt_sig(hi),
                    fmt_sig(0.5 * (lo + hi)),
                    fmt_sig(d),
                    fmt_sig(mp),
                ];
                writeln!(hist, "{}", csv_line(&f))?;
            }
            let f = [
                s.n.to_string(),
                s.k.to_string(),
                s.q.to_string(),
                s.w.to_string(),
                fmt_sig(s.c),
                s.samples.to_string(),
                s.eigenvalues.to_string(),
                fmt_sig(s.ks),
                fmt_sig(s.x_minus),
                fmt_sig(s.x_plus),
                fmt_sig(s.mean),
                fmt_sig(s.variance),
                fmt_sig(s.mp_variance),
            ];
            writeln!(sum, "{}", csv_line(&f))?;
            summaries.push(data.summary);
        }
    }
    hist.flush()?;
    sum.flush()?;
    out.files.extend([hist_path, sum_path]);
    out.extra("micro", &summaries);
    Ok(out)
}

// ------------------------------------------------------------ canonical

/// Noisy code state on Q alone (the channel acts on Q only, so this equals
/// the Q marginal of the noisy RQ state).
pub fn noisy_q_spectrum(psi: &EncodedState, p: f64) -> Result<Vec<f64>> {
    let params = psi.params();
    let mut rho = psi.rho_q();
    let sites: Vec<usize> = (0..params.n).collect();
    depolarize_dual_in_place(&mut rho, gamma_from_p(p, params.q), &sites)?;
    Ok(spectra::spectrum(&rho)?.values().to_vec())
}

/// Empirical statistics of one band: the next `multiplicity` eigenvalues
/// in descending order.
#[derive(Debug, Clone, Serialize)]
pub struct BandStats {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub p: f64,
    /// Band weight; `None` for the reservoir above the last band.
    pub w: Option<usize>,
    pub multiplicity: usize,
    pub samples: usize,
    pub mean: MeanErr,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    pub mean_shift: f64,
    pub zeroth: f64,
    pub width: f64,
    /// KS distance of the pooled band eigenvalues to the shifted band law.
    pub ks: f64,
}

pub fn q_spectra(params: &CodeParams, p: f64, samples: usize, cache_dir: Option<&Path>) -> Result<Vec<Vec<f64>>> {
    let cache = SampleCache::open(cache_dir, &cache_key("qspec", params, &format!("p{p:?}")))?;
    collect_samples(&cache, samples, params.dim_q(), |i| noisy_q_spectrum(&sample_state(params, i)?, p))
}

fn percentile(sorted: &[f64], f: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = f * (sorted.len() - 1) as f64;
    let (i, t) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - t) + sorted[i + 1] * t
    } else {
        sorted[i]
    }
}

/// Slice descending spectra into mean-shift bands and compare each with its
/// model. Bands of zero weight are skipped.
pub fn band_statistics(params: &CodeParams, p: f64, spectra: &[Vec<f64>]) -> Result<Vec<BandStats>> {
    let (n, k, q) = (params.n, params.k, params.q);
    let model = mean_shift_bands(p, n, k, q, Register::Q)?;
    let zeroth = zeroth_order_bands(p, n, k, q, Register::Q)?;
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut slices: Vec<(Option<usize>, usize)> =
        model.bands.iter().map(|b| (Some(b.w), b.multiplicity.round() as usize)).collect();
    slices.push((None, model.reservoir.multiplicity.round() as usize));
    for (w, m) in slices {
        let end = (start + m).min(params.dim_q());
        let band = w.and_then(|w| model.band(w));
        if m == 0 || band.is_some_and(|b| b.weight_probability <= 0.0) || (w.is_none() && model.reservoir.mean <= 0.0) {
            start = end;
            continue;
        }
        let means: Vec<f64> = spectra.iter().map(|s| s[start..end].iter().sum::<f64>() / (end - start) as f64).collect();
        let mut pooled: Vec<f64> = spectra.iter().flat_map(|s| s[start..end].iter().copied()).collect();
        pooled.sort_by(f64::total_cmp);
        let (mean_shift, zeroth_mean, width, ks) = match band {
            Some(b) => (
                b.mean,
                zeroth.band(b.w).map_or(f64::NAN, |z| z.mean),
                b.width,
                ks_statistic(&pooled, |x| band_model_cdf(b, x).unwrap_or(f64::NAN)),
            ),
            None => (model.reservoir.mean, f64::NAN, f64::NAN, f64::NAN),
        };
        out.push(BandStats {
            n,
            k,
            q,
            p,
            w,
            multiplicity: end - start,
            samples: spectra.len(),
            mean: MeanErr::of(&means),
            p05: percentile(&pooled, 0.05),
            p50: percentile(&pooled, 0.5),
            p95: percentile(&pooled, 0.95),
            mean_shift,
            zeroth: zeroth_mean,
            width,
            ks,
        });
        start = end;
    }
    Ok(out)
}

pub const BANDS_HEADER: &str =
    "N,k,q,p,w,multiplicity,samples,emp_mean,emp_stderr,p05,p50,p95,mean_shift,zeroth,width,ks";

fn band_row(b: &BandStats) -> String {
    csv_line(&[
        b.n.to_string(),
        b.k.to_string(),
        b.q.to_string(),
        fmt_sig(b.p),
        b.w.map_or("reservoir".into(), |w| w.to_string()),
        b.multiplicity.to_string(),
        b.samples.to_string(),
        fmt_sig(b.mean.mean),
        fmt_sig(b.mean.stderr),
        fmt_sig(b.p05),
        fmt_sig(b.p50),
        fmt_sig(b.p95),
        fmt_sig(b.mean_shift),
        fmt_sig(b.zeroth),
        fmt_sig(b.width),
        fmt_sig(b.ks),
    ])
}

/// Collapse of `(N, p, value)` records for each exponent, written as
/// `nu,p_c,N,p,x,value` rows; `None` when fewer than three sizes exist.
fn write_collapses(path: &Path, records: &[(usize, f64, f64)], p_c: f64, nus: &[f64]) -> Result<Option<Vec<Collapse>>> {
    let mut all = Vec::new();
    for &nu in nus {
        match scaling_collapse(records, nu, p_c) {
            Ok(c) => all.push(c),
            Err(Error::Input(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    let mut f = create(path)?;
    writeln!(f, "nu,p_c,N,p,x,value")?;
    for c in &all {
        for r in &c.rows {
            writeln!(f, "{}", csv_line(&[fmt_sig(c.nu), fmt_sig(c.p_c), r.n.to_string(), fmt_sig(r.p), fmt_sig(r.x), fmt_sig(r.value)]))?;
        }
    }
    f.flush()?;
    Ok(Some(all))
}

fn collapse_scores(all: &[Collapse]) -> serde_json::Value {
    serde_json::Value::Object(
        all.iter().map(|c| (format!("nu={}", c.nu), serde_json::json!({"p_c": c.p_c, "score": c.score}))).collect(),
    )
}

fn write_sweep_outputs(config: &ExperimentConfig, stem: &str, out: &mut FigureOutput) -> Result<Vec<SweepRecord>> {
    let sweep = run_sweep(config)?;
    let path = config.out.join(format!("{stem}.csv"));
    write_sweep_csv(&sweep.records, &path)?;
    out.files.push(path);
    if config.dump_samples {
        let path = config.out.join(format!("{stem}_samples.csv"));
        write_sample_csv(&sweep.samples, &path)?;
        out.files.push(path);
    }
    Ok(sweep.records)
}

fn canonical(config: &ExperimentConfig) -> Result<FigureOutput> {
    config.validate()?;
    config.require_p_grid()?;
    let mut out = FigureOutput::default();
    let mut sweep_cfg = config.clone();
    sweep_cfg.alpha = vec![1.0];
    let records = write_sweep_outputs(&sweep_cfg, "canonical_sweep", &mut out)?;

    let bands_path = config.out.join("canonical_bands.csv");
    let mut f = create(&bands_path)?;
    writeln!(f, "{BANDS_HEADER}")?;
    for params in config.code_params() {
        for &p in &config.p_grid {
            let spectra = q_spectra(&params, p, config.samples, config.cache_dir.as_deref())?;
            for b in band_statistics(&params, p, &spectra)? {
                writeln!(f, "{}", band_row(&b))?;
            }
        }
    }
    f.flush()?;
    out.files.push(bands_path);

    let mut scores = serde_json::Map::new();
    for q in &config.q {
        for k in &config.k {
            let p_c = hashing_point(*q)?;
            let recs: Vec<(usize, f64, f64)> =
                records.iter().filter(|r| r.q == *q && r.k == *k).map(|r| (r.n, r.p, r.ic.mean)).collect();
            let path = config.out.join(format!("canonical_collapse_q{q}_k{k}.csv"));
            if let Some(all) = write_collapses(&path, &recs, p_c, &[1.0, 2.0])? {
                scores.insert(format!("q={q},k={k}"), collapse_scores(&all));
                out.files.push(path);
            }
        }
    }
    out.extra("collapse", scores);
    Ok(out)
}

// ----------------------------------------------------------- postselect

/// Alpha values of the threshold curve.
pub fn threshold_alphas() -> Vec<f64> {
    let mut a: Vec<f64> = (0..=36).map(|i| 1.0 + 0.25 * i as f64).collect();
    a.extend([15.0, 20.0, 50.0, 100.0, f64::INFINITY]);
    a
}

fn alpha_of(a: f64) -> Alpha {
    if a.is_infinite() {
        Alpha::Infinity
    } else {
        Alpha::Finite(a)
    }
}

/// Rates `k/N` covered by a config.
fn rates(config: &ExperimentConfig) -> Vec<f64> {
    let mut r: Vec<f64> = config.code_params().iter().map(|p| p.k as f64 / p.n as f64).collect();
    r.push(0.0);
    r.sort_by(f64::total_cmp);
    r.dedup();
    r
}

/// Threshold of the reweighted state versus alpha.
pub fn write_thresholds(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "q,k_over_n,alpha,p_c")?;
    for &q in &config.q {
        for r in rates(config) {
            for a in threshold_alphas() {
                let p = threshold_solve(ThresholdKind::Renyi(alpha_of(a)), r, q)?;
                writeln!(f, "{}", csv_line(&[q.to_string(), fmt_sig(r), fmt_sig(a), fmt_sig(p)]))?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

/// Postselected phase boundary `p(f)` over the weight fraction `f = w/N`;
/// fractions without a root in range are skipped.
pub fn write_phase_boundary(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "q,k_over_n,f,p")?;
    for &q in &config.q {
        for r in rates(config) {
            for i in 0..=200 {
                let frac = i as f64 / 200.0 * (1.0 - 1.0 / (q * q) as f64);
                if let Ok(p) = threshold_solve(ThresholdKind::Postselected(frac), r, q) {
                    writeln!(f, "{}", csv_line(&[q.to_string(), fmt_sig(r), fmt_sig(frac), fmt_sig(p)]))?;
                }
            }
        }
    }
    f.flush()?;
    Ok(())
}

/// Haar-averaged Renyi-2 curves at each configured size and the large-N
/// limits.
pub fn write_renyi_curves(config: &ExperimentConfig, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "N,k,q,p,s2q_haar,s2rq_haar,ic2_haar,s2q_limit,s2rq_limit,svn_reweighted_limit")?;
    for params in config.code_params() {
        let (n, k, q) = (params.n, params.k, params.q);
        let pair = EnumeratorPair::haar(n, k, q)?;
        let p_max = 1.0 - 1.0 / (q * q) as f64;
        for i in 0..=150 {
            let p = p_max * i as f64 / 150.0;
            let r2 = renyi2_from_enumerators(&pair, gamma_from_p(p, q).min(1.0))?;
            let (sq, srq) = renyi_entropy_leading(p, Alpha::Finite(2.0), n, k, q)?;
            let svn = reweighted_vn_leading(p, Alpha::Finite(2.0), n, k, q)?;
            writeln!(
                f,
                "{}",
                csv_line(&[
                    n.to_string(),
                    k.to_string(),
                    q.to_string(),
                    fmt_sig(p),
                    fmt_sig(r2.s2_q),
                    fmt_sig(r2.s2_rq),
                    fmt_sig(r2.ic2),
                    fmt_sig(sq),
                    fmt_sig(srq),
                    fmt_sig(svn),
                ])
            )?;
        }
    }
    f.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct HardBandRecord {
    pub n: usize,
    pub k: usize,
    pub q: usize,
    pub p: f64,
    pub w: usize,
    pub samples: usize,
    pub ic_post: MeanErr,
    pub ic: MeanErr,
    pub accept: MeanErr,
}

pub fn hard_band_records(config: &ExperimentConfig) -> Result<Vec<HardBandRecord>> {
    let mut out = Vec::new();
    for params in config.code_params() {
        let w_c = critical_weight(params.n, params.k, params.q, Register::Q)?;
        for &p in &config.p_grid {
            // a band exists only below the critical weight
            for &w in config.w_grid.iter().filter(|&&w| w < w_c) {
                let cache = SampleCache::open(config.cache_dir.as_deref(), &cache_key("hardband", &params, &format!("p{p:?}_w{w}")))?;
                let rows = collect_samples(&cache, config.samples, HardBandSample::FIELDS, |i| {
                    Ok(hard_band_sample(&sample_state(&params, i)?, p, w, config.budget_mb)?.to_vec())
                })?;
                let per: Vec<HardBandSample> = rows.iter().map(|r| HardBandSample::from_slice(r).expect("fixed width")).collect();
                let col = |g: fn(&HardBandSample) -> f64| per.iter().map(g).collect::<Vec<_>>();
                out.push(HardBandRecord {
                    n: params.n,
                    k: params.k,
                    q: params.q,
                    p,
                    w,
                    samples: config.samples,
                    ic_post: MeanErr::of(&col(|s| s.ic_post)),
                    ic: MeanErr::of(&col(|s| s.ic)),
                    accept: MeanErr::of(&col(|s| s.accept)),
                });
            }
        }
    }
    Ok(out)
}

fn postselect(config: &ExperimentConfig) -> Result<FigureOutput> {
    config.validate()?;
    config.require_p_grid()?;
    let mut out = FigureOutput::default();

    let path = config.out.join("thresholds_alpha.csv");
    write_thresholds(config, &path)?;
    out.files.push(path);
    let path = config.out.join("phase_boundary.csv");
    write_phase_boundary(config, &path)?;
    out.files.push(path);
    let path = config.out.join("renyi_curves.csv");
    write_renyi_curves(config, &path)?;
    out.files.push(path);

    let mut sweep_cfg = config.clone();
    if !sweep_cfg.alpha.contains(&2.0) {
        sweep_cfg.alpha.push(2.0);
    }
    let records = write_sweep_outputs(&sweep_cfg, "postselect_sweep", &mut out)?;

    let mut scores = serde_json::Map::new();
    for q in &config.q {
        for k in &config.k {
            let p_2 = threshold_solve(ThresholdKind::Renyi(Alpha::Finite(2.0)), 0.0, *q)?;
            let recs: Vec<(usize, f64, f64)> = records
                .iter()
                .filter(|r| r.q == *q && r.k == *k && r.alpha == 2.0)
                .map(|r| (r.n, r.p, r.ic.mean))
                .collect();
            let path = config.out.join(format!("postselect_collapse_q{q}_k{k}.csv"));
            if let Some(all) = write_collapses(&path, &recs, p_2, &[1.0, 2.0])? {
                scores.insert(format!("q={q},k={k}"), collapse_scores(&all));
                out.files.push(path);
            }
        }
    }
    out.extra("collapse", scores);

    if !config.w_grid.is_empty() {
        let hb = hard_band_records(config)?;
        let path = config.out.join("hard_band.csv");
        let mut f = create(&path)?;
        writeln!(f, "N,k,q,p,w,samples,ic_post_mean,ic_post_stderr,ic_mean,ic_stderr,accept_mean,accept_stderr")?;
        for r in &hb {
            let mut fields = vec![r.n.to_string(), r.k.to_string(), r.q.to_string(), fmt_sig(r.p), r.w.to_string(), r.samples.to_string()];
            for m in [r.ic_post, r.ic, r.accept] {
                fields.push(fmt_sig(m.mean));
                fields.push(fmt_sig(m.stderr));
            }
            writeln!(f, "{}", csv_line(&fields))?;
        }
        f.flush()?;
        out.files.push(path);
    }
    Ok(out)
}
