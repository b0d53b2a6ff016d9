use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use haarcode::ansatz::{
    coherent_info_leading, critical_weight, mean_shift_bands, renyi2_from_enumerators, threshold_solve, EnumeratorPair,
    ThresholdKind,
};
use haarcode::channels::gamma_from_p;
use haarcode::density::Register;
use haarcode::error::{Error, Result};
use haarcode::experiments::config::{ExperimentConfig, Workload};
use haarcode::experiments::figures::{emit_figure_data, write_phase_boundary, write_thresholds, Figure};
use haarcode::experiments::manifest::RunManifest;
use haarcode::experiments::selftest::run_selftest;
use haarcode::experiments::sweep::{
    fmt_sig, run_fixed_weight_sweep, run_sweep, write_fixed_weight_csv, write_sample_csv, write_sweep_csv,
};
use haarcode::spectra::Alpha;

#[derive(Parser)]
#[command(name = "haarcode", version, about = "Haar-random quantum codes under Pauli noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over the p grid (or the w grid with --fixed-weight).
    Sweep {
        #[command(flatten)]
        opts: Opts,
        /// Fixed-weight ensemble over --w-grid instead of depolarizing noise.
        #[arg(long)]
        fixed_weight: bool,
    },
    /// Data for one figure family: micro, canonical or postselect.
    Figure {
        figure: String,
        #[command(flatten)]
        opts: Opts,
    },
    /// Closed-form predictions only, no sampling.
    Ansatz {
        #[command(flatten)]
        opts: Opts,
    },
    /// Exact-identity checks plus small data sets for every figure family.
    Selftest {
        #[command(flatten)]
        opts: Opts,
    },
}

/// Flags override the JSON config, which overrides the defaults.
#[derive(Args, Clone)]
struct Opts {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    w_grid: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget_mb: Option<usize>,
    /// Allow N = 12 and 13.
    #[arg(long)]
    big: bool,
    /// Resumable per-sample cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Also write per-sample values.
    #[arg(long)]
    dump_samples: bool,
    /// Also write every sampled state as a binary file.
    #[arg(long)]
    dump_states: bool,
}

impl Opts {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        set!(n, k, q, p_grid, w_grid, alpha, samples, seed, out, budget_mb);
        if self.cache_dir.is_some() {
            c.cache_dir = self.cache_dir.clone();
        }
        c.big |= self.big;
        c.dump_samples |= self.dump_samples;
        c.dump_states |= self.dump_states;
        Ok(c)
    }
}

fn finish(mut manifest: RunManifest, start: Instant, config: &ExperimentConfig) -> Result<()> {
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    let path = config.out.join("manifest.json");
    manifest.outputs.push(path.clone());
    manifest.write(&path)?;
    for f in &manifest.outputs {
        println!("{}", f.display());
    }
    Ok(())
}

fn sweep(opts: &Opts, fixed_weight: bool) -> Result<()> {
    let start = Instant::now();
    let config = opts.resolve()?;
    config.validate()?;
    std::fs::create_dir_all(&config.out)?;
    let mut manifest = RunManifest::new(if fixed_weight { "sweep --fixed-weight" } else { "sweep" }, &config);
    if fixed_weight {
        let records = run_fixed_weight_sweep(&config)?;
        let path = config.out.join("fixed_weight.csv");
        write_fixed_weight_csv(&records, &path)?;
        manifest.outputs.push(path);
    } else {
        let out = run_sweep(&config)?;
        let path = config.out.join("sweep.csv");
        write_sweep_csv(&out.records, &path)?;
        manifest.outputs.push(path);
        if config.dump_samples {
            let path = config.out.join("sweep_samples.csv");
            write_sample_csv(&out.samples, &path)?;
            manifest.outputs.push(path);
        }
    }
    if config.dump_states {
        manifest.outputs.push(config.out.join("states"));
    }
    finish(manifest, start, &config)
}

fn figure(name: &str, opts: &Opts) -> Result<()> {
    let start = Instant::now();
    let figure: Figure = name.parse()?;
    let config = opts.resolve()?;
    let out = emit_figure_data(figure, &config)?;
    let mut manifest = RunManifest::new(format!("figure {name}"), &config);
    manifest.outputs = out.files;
    manifest.extras = out.extras;
    finish(manifest, start, &config)
}

/// Per-point closed forms: leading I_c, Renyi-2 from the Haar enumerators,
/// critical weights, plus the threshold and phase-boundary tables.
fn ansatz(opts: &Opts) -> Result<()> {
    use std::io::Write;
    let start = Instant::now();
    let config = opts.resolve()?;
    config.validate_for(Workload::QOnly)?;
    config.require_p_grid()?;
    std::fs::create_dir_all(&config.out)?;
    let mut manifest = RunManifest::new("ansatz", &config);
    let path = config.out.join("ansatz.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "N,k,q,p,ic_leading,s2q_haar,s2rq_haar,ic2_haar,wc_q,wc_rq,band0_mean_q,p_hash")?;
    for params in config.code_params() {
        let (n, k, q) = (params.n, params.k, params.q);
        let pair = EnumeratorPair::haar(n, k, q)?;
        let p_hash = threshold_solve(ThresholdKind::Renyi(Alpha::VON_NEUMANN), k as f64 / n as f64, q)?;
        let wc_q = critical_weight(n, k, q, Register::Q)?;
        let wc_rq = critical_weight(n, k, q, Register::RQ)?;
        for &p in &config.p_grid {
            let g = gamma_from_p(p, q);
            let r2 = renyi2_from_enumerators(&pair, if g > 1.0 { 2.0 - g } else { g })?;
            let bands = mean_shift_bands(p, n, k, q, Register::Q)?;
            let row = [
                n.to_string(),
                k.to_string(),
                q.to_string(),
                fmt_sig(p),
                fmt_sig(coherent_info_leading(p, n, k, q)?),
                fmt_sig(r2.s2_q),
                fmt_sig(r2.s2_rq),
                fmt_sig(r2.ic2),
                wc_q.to_string(),
                wc_rq.to_string(),
                fmt_sig(bands.band(0).map_or(f64::NAN, |b| b.mean)),
                fmt_sig(p_hash),
            ];
            writeln!(f, "{}", row.join(","))?;
        }
    }
    f.flush()?;
    manifest.outputs.push(path);
    let path = config.out.join("thresholds_alpha.csv");
    write_thresholds(&config, &path)?;
    manifest.outputs.push(path);
    let path = config.out.join("phase_boundary.csv");
    write_phase_boundary(&config, &path)?;
    manifest.outputs.push(path);
    finish(manifest, start, &config)
}

/// Identity checks, then small data sets for every figure family under
/// `out/{micro,canonical,postselect}`.
fn selftest(opts: &Opts) -> Result<bool> {
    use std::io::Write;
    let start = Instant::now();
    let mut base = opts.resolve()?;
    if opts.n.is_none() && opts.config.is_none() {
        base.n = vec![4, 5, 6];
    }
    if opts.samples.is_none() && opts.config.is_none() {
        base.samples = 4;
    }
    std::fs::create_dir_all(&base.out)?;
    let checks = run_selftest(base.seed)?;
    let path = base.out.join("selftest.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(f, "check,value,tol,pass")?;
    for c in &checks {
        println!("{} {}: {:.3e} (tol {:.0e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.tol);
        writeln!(f, "{},{},{},{}", c.name, fmt_sig(c.value), fmt_sig(c.tol), c.pass)?;
    }
    f.flush()?;
    let mut manifest = RunManifest::new("selftest", &base);
    manifest.outputs.push(path);
    for figure in [Figure::Micro, Figure::Canonical, Figure::Postselect] {
        let mut c = base.clone();
        let name = serde_json::to_value(figure)?.as_str().unwrap_or_default().to_string();
        c.out = base.out.join(&name);
        let out = emit_figure_data(figure, &c)?;
        manifest.outputs.extend(out.files);
        manifest.extras.insert(name, serde_json::Value::Object(out.extras));
    }
    let ok = checks.iter().all(|c| c.pass);
    manifest.extras.insert("checks".into(), serde_json::to_value(&checks)?);
    finish(manifest, start, &base)?;
    Ok(ok)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Capacity(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { opts, fixed_weight } => sweep(opts, *fixed_weight).map(|_| true),
        Command::Figure { figure: name, opts } => figure(name, opts).map(|_| true),
        Command::Ansatz { opts } => ansatz(opts).map(|_| true),
        Command::Selftest { opts } => selftest(opts),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
