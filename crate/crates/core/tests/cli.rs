use std::path::Path;
use std::process::{Command, Output};

fn haarcode(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarcode"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn sweep_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--n", "5", "--samples", "1", "--p-grid", "0.1", "--seed", "42"];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(haarcode(&args, &a).status.success());
    assert!(haarcode(&args, &b).status.success());
    let ca = std::fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(ca, std::fs::read(b.join("sweep.csv")).unwrap());
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("N,k,q,p,alpha,samples,ic_mean,ic_stderr,s1q_mean,s1q_stderr,s1rq_mean,s1rq_stderr,s2q_mean,s2q_stderr,accept_mean,accept_stderr,ic_ansatz,s2q_ansatz\n"));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["config"]["n"][0], 5);
}

#[test]
fn noiseless_codes_keep_the_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarcode(&["sweep", "--n", "5", "--k", "1", "--p-grid", "0", "--samples", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let ic: f64 = column(&csv, "ic_mean")[0].parse().unwrap();
    assert!((ic - 1.0).abs() < 1e-10);
    assert!(column(&csv, "ic_stderr")[0].parse::<f64>().unwrap().abs() < 1e-10);
}

// At N=7 the finite-size deficit keeps I_c near -0.83 at p=0.4; a direct
// dense numpy evaluation of the same channel gives -0.830. Full depolarization
// (p=3/4) reaches -1 exactly.
#[test]
fn deep_noise_destroys_the_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarcode(&["sweep", "--n", "7", "--p-grid", "0.4,0.75", "--samples", "50"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let ic: Vec<f64> = column(&csv, "ic_mean").iter().map(|s| s.parse().unwrap()).collect();
    assert!((ic[0] + 0.830).abs() < 0.05, "{}", ic[0]);
    assert!((ic[1] + 1.0).abs() < 1e-9, "{}", ic[1]);
}

#[test]
fn config_errors_exit_2_and_capacity_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| haarcode(args, dir.path()).status.code();
    assert_eq!(code(&["sweep", "--samples", "0"]), Some(2));
    assert_eq!(code(&["sweep", "--n", "12"]), Some(2));
    assert_eq!(code(&["sweep", "--p-grid", "1.5"]), Some(2));
    assert_eq!(code(&["figure", "bands"]), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": [5], "typo": 1}"#).unwrap();
    assert_eq!(code(&["sweep", "--config", bad.to_str().unwrap()]), Some(2));
    assert_eq!(code(&["sweep", "--n", "11", "--budget-mb", "64"]), Some(3));
    assert_eq!(code(&["sweep", "--n", "13", "--big"]), Some(3));
}

#[test]
fn json_config_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": [4], "p_grid": [0.1, 0.2], "samples": 2, "alpha": [1.0, 2.0]}"#).unwrap();
    let o = haarcode(&["sweep", "--config", cfg.to_str().unwrap(), "--samples", "1", "--dump-samples"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(column(&csv, "samples"), vec!["1"; 4]);
    assert_eq!(column(&csv, "alpha"), vec!["1", "2", "1", "2"]);
    assert_eq!(column(&csv, "ic_ansatz")[1], "nan");
    let dump = std::fs::read_to_string(dir.path().join("sweep_samples.csv")).unwrap();
    assert_eq!(dump.lines().count(), 5);
}

#[test]
fn state_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarcode(&["sweep", "--n", "3", "--p-grid", "0.1", "--samples", "2", "--dump-states"], dir.path());
    assert!(o.status.success());
    let f = dir.path().join("states").join("N3_k1_q2_seed1_1.bin");
    let psi = haarcode::code::EncodedState::read_from(std::fs::File::open(f).unwrap()).unwrap();
    let fresh = haarcode::code::encode_sample(psi.params(), 1).unwrap();
    assert_eq!(psi.amplitudes(), fresh.amplitudes());
}

#[test]
fn selftest_writes_every_figure_family() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarcode(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 9);
    assert!(!stdout.contains("FAIL"));
    for f in [
        "selftest.csv",
        "manifest.json",
        "micro/micro_hist.csv",
        "micro/micro_summary.csv",
        "canonical/canonical_sweep.csv",
        "canonical/canonical_bands.csv",
        "postselect/thresholds_alpha.csv",
        "postselect/phase_boundary.csv",
        "postselect/renyi_curves.csv",
        "postselect/postselect_sweep.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let hist = std::fs::read_to_string(dir.path().join("micro/micro_hist.csv")).unwrap();
    assert_eq!(hist.lines().count() - 1, 60 * column(&hist, "w").iter().collect::<std::collections::BTreeSet<_>>().len() * 3);
}

#[test]
fn canonical_bands_at_zero_noise_are_a_single_band() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarcode(&["figure", "canonical", "--n", "5", "--p-grid", "0", "--samples", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("canonical_bands.csv")).unwrap();
    assert_eq!(column(&csv, "w"), vec!["0"]);
    assert_eq!(column(&csv, "emp_mean"), vec!["0.5"]);
}

#[test]
fn ansatz_needs_no_sampling_and_reaches_n13() {
    let dir = tempfile::tempdir().unwrap();
    let o = haarcode(&["ansatz", "--n", "13", "--big", "--p-grid", "0.1,0.19,0.3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ansatz.csv")).unwrap();
    assert_eq!(column(&csv, "wc_q"), vec!["3"; 3]);
    assert_eq!(column(&csv, "wc_rq"), vec!["4"; 3]);
    let boundary = std::fs::read_to_string(dir.path().join("phase_boundary.csv")).unwrap();
    let f0: Vec<f64> = column(&boundary, "p").iter().map(|s| s.parse().unwrap()).collect();
    assert!(!f0.is_empty());
}
