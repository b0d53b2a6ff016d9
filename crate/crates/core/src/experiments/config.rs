use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::code::{CodeParams, DEFAULT_BUDGET_MB};
use crate::error::{Error, Result};

/// Largest N accepted without `big`.
pub const DESK_MAX_N: usize = 11;
/// Largest N accepted with `big`.
pub const BIG_MAX_N: usize = 13;
pub const DEFAULT_SAMPLES: usize = 100;

/// Largest dense register a command diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workload {
    QOnly,
    Rq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub q: Vec<usize>,
    pub p_grid: Vec<f64>,
    pub w_grid: Vec<usize>,
    pub alpha: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub budget_mb: usize,
    pub big: bool,
    /// Per-sample values next to the aggregated CSV.
    pub dump_samples: bool,
    /// Binary dump of every sampled encoded state.
    pub dump_states: bool,
    /// Resumable per-sample result cache.
    pub cache_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: vec![5],
            k: vec![1],
            q: vec![2],
            p_grid: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
            w_grid: vec![1, 2],
            alpha: vec![1.0],
            samples: DEFAULT_SAMPLES,
            seed: 1,
            out: PathBuf::from("out"),
            budget_mb: DEFAULT_BUDGET_MB,
            big: false,
            dump_samples: false,
            dump_states: false,
            cache_dir: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
    }

    /// Every `(N, k, q)` combination with `k <= N`.
    pub fn code_params(&self) -> Vec<CodeParams> {
        let mut out = Vec::new();
        for &q in &self.q {
            for &n in &self.n {
                for &k in &self.k {
                    if k <= n {
                        out.push(CodeParams { n, k, q, seed: self.seed });
                    }
                }
            }
        }
        out
    }

    /// Grid and range checks plus the budget for workloads that hold dense
    /// RQ matrices.
    pub fn validate(&self) -> Result<()> {
        self.validate_for(Workload::Rq)
    }

    /// Grid and range checks, then the dense-memory budget; nothing is
    /// computed before this passes.
    pub fn validate_for(&self, workload: Workload) -> Result<()> {
        if self.n.is_empty() || self.k.is_empty() || self.q.is_empty() {
            return Err(config_err("N, k and q lists must be nonempty"));
        }
        if self.samples == 0 {
            return Err(config_err("samples must be at least 1"));
        }
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(config_err("p grid values must lie in [0, 1]"));
        }
        if self.alpha.iter().any(|a| !(*a >= 1.0) || !a.is_finite()) {
            return Err(config_err("alpha values must be finite and >= 1"));
        }
        if self.budget_mb == 0 {
            return Err(config_err("budget must be positive"));
        }
        let max_n = if self.big { BIG_MAX_N } else { DESK_MAX_N };
        if let Some(&n) = self.n.iter().find(|&&n| n > max_n) {
            let hint = if self.big { "" } else { " (N = 12, 13 need --big)" };
            return Err(config_err(format!("N={n} exceeds the limit {max_n}{hint}")));
        }
        let params = self.code_params();
        if params.is_empty() {
            return Err(config_err("no (N, k) pair with k <= N"));
        }
        for p in &params {
            p.validate().map_err(|e| config_err(e.to_string()))?;
        }
        for p in &params {
            // Dense matrix plus the eigensolver's working copies.
            let d = match workload {
                Workload::Rq => p.dim_rq(),
                Workload::QOnly => p.dim_q(),
            } as u128;
            let need = d * d * 16 * 3;
            if need > (self.budget_mb as u128) << 20 {
                return Err(Error::Capacity(format!(
                    "N={} k={} q={} needs about {} MiB, budget is {} MiB",
                    p.n,
                    p.k,
                    p.q,
                    need >> 20,
                    self.budget_mb
                )));
            }
        }
        Ok(())
    }

    pub fn require_p_grid(&self) -> Result<()> {
        if self.p_grid.is_empty() {
            return Err(config_err("p grid must be nonempty"));
        }
        Ok(())
    }

    pub fn require_w_grid(&self) -> Result<()> {
        if self.w_grid.is_empty() {
            return Err(config_err("w grid must be nonempty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            ExperimentConfig { samples: 0, ..Default::default() },
            ExperimentConfig { n: vec![], ..Default::default() },
            ExperimentConfig { n: vec![13], ..Default::default() },
            ExperimentConfig { alpha: vec![0.5], ..Default::default() },
            ExperimentConfig { p_grid: vec![1.5], ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
        let big = ExperimentConfig { n: vec![13], big: true, ..Default::default() };
        big.validate_for(Workload::QOnly).unwrap();
        assert!(matches!(big.validate(), Err(Error::Capacity(_))));
        let tight = ExperimentConfig { n: vec![11], budget_mb: 64, ..Default::default() };
        assert!(matches!(tight.validate(), Err(Error::Capacity(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = ExperimentConfig { n: vec![5, 7], p_grid: vec![0.1], ..Default::default() };
        let text = serde_json::to_string(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
        let partial: ExperimentConfig = serde_json::from_str(r#"{"n":[9],"samples":3}"#).unwrap();
        assert_eq!(partial.n, vec![9]);
        assert_eq!(partial.k, vec![1]);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus":1}"#).is_err());
    }
}
