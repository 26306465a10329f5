//! Experiment registry, configuration and reports.
//!
//! Each registered experiment checks one acceptance claim at desk scale and
//! produces a [`Report`]: per-check records, a machine CSV and the overall
//! verdict. Everything except the wall-clock is a function of the config.

mod experiments;
pub mod gen;
mod report;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{DpError, Result};
use crate::theories::TheoryId;

pub use report::{csv_path, emit, render};

/// Registered experiments in claim order.
pub const EXPERIMENTS: &[&str] = &[
    "sauer-audit",
    "dual-law",
    "oracle-brute",
    "ddlo-depth",
    "eqtree-depth",
    "round-trip",
    "alt-audit",
    "subadditivity",
    "density-fit",
    "switch-points",
    "determinism",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    /// Restricts experiments that cover several theories to one.
    pub theory: Option<TheoryId>,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub trials: usize,
    /// Depth parameter: blocks, witness depth or largest `k`.
    pub n: usize,
    pub max_depth: usize,
    /// Indiscernibility arity used when verifying patterns.
    pub arity: usize,
    /// Numeric tolerance for exact-value checks.
    pub tolerance: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Default configuration of a registered experiment.
    pub fn defaults(name: &str) -> Result<Self> {
        if !EXPERIMENTS.contains(&name) {
            return Err(DpError::domain(format!(
                "unknown experiment '{name}'; expected one of {}",
                EXPERIMENTS.join(", ")
            )));
        }
        let mut cfg = ExperimentConfig {
            name: name.to_string(),
            theory: None,
            sizes: vec![1],
            seed: 0,
            trials: 1,
            n: 1,
            max_depth: 1,
            arity: 3,
            tolerance: 1e-9,
            out: None,
        };
        match name {
            "sauer-audit" => cfg.trials = 500,
            "dual-law" => cfg.trials = 200,
            "oracle-brute" => cfg.trials = 1000,
            "ddlo-depth" => {
                cfg.n = 4;
                cfg.sizes = vec![5];
                cfg.max_depth = 3;
            }
            "eqtree-depth" => {
                cfg.n = 6;
                cfg.sizes = vec![4];
            }
            "round-trip" => cfg.n = 3,
            "alt-audit" => {
                cfg.trials = 1000;
                cfg.sizes = vec![8];
            }
            "subadditivity" => {
                cfg.trials = 500;
                cfg.n = 5;
                cfg.sizes = vec![4, 11];
                cfg.max_depth = 5;
            }
            "density-fit" => {
                cfg.sizes = (3..=9).map(|e| 1usize << e).collect();
                cfg.seed = 1;
            }
            "switch-points" => cfg.n = 4,
            _ => {}
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.name.as_str()) {
            return Err(DpError::domain(format!("unknown experiment '{}'", self.name)));
        }
        if self.trials == 0 || self.n == 0 || self.max_depth == 0 || self.arity == 0 {
            return Err(DpError::domain("trials, n, max_depth and arity must be positive"));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(DpError::domain("sizes must be a non-empty list of positive numbers"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(DpError::domain("tolerance must be positive"));
        }
        Ok(())
    }

    /// One-line echo used in reports; excludes the output path.
    pub fn echo(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        format!(
            "name={} theory={} sizes={} seed={} trials={} n={} max_depth={} arity={} tolerance={}",
            self.name,
            self.theory.map_or("all".to_string(), |t| t.to_string()),
            sizes.join(","),
            self.seed,
            self.trials,
            self.n,
            self.max_depth,
            self.arity,
            self.tolerance
        )
    }
}

/// One checked claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    /// Acceptance claim id, `C1` … `C11`.
    pub claim: String,
    /// Short statement of the claim being checked.
    pub anchor: String,
    pub label: String,
    pub pass: bool,
    pub measured: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    /// Machine-readable measurements; deterministic in the config.
    pub csv: String,
    pub elapsed: Duration,
}

impl Report {
    /// Conjunction of the per-check passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn verdict(&self) -> &'static str {
        if self.passed() {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Runs a registered experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = std::time::Instant::now();
    let (mut checks, csv) = experiments::run(config, &start)?;
    checks.sort_by_key(|c| claim_order(&c.claim));
    Ok(Report {
        config: config.clone(),
        checks,
        csv,
        elapsed: start.elapsed(),
    })
}

/// Re-runs the report's config and compares the CSV byte for byte.
pub fn rerun_matches(report: &Report) -> Result<bool> {
    Ok(run_experiment(&report.config)?.csv == report.csv)
}

fn claim_order(claim: &str) -> u32 {
    claim.trim_start_matches('C').parse().unwrap_or(u32::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_registry() {
        for name in EXPERIMENTS {
            let cfg = ExperimentConfig::defaults(name).unwrap();
            cfg.validate().unwrap();
        }
        assert!(ExperimentConfig::defaults("nope").is_err());
    }

    #[test]
    fn invalid_numbers_are_rejected() {
        let mut cfg = ExperimentConfig::defaults("dual-law").unwrap();
        cfg.trials = 0;
        assert!(matches!(run_experiment(&cfg), Err(DpError::InputDomain(_))));
    }

    #[test]
    fn small_runs_pass_and_repeat() {
        for name in ["sauer-audit", "dual-law", "oracle-brute", "switch-points"] {
            let mut cfg = ExperimentConfig::defaults(name).unwrap();
            cfg.trials = 20;
            let r = run_experiment(&cfg).unwrap();
            assert!(r.passed(), "{name}: {:?}", r.checks);
            assert!(rerun_matches(&r).unwrap());
        }
    }
}
