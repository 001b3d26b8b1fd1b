//! Report assembly and the exit-code contract.
//!
//! Every run writes `report.json` (experiment parameters, config hash,
//! results, failures) plus the command's CSV tables into the output
//! directory. Exit codes: 0 all invariants pass, 2 an invariant failed,
//! 3 a resolution or truncation diagnostic exceeded its budget.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;

/// Collected outcome of one subcommand.
pub struct Outcome {
    pub command: &'static str,
    pub experiment: serde_json::Value,
    pub results: serde_json::Value,
    pub invariant_failures: Vec<String>,
    pub diagnostics: Vec<String>,
    pub refinement_delta: Option<serde_json::Value>,
}

impl Outcome {
    pub fn new(command: &'static str, experiment: serde_json::Value) -> Self {
        Self {
            command,
            experiment,
            results: serde_json::Value::Null,
            invariant_failures: Vec::new(),
            diagnostics: Vec::new(),
            refinement_delta: None,
        }
    }

    /// Records a hard invariant: `what` must hold, measured value against
    /// the bound.
    pub fn check(&mut self, what: &str, value: f64, bound: f64) {
        if !(value <= bound) {
            self.invariant_failures
                .push(format!("{what}: {value:.6e} exceeds {bound:.1e}"));
        }
    }

    pub fn diagnostic(&mut self, what: impl Into<String>) {
        self.diagnostics.push(what.into());
    }

    pub fn exit_code(&self) -> i32 {
        if !self.invariant_failures.is_empty() {
            2
        } else if !self.diagnostics.is_empty() {
            3
        } else {
            0
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    config: &'a RunConfig,
    experiment: &'a serde_json::Value,
    config_hash: String,
    /// wall-clock seconds since the epoch; excluded from the hash
    timestamp: u64,
    results: &'a serde_json::Value,
    invariant_failures: &'a [String],
    diagnostics: &'a [String],
    refinement_delta: &'a Option<serde_json::Value>,
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn writer(&self, name: &str) -> anyhow::Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    /// Writes `report.json` and returns the process exit code.
    pub fn finish(&self, config: &RunConfig, outcome: &Outcome) -> anyhow::Result<i32> {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let report = Report {
            command: outcome.command,
            config,
            experiment: &outcome.experiment,
            config_hash: config.hash_with(&outcome.experiment),
            timestamp,
            results: &outcome.results,
            invariant_failures: &outcome.invariant_failures,
            diagnostics: &outcome.diagnostics,
            refinement_delta: &outcome.refinement_delta,
        };
        let mut w = self.writer("report.json")?;
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w)?;
        for failure in &outcome.invariant_failures {
            eprintln!("invariant failed: {failure}");
        }
        for diag in &outcome.diagnostics {
            eprintln!("diagnostic: {diag}");
        }
        Ok(outcome.exit_code())
    }
}
