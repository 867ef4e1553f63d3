//! Named numerical experiments ("checks") with reproducible reports, plus
//! the subelliptic solver. Each check measures a family of quantities on a
//! declared configuration, compares them against stated tolerances, and
//! returns a [`CheckReport`] that serializes byte-identically for identical
//! `(name, config, seed)` inputs.

pub mod checks;
pub mod solve;

pub use solve::{solve_subelliptic, SolveReport, SubellipticOperator};

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The checks `run_check` knows how to dispatch, in canonical order.
pub const CHECK_NAMES: [&str; 11] = [
    "weyl",
    "kernel_decay",
    "hormander_small_R",
    "hormander_large_R",
    "l2_bound",
    "weak11",
    "atoms_h1",
    "bmo_linfty",
    "lp_lemma",
    "cz_properties",
    "smoothing_lemma",
];

/// Configuration echoed into every report. `cutoff` is the dual truncation,
/// `resolution` the Haar grid parameter, `seed` drives every random draw the
/// check makes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub cutoff: f64,
    pub resolution: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            cutoff: 16.0,
            resolution: 16,
            seed: 7,
        }
    }
}

impl CheckConfig {
    /// The tuned default configuration for a named check: the smallest
    /// setting at which its tolerances are comfortably met.
    pub fn recommended(name: &str) -> CheckConfig {
        let (cutoff, resolution) = match name {
            "weyl" => (32.0, 4),
            "kernel_decay" => (48.0, 4),
            "hormander_small_R" | "hormander_large_R" => (16.0, 24),
            "l2_bound" => (16.0, 8),
            "weak11" => (16.0, 32),
            "atoms_h1" | "bmo_linfty" | "lp_lemma" => (8.0, 32),
            "cz_properties" => (8.0, 16),
            "smoothing_lemma" => (32.0, 16),
            _ => return CheckConfig::default(),
        };
        CheckConfig {
            cutoff,
            resolution,
            seed: 7,
        }
    }
}

/// A measured quantity: a single named real or a named series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measured {
    Scalar(f64),
    Series(Vec<f64>),
}

/// Outcome of one check: config echo, named measurements, the tolerances
/// they were held to, and the verdict. `runtime` is informational only and
/// excluded from serialization so reports stay byte-identical across runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub cutoff: f64,
    pub resolution: usize,
    pub seed: u64,
    /// Descriptor of the test symbol, `null` for symbol-free checks.
    pub symbol: serde_json::Value,
    pub measured: BTreeMap<String, Measured>,
    pub tolerances: BTreeMap<String, f64>,
    pub pass: bool,
    #[serde(skip)]
    pub runtime: Duration,
}

impl CheckReport {
    pub fn new(name: &str, config: &CheckConfig, symbol: serde_json::Value) -> Self {
        CheckReport {
            name: name.to_string(),
            cutoff: config.cutoff,
            resolution: config.resolution,
            seed: config.seed,
            symbol,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            pass: false,
            runtime: Duration::ZERO,
        }
    }

    pub fn scalar(&mut self, key: &str, value: f64) -> &mut Self {
        self.measured
            .insert(key.to_string(), Measured::Scalar(value));
        self
    }

    pub fn series(&mut self, key: &str, values: Vec<f64>) -> &mut Self {
        self.measured
            .insert(key.to_string(), Measured::Series(values));
        self
    }

    pub fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn get_scalar(&self, key: &str) -> Option<f64> {
        match self.measured.get(key) {
            Some(Measured::Scalar(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn get_series(&self, key: &str) -> Option<&[f64]> {
        match self.measured.get(key) {
            Some(Measured::Series(v)) => Some(v),
            _ => None,
        }
    }

    /// Machine-readable form; deterministic for identical inputs.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Human-readable aligned table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        out.push_str(&format!(
            "check {name}  [{verdict}]\n  cutoff     {c}\n  resolution {r}\n  seed       {s}\n",
            name = self.name,
            c = self.cutoff,
            r = self.resolution,
            s = self.seed,
        ));
        if !self.symbol.is_null() {
            out.push_str(&format!("  symbol     {}\n", self.symbol));
        }
        let width = self
            .measured
            .keys()
            .chain(self.tolerances.keys())
            .map(|k| k.len())
            .max()
            .unwrap_or(0);
        if !self.tolerances.is_empty() {
            out.push_str("  tolerances:\n");
            for (k, v) in &self.tolerances {
                out.push_str(&format!("    {k:<width$}  {v}\n"));
            }
        }
        out.push_str("  measured:\n");
        for (k, v) in &self.measured {
            match v {
                Measured::Scalar(x) => out.push_str(&format!("    {k:<width$}  {x}\n")),
                Measured::Series(xs) => {
                    let joined: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                    out.push_str(&format!("    {k:<width$}  [{}]\n", joined.join(", ")));
                }
            }
        }
        out
    }

    /// Plottable form: one `key,index,value` row per scalar or series entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,key,index,value\n");
        for (k, v) in &self.measured {
            match v {
                Measured::Scalar(x) => {
                    out.push_str(&format!("{},{k},0,{x}\n", self.name));
                }
                Measured::Series(xs) => {
                    for (i, x) in xs.iter().enumerate() {
                        out.push_str(&format!("{},{k},{i},{x}\n", self.name));
                    }
                }
            }
        }
        out
    }
}

/// Runs one named check. Unknown names are usage errors; configurations the
/// check cannot honestly run at (grid too coarse for the requested cutoff)
/// are also usage errors, raised before any computation.
pub fn run_check(name: &str, config: &CheckConfig) -> Result<CheckReport> {
    let started = Instant::now();
    let mut report = match name {
        "weyl" => checks::weyl(config),
        "kernel_decay" => checks::kernel_decay(config),
        "hormander_small_R" => checks::hormander_small_r(config),
        "hormander_large_R" => checks::hormander_large_r(config),
        "l2_bound" => checks::l2_bound(config),
        "weak11" => checks::weak11(config),
        "atoms_h1" => checks::atoms_h1(config),
        "bmo_linfty" => checks::bmo_linfty(config),
        "lp_lemma" => checks::lp_lemma(config),
        "cz_properties" => checks::cz_properties(config),
        "smoothing_lemma" => checks::smoothing_lemma(config),
        other => Err(Error::usage(format!(
            "unknown check '{other}'; valid names: {}",
            CHECK_NAMES.join(", ")
        ))),
    }?;
    report.runtime = started.elapsed();
    Ok(report)
}
