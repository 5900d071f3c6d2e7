//! Scenario layer: declarative configs, the execution pipeline, run
//! manifests with content hashes, and golden-file regression.

pub mod config;
pub mod engine;
pub mod golden;

pub use config::{Modulation, Readout, ScenarioConfig, ScenarioKind, Squeezer, SqueezerPath};
pub use engine::{execute, measured_noise_variance, squeezer_efficiency, RunOutput, RunResult};
pub use golden::diff_golden;

use crate::error::{Error, Result};
use crate::trace::fmt_float;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Built-in scenario catalog, embedded in the library.
pub const BUILTIN_SCENARIOS: &[(&str, &str)] = &[
    ("fig5_scan", include_str!("../../scenarios/fig5_scan.toml")),
    ("fig6_squeezing", include_str!("../../scenarios/fig6_squeezing.toml")),
    ("fig7_modulation", include_str!("../../scenarios/fig7_modulation.toml")),
    ("fig8_ramp", include_str!("../../scenarios/fig8_ramp.toml")),
    ("fig9_correlation", include_str!("../../scenarios/fig9_correlation.toml")),
    ("fig10_diagonal", include_str!("../../scenarios/fig10_diagonal.toml")),
    ("sql_table", include_str!("../../scenarios/sql_table.toml")),
    ("waist_opt", include_str!("../../scenarios/waist_opt.toml")),
];

/// Names and descriptions of the built-in scenarios.
pub fn list_scenarios() -> Vec<(String, String)> {
    BUILTIN_SCENARIOS
        .iter()
        .map(|(name, text)| {
            let desc = ScenarioConfig::from_toml(text)
                .map(|c| c.description)
                .unwrap_or_else(|e| format!("<invalid: {e}>"));
            (name.to_string(), desc)
        })
        .collect()
}

/// Load a built-in scenario by name.
pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig> {
    let text = BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::config("scenario", format!("no built-in scenario {name:?}")))?;
    ScenarioConfig::from_toml(text)
}

/// Record of one completed run: output files, hashes, scalar results.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub scenario: String,
    pub seed: u64,
    pub version: String,
    /// output name -> CSV file name (relative to the manifest)
    pub outputs: BTreeMap<String, String>,
    /// output name -> sha256 hex of the CSV bytes
    pub hashes: BTreeMap<String, String>,
    pub results: BTreeMap<String, f64>,
    /// column name -> comparison tolerance for golden diffing (absent = exact)
    pub tolerances: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scenario = {}\n", self.scenario));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("version = {}\n", self.version));
        for (k, v) in &self.outputs {
            out.push_str(&format!("output.{k} = {v}\n"));
        }
        for (k, v) in &self.hashes {
            out.push_str(&format!("sha256.{k} = {v}\n"));
        }
        for (k, v) in &self.results {
            out.push_str(&format!("result.{k} = {}\n", fmt_float(*v)));
        }
        for (k, v) in &self.tolerances {
            out.push_str(&format!("tolerance.{k} = {}\n", fmt_float(*v)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut scenario = None;
        let mut seed = None;
        let mut version = None;
        let mut outputs = BTreeMap::new();
        let mut hashes = BTreeMap::new();
        let mut results = BTreeMap::new();
        let mut tolerances = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once(" = ").ok_or_else(|| {
                Error::config("manifest", format!("line {}: not `key = value`", lineno + 1))
            })?;
            let parse_f = |v: &str| -> Result<f64> {
                v.parse().map_err(|_| {
                    Error::config("manifest", format!("line {}: bad number {v:?}", lineno + 1))
                })
            };
            match key {
                "scenario" => scenario = Some(value.to_string()),
                "seed" => {
                    seed = Some(value.parse().map_err(|_| {
                        Error::config("manifest", format!("bad seed {value:?}"))
                    })?)
                }
                "version" => version = Some(value.to_string()),
                _ => {
                    if let Some(k) = key.strip_prefix("output.") {
                        outputs.insert(k.to_string(), value.to_string());
                    } else if let Some(k) = key.strip_prefix("sha256.") {
                        hashes.insert(k.to_string(), value.to_string());
                    } else if let Some(k) = key.strip_prefix("result.") {
                        results.insert(k.to_string(), parse_f(value)?);
                    } else if let Some(k) = key.strip_prefix("tolerance.") {
                        tolerances.insert(k.to_string(), parse_f(value)?);
                    } else {
                        return Err(Error::config(
                            "manifest",
                            format!("line {}: unknown key {key:?}", lineno + 1),
                        ));
                    }
                }
            }
        }
        Ok(RunManifest {
            scenario: scenario.ok_or_else(|| Error::config("manifest", "missing scenario"))?,
            seed: seed.ok_or_else(|| Error::config("manifest", "missing seed"))?,
            version: version.ok_or_else(|| Error::config("manifest", "missing version"))?,
            outputs,
            hashes,
            results,
            tolerances,
        })
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Write bytes atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Execute a scenario and write its CSVs and manifest into `out_dir`.
/// Returns the manifest (also written as `<id>.manifest`).
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunManifest> {
    let run = execute(config)?;
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest {
        scenario: config.id.clone(),
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: BTreeMap::new(),
        hashes: BTreeMap::new(),
        results: run.results.clone(),
        tolerances: BTreeMap::new(),
    };
    for out in &run.outputs {
        let file = format!("{}.{}.csv", config.id, out.name);
        let csv = out.trace.to_csv();
        write_atomic(&out_dir.join(&file), csv.as_bytes())?;
        manifest.hashes.insert(out.name.clone(), sha256_hex(csv.as_bytes()));
        manifest.outputs.insert(out.name.clone(), file);
    }
    write_atomic(
        &out_dir.join(format!("{}.manifest", config.id)),
        manifest.to_text().as_bytes(),
    )?;
    Ok(manifest)
}

/// Path of the manifest a `run_scenario` call writes.
pub fn manifest_path(out_dir: &Path, scenario_id: &str) -> PathBuf {
    out_dir.join(format!("{scenario_id}.manifest"))
}
