//! Per-command run configurations. All configs carry a schema `version` and
//! reject unknown fields; the exact config used is copied into every run
//! directory.

use crate::{CliError, CliResult, CommonArgs};
use qestkit::anneal::AnnealConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn single(v: f64) -> Self {
        Self { start: v, stop: v, count: 1 }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count <= 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| {
                self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiConfig {
    pub version: u32,
    /// "qubit", "noon" or "coherent".
    pub probe: String,
    pub theta: f64,
    pub n: usize,
    pub alpha_sq: f64,
    pub phi: f64,
    pub delta_grid: Grid,
}

impl Default for QfiConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            probe: "qubit".into(),
            theta: FRAC_PI_2,
            n: 3,
            alpha_sq: 4.0,
            phi: 0.4,
            delta_grid: Grid { start: 0.0, stop: 1.0, count: 21 },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomodyneConfig {
    pub version: u32,
    /// "split", "noon" or "hb".
    pub state: String,
    pub n: usize,
    /// Fock cutoff; 0 picks the minimal cutoff for the state.
    pub cutoff: usize,
    pub eta: f64,
    pub phi: f64,
    pub delta_grid: Grid,
    pub nodes: usize,
}

impl Default for HomodyneConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            state: "split".into(),
            n: 1,
            cutoff: 0,
            eta: 1.0,
            phi: 0.7,
            delta_grid: Grid { start: 0.05, stop: 0.5, count: 10 },
            nodes: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealCmdConfig {
    pub version: u32,
    /// "qubit-pair" or "hb".
    pub probe: String,
    pub hb_n: usize,
    pub phi: f64,
    pub delta: f64,
    pub anneal: AnnealConfig,
}

impl Default for AnnealCmdConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            probe: "qubit-pair".into(),
            hb_n: 3,
            phi: 0.4,
            delta: 0.25,
            anneal: AnnealConfig {
                entanglement_weight: 0.1,
                ..AnnealConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    pub version: u32,
    pub k_grid: Grid,
    pub v1: f64,
    pub v2: f64,
    pub phi: f64,
    pub delta: f64,
    pub phase_offset_deg: f64,
    pub shots: usize,
    pub fluctuation_sd: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            k_grid: Grid { start: 0.1, stop: 0.9, count: 5 },
            v1: 0.965,
            v2: 0.994,
            phi: FRAC_PI_2,
            delta: 0.25,
            phase_offset_deg: 0.0,
            shots: 200,
            fluctuation_sd: 0.02,
            resamples: 200,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MleConfig {
    pub version: u32,
    pub k: f64,
    pub v1: f64,
    pub v2: f64,
    pub phi: f64,
    pub delta: f64,
    pub shots: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            k: 0.5,
            v1: 1.0,
            v2: 1.0,
            phi: FRAC_PI_2,
            delta: 0.25,
            shots: 10_000,
            trials: 500,
            seed: 11,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffScanConfig {
    pub version: u32,
    pub count: usize,
    pub deltas: Vec<f64>,
    pub phi: f64,
    pub outcomes: usize,
    pub seed: u64,
}

impl Default for TradeoffScanConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            count: 200,
            deltas: vec![0.1, 0.25, 0.5],
            phi: 0.9,
            outcomes: 4,
            seed: 13,
        }
    }
}

pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

pub fn check_version(version: u32) -> CliResult<()> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported config version {version} (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// Creates the run directory and stores the exact config used.
pub fn prepare_run_dir<T: Serialize>(
    args: &CommonArgs,
    default_name: &str,
    config: &T,
) -> CliResult<PathBuf> {
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(default_name));
    std::fs::create_dir_all(&dir)?;
    let text = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(dir.join("config.json"), text)?;
    Ok(dir)
}
