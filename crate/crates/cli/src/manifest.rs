//! Run manifests: everything needed to reproduce a command's outputs.

use std::path::PathBuf;

use clap::ValueEnum;
use freeburgers::evolution::Family;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Evolve,
    Verify,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Dyson,
    Wishart,
    Chiral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdeParams {
    pub seed: u64,
    pub replicas: usize,
    pub particles: usize,
    pub dt: f64,
    pub beta: f64,
    /// Overrides `ν = (λ - 1) N` when set.
    pub nu: Option<f64>,
    /// Dump positions every this many steps.
    pub trajectory_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: CommandKind,
    /// Measure shorthand or path to a measure JSON file.
    pub initial: String,
    pub out: PathBuf,
    pub family: FamilyName,
    pub lambda: f64,
    pub t: f64,
    pub order: usize,
    pub grid: usize,
    pub eps_schedule: Vec<f64>,
    pub sde: SdeParams,
}

impl RunManifest {
    pub fn family(&self) -> Family<f64> {
        match self.family {
            FamilyName::Dyson => Family::Dyson,
            FamilyName::Wishart => Family::Wishart { lambda: self.lambda },
            FamilyName::Chiral => Family::Chiral { lambda: self.lambda },
        }
    }

    /// SHA-256 of the manifest JSON with the output directory blanked, so
    /// that the same run written to two places carries the same hash.
    pub fn hash(&self) -> String {
        let mut m = self.clone();
        m.out = PathBuf::new();
        let json = serde_json::to_string(&m).expect("manifest serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
