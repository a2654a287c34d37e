//! JSON shapes emitted under `--json`. Every document is an [`Envelope`]:
//! the manifest describing the run plus a command-specific result.

use std::collections::BTreeMap;

use nlv_core::protocols::EprStatistics;
use nlv_core::tm::{NdOutcome, RunOutcome};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Subcommand path, e.g. `moments density`.
    pub command: String,
    /// Every parameter the command ran with, defaults included.
    pub params: BTreeMap<String, Value>,
    pub version: String,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope<T> {
    pub manifest: RunManifest,
    pub result: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueResult {
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalResult {
    pub value: f64,
    /// `exact` from full enumeration, `lower` from sampling.
    pub bound: String,
    /// Alice's answer to each question, 1-based.
    #[serde(rename = "A")]
    pub alice: Vec<usize>,
    #[serde(rename = "B")]
    pub bob: Vec<usize>,
    /// `n^{2k}`, saturating.
    pub deterministic_strategies: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumLbResult {
    pub value: f64,
    pub dim: usize,
    pub spec_file: String,
    pub bound: String,
    pub restart: usize,
    pub classical_seeded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncLbResult {
    pub value: f64,
    pub dim: usize,
    pub bound: String,
    pub restart: usize,
    pub scalar_seeded: bool,
    pub family_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperdenseRow {
    pub message: String,
    /// Encoded two-qubit state, interleaved re/im.
    pub state: Vec<f64>,
    pub decoded: String,
    pub probabilities: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperdenseResult {
    pub rows: Vec<SuperdenseRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprResult {
    pub runs: Vec<EprStatistics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsMapResult {
    pub n: usize,
    pub d: usize,
    pub monomials: Vec<String>,
    /// `[re, im]` per monomial.
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityResult {
    pub n: usize,
    pub d: usize,
    pub p_small: usize,
    pub p_large: usize,
    pub eps: f64,
    pub count_small: usize,
    pub count_large: usize,
    pub seed: u64,
    pub covered_fraction: f64,
    pub max_gap: f64,
    pub mean_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudResult {
    pub n: usize,
    pub d: usize,
    pub p: usize,
    pub count: usize,
    pub seed: u64,
    pub monomials: usize,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmRunResult {
    #[serde(flatten)]
    pub outcome: RunOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmAcceptsResult {
    #[serde(flatten)]
    pub outcome: NdOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoChshResult {
    pub classical: f64,
    pub quantum: f64,
    pub gap: f64,
}
