//! JSON bodies.
//!
//! ```text
//! POST /sessions            {"config": "<config file text>"?, "points": [[f64]]?, "truth": [u32]?}
//!                           -> 201 {"id", "phase", "m", "dim"}
//! GET  /sessions/{id}/query -> {"phase", "query": null | {"point_id", "features", "projection", "progress"}}
//! POST /sessions/{id}/label {"point_id", "label"} -> {"accepted", "replay", "phase"}
//! GET  /sessions/{id}/state -> StateResponse
//! GET  /sessions/{id}/export -> text/csv `point_id,label,source`
//! ```
//!
//! Without `config` the server's default config is used; `points` replaces
//! the config's data source.

use masc_core::masc::{QueryRecord, StopReason};
use masc_core::Label;
use serde::{Deserialize, Serialize};

use crate::session::Phase;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub config: Option<String>,
    pub points: Option<Vec<Vec<f64>>>,
    pub truth: Option<Vec<Label>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
    pub phase: Phase,
    pub m: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub m: usize,
    pub labeled: usize,
    pub unlabeled: usize,
    pub pruned: usize,
    pub queries: usize,
    pub max_queries: Option<usize>,
    pub eta: f64,
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryPayload {
    pub point_id: usize,
    pub features: Vec<f64>,
    pub projection: [f64; 2],
    pub progress: Progress,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QueryResponse {
    pub phase: Phase,
    pub query: Option<QueryPayload>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRequest {
    pub point_id: usize,
    pub label: Label,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabelResponse {
    pub accepted: bool,
    /// The same answer had already been applied.
    pub replay: bool,
    pub phase: Phase,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Accuracy over points that currently carry a label.
    pub labeled_accuracy: Option<f64>,
    /// Accuracy of the final labeling, once done.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StateResponse {
    pub id: String,
    pub phase: Phase,
    pub progress: Progress,
    pub labels: Vec<Option<Label>>,
    pub sources: Option<Vec<String>>,
    pub query_log: Vec<QueryRecord>,
    pub pending: Option<usize>,
    pub projection: Vec<[f64; 2]>,
    pub stop: Option<StopReason>,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}
