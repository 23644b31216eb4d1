//! One MASC run per session. The loop lives on its own thread and blocks
//! inside the oracle until a label arrives over a rendezvous channel.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::sync::{Arc, Mutex, MutexGuard};
use std::thread;

use masc_core::experiment::Prepared;
use masc_core::masc::{knn_extend, prune, FinalLabels, Masc, MascState, QueryRecord, StopReason};
use masc_core::metrics;
use masc_core::preprocess::pca;
use masc_core::{Label, MascConfig, Oracle, PointCloud, PointStatus};
use serde::{Deserialize, Serialize};
use tokio::sync::watch;

use crate::api::{Metrics, Progress, QueryPayload, StateResponse};
use crate::error::ApiError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Running,
    AwaitingLabel,
    Knn,
    Done,
    Failed,
}

impl Phase {
    fn settled(self) -> bool {
        !matches!(self, Phase::Running | Phase::Knn)
    }
}

struct Inner {
    phase: Phase,
    pending: Option<usize>,
    snapshot: MascState,
    last_answer: Option<(usize, Label)>,
    stop: Option<StopReason>,
    final_labels: Option<FinalLabels>,
    error: Option<String>,
}

pub struct Session {
    pub id: String,
    features: PointCloud,
    projection: Vec<[f64; 2]>,
    truth: Option<Vec<Label>>,
    config: MascConfig,
    inner: Mutex<Inner>,
    answers: SyncSender<Label>,
    changed: watch::Sender<u64>,
    /// Serializes label submissions.
    pub submit_lock: tokio::sync::Mutex<()>,
    log_path: Option<PathBuf>,
}

/// First two principal coordinates, or the raw coordinates when `q <= 2`.
fn project_2d(cloud: &PointCloud) -> Vec<[f64; 2]> {
    match cloud.dim() {
        1 => cloud.rows().map(|r| [r[0], 0.0]).collect(),
        2 => cloud.planar(),
        _ => match pca(cloud, 2) {
            Ok(p) => p.projected.planar(),
            Err(_) => vec![[0.0, 0.0]; cloud.len()],
        },
    }
}

struct RemoteOracle {
    session: Arc<Session>,
    answers: Receiver<Label>,
}

impl Oracle for RemoteOracle {
    fn answer(&mut self, id: usize, state: &MascState) -> Result<Label, String> {
        self.session.update(|inner| {
            inner.phase = Phase::AwaitingLabel;
            inner.pending = Some(id);
            inner.snapshot = state.clone();
        });
        self.answers
            .recv()
            .map_err(|_| "session closed before the label arrived".to_string())
    }
}

impl Session {
    /// Start the worker. The session is in the running phase on return.
    pub fn start(
        id: String,
        prepared: Prepared,
        config: MascConfig,
        log_path: Option<PathBuf>,
    ) -> Result<Arc<Self>, ApiError> {
        config.validate()?;
        let (retained, status) = prune(&prepared.field, config.theta)?;
        let snapshot = MascState {
            status,
            retained,
            eta: config.eta_start,
            levels: 0,
            log: Vec::new(),
        };
        if let Some(p) = &log_path {
            std::fs::write(p, "step,eta,point_id,label\n")
                .map_err(|e| ApiError::Internal(format!("{}: {e}", p.display())))?;
        }
        let (tx, rx) = sync_channel(0);
        let session = Arc::new(Self {
            id,
            projection: project_2d(&prepared.data.cloud),
            features: prepared.data.cloud.clone(),
            truth: prepared.data.truth.clone(),
            config,
            inner: Mutex::new(Inner {
                phase: Phase::Running,
                pending: None,
                snapshot,
                last_answer: None,
                stop: None,
                final_labels: None,
                error: None,
            }),
            answers: tx,
            changed: watch::channel(0).0,
            submit_lock: tokio::sync::Mutex::new(()),
            log_path,
        });
        let worker = Arc::clone(&session);
        thread::Builder::new()
            .name(format!("masc-{}", session.id))
            .spawn(move || worker.work(prepared, rx))
            .map_err(|e| ApiError::Internal(e.to_string()))?;
        Ok(session)
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn update(&self, f: impl FnOnce(&mut Inner)) {
        f(&mut self.lock());
        self.changed.send_modify(|v| *v += 1);
    }

    fn work(self: Arc<Self>, prepared: Prepared, answers: Receiver<Label>) {
        let mut oracle = RemoteOracle {
            session: Arc::clone(&self),
            answers,
        };
        let outcome = (|| {
            let mut masc = Masc::new(self.config.clone(), &prepared.provider, &prepared.field)?;
            let stop = masc.run_with(&mut oracle, |state| {
                self.update(|inner| inner.snapshot = state.clone());
            })?;
            let (state, _) = masc.into_state();
            self.update(|inner| {
                inner.phase = Phase::Knn;
                inner.stop = Some(stop);
                inner.snapshot = state.clone();
            });
            knn_extend(&state.status, &prepared.provider, self.config.neighbors)
        })();
        self.update(|inner| {
            inner.pending = None;
            match outcome {
                Ok(labels) => {
                    inner.phase = Phase::Done;
                    inner.final_labels = Some(labels);
                }
                Err(e) => {
                    inner.phase = Phase::Failed;
                    inner.error = Some(e.to_string());
                }
            }
        });
    }

    /// Wait until the worker is blocked on a label or has finished.
    pub async fn settled(&self) -> Phase {
        let mut rx = self.changed.subscribe();
        loop {
            let phase = self.lock().phase;
            if phase.settled() {
                return phase;
            }
            if rx.changed().await.is_err() {
                return self.lock().phase;
            }
        }
    }

    pub fn phase(&self) -> Phase {
        self.lock().phase
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    fn progress(&self, inner: &Inner) -> Progress {
        let s = &inner.snapshot;
        let pruned = s.status.iter().filter(|x| **x == PointStatus::Pruned).count();
        let labeled = match &inner.final_labels {
            Some(f) => f.labels.len(),
            None => s.labeled(),
        };
        Progress {
            m: s.len(),
            labeled,
            unlabeled: s.len() - labeled,
            pruned,
            queries: s.log.len(),
            max_queries: self.config.max_queries,
            eta: s.eta,
            levels: s.levels,
        }
    }

    pub fn query(&self) -> Option<QueryPayload> {
        let inner = self.lock();
        let id = inner.pending?;
        Some(QueryPayload {
            point_id: id,
            features: self.features.row(id).to_vec(),
            projection: self.projection[id],
            progress: self.progress(&inner),
        })
    }

    /// Hand a label to the waiting worker. A repeat of the last accepted
    /// answer is acknowledged without effect.
    pub fn submit(&self, point: usize, label: Label) -> Result<bool, ApiError> {
        let mut inner = self.lock();
        if inner.last_answer == Some((point, label)) && inner.pending != Some(point) {
            return Ok(true);
        }
        match (inner.phase, inner.pending) {
            (Phase::AwaitingLabel, Some(p)) if p == point => {}
            (Phase::AwaitingLabel, Some(p)) => {
                return Err(ApiError::Conflict(format!("pending query is point {p}, not {point}")))
            }
            (phase, _) => {
                return Err(ApiError::Conflict(format!("no pending query (phase {phase:?})")))
            }
        }
        let record = QueryRecord {
            step: inner.snapshot.log.len() + 1,
            eta: inner.snapshot.eta,
            point,
            label,
        };
        if let Some(path) = &self.log_path {
            let line = format!("{},{},{},{}\n", record.step, record.eta, record.point, record.label);
            OpenOptions::new()
                .append(true)
                .open(path)
                .and_then(|mut f| f.write_all(line.as_bytes()))
                .map_err(|e| ApiError::Internal(format!("{}: {e}", path.display())))?;
        }
        self.answers
            .send(label)
            .map_err(|_| ApiError::Conflict("session worker has stopped".into()))?;
        inner.snapshot.status[point] = PointStatus::Queried(label);
        inner.snapshot.log.push(record);
        inner.pending = None;
        inner.phase = Phase::Running;
        inner.last_answer = Some((point, label));
        drop(inner);
        self.changed.send_modify(|v| *v += 1);
        Ok(false)
    }

    pub fn state(&self) -> StateResponse {
        let inner = self.lock();
        let s = &inner.snapshot;
        let labels: Vec<Option<Label>> = match &inner.final_labels {
            Some(f) => f.labels.iter().copied().map(Some).collect(),
            None => s.labels(),
        };
        let metrics = self.truth.as_ref().map(|truth| {
            let scored: Vec<(Label, Label)> = labels
                .iter()
                .zip(truth)
                .filter_map(|(p, t)| p.map(|p| (p, *t)))
                .collect();
            let correct = scored.iter().filter(|(p, t)| p == t).count();
            Metrics {
                labeled_accuracy: (!scored.is_empty()).then(|| correct as f64 / scored.len() as f64),
                accuracy: inner
                    .final_labels
                    .as_ref()
                    .and_then(|f| metrics::accuracy(&f.labels, truth).ok()),
            }
        });
        StateResponse {
            id: self.id.clone(),
            phase: inner.phase,
            progress: self.progress(&inner),
            labels,
            sources: inner
                .final_labels
                .as_ref()
                .map(|f| f.sources.iter().map(|s| s.as_str().to_string()).collect()),
            query_log: s.log.clone(),
            pending: inner.pending,
            projection: self.projection.clone(),
            stop: inner.stop,
            metrics,
            error: inner.error.clone(),
        }
    }

    pub fn export(&self) -> Result<String, ApiError> {
        let inner = self.lock();
        match &inner.final_labels {
            Some(f) => Ok(masc_core::io::format_labels(f)),
            None => Err(ApiError::Conflict(format!(
                "session {} has no final labels yet",
                self.id
            ))),
        }
    }
}
