//! Multiscale active clustering with modal-point queries.
//!
//! The samples outside the support estimation set `G_n(Θ)` are set aside.
//! For an increasing sequence of scales `η`, the remaining points are joined
//! whenever `ρ(x_i, x_j) < η`. Every component of size at least `p` that holds
//! no queried point gets one query, placed at its `F_n`-maximizer, and the
//! answer labels the whole component. A component whose queried points all
//! agree inherits their label; a component with conflicting answers is left
//! alone. Once the graph on the retained points is connected (or the scale
//! range runs out), the unlabeled remainder is filled in by a `k̄`-nearest
//! labeled neighbor vote.

mod union_find;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use union_find::UnionFind;

use crate::error::{Error, Result};
use crate::metric::DistanceProvider;
use crate::support::SupportField;
use crate::Label;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MascConfig {
    /// Kernel degree `n`.
    pub degree: usize,
    /// Support threshold `Θ`.
    pub theta: f64,
    pub eta_start: f64,
    pub eta_step: f64,
    /// Last scale to visit; `None` means π.
    pub eta_max: Option<f64>,
    /// Minimum component size `p`.
    pub min_component: usize,
    /// Neighbor count `k̄` for the final vote.
    pub neighbors: usize,
    pub max_queries: Option<usize>,
    /// Keep a label snapshot per level (needed for budget curves).
    #[serde(default)]
    pub record_levels: bool,
}

impl Default for MascConfig {
    fn default() -> Self {
        Self {
            degree: 32,
            theta: 0.1,
            eta_start: 0.01,
            eta_step: 0.01,
            eta_max: None,
            min_component: 1,
            neighbors: 1,
            max_queries: None,
            record_levels: false,
        }
    }
}

impl MascConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.degree == 0 {
            return bad("degree must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta must lie in (0, 1]");
        }
        if !(self.eta_start > 0.0 && self.eta_start.is_finite()) {
            return bad("eta_start must be positive");
        }
        if !(self.eta_step > 0.0 && self.eta_step.is_finite()) {
            return bad("eta_step must be positive");
        }
        if self.eta_max.is_some_and(|m| !m.is_finite()) {
            return bad("eta_max must be finite");
        }
        if self.min_component == 0 {
            return bad("min_component must be at least 1");
        }
        if self.neighbors == 0 {
            return bad("neighbors must be at least 1");
        }
        Ok(())
    }

    pub fn eta_limit(&self) -> f64 {
        self.eta_max.unwrap_or(PI)
    }

    /// Scale at level `k`, computed without accumulating rounding.
    pub fn eta_at(&self, level: usize) -> f64 {
        self.eta_start + level as f64 * self.eta_step
    }

    fn past_limit(&self, eta: f64) -> bool {
        let limit = self.eta_limit();
        eta > limit + 1e-9 * limit.abs().max(self.eta_step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "label", rename_all = "kebab-case")]
pub enum PointStatus {
    /// Outside `G_n(Θ)`.
    Pruned,
    Unlabeled,
    Predicted(Label),
    Queried(Label),
}

impl PointStatus {
    pub fn label(self) -> Option<Label> {
        match self {
            Self::Predicted(l) | Self::Queried(l) => Some(l),
            Self::Pruned | Self::Unlabeled => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    /// 1-based position in the log.
    pub step: usize,
    pub eta: f64,
    pub point: usize,
    pub label: Label,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MascState {
    pub status: Vec<PointStatus>,
    /// Ids of the retained samples `V`, ascending.
    pub retained: Vec<usize>,
    /// Scale of the level in progress or last completed.
    pub eta: f64,
    /// Levels completed so far.
    pub levels: usize,
    pub log: Vec<QueryRecord>,
}

impl MascState {
    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }

    pub fn queries(&self) -> usize {
        self.log.len()
    }

    pub fn labeled(&self) -> usize {
        self.status.iter().filter(|s| s.label().is_some()).count()
    }

    pub fn labels(&self) -> Vec<Option<Label>> {
        self.status.iter().map(|s| s.label()).collect()
    }
}

/// Source of labels for queried points.
pub trait Oracle {
    /// Label of sample `id`. `state` is the state at the moment of the query,
    /// for oracles that show context to a person.
    fn answer(&mut self, id: usize, state: &MascState) -> std::result::Result<Label, String>;
}

/// Looks answers up in a ground-truth vector.
#[derive(Clone, Debug)]
pub struct GroundTruth<'a> {
    truth: &'a [Label],
    pub calls: usize,
}

impl<'a> GroundTruth<'a> {
    pub fn new(truth: &'a [Label]) -> Self {
        Self { truth, calls: 0 }
    }
}

impl Oracle for GroundTruth<'_> {
    fn answer(&mut self, id: usize, _state: &MascState) -> std::result::Result<Label, String> {
        self.calls += 1;
        self.truth
            .get(id)
            .copied()
            .ok_or_else(|| format!("no ground truth for point {id}"))
    }
}

impl<F> Oracle for F
where
    F: FnMut(usize) -> std::result::Result<Label, String>,
{
    fn answer(&mut self, id: usize, _state: &MascState) -> std::result::Result<Label, String> {
        self(id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The graph on the retained points became connected.
    Connected,
    /// The scale passed `eta_max` first.
    EtaExhausted,
}

/// Snapshot taken after each level when `record_levels` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub eta: f64,
    pub queries: usize,
    /// Components of size at least `p`.
    pub components: usize,
    pub labels: Vec<Option<Label>>,
}

/// Retained ids `V` and the initial status vector.
pub fn prune(field: &SupportField, theta: f64) -> Result<(Vec<usize>, Vec<PointStatus>)> {
    let mask = field.threshold_mask(theta)?;
    let status = mask
        .iter()
        .map(|&keep| if keep { PointStatus::Unlabeled } else { PointStatus::Pruned })
        .collect();
    let ids = mask
        .into_iter()
        .enumerate()
        .filter_map(|(i, k)| k.then_some(i))
        .collect();
    Ok((ids, status))
}

/// Components of size at least `min_size` of the graph on `ids` with an edge
/// wherever `ρ < eta`, each sorted, ordered by smallest member.
pub fn components(
    ids: &[usize],
    eta: f64,
    provider: &DistanceProvider,
    min_size: usize,
) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(ids.len());
    for (a, b) in provider.pairs_in_band(ids, f64::NEG_INFINITY, eta) {
        uf.union(a as usize, b as usize);
    }
    collect_components(&mut uf, ids, min_size)
}

fn collect_components(uf: &mut UnionFind, ids: &[usize], min_size: usize) -> Vec<Vec<usize>> {
    uf.groups()
        .into_iter()
        .filter(|g| g.len() >= min_size)
        .map(|g| g.into_iter().map(|pos| ids[pos]).collect())
        .collect()
}

/// `F_n`-maximizer of a component, smallest id on ties.
pub fn select_query(component: &[usize], field: &SupportField) -> Option<usize> {
    component.iter().copied().fold(None, |best, id| match best {
        Some(b) if field.get(b) > field.get(id) || (field.get(b) == field.get(id) && b < id) => {
            Some(b)
        }
        _ => Some(id),
    })
}

/// Incremental multiscale loop over one data set.
pub struct Masc<'a> {
    config: MascConfig,
    provider: &'a DistanceProvider,
    field: &'a SupportField,
    uf: UnionFind,
    reached: f64,
    state: MascState,
    records: Vec<LevelRecord>,
    stop: Option<StopReason>,
}

impl<'a> Masc<'a> {
    pub fn new(config: MascConfig, provider: &'a DistanceProvider, field: &'a SupportField) -> Result<Self> {
        config.validate()?;
        if provider.len() != field.len() {
            return Err(Error::Dimension {
                expected: provider.len(),
                got: field.len(),
            });
        }
        let (retained, status) = prune(field, config.theta)?;
        let uf = UnionFind::new(retained.len());
        Ok(Self {
            state: MascState {
                status,
                retained,
                eta: config.eta_start,
                levels: 0,
                log: Vec::new(),
            },
            config,
            provider,
            field,
            uf,
            reached: f64::NEG_INFINITY,
            records: Vec::new(),
            stop: None,
        })
    }

    pub fn state(&self) -> &MascState {
        &self.state
    }

    pub fn config(&self) -> &MascConfig {
        &self.config
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn records(&self) -> &[LevelRecord] {
        &self.records
    }

    fn budget_left(&self) -> bool {
        self.config
            .max_queries
            .is_none_or(|b| self.state.log.len() < b)
    }

    /// Run one level at scale `eta` (which must not decrease between calls).
    /// Returns whether the graph on the retained points is connected.
    pub fn run_level(&mut self, eta: f64, oracle: &mut dyn Oracle) -> Result<bool> {
        if eta < self.reached {
            return Err(Error::Domain(format!(
                "scale went backwards: {eta} after {}",
                self.reached
            )));
        }
        for (a, b) in self
            .provider
            .pairs_in_band(&self.state.retained, self.reached, eta)
        {
            self.uf.union(a as usize, b as usize);
        }
        self.reached = eta;
        self.state.eta = eta;

        let comps = collect_components(&mut self.uf, &self.state.retained, self.config.min_component);
        for comp in &comps {
            let mut agreed: Option<Label> = None;
            let mut conflict = false;
            for &id in comp {
                if let PointStatus::Queried(l) = self.state.status[id] {
                    match agreed {
                        None => agreed = Some(l),
                        Some(prev) if prev != l => conflict = true,
                        _ => {}
                    }
                }
            }
            let label = match (agreed, conflict) {
                (_, true) => continue,
                (Some(l), false) => l,
                (None, _) => {
                    if !self.budget_left() {
                        continue;
                    }
                    let id = select_query(comp, self.field).expect("components are non-empty");
                    let label = oracle
                        .answer(id, &self.state)
                        .map_err(|reason| Error::Oracle { id, reason })?;
                    self.state.status[id] = PointStatus::Queried(label);
                    self.state.log.push(QueryRecord {
                        step: self.state.log.len() + 1,
                        eta,
                        point: id,
                        label,
                    });
                    label
                }
            };
            for &id in comp {
                if !matches!(self.state.status[id], PointStatus::Queried(_)) {
                    self.state.status[id] = PointStatus::Predicted(label);
                }
            }
        }
        self.state.levels += 1;
        if self.config.record_levels {
            self.records.push(LevelRecord {
                eta,
                queries: self.state.log.len(),
                components: comps.len(),
                labels: self.state.labels(),
            });
        }
        Ok(self.uf.set_count() <= 1)
    }

    /// Iterate levels until the retained graph connects or the scale range
    /// is exhausted. `on_level` sees the state after every level.
    pub fn run_with(
        &mut self,
        oracle: &mut dyn Oracle,
        mut on_level: impl FnMut(&MascState),
    ) -> Result<StopReason> {
        if let Some(r) = self.stop {
            return Ok(r);
        }
        let mut level = self.state.levels;
        let reason = loop {
            let eta = self.config.eta_at(level);
            if self.config.past_limit(eta) {
                break StopReason::EtaExhausted;
            }
            let connected = self.run_level(eta, oracle)?;
            on_level(&self.state);
            if connected {
                break StopReason::Connected;
            }
            level += 1;
        };
        self.stop = Some(reason);
        Ok(reason)
    }

    pub fn run(&mut self, oracle: &mut dyn Oracle) -> Result<StopReason> {
        self.run_with(oracle, |_| {})
    }

    pub fn into_state(self) -> (MascState, Vec<LevelRecord>) {
        (self.state, self.records)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelSource {
    Queried,
    Extended,
    Knn,
}

impl LabelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Queried => "queried",
            Self::Extended => "extended",
            Self::Knn => "knn",
        }
    }
}

impl std::str::FromStr for LabelSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "queried" => Ok(Self::Queried),
            "extended" => Ok(Self::Extended),
            "knn" => Ok(Self::Knn),
            other => Err(Error::Domain(format!("unknown label source `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FinalLabels {
    pub labels: Vec<Label>,
    pub sources: Vec<LabelSource>,
}

/// Fill every unlabeled point by majority vote over its `k` nearest labeled
/// points. Distance ties go to the smaller id; vote ties go to the smaller
/// label.
pub fn knn_extend(status: &[PointStatus], provider: &DistanceProvider, k: usize) -> Result<FinalLabels> {
    if k == 0 {
        return Err(Error::Config("neighbors must be at least 1".into()));
    }
    let labeled: Vec<(usize, Label)> = status
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.label().map(|l| (i, l)))
        .collect();
    if labeled.is_empty() {
        return Err(Error::NothingToExtend);
    }
    let k = k.min(labeled.len());
    let results: Vec<(Label, LabelSource)> = status
        .par_iter()
        .enumerate()
        .map(|(i, s)| match *s {
            PointStatus::Queried(l) => (l, LabelSource::Queried),
            PointStatus::Predicted(l) => (l, LabelSource::Extended),
            PointStatus::Pruned | PointStatus::Unlabeled => {
                let mut cand: Vec<(f64, usize, Label)> = labeled
                    .iter()
                    .map(|&(j, l)| (provider.distance(i, j), j, l))
                    .collect();
                let by_dist = |a: &(f64, usize, Label), b: &(f64, usize, Label)| {
                    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
                };
                if k < cand.len() {
                    cand.select_nth_unstable_by(k - 1, by_dist);
                    cand.truncate(k);
                }
                let mut votes: Vec<Label> = cand.iter().map(|c| c.2).collect();
                votes.sort_unstable();
                let mut best = (0usize, votes[0]);
                let mut run = 0usize;
                for (idx, &l) in votes.iter().enumerate() {
                    run = if idx > 0 && votes[idx - 1] == l { run + 1 } else { 1 };
                    if run > best.0 {
                        best = (run, l);
                    }
                }
                (best.1, LabelSource::Knn)
            }
        })
        .collect();
    let (labels, sources) = results.into_iter().unzip();
    Ok(FinalLabels { labels, sources })
}

/// Outcome of a full run: multiscale loop plus neighbor vote.
#[derive(Clone, Debug)]
pub struct Classification {
    pub state: MascState,
    pub stop: StopReason,
    pub levels: Vec<LevelRecord>,
    pub labels: FinalLabels,
}

impl Classification {
    pub fn queries(&self) -> usize {
        self.state.log.len()
    }
}

/// Run the loop and the final vote against a precomputed field.
pub fn classify(
    config: &MascConfig,
    provider: &DistanceProvider,
    field: &SupportField,
    oracle: &mut dyn Oracle,
) -> Result<Classification> {
    let mut masc = Masc::new(config.clone(), provider, field)?;
    let stop = masc.run(oracle)?;
    let (state, levels) = masc.into_state();
    let labels = knn_extend(&state.status, provider, config.neighbors)?;
    Ok(Classification {
        state,
        stop,
        levels,
        labels,
    })
}

/// Accuracy after forcing the neighbor vote at every recorded level.
pub fn budget_curve(
    levels: &[LevelRecord],
    provider: &DistanceProvider,
    neighbors: usize,
    truth: &[Label],
) -> Result<Vec<crate::metrics::BudgetPoint>> {
    let mut out = Vec::with_capacity(levels.len());
    for rec in levels {
        if rec.labels.iter().all(Option::is_none) {
            continue;
        }
        let status: Vec<PointStatus> = rec
            .labels
            .iter()
            .map(|l| l.map_or(PointStatus::Unlabeled, PointStatus::Predicted))
            .collect();
        let filled = knn_extend(&status, provider, neighbors)?;
        out.push(crate::metrics::BudgetPoint {
            eta: rec.eta,
            queries: rec.queries,
            accuracy: crate::metrics::accuracy(&filled.labels, truth)?,
        });
    }
    Ok(out)
}
