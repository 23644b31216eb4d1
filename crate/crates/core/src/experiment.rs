//! Experiment configuration files and end-to-end runs.
//!
//! A config is plain text: `[section]` headers, `key = value` lines and `#`
//! comments. Schema:
//!
//! ```text
//! [data]
//! generate = two-moons:m=1000,noise=0.05   # or: file = points.csv
//! preprocess = none                        # none | normalize | pca:<d>
//!
//! [metric]
//! mode = euclidean-rescaled                # or sphere-geodesic
//! sphere_scale = 0.5                       # optional, sphere mode only
//! cache = auto                             # auto | yes | no
//!
//! [masc]
//! n = 32
//! theta = 0.15
//! eta_start = 0.05
//! eta_step = 0.05
//! eta_max = 3.0                            # optional, default π
//! p = 5
//! k = 5
//! max_queries = 100                        # optional
//! kernel = auto                            # auto | exact | table
//! oracle = ground-truth                    # or human (labeling service only)
//!
//! [output]
//! dir = out                                # relative to the config file
//! field = false                            # write field.txt
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io;
use crate::kernel::LocalizedKernel;
use crate::masc::{budget_curve, classify, Classification, GroundTruth, MascConfig, Oracle};
use crate::metric::{DistanceProvider, MetricConfig, MetricMode};
use crate::metrics::{self, BudgetPoint};
use crate::preprocess::Preprocess;
use crate::support::{compute_field, SupportField};
use crate::synth::{Dataset, SyntheticSpec};
use crate::Label;

/// Automatic caching covers clouds in this size range.
pub const AUTO_CACHE_RANGE: (usize, usize) = (2048, 25_000);
/// Automatic tabulated kernel from this many points on.
pub const AUTO_TABLE_MIN: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Generate(SyntheticSpec),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Toggle {
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KernelEval {
    #[default]
    Auto,
    Exact,
    Table,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OracleKind {
    #[default]
    GroundTruth,
    Human,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub preprocess: Preprocess,
    pub metric: MetricConfig,
    pub cache: Toggle,
    pub kernel: KernelEval,
    pub masc: MascConfig,
    pub oracle: OracleKind,
    pub output_dir: PathBuf,
    pub write_field: bool,
}

fn parse_sections(text: &str, path: &Path) -> Result<BTreeMap<(String, String), (usize, String)>> {
    let mut section = String::new();
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(name) = l.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = l
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line, "expected `key = value`"))?;
        let key = (section.clone(), k.trim().to_string());
        if out.insert(key, (line, v.trim().to_string())).is_some() {
            return Err(Error::parse(path, line, format!("duplicate key `{}`", k.trim())));
        }
    }
    Ok(out)
}

struct Entries<'a> {
    path: &'a Path,
    map: BTreeMap<(String, String), (usize, String)>,
}

impl Entries<'_> {
    fn take(&mut self, section: &str, key: &str) -> Option<(usize, String)> {
        self.map.remove(&(section.to_string(), key.to_string()))
    }

    fn opt<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>> {
        match self.take(section, key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| {
                Error::parse(self.path, line, format!("bad value `{v}` for {section}.{key}"))
            }),
        }
    }

    fn req<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<T> {
        self.opt(section, key)?
            .ok_or_else(|| Error::Config(format!("{}: missing {section}.{key}", self.path.display())))
    }
}

fn toggle(v: &str) -> Option<Toggle> {
    match v {
        "auto" => Some(Toggle::Auto),
        "yes" | "true" | "on" => Some(Toggle::On),
        "no" | "false" | "off" => Some(Toggle::Off),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut e = Entries {
            path,
            map: parse_sections(text, path)?,
        };
        let source = match (e.take("data", "generate"), e.take("data", "file")) {
            (Some((line, spec)), None) => DataSource::Generate(
                spec.parse()
                    .map_err(|err: Error| Error::parse(path, line, err.to_string()))?,
            ),
            (None, Some((_, file))) => DataSource::File(base.join(file)),
            _ => {
                return Err(Error::Config(format!(
                    "{}: exactly one of data.generate and data.file is required",
                    path.display()
                )))
            }
        };
        let preprocess = e.opt("data", "preprocess")?.unwrap_or_default();
        let metric = MetricConfig {
            mode: e.opt::<MetricMode>("metric", "mode")?.unwrap_or_default(),
            sphere_scale: e.opt("metric", "sphere_scale")?,
        };
        let cache = match e.take("metric", "cache") {
            None => Toggle::Auto,
            Some((line, v)) => {
                toggle(&v).ok_or_else(|| Error::parse(path, line, format!("bad cache value `{v}`")))?
            }
        };
        let kernel = match e.take("masc", "kernel") {
            None => KernelEval::Auto,
            Some((line, v)) => match v.as_str() {
                "auto" => KernelEval::Auto,
                "exact" => KernelEval::Exact,
                "table" => KernelEval::Table,
                _ => return Err(Error::parse(path, line, format!("bad kernel value `{v}`"))),
            },
        };
        let oracle = match e.take("masc", "oracle") {
            None => OracleKind::GroundTruth,
            Some((line, v)) => match v.as_str() {
                "ground-truth" => OracleKind::GroundTruth,
                "human" => OracleKind::Human,
                _ => return Err(Error::parse(path, line, format!("unknown oracle `{v}`"))),
            },
        };
        let masc = MascConfig {
            degree: e.req("masc", "n")?,
            theta: e.req("masc", "theta")?,
            eta_start: e.req("masc", "eta_start")?,
            eta_step: e.req("masc", "eta_step")?,
            eta_max: e.opt("masc", "eta_max")?,
            min_component: e.opt("masc", "p")?.unwrap_or(1),
            neighbors: e.opt("masc", "k")?.unwrap_or(1),
            max_queries: e.opt("masc", "max_queries")?,
            record_levels: true,
        };
        masc.validate()?;
        let output_dir = base.join(e.opt::<String>("output", "dir")?.unwrap_or_else(|| "out".into()));
        let write_field = match e.take("output", "field") {
            None => false,
            Some((line, v)) => match toggle(&v) {
                Some(Toggle::On) => true,
                Some(Toggle::Off) => false,
                _ => return Err(Error::parse(path, line, format!("bad field value `{v}`"))),
            },
        };
        if let Some(((section, key), (line, _))) = e.map.into_iter().next() {
            return Err(Error::parse(path, line, format!("unknown key {section}.{key}")));
        }
        Ok(Self {
            source,
            preprocess,
            metric,
            cache,
            kernel,
            masc,
            oracle,
            output_dir,
            write_field,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = io::read_to_string(path).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
            other => other,
        })?;
        Self::parse(&text, path)
    }

    pub fn load_data(&self) -> Result<Dataset> {
        match &self.source {
            DataSource::Generate(spec) => spec.generate(),
            DataSource::File(path) => io::read_dataset(path),
        }
    }
}

/// Data embedded in its metric, with the support field computed.
pub struct Prepared {
    pub data: Dataset,
    pub provider: DistanceProvider,
    pub field: SupportField,
}

pub fn prepare(
    data: Dataset,
    preprocess: Preprocess,
    metric: &MetricConfig,
    cache: Toggle,
    kernel: KernelEval,
    degree: usize,
) -> Result<Prepared> {
    let features = preprocess.apply(&data.cloud)?;
    let mut provider = DistanceProvider::embed(&features, metric)?;
    let m = provider.len();
    let use_cache = match cache {
        Toggle::On => true,
        Toggle::Off => false,
        Toggle::Auto => (AUTO_CACHE_RANGE.0..=AUTO_CACHE_RANGE.1).contains(&m),
    };
    if use_cache {
        provider = provider.with_cache();
    }
    let k = LocalizedKernel::new(degree);
    let tabulate = match kernel {
        KernelEval::Exact => false,
        KernelEval::Table => true,
        KernelEval::Auto => m >= AUTO_TABLE_MIN,
    };
    let field = if tabulate {
        compute_field(&provider, &k.tabulate())
    } else {
        compute_field(&provider, &k)
    };
    Ok(Prepared {
        data,
        provider,
        field,
    })
}

pub struct ExperimentOutcome {
    pub prepared: Prepared,
    pub result: Classification,
    pub accuracy: Option<f64>,
    pub curve: Vec<BudgetPoint>,
}

/// Run with the ground-truth oracle (the only batch oracle).
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    if config.oracle == OracleKind::Human {
        return Err(Error::Config(
            "oracle = human needs the labeling service (`masc serve`)".into(),
        ));
    }
    let data = config.load_data()?;
    let truth = data.truth.clone().ok_or(Error::MissingTruth)?;
    let prepared = prepare(
        data,
        config.preprocess,
        &config.metric,
        config.cache,
        config.kernel,
        config.masc.degree,
    )?;
    let mut oracle = GroundTruth::new(&truth);
    run_prepared(config, prepared, &mut oracle, Some(&truth))
}

pub fn run_prepared(
    config: &ExperimentConfig,
    prepared: Prepared,
    oracle: &mut dyn Oracle,
    truth: Option<&[Label]>,
) -> Result<ExperimentOutcome> {
    let result = classify(&config.masc, &prepared.provider, &prepared.field, oracle)?;
    let (accuracy, curve) = match truth {
        Some(t) => (
            Some(metrics::accuracy(&result.labels.labels, t)?),
            budget_curve(&result.levels, &prepared.provider, config.masc.neighbors, t)?,
        ),
        None => (None, Vec::new()),
    };
    Ok(ExperimentOutcome {
        prepared,
        result,
        accuracy,
        curve,
    })
}

pub fn format_curve(curve: &[BudgetPoint]) -> String {
    let mut out = String::from("eta,queries,accuracy\n");
    for p in curve {
        out.push_str(&format!("{},{},{}\n", p.eta, p.queries, p.accuracy));
    }
    out
}

/// Write labels.csv, queries.csv, budget_curve.csv, and (with ground truth)
/// metrics.txt and confusion.csv; field.txt on request. Returns the paths.
pub fn write_artifacts(config: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<Vec<PathBuf>> {
    let dir = &config.output_dir;
    let mut written = Vec::new();
    let mut put = |name: &str, body: String| -> Result<()> {
        let p = dir.join(name);
        io::write_string(&p, &body)?;
        written.push(p);
        Ok(())
    };
    let r = &outcome.result;
    put("labels.csv", io::format_labels(&r.labels))?;
    put("queries.csv", io::format_query_log(&r.state.log))?;
    put("budget_curve.csv", format_curve(&outcome.curve))?;
    if let Some(truth) = &outcome.prepared.data.truth {
        let mut report = metrics::report(&r.labels.labels, truth, r.queries())?;
        report.push_str(&format!(
            "retained: {}\nlevels: {}\nfinal_eta: {}\nstop: {:?}\n",
            r.state.retained.len(),
            r.state.levels,
            r.state.eta,
            r.stop
        ));
        put("metrics.txt", report)?;
        put("confusion.csv", metrics::confusion(&r.labels.labels, truth)?.to_csv())?;
    }
    if config.write_field {
        let mask = outcome.prepared.field.threshold_mask(config.masc.theta)?;
        put("field.txt", io::format_field(&outcome.prepared.field, &mask))?;
    }
    Ok(written)
}
