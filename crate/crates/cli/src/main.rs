//! `masc`: batch experiments, synthetic data, spectra and the labeling service.
//!
//! Exit codes: 0 success, 1 other failure, 2 bad config or arguments,
//! 3 missing data file, 4 ground truth required but absent,
//! 5 nothing to extend from.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use masc_core::experiment::{self, ExperimentConfig, OracleKind};
use masc_core::io;
use masc_core::signal::{self, PointSourceModel};
use masc_core::synth::SyntheticSpec;
use masc_core::{Error, LocalizedKernel};
use masc_service::api::CreateSession;
use masc_service::{AppState, ServiceConfig};

#[derive(Parser)]
#[command(name = "masc", version, about = "Localized kernels and multiscale active clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment with the ground-truth oracle and write its artifacts.
    Run { config: PathBuf },
    /// Write a synthetic data set as CSV, e.g. `two-moons:m=500,seed=3`.
    Gen {
        spec: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Reconstruct `|σ_n|` from moments and report its peaks.
    Spectrum {
        /// Moment file (`l re im` per line).
        #[arg(conflicts_with = "sources", required_unless_present = "sources")]
        moments: Option<PathBuf>,
        /// Point sources `x:a,x:a,...` instead of a moment file.
        #[arg(long)]
        sources: Option<String>,
        /// Degree for `--sources`.
        #[arg(short = 'n', long, default_value_t = 64)]
        degree: usize,
        /// Grid size (default 32 points per unit of degree).
        #[arg(long)]
        grid: Option<usize>,
        /// Normalized peak threshold (default: 0.1 of the normalized maximum).
        #[arg(long)]
        threshold: Option<f64>,
        /// Write `x value` lines here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve the labeling API.
    Serve {
        /// Default session config; when given, one session is started at boot.
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(short, long, default_value_t = 8080)]
        port: u16,
        /// Directory for per-session write-ahead query logs.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parse { .. } => 2,
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 3,
        Error::MissingTruth => 4,
        Error::NothingToExtend => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("masc: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Run { config } => run(&config),
        Command::Gen { spec, output } => gen(&spec, &output),
        Command::Spectrum {
            moments,
            sources,
            degree,
            grid,
            threshold,
            output,
        } => spectrum(moments.as_deref(), sources.as_deref(), degree, grid, threshold, output.as_deref()),
        Command::Serve {
            config,
            host,
            port,
            log_dir,
        } => serve(config.as_deref(), &host, port, log_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("masc: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// `MASC_THREADS` pins the rayon pool size.
fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MASC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MASC_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(path: &Path) -> Result<(), Error> {
    let config = ExperimentConfig::load(path)?;
    if config.oracle == OracleKind::Human {
        return Err(Error::Config(format!(
            "{}: oracle = human; start it with `masc serve {}`",
            path.display(),
            path.display()
        )));
    }
    let outcome = experiment::run(&config)?;
    let written = experiment::write_artifacts(&config, &outcome)?;
    let r = &outcome.result;
    println!("points:   {}", outcome.prepared.data.cloud.len());
    println!("retained: {}", r.state.retained.len());
    println!("queries:  {}", r.queries());
    println!("levels:   {}", r.state.levels);
    println!("stop:     {:?} at eta {}", r.stop, r.state.eta);
    if let Some(a) = outcome.accuracy {
        println!("accuracy: {a:.4}");
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn gen(spec: &str, output: &Path) -> Result<(), Error> {
    let data = spec.parse::<SyntheticSpec>()?.generate()?;
    io::write_string(output, &io::format_dataset(&data))?;
    println!("wrote {} points to {}", data.cloud.len(), output.display());
    Ok(())
}

fn parse_sources(s: &str) -> Result<PointSourceModel, Error> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let pair = item
            .split_once(':')
            .and_then(|(x, a)| Some((x.trim().parse().ok()?, a.trim().parse().ok()?)));
        out.push(pair.map(|(x, a): (f64, f64)| (a, x)).ok_or_else(|| Error::Config(format!("bad source `{item}`, expected x:amplitude")))?);
    }
    PointSourceModel::new(&out)
}

fn spectrum(
    moments: Option<&Path>,
    sources: Option<&str>,
    degree: usize,
    grid: Option<usize>,
    threshold: Option<f64>,
    output: Option<&Path>,
) -> Result<(), Error> {
    let moments = match (moments, sources) {
        (Some(p), _) => io::read_moments(p)?,
        (None, Some(s)) => signal::moments_from_sources(&parse_sources(s)?, degree)?,
        (None, None) => return Err(Error::Config("need a moment file or --sources".into())),
    };
    let n = moments.degree();
    let kernel = LocalizedKernel::new(n);
    let grid = match grid {
        Some(len) => signal::uniform_grid(len),
        None => signal::default_grid(n),
    };
    let s = signal::reconstruct_spectrum(&moments, &kernel, &grid)?;
    let threshold = threshold.unwrap_or_else(|| signal::default_threshold(&s));
    let peaks = signal::detect_peaks(&s, threshold)?;
    if let Some(p) = output {
        io::write_string(p, &io::format_spectrum(&s))?;
    }
    println!("degree {n}, {} grid points, threshold {threshold:.4}", s.len());
    println!("{} peaks", peaks.len());
    for (x, h) in peaks.locations.iter().zip(&peaks.heights) {
        println!("{x:.6} {h:.6}");
    }
    Ok(())
}

fn serve(config: Option<&Path>, host: &str, port: u16, log_dir: Option<PathBuf>) -> Result<(), Error> {
    let default = config.map(ExperimentConfig::load).transpose()?;
    let boot = default.is_some();
    let state = AppState::new(ServiceConfig { default, log_dir });
    let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Config(format!("runtime: {e}")))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Error::Config(format!("bind {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Error::Config(e.to_string()))?;
        println!("listening on http://{addr}");
        if boot {
            let s = state
                .create(CreateSession::default())
                .await
                .map_err(|e| Error::Config(e.to_string()))?;
            println!("session {}", s.id);
        }
        masc_service::serve(listener, state)
            .await
            .map_err(|e| Error::Config(format!("server: {e}")))
    })
}
