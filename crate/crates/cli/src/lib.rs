//! Experiment runner for the `ffkakeya` engine.
//!
//! [`run`] executes one named experiment inside a worker pool of the
//! requested width and assembles a [`report::Report`]. The binary is a thin
//! wrapper that parses flags into an [`ExperimentConfig`], writes the report
//! and maps the outcome to an exit code.

pub mod experiments;
pub mod report;

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde::Serialize;

use ffkakeya::{Error, FieldSpec};
use report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Gauss,
    Levelset,
    Sphere,
    Heisenberg,
    Regulus,
    Threereg,
    Inequalities,
    Refine,
    Harvest,
    Probe,
    All,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Gauss => "gauss",
            Experiment::Levelset => "levelset",
            Experiment::Sphere => "sphere",
            Experiment::Heisenberg => "heisenberg",
            Experiment::Regulus => "regulus",
            Experiment::Threereg => "threereg",
            Experiment::Inequalities => "inequalities",
            Experiment::Refine => "refine",
            Experiment::Harvest => "harvest",
            Experiment::Probe => "probe",
            Experiment::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameChoice {
    Model,
    Random,
}

impl FrameChoice {
    pub fn name(self) -> &'static str {
        match self {
            FrameChoice::Model => "model",
            FrameChoice::Random => "random",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "ffkakeya", version, about = "Exact finite-field incidence experiments")]
pub struct ExperimentConfig {
    /// Experiment to run.
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Field characteristic.
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    /// Extension degree (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub degree: u8,
    /// Diagonal entries of the quadratic form, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub form: Option<Vec<u32>>,
    /// Model frame or a seeded random one.
    #[arg(long, value_enum, default_value_t = FrameChoice::Model)]
    pub frame: FrameChoice,
    /// Refinement depth N.
    #[arg(long = "n-refine", default_value_t = 3)]
    pub n_refine: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Worker threads; 0 lets the pool pick.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            p: 3,
            degree: 1,
            form: None,
            frame: FrameChoice::Model,
            n_refine: 3,
            seed: 42,
            jobs: 0,
            out: None,
            format: Format::Json,
        }
    }

    fn field(&self) -> ffkakeya::Result<FieldSpec> {
        match self.degree {
            1 => FieldSpec::prime(self.p),
            2 => FieldSpec::quadratic(self.p),
            d => Err(Error::Usage(format!("unsupported extension degree {d}"))),
        }
    }
}

/// Exit codes of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const RESOURCE: i32 = 3;
}

/// Exit code for an engine error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource(_) => exit::RESOURCE,
        _ => exit::USAGE,
    }
}

pub fn run(config: &ExperimentConfig) -> ffkakeya::Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Resource(format!("worker pool: {e}")))?;
    let params = experiments::Params {
        field: config.field()?,
        form: config.form.clone(),
        frame: config.frame,
        n_refine: config.n_refine,
        seed: config.seed,
    };
    let results = pool.install(|| match config.experiment {
        Experiment::Gauss => experiments::gauss(&params),
        Experiment::Levelset => experiments::levelset(&params),
        Experiment::Sphere => experiments::sphere(&params),
        Experiment::Heisenberg => experiments::heisenberg(&params),
        Experiment::Regulus => experiments::regulus(&params),
        Experiment::Threereg => experiments::threereg(&params),
        Experiment::Inequalities => experiments::inequalities(&params),
        Experiment::Refine => experiments::refine(&params),
        Experiment::Harvest => experiments::harvest(&params),
        Experiment::Probe => experiments::probe(&params),
        Experiment::All => experiments::all(&params),
    })?;
    let config_echo = serde_json::to_value(config).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(Report::new(config_echo, timestamp(), results))
}

fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    format!("unix:{secs}")
}
