//! `figui` command line. Every subcommand works sample by sample, where a
//! sample is one directory named by its id:
//!
//! ```text
//! raw        <id>/figma.json  <id>/images/*  [<id>/definitions.json]
//! refined    <id>/figma.json  <id>/assets/*  <id>/refine_report.json
//! generated  <id>/index.html  <id>/ir.json   <id>/assets/*  [<id>/agent_trace.json]
//! rendered   <id>/screenshot.png
//! designs    <id>/design.png
//! ```
//!
//! Exit codes: 0 success, 1 some samples failed, 2 configuration or
//! environment error.

mod commands;
mod manifest;

pub use manifest::{RunManifest, SampleRecord, StageRecord, Status};

use crate::ablate::AblationKind;
use crate::codegen::CodegenMode;
use crate::config::{Config, ConfigError};
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_ENV: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "figui", version, about = "Figma refinement, HTML/Tailwind generation and UI code metrics")]
pub struct Cli {
    /// Worker threads (default: config `jobs`, else all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for every random choice (default: config `seed`)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Where to write the run manifest
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Faithful,
    Responsive,
}

impl From<ModeArg> for CodegenMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Faithful => CodegenMode::FaithfulAbsolute,
            ModeArg::Responsive => CodegenMode::ResponsiveFlow,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Clean raw Figma exports and localise their assets
    Refine {
        input: PathBuf,
        output: PathBuf,
        /// Print what would be done and write nothing
        #[arg(long)]
        dry_run: bool,
    },
    /// Write ablated copies of each sample, one directory per kind
    Ablate {
        input: PathBuf,
        output: PathBuf,
        /// geometry, style, image, hierarchy or text (repeatable; default all)
        #[arg(long = "kind")]
        kinds: Vec<AblationKind>,
    },
    /// Stratified test-set candidate worklist from a labels CSV
    Sample {
        labels: PathBuf,
        #[arg(long)]
        total: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Heuristic filtering and embedding deduplication of raw pages
    Curate {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON object mapping sample id to its embedding
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Embed `<id>/screenshot.png` with the configured sidecar instead
        #[arg(long, conflicts_with = "embeddings")]
        with_sidecar: bool,
    },
    /// Build the intermediate representation of refined samples
    Ir { input: PathBuf, output: PathBuf },
    /// Generate HTML from refined samples (or their ir.json)
    Generate {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Run the critic/refiner loop on the draft
        #[arg(long)]
        agent: bool,
    },
    /// Same as `generate --agent`
    Agent {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Screenshot generated pages with the configured renderer
    Render {
        input: PathBuf,
        output: PathBuf,
        /// Design width when `<id>/ir.json` is absent
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        height: Option<f64>,
    },
    /// Metrics CSV for generated pages paired with design images
    Evaluate {
        html_dir: PathBuf,
        designs_dir: PathBuf,
        out_csv: PathBuf,
        #[arg(long)]
        with_ves: bool,
    },
}

/// Resolved global settings shared by the commands.
pub struct Ctx {
    pub config: Config,
    pub seed: u64,
    pub jobs: usize,
    pub manifest: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<Ctx, ConfigError> {
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    config.apply_env(|k| std::env::var(k).ok());
    let seed = cli.seed.unwrap_or(config.seed);
    config.seed = seed;
    let jobs = cli.jobs.or(config.jobs).unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(ConfigError::Invalid("--jobs must be positive".into()));
    }
    Ok(Ctx { config, seed, jobs, manifest: cli.manifest.clone() })
}

pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ENV } else { EXIT_OK };
        }
    };
    let ctx = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ENV;
        }
    };
    match commands::dispatch(&cli.command, &ctx) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ENV
        }
    }
}

pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    run_with(std::env::args_os())
}
