use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mobimetrics::config::{KeyValues, PipelineConfig};
use mobimetrics::pipeline::{self, Stage};
use mobimetrics::synth::{self, WorldConfig};
use mobimetrics::{Result, VERSION};

#[derive(Parser)]
#[command(name = "mobimetrics", version = VERSION, about = "Economic indicators from positioning and map-query data")]
struct Cli {
    /// Worker threads for stage-internal parallelism (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Paths {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world with ground truth.
    Synth(Paths),
    /// Parse and validate inputs; write the reject report.
    Ingest(Paths),
    /// Continuous-user cohorts per report month.
    Cohort(Paths),
    /// Employee and consumer counts per AOI-month, daily foot traffic.
    Presence(Paths),
    /// Employment, consumer and consumption-trend indices.
    Index(Paths),
    /// Foot traffic regressions for every commercial venue.
    Fit(Paths),
    /// Rolling one-step box-office forecasts.
    Nowcast(Paths),
    /// Revenue anomaly report for the suspected venue group.
    Detect(Paths),
    /// Every stage; box-office stages run when their inputs are configured.
    All(Paths),
}

fn run_stages(paths: &Paths, stages: &[Stage]) -> Result<()> {
    let cfg = PipelineConfig::load(&paths.config)?;
    let out = paths.out.clone().unwrap_or_else(|| cfg.out.clone());
    pipeline::run(&cfg, &stages.iter().copied().collect::<BTreeSet<_>>(), &out)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(p) => {
            let kv = KeyValues::load(&p.config)?;
            let cfg = WorldConfig::from_kv(&kv)?;
            let out = p.out.clone().unwrap_or_else(|| kv.base_dir().join("data"));
            let world = synth::generate(&cfg)?;
            synth::write_world(&world, &out)
        }
        Command::Ingest(p) => run_stages(p, &[Stage::Ingest]),
        Command::Cohort(p) => run_stages(p, &[Stage::Cohort]),
        Command::Presence(p) => run_stages(p, &[Stage::Presence]),
        Command::Index(p) => run_stages(p, &[Stage::Index]),
        Command::Fit(p) => run_stages(p, &[Stage::Fit]),
        Command::Nowcast(p) => run_stages(p, &[Stage::Nowcast]),
        Command::Detect(p) => run_stages(p, &[Stage::Detect]),
        Command::All(p) => {
            let cfg = PipelineConfig::load(&p.config)?;
            let mut stages = vec![Stage::Ingest, Stage::Cohort, Stage::Presence, Stage::Index, Stage::Fit];
            if cfg.boxoffice.is_some() && cfg.platform.is_some() {
                if cfg.forecast_start.is_some() {
                    stages.push(Stage::Nowcast);
                }
                if cfg.venue_groups.is_some() && cfg.train_first.is_some() && cfg.train_last.is_some() {
                    stages.push(Stage::Detect);
                }
            }
            let out = p.out.clone().unwrap_or_else(|| cfg.out.clone());
            pipeline::run(&cfg, &stages.into_iter().collect(), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
