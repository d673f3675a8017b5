use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use regret_lab::classes::regret_weights_from_harmonic;
use regret_lab::dynamics::Algorithm;
use regret_lab::regularizer::RegularizerKind;
use regret_lab::runner::config::{PerPlayer, ScheduleMode};
use regret_lab::runner::experiment::fmt_g;
use regret_lab::runner::{
    catalog, classify_game, load_game, regret_scatter, run_experiment, RunConfig, TrajectoryFamily,
};
use regret_lab::{LabError, Result};

/// Optimistic no-regret dynamics in normal-form games.
///
/// Log verbosity follows RUST_LOG (e.g. RUST_LOG=info).
#[derive(Parser)]
#[command(name = "regret-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run OMD or OFTRL and write a CSV trace plus a JSON summary.
    Run(RunArgs),
    /// Report constant-sum and harmonic structure of a game.
    Classify {
        /// Builtin name or path to a game JSON file.
        #[arg(long)]
        game: String,
    },
    /// List builtin games.
    Catalog,
    /// Total against weighted regret over many seeded trajectories.
    Scatter(ScatterArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON or TOML run config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    game: Option<String>,
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    reg: Option<RegularizerKind>,
    #[arg(long)]
    delta: Option<f64>,
    /// One rate for all players or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<PerPlayer>,
    /// constant | inverse-sqrt
    #[arg(long)]
    schedule: Option<ScheduleMode>,
    #[arg(long)]
    eta_floor: Option<PerPlayer>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// none | geometric:<rho>,<magnitude> | burst:<start>,<width>,<magnitude>
    #[arg(long)]
    corruption: Option<String>,
    /// Per-player probabilities separated by ';', e.g. "0.9,0.1;0.5,0.5".
    #[arg(long)]
    init: Option<String>,
    /// uniform | harmonic | comma-separated weights
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory for trace.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScatterArgs {
    #[arg(long)]
    game: String,
    /// harmonic | uniform | comma-separated weights
    #[arg(long, default_value = "harmonic")]
    weights: String,
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    /// random-pure | random-mixed | omd:<eta>
    #[arg(long, default_value = "random-pure")]
    family: TrajectoryFamily,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => {
                let missing: Vec<&str> = [
                    ("--game", self.game.is_none()),
                    ("--eta", self.eta.is_none()),
                    ("--iters", self.iters.is_none()),
                ]
                .iter()
                .filter(|(_, m)| *m)
                .map(|(f, _)| *f)
                .collect();
                if !missing.is_empty() {
                    return Err(LabError::Config(format!(
                        "without --config these flags are required: {}",
                        missing.join(", ")
                    )));
                }
                RunConfig::new(self.game.clone().unwrap_or_default(), 0.1, 1)
            }
        };
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {
                $(if self.$field.is_some() { cfg.$field = self.$field; })*
            };
        }
        set!(game, algo, reg, eta, schedule, iters, seed, corruption, weights);
        set_opt!(delta, eta_floor, init, window, tol, out);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn scatter(args: ScatterArgs) -> Result<()> {
    let (game, source) = load_game(&args.game)?;
    let weights = match args.weights.as_str() {
        "harmonic" => {
            let mu = catalog::preset_weights(&source.name)
                .or_else(|| regret_lab::classes::solve_harmonic_weights(&game))
                .ok_or_else(|| LabError::Config(format!("no harmonic weights found for {}", source.name)))?;
            regret_weights_from_harmonic(&mu).0
        }
        "uniform" => regret_lab::classes::RegretWeights::uniform(game.num_players()),
        list => regret_lab::classes::RegretWeights::new(
            list.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| LabError::Config(format!("bad weight {x:?}"))))
                .collect::<Result<_>>()?,
        )?,
    };
    let points = regret_scatter(&game, &weights, args.family, args.rounds, args.seeds)?;
    let negative = points.iter().filter(|p| p.total_regret < 0.0).count();
    let min_weighted = points.iter().map(|p| p.weighted_total).fold(f64::INFINITY, f64::min);
    log::info!(
        "{negative} of {} trajectories with negative total regret; smallest weighted total {min_weighted}",
        points.len()
    );
    let mut text = String::from("seed,total_regret,weighted_total\n");
    for p in &points {
        text.push_str(&format!("{},{},{}\n", p.seed, fmt_g(p.total_regret), fmt_g(p.weighted_total)));
    }
    match args.out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| LabError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => emit(&text)?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.into_config()?;
            let out = run_experiment(&cfg)?;
            emit(&(serde_json::to_string_pretty(&out.summary).expect("summary serializes") + "\n"))?;
            if let Some((trace, summary)) = out.files {
                log::info!("wrote {} and {}", trace.display(), summary.display());
            }
        }
        Command::Classify { game } => {
            let (g, _) = load_game(&game)?;
            let report = classify_game(&g)?;
            emit(&(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
        }
        Command::Catalog => {
            let listing: String = catalog::ENTRIES
                .iter()
                .map(|e| format!("{:<24} {}\n", e.name, e.description))
                .collect();
            emit(&listing)?;
        }
        Command::Scatter(args) => scatter(args)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
