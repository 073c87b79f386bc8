use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biarcknot::experiment::{run, Command, ExperimentConfig, Settings};
use biarcknot::Error;

#[derive(Parser)]
#[command(name = "biarcknot", version, about = "Biarc interpolation and tangent-point energy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Discrete (gated and ungated) and continuous energies of one curve
    Energy(Opts),
    /// Error of the discrete energy against the continuous one over an n sweep
    Converge(Opts),
    /// Ropelength proxy over an n sweep against the thickness-based ropelength
    Ropelength(Opts),
    /// Simulated annealing of a perturbed configuration
    Anneal(Opts),
    /// Mollification distances over an ε = 1/k sweep
    Mollify(Opts),
}

#[derive(Args)]
struct Opts {
    /// TOML file with the same keys as the flags (underscores for dashes)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset curve: circle, ellipse, torus_knot
    #[arg(long)]
    curve: Option<String>,
    /// Comma-separated curve parameters
    #[arg(long, value_delimiter = ',')]
    params: Option<Vec<f64>>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated, strictly increasing
    #[arg(long, value_delimiter = ',')]
    n_sweep: Option<Vec<usize>>,
    /// Mollifier widths ε = 1/k
    #[arg(long, value_delimiter = ',')]
    k_sweep: Option<Vec<usize>>,
    /// uniform | jitter:ρ
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Quadrature / search grid (power of two)
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    strict_sequential: bool,
    /// Annealing steps
    #[arg(long)]
    steps: Option<usize>,
    /// Relative radial noise applied to the initial annealing configuration
    #[arg(long)]
    perturb: Option<f64>,
    /// Junction file with the initial annealing configuration
    #[arg(long)]
    init: Option<PathBuf>,
    /// Where to write the best annealed configuration
    #[arg(long)]
    junctions_out: Option<PathBuf>,
}

impl Opts {
    fn into_settings(self) -> (Option<PathBuf>, Settings) {
        let s = Settings {
            curve: self.curve,
            params: self.params,
            q: self.q,
            n: self.n,
            n_sweep: self.n_sweep,
            k_sweep: self.k_sweep,
            partition: self.partition,
            seed: self.seed,
            grid: self.grid,
            out: self.out,
            format: self.format,
            strict_sequential: self.strict_sequential.then_some(true),
            steps: self.steps,
            perturb: self.perturb,
            init: self.init,
            junctions_out: self.junctions_out,
        };
        (self.config, s)
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (command, opts) = match cli.command {
        Sub::Energy(o) => (Command::Energy, o),
        Sub::Converge(o) => (Command::Converge, o),
        Sub::Ropelength(o) => (Command::Ropelength, o),
        Sub::Anneal(o) => (Command::Anneal, o),
        Sub::Mollify(o) => (Command::Mollify, o),
    };
    let (config, flags) = opts.into_settings();
    let base = match config {
        Some(path) => Settings::from_file(&path)?,
        None => Settings::default(),
    };
    let cfg = ExperimentConfig::resolve(command, base.overridden_by(flags))?;
    let text = run(&cfg)?;
    if cfg.out.is_none() {
        print!("{text}");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
