use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hardy_sobolev::cli::{run, Experiment, ExperimentConfig, Format};

#[derive(Parser)]
#[command(
    name = "hardy-sobolev",
    version,
    about = "Weighted Hardy and Hardy–Sobolev experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp Hardy constant p^p/(α+k)^p.
    Constant(Common),
    /// Hardy quotient of the radial ε-family along an ε ladder.
    EpsSweep(Common),
    /// Hardy–Sobolev quotient of the product family at β = p.
    ProductSweep(Common),
    /// Compare a function with its double symmetrization.
    Symmetrize(Common),
    /// Minimize the Hardy–Sobolev quotient.
    Minimize(Common),
    /// Rayleigh quotients of v(x₁)w(x₂/λ) on a strip.
    SplitDemo(Common),
    /// Randomized rearrangement property suite.
    Properties(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Existing directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Grid-doubling level applied to every cell count.
    #[arg(long)]
    refine: Option<u32>,
    /// Total dimension N.
    #[arg(long = "dim")]
    n: Option<usize>,
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(short, long)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated ε ladder.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Comma-separated λ ladder.
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::Constant(c) => (Experiment::Constant, c),
            Command::EpsSweep(c) => (Experiment::EpsSweep, c),
            Command::ProductSweep(c) => (Experiment::ProductSweep, c),
            Command::Symmetrize(c) => (Experiment::Symmetrize, c),
            Command::Minimize(c) => (Experiment::Minimize, c),
            Command::SplitDemo(c) => (Experiment::SplitDemo, c),
            Command::Properties(c) => (Experiment::Properties, c),
        }
    }
}

fn load(mode: Experiment, flags: Common) -> Result<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => ExperimentConfig::from_path(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    cfg.mode = mode;
    if let Some(out) = flags.out {
        cfg.out = out;
    }
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    if let Some(f) = flags.format {
        cfg.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(r) = flags.refine {
        cfg.refine = r;
    }
    let pc = &mut cfg.params;
    pc.n = flags.n.or(pc.n);
    pc.k = flags.k.or(pc.k);
    pc.p = flags.p.or(pc.p);
    pc.alpha = flags.alpha.or(pc.alpha);
    pc.beta = flags.beta.or(pc.beta);
    pc.q = flags.q.or(pc.q);
    cfg.eps = flags.eps.or(cfg.eps);
    cfg.lambda = flags.lambda.or(cfg.lambda);
    Ok(cfg)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let (mode, flags) = Cli::parse().command.split();
    let cfg = load(mode, flags)?;
    let outcome = run(&cfg).with_context(|| format!("{} failed", mode.name()))?;
    for s in &outcome.summaries {
        println!("{s}");
    }
    for a in &outcome.artifacts {
        log::info!("wrote {}", a.display());
    }
    Ok(())
}
