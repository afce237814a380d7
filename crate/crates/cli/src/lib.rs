//! Command-line front end: simulate, run crossing experiments, render
//! snapshots, run the property suite, scan sprinkling.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rkout::connectivity::SquarePaths;
use rkout::experiment::{
    run_experiment, run_sprinkling_scan, Corruption, ExperimentConfig, SprinkleScanConfig, THREADS_ENV,
};
use rkout::properties::{run_property_suite, SuiteConfig};
use rkout::snapshot::Snapshot;
use rkout::{Alpha, LatticeConfig, RngStream};

pub mod render;

/// Hoeffding residual a crossing run must reach to PASS.
pub const PASS_LOG10_RESIDUAL: f64 = -20.0;

#[derive(Debug, Parser)]
#[command(name = "rkout", version, about = "Reinforced k-out percolation on the square lattice")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one configuration and write a snapshot.
    Simulate(SimulateArgs),
    /// Estimate the probability that a coarse edge is n-open.
    Crossing(CrossingArgs),
    /// Draw a classified snapshot as SVG.
    Render(RenderArgs),
    /// Check invariants and distributional properties.
    Properties(PropertiesArgs),
    /// Crossing frequencies of sprinkled certainly occupied sets.
    Sprinkle(SprinkleArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `inf` or a positive number.
    #[arg(long, default_value = "inf")]
    pub alpha: Alpha,
    #[arg(long, default_value_t = 4)]
    pub rounds: u32,
    /// Classification round; must equal --rounds when given.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, default_value_t = 80)]
    pub width: usize,
    #[arg(long, default_value_t = 40)]
    pub height: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Store weights only, without classification.
    #[arg(long)]
    pub raw: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossingArgs {
    #[arg(long, default_value = "inf")]
    pub alpha: Alpha,
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 80)]
    pub width: usize,
    #[arg(long, default_value_t = 40)]
    pub height: usize,
    /// Coarse cells are 2*scale by scale.
    #[arg(long, default_value_t = 40)]
    pub scale: usize,
    /// Region available to the end-square crossings.
    #[arg(long, value_enum, default_value_t = SquarePathsArg::Central)]
    pub square_paths: SquarePathsArg,
    /// Fixed corruption probability instead of p_star (finite alpha only).
    #[arg(long)]
    pub corruption: Option<f64>,
    #[arg(long, default_value_t = rkout::experiment::ONE_DEPENDENT_THRESHOLD)]
    pub threshold: f64,
    /// Summary JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-trial CSV path.
    #[arg(long)]
    pub trial_table: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SquarePathsArg {
    Central,
    Square,
}

impl From<SquarePathsArg> for SquarePaths {
    fn from(a: SquarePathsArg) -> Self {
        match a {
            SquarePathsArg::Central => SquarePaths::Central,
            SquarePathsArg::Square => SquarePaths::Square,
        }
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Snapshot written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Margin of the central rectangle; the classification round by default.
    #[arg(long)]
    pub margin: Option<usize>,
    #[arg(long, default_value_t = 40)]
    pub scale: usize,
}

#[derive(Debug, Args)]
pub struct PropertiesArgs {
    /// Inclusive seed range `a..b`.
    #[arg(long, default_value = "0..99", value_parser = parse_range)]
    pub seeds: Range<u64>,
    /// Torus side lengths, comma separated.
    #[arg(long, default_value = "16", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub rounds: u32,
    /// Exact invariants only.
    #[arg(long)]
    pub no_stats: bool,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct SprinkleArgs {
    #[arg(long, default_value = "0,0.01,0.02,0.05,0.1", value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long, default_value = "16,32,64", value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub horizon: u32,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

/// Inclusive seed range: `a..b` and `a..=b` both cover `a` through `b`.
pub fn parse_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if a > b || b == u64::MAX {
        return Err(format!("bad seed range {a}..{b}"));
    }
    Ok(a..b + 1)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Crossing(a) => crossing(a),
        Command::Render(a) => render_cmd(a),
        Command::Properties(a) => properties(a),
        Command::Sprinkle(a) => sprinkle(a),
    }
}

fn simulate(a: SimulateArgs) -> anyhow::Result<ExitCode> {
    if let Some(n) = a.n {
        if n != a.rounds {
            bail!("--n {n} must equal --rounds {}; classification happens at the final round", a.rounds);
        }
    }
    let config = LatticeConfig::torus(a.width, a.height).with_k(a.k);
    let snap = Snapshot::simulate(config, a.alpha, a.rounds, RngStream::new(a.seed, a.trial), !a.raw)?;
    write_output(a.out.as_ref(), &snap.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}

fn crossing(a: CrossingArgs) -> anyhow::Result<ExitCode> {
    let mut config = ExperimentConfig::reference(a.alpha, a.n, a.trials, a.seed);
    config.lattice = LatticeConfig::torus(a.width, a.height);
    config.scale = a.scale;
    config.square_paths = a.square_paths.into();
    config.threshold = a.threshold;
    if let Some(p) = a.corruption {
        if a.alpha.is_infinite() {
            bail!("--corruption applies to finite alpha only");
        }
        config.corruption = Corruption::Fixed(p);
    }
    let run = run_experiment(&config, a.threads)?;
    let json = run.summary.to_json()?;
    if let Some(path) = &a.trial_table {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        run.write_trial_table(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &a.out {
        std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{json}");
    let s = &run.summary;
    let pass = s.passes(PASS_LOG10_RESIDUAL);
    println!(
        "{} p_hat = {:.4} ({}/{}) vs threshold {}, log10 residual: normal {}, hoeffding {}",
        if pass { "PASS" } else { "FAIL" },
        s.p_hat,
        s.successes,
        s.trials,
        s.threshold,
        fmt_log10(s.log10_normal),
        fmt_log10(s.log10_hoeffding)
    );
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn fmt_log10(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.2}"),
        Some(_) => "-inf".into(),
        None => "undefined".into(),
    }
}

fn render_cmd(a: RenderArgs) -> anyhow::Result<ExitCode> {
    let snap = Snapshot::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let svg = render::render_svg(&snap, a.margin, a.scale)?;
    std::fs::write(&a.out, svg).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn properties(a: PropertiesArgs) -> anyhow::Result<ExitCode> {
    let report = run_property_suite(&SuiteConfig {
        seeds: a.seeds,
        sizes: a.sizes,
        rounds: a.rounds,
        statistics: !a.no_stats,
        inject_fault: a.inject_fault,
        threads: a.threads,
    })?;
    println!("{report}");
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn sprinkle(a: SprinkleArgs) -> anyhow::Result<ExitCode> {
    let scan = SprinkleScanConfig {
        eps: a.eps,
        sizes: a.sizes,
        horizon: a.horizon,
        trials: a.trials,
        master_seed: a.seed,
    };
    let rows = run_sprinkling_scan(Alpha::Infinite, &scan, a.threads)?;
    println!("size,eps,trials,primal_frequency,dual_frequency");
    for r in rows {
        println!("{},{},{},{},{}", r.size, r.eps, r.trials, r.primal_frequency, r.dual_frequency);
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges() {
        assert_eq!(parse_range("0..3").unwrap(), 0..4);
        assert_eq!(parse_range("2..=2").unwrap(), 2..3);
        assert!(parse_range("3..2").is_err());
        assert!(parse_range("5").is_err());
    }

    #[test]
    fn alpha_flag_tokens() {
        let cli = Cli::try_parse_from(["rkout", "simulate", "--alpha", "inf"]).unwrap();
        let Command::Simulate(a) = cli.command else { panic!() };
        assert_eq!(a.alpha, Alpha::Infinite);
        let cli = Cli::try_parse_from(["rkout", "crossing", "--alpha", "15"]).unwrap();
        let Command::Crossing(a) = cli.command else { panic!() };
        assert_eq!(a.alpha, Alpha::Finite(15.0));
        assert!(Cli::try_parse_from(["rkout", "crossing", "--alpha", "-1"]).is_err());
    }
}
