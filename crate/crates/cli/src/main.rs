//! `lola` - learning-dynamics experiments in iterated matrix games.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use lola_cli::config::{parse_seeds, ExperimentConfig};
use lola_cli::runner;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lola",
    about = "Opponent-shaping learning dynamics in iterated matrix games",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a pair of exact learners (nl-ex, lola-ex, lola2-ex) over seeds.
    TrainExact(RunArgs),
    /// Train a pair of policy-gradient learners (nl-pg, lola-pg, lola-om).
    TrainPg(RunArgs),
    /// Round-robin tournament over a learner roster.
    Tournament(TournamentArgs),
    /// Exploitability cross-table of {nl, lola} x {nl, lola, 2nd-order}.
    Exploit(ExploitArgs),
    /// Re-plot a runs.csv into per-state policy scatter panels.
    Plot(PlotArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; CLI flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Game name: ipd or imp.
    #[arg(long)]
    game: Option<String>,
    /// Seed spec: a count (50), a range (10..20), or a list (1,5,9).
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory (default: a timestamped directory under runs/).
    #[arg(long)]
    out: Option<PathBuf>,
    /// First-order step size.
    #[arg(long)]
    delta: Option<f64>,
    /// Look-ahead (correction) step size.
    #[arg(long)]
    eta: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Learning rule of agent 1.
    #[arg(long)]
    rule1: Option<String>,
    /// Learning rule of agent 2.
    #[arg(long)]
    rule2: Option<String>,
    /// Training iterations (simultaneous updates).
    #[arg(long)]
    iters: Option<usize>,
    /// Episodes per batch (policy gradient only).
    #[arg(long)]
    batch: Option<usize>,
    /// Steps per episode (policy gradient only).
    #[arg(long)]
    horizon: Option<usize>,
    /// Report raw discounted values instead of normalised ones.
    #[arg(long)]
    raw: bool,
}

#[derive(Args)]
struct TournamentArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated roster, or "all".
    #[arg(long)]
    roster: Option<String>,
    /// Episodes per match.
    #[arg(long)]
    episodes: Option<usize>,
    /// Steps per episode.
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct ExploitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Training iterations per pairing.
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// A runs.csv produced by train-exact or train-pg.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot title.
    #[arg(long, default_value = "policy scatter")]
    title: String,
}

fn load_config(common: &CommonArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(game) = &common.game {
        cfg.game = game.clone();
    }
    if let Some(spec) = &common.seeds {
        cfg.seeds = parse_seeds(spec)?;
    }
    if let Some(delta) = common.delta {
        cfg.delta = Some(delta);
    }
    if let Some(eta) = common.eta {
        cfg.eta = Some(eta);
    }
    Ok(cfg)
}

fn apply_run_args(cfg: &mut ExperimentConfig, args: &RunArgs) {
    if let Some(r) = &args.rule1 {
        cfg.rule1 = r.clone();
    }
    if let Some(r) = &args.rule2 {
        cfg.rule2 = r.clone();
    }
    if let Some(i) = args.iters {
        cfg.iters = Some(i);
    }
    if let Some(b) = args.batch {
        cfg.batch = b;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = Some(h);
    }
    cfg.raw_values |= args.raw;
}

fn print_summary(summary: &lola_cli::SummaryStats) {
    println!(
        "runs={} mean=({:.4}, {:.4}) std=({:.4}, {:.4}) pooled={:.4}({:.4})",
        summary.runs,
        summary.mean_return.0,
        summary.mean_return.1,
        summary.std_return.0,
        summary.std_return.1,
        summary.mean_pooled,
        summary.std_pooled,
    );
    if let Some(f) = summary.tft_fraction {
        println!("tft_fraction={f:.3}");
    }
    if let Some(f) = summary.nash_fraction {
        println!("nash_fraction={f:.3}");
    }
    if summary.diverged_runs > 0 {
        println!("diverged_runs={}", summary.diverged_runs);
    }
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::TrainExact(args) => {
            let mut cfg = load_config(&args.common)?;
            apply_run_args(&mut cfg, &args);
            let resolved = cfg.resolve_exact()?;
            let outcome = runner::train_exact_runs(&cfg)?;
            let dir = runner::out_dir(args.common.out.as_deref(), "train-exact");
            let extra = [
                ("delta", resolved.cfg1.delta.to_string()),
                ("eta", resolved.cfg1.eta.to_string()),
                ("iters", resolved.iterations.to_string()),
            ];
            let paths = runner::write_train_outputs(&dir, &cfg, &outcome, &extra)?;
            print_summary(&outcome.summary);
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Cmd::TrainPg(args) => {
            let mut cfg = load_config(&args.common)?;
            apply_run_args(&mut cfg, &args);
            let resolved = cfg.resolve_pg()?;
            let outcome = runner::train_pg_runs(&cfg)?;
            let dir = runner::out_dir(args.common.out.as_deref(), "train-pg");
            let extra = [
                ("delta", resolved.cfg1.delta.to_string()),
                ("eta", resolved.cfg1.eta.to_string()),
                ("iters", resolved.iterations.to_string()),
                ("batch", resolved.batch.to_string()),
                ("horizon", resolved.horizon.to_string()),
            ];
            let paths = runner::write_train_outputs(&dir, &cfg, &outcome, &extra)?;
            print_summary(&outcome.summary);
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Cmd::Tournament(args) => {
            let mut cfg = load_config(&args.common)?;
            if let Some(roster) = &args.roster {
                cfg.roster = roster.split(',').map(|s| s.trim().to_string()).collect();
            }
            if let Some(e) = args.episodes {
                cfg.episodes = e;
            }
            if let Some(s) = args.steps {
                cfg.steps = s;
            }
            let (results, standings) = runner::tournament_runs(&cfg)?;
            let dir = runner::out_dir(args.common.out.as_deref(), "tournament");
            let extra = [
                ("episodes", cfg.episodes.to_string()),
                ("steps", cfg.steps.to_string()),
                ("roster", cfg.resolve_roster()?.iter().map(|k| k.name()).collect::<Vec<_>>().join("+")),
            ];
            let paths = runner::write_tournament_outputs(&dir, &cfg, &results, &standings, &extra)?;
            for s in &standings {
                println!(
                    "{:10} mean={:+.4} ci95={:.4} n={}",
                    s.name, s.mean, s.ci95, s.samples
                );
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Cmd::Exploit(args) => {
            let mut cfg = load_config(&args.common)?;
            if let Some(i) = args.iters {
                cfg.iters = Some(i);
            }
            let table = runner::exploit_runs(&cfg)?;
            let dir = runner::out_dir(args.common.out.as_deref(), "exploit");
            let extra = [
                ("delta", table.delta.to_string()),
                ("eta", table.eta.to_string()),
                ("iters", table.iterations.to_string()),
            ];
            let paths = runner::write_exploit_outputs(&dir, &cfg, &table, &extra)?;
            print!("{}", table.render());
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Cmd::Plot(args) => {
            let file = std::fs::File::open(&args.input)
                .with_context(|| format!("opening {}", args.input.display()))?;
            let records = lola_core::record::read_csv(file)?;
            let dir = runner::out_dir(args.out.as_deref(), "plot");
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("scatter.svg");
            std::fs::write(&path, lola_cli::svg::policy_scatter_svg(&records, &args.title))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
