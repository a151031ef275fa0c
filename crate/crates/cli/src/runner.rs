//! Seed fan-out and file emission for the CLI subcommands.

use crate::config::ExperimentConfig;
use crate::stats::{summarize, ExploitTable, SummaryStats};
use crate::svg;
use anyhow::Context;
use lola_core::exact::init_pair;
use lola_core::games::GameKind;
use lola_core::record::{write_csv, RunRecord};
use lola_core::tournament::{run_tournament, MatchConfig, MatchResult, Standing};
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};

/// Records plus their summary, ready for emission.
pub struct TrainOutcome {
    pub records: Vec<RunRecord>,
    pub summary: SummaryStats,
    pub kind: GameKind,
}

/// Train one exact-learner pairing over every configured seed, in parallel.
pub fn train_exact_runs(cfg: &ExperimentConfig) -> anyhow::Result<TrainOutcome> {
    let game = cfg.build_game()?;
    let resolved = cfg.resolve_exact()?;
    let records: lola_core::Result<Vec<RunRecord>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let (t1, t2) = init_pair(seed);
            lola_core::exact::train_exact(
                &game,
                t1,
                t2,
                &resolved.cfg1,
                &resolved.cfg2,
                resolved.iterations,
                seed,
            )
        })
        .collect();
    let records = records?;
    let summary = summarize(&records, game.kind, cfg.tft_threshold, cfg.nash_eps);
    Ok(TrainOutcome {
        records,
        summary,
        kind: game.kind,
    })
}

/// Train one policy-gradient pairing over every configured seed.
pub fn train_pg_runs(cfg: &ExperimentConfig) -> anyhow::Result<TrainOutcome> {
    let game = cfg.build_game()?;
    let resolved = cfg.resolve_pg()?;
    let records: lola_core::Result<Vec<RunRecord>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            lola_core::rollout::train_pg(
                &game,
                &resolved.cfg1,
                &resolved.cfg2,
                resolved.batch,
                resolved.horizon,
                resolved.iterations,
                seed,
            )
        })
        .collect();
    let records = records?;
    let summary = summarize(&records, game.kind, cfg.tft_threshold, cfg.nash_eps);
    Ok(TrainOutcome {
        records,
        summary,
        kind: game.kind,
    })
}

/// Run the configured tournament.
pub fn tournament_runs(
    cfg: &ExperimentConfig,
) -> anyhow::Result<(Vec<MatchResult>, Vec<Standing>)> {
    let game = cfg.build_game()?;
    let roster = cfg.resolve_roster()?;
    let mut mc = MatchConfig::default();
    mc.om_smoothing = cfg.om_smoothing;
    if let Some(d) = cfg.delta {
        mc.exact_delta = d;
        mc.exact_eta = cfg.eta.unwrap_or(2.0 * d);
    } else if let Some(e) = cfg.eta {
        mc.exact_eta = e;
    }
    let out = run_tournament(&game, &roster, cfg.episodes, cfg.steps, &cfg.seeds, &mc)?;
    Ok(out)
}

/// Run the exploitability cross-table with its own defaults: the pinned
/// step 0.5, look-ahead 2 * delta, 200 iterations.
pub fn exploit_runs(cfg: &ExperimentConfig) -> anyhow::Result<ExploitTable> {
    let game = cfg.build_game()?;
    let delta = cfg.delta.unwrap_or(0.5);
    let eta = cfg.eta.unwrap_or(2.0 * delta);
    let iterations = cfg.iters.unwrap_or(200);
    Ok(crate::stats::exploit_table(
        &game, delta, eta, iterations, &cfg.seeds,
    )?)
}

/// Output directory: the explicit `--out` path if given, otherwise a
/// timestamped directory under `runs/`.
pub fn out_dir(explicit: Option<&Path>, subcommand: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
            PathBuf::from("runs").join(format!("{subcommand}-{stamp}"))
        }
    }
}

fn create(dir: &Path, name: &str) -> anyhow::Result<(PathBuf, fs::File)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, file))
}

/// Scale recorded values to raw discounted returns when requested: the
/// normalised value is exactly `(1 - gamma)` times the raw one.
fn apply_raw(records: &mut [RunRecord], gamma: f64) {
    let scale = 1.0 / (1.0 - gamma);
    for record in records {
        for row in &mut record.rows {
            row.v1 *= scale;
            row.v2 *= scale;
        }
    }
}

fn summary_csv(summary: &SummaryStats, echo: &[String]) -> String {
    let mut text = String::new();
    for line in echo {
        text.push_str(&format!("# {line}\n"));
    }
    text.push_str(
        "runs,mean1,std1,mean2,std2,mean_pooled,std_pooled,tft_fraction,nash_fraction,diverged\n",
    );
    let frac = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    text.push_str(&format!(
        "{},{},{},{},{},{},{},{},{},{}\n",
        summary.runs,
        summary.mean_return.0,
        summary.std_return.0,
        summary.mean_return.1,
        summary.std_return.1,
        summary.mean_pooled,
        summary.std_pooled,
        frac(summary.tft_fraction),
        frac(summary.nash_fraction),
        summary.diverged_runs,
    ));
    text
}

/// Write runs.csv, summary.csv and scatter.svg for a training outcome.
/// Returns the paths written.
pub fn write_train_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &TrainOutcome,
    extra: &[(&str, String)],
) -> anyhow::Result<Vec<PathBuf>> {
    let echo = cfg.echo_lines(extra);
    let mut records = outcome.records.clone();
    if cfg.raw_values {
        apply_raw(&mut records, cfg.build_game()?.gamma);
    }
    let (runs_path, file) = create(dir, "runs.csv")?;
    write_csv(file, &records, &echo)?;
    let (summary_path, _) = create(dir, "summary.csv")?;
    fs::write(&summary_path, summary_csv(&outcome.summary, &echo))?;
    let (svg_path, _) = create(dir, "scatter.svg")?;
    let title = format!("{} {} vs {}", cfg.game, cfg.rule1, cfg.rule2);
    fs::write(&svg_path, svg::policy_scatter_svg(&records, &title))?;
    Ok(vec![runs_path, summary_path, svg_path])
}

/// Write matches.csv, standings.csv and chart.svg for a tournament.
pub fn write_tournament_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    results: &[MatchResult],
    standings: &[Standing],
    extra: &[(&str, String)],
) -> anyhow::Result<Vec<PathBuf>> {
    let echo = cfg.echo_lines(extra);
    let (matches_path, _) = create(dir, "matches.csv")?;
    let mut text = String::new();
    for line in &echo {
        text.push_str(&format!("# {line}\n"));
    }
    text.push_str("first,second,seed,episodes,steps,mean_return1,mean_return2\n");
    for r in results {
        let (m1, m2) = r.mean_returns();
        text.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.first.name(),
            r.second.name(),
            r.seed,
            r.episodes,
            r.steps,
            m1,
            m2
        ));
    }
    fs::write(&matches_path, text)?;

    let (standings_path, _) = create(dir, "standings.csv")?;
    let mut text = String::new();
    for line in &echo {
        text.push_str(&format!("# {line}\n"));
    }
    text.push_str("learner,mean_return,ci95,samples\n");
    for s in standings {
        text.push_str(&format!("{},{},{},{}\n", s.name, s.mean, s.ci95, s.samples));
    }
    fs::write(&standings_path, text)?;

    let (svg_path, _) = create(dir, "chart.svg")?;
    let title = format!("round-robin mean normalised return ({})", cfg.game);
    fs::write(&svg_path, svg::tournament_chart_svg(standings, &title))?;
    Ok(vec![matches_path, standings_path, svg_path])
}

/// Write exploit.csv for the cross-table.
pub fn write_exploit_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    table: &ExploitTable,
    extra: &[(&str, String)],
) -> anyhow::Result<Vec<PathBuf>> {
    let echo = cfg.echo_lines(extra);
    let (path, _) = create(dir, "exploit.csv")?;
    let mut text = String::new();
    for line in &echo {
        text.push_str(&format!("# {line}\n"));
    }
    text.push_str("row_rule,col_rule,row_return,col_return\n");
    for (ri, row) in table.rows.iter().enumerate() {
        for (ci, col) in table.cols.iter().enumerate() {
            let (a, b) = table.cells[ri][ci];
            text.push_str(&format!("{},{},{},{}\n", row.name(), col.name(), a, b));
        }
    }
    fs::write(&path, text)?;
    Ok(vec![path])
}
