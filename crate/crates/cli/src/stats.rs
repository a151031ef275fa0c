//! Run classification and summary statistics.

use lola_core::exact::{init_pair, train_exact, ExactRule, LearnerConfig};
use lola_core::games::{BimatrixGame, GameKind, N_STATES};
use lola_core::record::RunRecord;
use rayon::prelude::*;

/// Tit-for-tat test for one agent's per-state cooperation probabilities:
/// cooperate at the start and wherever the opponent just cooperated, defect
/// wherever the opponent just defected. The state pair is (agent 1 action,
/// agent 2 action), so the opponent-cooperated states differ per seat.
pub fn classify_tft(probs: &[f64; N_STATES], agent: usize, threshold: f64) -> bool {
    let (coop, defect) = if agent == 0 {
        ([1usize, 3], [2usize, 4])
    } else {
        ([1usize, 2], [3usize, 4])
    };
    probs[0] > threshold
        && coop.iter().all(|&s| probs[s] > threshold)
        && defect.iter().all(|&s| probs[s] < threshold)
}

/// Nash test for matching pennies: every probability within `eps` of 1/2.
pub fn classify_nash_imp(probs: &[f64; N_STATES], eps: f64) -> bool {
    probs.iter().all(|p| (p - 0.5).abs() <= eps)
}

/// End-of-training statistics over a set of runs.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryStats {
    pub runs: usize,
    /// Fraction of agent policies classified TFT (prisoners' dilemma only).
    pub tft_fraction: Option<f64>,
    /// Fraction of agent policies at the Nash mix (matching pennies only).
    pub nash_fraction: Option<f64>,
    pub mean_return: (f64, f64),
    pub std_return: (f64, f64),
    /// Both agents pooled.
    pub mean_pooled: f64,
    pub std_pooled: f64,
    pub diverged_runs: usize,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Summarise final rows of a batch of runs. Fractions count agent policies,
/// two per run.
pub fn summarize(
    records: &[RunRecord],
    kind: GameKind,
    tft_threshold: f64,
    nash_eps: f64,
) -> SummaryStats {
    let finals: Vec<_> = records.iter().filter_map(|r| r.final_row()).collect();
    let v1: Vec<f64> = finals.iter().map(|r| r.v1).collect();
    let v2: Vec<f64> = finals.iter().map(|r| r.v2).collect();
    let pooled: Vec<f64> = v1.iter().chain(&v2).copied().collect();
    let mut stats = SummaryStats {
        runs: records.len(),
        tft_fraction: None,
        nash_fraction: None,
        mean_return: (mean_std(&v1).0, mean_std(&v2).0),
        std_return: (mean_std(&v1).1, mean_std(&v2).1),
        mean_pooled: mean_std(&pooled).0,
        std_pooled: mean_std(&pooled).1,
        diverged_runs: records.iter().filter(|r| r.diverged()).count(),
    };
    let agents = (2 * finals.len()).max(1) as f64;
    match kind {
        GameKind::Ipd => {
            let hits = finals
                .iter()
                .map(|r| {
                    classify_tft(&r.p1, 0, tft_threshold) as usize
                        + classify_tft(&r.p2, 1, tft_threshold) as usize
                })
                .sum::<usize>();
            stats.tft_fraction = Some(hits as f64 / agents);
        }
        GameKind::Imp => {
            let hits = finals
                .iter()
                .map(|r| {
                    classify_nash_imp(&r.p1, nash_eps) as usize
                        + classify_nash_imp(&r.p2, nash_eps) as usize
                })
                .sum::<usize>();
            stats.nash_fraction = Some(hits as f64 / agents);
        }
        GameKind::Custom => {}
    }
    stats
}

/// Mean final normalised return pairs for every pairing of
/// {NL, LOLA} x {NL, LOLA, 2nd-order}, each cell averaged over the seeds.
#[derive(Clone, Debug)]
pub struct ExploitTable {
    pub rows: [ExactRule; 2],
    pub cols: [ExactRule; 3],
    pub delta: f64,
    pub eta: f64,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    /// `cells[r][c]` = (row agent mean return, column agent mean return).
    pub cells: [[(f64, f64); 3]; 2],
}

/// Run the exploitability cross-table.
pub fn exploit_table(
    game: &BimatrixGame,
    delta: f64,
    eta: f64,
    iterations: usize,
    seeds: &[u64],
) -> lola_core::Result<ExploitTable> {
    let rows = [ExactRule::Nl, ExactRule::Lola];
    let cols = [ExactRule::Nl, ExactRule::Lola, ExactRule::Lola2];
    let mut cells = [[(0.0, 0.0); 3]; 2];
    for (ri, row) in rows.iter().enumerate() {
        for (ci, col) in cols.iter().enumerate() {
            let cfg1 = LearnerConfig::new(*row, delta, eta);
            let cfg2 = LearnerConfig::new(*col, delta, eta);
            let finals: lola_core::Result<Vec<(f64, f64)>> = seeds
                .par_iter()
                .map(|&seed| {
                    let (t1, t2) = init_pair(seed);
                    let rec = train_exact(game, t1, t2, &cfg1, &cfg2, iterations, seed)?;
                    let last = rec.final_row().expect("non-empty record");
                    Ok((last.v1, last.v2))
                })
                .collect();
            let finals = finals?;
            let n = finals.len() as f64;
            cells[ri][ci] = (
                finals.iter().map(|f| f.0).sum::<f64>() / n,
                finals.iter().map(|f| f.1).sum::<f64>() / n,
            );
        }
    }
    Ok(ExploitTable {
        rows,
        cols,
        delta,
        eta,
        iterations,
        seeds: seeds.to_vec(),
        cells,
    })
}

impl ExploitTable {
    /// Render as an aligned text table.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:12}", ""));
        for col in &self.cols {
            out.push_str(&format!("{:>20}", col.name()));
        }
        out.push('\n');
        for (ri, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{:12}", row.name()));
            for ci in 0..self.cols.len() {
                let (a, b) = self.cells[ri][ci];
                out.push_str(&format!("{:>20}", format!("({a:.2}, {b:.2})")));
            }
            out.push('\n');
        }
        out
    }
}
