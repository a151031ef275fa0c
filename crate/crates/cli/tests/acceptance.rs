//! Acceptance suite: one test per headline claim, each printing a PASS/FAIL
//! line per check (run with `--nocapture` to see them).
//!
//! Settings follow the documented defaults: exact learners use step 1 with
//! look-ahead 2 (the exploitability table pins step 0.5, so look-ahead 1);
//! policy-gradient learners use actor step 0.005 and batch 4000.

use lola_cli::config::ExperimentConfig;
use lola_cli::runner::{train_exact_runs, train_pg_runs};
use lola_cli::stats::exploit_table;
use lola_core::games::{exact_value, BimatrixGame, PolicyParams};
use lola_core::N_STATES;

struct Checks {
    name: &'static str,
    failures: Vec<String>,
}

impl Checks {
    fn new(name: &'static str) -> Self {
        Checks {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, label: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("[{}] {verdict} {label}: {detail}", self.name);
        if !ok {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn finish(self) {
        assert!(
            self.failures.is_empty(),
            "{} failed checks:\n  {}",
            self.name,
            self.failures.join("\n  ")
        );
    }
}

fn exact_config(game: &str, rule: &str, seeds: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.game = game.into();
    cfg.rule1 = rule.into();
    cfg.rule2 = rule.into();
    cfg.seeds = (0..seeds as u64).collect();
    cfg
}

// Criterion 1: exact self-play on the prisoners' dilemma. Naive learners end
// fully defective; LOLA pairs cooperate with a high tit-for-tat fraction.
#[test]
fn c1_exact_self_play_ipd() {
    let mut c = Checks::new("criterion 1");
    let start = std::time::Instant::now();

    let nl = train_exact_runs(&exact_config("ipd", "nl-ex", 50)).unwrap().summary;
    c.check(
        "nl-ex mean in [-2.0, -1.85]",
        (-2.0..=-1.85).contains(&nl.mean_pooled),
        format!("mean {:.4} (std {:.4})", nl.mean_pooled, nl.std_pooled),
    );

    let lola = train_exact_runs(&exact_config("ipd", "lola-ex", 50)).unwrap().summary;
    c.check(
        "lola-ex mean in [-1.4, -0.9]",
        (-1.4..=-0.9).contains(&lola.mean_pooled),
        format!("mean {:.4} (std {:.4})", lola.mean_pooled, lola.std_pooled),
    );
    let tft = lola.tft_fraction.unwrap();
    c.check("lola-ex tft fraction >= 0.6", tft >= 0.6, format!("{tft:.3}"));

    let secs = start.elapsed().as_secs_f64();
    c.check("runtime under 2 minutes", secs < 120.0, format!("{secs:.1}s"));
    c.finish();
}

// Criterion 2: exact self-play on matching pennies. LOLA pairs sit at the
// mixed Nash with tiny return spread; naive pairs cycle with high spread.
#[test]
fn c2_exact_self_play_imp() {
    let mut c = Checks::new("criterion 2");
    let start = std::time::Instant::now();

    let lola = train_exact_runs(&exact_config("imp", "lola-ex", 50)).unwrap().summary;
    let nash = lola.nash_fraction.unwrap();
    c.check("lola-ex nash fraction >= 0.9", nash >= 0.9, format!("{nash:.3}"));
    c.check(
        "lola-ex return std <= 0.05",
        lola.std_pooled <= 0.05,
        format!("{:.4}", lola.std_pooled),
    );

    let nl = train_exact_runs(&exact_config("imp", "nl-ex", 50)).unwrap().summary;
    c.check(
        "nl-ex return std >= 0.2",
        nl.std_pooled >= 0.2,
        format!("{:.4}", nl.std_pooled),
    );

    let secs = start.elapsed().as_secs_f64();
    c.check("runtime under 2 minutes", secs < 120.0, format!("{secs:.1}s"));
    c.finish();
}

// Criterion 3: policy-gradient self-play at batch 4000 and actor step 0.005.
#[test]
fn c3_policy_gradient_self_play() {
    let mut c = Checks::new("criterion 3");
    let start = std::time::Instant::now();
    let seeds = 20;

    let mut cfg = exact_config("ipd", "lola-pg", seeds);
    let lola = train_pg_runs(&cfg).unwrap().summary;
    c.check(
        "lola-pg ipd mean >= -1.5",
        lola.mean_pooled >= -1.5,
        format!("mean {:.4} (std {:.4})", lola.mean_pooled, lola.std_pooled),
    );

    cfg.rule1 = "nl-pg".into();
    cfg.rule2 = "nl-pg".into();
    // The tiny actor step needs longer to drift into mutual defection.
    cfg.iters = Some(600);
    let nl = train_pg_runs(&cfg).unwrap().summary;
    c.check(
        "nl-pg ipd mean <= -1.9",
        nl.mean_pooled <= -1.9,
        format!("mean {:.4} (std {:.4})", nl.mean_pooled, nl.std_pooled),
    );

    let imp = train_pg_runs(&exact_config("imp", "lola-pg", seeds)).unwrap().summary;
    let nash = imp.nash_fraction.unwrap();
    c.check("lola-pg imp nash fraction >= 0.8", nash >= 0.8, format!("{nash:.3}"));

    let secs = start.elapsed().as_secs_f64();
    c.check("runtime under 30 minutes", secs < 1800.0, format!("{secs:.1}s"));
    c.finish();
}

// Criterion 4: exploitability cross-table at the pinned step 0.5.
//
// The two ordering claims hold robustly. The per-cell +-0.15 reproduction
// does not hold everywhere under this implementation: the LOLA column
// extracts more from a naive learner than reported, and the second-order
// column defects more against one (see the decisions ledger shipped with the
// build notes for the parameter scans). The cells are asserted as specified
// and the deviating ones fail honestly.
#[test]
fn c4_exploitability_cross_table() {
    let mut c = Checks::new("criterion 4");
    let game = BimatrixGame::ipd();
    let seeds: Vec<u64> = (0..50).collect();
    let table = exploit_table(&game, 0.5, 1.0, 200, &seeds).unwrap();

    let (nl_lola_row, nl_lola_col) = table.cells[0][1];
    let (lola_nl_row, lola_nl_col) = table.cells[1][0];
    c.check(
        "lola beats nl in mixed pairings",
        nl_lola_col > nl_lola_row && lola_nl_row > lola_nl_col,
        format!(
            "nl row ({nl_lola_row:.3}, {nl_lola_col:.3}), lola row \
             ({lola_nl_row:.3}, {lola_nl_col:.3})"
        ),
    );

    let ll = table.cells[1][1];
    let l2 = table.cells[1][2];
    let ll_mean = (ll.0 + ll.1) / 2.0;
    c.check(
        "lola/lola at least as good as either side of lola/2nd-order",
        ll_mean >= l2.0 && ll_mean >= l2.1,
        format!("lola/lola {ll_mean:.3} vs lola/2nd ({:.3}, {:.3})", l2.0, l2.1),
    );

    let paper = [
        [(-1.99, -1.99), (-1.54, -1.28), (-1.46, -1.46)],
        [(-1.28, -1.54), (-1.04, -1.04), (-1.14, -1.17)],
    ];
    for r in 0..2 {
        for col in 0..3 {
            let (a, b) = table.cells[r][col];
            let (pa, pb) = paper[r][col];
            let ok = (a - pa).abs() <= 0.15 && (b - pb).abs() <= 0.15;
            c.check(
                &format!("cell {} vs {} within 0.15", table.rows[r].name(), table.cols[col].name()),
                ok,
                format!("({a:.3}, {b:.3}) vs paper ({pa:.2}, {pb:.2})"),
            );
        }
    }
    c.finish();
}

// Criterion 5: full-roster round-robin on the IPD; only the ranking is
// asserted (baseline hyperparameters are not reproducible numerically).
#[test]
fn c5_tournament_ranking() {
    let mut c = Checks::new("criterion 5");
    let game = BimatrixGame::ipd();
    let roster = lola_core::LearnerKind::ALL;
    let seeds: Vec<u64> = (0..5).collect();
    let mc = lola_core::MatchConfig::default();
    let (_, standings) =
        lola_core::run_tournament(&game, &roster, 1000, 200, &seeds, &mc).unwrap();
    let top = &standings[0];
    let runner_up = &standings[1];
    c.check(
        "lola-ex has the highest mean normalised return",
        top.name == "lola-ex",
        format!(
            "top {} ({:.3} +- {:.3}), next {} ({:.3})",
            top.name, top.mean, top.ci95, runner_up.name, runner_up.mean
        ),
    );
    c.finish();
}

// Criterion 6: oracle suites. The full versions live in the core crate's
// test targets; the checks here rerun each oracle at acceptance scale.
#[test]
fn c6_oracle_suites() {
    use lola_core::exact::{lola_step, nl_step, ExactRule, LearnerConfig};
    use lola_core::jet::{Jet, Scalar};
    use lola_core::rollout::{likelihood_gradient, rollout, Baseline, EpisodeBatch};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let mut c = Checks::new("criterion 6");
    let mut rng = ChaCha8Rng::seed_from_u64(600);

    // (a) jet gradients against central differences at 100 random pairs.
    let game = BimatrixGame::ipd();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t1 = PolicyParams::random(&mut rng);
        let t2 = PolicyParams::random(&mut rng);
        let mut vals = [0.0; 10];
        vals[..5].copy_from_slice(&t1.logits);
        vals[5..].copy_from_slice(&t2.logits);
        let jets = Jet::seed_variables(&vals, 1);
        let j1: [Jet; 5] = jets[..5].try_into().unwrap();
        let j2: [Jet; 5] = jets[5..].try_into().unwrap();
        let (jv1, _) = exact_value(&game, &j1, &j2);
        for i in 0..10 {
            let mut up = vals;
            up[i] += h;
            let mut dn = vals;
            dn[i] -= h;
            let at = |v: [f64; 10]| {
                let a: [f64; 5] = v[..5].try_into().unwrap();
                let b: [f64; 5] = v[5..].try_into().unwrap();
                exact_value(&game, &a, &b).0
            };
            let fd = (at(up) - at(dn)) / (2.0 * h);
            let rel = (jv1.grad(i) - fd).abs() / fd.abs().max(1e-3);
            worst = worst.max(rel);
        }
    }
    c.check(
        "gradients vs central differences (1e-6 relative, 100 points)",
        worst <= 1e-6,
        format!("worst relative error {worst:.2e}"),
    );

    // (b) single-step enumeration: likelihood-ratio gradient expectation
    // equals the exact gradient to machine precision.
    let t1 = PolicyParams::random(&mut rng);
    let t2 = PolicyParams::random(&mut rng);
    let mut vals = [0.0; 10];
    vals[..5].copy_from_slice(&t1.logits);
    vals[5..].copy_from_slice(&t2.logits);
    let jets = Jet::seed_variables(&vals, 1);
    let p1 = t1.probs();
    let p2 = t2.probs();
    let mut expected = jets[0].lift(0.0);
    let mut est = [0.0; N_STATES];
    for u1 in 0..2u8 {
        for u2 in 0..2u8 {
            let (r1, _) = game.reward(u1 as usize, u2 as usize);
            let pi1 = if u1 == 0 { jets[0].sigmoid() } else { jets[0].lift(1.0) - jets[0].sigmoid() };
            let pi2 = if u2 == 0 { jets[5].sigmoid() } else { jets[5].lift(1.0) - jets[5].sigmoid() };
            expected = expected + (pi1 * pi2).scale(r1);
            let p = (if u1 == 0 { p1[0] } else { 1.0 - p1[0] })
                * (if u2 == 0 { p2[0] } else { 1.0 - p2[0] });
            let batch = EpisodeBatch::from_actions(&game, vec![u1], vec![u2], 1, 1);
            let g = likelihood_gradient(&batch, 0, 0, &t1.logits, &Baseline::zero());
            for s in 0..N_STATES {
                est[s] += p * g[s];
            }
        }
    }
    let enum_err: f64 = (0..N_STATES)
        .map(|s| (est[s] - expected.grad(s)).abs())
        .fold(0.0, f64::max);
    c.check(
        "single-step enumeration matches exact gradient",
        enum_err < 1e-12,
        format!("max abs error {enum_err:.2e}"),
    );

    // (c) closed form vs Monte-Carlo batch mean within three standard errors.
    let t1 = PolicyParams::random(&mut rng);
    let t2 = PolicyParams::random(&mut rng);
    let (v1, _) = exact_value(&game, &t1.logits, &t2.logits);
    let batch = rollout(&game, &t1, &t2, 4000, 200, &mut rng);
    let scale = 1.0 - game.gamma;
    let returns: Vec<f64> = (0..batch.episodes)
        .map(|e| scale * batch.returns1[batch.at(e, 0)])
        .collect();
    let mean = returns.iter().sum::<f64>() / returns.len() as f64;
    let var = returns.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
        / (returns.len() as f64 - 1.0);
    let se = (var / returns.len() as f64).sqrt();
    c.check(
        "exact value within 3 standard errors of the batch mean",
        (mean - v1).abs() <= 3.0 * se + game.gamma.powi(200) * 3.0,
        format!("sample {mean:.4} vs exact {v1:.4} (se {se:.4})"),
    );

    // (d) matching pennies is zero-sum to 1e-10 everywhere.
    let imp = BimatrixGame::imp();
    let mut worst_sum: f64 = 0.0;
    for _ in 0..100 {
        let t1 = PolicyParams::random(&mut rng);
        let t2 = PolicyParams::random(&mut rng);
        let (a, b) = exact_value(&imp, &t1.logits, &t2.logits);
        worst_sum = worst_sum.max((a + b).abs());
    }
    c.check(
        "zero-sum identity (1e-10)",
        worst_sum <= 1e-10,
        format!("worst |V1 + V2| = {worst_sum:.2e}"),
    );

    // (e) the LOLA correction vanishes linearly in eta.
    let t1 = PolicyParams::random(&mut rng);
    let t2 = PolicyParams::random(&mut rng);
    let delta = 1.0;
    let nl = nl_step(&game, &t1, &t2, &LearnerConfig::new(ExactRule::Nl, delta, 0.0)).unwrap();
    let unit = lola_step(&game, &t1, &t2, &LearnerConfig::new(ExactRule::Lola, delta, 1.0)).unwrap();
    let mut linear = true;
    for eta in [1e-2, 1e-3, 1e-4] {
        let f = lola_step(&game, &t1, &t2, &LearnerConfig::new(ExactRule::Lola, delta, eta)).unwrap();
        for i in 0..N_STATES {
            let corr = f[i] - nl[i];
            let expect = eta * (unit[i] - nl[i]);
            if (corr - expect).abs() > 1e-12 * expect.abs() + 1e-13 * nl[i].abs().max(1e-3) {
                linear = false;
            }
        }
    }
    c.check("lola reduces to nl linearly in eta", linear, "checked at 1e-2..1e-4".into());
    c.finish();
}

// Criterion 7: reruns with identical configs and seeds produce byte-identical
// CSVs, through the actual binary.
#[test]
fn c7_byte_identical_reruns() {
    let mut c = Checks::new("criterion 7");
    let bin = env!("CARGO_BIN_EXE_lola");

    let run = |subcmd: &str, extra: &[&str], dir: &std::path::Path| {
        let status = std::process::Command::new(bin)
            .arg(subcmd)
            .args(extra)
            .arg("--out")
            .arg(dir)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("running lola binary");
        assert!(status.success(), "lola {subcmd} failed");
    };

    for (subcmd, extra, files) in [
        (
            "train-exact",
            vec!["--game", "ipd", "--seeds", "3", "--iters", "25"],
            vec!["runs.csv", "summary.csv", "scatter.svg"],
        ),
        (
            "train-pg",
            vec![
                "--game", "ipd", "--rule1", "lola-pg", "--rule2", "nl-pg", "--seeds", "2",
                "--iters", "4", "--batch", "128", "--horizon", "32",
            ],
            vec!["runs.csv", "summary.csv"],
        ),
        (
            "tournament",
            vec!["--game", "imp", "--roster", "nl-q,wolf,lola-ex", "--episodes", "40",
                 "--steps", "50", "--seeds", "2"],
            vec!["matches.csv", "standings.csv"],
        ),
        (
            "exploit",
            vec!["--game", "ipd", "--seeds", "2", "--iters", "10"],
            vec!["exploit.csv"],
        ),
    ] {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        run(subcmd, &extra, d1.path());
        run(subcmd, &extra, d2.path());
        for file in files {
            let a = std::fs::read(d1.path().join(file)).unwrap();
            let b = std::fs::read(d2.path().join(file)).unwrap();
            c.check(
                &format!("{subcmd}/{file} byte-identical"),
                a == b,
                format!("{} bytes", a.len()),
            );
        }
    }
    c.finish();
}
