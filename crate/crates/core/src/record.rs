//! Per-seed training traces and their CSV round-trip.
//!
//! One CSV holds every seed's rows. Comment lines starting with `#` carry
//! the resolved configuration; readers skip them. Floats are written with
//! Rust's shortest round-trip formatting so parsing a file back reproduces
//! the in-memory records exactly.

use crate::games::{N_STATES, STATE_NAMES};
use crate::{Error, Result};
use std::io::{Read, Write};

/// One training iteration: post-update values, policies and optional extras.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRow {
    pub iteration: usize,
    pub v1: f64,
    pub v2: f64,
    /// Agent 1 per-state action-0 probabilities.
    pub p1: [f64; N_STATES],
    pub p2: [f64; N_STATES],
    /// Policy-gradient norms of both agents, when trained by rollouts.
    pub grad_norm: Option<(f64, f64)>,
    /// Agent 1's fitted model of agent 2, when opponent modeling is active.
    pub om1: Option<[f64; N_STATES]>,
    /// Agent 2's fitted model of agent 1.
    pub om2: Option<[f64; N_STATES]>,
    /// Sticky divergence flag: some logit hit the clamp limit by this row.
    pub diverged: bool,
}

/// A full training trace for one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub rows: Vec<RunRow>,
}

impl RunRecord {
    pub fn final_row(&self) -> Option<&RunRow> {
        self.rows.last()
    }

    pub fn diverged(&self) -> bool {
        self.rows.iter().any(|r| r.diverged)
    }
}

fn prob_headers(prefix: &str) -> Vec<String> {
    STATE_NAMES.iter().map(|s| format!("{prefix}_{s}")).collect()
}

/// Write records to CSV. `comments` lines are emitted first, prefixed `#`.
pub fn write_csv<W: Write>(mut w: W, records: &[RunRecord], comments: &[String]) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Parse(format!("csv write: {e}"));
    for line in comments {
        writeln!(w, "# {line}").map_err(io_err)?;
    }
    let with_grad = records.iter().any(|r| r.rows.iter().any(|x| x.grad_norm.is_some()));
    let with_om1 = records.iter().any(|r| r.rows.iter().any(|x| x.om1.is_some()));
    let with_om2 = records.iter().any(|r| r.rows.iter().any(|x| x.om2.is_some()));

    let mut header: Vec<String> = vec!["seed".into(), "iteration".into(), "v1".into(), "v2".into()];
    header.extend(prob_headers("p1"));
    header.extend(prob_headers("p2"));
    if with_grad {
        header.push("grad_norm1".into());
        header.push("grad_norm2".into());
    }
    if with_om1 {
        header.extend(prob_headers("p2_om"));
    }
    if with_om2 {
        header.extend(prob_headers("p1_om"));
    }
    header.push("diverged".into());

    let mut writer = csv::Writer::from_writer(w);
    writer
        .write_record(&header)
        .map_err(|e| Error::Parse(format!("csv write: {e}")))?;
    for record in records {
        for row in &record.rows {
            let mut fields: Vec<String> = vec![
                record.seed.to_string(),
                row.iteration.to_string(),
                row.v1.to_string(),
                row.v2.to_string(),
            ];
            fields.extend(row.p1.iter().map(|x| x.to_string()));
            fields.extend(row.p2.iter().map(|x| x.to_string()));
            if with_grad {
                let (g1, g2) = row.grad_norm.unwrap_or((f64::NAN, f64::NAN));
                fields.push(g1.to_string());
                fields.push(g2.to_string());
            }
            if with_om1 {
                let om = row.om1.unwrap_or([f64::NAN; N_STATES]);
                fields.extend(om.iter().map(|x| x.to_string()));
            }
            if with_om2 {
                let om = row.om2.unwrap_or([f64::NAN; N_STATES]);
                fields.extend(om.iter().map(|x| x.to_string()));
            }
            fields.push(if row.diverged { "1".into() } else { "0".into() });
            writer
                .write_record(&fields)
                .map_err(|e| Error::Parse(format!("csv write: {e}")))?;
        }
    }
    writer.flush().map_err(io_err)?;
    Ok(())
}

/// Parse records back from CSV produced by [`write_csv`].
pub fn read_csv<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(r);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| Error::Parse(format!("missing column {name}")));
    let seed_c = need("seed")?;
    let iter_c = need("iteration")?;
    let v1_c = need("v1")?;
    let v2_c = need("v2")?;
    let p1_c: Vec<usize> = prob_headers("p1")
        .iter()
        .map(|h| need(h))
        .collect::<Result<_>>()?;
    let p2_c: Vec<usize> = prob_headers("p2")
        .iter()
        .map(|h| need(h))
        .collect::<Result<_>>()?;
    let grad_c = col("grad_norm1").zip(col("grad_norm2"));
    let om1_c: Option<Vec<usize>> = prob_headers("p2_om")
        .iter()
        .map(|h| col(h))
        .collect();
    let om2_c: Option<Vec<usize>> = prob_headers("p1_om")
        .iter()
        .map(|h| col(h))
        .collect();
    let div_c = need("diverged")?;

    let parse = |field: &str| -> Result<f64> {
        field
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad float '{field}': {e}")))
    };
    let mut records: Vec<RunRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse(format!("csv row: {e}")))?;
        let seed: u64 = row[seed_c]
            .parse()
            .map_err(|e| Error::Parse(format!("bad seed: {e}")))?;
        let mut p1 = [0.0; N_STATES];
        let mut p2 = [0.0; N_STATES];
        for i in 0..N_STATES {
            p1[i] = parse(&row[p1_c[i]])?;
            p2[i] = parse(&row[p2_c[i]])?;
        }
        let grad_norm = match grad_c {
            Some((a, b)) => {
                let (g1, g2) = (parse(&row[a])?, parse(&row[b])?);
                if g1.is_nan() && g2.is_nan() {
                    None
                } else {
                    Some((g1, g2))
                }
            }
            None => None,
        };
        let read_om = |cols: &Option<Vec<usize>>| -> Result<Option<[f64; N_STATES]>> {
            match cols {
                Some(cols) => {
                    let mut om = [0.0; N_STATES];
                    for i in 0..N_STATES {
                        om[i] = parse(&row[cols[i]])?;
                    }
                    Ok(if om.iter().all(|x| x.is_nan()) { None } else { Some(om) })
                }
                None => Ok(None),
            }
        };
        let run_row = RunRow {
            iteration: row[iter_c]
                .parse()
                .map_err(|e| Error::Parse(format!("bad iteration: {e}")))?,
            v1: parse(&row[v1_c])?,
            v2: parse(&row[v2_c])?,
            p1,
            p2,
            grad_norm,
            om1: read_om(&om1_c)?,
            om2: read_om(&om2_c)?,
            diverged: &row[div_c] == "1",
        };
        match records.last_mut() {
            Some(rec) if rec.seed == seed => rec.rows.push(run_row),
            _ => records.push(RunRecord {
                seed,
                rows: vec![run_row],
            }),
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_record(rng: &mut ChaCha8Rng, seed: u64, extras: bool) -> RunRecord {
        let rows = (1..=4)
            .map(|iteration| RunRow {
                iteration,
                v1: rng.random_range(-2.0..0.0),
                v2: rng.random_range(-2.0..0.0),
                p1: std::array::from_fn(|_| rng.random::<f64>()),
                p2: std::array::from_fn(|_| rng.random::<f64>()),
                grad_norm: extras.then(|| (rng.random::<f64>(), rng.random::<f64>())),
                om1: extras.then(|| std::array::from_fn(|_| rng.random::<f64>())),
                om2: None,
                diverged: iteration == 4,
            })
            .collect();
        RunRecord { seed, rows }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for extras in [false, true] {
            let records: Vec<RunRecord> = (0..3)
                .map(|s| random_record(&mut rng, s, extras))
                .collect();
            let mut buf = Vec::new();
            write_csv(&mut buf, &records, &["game=ipd".into(), "delta=0.5".into()]).unwrap();
            let parsed = read_csv(buf.as_slice()).unwrap();
            assert_eq!(records, parsed);
        }
    }

    #[test]
    fn comment_lines_are_emitted_and_skipped() {
        let records = vec![RunRecord {
            seed: 7,
            rows: vec![RunRow {
                iteration: 1,
                v1: -1.0,
                v2: -1.5,
                p1: [0.5; N_STATES],
                p2: [0.5; N_STATES],
                grad_norm: None,
                om1: None,
                om2: None,
                diverged: false,
            }],
        }];
        let mut buf = Vec::new();
        write_csv(&mut buf, &records, &["threshold=0.5".into()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# threshold=0.5\n"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), records);
    }
}
