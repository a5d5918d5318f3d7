//! Benchmark loading and result persistence.
//!
//! The cause-effect pair benchmark is a directory of whitespace-separated
//! numeric files (`pair0001.txt`, one sample per row) plus a `pairmeta.txt`
//! with one line per pair:
//!
//! ```text
//! id cause-start cause-end effect-start effect-end weight
//! ```
//!
//! Column ranges are inclusive and may follow either the 0-based or 1-based
//! convention; the loader autodetects (any 0 index ⇒ 0-based) and logs its
//! choice. Pairs whose cause or effect spans more than one column are
//! excluded. Loading orients every pair cause-first, so the ground truth is
//! always x→y; sample order within a file is preserved exactly.
//!
//! Results are tab-separated tables with a fixed header. Readers ignore (and
//! warn about) unknown columns so newer writers stay readable.

use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use crate::datagen::PairDataset;
use crate::error::{Error, Result};
use crate::infer::{Decision, Direction};
use crate::rng::{self, tag};

/// One benchmark pair: identifier, oriented data, and its metadata weight.
/// The weight is carried through to the results but only used when weighted
/// accuracy is requested.
#[derive(Debug, Clone, PartialEq)]
pub struct TcepPair {
    pub id: String,
    pub data: PairDataset,
    pub weight: f64,
}

/// One scored pair or setting, as persisted in results tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub id: String,
    pub method: String,
    pub cfg_digest: String,
    pub decision: Decision,
    pub score_xy: f64,
    pub score_yx: f64,
    pub wall_time_s: f64,
    pub seed: u64,
}

/// Parse a whitespace-separated numeric file into an n×c matrix. Blank lines
/// and `#` comment lines are skipped; every data row must have the same
/// number of columns.
pub fn parse_pair_file(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut ncols = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::with_capacity(ncols.max(2));
        for field in trimmed.split_whitespace() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected a real number, found `{field}`"),
            })?;
            row.push(value);
        }
        if rows.is_empty() {
            ncols = row.len();
        } else if row.len() != ncols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected {ncols} columns, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Inclusive column range from a metadata line, still in file convention.
#[derive(Debug, Clone, Copy)]
struct MetaLine {
    start_cause: usize,
    end_cause: usize,
    start_effect: usize,
    end_effect: usize,
    weight: f64,
}

fn parse_meta_line(path: &Path, line_no: usize, line: &str) -> Result<Option<(String, MetaLine)>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = trimmed.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!(
                "expected `id cause-start cause-end effect-start effect-end weight`, found {} fields",
                fields.len()
            ),
        });
    }
    let number = |field: &str, what: &str| -> Result<usize> {
        field.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("expected {what} as a nonnegative integer, found `{field}`"),
        })
    };
    let weight: f64 = fields[5].parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: line_no,
        message: format!("expected a real weight, found `{}`", fields[5]),
    })?;
    if !weight.is_finite() || weight < 0.0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("weight must be finite and nonnegative, found {weight}"),
        });
    }
    Ok(Some((
        fields[0].to_string(),
        MetaLine {
            start_cause: number(fields[1], "cause start")?,
            end_cause: number(fields[2], "cause end")?,
            start_effect: number(fields[3], "effect start")?,
            end_effect: number(fields[4], "effect end")?,
            weight,
        },
    )))
}

/// Load the benchmark directory: parse `pairmeta.txt`, load each listed pair
/// file, orient cause-first, and drop multivariate pairs. The kept/excluded
/// counts are logged.
pub fn load_tcep(dir: &Path) -> Result<Vec<TcepPair>> {
    let meta_path = dir.join("pairmeta.txt");
    if !meta_path.is_file() {
        return Err(Error::InvalidInput(format!(
            "benchmark directory {} has no pairmeta.txt (one line per pair: \
             `id cause-start cause-end effect-start effect-end weight`)",
            dir.display()
        )));
    }
    let meta_text = std::fs::read_to_string(&meta_path).map_err(Error::io(&meta_path))?;
    let mut lines: Vec<(usize, String, MetaLine)> = Vec::new();
    for (idx, raw) in meta_text.lines().enumerate() {
        if let Some((id, meta)) = parse_meta_line(&meta_path, idx + 1, raw)? {
            lines.push((idx + 1, id, meta));
        }
    }
    if lines.is_empty() {
        return Err(Error::Parse {
            path: meta_path.clone(),
            line: 1,
            message: "no pair entries".into(),
        });
    }

    // Column convention: a 0 anywhere means 0-based; the common distribution
    // is 1-based.
    let zero_based = lines.iter().any(|(_, _, m)| {
        m.start_cause == 0 || m.end_cause == 0 || m.start_effect == 0 || m.end_effect == 0
    });
    log::info!(
        "pairmeta.txt: {} entries, {}-based column indices",
        lines.len(),
        if zero_based { 0 } else { 1 }
    );
    let to_index = |col: usize| if zero_based { col } else { col - 1 };

    let mut pairs = Vec::new();
    let mut excluded = 0usize;
    for (line_no, id, meta) in lines {
        if meta.end_cause < meta.start_cause || meta.end_effect < meta.start_effect {
            return Err(Error::Parse {
                path: meta_path.clone(),
                line: line_no,
                message: format!("pair {id}: column range end before start"),
            });
        }
        if meta.end_cause > meta.start_cause || meta.end_effect > meta.start_effect {
            excluded += 1; // multivariate cause or effect
            continue;
        }
        let stem = if id.starts_with("pair") {
            id.clone()
        } else {
            format!("pair{id}")
        };
        let data_path = dir.join(format!("{stem}.txt"));
        let table = parse_pair_file(&data_path)?;
        let cause_col = to_index(meta.start_cause);
        let effect_col = to_index(meta.start_effect);
        let max_col = cause_col.max(effect_col);
        if max_col >= table.ncols() {
            return Err(Error::Parse {
                path: meta_path.clone(),
                line: line_no,
                message: format!(
                    "pair {id}: column {} out of range for a {}-column file",
                    max_col + 1,
                    table.ncols()
                ),
            });
        }
        let x = DMatrix::from_column_slice(table.nrows(), 1, table.column(cause_col).as_slice());
        let y = DMatrix::from_column_slice(table.nrows(), 1, table.column(effect_col).as_slice());
        pairs.push(TcepPair {
            data: PairDataset {
                x,
                y,
                truth: Some(Direction::XtoY),
                provenance: format!("tcep:{stem}"),
            },
            id,
            weight: meta.weight,
        });
    }
    log::info!(
        "loaded {} scalar pairs from {} ({} multivariate excluded)",
        pairs.len(),
        dir.display(),
        excluded
    );
    Ok(pairs)
}

/// Cap a pair at `cap` samples: rows are permuted with a seed-derived shuffle
/// and the first `cap` rows of the permuted order are kept. Pairs at or under
/// the cap pass through unchanged.
pub fn downsample(pair: &TcepPair, cap: usize, seed: u64) -> Result<TcepPair> {
    if cap < 2 {
        return Err(Error::InvalidInput(format!(
            "downsample: cap must be >= 2, got {cap}"
        )));
    }
    let n = pair.data.n();
    if n <= cap {
        return Ok(pair.clone());
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rng::stream(&[tag::DOWNSAMPLE, seed]));
    indices.truncate(cap);

    let take = |m: &DMatrix<f64>| {
        DMatrix::from_fn(cap, m.ncols(), |i, j| m[(indices[i], j)])
    };
    Ok(TcepPair {
        id: pair.id.clone(),
        data: PairDataset {
            x: take(&pair.data.x),
            y: take(&pair.data.y),
            truth: pair.data.truth,
            provenance: format!("{}:downsample(cap={cap},seed={seed})", pair.data.provenance),
        },
        weight: pair.weight,
    })
}

const RESULT_COLUMNS: [&str; 8] = [
    "id",
    "method",
    "cfg_digest",
    "decision",
    "score_xy",
    "score_yx",
    "wall_time_s",
    "seed",
];

/// Write records as a tab-separated table with a fixed header. The file is
/// staged next to the target and atomically renamed into place, so readers
/// never observe a half-written table.
pub fn write_results(records: &[ResultRecord], path: &Path) -> Result<()> {
    write_results_with_meta(records, &[], path)
}

/// [`write_results`] with `# key = value` provenance lines above the header,
/// used by the experiment runner to echo the full run configuration.
pub fn write_results_with_meta(
    records: &[ResultRecord],
    meta: &[(String, String)],
    path: &Path,
) -> Result<()> {
    let mut body = String::new();
    for (key, value) in meta {
        body.push_str(&format!("# {key} = {value}\n"));
    }
    body.push_str(&RESULT_COLUMNS.join("\t"));
    body.push('\n');
    for r in records {
        body.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:e}\t{:e}\t{:e}\t{}\n",
            r.id, r.method, r.cfg_digest, r.decision, r.score_xy, r.score_yx, r.wall_time_s, r.seed
        ));
    }
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let staged = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(Error::io(path))?;
    std::fs::write(staged.path(), body).map_err(Error::io(staged.path()))?;
    staged
        .persist(path)
        .map_err(|e| Error::io(path)(e.error))?;
    Ok(())
}

/// Read a results table back. Leading `#` provenance lines are skipped,
/// columns are matched by header name; unknown columns are ignored with a
/// warning, missing required columns are an error.
pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: "empty results file".into(),
    })?;
    let names: Vec<&str> = header.split('\t').collect();
    for name in &names {
        if !RESULT_COLUMNS.contains(name) {
            log::warn!("{}: ignoring unknown column `{name}`", path.display());
        }
    }
    let position = |wanted: &str| -> Result<usize> {
        names.iter().position(|n| *n == wanted).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing required column `{wanted}`"),
        })
    };
    let cols: Vec<usize> = RESULT_COLUMNS
        .iter()
        .map(|c| position(c))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let field = |slot: usize| -> Result<&str> {
            fields.get(cols[slot]).copied().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!(
                    "row has {} fields, column `{}` needs index {}",
                    fields.len(),
                    RESULT_COLUMNS[slot],
                    cols[slot] + 1
                ),
            })
        };
        let real = |slot: usize| -> Result<f64> {
            let raw = field(slot)?;
            raw.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("column `{}`: expected a real number, found `{raw}`", RESULT_COLUMNS[slot]),
            })
        };
        let decision: Decision = field(3)?.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("column `decision`: unknown value `{}`", field(3).unwrap_or("")),
        })?;
        let seed: u64 = field(7)?.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("column `seed`: expected an integer, found `{}`", field(7).unwrap_or("")),
        })?;
        records.push(ResultRecord {
            id: field(0)?.to_string(),
            method: field(1)?.to_string(),
            cfg_digest: field(2)?.to_string(),
            decision,
            score_xy: real(4)?,
            score_yx: real(5)?,
            wall_time_s: real(6)?,
            seed,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn record(id: &str) -> ResultRecord {
        ResultRecord {
            id: id.into(),
            method: "kiim-ht".into(),
            cfg_digest: "00e7f9abcd123456".into(),
            decision: Decision::XtoY,
            score_xy: 1.25e-3,
            score_yx: 0.75,
            wall_time_s: 0.031_25,
            seed: 17,
        }
    }

    fn write_benchmark(dir: &Path, meta: &str, files: &[(&str, &str)]) {
        fs::write(dir.join("pairmeta.txt"), meta).unwrap();
        for (name, body) in files {
            fs::write(dir.join(name), body).unwrap();
        }
    }

    #[test]
    fn pair_file_parsing_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("pair0001.txt");
        fs::write(&good, "# header\n1.0 2.0\n\n3.0 4e-1\n").unwrap();
        let m = parse_pair_file(&good).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(1, 1)], 0.4);

        let bad = dir.path().join("pair0002.txt");
        fs::write(&bad, "1.0 2.0\n3.0 oops\n").unwrap();
        let err = parse_pair_file(&bad).unwrap_err();
        assert!(err.to_string().contains("pair0002.txt:2"), "{err}");

        let ragged = dir.path().join("pair0003.txt");
        fs::write(&ragged, "1.0 2.0\n3.0\n").unwrap();
        let err = parse_pair_file(&ragged).unwrap_err();
        assert!(err.to_string().contains("pair0003.txt:2"), "{err}");
        assert!(err.to_string().contains("expected 2 columns"), "{err}");
    }

    #[test]
    fn loads_one_based_benchmark_and_orients_pairs() {
        let dir = tempfile::tempdir().unwrap();
        write_benchmark(
            dir.path(),
            // pair 2 is effect-first in the file; pair 3 is multivariate.
            "0001 1 1 2 2 1.0\n0002 2 2 1 1 0.5\n0003 1 2 3 3 1.0\n",
            &[
                ("pair0001.txt", "10.0 1.0\n20.0 2.0\n30.0 3.0\n"),
                ("pair0002.txt", "5.0 50.0\n6.0 60.0\n"),
                ("pair0003.txt", "1 2 3\n4 5 6\n"),
            ],
        );
        let pairs = load_tcep(dir.path()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].id, "0001");
        assert_eq!(pairs[0].data.x[(0, 0)], 10.0);
        assert_eq!(pairs[0].data.y[(2, 0)], 3.0);
        assert_eq!(pairs[0].weight, 1.0);
        // Pair 2: cause is file column 2, so x picks up the second column.
        assert_eq!(pairs[1].data.x[(0, 0)], 50.0);
        assert_eq!(pairs[1].data.y[(0, 0)], 5.0);
        assert_eq!(pairs[1].weight, 0.5);
        for p in &pairs {
            assert_eq!(p.data.truth, Some(Direction::XtoY));
        }
    }

    #[test]
    fn zero_based_metadata_is_autodetected() {
        let dir = tempfile::tempdir().unwrap();
        write_benchmark(
            dir.path(),
            "0001 0 0 1 1 1\n",
            &[("pair0001.txt", "7.0 8.0\n9.0 10.0\n")],
        );
        let pairs = load_tcep(dir.path()).unwrap();
        assert_eq!(pairs[0].data.x[(0, 0)], 7.0);
        assert_eq!(pairs[0].data.y[(0, 0)], 8.0);
    }

    #[test]
    fn benchmark_loading_errors() {
        let empty = tempfile::tempdir().unwrap();
        let err = load_tcep(empty.path()).unwrap_err();
        assert!(err.to_string().contains("pairmeta.txt"), "{err}");

        let dir = tempfile::tempdir().unwrap();
        write_benchmark(
            dir.path(),
            "0001 1 1 9 9 1\n",
            &[("pair0001.txt", "1.0 2.0\n")],
        );
        let err = load_tcep(dir.path()).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn downsampling_caps_and_preserves_rows() {
        let n = 1000;
        let data = PairDataset {
            x: DMatrix::from_fn(n, 1, |i, _| i as f64),
            y: DMatrix::from_fn(n, 1, |i, _| 2.0 * i as f64),
            truth: Some(Direction::XtoY),
            provenance: "test".into(),
        };
        let pair = TcepPair {
            id: "0001".into(),
            data,
            weight: 1.0,
        };
        let small = downsample(&pair, 400, 3).unwrap();
        assert_eq!(small.data.n(), 400);
        assert_eq!(small, downsample(&pair, 400, 3).unwrap());
        assert_ne!(small.data.x, downsample(&pair, 400, 4).unwrap().data.x);
        // Every kept row is an original (x, y) row, and no row repeats.
        let mut seen = std::collections::HashSet::new();
        for i in 0..400 {
            let x = small.data.x[(i, 0)];
            assert_eq!(small.data.y[(i, 0)], 2.0 * x);
            assert!(seen.insert(x.to_bits()), "row {x} repeated");
        }
        // Under the cap: untouched.
        let same = downsample(&pair, 2000, 3).unwrap();
        assert_eq!(same, pair);
        assert!(downsample(&pair, 1, 0).is_err());
    }

    #[test]
    fn results_round_trip_and_forward_compat() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.tsv");
        let records = vec![record("0001"), {
            let mut r = record("0002");
            r.decision = Decision::Undecided;
            r.score_xy = f64::INFINITY;
            r.seed = u64::MAX;
            r
        }];
        write_results(&records, &path).unwrap();
        assert_eq!(read_results(&path).unwrap(), records);

        write_results(&[], &path).unwrap();
        assert_eq!(read_results(&path).unwrap(), vec![]);

        // An extra column is ignored; a missing one is an error.
        fs::write(
            &path,
            "id\tmethod\tcfg_digest\tdecision\tscore_xy\tscore_yx\twall_time_s\tseed\tnote\n\
             a\tkcdc\tdeadbeefdeadbeef\ty->x\t2e0\t1e0\t0.5\t3\thello\n",
        )
        .unwrap();
        let got = read_results(&path).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].decision, Decision::YtoX);
        assert_eq!(got[0].seed, 3);

        fs::write(&path, "id\tmethod\n0001\tkcdc\n").unwrap();
        let err = read_results(&path).unwrap_err();
        assert!(err.to_string().contains("cfg_digest"), "{err}");

        fs::write(
            &path,
            "id\tmethod\tcfg_digest\tdecision\tscore_xy\tscore_yx\twall_time_s\tseed\n\
             a\tkcdc\td\tsideways\t1\t2\t0.1\t3\n",
        )
        .unwrap();
        let err = read_results(&path).unwrap_err();
        assert!(err.to_string().contains(":2"), "{err}");
    }

    #[test]
    fn meta_lines_round_trip_transparently() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.tsv");
        let records = vec![record("0005")];
        let meta = vec![
            ("command".to_string(), "tcep".to_string()),
            ("seed".to_string(), "7".to_string()),
        ];
        write_results_with_meta(&records, &meta, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# command = tcep\n# seed = 7\n"), "{text}");
        assert_eq!(read_results(&path).unwrap(), records);
    }
}
