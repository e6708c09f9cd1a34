//! CSV and JSON input and output.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hssm::gibbs::{Dataset, GibbsTrace, Snapshot, SweepPlan};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest round-trip decimal, switching to exponent notation for very
/// small or very large magnitudes. NaN is written as `NaN`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// A CSV file opened for writing.
pub struct CsvOut {
    path: PathBuf,
    w: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[&str]) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut out = Self {
            path: path.to_path_buf(),
            w: csv::Writer::from_writer(BufWriter::new(file)),
        };
        out.row(header.iter().copied())?;
        Ok(out)
    }

    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(|e| self.err(e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.w.flush().map_err(|e| CliError::io(&self.path, e))
    }

    fn err(&self, e: csv::Error) -> CliError {
        CliError::io(&self.path, std::io::Error::other(e))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn expect_header(r: &mut csv::Reader<File>, path: &Path, want: &[&str]) -> CliResult<()> {
    let h = r.headers().map_err(|e| bad(path, 1, e))?;
    if h.iter().ne(want.iter().copied()) {
        return Err(CliError::config(format!(
            "{}: header must be `{}`",
            path.display(),
            want.join(",")
        )));
    }
    Ok(())
}

fn bad(path: &Path, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{}:{line}: {msg}", path.display()))
}

/// Observations grouped by `group_id`, groups in increasing id order and
/// observations in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedData {
    pub ids: Vec<i64>,
    pub data: Dataset,
}

pub fn read_data(path: &Path) -> CliResult<GroupedData> {
    let mut r = reader(path)?;
    expect_header(&mut r, path, &["group_id", "y"])?;
    let mut groups: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(path, 0, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let id: i64 = rec[0]
            .parse()
            .map_err(|_| bad(path, line, format!("bad group_id `{}`", &rec[0])))?;
        let y: f64 = rec[1]
            .parse()
            .map_err(|_| bad(path, line, format!("bad y `{}`", &rec[1])))?;
        if !y.is_finite() {
            return Err(bad(path, line, "y must be finite"));
        }
        groups.entry(id).or_default().push(y);
    }
    if groups.is_empty() {
        return Err(CliError::config(format!(
            "{}: no observations",
            path.display()
        )));
    }
    let ids = groups.keys().copied().collect();
    let data = Dataset::new(groups.into_values().collect())?;
    Ok(GroupedData { ids, data })
}

pub fn write_data(path: &Path, d: &GroupedData) -> CliResult<()> {
    let mut out = CsvOut::create(path, &["group_id", "y"])?;
    for (id, ys) in d.ids.iter().zip(d.data.groups()) {
        for &y in ys {
            out.row([id.to_string(), fmt_f64(y)])?;
        }
    }
    out.finish()
}

pub fn read_truth(path: &Path) -> CliResult<Vec<usize>> {
    let mut r = reader(path)?;
    expect_header(&mut r, path, &["cluster"])?;
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(path, 0, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            rec[0]
                .parse()
                .map_err(|_| bad(path, line, format!("bad cluster `{}`", &rec[0])))
        })
        .collect()
}

pub fn write_truth(path: &Path, truth: &[usize]) -> CliResult<()> {
    let mut out = CsvOut::create(path, &["cluster"])?;
    for t in truth {
        out.row([t.to_string()])?;
    }
    out.finish()
}

const TRACE_HEADER: [&str; 4] = ["sweep", "D", "tables", "dishes"];

fn join(labels: &[u32]) -> String {
    labels
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// One row per snapshot; table and dish labels are space-separated.
pub fn write_trace(path: &Path, t: &GibbsTrace) -> CliResult<()> {
    let mut out = CsvOut::create(path, &TRACE_HEADER)?;
    for s in &t.snapshots {
        out.row([
            s.sweep.to_string(),
            s.dishes.to_string(),
            join(&s.tables),
            join(&s.dish_labels),
        ])?;
    }
    out.finish()
}

fn parse_labels(path: &Path, line: u64, field: &str) -> CliResult<Vec<u32>> {
    field
        .split_whitespace()
        .map(|x| {
            x.parse()
                .map_err(|_| bad(path, line, format!("bad label `{x}`")))
        })
        .collect()
}

/// Reads a trace written by [`write_trace`]. The sweep plan is not stored,
/// so it is rebuilt as burn-in 0 and thinning 1 up to the last sweep.
pub fn read_trace(path: &Path, group_sizes: Vec<usize>) -> CliResult<GibbsTrace> {
    let mut r = reader(path)?;
    expect_header(&mut r, path, &TRACE_HEADER)?;
    let mut snapshots = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(path, 0, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let sweep = rec[0].parse().map_err(|_| bad(path, line, "bad sweep"))?;
        let dishes: usize = rec[1].parse().map_err(|_| bad(path, line, "bad D"))?;
        let tables = parse_labels(path, line, &rec[2])?;
        let dish_labels = parse_labels(path, line, &rec[3])?;
        if tables.len() != dish_labels.len() {
            return Err(bad(path, line, "tables and dishes differ in length"));
        }
        if dish_labels
            .iter()
            .map(|&d| d as usize + 1)
            .max()
            .unwrap_or(0)
            != dishes
        {
            return Err(bad(path, line, "D does not match the dish labels"));
        }
        snapshots.push(Snapshot {
            sweep,
            dishes,
            tables,
            dish_labels,
        });
    }
    let last = snapshots
        .last()
        .ok_or_else(|| CliError::config(format!("{}: empty trace", path.display())))?;
    let n = last.dish_labels.len();
    if !group_sizes.is_empty() && group_sizes.iter().sum::<usize>() != n {
        return Err(CliError::config(format!(
            "{}: trace has {n} labels per row, data has {}",
            path.display(),
            group_sizes.iter().sum::<usize>()
        )));
    }
    Ok(GibbsTrace {
        plan: SweepPlan {
            sweeps: last.sweep,
            burn_in: 0,
            thin: 1,
        },
        group_sizes,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-300), "1e-300");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(-2.5e-7), "-2.5e-7");
    }

    #[test]
    fn data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "group_id,y\n3,1.5\n1,-2\n3,0.25\n").unwrap();
        let d = read_data(&p).unwrap();
        assert_eq!(d.ids, vec![1, 3]);
        assert_eq!(d.data.groups(), &[vec![-2.0], vec![1.5, 0.25]]);
        let q = dir.path().join("e.csv");
        write_data(&q, &d).unwrap();
        assert_eq!(read_data(&q).unwrap(), d);
    }

    #[test]
    fn bad_data_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "group,y\n1,2\n").unwrap();
        assert!(matches!(read_data(&p), Err(CliError::Config(_))));
        std::fs::write(&p, "group_id,y\n1,abc\n").unwrap();
        let e = read_data(&p).unwrap_err();
        assert!(e.to_string().contains(":2:"), "{e}");
        assert!(matches!(
            read_data(&dir.path().join("missing.csv")),
            Err(CliError::Io { .. })
        ));
    }

    #[test]
    fn trace_round_trip() {
        let t = GibbsTrace {
            plan: SweepPlan {
                sweeps: 3,
                burn_in: 1,
                thin: 1,
            },
            group_sizes: vec![2, 1],
            snapshots: vec![
                Snapshot {
                    sweep: 2,
                    dishes: 2,
                    tables: vec![0, 1, 0],
                    dish_labels: vec![0, 1, 1],
                },
                Snapshot {
                    sweep: 3,
                    dishes: 1,
                    tables: vec![0, 0, 0],
                    dish_labels: vec![0, 0, 0],
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&p, &t).unwrap();
        let back = read_trace(&p, vec![2, 1]).unwrap();
        assert_eq!(back.snapshots, t.snapshots);
        assert!(read_trace(&p, vec![5]).is_err());
    }
}
