use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{CurveRow, RunRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Jsonl,
}

impl CurveFormat {
    fn extension(self) -> &'static str {
        match self {
            CurveFormat::Csv => "csv",
            CurveFormat::Jsonl => "jsonl",
        }
    }
}

/// X-axis of the aggregate file: it is named `curves_by_<axis>` and
/// sorted by that column, then by seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveAxis {
    Epochs,
    Updates,
}

impl CurveAxis {
    fn name(self) -> &'static str {
        match self {
            CurveAxis::Epochs => "epochs",
            CurveAxis::Updates => "updates",
        }
    }
}

/// Aggregate-file row: the per-run columns prefixed by the run's seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub seed: u64,
    pub epoch: f64,
    pub updates: u64,
    pub train_loss: f64,
    pub eval_metric: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub noise_scale: f64,
}

impl AggregateRow {
    fn new(seed: u64, r: &CurveRow) -> Self {
        Self {
            seed,
            epoch: r.epoch,
            updates: r.updates,
            train_loss: r.train_loss,
            eval_metric: r.eval_metric,
            lr: r.lr,
            batch_size: r.batch_size,
            noise_scale: r.noise_scale,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_rows<T: Serialize>(path: &Path, format: CurveFormat, rows: &[T]) -> Result<()> {
    let out = create(path)?;
    match format {
        CurveFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        CurveFormat::Jsonl => {
            let mut w = out;
            for r in rows {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Write `dir/runs/<seed>.<ext>` for every record plus the aggregate
/// `dir/curves_by_<axis>.<ext>`. Returns the paths written, aggregate last.
///
/// Per-run CSV columns are exactly
/// `epoch, updates, train_loss, eval_metric, lr, batch_size, noise_scale`;
/// the aggregate prepends `seed`. JSONL files carry the same fields.
pub fn emit_curves(records: &[RunRecord], format: CurveFormat, axis: CurveAxis, dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Config("no run records to emit".into()));
    }
    let runs = dir.join("runs");
    std::fs::create_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
    let ext = format.extension();
    let mut written = Vec::with_capacity(records.len() + 1);
    let mut aggregate = Vec::new();
    for rec in records {
        let path = runs.join(format!("{}.{ext}", rec.seed));
        write_rows(&path, format, &rec.rows)?;
        written.push(path);
        aggregate.extend(rec.rows.iter().map(|r| AggregateRow::new(rec.seed, r)));
    }
    match axis {
        CurveAxis::Epochs => aggregate.sort_by(|a, b| a.epoch.total_cmp(&b.epoch).then(a.seed.cmp(&b.seed))),
        CurveAxis::Updates => aggregate.sort_by(|a, b| a.updates.cmp(&b.updates).then(a.seed.cmp(&b.seed))),
    }
    let path = dir.join(format!("curves_by_{}.{ext}", axis.name()));
    write_rows(&path, format, &aggregate)?;
    written.push(path);
    Ok(written)
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurveRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_curve_jsonl(path: &Path) -> Result<Vec<CurveRow>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(f)
        .lines()
        .map(|line| {
            let line = line.map_err(|e| Error::io(path, e))?;
            Ok(serde_json::from_str(&line)?)
        })
        .collect()
}

pub fn read_aggregate_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
