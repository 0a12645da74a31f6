//! Summary JSON and per-metric CSV output.

use super::run::RunRecord;
use crate::error::{Error, Result};
use crate::mc::{median, sample_variance, Estimate};
use serde::Serialize;
use std::fs;
use std::path::Path;

#[derive(Clone, Debug, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub median: f64,
    pub variance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeEvents {
    pub n: usize,
    pub trials: usize,
    pub excluded: usize,
    pub resampled_trials: usize,
    pub resamples: usize,
    pub roots_at_infinity: usize,
    pub dropped_points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub config_hash: String,
    pub config: serde_json::Value,
    pub events: Vec<DegreeEvents>,
    pub metrics: Vec<MetricSummary>,
}

pub fn summarize(record: &RunRecord) -> Summary {
    let cfg = &record.config;
    let mut events = Vec::new();
    let mut metrics = Vec::new();
    for &n in &cfg.degrees {
        let cells: Vec<_> = record.trials.iter().filter(|t| t.n == n).collect();
        events.push(DegreeEvents {
            n,
            trials: cells.len(),
            excluded: cells.iter().filter(|t| t.excluded).count(),
            resampled_trials: cells.iter().filter(|t| t.resamples > 0).count(),
            resamples: cells.iter().map(|t| t.resamples).sum(),
            roots_at_infinity: cells.iter().map(|t| t.at_infinity).sum(),
            dropped_points: cells.iter().map(|t| t.dropped_points).sum(),
        });
        for (i, m) in cfg.metrics.iter().enumerate() {
            let v: Vec<f64> = cells.iter().filter(|t| !t.excluded).map(|t| t.values[i]).collect();
            let est = Estimate::from_samples(&v);
            metrics.push(MetricSummary {
                metric: m.label(),
                n,
                trials: v.len(),
                mean: est.mean,
                stderr: (v.len() > 1).then_some(est.stderr),
                median: median(&v),
                variance: sample_variance(&v),
            });
        }
    }
    Summary {
        config_hash: record.config_hash.clone(),
        config: serde_json::to_value(cfg).expect("config serializes"),
        events,
        metrics,
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `summary.json`, one `<metric>.csv` per metric (`n,trial,value`),
/// optional per-trial root CSVs, and `timing.json` (the only file that
/// differs between identical runs).
pub fn emit_report(record: &RunRecord, dir: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: dir.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let summary = summarize(record);
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    write(&dir.join("summary.json"), &text)?;
    for (i, m) in record.config.metrics.iter().enumerate() {
        let mut csv = String::from("n,trial,value\n");
        for t in record.trials.iter().filter(|t| !t.excluded) {
            csv.push_str(&format!("{},{},{:?}\n", t.n, t.trial, t.values[i]));
        }
        write(&dir.join(format!("{}.csv", m.label())), &csv)?;
    }
    if record.config.save_roots {
        let roots_dir = dir.join("roots");
        fs::create_dir_all(&roots_dir).map_err(io)?;
        for t in &record.trials {
            if let Some(rs) = &t.roots {
                write(&roots_dir.join(format!("n{}_t{}.csv", t.n, t.trial)), &rs.to_csv())?;
            }
        }
    }
    let timing = serde_json::json!({ "wall_time_seconds": record.wall_time.as_secs_f64() });
    write(&dir.join("timing.json"), &format!("{timing}\n"))?;
    Ok(())
}
