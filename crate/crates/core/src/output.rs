//! CSV output.
//!
//! Every experiment writes the same columns:
//! `experiment,scheme,mode,bound,x,y,seed,config_hash`. CDF rows carry an SE
//! value in `x` and its cumulative probability in `y`; sweep rows carry the
//! AP count in `x` and the average SE in `y`.

use std::io::Write;

use serde::Serialize;

use crate::config::config_hash;
use crate::error::Result;
use crate::harness::{CdfSeries, ExperimentConfig, SweepPoint};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub experiment: String,
    pub scheme: &'static str,
    pub mode: &'static str,
    pub bound: &'static str,
    pub x: f64,
    pub y: f64,
    pub seed: u64,
    pub config_hash: String,
}

pub fn cdf_rows(experiment: &str, cfg: &ExperimentConfig, cdfs: &[CdfSeries]) -> Vec<OutputRow> {
    let hash = config_hash(cfg);
    let mut rows = Vec::new();
    for c in cdfs {
        for (&x, &y) in c.values.iter().zip(&c.probs) {
            rows.push(OutputRow {
                experiment: experiment.to_string(),
                scheme: c.series.scheme.as_str(),
                mode: c.series.mode.as_str(),
                bound: c.series.bound.as_str(),
                x,
                y,
                seed: cfg.seed,
                config_hash: hash.clone(),
            });
        }
    }
    rows
}

pub fn sweep_rows(experiment: &str, cfg: &ExperimentConfig, points: &[SweepPoint]) -> Vec<OutputRow> {
    let hash = config_hash(cfg);
    points
        .iter()
        .map(|p| OutputRow {
            experiment: experiment.to_string(),
            scheme: p.series.scheme.as_str(),
            mode: p.series.mode.as_str(),
            bound: p.series.bound.as_str(),
            x: p.m as f64,
            y: p.avg_se,
            seed: cfg.seed,
            config_hash: hash.clone(),
        })
        .collect()
}

pub fn write_rows<W: Write>(out: W, rows: &[OutputRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
