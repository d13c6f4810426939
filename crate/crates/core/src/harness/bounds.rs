//! CRLB curves over a sweep axis, both signal models.

use std::path::Path;

use super::config::ExperimentConfig;
use super::table::{fmt_f64, write_csv};
use crate::crlb::{crlb_eta, Variant};
use crate::Result;

/// Bounds at one sweep point, rad², indexed by source.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub sweep_value: f64,
    pub noncircular_doa: Vec<f64>,
    pub circular_doa: Vec<f64>,
    pub noncircular_spread: Vec<f64>,
    pub circular_spread: Vec<f64>,
}

impl BoundRow {
    pub fn ratio_doa(&self, k: usize) -> f64 {
        self.noncircular_doa[k] / self.circular_doa[k]
    }

    pub fn ratio_spread(&self, k: usize) -> f64 {
        self.noncircular_spread[k] / self.circular_spread[k]
    }
}

pub fn run_bound_sweep(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    cfg.validate()?;
    cfg.sweep
        .values()
        .into_iter()
        .map(|v| {
            let sc = cfg.scenario_at(v)?;
            log::info!("{} = {v}", cfg.sweep.column());
            let nc = crlb_eta(&sc, Variant::Noncircular)?;
            let ci = crlb_eta(&sc, Variant::Circular)?;
            let k = sc.sources.len();
            Ok(BoundRow {
                sweep_value: v,
                noncircular_doa: (0..k).map(|i| nc.doa(i)).collect(),
                circular_doa: (0..k).map(|i| ci.doa(i)).collect(),
                noncircular_spread: (0..k).map(|i| nc.spread(i)).collect(),
                circular_spread: (0..k).map(|i| ci.spread(i)).collect(),
            })
        })
        .collect()
}

pub fn bounds_header(sweep_column: &str, sources: usize) -> Vec<String> {
    let mut h = vec![sweep_column.to_string()];
    for k in 1..=sources {
        for p in ["doa", "spread"] {
            h.push(format!("log10_crlb_{p}_{k}_noncircular"));
            h.push(format!("log10_crlb_{p}_{k}_circular"));
        }
        h.push(format!("ratio_doa_{k}"));
        h.push(format!("ratio_spread_{k}"));
    }
    h
}

pub fn bounds_records(rows: &[BoundRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut rec = vec![fmt_f64(r.sweep_value)];
            for k in 0..r.noncircular_doa.len() {
                rec.push(fmt_f64(r.noncircular_doa[k].log10()));
                rec.push(fmt_f64(r.circular_doa[k].log10()));
                rec.push(fmt_f64(r.noncircular_spread[k].log10()));
                rec.push(fmt_f64(r.circular_spread[k].log10()));
                rec.push(fmt_f64(r.ratio_doa(k)));
                rec.push(fmt_f64(r.ratio_spread(k)));
            }
            rec
        })
        .collect()
}

pub fn write_bounds_csv(path: &Path, cfg: &ExperimentConfig, rows: &[BoundRow]) -> Result<()> {
    let header = bounds_header(cfg.sweep.column(), cfg.scenario.sources.len());
    write_csv(path, &header, &bounds_records(rows))
}
