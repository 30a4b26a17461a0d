//! Parallel execution of config grids.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::run::{run, RunSummary};

/// A sweep file: either an explicit list of configs, or a base config and
/// axes whose cartesian product overrides top-level fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub configs: Vec<Value>,
    #[serde(default)]
    pub base: Option<Value>,
    /// Field name to candidate values, expanded in key order.
    #[serde(default)]
    pub axes: Map<String, Value>,
}

impl SweepGrid {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Expands the grid into raw config objects, explicit configs first.
    pub fn expand(&self) -> Result<Vec<Value>> {
        let mut out = self.configs.clone();
        if let Some(base) = &self.base {
            if !base.is_object() {
                return Err(Error::Config("sweep base must be an object".into()));
            }
            let mut combos = vec![base.clone()];
            for (key, values) in &self.axes {
                let values = values
                    .as_array()
                    .ok_or_else(|| Error::Config(format!("axis {key} must be an array")))?;
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        values.iter().map(move |v| {
                            let mut c = c.clone();
                            c[key.as_str()] = v.clone();
                            c
                        })
                    })
                    .collect();
            }
            out.extend(combos);
        } else if !self.axes.is_empty() {
            return Err(Error::Config("sweep axes need a base config".into()));
        }
        Ok(out)
    }
}

/// Outcome of one grid entry; failures stay local to their entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEntry {
    pub index: usize,
    pub label: String,
    pub predictor: String,
    pub csv: Option<PathBuf>,
    pub result: std::result::Result<RunSummary, String>,
}

fn entry_path(dir: &Path, index: usize, label: &str) -> PathBuf {
    dir.join(format!("{index:03}_{label}.csv"))
}

/// Runs every config of the grid on `jobs` threads. Results are ordered by
/// grid index and do not depend on `jobs`.
pub fn sweep(configs: &[Value], jobs: usize, out_dir: Option<&Path>) -> Result<Vec<SweepEntry>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, raw)| {
                let parsed = serde_json::from_value::<ExperimentConfig>(raw.clone())
                    .map_err(|e| e.to_string())
                    .and_then(|cfg| cfg.validate().map(|_| cfg).map_err(|e| e.to_string()))
                    .map_err(|e| format!("config error: {e}"));
                match parsed {
                    Err(e) => SweepEntry { index, label: format!("config{index}"), predictor: String::new(), csv: None, result: Err(e) },
                    Ok(cfg) => {
                        let label = cfg.label();
                        let csv = cfg
                            .output
                            .clone()
                            .or_else(|| out_dir.map(|d| entry_path(d, index, &label)));
                        let result = run(&cfg, csv.as_deref()).map_err(|e| e.to_string());
                        SweepEntry { index, label, predictor: cfg.predictor.label().into(), csv, result }
                    }
                }
            })
            .collect()
    }))
}

/// Comparison table with one row per grid entry, as CSV text. Wall time is
/// left out so the table is reproducible.
pub fn comparison_table(entries: &[SweepEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "index", "label", "predictor", "status", "final_regret", "bound", "bound_slack", "max_blackwell",
        "audit_passed", "exploitability", "ce_gap",
    ];
    w.write_record(header).expect("in-memory write");
    let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
    for e in entries {
        let row: Vec<String> = match &e.result {
            Ok(s) => vec![
                e.index.to_string(),
                e.label.clone(),
                e.predictor.clone(),
                "ok".into(),
                format!("{:?}", s.final_regret),
                format!("{:?}", s.bound),
                format!("{:?}", s.bound_slack),
                format!("{:?}", s.max_blackwell),
                s.audit_passed.to_string(),
                opt(s.exploitability),
                opt(s.ce_gap),
            ],
            Err(msg) => {
                let mut r = vec![e.index.to_string(), e.label.clone(), e.predictor.clone(), format!("error: {msg}")];
                r.resize(header.len(), String::new());
                r
            }
        };
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 table")
}
