//! Per-round CSV telemetry and its metadata sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audit::{BoundContext, BoundKind};
use crate::error::{Error, Result};
use crate::record::RoundRecord;

/// Iterate entries beyond this many are elided from the CSV.
pub const MAX_ITERATE_COLUMNS: usize = 16;

pub const FIXED_COLUMNS: [&str; 10] = [
    "t",
    "player",
    "eta",
    "potential_value",
    "potential_bound",
    "blackwell_ip",
    "regret",
    "bound",
    "prediction_error_sq",
    "fallback",
];

/// Column names for runs whose largest action set has `max_actions` entries.
pub fn header(max_actions: usize) -> Vec<String> {
    let mut h: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    h.extend((0..max_actions.min(MAX_ITERATE_COLUMNS)).map(|i| format!("iterate_{i}")));
    if max_actions > MAX_ITERATE_COLUMNS {
        h.push("iterate_elided".into());
    }
    h
}

// Debug formatting is the shortest string that parses back to the same f64.
fn num(v: f64) -> String {
    format!("{v:?}")
}

pub struct TelemetryWriter<W: Write> {
    inner: csv::Writer<W>,
    max_actions: usize,
}

impl<W: Write> TelemetryWriter<W> {
    pub fn new(writer: W, max_actions: usize) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record(header(max_actions)).map_err(csv_error)?;
        Ok(TelemetryWriter { inner, max_actions })
    }

    pub fn write(&mut self, player: usize, rec: &RoundRecord) -> Result<()> {
        let mut row = vec![
            rec.t.to_string(),
            player.to_string(),
            num(rec.eta),
            num(rec.potential_value),
            num(rec.audit.potential_bound),
            num(rec.blackwell_ip),
            num(rec.measured_regret),
            num(rec.audit.regret_bound),
            num(rec.prediction_error_sq),
            u8::from(rec.fallback).to_string(),
        ];
        let shown = self.max_actions.min(MAX_ITERATE_COLUMNS);
        for i in 0..shown {
            row.push(rec.iterate.get(i).map(|v| num(*v)).unwrap_or_default());
        }
        if self.max_actions > MAX_ITERATE_COLUMNS {
            row.push(rec.iterate.len().saturating_sub(MAX_ITERATE_COLUMNS).to_string());
        }
        self.inner.write_record(&row).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

/// One parsed CSV row.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct TelemetryRow {
    pub t: usize,
    pub player: usize,
    pub eta: f64,
    pub potential_value: f64,
    pub potential_bound: f64,
    pub blackwell_ip: f64,
    pub regret: f64,
    pub bound: f64,
    pub prediction_error_sq: f64,
    pub fallback: u8,
}

pub fn read_rows(path: &Path) -> Result<Vec<TelemetryRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let mut rows = Vec::new();
    for r in reader.deserialize() {
        rows.push(r.map_err(csv_error)?);
    }
    Ok(rows)
}

/// Constants needed to recompute a player's bounds offline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayerMeta {
    pub smoothness: f64,
    pub exponent: f64,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub diameter: f64,
    pub bound_kind: String,
    pub eta1_admissible: bool,
    pub c_bound: f64,
}

impl PlayerMeta {
    pub fn from_context(ctx: &BoundContext) -> Self {
        let (a, b, p) = ctx.translation.constants();
        PlayerMeta {
            smoothness: ctx.smoothness,
            exponent: ctx.exponent,
            a,
            b,
            p,
            diameter: ctx.diameter,
            bound_kind: match ctx.bound_kind() {
                BoundKind::PotentialGrowth => "potential_growth".into(),
                BoundKind::Adaptive => "adaptive".into(),
            },
            eta1_admissible: ctx.eta1_admissible(),
            c_bound: ctx.c_bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryMeta {
    pub label: String,
    pub players: Vec<PlayerMeta>,
}

/// Sidecar location for a CSV file: `<file>.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}
