//! Convergence and time-step reports with CSV and JSON serialization.

use std::fs;
use std::path::Path;

use avsfe_core::marking::eoc;
use avsfe_core::norms::ExactErrors;

use crate::error::{Error, Result};

/// One refinement level.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    /// Trial plus error-representation dofs.
    pub dofs: usize,
    pub trial_dofs: usize,
    pub h_max: f64,
    /// `None` when the problem has no exact solution.
    pub errors: Option<Errors>,
    pub energy_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Errors {
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_q: f64,
    pub hdiv_q: f64,
}

impl From<ExactErrors> for Errors {
    fn from(e: ExactErrors) -> Self {
        Self {
            l2_u: e.l2_u,
            h1_u: e.h1_u,
            l2_q: e.l2_q,
            hdiv_q: e.hdiv_q,
        }
    }
}

/// Rates between level `i` and `i + 1`, stored on row `i + 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rates {
    pub l2_u: Option<f64>,
    pub h1_u: Option<f64>,
    pub l2_q: Option<f64>,
    pub hdiv_q: Option<f64>,
    pub energy: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorReport {
    pub levels: Vec<LevelRecord>,
}

pub const LEVEL_HEADER: [&str; 13] = [
    "level",
    "dofs",
    "h_max",
    "L2_u",
    "H1_u",
    "L2_q",
    "Hdiv_q",
    "energy_estimate",
    "eoc_L2_u",
    "eoc_H1_u",
    "eoc_L2_q",
    "eoc_Hdiv_q",
    "eoc_energy",
];

pub const STEP_HEADER: [&str; 4] = ["step", "t", "L2_u", "energy_estimate"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl ErrorReport {
    pub fn push(&mut self, r: LevelRecord) {
        self.levels.push(r);
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// One entry per level; the first is all `None`.
    pub fn rates(&self) -> Vec<Rates> {
        let n = self.levels.len();
        let mut out = vec![Rates::default(); n];
        if n < 2 {
            return out;
        }
        let h: Vec<f64> = self.levels.iter().map(|l| l.h_max).collect();
        let series = |f: &dyn Fn(&LevelRecord) -> Option<f64>| -> Vec<Option<f64>> {
            let vals: Option<Vec<f64>> = self.levels.iter().map(f).collect();
            match vals {
                Some(v) => eoc(&v, &h).expect("lengths agree and n >= 2"),
                None => vec![None; n - 1],
            }
        };
        let l2 = series(&|l| l.errors.map(|e| e.l2_u));
        let h1 = series(&|l| l.errors.map(|e| e.h1_u));
        let lq = series(&|l| l.errors.map(|e| e.l2_q));
        let hd = series(&|l| l.errors.map(|e| e.hdiv_q));
        let en = series(&|l| Some(l.energy_estimate));
        for i in 1..n {
            out[i] = Rates {
                l2_u: l2[i - 1],
                h1_u: h1[i - 1],
                l2_q: lq[i - 1],
                hdiv_q: hd[i - 1],
                energy: en[i - 1],
            };
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        w.write_record(LEVEL_HEADER).map_err(fmt)?;
        for (l, r) in self.levels.iter().zip(self.rates()) {
            let e = l.errors;
            w.write_record([
                l.level.to_string(),
                l.dofs.to_string(),
                format!("{:e}", l.h_max),
                opt(e.map(|e| e.l2_u)),
                opt(e.map(|e| e.h1_u)),
                opt(e.map(|e| e.l2_q)),
                opt(e.map(|e| e.hdiv_q)),
                format!("{:e}", l.energy_estimate),
                opt(r.l2_u),
                opt(r.h1_u),
                opt(r.l2_q),
                opt(r.hdiv_q),
                opt(r.energy),
            ])
            .map_err(fmt)?;
        }
        into_string(w)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv()?)
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// One row of a time-marching log.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub l2_u: Option<f64>,
    pub energy_estimate: f64,
}

pub fn steps_to_csv(rows: &[StepRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(STEP_HEADER).map_err(fmt)?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            format!("{:e}", r.t),
            opt(r.l2_u),
            format!("{:e}", r.energy_estimate),
        ])
        .map_err(fmt)?;
    }
    into_string(w)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    write_text(path, &text)
}
