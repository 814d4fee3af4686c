//! Trajectory time series and their CSV/JSON persistence.
//!
//! `trace.csv` has one row per report time with the columns
//! `t,l2,hs,hs_w,hs3_v,E2,E3,E4`, every value written with 17 significant
//! digits. Quantities a suite does not measure are written as `NaN`.
//! `summary.json` is `{suite, params, thresholds, measurements, verdicts}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Integrator, KdvParams, SplitState};
use crate::error::{Error, Result};
use crate::imethod::{modified_energy, EnergyOrder, IMultiplier};
use crate::spectral::SpectralField;

pub const CSV_HEADER: &str = "t,l2,hs,hs_w,hs3_v,E2,E3,E4";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub hs: Vec<f64>,
    pub hs_w: Vec<f64>,
    pub hs3_v: Vec<f64>,
    pub e2: Vec<f64>,
    pub e3: Vec<f64>,
    pub e4: Vec<f64>,
    pub meta: Option<KdvParams>,
}

impl TrajectoryRecord {
    pub fn new(meta: Option<KdvParams>) -> Self {
        Self {
            times: Vec::new(),
            l2: Vec::new(),
            hs: Vec::new(),
            hs_w: Vec::new(),
            hs3_v: Vec::new(),
            e2: Vec::new(),
            e3: Vec::new(),
            e4: Vec::new(),
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push(&mut self, t: f64, l2: f64, hs: f64, hs_w: f64, hs3_v: f64, e2: f64, e3: f64, e4: f64) {
        if let Some(&last) = self.times.last() {
            assert!(t > last, "record times must increase: {t} after {last}");
        }
        self.times.push(t);
        self.l2.push(l2);
        self.hs.push(hs);
        self.hs_w.push(hs_w);
        self.hs3_v.push(hs3_v);
        self.e2.push(e2);
        self.e3.push(e3);
        self.e4.push(e4);
    }

    /// Row for a state of the full equation; split columns are `NaN`.
    pub fn push_full(&mut self, t: f64, u: &SpectralField, s: f64, energies: Option<(&IMultiplier, EnergyOrder)>) {
        let (e2, e3, e4) = energy_columns(u, energies);
        self.push(t, u.l2_norm(), u.weighted_norm(s), f64::NAN, f64::NAN, e2, e3, e4);
    }

    /// Row for a state of the split system.
    pub fn push_split(&mut self, st: &SplitState, s: f64, energies: Option<(&IMultiplier, EnergyOrder)>) {
        let u = st.u();
        let (e2, e3, e4) = energy_columns(&u, energies);
        self.push(
            st.t,
            u.l2_norm(),
            u.weighted_norm(s),
            st.w.weighted_norm(s),
            st.v.weighted_norm(s + 3.0),
            e2,
            e3,
            e4,
        );
    }

    /// Indices whose time lies in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = usize> + '_ {
        self.times.iter().enumerate().filter(move |(_, &t)| t >= lo && t <= hi).map(|(i, _)| i)
    }

    /// `sup` of a column over `[lo, hi]`.
    pub fn sup_over(&self, column: &[f64], lo: f64, hi: f64) -> f64 {
        self.window(lo, hi).map(|i| column[i]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let row = [
                self.times[i],
                self.l2[i],
                self.hs[i],
                self.hs_w[i],
                self.hs3_v[i],
                self.e2[i],
                self.e3[i],
                self.e4[i],
            ];
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV written by [`TrajectoryRecord::to_csv`]; `meta` is not
    /// part of the CSV and comes back as `None`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h == CSV_HEADER => {}
            other => return Err(Error::Parse(format!("bad header {other:?}"))),
        }
        let mut rec = Self::new(None);
        for (n, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|x| x.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", n + 1))))
                .collect::<Result<_>>()?;
            if vals.len() != 8 {
                return Err(Error::Parse(format!("row {} has {} fields", n + 1, vals.len())));
            }
            if rec.times.last().is_some_and(|&t| vals[0] <= t) {
                return Err(Error::Parse(format!("row {}: time not increasing", n + 1)));
            }
            rec.push(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7]);
        }
        Ok(rec)
    }
}

fn energy_columns(u: &SpectralField, energies: Option<(&IMultiplier, EnergyOrder)>) -> (f64, f64, f64) {
    match energies {
        None => (f64::NAN, f64::NAN, f64::NAN),
        Some((im, order)) => {
            let e = modified_energy(u, im, order);
            let pick = |o: EnergyOrder, v: f64| if e.has(o) { v } else { f64::NAN };
            (e.e2, pick(EnergyOrder::Three, e.e3), pick(EnergyOrder::Four, e.e4))
        }
    }
}

/// Scalar description of a run's parameters for the JSON summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub gamma: f64,
    pub s: f64,
    pub n_split: f64,
    pub k: usize,
    pub m: usize,
    pub dt: f64,
    pub integrator: Integrator,
    pub nonlinear: bool,
    pub forcing_l2: f64,
}

impl From<&KdvParams> for ParamSummary {
    fn from(p: &KdvParams) -> Self {
        Self {
            gamma: p.gamma,
            s: p.s.value(),
            n_split: p.n_split,
            k: p.grid.k(),
            m: p.grid.m(),
            dt: p.dt,
            integrator: p.integrator,
            nonlinear: p.nonlinear,
            forcing_l2: p.forcing.l2_norm(),
        }
    }
}

/// Thresholds, measured values and boolean verdicts of one suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: String,
    pub params: ParamSummary,
    pub thresholds: BTreeMap<String, f64>,
    pub measurements: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
}

impl Summary {
    pub fn new(suite: &str, params: &KdvParams) -> Self {
        Self {
            suite: suite.to_string(),
            params: params.into(),
            thresholds: BTreeMap::new(),
            measurements: BTreeMap::new(),
            verdicts: BTreeMap::new(),
        }
    }

    pub fn threshold(&mut self, key: &str, v: f64) -> &mut Self {
        self.thresholds.insert(key.to_string(), v);
        self
    }

    pub fn measure(&mut self, key: &str, v: f64) -> &mut Self {
        self.measurements.insert(key.to_string(), v);
        self
    }

    pub fn verdict(&mut self, key: &str, ok: bool) -> &mut Self {
        self.verdicts.insert(key.to_string(), ok);
        self
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary is always serializable");
        s.push('\n');
        s
    }
}

fn write(path: PathBuf, contents: &str) -> Result<()> {
    fs::write(&path, contents).map_err(|source| Error::Io { path, source })
}

/// Writes `trace.csv` and `summary.json` into `dir`, creating it if needed.
pub fn persist(record: &TrajectoryRecord, summary: &Summary, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    write(dir.join("trace.csv"), &record.to_csv())?;
    write(dir.join("summary.json"), &summary.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_record_is_header_only() {
        assert_eq!(TrajectoryRecord::new(None).to_csv(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut r = TrajectoryRecord::new(None);
        r.push(0.1, 1.0 / 3.0, 2.0f64.sqrt(), f64::NAN, 1e-300, -7.5e12, 0.0, std::f64::consts::PI);
        r.push(0.2, 0.1 + 0.2, 1e-17, 5.0, 6.0, 7.0, 8.0, 9.0);
        let back = TrajectoryRecord::from_csv(&r.to_csv()).unwrap();
        assert_eq!(back.times, r.times);
        assert_eq!(back.l2, r.l2);
        assert!(back.hs_w[0].is_nan());
        assert_eq!(back.e4, r.e4);
        assert!(TrajectoryRecord::from_csv("a,b\n").is_err());
    }

    #[test]
    #[should_panic(expected = "must increase")]
    fn times_must_increase() {
        let mut r = TrajectoryRecord::new(None);
        r.push(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        r.push(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    }
}
