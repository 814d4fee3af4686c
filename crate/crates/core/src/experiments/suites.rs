//! Named experiment suites.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{linear_fit, FitReport};
use super::record::{Summary, TrajectoryRecord};
use super::trajectory::{evolve_full, evolve_split, run_members, Schedule};
use super::xsb::{xsb_norm_estimate, MIN_SNAPSHOTS};
use super::{relative_spread, Thresholds};
use crate::dynamics::{hamiltonian, KdvParams};
use crate::error::{Error, Result};
use crate::imethod::{apply_i, lambda2_i, lambda3_flux, modified_energy, EnergyOrder, IMultiplier};
use crate::spectral::{GridSpec, SpectralField};

/// Report rows per trajectory.
pub const REPORTS: usize = 200;
/// The common ball has this multiple of the measured tail sup as radius.
pub const BALL_FACTOR: f64 = 2.0;
/// `‖w‖` below this counts as underflow in the decay fit.
pub const UNDERFLOW: f64 = 1e-250;
/// Lags `η`, in steps, of the equicontinuity probe.
pub const ETA_STEPS: [usize; 6] = [1, 2, 3, 4, 6, 8];

fn nan_row(rec: &mut TrajectoryRecord, t: f64, l2: f64, hs: f64, hs_w: f64, hs3_v: f64) {
    rec.push(t, l2, hs, hs_w, hs3_v, f64::NAN, f64::NAN, f64::NAN);
}

fn envelope(p: &KdvParams, sched: &Schedule, rows: &[Vec<[f64; 4]>]) -> TrajectoryRecord {
    let mut rec = TrajectoryRecord::new(Some(p.clone()));
    let count = rows.first().map_or(0, Vec::len);
    for r in 0..count {
        let mut m = [f64::NEG_INFINITY; 4];
        for member in rows {
            for (slot, v) in m.iter_mut().zip(member[r]) {
                *slot = slot.max(v);
            }
        }
        let fix = |v: f64| if v == f64::NEG_INFINITY { f64::NAN } else { v };
        nan_row(&mut rec, sched.time(r * sched.stride), fix(m[0]), fix(m[1]), fix(m[2]), fix(m[3]));
    }
    rec
}

fn forcing_is_zero(p: &KdvParams) -> bool {
    p.forcing.is_zero()
}

// ---------------------------------------------------------------- simulate

/// Plain trajectory of the full equation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub record: TrajectoryRecord,
    pub t_end: f64,
    pub l2_drift: f64,
    pub hamiltonian_drift: f64,
}

/// Runs the full equation to `T`; drifts are relative changes of `‖u‖_{L²}`
/// and of the Hamiltonian between `0` and `T`.
pub fn run_simulation(
    u0: &SpectralField,
    p: &KdvParams,
    t_end: f64,
    energies: Option<(&IMultiplier, EnergyOrder)>,
) -> Result<SimulationReport> {
    let sched = Schedule::new(p, t_end, REPORTS)?;
    let s = p.s.value();
    let mut record = TrajectoryRecord::new(Some(p.clone()));
    let u_end = evolve_full(u0, p, &sched, |i, t, u| {
        if sched.is_report(i) {
            record.push_full(t, u, s, energies);
        }
        Ok(())
    })?;
    let rel = |a: f64, b: f64| if a == 0.0 { (b - a).abs() } else { (b / a - 1.0).abs() };
    Ok(SimulationReport {
        record,
        t_end,
        l2_drift: rel(u0.l2_norm(), u_end.l2_norm()),
        hamiltonian_drift: rel(hamiltonian(u0), hamiltonian(&u_end)),
    })
}

impl SimulationReport {
    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("simulate", p);
        s.measure("l2_drift", self.l2_drift).measure("hamiltonian_drift", self.hamiltonian_drift);
        s.measure("t_end", self.t_end);
        s.verdict("finite", self.record.l2.iter().all(|v| v.is_finite()));
        if p.gamma == 0.0 && forcing_is_zero(p) && p.nonlinear {
            s.threshold("conservation_l2", th.conservation_l2);
            s.threshold("conservation_hamiltonian", th.conservation_hamiltonian);
            s.verdict("l2_conserved", self.l2_drift <= th.conservation_l2);
            s.verdict("hamiltonian_conserved", self.hamiltonian_drift <= th.conservation_hamiltonian);
        }
        s
    }
}

// ---------------------------------------------------------------- split

/// Full and split trajectories from the same data.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitReport {
    pub record: TrajectoryRecord,
    pub t_end: f64,
    /// `max_t ‖(v+w)(t) − u(t)‖_{L²}`.
    pub max_defect: f64,
    pub defect_per_time: f64,
}

pub fn run_split_consistency(u0: &SpectralField, p: &KdvParams, t_end: f64) -> Result<SplitReport> {
    let sched = Schedule::new(p, t_end, REPORTS)?;
    let s = p.s.value();
    let mut full = Vec::with_capacity(REPORTS + 1);
    evolve_full(u0, p, &sched, |i, _, u| {
        if sched.is_report(i) {
            full.push(u.clone());
        }
        Ok(())
    })?;
    let mut record = TrajectoryRecord::new(Some(p.clone()));
    let mut max_defect = 0.0f64;
    evolve_split(u0, p, &sched, |i, st| {
        if sched.is_report(i) {
            max_defect = max_defect.max(st.u().sub(&full[i / sched.stride]).l2_norm());
            record.push_split(st, s, None);
        }
        Ok(())
    })?;
    Ok(SplitReport { record, t_end, max_defect, defect_per_time: max_defect / t_end })
}

impl SplitReport {
    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("split", p);
        s.threshold("split_defect_rate", th.split_defect_rate);
        s.measure("max_defect", self.max_defect).measure("defect_per_time", self.defect_per_time);
        s.measure("t_end", self.t_end);
        s.verdict("split_consistent", self.defect_per_time <= th.split_defect_rate);
        s
    }
}

// ---------------------------------------------------------------- absorbing ball

#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingReport {
    /// Ensemble envelope: per-time maxima of `‖u‖_{L²}` and `‖u‖_{H^s}`.
    pub record: TrajectoryRecord,
    pub t_end: f64,
    pub initial_norms: Vec<f64>,
    /// Per-member sup of `‖u‖_{H^s}` on `[T/2, T]`.
    pub tail_sups: Vec<f64>,
    pub tail_sup: f64,
    pub spread: f64,
    pub ball_radius: f64,
    /// Last time each member is outside the ball.
    pub entry_times: Vec<f64>,
    /// Entry time against `ln ‖u_0‖_{H^s}` over members starting outside.
    pub entry_fit: Option<FitReport>,
    /// Every member's `‖u‖_{L²}` is non-increasing.
    pub monotone_l2: bool,
}

/// Runs every member to `T` and measures the absorbing ball.
///
/// Initial `H^s` norms must span at least two decades.
pub fn run_absorbing_ball(ensemble: &[SpectralField], p: &KdvParams, t_end: f64) -> Result<AbsorbingReport> {
    let s = p.s.value();
    let initial_norms: Vec<f64> = ensemble.iter().map(|u| u.weighted_norm(s)).collect();
    let hi = initial_norms.iter().cloned().fold(0.0, f64::max);
    let lo = initial_norms.iter().cloned().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    if ensemble.len() < 2 || hi < 100.0 * lo * (1.0 - 1e-9) {
        return Err(Error::Input(format!("initial H^s norms span [{lo:.3e}, {hi:.3e}], need two decades")));
    }
    let sched = Schedule::new(p, t_end, REPORTS)?;
    let rows = run_members(ensemble, |_, u0| {
        let mut rows = Vec::with_capacity(REPORTS + 1);
        evolve_full(u0, p, &sched, |i, _, u| {
            if sched.is_report(i) {
                rows.push([u.l2_norm(), u.weighted_norm(s), f64::NAN, f64::NAN]);
            }
            Ok(())
        })?;
        Ok(rows)
    })?;
    let record = envelope(p, &sched, &rows);
    let half = 0.5 * t_end;
    let tail_sups: Vec<f64> = rows
        .iter()
        .map(|m| {
            m.iter()
                .enumerate()
                .filter(|(r, _)| sched.time(r * sched.stride) >= half)
                .map(|(_, x)| x[1])
                .fold(0.0, f64::max)
        })
        .collect();
    let tail_sup = tail_sups.iter().cloned().fold(0.0, f64::max);
    let ball_radius = BALL_FACTOR * tail_sup;
    let entry_times: Vec<f64> = rows
        .iter()
        .map(|m| {
            m.iter()
                .rposition(|x| x[1] > ball_radius)
                .map_or(0.0, |r| sched.time((r + 1).min(m.len() - 1) * sched.stride))
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = initial_norms
        .iter()
        .zip(&entry_times)
        .filter(|(_, &t)| t > 0.0)
        .map(|(&r, &t)| (r.ln(), t))
        .unzip();
    let entry_fit = linear_fit(&xs, &ys).ok();
    let monotone_l2 = rows.iter().all(|m| m.windows(2).all(|w| w[1][0] <= w[0][0] * (1.0 + 1e-12)));
    Ok(AbsorbingReport {
        record,
        t_end,
        spread: relative_spread(&tail_sups),
        initial_norms,
        tail_sups,
        tail_sup,
        ball_radius,
        entry_times,
        entry_fit,
        monotone_l2,
    })
}

impl AbsorbingReport {
    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("absorbing", p);
        s.measure("tail_sup", self.tail_sup).measure("tail_spread", self.spread);
        s.measure("ball_radius", self.ball_radius).measure("t_end", self.t_end);
        if let Some(f) = &self.entry_fit {
            s.threshold("entry_fit_r2", th.entry_fit_r2);
            s.measure("entry_fit_slope", f.slope).measure("entry_fit_r2", f.r2);
            s.verdict("entry_time_logarithmic", f.r2 >= th.entry_fit_r2);
        }
        if forcing_is_zero(p) {
            s.verdict("l2_monotone", self.monotone_l2);
            if p.gamma * self.t_end >= th.control_gamma_t {
                s.threshold("control_floor", th.control_floor);
                s.verdict("control_decay", self.tail_sup < th.control_floor);
            }
        } else {
            s.threshold("tail_agreement", th.tail_agreement);
            s.verdict("tail_independent_of_radius", self.spread <= th.tail_agreement);
        }
        s
    }
}

// ---------------------------------------------------------------- decay of w

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub record: TrajectoryRecord,
    pub t_end: f64,
    pub n_split: f64,
    /// Fit of `ln ‖w(t)‖_{H^s}` on `[T/4, T]`; `None` when `w` underflowed.
    pub fit: Option<FitReport>,
    pub underflow: bool,
    pub w_start: f64,
    pub w_end: f64,
}

impl DecayReport {
    pub fn ratio(&self) -> f64 {
        self.w_end / self.w_start
    }

    /// Decay rate as a multiple of `γ`; `+∞` on underflow.
    pub fn rate_factor(&self, gamma: f64) -> f64 {
        match &self.fit {
            Some(f) => -f.slope / gamma,
            None => f64::INFINITY,
        }
    }

    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("decay", p);
        s.threshold("decay_rate_factor", th.decay_rate_factor);
        s.measure("rate_factor", self.rate_factor(p.gamma)).measure("w_ratio", self.ratio());
        s.measure("underflow", if self.underflow { 1.0 } else { 0.0 }).measure("t_end", self.t_end);
        if let Some(f) = &self.fit {
            s.measure("slope", f.slope).measure("fit_r2", f.r2);
        }
        s.verdict("decay_rate", self.underflow || self.rate_factor(p.gamma) >= th.decay_rate_factor);
        if p.gamma * self.t_end >= th.decay_gamma_t {
            s.threshold("decay_ratio", th.decay_ratio);
            s.verdict("w_ratio", self.underflow || self.ratio() <= th.decay_ratio);
        }
        s
    }
}

/// Evolves the split system and fits the decay rate of `w`.
pub fn run_decay(u0: &SpectralField, p: &KdvParams, t_end: f64) -> Result<DecayReport> {
    if !(p.gamma > 0.0) {
        return Err(Error::Domain("the decay of w needs a damping parameter gamma > 0".into()));
    }
    let s = p.s.value();
    let w_start = u0.project_high(p.n_split).weighted_norm(s);
    if w_start == 0.0 {
        return Err(Error::Input(format!("Q_N u0 vanishes for N = {}", p.n_split)));
    }
    let sched = Schedule::new(p, t_end, REPORTS)?;
    let mut record = TrajectoryRecord::new(Some(p.clone()));
    let end = evolve_split(u0, p, &sched, |i, st| {
        if sched.is_report(i) {
            record.push_split(st, s, None);
        }
        Ok(())
    })?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = record
        .window(0.25 * t_end, t_end)
        .filter(|&i| record.hs_w[i] > UNDERFLOW)
        .map(|i| (record.times[i], record.hs_w[i].ln()))
        .unzip();
    let fit = linear_fit(&xs, &ys).ok();
    Ok(DecayReport {
        record,
        t_end,
        n_split: p.n_split,
        underflow: fit.is_none(),
        fit,
        w_start,
        w_end: end.w.weighted_norm(s),
    })
}

/// Decay runs over `cutoffs` and the smallest cutoff from which every larger
/// one decays at rate at least `factor·γ`.
pub fn decay_threshold(
    u0: &SpectralField,
    p: &KdvParams,
    t_end: f64,
    cutoffs: &[f64],
    factor: f64,
) -> Result<(Option<f64>, Vec<DecayReport>)> {
    let mut sorted = cutoffs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let reports: Vec<Result<DecayReport>> =
        sorted.par_iter().map(|&n| run_decay(u0, &p.clone().with_split(n)?, t_end)).collect();
    let reports: Vec<DecayReport> = reports.into_iter().collect::<Result<_>>()?;
    let mut threshold = None;
    for r in reports.iter().rev() {
        if r.rate_factor(p.gamma) >= factor {
            threshold = Some(r.n_split);
        } else {
            break;
        }
    }
    Ok((threshold, reports))
}

// ---------------------------------------------------------------- smoothing

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingReport {
    pub record: TrajectoryRecord,
    pub t_end: f64,
    pub initial_hs: f64,
    /// `sup ‖v(t)‖_{H^{s+3}}` over `[T/2, T]`.
    pub tail_sup: f64,
}

pub fn run_smoothing(u0: &SpectralField, p: &KdvParams, t_end: f64) -> Result<SmoothingReport> {
    let s = p.s.value();
    let sched = Schedule::new(p, t_end, REPORTS)?;
    let mut record = TrajectoryRecord::new(Some(p.clone()));
    evolve_split(u0, p, &sched, |i, st| {
        if sched.is_report(i) {
            record.push_split(st, s, None);
        }
        Ok(())
    })?;
    let tail_sup = record.sup_over(&record.hs3_v, 0.5 * t_end, t_end);
    Ok(SmoothingReport { record, t_end, initial_hs: u0.weighted_norm(s), tail_sup })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingStudy {
    pub members: Vec<SmoothingReport>,
    /// `max/min` of the initial `H^s` norms.
    pub radius_span: f64,
    pub variation: f64,
    /// Tail sup of the largest member rerun with `2K` modes.
    pub refined_tail_sup: Option<f64>,
    pub refinement_change: Option<f64>,
}

/// Smoothing runs for every member, optionally repeating the one with the
/// largest initial norm on the doubled grid.
pub fn smoothing_study(ensemble: &[SpectralField], p: &KdvParams, t_end: f64, refine: bool) -> Result<SmoothingStudy> {
    if ensemble.is_empty() {
        return Err(Error::Input("empty ensemble".into()));
    }
    let members = run_members(ensemble, |_, u0| run_smoothing(u0, p, t_end))?;
    let norms: Vec<f64> = members.iter().map(|m| m.initial_hs).collect();
    let hi = norms.iter().cloned().fold(0.0, f64::max);
    let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
    let tails: Vec<f64> = members.iter().map(|m| m.tail_sup).collect();
    let (refined_tail_sup, refinement_change) = if refine {
        let fine = GridSpec::new(2 * p.grid.k())?;
        let big = (0..norms.len()).fold(0, |b, i| if norms[i] > norms[b] { i } else { b });
        let u0 = ensemble[big].embed(fine);
        let mut q = p.clone();
        q.grid = fine;
        q.forcing = p.forcing.embed(fine);
        let q = q.with_stable_dt(&u0, Some(p.dt))?;
        let r = run_smoothing(&u0, &q, t_end)?.tail_sup;
        (Some(r), Some((r - members[big].tail_sup).abs() / members[big].tail_sup))
    } else {
        (None, None)
    };
    Ok(SmoothingStudy {
        members,
        radius_span: hi / lo,
        variation: relative_spread(&tails),
        refined_tail_sup,
        refinement_change,
    })
}

impl SmoothingStudy {
    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("smoothing", p);
        s.threshold("smoothing_radius_variation", th.smoothing_radius_variation);
        s.measure("radius_span", self.radius_span).measure("tail_variation", self.variation);
        let sup = self.members.iter().map(|m| m.tail_sup).fold(0.0, f64::max);
        s.measure("tail_sup", sup);
        s.verdict("tail_finite", sup.is_finite());
        s.verdict("tail_independent_of_radius", self.variation < th.smoothing_radius_variation);
        if let (Some(r), Some(c)) = (self.refined_tail_sup, self.refinement_change) {
            s.threshold("smoothing_refinement", th.smoothing_refinement);
            s.measure("refined_tail_sup", r).measure("refinement_change", c);
            s.verdict("resolution_independent", c < th.smoothing_refinement);
        }
        s
    }
}

// ---------------------------------------------------------------- energy identity

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyIdentityReport {
    pub record: TrajectoryRecord,
    pub t_end: f64,
    pub steps: [f64; 2],
    /// Max relative residual of the identity at each step size.
    pub residuals: [f64; 2],
    pub order: f64,
    /// `|ΔE⁴|/|ΔE²|` over `[0, T]`, for unforced undamped runs.
    pub drift_ratio: Option<f64>,
}

/// Samples of the identity per run.
const IDENTITY_SAMPLES: usize = 8;

/// Compares the centred difference of `E²_I = ‖Iu‖²` with
/// `−2γE² + 2Λ_2(m;u,f) + Λ_3(M_3)` at interior report times, at steps
/// `dt` and `dt/2`.
pub fn run_energy_identity(
    u0: &SpectralField,
    p: &KdvParams,
    im: &IMultiplier,
    t_end: f64,
) -> Result<EnergyIdentityReport> {
    let coarse = Schedule::new(p, t_end, IDENTITY_SAMPLES + 1)?;
    let fine = Schedule { steps: 2 * coarse.steps, h: 0.5 * coarse.h, stride: 2 * coarse.stride };
    let residual = |sched: &Schedule| -> Result<f64> {
        let e2 = |u: &SpectralField| apply_i(u, im).l2_norm().powi(2);
        let mut last = f64::NAN;
        let mut pending: Option<(f64, f64, f64)> = None;
        let mut worst = 0.0f64;
        evolve_full(u0, p, sched, |i, _, u| {
            let e = e2(u);
            if let Some((rhs, scale, before)) = pending.take() {
                let fd = (e - before) / (2.0 * sched.h);
                worst = worst.max((fd - rhs).abs() / scale.max(f64::MIN_POSITIVE));
            }
            if i > 0 && i < sched.steps && sched.is_report(i) {
                let damp = -2.0 * p.gamma * e;
                let force = 2.0 * lambda2_i(u, &p.forcing, im)?;
                let flux = if p.nonlinear { lambda3_flux(u, im).re } else { 0.0 };
                pending = Some((damp + force + flux, damp.abs() + force.abs() + flux.abs(), last));
            }
            last = e;
            Ok(())
        })?;
        Ok(worst)
    };
    let r_coarse = residual(&coarse)?;
    let r_fine = residual(&fine)?;
    let s = p.s.value();
    let order_e = if p.nonlinear { EnergyOrder::Four } else { EnergyOrder::Two };
    let mut record = TrajectoryRecord::new(Some(p.clone()));
    let sched = Schedule::new(p, t_end, REPORTS.min(40))?;
    evolve_full(u0, p, &sched, |i, t, u| {
        if sched.is_report(i) {
            record.push_full(t, u, s, Some((im, order_e)));
        }
        Ok(())
    })?;
    let drift_ratio = (p.gamma == 0.0 && forcing_is_zero(p) && p.nonlinear).then(|| {
        let n = record.len() - 1;
        ((record.e4[n] - record.e4[0]) / (record.e2[n] - record.e2[0])).abs()
    });
    Ok(EnergyIdentityReport {
        record,
        t_end,
        steps: [coarse.h, fine.h],
        residuals: [r_coarse, r_fine],
        order: (r_coarse / r_fine).log2(),
        drift_ratio,
    })
}

impl EnergyIdentityReport {
    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("energy", p);
        s.threshold("energy_order", th.energy_order);
        s.measure("residual_dt", self.residuals[0]).measure("residual_dt_half", self.residuals[1]);
        s.measure("dt", self.steps[0]).measure("observed_order", self.order).measure("t_end", self.t_end);
        if let Some(d) = self.drift_ratio {
            s.measure("drift_ratio_e4_e2", d);
        }
        s.verdict("identity_converges", self.order >= th.energy_order);
        s
    }
}

/// Ensemble drift of the modified energies at one cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub n: f64,
    pub sum_de2: f64,
    pub sum_de4: f64,
    /// `Σ|ΔE⁴| / Σ|ΔE²|` over members.
    pub ratio: f64,
    /// Largest `|M_4|/scale` met on the resonant set.
    pub resonant_residual: f64,
}

/// Runs each member to `T` once and evaluates the drift of `E²_I` and `E⁴_I`
/// for every cutoff.
pub fn drift_ratios(ensemble: &[SpectralField], p: &KdvParams, cutoffs: &[f64], t_end: f64) -> Result<Vec<DriftRow>> {
    if ensemble.is_empty() {
        return Err(Error::Input("empty ensemble".into()));
    }
    let sched = Schedule::new(p, t_end, 1)?;
    let ends = run_members(ensemble, |_, u0| evolve_full(u0, p, &sched, |_, _, _| Ok(())))?;
    cutoffs
        .iter()
        .map(|&n| {
            let im = IMultiplier::new(n, p.s.value())?;
            let deltas: Vec<(f64, f64, f64)> = ensemble
                .par_iter()
                .zip(&ends)
                .map(|(a, b)| {
                    let ea = modified_energy(a, &im, EnergyOrder::Four);
                    let eb = modified_energy(b, &im, EnergyOrder::Four);
                    ((eb.e2 - ea.e2).abs(), (eb.e4 - ea.e4).abs(), ea.resonant_residual.max(eb.resonant_residual))
                })
                .collect();
            let sum_de2: f64 = deltas.iter().map(|d| d.0).sum();
            let sum_de4: f64 = deltas.iter().map(|d| d.1).sum();
            let resonant_residual = deltas.iter().map(|d| d.2).fold(0.0, f64::max);
            Ok(DriftRow { n, sum_de2, sum_de4, ratio: sum_de4 / sum_de2, resonant_residual })
        })
        .collect()
}

// ---------------------------------------------------------------- omega limit

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaReport {
    /// Ensemble envelope of the split-system norms.
    pub record: TrajectoryRecord,
    pub t_end: f64,
    /// Max over members and probes of `‖v‖_{H^{s+3}} + ‖w‖_{H^s}`.
    pub bound_proxy: f64,
    /// Max over members of `sup ‖u‖_{H^s}` on `[T/2, T]`.
    pub absorbing_radius: f64,
    /// Max pairwise `‖u_a(T) − u_b(T)‖_{H^s}`.
    pub max_distance: f64,
    pub late_norm: f64,
    pub etas: Vec<f64>,
    /// Max over members and probes of `‖u(t+η) − u(t)‖_{H^s}`.
    pub equicontinuity: Vec<f64>,
    pub equicontinuity_fit: Option<FitReport>,
}

impl OmegaReport {
    pub fn relative_distance(&self) -> f64 {
        if self.absorbing_radius > 0.0 {
            self.max_distance / self.absorbing_radius
        } else {
            0.0
        }
    }

    pub fn summary(&self, p: &KdvParams, th: &Thresholds) -> Summary {
        let mut s = Summary::new("omega", p);
        s.measure("bound_proxy", self.bound_proxy).measure("absorbing_radius", self.absorbing_radius);
        s.measure("max_distance", self.max_distance).measure("relative_distance", self.relative_distance());
        s.measure("late_norm", self.late_norm).measure("t_end", self.t_end);
        s.verdict("bounded", self.bound_proxy.is_finite());
        if forcing_is_zero(p) {
            if p.gamma * self.t_end >= th.control_gamma_t {
                s.threshold("control_floor", th.control_floor);
                s.verdict("late_states_vanish", self.late_norm < th.control_floor);
            }
        } else {
            s.threshold("attractor_thickness", th.attractor_thickness);
            s.verdict("attractor_thin", self.relative_distance() <= th.attractor_thickness);
        }
        if let Some(f) = &self.equicontinuity_fit {
            s.threshold("equicontinuity_r2", th.equicontinuity_r2);
            s.measure("equicontinuity_slope", f.slope).measure("equicontinuity_r2", f.r2);
            s.verdict("equicontinuous", f.r2 >= th.equicontinuity_r2);
        }
        s
    }
}

struct OmegaMember {
    rows: Vec<[f64; 4]>,
    bound: f64,
    equi: Vec<f64>,
    end: SpectralField,
}

/// Late-time structure of an ensemble: compactness proxy, pairwise
/// distances of the endpoints and an equicontinuity probe at `probes`.
pub fn run_omega_limit(ensemble: &[SpectralField], p: &KdvParams, t_end: f64, probes: &[f64]) -> Result<OmegaReport> {
    if ensemble.is_empty() {
        return Err(Error::Input("empty ensemble".into()));
    }
    if probes.is_empty() || probes.iter().any(|&t| !(t >= 0.5 * t_end && t <= t_end)) {
        return Err(Error::Input(format!("probes must lie in [T/2, T] = [{}, {t_end}]", 0.5 * t_end)));
    }
    let s = p.s.value();
    let sched = Schedule::new(p, t_end, REPORTS)?;
    let max_lag = *ETA_STEPS.last().expect("non-empty lags");
    if sched.steps < max_lag {
        return Err(Error::Input("horizon too short for the equicontinuity lags".into()));
    }
    let probe_idx: Vec<usize> = probes.iter().map(|&t| sched.index_of(t).min(sched.steps - max_lag)).collect();
    let members = run_members(ensemble, |_, u0| {
        let mut rows = Vec::with_capacity(REPORTS + 1);
        let mut bound = 0.0f64;
        let mut equi = vec![0.0f64; ETA_STEPS.len()];
        let mut anchors: BTreeMap<usize, SpectralField> = BTreeMap::new();
        let end = evolve_split(u0, p, &sched, |i, st| {
            let u = st.u();
            if sched.is_report(i) {
                rows.push([u.l2_norm(), u.weighted_norm(s), st.w.weighted_norm(s), st.v.weighted_norm(s + 3.0)]);
            }
            if probe_idx.contains(&i) {
                bound = bound.max(st.v.weighted_norm(s + 3.0) + st.w.weighted_norm(s));
                anchors.insert(i, u.clone());
            }
            for (&a, anchor) in &anchors {
                if let Some(j) = ETA_STEPS.iter().position(|&lag| a + lag == i) {
                    equi[j] = equi[j].max(u.sub(anchor).weighted_norm(s));
                }
            }
            anchors.retain(|&a, _| a + max_lag > i);
            Ok(())
        })?;
        Ok(OmegaMember { rows, bound, equi, end: end.u() })
    })?;
    let rows: Vec<Vec<[f64; 4]>> = members.iter().map(|m| m.rows.clone()).collect();
    let record = envelope(p, &sched, &rows);
    let absorbing_radius = record.sup_over(&record.hs, 0.5 * t_end, t_end);
    let mut max_distance = 0.0f64;
    for (a, ma) in members.iter().enumerate() {
        for mb in &members[a + 1..] {
            max_distance = max_distance.max(ma.end.sub(&mb.end).weighted_norm(s));
        }
    }
    let etas: Vec<f64> = ETA_STEPS.iter().map(|&l| l as f64 * sched.h).collect();
    let equicontinuity: Vec<f64> =
        (0..ETA_STEPS.len()).map(|j| members.iter().map(|m| m.equi[j]).fold(0.0, f64::max)).collect();
    Ok(OmegaReport {
        record,
        t_end,
        bound_proxy: members.iter().map(|m| m.bound).fold(0.0, f64::max),
        absorbing_radius,
        max_distance,
        late_norm: members.iter().map(|m| m.end.weighted_norm(s)).fold(0.0, f64::max),
        equicontinuity_fit: linear_fit(&etas, &equicontinuity).ok(),
        etas,
        equicontinuity,
    })
}

// ---------------------------------------------------------------- X_{s,b}

#[derive(Clone, Debug, PartialEq)]
pub struct XsbReport {
    pub record: TrajectoryRecord,
    pub t_end: f64,
    pub snapshots: usize,
    /// `(b, estimate)` pairs in increasing `b`.
    pub estimates: Vec<(f64, f64)>,
}

/// Runs the full equation and estimates the `X_{s,b}` size of the tail window
/// `[T/2, T]` for each `b`.
pub fn run_xsb(u0: &SpectralField, p: &KdvParams, t_end: f64, bs: &[f64], snapshots: usize) -> Result<XsbReport> {
    if snapshots < MIN_SNAPSHOTS {
        return Err(Error::Input(format!("need at least {MIN_SNAPSHOTS} snapshots, got {snapshots}")));
    }
    let s = p.s.value();
    let sched = Schedule::new(p, t_end, 2 * snapshots)?;
    let mut record = TrajectoryRecord::new(Some(p.clone()));
    let mut snaps = Vec::with_capacity(snapshots);
    evolve_full(u0, p, &sched, |i, t, u| {
        if sched.is_report(i) {
            record.push_full(t, u, s, None);
            if i >= sched.steps / 2 && i < sched.steps {
                snaps.push((t, u.clone()));
            }
        }
        Ok(())
    })?;
    let mut sorted = bs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let estimates = sorted.iter().map(|&b| Ok((b, xsb_norm_estimate(&snaps, s, b)?))).collect::<Result<_>>()?;
    Ok(XsbReport { record, t_end, snapshots: snaps.len(), estimates })
}

impl XsbReport {
    pub fn summary(&self, p: &KdvParams, _th: &Thresholds) -> Summary {
        let mut s = Summary::new("xsb", p);
        s.measure("snapshots", self.snapshots as f64).measure("t_end", self.t_end);
        for (b, e) in &self.estimates {
            s.measure(&format!("xsb_b{b:.3}"), *e);
        }
        s.verdict("finite", self.estimates.iter().all(|(_, e)| e.is_finite()));
        s.verdict("monotone_in_b", self.estimates.windows(2).all(|w| w[1].1 >= w[0].1));
        s
    }
}
