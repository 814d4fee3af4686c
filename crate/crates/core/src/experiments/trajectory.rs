//! Fixed-step drivers with an evenly spaced report schedule.

use rayon::prelude::*;

use crate::dynamics::{init_split, KdvParams, Solver, SolverState, SplitState};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// `steps` steps of size `h` reaching `T`, reporting every `stride` steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub steps: usize,
    pub h: f64,
    pub stride: usize,
}

impl Schedule {
    /// Step count is the smallest multiple of `reports` with `h ≤ p.dt`.
    pub fn new(p: &KdvParams, t_end: f64, reports: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::Input(format!("horizon T = {t_end} must be positive")));
        }
        if reports == 0 {
            return Err(Error::Input("at least one report interval is needed".into()));
        }
        let (n, _) = p.steps_to(t_end);
        let stride = n.div_ceil(reports);
        let steps = stride * reports;
        Ok(Self { steps, h: t_end / steps as f64, stride })
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn is_report(&self, i: usize) -> bool {
        i % self.stride == 0
    }

    pub fn end(&self) -> f64 {
        self.time(self.steps)
    }

    /// Step index closest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        ((t / self.h).round().max(0.0) as usize).min(self.steps)
    }
}

/// Runs the full equation and calls `observe(i, t, u)` for every step index
/// `0..=steps`; returns the final field.
pub fn evolve_full(
    u0: &SpectralField,
    p: &KdvParams,
    sched: &Schedule,
    mut observe: impl FnMut(usize, f64, &SpectralField) -> Result<()>,
) -> Result<SpectralField> {
    let solver = Solver::with_step(p, sched.h)?;
    let mut st = SolverState::new(u0.clone())?;
    observe(0, 0.0, &st.u)?;
    for i in 1..=sched.steps {
        st = solver.step(&st)?;
        st.t = sched.time(i);
        observe(i, st.t, &st.u)?;
    }
    Ok(st.u)
}

/// Runs the split system from `v = P_N u0`, `w = Q_N u0`.
pub fn evolve_split(
    u0: &SpectralField,
    p: &KdvParams,
    sched: &Schedule,
    mut observe: impl FnMut(usize, &SplitState) -> Result<()>,
) -> Result<SplitState> {
    let solver = Solver::with_step(p, sched.h)?;
    SolverState::new(u0.clone())?;
    let mut st = init_split(u0, p);
    observe(0, &st)?;
    for i in 1..=sched.steps {
        st = solver.step_split(&st)?;
        st.t = sched.time(i);
        observe(i, &st)?;
    }
    Ok(st)
}

/// Applies `run` to every member concurrently; results keep member order and
/// failures carry the member index.
pub fn run_members<T: Send>(
    members: &[SpectralField],
    run: impl Fn(usize, &SpectralField) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let out: Vec<Result<T>> = members.par_iter().enumerate().map(|(i, u)| run(i, u)).collect();
    out.into_iter()
        .enumerate()
        .map(|(member, r)| r.map_err(|e| Error::Member { member, source: Box::new(e) }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    #[test]
    fn schedule_lands_on_horizon() {
        let p = KdvParams::new(GridSpec::new(8).unwrap(), 0.1, -0.5).unwrap().with_dt(0.03).unwrap();
        let s = Schedule::new(&p, 1.0, 7).unwrap();
        assert_eq!(s.steps % 7, 0);
        assert!(s.h <= 0.03);
        assert!((s.end() - 1.0).abs() < 1e-15);
        assert!(s.is_report(s.steps));
        assert!(Schedule::new(&p, 0.0, 4).is_err());
    }
}
