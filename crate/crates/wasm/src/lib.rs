//! Browser bindings: a live damped-KdV trajectory, the I-multiplier and
//! `σ_3` curves, and the modified-energy drift of an undamped run.

use kdv_core::dynamics::{hamiltonian, KdvParams, Solver, SolverState};
use kdv_core::ensemble::InitialRecipe;
use kdv_core::imethod::{modified_energy, sigma3, EnergyOrder, IMultiplier};
use kdv_core::GridSpec;
use wasm_bindgen::prelude::*;

/// Upper step size of the live view.
const MAX_DT: f64 = 2e-3;
const MAX_K: usize = 128;

fn grid(k: usize) -> Result<GridSpec, String> {
    if k > MAX_K {
        return Err(format!("K = {k} exceeds the demo limit {MAX_K}"));
    }
    GridSpec::new(k).map_err(|e| e.to_string())
}

/// A trajectory of `∂_t u + ∂_x³u + ½∂_x(u²) + γu = f` advanced on demand.
#[wasm_bindgen]
pub struct Evolution {
    solver: Solver,
    state: SolverState,
}

impl Evolution {
    /// Random band data `1 ≤ |ξ| ≤ min(8, K)` of `L²` size `amplitude`,
    /// forcing `cos(x + φ)` of `L²` size `forcing`.
    pub fn create(k: usize, gamma: f64, amplitude: f64, forcing: f64, seed: u32) -> Result<Self, String> {
        let grid = grid(k)?;
        let err = |e: kdv_core::Error| e.to_string();
        let u0 = InitialRecipe::RandomBand { lo: 1, hi: k.min(8) }
            .sample_normalized(grid, seed as u64, 0.0, amplitude)
            .map_err(err)?;
        let f = InitialRecipe::SingleMode { mode: 1 }
            .sample_normalized(grid, seed as u64 + 1, 0.0, forcing)
            .map_err(err)?;
        let p = KdvParams::new(grid, gamma, 0.0)
            .and_then(|p| p.with_forcing(f))
            .and_then(|p| p.with_stable_dt(&u0, Some(MAX_DT)))
            .map_err(err)?;
        let solver = Solver::new(&p).map_err(err)?;
        let state = SolverState::new(u0).map_err(err)?;
        Ok(Self { solver, state })
    }

    /// Advances by `span` in steps of at most the configured `dt`.
    pub fn advance_by(&mut self, span: f64) -> Result<(), String> {
        if !(span.is_finite() && span >= 0.0) {
            return Err(format!("span {span} must be >= 0"));
        }
        let (steps, h) = self.solver.params().steps_to(span);
        let solver = if (h - self.solver.step_size()).abs() > 0.0 {
            Solver::with_step(self.solver.params(), h).map_err(|e| e.to_string())?
        } else {
            self.solver.clone()
        };
        let t0 = self.state.t;
        for _ in 0..steps {
            self.state = solver.step(&self.state).map_err(|e| e.to_string())?;
        }
        self.state.t = t0 + span;
        Ok(())
    }
}

#[wasm_bindgen]
impl Evolution {
    #[wasm_bindgen(constructor)]
    pub fn new(k: usize, gamma: f64, amplitude: f64, forcing: f64, seed: u32) -> Result<Evolution, JsError> {
        Self::create(k, gamma, amplitude, forcing, seed).map_err(|e| JsError::new(&e))
    }

    pub fn advance(&mut self, span: f64) -> Result<(), JsError> {
        self.advance_by(span).map_err(|e| JsError::new(&e))
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn dt(&self) -> f64 {
        self.solver.step_size()
    }

    /// `u(x_j)` at `x_j = 2πj/M` on the product grid.
    pub fn profile(&self) -> Vec<f64> {
        let m = self.state.u.grid().m();
        self.state.u.to_physical(m).unwrap_or_default()
    }

    /// `|coeff(ξ)|` for `ξ = 1..=K`.
    pub fn spectrum(&self) -> Vec<f64> {
        self.state.u.half_spectrum()[1..].iter().map(|c| c.norm()).collect()
    }

    pub fn l2(&self) -> f64 {
        self.state.u.l2_norm()
    }

    pub fn hamiltonian(&self) -> f64 {
        hamiltonian(&self.state.u)
    }
}

/// `m(ξ)` for `ξ = 0..=xi_max`.
pub fn multiplier_values(n: f64, s: f64, xi_max: usize) -> Result<Vec<f64>, String> {
    let im = IMultiplier::new(n, s).map_err(|e| e.to_string())?;
    Ok((0..=xi_max as i64).map(|x| im.m(x)).collect())
}

/// `σ_3(ξ_1, ξ, −ξ_1−ξ)` for `ξ = −reach..=reach`; `NaN` where a frequency vanishes.
pub fn sigma3_values(n: f64, s: f64, xi1: i64, reach: usize) -> Result<Vec<f64>, String> {
    let im = IMultiplier::new(n, s).map_err(|e| e.to_string())?;
    let r = reach as i64;
    Ok((-r..=r).map(|x| sigma3([xi1, x, -xi1 - x], &im).unwrap_or(f64::NAN)).collect())
}

/// `(t, E²_I, E⁴_I)` triples at `frames + 1` equally spaced times of an
/// undamped, unforced run from random band data `1 ≤ |ξ| ≤ K/2`.
pub fn energy_series(k: usize, amplitude: f64, n: f64, s: f64, t_end: f64, frames: usize, seed: u32) -> Result<Vec<f64>, String> {
    if frames == 0 || !(t_end.is_finite() && t_end > 0.0) {
        return Err("need frames >= 1 and t_end > 0".into());
    }
    let grid = grid(k)?;
    let err = |e: kdv_core::Error| e.to_string();
    let im = IMultiplier::new(n, s).map_err(err)?;
    let u0 = InitialRecipe::RandomBand { lo: 1, hi: (k / 2).max(1) }
        .sample_normalized(grid, seed as u64, s, amplitude)
        .map_err(err)?;
    let p = KdvParams::new(grid, 0.0, s).and_then(|p| p.with_stable_dt(&u0, Some(MAX_DT))).map_err(err)?;
    let (steps, h) = p.steps_to(t_end / frames as f64);
    let solver = Solver::with_step(&p, h).map_err(err)?;
    let mut st = SolverState::new(u0).map_err(err)?;
    let mut out = Vec::with_capacity(3 * (frames + 1));
    for frame in 0..=frames {
        if frame > 0 {
            for _ in 0..steps {
                st = solver.step(&st).map_err(err)?;
            }
        }
        let e = modified_energy(&st.u, &im, EnergyOrder::Four);
        out.extend([frame as f64 * t_end / frames as f64, e.e2, e.e4]);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = multiplierCurve)]
pub fn multiplier_curve(n: f64, s: f64, xi_max: usize) -> Result<Vec<f64>, JsError> {
    multiplier_values(n, s, xi_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sigma3Slice)]
pub fn sigma3_slice(n: f64, s: f64, xi1: i32, reach: usize) -> Result<Vec<f64>, JsError> {
    sigma3_values(n, s, xi1 as i64, reach).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = energyDrift)]
pub fn energy_drift(k: usize, amplitude: f64, n: f64, s: f64, t_end: f64, frames: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    energy_series(k, amplitude, n, s, t_end, frames, seed).map_err(|e| JsError::new(&e))
}
