//! Time integration of `∂_t u + ∂_x³ u + ½∂_x(u²) + γu = f` on the torus,
//! and of the frequency-split pair `u = v + w`.
//!
//! In Fourier variables the equation reads
//! `∂_t û = (iξ³ − γ)û − (iξ/2)(u²)^ + f̂`. The linear part is propagated
//! exactly per mode; the rest enters a fourth-order exponential integrator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imethod::{apply_i, IMultiplier};
use crate::spectral::{GridSpec, SobolevIndex, SpectralField};

/// Any `L²` norm above this is treated as a blow-up.
const BLOWUP_NORM: f64 = 1e10;
/// Allowed `|coeff(0)|` along a trajectory.
const MEAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Cox–Matthews ETDRK4.
    #[default]
    ExponentialRk4,
    /// Classical RK4 in the interaction picture.
    IntegratingFactorRk4,
}

/// Largest step allowed by the transport bound `dt ≤ 0.5 / (K‖u‖_∞ + 1)`.
pub fn stable_dt(grid: GridSpec, sup_norm: f64) -> f64 {
    0.5 / (grid.k() as f64 * sup_norm + 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdvParams {
    /// Damping rate `γ ≥ 0`; the dissipative claims need `γ > 0`.
    pub gamma: f64,
    pub s: SobolevIndex,
    /// Cutoff `N` of the split `v = P_N`-coupled, `w = Q_N`-coupled.
    pub n_split: f64,
    /// Time-independent, mean-zero forcing.
    pub forcing: SpectralField,
    pub grid: GridSpec,
    pub dt: f64,
    pub integrator: Integrator,
    /// Switches the quadratic term off (linear test mode).
    pub nonlinear: bool,
}

impl KdvParams {
    /// Parameters with zero forcing, `N = K/4`, and `dt` set by the transport
    /// bound for unit amplitude.
    pub fn new(grid: GridSpec, gamma: f64, s: f64) -> Result<Self> {
        let p = Self {
            gamma,
            s: SobolevIndex::new(s)?,
            n_split: (grid.k() / 4).max(1) as f64,
            forcing: SpectralField::zeros(grid),
            grid,
            dt: stable_dt(grid, 1.0),
            integrator: Integrator::default(),
            nonlinear: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_forcing(mut self, forcing: SpectralField) -> Result<Self> {
        self.forcing = forcing;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_split(mut self, n: f64) -> Result<Self> {
        self.n_split = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Sets `dt` from the transport bound for a trajectory starting at `u0`:
    /// the sup norm is taken over `u0` and the stationary profile.
    pub fn with_stable_dt(mut self, u0: &SpectralField, cap: Option<f64>) -> Result<Self> {
        let g = stationary_profile(&self.forcing, self.gamma.max(1e-300))?;
        let sup = u0.max_abs() + g.max_abs();
        let mut dt = stable_dt(self.grid, sup);
        if let Some(c) = cap {
            dt = dt.min(c);
        }
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::Domain(format!("gamma = {} must be >= 0", self.gamma)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.n_split.is_finite() && self.n_split > 0.0) {
            return Err(Error::Domain(format!("N_split = {} must be positive", self.n_split)));
        }
        if self.forcing.grid() != self.grid {
            return Err(Error::Shape("forcing lives on a different grid".into()));
        }
        if self.forcing.mean() != 0.0 || !self.forcing.is_finite() {
            return Err(Error::Domain("forcing must be finite and mean-zero".into()));
        }
        Ok(())
    }

    /// Number of steps and the adjusted step that land exactly on `t`.
    pub fn steps_to(&self, t: f64) -> (usize, f64) {
        if t <= 0.0 {
            return (0, self.dt);
        }
        let n = (t / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, t / n as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub u: SpectralField,
    pub t: f64,
}

impl SolverState {
    pub fn new(u: SpectralField) -> Result<Self> {
        if u.mean() != 0.0 {
            return Err(Error::Domain("initial data must be mean-zero".into()));
        }
        Ok(Self { u, t: 0.0 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitState {
    pub v: SpectralField,
    pub w: SpectralField,
    pub t: f64,
}

impl SplitState {
    pub fn u(&self) -> SpectralField {
        self.v.add(&self.w)
    }
}

/// `(g_N, y, z)` with `g_N = Q_N g`, `y = P_N v`, `z = Q_N v − g_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityState {
    pub g_n: SpectralField,
    pub y: SpectralField,
    pub z: SpectralField,
}

/// Solution of `∂_x³ g + γ g = f`: `ĝ(ξ) = f̂(ξ)/(γ − iξ³)`.
pub fn stationary_profile(f: &SpectralField, gamma: f64) -> Result<SpectralField> {
    if !(gamma > 0.0) {
        return Err(Error::Domain(format!("stationary profile needs gamma > 0, got {gamma}")));
    }
    Ok(f.map_multiplier(|xi| {
        if xi == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(gamma, -((xi as f64).powi(3))).inv()
        }
    }))
}

/// `φ_1, φ_2, φ_3` at `z`, by Taylor series near the origin.
fn phi123(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 0.5 {
        // φ_j(z) = Σ_n z^n / (n + j)!
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut term = Complex64::new(1.0, 0.0);
            let mut fact = 1.0;
            for i in 1..=(j + 1) {
                fact *= i as f64;
            }
            term /= fact;
            let mut acc = term;
            for n in 1..30 {
                term = term * z / (n + j + 1) as f64;
                acc += term;
            }
            *slot = acc;
        }
        out
    } else {
        let e = z.exp();
        let p1 = (e - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

/// Per-mode coefficients of one exponential step of size `h`.
#[derive(Clone, Debug)]
struct StepCoefficients {
    e: Vec<Complex64>,
    e_half: Vec<Complex64>,
    /// `(h/2) φ_1(Lh/2)`
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl StepCoefficients {
    fn new(grid: GridSpec, gamma: f64, h: f64) -> Self {
        let k = grid.k();
        let mut c = Self {
            e: Vec::with_capacity(k + 1),
            e_half: Vec::with_capacity(k + 1),
            q: Vec::with_capacity(k + 1),
            f1: Vec::with_capacity(k + 1),
            f2: Vec::with_capacity(k + 1),
            f3: Vec::with_capacity(k + 1),
        };
        for xi in 0..=k {
            let l = Complex64::new(-gamma, (xi as f64).powi(3));
            let z = l * h;
            let [p1, p2, p3] = phi123(z);
            let [ph1, _, _] = phi123(z * 0.5);
            c.e.push(z.exp());
            c.e_half.push((z * 0.5).exp());
            c.q.push(ph1 * (0.5 * h));
            c.f1.push((p1 - p2 * 3.0 + p3 * 4.0) * h);
            c.f2.push((p2 - p3 * 2.0) * h);
            c.f3.push((p3 * 4.0 - p2) * h);
        }
        c
    }
}

/// Mode-wise `Σ_j w_j[ξ] · x_j[ξ]` over fields sharing a grid.
fn combine(grid: GridSpec, terms: &[(&[Complex64], &SpectralField)]) -> SpectralField {
    let mut out = SpectralField::zeros(grid);
    let dst = out.coeffs_mut();
    for (w, x) in terms {
        for ((d, wi), xi) in dst.iter_mut().zip(w.iter()).zip(x.half_spectrum()) {
            *d += wi * xi;
        }
    }
    out
}

fn combine_scaled(grid: GridSpec, terms: &[(Complex64, &[Complex64], &SpectralField)]) -> SpectralField {
    let mut out = SpectralField::zeros(grid);
    let dst = out.coeffs_mut();
    for (a, w, x) in terms {
        for ((d, wi), xi) in dst.iter_mut().zip(w.iter()).zip(x.half_spectrum()) {
            *d += a * wi * xi;
        }
    }
    out
}

/// One exponential step for a system of components that share the linear
/// operator `iξ³ − γ`.
fn exponential_step(
    integrator: Integrator,
    coef: &StepCoefficients,
    h: f64,
    x: &[SpectralField],
    rhs: &dyn Fn(&[SpectralField]) -> Vec<SpectralField>,
) -> Vec<SpectralField> {
    let grid = x[0].grid();
    let one = vec![Complex64::new(1.0, 0.0); grid.k() + 1];
    let c = coef;
    match integrator {
        Integrator::ExponentialRk4 => {
            let nu = rhs(x);
            let a: Vec<_> = (0..x.len())
                .map(|i| combine(grid, &[(&c.e_half, &x[i]), (&c.q, &nu[i])]))
                .collect();
            let na = rhs(&a);
            let b: Vec<_> = (0..x.len())
                .map(|i| combine(grid, &[(&c.e_half, &x[i]), (&c.q, &na[i])]))
                .collect();
            let nb = rhs(&b);
            let cc: Vec<_> = (0..x.len())
                .map(|i| {
                    let two_nb_minus_nu = nb[i].scale(2.0).sub(&nu[i]);
                    combine(grid, &[(&c.e_half, &a[i]), (&c.q, &two_nb_minus_nu)])
                })
                .collect();
            let nc = rhs(&cc);
            (0..x.len())
                .map(|i| {
                    let nab = na[i].add(&nb[i]);
                    combine_scaled(
                        grid,
                        &[
                            (Complex64::new(1.0, 0.0), &c.e, &x[i]),
                            (Complex64::new(1.0, 0.0), &c.f1, &nu[i]),
                            (Complex64::new(2.0, 0.0), &c.f2, &nab),
                            (Complex64::new(1.0, 0.0), &c.f3, &nc[i]),
                        ],
                    )
                })
                .collect()
        }
        Integrator::IntegratingFactorRk4 => {
            let hh = Complex64::new(0.5 * h, 0.0);
            let k1 = rhs(x);
            let a: Vec<_> = (0..x.len())
                .map(|i| {
                    let y = combine_scaled(grid, &[(Complex64::new(1.0, 0.0), &one, &x[i]), (hh, &one, &k1[i])]);
                    combine(grid, &[(&c.e_half, &y)])
                })
                .collect();
            let k2 = rhs(&a);
            let b: Vec<_> = (0..x.len())
                .map(|i| {
                    combine_scaled(grid, &[(Complex64::new(1.0, 0.0), &c.e_half, &x[i]), (hh, &one, &k2[i])])
                })
                .collect();
            let k3 = rhs(&b);
            let cc: Vec<_> = (0..x.len())
                .map(|i| {
                    combine_scaled(
                        grid,
                        &[(Complex64::new(1.0, 0.0), &c.e, &x[i]), (Complex64::new(h, 0.0), &c.e_half, &k3[i])],
                    )
                })
                .collect();
            let k4 = rhs(&cc);
            let sixth = Complex64::new(h / 6.0, 0.0);
            (0..x.len())
                .map(|i| {
                    let k23 = k2[i].add(&k3[i]);
                    combine_scaled(
                        grid,
                        &[
                            (Complex64::new(1.0, 0.0), &c.e, &x[i]),
                            (sixth, &c.e, &k1[i]),
                            (sixth * 2.0, &c.e_half, &k23),
                            (sixth, &one, &k4[i]),
                        ],
                    )
                })
                .collect()
        }
    }
}

/// `−½∂_x(u²) + f`, or just `f` in linear mode.
pub fn full_nonlinear_term(u: &SpectralField, p: &KdvParams) -> SpectralField {
    if p.nonlinear {
        u.square().derivative(1).scale(-0.5).add(&p.forcing)
    } else {
        p.forcing.clone()
    }
}

/// Coupling bracket `w∂_x w − ∂_x(uw)` of the split system; equals
/// `−½∂_x(u² − v²)` for `u = v + w`. The mean of `w∂_x w` vanishes exactly
/// and is removed so rounding cannot feed the zero mode.
pub fn split_coupling(v: &SpectralField, w: &SpectralField) -> SpectralField {
    let u = v.add(w);
    w.product_unchecked(&w.derivative(1)).sub(&u.product_unchecked(w).derivative(1)).without_mean()
}

/// The same bracket in the difference form `−½∂_x(u² − v²)`.
pub fn split_coupling_difference_form(v: &SpectralField, w: &SpectralField) -> SpectralField {
    let u = v.add(w);
    u.square().sub(&v.square()).derivative(1).scale(-0.5)
}

/// Nonlinear right-hand sides `(N_v, N_w)` of the split pair.
fn split_terms(v: &SpectralField, w: &SpectralField, p: &KdvParams) -> (SpectralField, SpectralField) {
    if !p.nonlinear {
        return (p.forcing.clone(), SpectralField::zeros(p.grid));
    }
    let bracket = split_coupling(v, w);
    let nv = v
        .square()
        .derivative(1)
        .scale(-0.5)
        .add(&bracket.project_low(p.n_split))
        .add(&p.forcing);
    let nw = bracket.project_high(p.n_split);
    (nv, nw)
}

fn check_field(f: &SpectralField, t: f64, what: &'static str) -> Result<()> {
    let norm = f.l2_norm();
    if !f.is_finite() || !norm.is_finite() || norm > BLOWUP_NORM {
        return Err(Error::Divergence { t, what, norm });
    }
    let drift = f.mean().abs();
    if drift > MEAN_TOL {
        return Err(Error::MeanDrift { t, drift });
    }
    Ok(())
}

/// Reusable stepper for the full equation and the split system at a fixed step.
#[derive(Clone, Debug)]
pub struct Solver {
    params: KdvParams,
    h: f64,
    coef: StepCoefficients,
}

impl Solver {
    pub fn new(params: &KdvParams) -> Result<Self> {
        Self::with_step(params, params.dt)
    }

    pub fn with_step(params: &KdvParams, h: f64) -> Result<Self> {
        params.validate()?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Domain(format!("step {h} must be positive")));
        }
        Ok(Self { params: params.clone(), h, coef: StepCoefficients::new(params.grid, params.gamma, h) })
    }

    pub fn params(&self) -> &KdvParams {
        &self.params
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn step(&self, st: &SolverState) -> Result<SolverState> {
        let p = &self.params;
        let rhs = |x: &[SpectralField]| vec![full_nonlinear_term(&x[0], p)];
        let mut out = exponential_step(p.integrator, &self.coef, self.h, std::slice::from_ref(&st.u), &rhs);
        let u = out.pop().expect("one component");
        let t = st.t + self.h;
        check_field(&u, t, "||u||_L2")?;
        Ok(SolverState { u, t })
    }

    pub fn step_split(&self, st: &SplitState) -> Result<SplitState> {
        let p = &self.params;
        let rhs = |x: &[SpectralField]| {
            let (nv, nw) = split_terms(&x[0], &x[1], p);
            vec![nv, nw]
        };
        let pair = [st.v.clone(), st.w.clone()];
        let mut out = exponential_step(p.integrator, &self.coef, self.h, &pair, &rhs);
        let w = out.pop().expect("two components");
        let v = out.pop().expect("two components");
        let t = st.t + self.h;
        check_field(&v, t, "||v||_L2")?;
        check_field(&w, t, "||w||_L2")?;
        Ok(SplitState { v, w, t })
    }
}

/// One step of the full equation with the parameters' `dt`.
pub fn step_full(st: &SolverState, p: &KdvParams) -> Result<SolverState> {
    Solver::new(p)?.step(st)
}

/// `v = P_N u_0`, `w = Q_N u_0`.
pub fn init_split(u0: &SpectralField, p: &KdvParams) -> SplitState {
    SplitState { v: u0.project_low(p.n_split), w: u0.project_high(p.n_split), t: 0.0 }
}

/// One step of the coupled split system with the parameters' `dt`.
pub fn step_split(st: &SplitState, p: &KdvParams) -> Result<SplitState> {
    Solver::new(p)?.step_split(st)
}

/// `(g_N, y, z)` for the split state, given `g` = the stationary profile.
pub fn regularity_view(st: &SplitState, p: &KdvParams, g: &SpectralField) -> RegularityState {
    let g_n = g.project_high(p.n_split);
    let y = st.v.project_low(p.n_split);
    let z = st.v.project_high(p.n_split).sub(&g_n);
    RegularityState { g_n, y, z }
}

/// Right-hand side `−½∂_x Q_N(v²)` of the `z` equation.
pub fn z_source(v: &SpectralField, p: &KdvParams) -> SpectralField {
    v.square().derivative(1).project_high(p.n_split).scale(-0.5)
}

/// Relative `L²` residual of `∂_t z + ∂_x³ z + γz = −½∂_x Q_N(v²)` at the
/// middle of three equally spaced states, with the time derivative taken by a
/// centred difference in the interaction picture (the linear group removed
/// exactly).
pub fn z_equation_residual(
    prev: &SplitState,
    mid: &SplitState,
    next: &SplitState,
    p: &KdvParams,
    g: &SpectralField,
) -> f64 {
    let h = 0.5 * (next.t - prev.t);
    let zp = regularity_view(prev, p, g).z;
    let zn = regularity_view(next, p, g).z;
    let gamma = p.gamma;
    let fwd = |xi: usize, sign: f64| Complex64::new(-gamma, (xi as f64).powi(3)).scale(sign * h).exp();
    let zn_pulled = zn.map_multiplier(|xi| fwd(xi, -1.0));
    let zp_pushed = zp.map_multiplier(|xi| fwd(xi, 1.0));
    let dz = zn_pulled.sub(&zp_pushed).scale(0.5 / h);
    let src = z_source(&mid.v, p);
    dz.sub(&src).l2_norm() / src.l2_norm().max(f64::MIN_POSITIVE)
}

/// `(‖Iu_0‖ + ‖If‖)^{-3.1}` clamped to `[dt, 1]`.
pub fn lifetime_hint(u0: &SpectralField, p: &KdvParams, im: &IMultiplier) -> f64 {
    let size = apply_i(u0, im).l2_norm() + apply_i(&p.forcing, im).l2_norm();
    let raw = if size > 0.0 { size.powf(-3.1) } else { f64::INFINITY };
    raw.clamp(p.dt.min(1.0), 1.0)
}

/// `½‖∂_x u‖² − (1/6)(1/2π)∫u³`, conserved when `γ = 0`, `f = 0`.
pub fn hamiltonian(u: &SpectralField) -> f64 {
    let m = u.grid().m();
    let x = u.to_physical(m).expect("grid sample count is sufficient");
    let cubic = x.iter().map(|v| v * v * v).sum::<f64>() / m as f64;
    0.5 * u.derivative(1).l2_norm().powi(2) - cubic / 6.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::new(16).unwrap()
    }

    fn field(modes: &[(usize, f64, f64)]) -> SpectralField {
        let m: Vec<_> = modes.iter().map(|&(x, a, b)| (x, Complex64::new(a, b))).collect();
        SpectralField::from_modes(grid(), &m).unwrap()
    }

    #[test]
    fn phi_functions_agree_across_branches() {
        for z in [Complex64::new(0.49, 0.1), Complex64::new(-0.3, 0.39)] {
            let series = phi123(z);
            let e = z.exp();
            let p1 = (e - 1.0) / z;
            let p2 = (p1 - 1.0) / z;
            let p3 = (p2 - 0.5) / z;
            for (a, b) in series.iter().zip([p1, p2, p3]) {
                assert!((a - b).norm() < 1e-13);
            }
        }
        let [a, b, c] = phi123(Complex64::new(0.0, 0.0));
        assert_eq!((a.re, b.re, c.re), (1.0, 0.5, 1.0 / 6.0));
    }

    #[test]
    fn stationary_profile_values() {
        let f = field(&[(1, 0.5, 0.0)]);
        let g = stationary_profile(&f, 1.0).unwrap();
        assert!((g.coeff(1) - Complex64::new(0.25, 0.25)).norm() < 1e-15);
        assert!(stationary_profile(&SpectralField::zeros(grid()), 1.0).unwrap().is_zero());
        assert!(stationary_profile(&f, 0.0).is_err());
    }

    #[test]
    fn split_init_partitions() {
        let u0 = field(&[(1, 0.3, 0.0), (2, 0.1, 0.1), (9, 0.05, 0.0)]);
        let p = KdvParams::new(grid(), 0.5, -0.4).unwrap().with_split(4.0).unwrap();
        let st = init_split(&u0, &p);
        assert_eq!(st.u(), u0);
        let low = field(&[(1, 0.3, 0.0)]);
        assert!(init_split(&low, &p).w.is_zero());
        let high = field(&[(9, 0.3, 0.0)]);
        assert!(init_split(&high, &p).v.is_zero());
    }

    #[test]
    fn coupling_forms_agree() {
        let v = field(&[(1, 0.3, 0.0), (2, 0.1, 0.1), (5, 0.02, 0.0)]);
        let w = field(&[(7, 0.05, 0.02), (11, -0.03, 0.01)]);
        let a = split_coupling(&v, &w);
        let b = split_coupling_difference_form(&v, &w);
        assert!(a.sub(&b).l2_norm() <= 1e-12 * b.l2_norm());
    }

    #[test]
    fn lifetime_hint_rules() {
        let p = KdvParams::new(grid(), 0.5, -0.4).unwrap();
        let im = IMultiplier::new(4.0, -0.4).unwrap();
        let zero = SpectralField::zeros(grid());
        assert_eq!(lifetime_hint(&zero, &p, &im), 1.0);
        let u = field(&[(1, 1.0, 0.0)]);
        let u2 = u.scale(2.0);
        let r = lifetime_hint(&u2, &p, &im) / lifetime_hint(&u, &p, &im);
        assert!((r - 2f64.powf(-3.1)).abs() < 1e-12);
        let huge = field(&[(1, 1e6, 0.0)]);
        assert_eq!(lifetime_hint(&huge, &p, &im), p.dt);
    }

    #[test]
    fn divergence_is_reported() {
        let u0 = field(&[(1, 5.0, 0.0), (3, 2.0, 1.0)]);
        let p = KdvParams::new(grid(), 0.0, -0.4).unwrap().with_dt(50.0).unwrap();
        let solver = Solver::new(&p).unwrap();
        let mut st = SolverState::new(u0).unwrap();
        let mut failed = None;
        for _ in 0..200 {
            match solver.step(&st) {
                Ok(next) => st = next,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        assert_eq!(failed.expect("huge step must blow up").kind(), "divergence");
    }
}
