//! Band-limited real periodic fields on the torus `R/2πZ`.
//!
//! A field is stored through its Fourier coefficients
//! `coeff(ξ) = (1/2π) ∫ u(x) e^{-iξx} dx` for `0 ≤ ξ ≤ K`; negative
//! frequencies are implied by Hermitian symmetry, so every field is real by
//! construction. Quadratic products are evaluated on a padded grid of
//! `M ≥ 4K + 1` samples, which makes the truncated convolution exact.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discretization of the torus: highest retained mode `k` and the number of
/// physical samples `m` used for product evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    k: usize,
    m: usize,
}

impl GridSpec {
    /// Grid with the smallest power-of-two sample count satisfying `m ≥ 4k + 1`.
    pub fn new(k: usize) -> Result<Self> {
        Self::with_samples(k, (4 * k + 1).next_power_of_two())
    }

    pub fn with_samples(k: usize, m: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::Input(format!("band limit K = {k} must be at least 2")));
        }
        if m < 4 * k + 1 {
            return Err(Error::Aliasing { k, samples: m, needed: 4 * k + 1 });
        }
        Ok(Self { k, m })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Physical sample points `x_j = 2πj/M`.
    pub fn points(&self) -> Vec<f64> {
        (0..self.m)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / self.m as f64)
            .collect()
    }
}

/// Regularity exponent of a Sobolev norm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub const MIN: f64 = -0.75;
    pub const MAX: f64 = 6.0;
    pub const L2: SobolevIndex = SobolevIndex(0.0);

    pub fn new(s: f64) -> Result<Self> {
        if !(Self::MIN..=Self::MAX).contains(&s) {
            return Err(Error::Domain(format!(
                "Sobolev index {s} outside [{}, {}]",
                Self::MIN,
                Self::MAX
            )));
        }
        Ok(Self(s))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `s + by`, e.g. the `H^{s+3}` index used for the smoothing estimates.
    pub fn shifted(self, by: f64) -> Result<Self> {
        Self::new(self.0 + by)
    }
}

/// `⟨ξ⟩ = (1 + ξ²)^{1/2}`.
#[inline]
pub fn japanese(xi: f64) -> f64 {
    (1.0 + xi * xi).sqrt()
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>> =
        RefCell::new(HashMap::new());
}

fn plans(m: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
            })
            .clone()
    })
}

/// Real periodic field given by its Fourier coefficients on `|ξ| ≤ K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: GridSpec,
    /// `coeffs[ξ]` for `ξ = 0..=K`; `coeffs[0]` is real.
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.k + 1] }
    }

    /// Builds a mean-zero field from `(ξ, coeff(ξ))` pairs with `ξ ≥ 1`.
    /// Out-of-band modes are dropped.
    pub fn from_modes(grid: GridSpec, modes: &[(usize, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(xi, c) in modes {
            if xi == 0 {
                return Err(Error::Domain("mode 0 would break the zero-mean constraint".into()));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Input(format!("non-finite amplitude at mode {xi}")));
            }
            if xi <= grid.k {
                f.coeffs[xi] = c;
            }
        }
        Ok(f)
    }

    /// Builds a field from the nonnegative half of the spectrum. The zero
    /// mode must vanish.
    pub fn from_half_spectrum(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.k + 1 {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                grid.k + 1,
                coeffs.len()
            )));
        }
        if coeffs[0] != Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("zero mode must vanish".into()));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Input("non-finite coefficient".into()));
        }
        Ok(Self { grid, coeffs })
    }

    /// Band-limited truncation of physical samples at `x_j = 2πj/M`, with the
    /// mean removed.
    pub fn from_physical(samples: &[f64], grid: GridSpec) -> Result<Self> {
        let mut f = Self::from_physical_with_mean(samples, grid)?;
        f.coeffs[0] = Complex64::new(0.0, 0.0);
        Ok(f)
    }

    fn from_physical_with_mean(samples: &[f64], grid: GridSpec) -> Result<Self> {
        if samples.len() != grid.m {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                grid.m,
                samples.len()
            )));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Ok(Self::from_transformed(&mut buf, grid))
    }

    fn from_transformed(buf: &mut [Complex64], grid: GridSpec) -> Self {
        let m = buf.len();
        plans(m).0.process(buf);
        let scale = 1.0 / m as f64;
        let mut coeffs: Vec<Complex64> = buf[..=grid.k].iter().map(|c| c * scale).collect();
        coeffs[0].im = 0.0;
        Self { grid, coeffs }
    }

    /// Inverse transform onto `m` equispaced samples.
    pub fn to_physical(&self, m: usize) -> Result<Vec<f64>> {
        let k = self.grid.k;
        if m < 2 * k + 1 {
            return Err(Error::Aliasing { k, samples: m, needed: 2 * k + 1 });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[0] = self.coeffs[0];
        for xi in 1..=k {
            buf[xi] = self.coeffs[xi];
            buf[m - xi] = self.coeffs[xi].conj();
        }
        plans(m).1.process(&mut buf);
        Ok(buf.iter().map(|c| c.re).collect())
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.grid.k
    }

    /// Coefficient at any integer frequency; zero outside the band.
    #[inline]
    pub fn coeff(&self, xi: i64) -> Complex64 {
        let a = xi.unsigned_abs() as usize;
        if a > self.grid.k {
            Complex64::new(0.0, 0.0)
        } else if xi >= 0 {
            self.coeffs[a]
        } else {
            self.coeffs[a].conj()
        }
    }

    /// Nonnegative half of the spectrum, indexed by `ξ`.
    #[inline]
    pub fn half_spectrum(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Full spectrum `coeff(-K..=K)`, indexed by `ξ + K`.
    pub fn full_spectrum(&self) -> Vec<Complex64> {
        let k = self.grid.k as i64;
        (-k..=k).map(|xi| self.coeff(xi)).collect()
    }

    /// Sets `coeff(ξ)` (and implicitly its conjugate) for `1 ≤ ξ ≤ K`.
    pub fn set_coeff(&mut self, xi: usize, c: Complex64) {
        assert!(xi >= 1 && xi <= self.grid.k, "mode {xi} outside 1..={}", self.grid.k);
        self.coeffs[xi] = c;
    }

    /// Value of the zero mode (the spatial mean).
    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Copy with the zero mode cleared.
    pub fn without_mean(mut self) -> Self {
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        self
    }

    /// Multiplies `coeff(ξ)` by `w(ξ)` for `ξ ≥ 0`. The multiplier must
    /// satisfy `w(-ξ) = conj(w(ξ))` for the result to describe the same real
    /// operator on both halves of the spectrum.
    pub fn map_multiplier(&self, mut w: impl FnMut(usize) -> Complex64) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(xi, &c)| w(xi) * c).collect();
        Self { grid: self.grid, coeffs }
    }

    /// Multiplies `coeff(ξ)` by a real even weight `w(|ξ|)`.
    pub fn map_real(&self, mut w: impl FnMut(usize) -> f64) -> Self {
        self.map_multiplier(|xi| Complex64::new(w(xi), 0.0))
    }

    /// `P_N`: keeps `|ξ| ≤ N`.
    pub fn project_low(&self, n: f64) -> Self {
        self.map_real(|xi| if xi as f64 <= n { 1.0 } else { 0.0 })
    }

    /// `Q_N`: keeps `|ξ| > N`, so `P_N + Q_N` is the identity.
    pub fn project_high(&self, n: f64) -> Self {
        self.map_real(|xi| if xi as f64 > n { 1.0 } else { 0.0 })
    }

    /// `∂_x^order`: `coeff(ξ) ↦ (iξ)^order coeff(ξ)`.
    pub fn derivative(&self, order: u32) -> Self {
        self.map_multiplier(|xi| Complex64::new(0.0, xi as f64).powu(order))
    }

    /// Bessel potential `J^a = (1 - ∂²)^{a/2}`.
    pub fn bessel_potential(&self, a: f64) -> Self {
        self.map_real(|xi| (1.0 + (xi * xi) as f64).powf(0.5 * a))
    }

    /// `(Σ_{ξ≠0} ⟨ξ⟩^{2s} |coeff(ξ)|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: SobolevIndex) -> f64 {
        self.weighted_norm(s.value())
    }

    /// Sobolev-type norm for an arbitrary real exponent.
    pub fn weighted_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (xi, c) in self.coeffs.iter().enumerate().skip(1) {
            acc += (1.0 + (xi * xi) as f64).powf(s) * c.norm_sqr();
        }
        (2.0 * acc).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        let acc: f64 = self.coeffs.iter().skip(1).map(|c| c.norm_sqr()).sum();
        (2.0 * acc).sqrt()
    }

    /// `‖u‖_∞` on the product grid.
    pub fn max_abs(&self) -> f64 {
        self.to_physical(self.grid.m)
            .map(|v| v.iter().fold(0.0f64, |a, x| a.max(x.abs())))
            .unwrap_or(f64::NAN)
    }

    /// `(1/2π) ∫ a b dx` without the mean-zero restriction, i.e. `Σ_ξ a(ξ) conj(b(ξ))`.
    pub fn inner(&self, other: &Self) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs).skip(1) {
            acc += (a * b.conj()).re;
        }
        2.0 * acc + self.coeffs[0].re * other.coeffs[0].re
    }

    /// Exact product of two band-K fields, truncated back to the band. The
    /// zero mode of the result is kept.
    pub fn dealiased_product(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(self.product_unchecked(other))
    }

    pub(crate) fn product_unchecked(&self, other: &Self) -> Self {
        let m = self.grid.m;
        let a = self.to_physical(m).expect("grid guarantees m >= 4k+1");
        let mut buf: Vec<Complex64> = if std::ptr::eq(self, other) {
            a.iter().map(|x| Complex64::new(x * x, 0.0)).collect()
        } else {
            let b = other.to_physical(m).expect("grid guarantees m >= 4k+1");
            a.iter().zip(&b).map(|(x, y)| Complex64::new(x * y, 0.0)).collect()
        };
        Self::from_transformed(&mut buf, self.grid)
    }

    /// `u²`, dealiased.
    pub fn square(&self) -> Self {
        self.product_unchecked(self)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map_real(|_| a)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect();
        Self { grid: self.grid, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpy(-1.0, other)
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Same coefficients on a grid with a larger band; extra modes are zero.
    pub fn embed(&self, grid: GridSpec) -> Self {
        let mut out = Self::zeros(grid);
        let kk = self.grid.k.min(grid.k);
        out.coeffs[..=kk].copy_from_slice(&self.coeffs[..=kk]);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos_samples(grid: GridSpec, freq: f64) -> Vec<f64> {
        grid.points().iter().map(|x| (freq * x).cos()).collect()
    }

    #[test]
    fn grid_rejects_small_band_and_aliasing() {
        assert!(GridSpec::new(1).is_err());
        assert!(matches!(GridSpec::with_samples(4, 16), Err(Error::Aliasing { .. })));
        assert_eq!(GridSpec::new(4).unwrap().m(), 32);
    }

    #[test]
    fn cosine_has_half_amplitudes() {
        let grid = GridSpec::with_samples(4, 17).unwrap();
        let f = SpectralField::from_physical(&cos_samples(grid, 1.0), grid).unwrap();
        assert!((f.coeff(1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((f.coeff(-1) - c(0.5, 0.0)).norm() < 1e-15);
        for xi in [0, 2, 3, 4] {
            assert!(f.coeff(xi).norm() < 1e-15);
        }
    }

    #[test]
    fn from_physical_rejects_wrong_length() {
        let grid = GridSpec::new(4).unwrap();
        assert!(matches!(SpectralField::from_physical(&[0.0; 5], grid), Err(Error::Shape(_))));
    }

    #[test]
    fn out_of_band_mode_is_discarded() {
        let grid = GridSpec::new(4).unwrap();
        let f = SpectralField::from_physical(&cos_samples(grid, 6.0), grid).unwrap();
        assert!(f.half_spectrum().iter().all(|c| c.norm() < 1e-15));
        let z = SpectralField::from_physical(&vec![0.0; grid.m()], grid).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn to_physical_of_cosine() {
        let grid = GridSpec::new(4).unwrap();
        let f = SpectralField::from_modes(grid, &[(1, c(0.5, 0.0))]).unwrap();
        let x = f.to_physical(grid.m()).unwrap();
        for (xj, v) in grid.points().iter().zip(&x) {
            assert!((v - xj.cos()).abs() < 1e-12);
        }
        assert!(matches!(f.to_physical(8), Err(Error::Aliasing { .. })));
        assert!(SpectralField::zeros(grid).to_physical(9).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projections_split_modes() {
        let grid = GridSpec::new(8).unwrap();
        let f = SpectralField::from_modes(grid, &[(1, c(1.0, 0.5)), (5, c(-0.2, 0.3))]).unwrap();
        let lo = f.project_low(3.0);
        let hi = f.project_high(3.0);
        assert_eq!(lo.coeff(1), f.coeff(1));
        assert_eq!(lo.coeff(5), c(0.0, 0.0));
        assert_eq!(hi.coeff(5), f.coeff(5));
        assert_eq!(hi.coeff(1), c(0.0, 0.0));
        assert_eq!(lo.add(&hi), f);
        assert_eq!(f.project_low(8.0), f);
        assert!(f.project_high(8.0).is_zero());
        // boundary mode goes to the low part only
        let g = SpectralField::from_modes(grid, &[(3, c(1.0, 0.0))]).unwrap();
        assert_eq!(g.project_low(3.0), g);
        assert!(g.project_high(3.0).is_zero());
    }

    #[test]
    fn derivative_of_cosine_is_minus_sine() {
        let grid = GridSpec::new(4).unwrap();
        let f = SpectralField::from_modes(grid, &[(1, c(0.5, 0.0))]).unwrap();
        let d = f.derivative(1);
        let x = d.to_physical(grid.m()).unwrap();
        for (xj, v) in grid.points().iter().zip(&x) {
            assert!((v + xj.sin()).abs() < 1e-12);
        }
        let g = SpectralField::from_modes(grid, &[(3, c(1.0, 0.0))]).unwrap();
        assert!((g.derivative(3).coeff(3) - c(0.0, -27.0)).norm() < 1e-12);
        assert!(SpectralField::zeros(grid).derivative(2).is_zero());
    }

    #[test]
    fn bessel_potential_scaling() {
        let grid = GridSpec::new(4).unwrap();
        let f = SpectralField::from_modes(grid, &[(1, c(0.3, -0.1)), (4, c(0.2, 0.0))]).unwrap();
        assert_eq!(f.bessel_potential(0.0), f);
        assert!((f.bessel_potential(2.0).coeff(1) - f.coeff(1) * 2.0).norm() < 1e-15);
        let back = f.bessel_potential(1.7).bessel_potential(-1.7);
        assert!(back.sub(&f).l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn sobolev_norm_of_cosine() {
        let grid = GridSpec::new(4).unwrap();
        let f = SpectralField::from_modes(grid, &[(1, c(0.5, 0.0))]).unwrap();
        assert!((f.sobolev_norm(SobolevIndex::L2) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((f.sobolev_norm(SobolevIndex::new(1.0).unwrap()) - 1.0).abs() < 1e-15);
        assert_eq!(SpectralField::zeros(grid).sobolev_norm(SobolevIndex::L2), 0.0);
        assert!(SobolevIndex::new(-0.8).is_err());
        assert!(SobolevIndex::new(6.5).is_err());
    }

    #[test]
    fn cosine_squared() {
        let grid = GridSpec::new(4).unwrap();
        let f = SpectralField::from_modes(grid, &[(1, c(0.5, 0.0))]).unwrap();
        let p = f.dealiased_product(&f).unwrap();
        assert!((p.coeff(0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((p.coeff(2) - c(0.25, 0.0)).norm() < 1e-15);
        assert!((p.coeff(-2) - c(0.25, 0.0)).norm() < 1e-15);
        assert!(p.coeff(1).norm() < 1e-15);
        let z = f.dealiased_product(&SpectralField::zeros(grid)).unwrap();
        assert!(z.is_zero());
        let other = SpectralField::zeros(GridSpec::new(5).unwrap());
        assert!(matches!(f.dealiased_product(&other), Err(Error::Shape(_))));
    }

    #[test]
    fn plancherel_on_samples() {
        let grid = GridSpec::new(6).unwrap();
        let samples: Vec<f64> =
            grid.points().iter().map(|x| 0.3 + x.sin() - 0.2 * (5.0 * x + PI / 7.0).cos()).collect();
        let f = SpectralField::from_physical(&samples, grid).unwrap();
        let m = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / m;
        let msq = samples.iter().map(|x| x * x).sum::<f64>() / m;
        let n2 = f.sobolev_norm(SobolevIndex::L2).powi(2);
        assert!((n2 - (msq - mean * mean)).abs() <= 1e-10 * n2);
    }
}
