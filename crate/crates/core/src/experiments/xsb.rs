//! Windowed space-time estimate of the Bourgain norm
//! `(ΣΣ ⟨ξ⟩^{2s}⟨τ−ξ³⟩^{2b}|û(ξ,τ)|²)^{1/2}`.
//!
//! This is a diagnostic over one sampled window, not the restriction norm:
//! no infimum over extensions is taken. Samples are tapered with a raised
//! cosine and each mode is demodulated by `e^{−iξ³t}` before the time
//! transform, so the transform variable is `τ − ξ³` directly and the cubic
//! phase cannot alias. `τ` lives on the `2π/(n·Δt)` lattice.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral::{japanese, SpectralField};

pub const MIN_SNAPSHOTS: usize = 8;

/// `snapshots` are `(t_j, u(t_j))` with equally spaced `t_j`.
pub fn xsb_norm_estimate(snapshots: &[(f64, SpectralField)], s: f64, b: f64) -> Result<f64> {
    let n = snapshots.len();
    if n < MIN_SNAPSHOTS {
        return Err(Error::Input(format!("X_s,b estimate needs at least {MIN_SNAPSHOTS} snapshots, got {n}")));
    }
    if !(0.0..=0.5).contains(&b) {
        return Err(Error::Input(format!("b = {b} must lie in [0, 1/2]")));
    }
    if !s.is_finite() {
        return Err(Error::Input("s must be finite".into()));
    }
    let grid = snapshots[0].1.grid();
    if snapshots.iter().any(|(_, u)| u.grid() != grid) {
        return Err(Error::Shape("snapshots live on different grids".into()));
    }
    let dt = snapshots[1].0 - snapshots[0].0;
    if !(dt > 0.0) {
        return Err(Error::Input("snapshot times must increase".into()));
    }
    for (j, w) in snapshots.windows(2).enumerate() {
        if ((w[1].0 - w[0].0) - dt).abs() > 1e-9 * dt.max(w[1].0.abs()) {
            return Err(Error::Input(format!("snapshot {} breaks the uniform spacing", j + 1)));
        }
    }
    let t0 = snapshots[0].0;
    let taper: Vec<f64> =
        (0..n).map(|j| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let dtau = 2.0 * std::f64::consts::PI / (n as f64 * dt);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut total = 0.0;
    for xi in 1..=grid.k() {
        let x3 = (xi as f64).powi(3);
        for (j, (t, u)) in snapshots.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -x3 * (t - t0));
            buf[j] = u.half_spectrum()[xi] * phase * taper[j];
        }
        fft.process(&mut buf);
        let mut mode = 0.0;
        for (k, c) in buf.iter().enumerate() {
            let lattice = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
            mode += japanese(lattice * dtau).powf(2.0 * b) * c.norm_sqr();
        }
        total += 2.0 * japanese(xi as f64).powf(2.0 * s) * mode / (n as f64 * n as f64);
    }
    Ok(total.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    fn linear_mode(xi: usize, n: usize, dt: f64) -> Vec<(f64, SpectralField)> {
        let grid = GridSpec::new(16).unwrap();
        (0..n)
            .map(|j| {
                let t = j as f64 * dt;
                let c = Complex64::from_polar(0.5, (xi as f64).powi(3) * t);
                (t, SpectralField::from_modes(grid, &[(xi, c)]).unwrap())
            })
            .collect()
    }

    #[test]
    fn b_zero_is_tapered_time_average() {
        let snaps = linear_mode(5, 32, 0.013);
        let est = xsb_norm_estimate(&snaps, -0.5, 0.0).unwrap();
        let n = snaps.len() as f64;
        let avg: f64 = snaps
            .iter()
            .enumerate()
            .map(|(j, (_, u))| {
                let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n).cos());
                (w * u.weighted_norm(-0.5)).powi(2)
            })
            .sum::<f64>()
            / n;
        assert!((est - avg.sqrt()).abs() <= 1e-10 * est);
    }

    #[test]
    fn linear_mode_sits_on_the_characteristic() {
        let snaps = linear_mode(7, 256, 0.1);
        let a = xsb_norm_estimate(&snaps, 0.0, 0.0).unwrap();
        let b = xsb_norm_estimate(&snaps, 0.0, 0.5).unwrap();
        assert!(b >= a && b / a < 1.02, "{a} {b}");
    }

    #[test]
    fn rejects_bad_input() {
        let snaps = linear_mode(3, 7, 0.1);
        assert!(xsb_norm_estimate(&snaps, 0.0, 0.0).is_err());
        let snaps = linear_mode(3, 8, 0.1);
        assert!(xsb_norm_estimate(&snaps, 0.0, 0.6).is_err());
        let mut bad = linear_mode(3, 8, 0.1);
        bad[4].0 += 0.01;
        assert!(xsb_norm_estimate(&bad, 0.0, 0.2).is_err());
    }
}
