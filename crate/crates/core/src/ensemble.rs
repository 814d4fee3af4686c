//! Seeded initial-data recipes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{japanese, GridSpec, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialRecipe {
    /// `cos(mode·x + phase)` with a random phase.
    SingleMode { mode: usize },
    /// Every band mode with `|coeff(ξ)| ∝ ⟨ξ⟩^{-exponent}` and random phases.
    RoughPowerLaw { exponent: f64 },
    /// Random amplitudes and phases on `lo ≤ |ξ| ≤ hi`.
    RandomBand { lo: usize, hi: usize },
}

impl InitialRecipe {
    /// Unnormalized field drawn from `seed`.
    pub fn sample(&self, grid: GridSpec, seed: u64) -> Result<SpectralField> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = |rng: &mut ChaCha8Rng| Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>());
        let k = grid.k();
        let modes: Vec<(usize, Complex64)> = match *self {
            InitialRecipe::SingleMode { mode } => {
                if mode == 0 || mode > k {
                    return Err(Error::Input(format!("single mode {mode} outside 1..={k}")));
                }
                vec![(mode, phase(&mut rng) * 0.5)]
            }
            InitialRecipe::RoughPowerLaw { exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::Input("power-law exponent must be finite".into()));
                }
                (1..=k).map(|x| (x, phase(&mut rng) * japanese(x as f64).powf(-exponent))).collect()
            }
            InitialRecipe::RandomBand { lo, hi } => {
                if lo == 0 || lo > hi || hi > k {
                    return Err(Error::Input(format!("band [{lo}, {hi}] must lie inside 1..={k}")));
                }
                (lo..=hi).map(|x| (x, phase(&mut rng) * rng.gen_range(0.25..1.0))).collect()
            }
        };
        SpectralField::from_modes(grid, &modes)
    }

    /// Field drawn from `seed` and rescaled to `‖u‖_{H^s} = radius`.
    pub fn sample_normalized(&self, grid: GridSpec, seed: u64, s: f64, radius: f64) -> Result<SpectralField> {
        let f = self.sample(grid, seed)?;
        let n = f.weighted_norm(s);
        if n == 0.0 {
            return Ok(f);
        }
        Ok(f.scale(radius / n))
    }
}

/// `count` members drawn with seeds `seed, seed+1, …`.
pub fn ensemble(
    recipe: &InitialRecipe,
    grid: GridSpec,
    seed: u64,
    count: usize,
    s: f64,
    radius: f64,
) -> Result<Vec<SpectralField>> {
    (0..count as u64).map(|i| recipe.sample_normalized(grid, seed.wrapping_add(i), s, radius)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipes_are_seeded_and_normalized() {
        let grid = GridSpec::new(32).unwrap();
        let r = InitialRecipe::RoughPowerLaw { exponent: 0.11 };
        let a = r.sample_normalized(grid, 7, -0.4, 2.0).unwrap();
        let b = r.sample_normalized(grid, 7, -0.4, 2.0).unwrap();
        assert_eq!(a, b);
        assert!((a.weighted_norm(-0.4) - 2.0).abs() < 1e-12);
        assert_ne!(a, r.sample_normalized(grid, 8, -0.4, 2.0).unwrap());
        assert!(InitialRecipe::SingleMode { mode: 40 }.sample(grid, 0).is_err());
        assert!(InitialRecipe::RandomBand { lo: 5, hi: 3 }.sample(grid, 0).is_err());
        let band = InitialRecipe::RandomBand { lo: 3, hi: 5 }.sample(grid, 1).unwrap();
        assert!(band.coeff(2).norm() == 0.0 && band.coeff(4).norm() > 0.0);
    }
}
