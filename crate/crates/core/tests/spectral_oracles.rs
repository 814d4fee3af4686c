use kdv_core::{GridSpec, SobolevIndex, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpectralField {
    let modes: Vec<_> = (1..=grid.k())
        .map(|x| (x, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    SpectralField::from_modes(grid, &modes).unwrap()
}

/// Direct O(K²) convolution over the full two-sided spectrum, truncated to |ξ| ≤ K.
fn convolution_oracle(a: &SpectralField, b: &SpectralField) -> Vec<Complex64> {
    let k = a.k() as i64;
    (0..=k)
        .map(|xi| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in -k..=k {
                let q = xi - p;
                if q.abs() <= k {
                    acc += a.coeff(p) * b.coeff(q);
                }
            }
            acc
        })
        .collect()
}

#[test]
fn padded_product_matches_direct_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let k = 2 + trial % 63;
        let grid = GridSpec::new(k).unwrap();
        let a = random_field(grid, &mut rng);
        let b = random_field(grid, &mut rng);
        let fast = a.dealiased_product(&b).unwrap();
        let oracle = convolution_oracle(&a, &b);
        let err: f64 = (0..=k).map(|x| (fast.coeff(x as i64) - oracle[x]).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = oracle.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * size, "K={k}: {err:e} vs {size:e}");
    }
}

#[test]
fn product_keeps_mean_and_rejects_grid_mismatch() {
    let grid = GridSpec::new(8).unwrap();
    let c = SpectralField::from_modes(grid, &[(1, Complex64::new(0.5, 0.0))]).unwrap();
    let sq = c.dealiased_product(&c).unwrap();
    assert!((sq.mean() - 0.5).abs() < 1e-15);
    assert!((sq.coeff(2) - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    assert!(c.dealiased_product(&SpectralField::zeros(grid)).unwrap().is_zero());
    let other = SpectralField::zeros(GridSpec::new(9).unwrap());
    assert!(c.dealiased_product(&other).is_err());
}

#[test]
fn round_trip_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in [2, 7, 32, 64] {
        let grid = GridSpec::new(k).unwrap();
        let f = random_field(grid, &mut rng);
        let back = SpectralField::from_physical(&f.to_physical(grid.m()).unwrap(), grid).unwrap();
        assert!(back.sub(&f).l2_norm() <= 1e-12 * f.l2_norm());
        let coarse = f.to_physical(2 * k + 1).unwrap();
        assert_eq!(coarse.len(), 2 * k + 1);
        assert!(f.to_physical(2 * k).is_err());
    }
}

#[test]
fn cosine_samples() {
    let grid = GridSpec::new(4).unwrap();
    let c = SpectralField::from_modes(grid, &[(1, Complex64::new(0.5, 0.0))]).unwrap();
    let x = c.to_physical(grid.m()).unwrap();
    for (j, v) in x.iter().enumerate() {
        let t = 2.0 * std::f64::consts::PI * j as f64 / grid.m() as f64;
        assert!((v - t.cos()).abs() < 1e-12);
    }
    assert!(SpectralField::zeros(grid).to_physical(9).unwrap().iter().all(|&v| v == 0.0));
}

fn field_strategy() -> impl Strategy<Value = SpectralField> {
    (2usize..40, any::<u64>()).prop_map(|(k, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_field(GridSpec::new(k).unwrap(), &mut rng)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projectors_partition_exactly(f in field_strategy(), n in 0.5f64..50.0) {
        let low = f.project_low(n);
        let high = f.project_high(n);
        prop_assert_eq!(low.add(&high), f.clone());
        prop_assert_eq!(low.project_low(n), low.clone());
        prop_assert!(low.project_high(n).is_zero());
        for xi in 1..=f.k() as i64 {
            let expected = if (xi as f64) <= n { f.coeff(xi) } else { Complex64::new(0.0, 0.0) };
            prop_assert_eq!(low.coeff(xi), expected);
        }
    }

    #[test]
    fn low_projection_bound(f in field_strategy(), n in 1.0f64..30.0, s in -0.75f64..0.0, gap in 0.0f64..3.0) {
        let m = s + gap;
        let lhs = f.project_low(n).weighted_norm(m);
        let rhs = (1.0 + n * n).powf(0.5 * (m - s)) * f.weighted_norm(s);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn plancherel(f in field_strategy()) {
        let m = f.grid().m();
        let x = f.to_physical(m).unwrap();
        let mean = x.iter().sum::<f64>() / m as f64;
        let energy = x.iter().map(|v| v * v).sum::<f64>() / m as f64 - mean * mean;
        let norm = f.sobolev_norm(SobolevIndex::L2).powi(2);
        prop_assert!((energy - norm).abs() <= 1e-10 * norm);
    }

    #[test]
    fn product_is_real_and_commutative(a in field_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_field(a.grid(), &mut rng);
        let ab = a.dealiased_product(&b).unwrap();
        let ba = b.dealiased_product(&a).unwrap();
        prop_assert!(ab.sub(&ba).l2_norm() <= 1e-14 * ab.l2_norm().max(1e-300));
        prop_assert_eq!(ab.coeff(0).im, 0.0);
        let full = ab.full_spectrum();
        let k = ab.k();
        for xi in 1..=k {
            prop_assert_eq!(full[k + xi], full[k - xi].conj());
        }
    }

    #[test]
    fn bessel_potentials_invert(f in field_strategy(), a in -4.0f64..4.0) {
        let back = f.bessel_potential(a).bessel_potential(-a);
        prop_assert!(back.sub(&f).l2_norm() <= 1e-12 * f.l2_norm());
        prop_assert_eq!(f.bessel_potential(0.0), f.clone());
    }

    #[test]
    fn derivatives_compose_and_keep_mean(f in field_strategy()) {
        let d3 = f.derivative(3);
        let d111 = f.derivative(1).derivative(1).derivative(1);
        prop_assert!(d3.sub(&d111).l2_norm() <= 1e-13 * d3.l2_norm());
        prop_assert_eq!(d3.mean(), 0.0);
        for xi in 1..=f.k() as i64 {
            let expected = Complex64::new(0.0, -((xi * xi * xi) as f64)) * f.coeff(xi);
            prop_assert!((d3.coeff(xi) - expected).norm() <= 1e-12 * expected.norm().max(1e-300));
        }
    }
}
