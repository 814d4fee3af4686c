use kdv_core::dynamics::{stationary_profile, KdvParams};
use kdv_core::ensemble::{ensemble, InitialRecipe};
use kdv_core::experiments::{
    linear_fit, persist, relative_spread, run_absorbing_ball, run_decay, run_energy_identity, run_omega_limit,
    run_simulation, run_smoothing, run_split_consistency, run_xsb, xsb_norm_estimate, Schedule, Summary, Thresholds,
    TrajectoryRecord, CSV_HEADER, REPORTS,
};
use kdv_core::imethod::IMultiplier;
use kdv_core::{Error, GridSpec, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

fn band(grid: GridSpec, lo: usize, hi: usize, seed: u64, s: f64, radius: f64) -> SpectralField {
    InitialRecipe::RandomBand { lo, hi }.sample_normalized(grid, seed, s, radius).unwrap()
}

fn taper(j: usize, n: usize) -> f64 {
    0.5 * (1.0 - (2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64).cos())
}

#[test]
fn persisted_files_round_trip() {
    let grid = GridSpec::new(16).unwrap();
    let u0 = band(grid, 1, 4, 1, 0.0, 0.5);
    let p = KdvParams::new(grid, 0.0, 0.0).unwrap().with_dt(1e-3).unwrap();
    let run = run_simulation(&u0, &p, 0.2, None).unwrap();
    let summary = run.summary(&p, &Thresholds::default());
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested").join("simulate");
    persist(&run.record, &summary, &out).unwrap();

    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), REPORTS + 2);
    let back = TrajectoryRecord::from_csv(&csv).unwrap();
    assert_eq!(back.times, run.record.times);
    assert_eq!(back.l2, run.record.l2);

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["suite"], "simulate");
    let verdicts = json["verdicts"].as_object().unwrap();
    assert!(verdicts.contains_key("l2_conserved"));
    assert!(verdicts.values().all(|v| v.is_boolean()));
    assert!(json["measurements"]["l2_drift"].is_number());
    assert_eq!(json["params"]["k"], 16);
    let again: Summary = serde_json::from_value(json).unwrap();
    assert_eq!(again, summary);
}

#[test]
fn persist_reports_the_failing_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let grid = GridSpec::new(4).unwrap();
    let p = KdvParams::new(grid, 0.1, 0.0).unwrap();
    let err = persist(&TrajectoryRecord::new(None), &Summary::new("decay", &p), &blocker.join("sub")).unwrap_err();
    match err {
        Error::Io { path, .. } => assert!(path.starts_with(&blocker)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn thresholds_are_strict_json() {
    let th: Thresholds = serde_json::from_str(r#"{"decay_ratio": 0.01}"#).unwrap();
    assert_eq!(th.decay_ratio, 0.01);
    assert_eq!(th.conservation_l2, Thresholds::default().conservation_l2);
    assert!(serde_json::from_str::<Thresholds>(r#"{"decay_ration": 0.01}"#).is_err());
    assert_eq!(relative_spread(&[2.0, 1.0, 1.5]), 0.5);
    assert_eq!(relative_spread(&[3.0]), 0.0);
}

#[test]
fn schedule_lands_on_the_horizon() {
    let grid = GridSpec::new(8).unwrap();
    let p = KdvParams::new(grid, 0.1, 0.0).unwrap().with_dt(0.013).unwrap();
    let s = Schedule::new(&p, 1.0, 7).unwrap();
    assert_eq!(s.steps % 7, 0);
    assert!(s.h <= p.dt);
    assert!((s.end() - 1.0).abs() < 1e-12);
    assert!(Schedule::new(&p, 0.0, 7).is_err());
    assert!(Schedule::new(&p, 1.0, 0).is_err());
}

#[test]
fn linear_decay_rate_is_gamma() {
    let grid = GridSpec::new(32).unwrap();
    let gamma = 0.4;
    let u0 = band(grid, 1, 32, 2, -0.5, 1.0);
    let p = KdvParams::new(grid, gamma, -0.5).unwrap().linear().with_split(8.0).unwrap().with_dt(0.01).unwrap();
    let r = run_decay(&u0, &p, 10.0).unwrap();
    let fit = r.fit.as_ref().unwrap();
    assert!((fit.slope + gamma).abs() <= 0.01 * gamma, "slope {}", fit.slope);
    assert!((r.ratio() - (-gamma * 10.0f64).exp()).abs() <= 1e-10);
    assert!(r.summary(&p, &Thresholds::default()).all_passed());
}

#[test]
fn decay_preconditions() {
    let grid = GridSpec::new(16).unwrap();
    let low = band(grid, 1, 3, 1, -0.5, 1.0);
    let p = KdvParams::new(grid, 0.3, -0.5).unwrap().with_split(4.0).unwrap();
    assert_eq!(run_decay(&low, &p, 1.0).unwrap_err().kind(), "input");
    let undamped = KdvParams::new(grid, 0.0, -0.5).unwrap();
    assert_eq!(run_decay(&band(grid, 1, 16, 1, -0.5, 1.0), &undamped, 1.0).unwrap_err().kind(), "domain");
}

#[test]
fn linear_energy_identity_holds() {
    let grid = GridSpec::new(16).unwrap();
    let u0 = band(grid, 1, 16, 3, -0.5, 1.0);
    let f = band(grid, 1, 8, 4, 0.0, 0.5);
    let p = KdvParams::new(grid, 0.3, -0.5).unwrap().with_forcing(f).unwrap().linear().with_dt(1e-3).unwrap();
    let im = IMultiplier::new(4.0, -0.5).unwrap();
    let r = run_energy_identity(&u0, &p, &im, 1.0).unwrap();
    assert!(r.order >= 1.9 && r.order <= 2.1, "{:?}", r.residuals);
    assert!(r.drift_ratio.is_none());
    assert!(r.record.e3.iter().all(|v| v.is_nan()));

    let free = KdvParams::new(grid, 0.3, -0.5).unwrap().linear().with_dt(2.5e-4).unwrap();
    let r = run_energy_identity(&u0, &free, &im, 1.0).unwrap();
    assert!(r.residuals[0] <= 1e-8, "{:?}", r.residuals);
    let e0 = r.record.e2[0];
    for (t, e) in r.record.times.iter().zip(&r.record.e2) {
        assert!((e - e0 * (-0.6 * t).exp()).abs() <= 1e-12 * e0);
    }
}

#[test]
fn split_system_tracks_full_flow() {
    let grid = GridSpec::new(32).unwrap();
    let u0 = band(grid, 1, 32, 5, -0.5, 0.5);
    let f = band(grid, 1, 4, 6, 0.0, 0.5);
    let p = KdvParams::new(grid, 0.5, -0.5)
        .unwrap()
        .with_forcing(f)
        .unwrap()
        .with_split(8.0)
        .unwrap()
        .with_stable_dt(&u0, Some(1e-3))
        .unwrap();
    let r = run_split_consistency(&u0, &p, 0.5).unwrap();
    assert!(r.defect_per_time <= 1e-9, "{}", r.defect_per_time);
    assert_eq!(r.record.len(), REPORTS + 1);
}

#[test]
fn absorbing_ball_needs_two_decades() {
    let grid = GridSpec::new(16).unwrap();
    let p = KdvParams::new(grid, 0.5, -0.5).unwrap();
    let ens = ensemble(&InitialRecipe::RandomBand { lo: 1, hi: 8 }, grid, 0, 3, -0.5, 1.0).unwrap();
    assert_eq!(run_absorbing_ball(&ens, &p, 1.0).unwrap_err().kind(), "input");
}

#[test]
fn absorbing_member_divergence_is_labelled() {
    let grid = GridSpec::new(32).unwrap();
    let ens = vec![band(grid, 1, 32, 1, -0.5, 0.5), band(grid, 1, 32, 2, -0.5, 500.0)];
    let p = KdvParams::new(grid, 0.5, -0.5).unwrap().with_dt(0.5).unwrap();
    let err = run_absorbing_ball(&ens, &p, 50.0).unwrap_err();
    assert!(matches!(err, Error::Member { .. }));
    assert_eq!(err.kind(), "divergence");
}

#[test]
fn unforced_absorbing_ball_collapses() {
    let grid = GridSpec::new(16).unwrap();
    let ens = vec![band(grid, 1, 8, 1, -0.5, 0.01), band(grid, 1, 8, 2, -0.5, 1.0)];
    let p = KdvParams::new(grid, 0.5, -0.5).unwrap().with_stable_dt(&ens[1], None).unwrap();
    let r = run_absorbing_ball(&ens, &p, 40.0).unwrap();
    assert!(r.tail_sup < 1e-4);
    assert!(r.summary(&p, &Thresholds::default()).verdicts["control_decay"]);
}

#[test]
fn omega_limit_of_unforced_flow_is_zero() {
    let grid = GridSpec::new(16).unwrap();
    let ens = ensemble(&InitialRecipe::RandomBand { lo: 1, hi: 8 }, grid, 1, 3, -0.5, 1.0).unwrap();
    let p = KdvParams::new(grid, 0.5, -0.5).unwrap().with_split(4.0).unwrap().with_stable_dt(&ens[0], None).unwrap();
    let r = run_omega_limit(&ens, &p, 40.0, &[30.0, 35.0]).unwrap();
    assert!(r.late_norm < 1e-6);
    assert!(r.max_distance < 1e-6);
    assert!(run_omega_limit(&ens, &p, 40.0, &[5.0]).is_err());
    assert!(run_omega_limit(&[], &p, 40.0, &[30.0]).is_err());
}

#[test]
fn forced_smoothing_from_rest_is_finite() {
    let grid = GridSpec::new(16).unwrap();
    let f = band(grid, 1, 3, 7, 0.0, 1.0);
    let p = KdvParams::new(grid, 0.5, -0.5).unwrap().with_forcing(f.clone()).unwrap().with_split(4.0).unwrap();
    let zero = SpectralField::zeros(grid);
    let p = p.with_stable_dt(&zero, None).unwrap();
    let r = run_smoothing(&zero, &p, 10.0).unwrap();
    let g = stationary_profile(&f, 0.5).unwrap();
    assert!(r.tail_sup.is_finite() && r.tail_sup > 0.0);
    assert!(r.tail_sup < 100.0 * (1.0 + g.weighted_norm(2.5)));
    assert_eq!(r.initial_hs, 0.0);
}

#[test]
fn xsb_run_at_b_zero_is_tapered_average() {
    let grid = GridSpec::new(16).unwrap();
    let u0 = band(grid, 1, 8, 8, -0.5, 0.5);
    let p = KdvParams::new(grid, 0.2, -0.5).unwrap().with_dt(2e-3).unwrap();
    let n = 32;
    let r = run_xsb(&u0, &p, 1.0, &[0.5, 0.0, 0.25], n).unwrap();
    assert_eq!(r.snapshots, n);
    assert_eq!(r.estimates.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0.0, 0.25, 0.5]);
    let tail: Vec<f64> = r.record.window(0.5, 1.0).filter(|&i| r.record.times[i] < 1.0 - 1e-12).map(|i| r.record.hs[i]).collect();
    assert_eq!(tail.len(), n);
    let avg = tail.iter().enumerate().map(|(j, h)| (taper(j, n) * h).powi(2)).sum::<f64>() / n as f64;
    assert!((r.estimates[0].1 - avg.sqrt()).abs() <= 1e-10 * avg.sqrt());
    assert!(r.summary(&p, &Thresholds::default()).all_passed());
    assert!(run_xsb(&u0, &p, 1.0, &[0.0], 4).is_err());
}

#[test]
fn fit_recovers_a_line() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
    let f = linear_fit(&xs, &ys).unwrap();
    assert!((f.slope + 0.5).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
    assert!((f.r2 - 1.0).abs() < 1e-12);
    assert!(linear_fit(&xs[..2], &ys[..2]).is_err());
}

fn snapshot_strategy() -> impl Strategy<Value = Vec<(f64, SpectralField)>> {
    (8usize..40, 0.001f64..0.1, any::<u64>()).prop_map(|(n, dt, seed)| {
        let grid = GridSpec::new(8).unwrap();
        (0..n)
            .map(|j| {
                let u = band(grid, 1, 8, seed.wrapping_add(j as u64), 0.0, 1.0);
                let phase = Complex64::from_polar(1.0, j as f64);
                (j as f64 * dt, u.map_multiplier(|_| phase).without_mean())
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn xsb_estimate_is_monotone_in_b(snaps in snapshot_strategy(), s in -0.75f64..1.0, b1 in 0.0f64..0.5, gap in 0.0f64..0.5) {
        let b2 = (b1 + gap).min(0.5);
        let lo = xsb_norm_estimate(&snaps, s, b1).unwrap();
        let hi = xsb_norm_estimate(&snaps, s, b2).unwrap();
        prop_assert!(hi >= lo * (1.0 - 1e-12));
    }

    #[test]
    fn record_csv_round_trip(rows in proptest::collection::vec(proptest::array::uniform8(-1e6f64..1e6), 0..20)) {
        let mut rec = TrajectoryRecord::new(None);
        for (i, r) in rows.iter().enumerate() {
            rec.push(i as f64, r[1], r[2], r[3], r[4], r[5], r[6], r[7]);
        }
        let back = TrajectoryRecord::from_csv(&rec.to_csv()).unwrap();
        prop_assert_eq!(back.times, rec.times);
        prop_assert_eq!(back.e4, rec.e4);
    }
}
