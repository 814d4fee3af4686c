use kdv_wasm::{energy_series, multiplier_values, sigma3_values, Evolution};

#[test]
fn evolution_advances_and_damps() {
    let mut ev = Evolution::create(32, 0.5, 1.0, 0.0, 3).unwrap();
    assert_eq!(ev.profile().len(), 256);
    assert_eq!(ev.spectrum().len(), 32);
    assert!((ev.l2() - 1.0).abs() < 1e-12);
    ev.advance_by(2.0).unwrap();
    assert!((ev.time() - 2.0).abs() < 1e-12);
    assert!((ev.l2() / (-1.0f64).exp() - 1.0).abs() < 1e-3, "{}", ev.l2());
    assert!(ev.dt() <= 2e-3);
    assert!(ev.advance_by(-1.0).is_err());
}

#[test]
fn evolution_rejects_bad_parameters() {
    assert!(Evolution::create(1, 0.5, 1.0, 0.0, 0).is_err());
    assert!(Evolution::create(512, 0.5, 1.0, 0.0, 0).is_err());
    assert!(Evolution::create(16, -1.0, 1.0, 0.0, 0).is_err());
}

#[test]
fn curves_match_closed_forms() {
    let m = multiplier_values(16.0, -0.5, 64).unwrap();
    assert_eq!(m.len(), 65);
    assert_eq!(m[16], 1.0);
    assert!((m[64] - 0.5).abs() < 1e-15);
    let sig = sigma3_values(16.0, -0.5, 40, 80).unwrap();
    assert_eq!(sig.len(), 161);
    assert!((sig[0] - 1.0 / 72000.0).abs() < 1e-18);
    assert!(sig[80].is_nan());
    assert!(multiplier_values(16.0, 0.5, 4).is_err());
}

#[test]
fn energy_series_tracks_modified_energies() {
    let e = energy_series(16, 0.5, 4.0, -0.5, 0.05, 5, 1).unwrap();
    assert_eq!(e.len(), 18);
    assert_eq!(e[0], 0.0);
    assert!((e[15] - 0.05).abs() < 1e-12);
    assert!(e.iter().all(|v| v.is_finite()));
    assert!(energy_series(16, 0.5, 4.0, -0.5, 0.05, 0, 1).is_err());
}
