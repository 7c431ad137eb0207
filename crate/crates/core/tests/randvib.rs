use proptest::prelude::*;
use vibrakit_core::randvib::{
    find_peak, grms, miles_acceleration, psd_at, response_magnification, three_sigma, MagnificationOptions, PsdCurve,
    PsdProfile, RandvibError,
};

/// Trapezoid rule of `g` over `[a, b]` with `n` panels.
fn trapezoid(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| g(a + h * i as f64)).sum();
    h * (0.5 * (g(a) + g(b)) + inner)
}

#[test]
fn flat_profile_grms() {
    let p = PsdProfile::flat(20.0, 2000.0, 0.01).unwrap();
    assert!((grms(&p) - 4.449719092257398).abs() < 1e-9);
}

#[test]
fn sloped_segment_matches_quadrature() {
    let p = PsdProfile::new(vec![(20.0, 0.01), (40.0, 0.02)]).unwrap();
    let area = grms(&p).powi(2);
    assert!((area - 0.3).abs() < 1e-12, "{area}");
    let numeric = trapezoid(|f| psd_at(&p, f).unwrap(), 20.0, 40.0, 20_000);
    assert!((area - numeric).abs() < 1e-6);
}

#[test]
fn log_log_interpolation() {
    let p = PsdProfile::new(vec![(20.0, 0.01), (80.0, 0.04), (2000.0, 0.04)]).unwrap();
    assert!((psd_at(&p, 40.0).unwrap() - 0.02).abs() < 1e-15);
    assert_eq!(psd_at(&p, 500.0).unwrap(), 0.04);
    assert!(matches!(psd_at(&p, 10.0), Err(RandvibError::OutOfBand { .. })));
    assert!(psd_at(&p, 2000.5).is_err());
}

#[test]
fn bad_profiles() {
    assert!(PsdProfile::new(vec![]).is_err());
    assert!(PsdProfile::new(vec![(20.0, 0.01), (20.0, 0.02)]).is_err());
    assert!(PsdProfile::new(vec![(20.0, 0.0), (40.0, 0.02)]).is_err());
}

#[test]
fn miles_examples() {
    let p = PsdProfile::flat(20.0, 2000.0, 0.01).unwrap();
    let g = miles_acceleration(100.0, 10.0, &p).unwrap();
    assert!((g - 3.963).abs() < 5e-4, "{g}");
    let q = PsdProfile::flat(20.0, 2000.0, 0.04).unwrap();
    let g = miles_acceleration(125.0, 25.0, &q).unwrap();
    assert!((g - 14.01).abs() < 5e-3, "{g}");
    assert!((three_sigma(g) - 3.0 * g).abs() == 0.0);
    assert!(matches!(miles_acceleration(100.0, 0.4, &p), Err(RandvibError::BadQ(_))));
}

/// Absolute acceleration response of a base-driven oscillator.
fn transmissibility_squared(f: f64, fn_hz: f64, q: f64) -> f64 {
    let (r, z2) = (f / fn_hz, (1.0 / q) * (f / fn_hz));
    (1.0 + z2 * z2) / ((1.0 - r * r).powi(2) + z2 * z2)
}

#[test]
fn miles_agrees_with_transmissibility_integral() {
    let p = PsdProfile::flat(20.0, 2000.0, 0.01).unwrap();
    for q in [10.0, 25.0, 50.0] {
        let fn_hz = 150.0;
        let miles = miles_acceleration(fn_hz, q, &p).unwrap();
        let ms = trapezoid(|f| 0.01 * transmissibility_squared(f, fn_hz, q), 20.0, 2000.0, 400_000);
        let rel = (miles / ms.sqrt() - 1.0).abs();
        assert!(rel < 0.01, "Q {q}: {miles} vs {} ({rel})", ms.sqrt());
    }
}

#[test]
fn peak_search() {
    let f: Vec<f64> = (60..=150).map(f64::from).collect();
    let s: Vec<f64> = f.iter().map(|&x| 1.0 / (1.0 + (x - 106.0).powi(2))).collect();
    let c = PsdCurve::new("s", f, s).unwrap();
    assert_eq!(find_peak(&c, (60.0, 150.0)).unwrap(), (106.0, 1.0));
    assert_eq!(find_peak(&c, (60.0, 100.0)).unwrap().0, 100.0);

    let tie = PsdCurve::new("t", vec![80.0, 90.0, 100.0, 120.0], vec![0.1, 0.5, 0.2, 0.5]).unwrap();
    assert_eq!(find_peak(&tie, (0.0, 1000.0)).unwrap(), (90.0, 0.5));
    assert!(matches!(find_peak(&tie, (200.0, 300.0)), Err(RandvibError::EmptyBand(..))));
}

#[test]
fn magnification_examples() {
    let sensor = PsdCurve::new("s", vec![50.0, 75.0, 100.0], vec![0.05, 0.33, 0.08]).unwrap();
    let reference = PsdCurve::new("r", vec![20.0, 2000.0], vec![0.1269, 0.1269]).unwrap();
    let m = response_magnification(&sensor, &reference, (20.0, 2000.0), MagnificationOptions::default()).unwrap();
    assert_eq!(m.peak_frequency, 75.0);
    assert!((m.magnification - 2.6).abs() < 5e-3, "{}", m.magnification);

    let same = response_magnification(&reference, &reference, (20.0, 2000.0), MagnificationOptions::default()).unwrap();
    assert_eq!(same.magnification, 1.0);

    let amp = MagnificationOptions { amplitude: true, ..Default::default() };
    let a = response_magnification(&sensor, &reference, (20.0, 2000.0), amp).unwrap();
    assert!((a.magnification - m.magnification.sqrt()).abs() < 1e-15);

    let zero = PsdCurve::new("z", vec![20.0, 2000.0], vec![0.0, 0.0]).unwrap();
    assert!(matches!(
        response_magnification(&sensor, &zero, (20.0, 2000.0), MagnificationOptions::default()),
        Err(RandvibError::ZeroReference { .. })
    ));
}

proptest! {
    #[test]
    fn grms_scales_with_root_of_level(level in 1e-4f64..1.0, k in 1e-3f64..1e3, lo in 5.0f64..50.0, span in 1.1f64..100.0) {
        let p = PsdProfile::new(vec![(lo, level), (lo * span.sqrt(), level * 3.0), (lo * span, level)]).unwrap();
        let scaled = grms(&p.scaled(k).unwrap());
        prop_assert!((scaled - k.sqrt() * grms(&p)).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn grms_is_additive_over_bands(a in 1e-3f64..1.0, b in 1e-3f64..1.0, c in 1e-3f64..1.0) {
        let whole = PsdProfile::new(vec![(20.0, a), (150.0, b), (2000.0, c)]).unwrap();
        let left = PsdProfile::new(vec![(20.0, a), (150.0, b)]).unwrap();
        let right = PsdProfile::new(vec![(150.0, b), (2000.0, c)]).unwrap();
        let sum = grms(&left).powi(2) + grms(&right).powi(2);
        prop_assert!((grms(&whole).powi(2) - sum).abs() <= 1e-12 * sum);
    }

    #[test]
    fn magnification_ignores_common_scale(k in 1e-3f64..1e3, peak in 0.1f64..10.0) {
        let sensor = PsdCurve::new("s", vec![50.0, 75.0, 100.0], vec![0.05, peak, 0.08]).unwrap();
        let reference = PsdCurve::new("r", vec![20.0, 2000.0], vec![0.1269, 0.1269]).unwrap();
        let o = MagnificationOptions::default();
        let a = response_magnification(&sensor, &reference, (20.0, 2000.0), o).unwrap();
        let b = response_magnification(&sensor.scaled(k), &reference.scaled(k), (20.0, 2000.0), o).unwrap();
        prop_assert!((a.magnification - b.magnification).abs() <= 1e-12 * a.magnification);
        prop_assert_eq!(a.peak_frequency, b.peak_frequency);
    }
}
