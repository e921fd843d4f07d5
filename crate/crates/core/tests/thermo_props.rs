use ensemble_info::spectra::{make_box, make_custom, make_ho, make_rotor, make_so, product, EnsembleModel, Level};
use ensemble_info::thermo::{heat_capacity, internal_energy, partition, Beta, EvalOptions};
use proptest::prelude::*;

fn beta(v: f64) -> Beta {
    Beta::new(v).unwrap()
}

/// Tight enough that truncation sits well below the 1e-12 identities checked here.
fn z(model: &EnsembleModel, b: f64) -> f64 {
    partition(model, beta(b), &EvalOptions::default().with_tol(1e-15)).unwrap().value
}

fn builtin(which: u8, theta: f64) -> EnsembleModel {
    match which % 4 {
        0 => make_ho(),
        1 => make_so(0.5).unwrap(),
        2 => make_box(theta).unwrap(),
        _ => make_rotor(theta).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn series_agrees_with_closed_form(b in 0.05f64..20.0, so in any::<bool>()) {
        let m = if so { make_so(1.5).unwrap() } else { make_ho() };
        let opts = EvalOptions::default().with_tol(1e-10);
        let s = partition(&m, beta(b), &opts).unwrap();
        let c = partition(&m, beta(b), &opts.closed_form(true)).unwrap();
        prop_assert!((s.value - c.value).abs() <= 1e-10 * c.value);
        prop_assert!(s.tail_bound >= 0.0 && s.tail_bound <= 1e-10 * s.value);
    }

    #[test]
    fn partition_is_positive_and_decreasing(which in 0u8..4, theta in 0.2f64..3.0, b in 0.01f64..5.0, step in 0.01f64..1.0) {
        let m = builtin(which, theta);
        let (lo, hi) = (z(&m, b), z(&m, b + step));
        prop_assert!(lo.is_finite() && hi > 0.0);
        prop_assert!(hi < lo);
    }

    #[test]
    fn product_rule(b in 0.05f64..8.0, theta in 0.3f64..2.0) {
        let (a, c) = (make_ho(), make_rotor(theta).unwrap());
        let joint = product(vec![a.clone(), c.clone()]).unwrap();
        let expect = z(&a, b) * z(&c, b);
        prop_assert!((z(&joint, b) - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn product_is_associative(b in 0.1f64..8.0) {
        let (a, bx, c) = (make_ho(), make_box(0.7).unwrap(), make_ho().scaled(2.5).unwrap());
        let left = product(vec![a.clone(), product(vec![bx.clone(), c.clone()]).unwrap()]).unwrap();
        let right = product(vec![product(vec![a, bx]).unwrap(), c]).unwrap();
        let (l, r) = (z(&left, b), z(&right, b));
        prop_assert!((l - r).abs() <= 1e-12 * r);
    }

    #[test]
    fn capacity_is_energy_variance(b in 0.2f64..5.0, e1 in 0.1f64..3.0, g in 1u64..4) {
        // Two-level system: C = β² Δ² g e^{-βΔ} / (1 + g e^{-βΔ})²
        let m = make_custom("two-level", 1.0, vec![Level::new(0.0, 1), Level::new(e1, g)]).unwrap();
        let w = g as f64 * (-b * e1).exp();
        let c = heat_capacity(&m, beta(b), &EvalOptions::default()).unwrap();
        let expect = b * b * e1 * e1 * w / (1.0 + w).powi(2);
        prop_assert!((c - expect).abs() <= 1e-9);
        let eps = internal_energy(&m, beta(b), &EvalOptions::default()).unwrap();
        prop_assert!((eps - b * e1 * w / (1.0 + w)).abs() <= 1e-9);
    }
}

#[test]
fn rejects_divergent_beta() {
    assert!(Beta::new(0.0).is_err());
    assert!(partition(&make_ho(), beta(1e-5), &EvalOptions::default()).is_err());
}
