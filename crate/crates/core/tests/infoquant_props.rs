use ensemble_info::infoquant::{cross_projection, purity, self_fidelity, OverlapMatrix};
use ensemble_info::spectra::{make_box, make_ho, make_rotor, make_so, product, EnsembleModel};
use ensemble_info::thermo::{Beta, EvalOptions};
use proptest::prelude::*;

fn beta(v: f64) -> Beta {
    Beta::new(v).unwrap()
}

fn model(which: u8) -> EnsembleModel {
    match which % 5 {
        0 => make_ho(),
        1 => make_so(-0.5).unwrap(),
        2 => make_box(0.8).unwrap(),
        3 => make_rotor(1.3).unwrap(),
        _ => make_ho().scaled(0.4).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fidelity_is_a_symmetric_fraction(which in 0u8..5, b1 in 0.05f64..10.0, b2 in 0.05f64..10.0) {
        let m = model(which);
        let o = EvalOptions::default();
        let f = self_fidelity(&m, beta(b1), beta(b2), &o).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0 + 1e-12, "F = {f}");
        prop_assert_eq!(f, self_fidelity(&m, beta(b2), beta(b1), &o).unwrap());
    }

    #[test]
    fn purity_is_diagonal_fidelity(which in 0u8..5, b in 0.05f64..10.0) {
        let m = model(which);
        let o = EvalOptions::default();
        let p = purity(&m, beta(b), &o).unwrap();
        let f = self_fidelity(&m, beta(b), beta(b), &o).unwrap();
        prop_assert!((p - f).abs() <= 1e-14);
    }

    #[test]
    fn purity_is_multiplicative_over_products(b in 0.05f64..8.0, which in 0u8..5, other in 0u8..5) {
        let (a, c) = (model(which), model(other));
        let o = EvalOptions::default().with_tol(1e-15);
        let joint = product(vec![a.clone(), c.clone()]).unwrap();
        let expect = purity(&a, beta(b), &o).unwrap() * purity(&c, beta(b), &o).unwrap();
        let got = purity(&joint, beta(b), &o).unwrap();
        prop_assert!((got - expect).abs() <= 1e-12 * expect, "{got} vs {expect}");
    }

    #[test]
    fn oscillator_purity_increases(b in 0.05f64..6.0, step in 1e-2f64..1.0, so in any::<bool>()) {
        // Beyond this range 1 - P drops under the resolution of a double.
        let m = if so { make_so(2.5).unwrap() } else { make_ho() };
        let o = EvalOptions::default().with_tol(1e-15);
        prop_assert!(purity(&m, beta(b + step), &o).unwrap() > purity(&m, beta(b), &o).unwrap());
    }

    #[test]
    fn identity_overlaps_reduce_to_self_fidelity(b1 in 0.5f64..6.0, b2 in 0.5f64..6.0) {
        let ho = make_ho();
        let o = EvalOptions::default();
        let p = cross_projection(&ho, &ho, &OverlapMatrix::identity(60).unwrap(), beta(b1), beta(b2), 1e-12, &o).unwrap();
        let f = self_fidelity(&ho, beta(b1), beta(b2), &o).unwrap();
        prop_assert!((p.value - f).abs() <= 1e-12, "{} vs {f}", p.value);
    }
}

#[test]
fn low_temperature_decay_of_oscillator_fidelity() {
    let (ho, o) = (make_ho(), EvalOptions::default());
    let fixed = beta(1.0);
    let betas: Vec<f64> = (0..40).map(|i| 1.0 * 1e-4f64.powf(i as f64 / 39.0)).collect();
    let f: Vec<f64> = betas
        .iter()
        .map(|&b| self_fidelity(&ho, beta(b), fixed, &o).unwrap())
        .collect();
    assert!(f.windows(2).all(|w| w[1] < w[0]));
    // F = 2/(coth(β/2) + coth(1/2)) ≈ β as β → 0
    assert!(f[f.len() - 1] < 1e-4);
}
