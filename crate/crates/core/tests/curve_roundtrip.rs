use ensemble_info::curve::CurveSeries;
use proptest::prelude::*;

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => any::<f64>().prop_filter("finite", |v| v.is_finite()),
        1 => Just(f64::NAN),
        1 => prop_oneof![Just(f64::INFINITY), Just(f64::NEG_INFINITY), Just(-0.0), Just(f64::MIN_POSITIVE / 8.0)],
    ]
}

prop_compose! {
    fn series()(rows in 1usize..12, cols in 0usize..4)
        (steps in prop::collection::vec(1e-6f64..3.0, rows),
         cells in prop::collection::vec(value(), rows * cols),
         flags in prop::collection::vec(prop::option::weighted(0.3, "[a-z ,;=.0-9]{1,12}"), rows),
         start in 1e-4f64..1.0,
         cols in Just(cols))
        -> CurveSeries
    {
        let mut b = start;
        let beta: Vec<f64> = steps.iter().map(|s| { let v = b; b += s; v }).collect();
        let rows = beta.len();
        let mut c = CurveSeries::new(beta).unwrap();
        for j in 0..cols {
            c.push_column(&format!("F_{j}"), cells[j * rows..(j + 1) * rows].to_vec()).unwrap();
        }
        for (i, f) in flags.iter().enumerate() {
            if let Some(f) = f {
                c.flag(i, f);
            }
        }
        c.set_metadata("model", "ho").unwrap();
        c
    }
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()))
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(c in series()) {
        let text = c.to_csv();
        let back = CurveSeries::from_csv(&text).unwrap();
        prop_assert!(same_bits(c.beta(), back.beta()));
        for ((n1, v1), (n2, v2)) in c.columns().zip(back.columns()) {
            prop_assert_eq!(n1, n2);
            prop_assert!(same_bits(v1, v2));
        }
        prop_assert_eq!(c.flags(), back.flags());
        prop_assert_eq!(back.metadata("model"), Some("ho"));
        prop_assert_eq!(back.to_csv(), text);
    }
}
