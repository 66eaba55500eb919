use proptest::prelude::*;
use yeastloc_core::model::{argmax_index, N_COMPARTMENTS};
use yeastloc_core::{normalize, StateVector};

proptest! {
    #[test]
    fn normalize_sums_to_one_and_keeps_ratios(
        v in prop::array::uniform5(prop_oneof![Just(0.0), 1e-6f64..1e6]),
    ) {
        prop_assume!(v.iter().any(|&x| x > 0.0));
        let s = normalize(v).unwrap();
        let sum: f64 = s.components().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        for i in 0..N_COMPARTMENTS {
            for j in 0..N_COMPARTMENTS {
                if v[j] > 0.0 {
                    let got = s.components()[i] / s.components()[j];
                    let want = v[i] / v[j];
                    prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-300));
                }
            }
        }
        prop_assert_eq!(argmax_index(s.components()), argmax_index(&v));
    }

    #[test]
    fn from_milli_is_scale_invariant(
        raw in prop::array::uniform5(0u32..400),
        k in 1u32..50,
    ) {
        prop_assume!(raw.iter().any(|&x| x > 0));
        let a = StateVector::from_milli(raw).unwrap();
        let b = StateVector::from_milli(raw.map(|x| x * k)).unwrap();
        for (x, y) in a.components().iter().zip(b.components()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
