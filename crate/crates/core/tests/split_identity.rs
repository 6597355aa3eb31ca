use num_complex::Complex64;
use proptest::prelude::*;
use qab_core::sim::{
    decouple_commuting, decouple_noncommuting, eigen_split_residual, random_commuting_model, random_model, CVec,
    QuaternionEigenpair,
};

fn trial(dim: usize, values: &[f64], epsilon: f64) -> QuaternionEigenpair {
    let v = |off: usize| CVec::from_fn(dim, |r, _| Complex64::new(values[off + 2 * r], values[off + 2 * r + 1]));
    QuaternionEigenpair { epsilon, phi: v(0), chi: v(2 * dim) }
}

proptest! {
    #[test]
    fn quaternion_residual_splits_into_two_complex_residuals(
        seed in 0u64..10_000,
        dim in 1usize..7,
        values in prop::collection::vec(-1.0f64..1.0, 28),
        epsilon in -3.0f64..3.0,
    ) {
        let model = random_model(dim, seed).unwrap();
        let r = eigen_split_residual(&model, &trial(dim, &values, epsilon));
        prop_assert!((r.quaternion - r.complex_part.hypot(r.j_part)).abs() <= 1e-12 * r.quaternion.max(1.0));
    }

    #[test]
    fn eigenpairs_solve_the_quaternion_problem(seed in 0u64..10_000, dim in 1usize..7) {
        let model = random_model(dim, seed).unwrap();
        let pairs = model.eigenpairs().unwrap();
        prop_assert_eq!(pairs.len(), 2 * dim);
        for p in &pairs {
            prop_assert!(eigen_split_residual(&model, p).quaternion < 1e-11);
        }
    }

    #[test]
    fn commuting_models_decouple(seed in 0u64..10_000, half in 1usize..4) {
        let model = random_commuting_model(2 * half, seed).unwrap();
        for p in model.eigenpairs().unwrap() {
            let d = decouple_commuting(&model, &p).unwrap();
            prop_assert!(d.phi_residual < 1e-10 && d.chi_residual < 1e-10);
        }
    }
}

#[test]
fn generic_models_cannot_have_a_scalar_commutator() {
    let model = random_model(4, 11).unwrap();
    let pair = model.eigenpairs().unwrap().remove(0);
    assert!(decouple_commuting(&model, &pair).is_err());
    assert!(decouple_noncommuting(&model, &pair).is_err());
}

#[test]
fn odd_dimension_commuting_model_is_rejected() {
    assert!(random_commuting_model(3, 1).is_err());
}
