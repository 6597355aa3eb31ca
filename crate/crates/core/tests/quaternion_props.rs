use num_complex::Complex64;
use proptest::prelude::*;
use qab_core::{k_from_angles, Quaternion, UnitPhaseAngles};

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-2.0f64..2.0).prop_map(Quaternion::from_real4)
}

proptest! {
    #[test]
    fn product_is_associative(a in quat(), b in quat(), c in quat()) {
        prop_assert!(((a * b) * c - a * (b * c)).norm() < 1e-12);
    }

    #[test]
    fn norm_is_multiplicative(a in quat(), b in quat()) {
        prop_assert!(((a * b).norm() - a.norm() * b.norm()).abs() < 1e-12);
    }

    #[test]
    fn conjugation_reverses_products(a in quat(), b in quat()) {
        prop_assert!(((a * b).conj() - b.conj() * a.conj()).norm() < 1e-12);
    }

    #[test]
    fn j_conjugates_complex_numbers(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let z = Complex64::new(re, im);
        let lhs = Quaternion::from_complex(z) * Quaternion::J;
        let rhs = Quaternion::J * Quaternion::from_complex(z.conj());
        prop_assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn right_complex_multiplication_matches_product(a in quat(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let c = Complex64::new(re, im);
        prop_assert!((a.mul_complex_right(c) - a * Quaternion::from_complex(c)).norm() < 1e-12);
        prop_assert!((a.complex_mul_left(c) - Quaternion::from_complex(c) * a).norm() < 1e-12);
        prop_assert!((a.right_mul_i() - a * Quaternion::I).norm() < 1e-15);
    }

    #[test]
    fn inverse_is_two_sided(a in quat()) {
        prop_assume!(a.norm() > 1e-3);
        let inv = a.inverse().unwrap();
        prop_assert!((a * inv - Quaternion::ONE).norm() < 1e-10);
        prop_assert!((inv * a - Quaternion::ONE).norm() < 1e-10);
    }

    #[test]
    fn exp_of_pure_quaternion_is_unit(b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
        let e = Quaternion::from_real4([0.0, b, c, d]).exp().unwrap();
        prop_assert!((e.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_angles_round_trip(t in 0.01f64..1.56, g in -3.1f64..3.1, o in -3.1f64..3.1) {
        let q = k_from_angles(UnitPhaseAngles::new(t, g, o));
        prop_assert!((q.norm() - 1.0).abs() < 1e-14);
        let back = UnitPhaseAngles::from_unit(q).unwrap();
        prop_assert!((back.to_quaternion() - q).norm() < 1e-12);
    }
}

#[test]
fn units_follow_hamilton_rules() {
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
    assert_eq!(i * j, k);
    assert_eq!(j * i, -k);
    assert_eq!(i * i, -Quaternion::ONE);
    assert_eq!(j * j, -Quaternion::ONE);
    assert_eq!(k * k, -Quaternion::ONE);
}

#[test]
fn serializes_as_four_reals() {
    let q = Quaternion::from_real4([1.0, -2.0, 0.5, 3.0]);
    let s = serde_json::to_string(&q).unwrap();
    assert_eq!(s, "[1.0,-2.0,0.5,3.0]");
    assert_eq!(serde_json::from_str::<Quaternion>(&s).unwrap(), q);
}
