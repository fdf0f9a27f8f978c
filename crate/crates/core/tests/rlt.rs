use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rltsdp::rlt::{ell, rho, subsets, LinearForm, Registry, RltError, VarKey};

/// Disjoint `(J1, J2)` drawn from nodes `1..=8`, plus a box point.
fn factor_case() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<f64>)> {
    (prop::collection::vec(0u8..3, 8), prop::collection::vec(0.0f64..=1.0, 8)).prop_map(|(tags, x)| {
        let j1 = (1..=8).filter(|&i| tags[i - 1] == 1).collect();
        let j2 = (1..=8).filter(|&i| tags[i - 1] == 2).collect();
        (j1, j2, x)
    })
}

fn product(j1: &[usize], j2: &[usize], x: &[f64]) -> f64 {
    j1.iter().map(|&i| x[i - 1]).product::<f64>() * j2.iter().map(|&i| 1.0 - x[i - 1]).product::<f64>()
}

proptest! {
    #[test]
    fn ell_grounds_to_the_factor_product((j1, j2, x) in factor_case()) {
        let form = ell(&j1, &j2).unwrap();
        prop_assert_eq!(form.len(), 1 << j2.len());
        prop_assert!((form.evaluate(&x).unwrap() - product(&j1, &j2, &x)).abs() < 1e-12);
    }

    #[test]
    fn rho_grounds_to_square_times_factor((j1, j2, x) in factor_case(), i in 1usize..=8) {
        let res = rho(i, &j1, &j2);
        if j1.contains(&i) || j2.contains(&i) {
            prop_assert_eq!(res, Err(RltError::SquareInside(i)));
        } else {
            let v = res.unwrap().evaluate(&x).unwrap();
            prop_assert!((v - x[i - 1].powi(2) * product(&j1, &j2, &x)).abs() < 1e-12);
        }
    }

    #[test]
    fn factors_over_a_set_partition_unity(set in prop::collection::btree_set(1usize..=8, 0..6), x in prop::collection::vec(0.0f64..=1.0, 8)) {
        let set: Vec<usize> = set.into_iter().collect();
        let mut total = LinearForm::zero();
        for j1 in subsets(&set) {
            let j2: Vec<usize> = set.iter().copied().filter(|v| !j1.contains(v)).collect();
            total += &ell(&j1, &j2).unwrap();
        }
        prop_assert_eq!(&total, &LinearForm::from_int(1));
        prop_assert!((total.evaluate(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn substitution_preserves_value(a in -5i64..5, b in -5i64..5, c in -5i64..5, mut x in prop::collection::vec(0.0f64..=1.0, 3)) {
        let int = |v: i64| BigRational::from_integer(BigInt::from(v));
        let mut form = LinearForm::term(VarKey::monomial([1, 2]), int(a));
        form.add_term(VarKey::monomial([3]), int(b));
        form.add_term(VarKey::one(), int(c));
        // At points with x3 = 1 - x1, replacing z3 by ell({}, {1}) keeps the value.
        x[2] = 1.0 - x[0];
        let before = form.evaluate(&x).unwrap();
        form.substitute(&VarKey::monomial([3]), &ell(&[], &[1]).unwrap());
        prop_assert!(form.coef(&VarKey::monomial([3])) == int(0));
        prop_assert!((form.evaluate(&x).unwrap() - before).abs() < 1e-12);
    }
}

#[test]
fn rejects_overlapping_index_sets() {
    assert!(ell(&[1, 2], &[2]).is_err());
    assert!(rho(3, &[1], &[1]).is_err());
}

#[test]
fn registry_interns_in_first_use_order() {
    let mut reg = Registry::new();
    let a = reg.intern(&VarKey::monomial([2]));
    let b = reg.intern(&VarKey::square(1, [2]));
    assert_eq!((a, b), (0, 1));
    assert_eq!(reg.intern(&VarKey::monomial([2])), 0);
    reg.intern_form(&ell(&[3], &[4]).unwrap());
    assert_eq!(reg.keys().len(), 4);
    assert!(reg.contains(&VarKey::monomial([3, 4])));
    assert!(!reg.contains(&VarKey::one()));
}

#[test]
fn squares_ground_at_points() {
    let x = [0.5, 0.25, 1.0];
    assert_eq!(VarKey::square(1, [2, 3]).ground(&x).unwrap(), 0.0625);
    assert_eq!(VarKey::monomial([]).ground(&x).unwrap(), 1.0);
    assert_eq!(VarKey::monomial([4]).ground(&x), Err(RltError::OutOfRange(4)));
}
