use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rltsdp::instance::{parse_decimal, InstanceError, QpInstance};

fn rational() -> impl Strategy<Value = BigRational> {
    (-50i64..=50, 1i64..=12).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn instance() -> impl Strategy<Value = QpInstance> {
    (1usize..=5).prop_flat_map(|n| {
        (prop::collection::vec(rational(), n * (n + 1) / 2), prop::collection::vec(rational(), n)).prop_map(move |(q, c)| {
            let mut inst = QpInstance::new(n).unwrap();
            let mut it = q.into_iter();
            for i in 1..=n {
                for j in i..=n {
                    let v = it.next().unwrap();
                    if i == j {
                        inst.set_diag(i, v).unwrap();
                    } else {
                        inst.set_offdiag(i, j, v).unwrap();
                    }
                }
                inst.set_linear(i, c[i - 1].clone()).unwrap();
            }
            inst
        })
    })
}

proptest! {
    #[test]
    fn emit_then_parse_is_identity(inst in instance()) {
        let text = inst.emit();
        let back = QpInstance::parse(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.emit(), text);
    }

    #[test]
    fn exact_and_float_objectives_agree(inst in instance(), xs in prop::collection::vec(0u32..=8, 5)) {
        let n = inst.n();
        let xq: Vec<BigRational> = xs[..n].iter().map(|&k| BigRational::new(BigInt::from(k), BigInt::from(8))).collect();
        let xf: Vec<f64> = xq.iter().map(|v| v.to_f64().unwrap()).collect();
        let exact = inst.objective_exact(&xq).unwrap().to_f64().unwrap();
        prop_assert!((inst.objective_value(&xf).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn symmetric_matrix_form_matches(inst in instance()) {
        let again = QpInstance::from_symmetric(&halve_offdiag(&inst), &inst.linear_dense()).unwrap();
        prop_assert_eq!(again, inst);
    }
}

/// Dense symmetric `Q` with `x'Qx` equal to the instance's quadratic part.
fn halve_offdiag(inst: &QpInstance) -> Vec<Vec<BigRational>> {
    let n = inst.n();
    let two = BigRational::from_integer(BigInt::from(2));
    let mut q = vec![vec![BigRational::from_integer(BigInt::from(0)); n]; n];
    for (&i, v) in inst.diag() {
        q[i - 1][i - 1] = v.clone();
    }
    for (&(i, j), v) in inst.offdiag() {
        q[i - 1][j - 1] = v / &two;
        q[j - 1][i - 1] = v / &two;
    }
    q
}

#[test]
fn objective_on_a_known_point() {
    let inst = QpInstance::parse("# small\nn 2\nd 1 1\nq 1 2 -8\nc 2 0.5\n").unwrap();
    assert_eq!(inst.objective_value(&[1.0, 0.5]).unwrap(), 1.0 - 4.0 + 0.25);
    assert_eq!(inst.objective_exact(&[parse_decimal("1").unwrap(), parse_decimal("0.5").unwrap()]).unwrap(), parse_decimal("-2.75").unwrap());
    assert_eq!(
        inst.objective_value(&[1.0]).unwrap_err(),
        InstanceError::DimensionMismatch { expected: 2, got: 1 }
    );
}

#[test]
fn parse_errors_name_the_line() {
    assert_eq!(QpInstance::parse("d 1 2\n").unwrap_err(), InstanceError::MissingDimension);
    assert!(matches!(QpInstance::parse("n 2\nd 3 1\n"), Err(InstanceError::IndexOutOfRange { line: 2, index: 3, n: 2 })));
    assert!(matches!(QpInstance::parse("n 2\nd 1 1\nd 1 2\n"), Err(InstanceError::Duplicate { line: 3, .. })));
    assert!(matches!(QpInstance::parse("n 2\nx 1 1\n"), Err(InstanceError::Malformed { line: 2, .. })));
}
