use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rltsdp::compare::{generate, GenOptions};
use rltsdp::instance::{parse_decimal, QpInstance};
use rltsdp::oracle::{global_min_boxqp, grid_minimum, grid_refine_check, FaceTag, OracleError, MAX_ORACLE_N};

fn instance(n: usize, seed: u64, plus: usize) -> QpInstance {
    generate(&GenOptions { n, density: 0.7, plus, seed, coef_max: 20, ..GenOptions::default() }).unwrap()
}

#[test]
fn never_beaten_by_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for seed in 0..30 {
        let n = 2 + seed as usize % 5;
        let inst = instance(n, seed, seed as usize % (n + 1));
        let sol = global_min_boxqp(&inst).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..n)
                .map(|_| match rng.gen_range(0..4) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.gen(),
                })
                .collect();
            assert!(inst.objective_value(&x).unwrap() >= sol.value - 1e-9, "seed {seed}");
        }
    }
}

#[test]
fn agrees_with_grid_search_in_low_dimension() {
    for seed in 0..40 {
        let n = 1 + seed as usize % 4;
        let inst = instance(n, 100 + seed, seed as usize % (n + 1));
        let sol = global_min_boxqp(&inst).unwrap();
        assert!(grid_refine_check(&inst, sol.value, 12).unwrap(), "seed {seed}");
        // The grid cannot go below the optimum either.
        let (grid, _) = grid_minimum(&inst, 12).unwrap();
        assert!(grid >= sol.value - 1e-9);
    }
}

#[test]
fn argmin_attains_the_value_and_matches_its_face() {
    for seed in 0..30 {
        let n = 2 + seed as usize % 5;
        let inst = instance(n, 200 + seed, 2.min(n));
        let sol = global_min_boxqp(&inst).unwrap();
        assert!((inst.objective_value(&sol.argmin).unwrap() - sol.value).abs() < 1e-9);
        let exact = sol.exact_value.clone().expect("rational mode");
        let xq = sol.exact_argmin.clone().unwrap();
        assert_eq!(inst.objective_exact(&xq).unwrap(), exact);
        assert!((exact.to_f64().unwrap() - sol.value).abs() < 1e-12);
        for (x, tag) in xq.iter().zip(&sol.face) {
            match tag {
                FaceTag::Lower => assert_eq!(x.to_f64(), Some(0.0)),
                FaceTag::Upper => assert_eq!(x.to_f64(), Some(1.0)),
                FaceTag::Free => {}
            }
        }
    }
}

#[test]
fn float_mode_handles_larger_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = instance(9, 5, 3);
    let sol = global_min_boxqp(&inst).unwrap();
    assert!(sol.exact_value.is_none());
    for _ in 0..2000 {
        let x: Vec<f64> = (0..9).map(|_| rng.gen()).collect();
        assert!(inst.objective_value(&x).unwrap() >= sol.value - 1e-9);
    }
}

#[test]
fn known_values() {
    // Convex separable: each coordinate minimises d x^2 + c x on [0, 1].
    let inst = QpInstance::parse("n 3\nd 1 2\nd 2 1\nd 3 4\nc 1 -1\nc 2 -3\nc 3 1\n").unwrap();
    let sol = global_min_boxqp(&inst).unwrap();
    assert_eq!(sol.exact_value, parse_decimal("-2.125"));

    // Concave in one variable: the minimum sits at a vertex.
    let inst = QpInstance::parse("n 1\nd 1 -1\nc 1 0.5\n").unwrap();
    let sol = global_min_boxqp(&inst).unwrap();
    assert_eq!(sol.exact_value, parse_decimal("-0.5"));
    assert_eq!(sol.face, vec![FaceTag::Upper]);
}

#[test]
fn refuses_large_dimensions() {
    let inst = QpInstance::new(MAX_ORACLE_N + 1).unwrap();
    assert_eq!(global_min_boxqp(&inst).unwrap_err(), OracleError::TooLarge { n: MAX_ORACLE_N + 1, limit: MAX_ORACLE_N });
    assert_eq!(grid_minimum(&QpInstance::new(2).unwrap(), 0).unwrap_err(), OracleError::ZeroResolution);
}
