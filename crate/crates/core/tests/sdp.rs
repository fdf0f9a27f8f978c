use rltsdp::compare::{generate, GenOptions};
use rltsdp::oracle::global_min_boxqp;
use rltsdp::relax::{build_baseline, build_exact_hull, Baseline};
use rltsdp::sdp::{import_sdpa, lower, solve, to_sdpa_string, verify_certificate, SdpBlock, SdpStandard, SolveStatus};

fn one_var(blocks: Vec<SdpBlock>, cost: f64) -> SdpStandard {
    SdpStandard { num_vars: 1, blocks, cost: vec![cost], offset: 0.0 }
}

/// Diagonal block with rows `a_r y - b_r >= 0`.
fn lp_block(rows: &[(f64, f64)]) -> SdpBlock {
    let mut b = SdpBlock::new(rows.len(), true);
    for (r, &(a, rhs)) in rows.iter().enumerate() {
        b.add(Some(0), r, r, a);
        b.add(None, r, r, rhs);
    }
    b
}

#[test]
fn scalar_lower_bound() {
    let sdp = one_var(vec![lp_block(&[(1.0, 2.0)])], 1.0);
    let res = solve(&sdp, 1e-8).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal);
    assert!((res.primal_objective - 2.0).abs() < 1e-6);
    verify_certificate(&sdp, &res, 1e-7).unwrap();
}

#[test]
fn two_by_two_lmi() {
    // [[y, 1], [1, y]] >= 0 holds iff y >= 1.
    let mut b = SdpBlock::new(2, false);
    b.add(Some(0), 0, 0, 1.0);
    b.add(Some(0), 1, 1, 1.0);
    b.add(None, 0, 1, -1.0);
    let sdp = one_var(vec![b], 1.0);
    let res = solve(&sdp, 1e-8).unwrap();
    assert_eq!(res.status, SolveStatus::Optimal);
    assert!((res.primal_objective - 1.0).abs() < 1e-6);
    verify_certificate(&sdp, &res, 1e-7).unwrap();
}

#[test]
fn detects_infeasibility_and_unboundedness() {
    let infeasible = one_var(vec![lp_block(&[(1.0, 1.0), (-1.0, 0.0)])], 1.0);
    assert_eq!(solve(&infeasible, 1e-8).unwrap().status, SolveStatus::Infeasible);
    let unbounded = one_var(vec![lp_block(&[(-1.0, 0.0)])], 1.0);
    assert_eq!(solve(&unbounded, 1e-8).unwrap().status, SolveStatus::Unbounded);
}

#[test]
fn relaxation_bounds_satisfy_weak_duality() {
    for seed in 0..15 {
        let n = 3 + seed as usize % 3;
        let inst = generate(&GenOptions { n, density: 0.6, plus: 2, seed, no_triplet: true, ..GenOptions::default() }).unwrap();
        let oracle = global_min_boxqp(&inst).unwrap().value;
        let g = inst.build_graph();
        let mut bounds = Vec::new();
        for prog in [build_baseline(&g, &inst, Baseline::ShorMcTri).unwrap(), build_exact_hull(&g, &inst).unwrap()] {
            let low = lower(&prog).unwrap();
            let res = solve(&low.sdp, 1e-8).unwrap();
            verify_certificate(&low.sdp, &res, 1e-6).unwrap();
            assert!(res.dual_objective <= res.primal_objective + 1e-6 * (1.0 + res.primal_objective.abs()));
            assert!(res.primal_objective <= oracle + 1e-5 * oracle.abs().max(1.0), "seed {seed}");
            bounds.push(res.primal_objective);
        }
        // The hull is at least as tight as the baseline.
        assert!(bounds[1] >= bounds[0] - 1e-5 * bounds[0].abs().max(1.0), "seed {seed}: {bounds:?}");
    }
}

#[test]
fn sdpa_text_roundtrips() {
    let inst = generate(&GenOptions { n: 4, seed: 3, ..GenOptions::default() }).unwrap();
    let prog = build_baseline(&inst.build_graph(), &inst, Baseline::ShorMcTri).unwrap();
    let sdp = lower(&prog).unwrap().sdp;
    let text = to_sdpa_string(&sdp);
    let back = import_sdpa(&text).unwrap();
    assert_eq!(to_sdpa_string(&back), text);
    let (a, b) = (solve(&sdp, 1e-8).unwrap(), solve(&back, 1e-8).unwrap());
    assert!((a.primal_objective - b.primal_objective).abs() < 1e-6);
}

#[test]
fn sdpa_rejects_malformed_input() {
    assert!(import_sdpa("").is_err());
    assert!(import_sdpa("1\n1\n2\n1.0\n0 1 1 3 1.0\n").is_err());
    assert!(import_sdpa("1\n1\n2\n1.0\n1 1 1 1 nan_text\n").is_err());
}
