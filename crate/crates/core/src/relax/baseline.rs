use super::hull::add_plus_free_remainder;
use super::{add_psd2, fmt_set, LmiBlock, Psd2Config, RelaxError, RelaxationProgram};
use crate::graph::{LoopGraph, NodeSet};
use crate::instance::QpInstance;
use crate::rlt::{ell, LinearForm, VarKey};

/// The classical relaxations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Shor,
    ShorMc,
    ShorMcTri,
}

pub(crate) fn check_dims(g: &LoopGraph, inst: &QpInstance) -> Result<(), RelaxError> {
    let expected: NodeSet = (1..=inst.n()).collect();
    if g.nodes() != &expected {
        return Err(RelaxError::DimensionMismatch { inst: inst.n(), graph: g.node_count() });
    }
    Ok(())
}

/// Appends the bordered moment matrix `[[1, z^T], [z, Y]]` over `nodes`.
pub fn add_shor_block(prog: &mut RelaxationProgram, nodes: &NodeSet) {
    let nv: Vec<usize> = nodes.iter().copied().collect();
    let key = |a: usize, b: usize| -> VarKey {
        match (a, b) {
            (0, 0) => VarKey::one(),
            (0, v) | (v, 0) => VarKey::monomial([nv[v - 1]]),
            (u, v) if u == v => VarKey::Square(nv[u - 1], Vec::new()),
            (u, v) => VarKey::monomial([nv[u - 1], nv[v - 1]]),
        }
    };
    let k = nv.len() + 1;
    let entries = (0..k).map(|a| (0..k).map(|b| LinearForm::var(key(a, b))).collect()).collect();
    prog.push_block(LmiBlock::new(entries, format!("shor {}", fmt_set(nodes))).expect("symmetric by construction"));
}

fn add_box(prog: &mut RelaxationProgram, i: usize) {
    prog.push_scalar(ell(&[i], &[]).unwrap(), format!("box z{i} >= 0"));
    prog.push_scalar(ell(&[], &[i]).unwrap(), format!("box z{i} <= 1"));
}

fn diag_bound(i: usize) -> LinearForm {
    let mut f = LinearForm::var(VarKey::monomial([i]));
    f.add_term(VarKey::Square(i, Vec::new()), -super::one());
    f
}

/// Shor block, box bounds and `z_ii <= z_i` for every node, with the
/// instance objective.
pub fn build_shor(g: &LoopGraph, inst: &QpInstance) -> Result<RelaxationProgram, RelaxError> {
    check_dims(g, inst)?;
    let mut prog = RelaxationProgram::new();
    add_shor_block(&mut prog, g.nodes());
    for &i in g.nodes() {
        add_box(&mut prog, i);
        prog.push_scalar(diag_bound(i), format!("diag z{i}{i} <= z{i}"));
    }
    prog.set_instance_objective(inst);
    Ok(prog)
}

/// The four McCormick inequalities for every pair of nodes.
pub fn add_mccormick(prog: &mut RelaxationProgram, g: &LoopGraph) {
    let nv: Vec<usize> = g.nodes().iter().copied().collect();
    for (a, &i) in nv.iter().enumerate() {
        for &j in &nv[a + 1..] {
            for (j1, j2) in [(vec![i, j], vec![]), (vec![i], vec![j]), (vec![j], vec![i]), (vec![], vec![i, j])] {
                prog.push_scalar(ell(&j1, &j2).unwrap(), format!("mccormick {}", fmt_set(&[i, j])));
            }
        }
    }
}

/// The four triangle inequalities for every triple of nodes.
pub fn add_triangle(prog: &mut RelaxationProgram, g: &LoopGraph) {
    let nv: Vec<usize> = g.nodes().iter().copied().collect();
    let m = |s: &[usize]| VarKey::monomial(s.iter().copied());
    let one = super::one();
    for (a, &i) in nv.iter().enumerate() {
        for (b, &j) in nv.iter().enumerate().skip(a + 1) {
            for &k in &nv[b + 1..] {
                let label = format!("triangle {}", fmt_set(&[i, j, k]));
                let mut f = LinearForm::from_int(1);
                for s in [[i], [j], [k]] {
                    f.add_term(m(&s), -one.clone());
                }
                for s in [[i, j], [i, k], [j, k]] {
                    f.add_term(m(&s), one.clone());
                }
                prog.push_scalar(f, label.clone());
                // z_u + z_vw - z_uv - z_uw >= 0 for each apex u.
                for (u, v, w) in [(i, j, k), (j, i, k), (k, i, j)] {
                    let mut f = LinearForm::var(m(&[u]));
                    f.add_term(m(&[v, w]), one.clone());
                    f.add_term(m(&[u, v]), -one.clone());
                    f.add_term(m(&[u, w]), -one.clone());
                    prog.push_scalar(f, label.clone());
                }
            }
        }
    }
}

/// `z_ii <= z_i` for every minus loop, plus box bounds on nodes whose `z_i`
/// is not yet part of the program.
pub fn add_minus_loop_bounds(prog: &mut RelaxationProgram, g: &LoopGraph) {
    for &i in g.minus_loops() {
        if !prog.registry().contains(&VarKey::monomial([i])) {
            add_box(prog, i);
        }
        prog.push_scalar(diag_bound(i), format!("minus loop z{i}{i} <= z{i}"));
    }
}

/// Shor, Shor + McCormick, or Shor + McCormick + triangle.
pub fn build_baseline(g: &LoopGraph, inst: &QpInstance, kind: Baseline) -> Result<RelaxationProgram, RelaxError> {
    let mut prog = build_shor(g, inst)?;
    if kind != Baseline::Shor {
        add_mccormick(&mut prog, g);
    }
    if kind == Baseline::ShorMcTri {
        add_triangle(&mut prog, g);
    }
    Ok(prog)
}

/// One psd2 system with `P = {v}`, `M = N(v)` per plus node, the
/// multilinear polytope over all nodes with every `{v} ∪ N(v)` completed
/// to a clique, and minus-loop bounds; optionally the Shor block on all
/// nodes.
pub fn build_deyida(g: &LoopGraph, inst: &QpInstance, with_shor: bool) -> Result<RelaxationProgram, RelaxError> {
    check_dims(g, inst)?;
    let mut prog = RelaxationProgram::new();
    let plus = g.plus_loops();
    let mut cliques = Vec::new();
    for &v in plus {
        let single: NodeSet = [v].into();
        let cfg = Psd2Config::new([v], g.neighborhood(&single))?;
        cfg.validate_relaxed(g)?;
        add_psd2(&mut prog, &cfg)?;
        cliques.push(cfg.m.iter().copied().chain([v]).collect());
    }
    add_plus_free_remainder(&mut prog, g, g.nodes(), &cliques, false)?;
    add_minus_loop_bounds(&mut prog, g);
    if with_shor {
        add_shor_block(&mut prog, g.nodes());
    }
    prog.set_instance_objective(inst);
    Ok(prog)
}
