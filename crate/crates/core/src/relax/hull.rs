use std::collections::BTreeSet;

use super::baseline::{add_minus_loop_bounds, check_dims};
use super::{add_multilinear_jtree, add_psd2, Psd2Config, RelaxError, RelaxationProgram};
use crate::graph::{LoopGraph, NodeSet};
use crate::instance::QpInstance;
use crate::rlt::subsets;

/// Largest `|V_c| + |N(V_c)|` accepted by default.
pub const DEFAULT_COMPONENT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HullOptions {
    pub component_limit: usize,
    /// Accept plus components with three or more nodes. The result is then
    /// a relaxation with no exactness guarantee.
    pub allow_triplet: bool,
}

impl Default for HullOptions {
    fn default() -> Self {
        Self { component_limit: DEFAULT_COMPONENT_LIMIT, allow_triplet: false }
    }
}

/// Convex hull formulation for graphs without a connected plus triplet.
pub fn build_exact_hull(g: &LoopGraph, inst: &QpInstance) -> Result<RelaxationProgram, RelaxError> {
    build_exact_hull_with(g, inst, HullOptions::default())
}

/// Same assembly applied to every plus component regardless of size.
pub fn build_component_psd2(g: &LoopGraph, inst: &QpInstance) -> Result<RelaxationProgram, RelaxError> {
    build_exact_hull_with(g, inst, HullOptions { allow_triplet: true, ..HullOptions::default() })
}

/// One psd2 system per plus component `V_c` with `M = N(V_c)`, a junction
/// tree over the remaining nodes (each `N(V_c)` made a clique carrying all
/// of its monomials), and minus-loop bounds.
pub fn build_exact_hull_with(
    g: &LoopGraph,
    inst: &QpInstance,
    opts: HullOptions,
) -> Result<RelaxationProgram, RelaxError> {
    check_dims(g, inst)?;
    let comps = g.plus_components();
    if !opts.allow_triplet {
        if let Some(c) = comps.iter().find(|c| c.len() >= 3) {
            return Err(RelaxError::Triplet(c.clone()));
        }
    }
    let mut prog = RelaxationProgram::new();
    let mut cliques = Vec::with_capacity(comps.len());
    for comp in &comps {
        let nbhd = g.neighborhood(comp);
        let size = comp.len() + nbhd.len();
        if size > opts.component_limit {
            return Err(RelaxError::TooLarge { component: comp.clone(), size, limit: opts.component_limit });
        }
        let cfg = Psd2Config { p: comp.clone(), m: nbhd };
        cfg.validate(g)?;
        add_psd2(&mut prog, &cfg)?;
        cliques.push(cfg.m);
    }
    let covered: NodeSet = comps.iter().flatten().copied().collect();
    let rest: NodeSet = g.nodes().difference(&covered).copied().collect();
    add_plus_free_remainder(&mut prog, g, &rest, &cliques, true)?;
    add_minus_loop_bounds(&mut prog, g);
    prog.set_instance_objective(inst);
    Ok(prog)
}

/// Junction-tree polytope on the graph induced by `rest`, with each clique
/// (a subset of `rest`) completed and given its full monomial family.
/// With `skip_covered`, connected pieces lying inside a single clique are
/// skipped: an exact psd2 system over that clique already contains their
/// polytope.
pub(crate) fn add_plus_free_remainder(
    prog: &mut RelaxationProgram,
    g: &LoopGraph,
    rest: &NodeSet,
    cliques: &[NodeSet],
    skip_covered: bool,
) -> Result<(), RelaxError> {
    let mut edges: BTreeSet<(usize, usize)> =
        g.edges().iter().filter(|(a, b)| rest.contains(a) && rest.contains(b)).copied().collect();
    for clique in cliques {
        let cv: Vec<usize> = clique.iter().copied().collect();
        for (k, &a) in cv.iter().enumerate() {
            for &b in &cv[k + 1..] {
                edges.insert((a, b));
            }
        }
    }
    let g0 = LoopGraph::from_parts(rest.clone(), edges.iter().copied(), [], [])?;
    let keep: NodeSet = g0
        .induced_components(rest)
        .into_iter()
        .filter(|piece| !skip_covered || !cliques.iter().any(|c| piece.is_subset(c)))
        .flatten()
        .collect();
    if keep.is_empty() {
        return Ok(());
    }

    let mut monomials: BTreeSet<NodeSet> = keep.iter().map(|&v| [v].into()).collect();
    for &(a, b) in g.edges() {
        if keep.contains(&a) && keep.contains(&b) {
            monomials.insert([a, b].into());
        }
    }
    for clique in cliques.iter().filter(|c| c.is_subset(&keep)) {
        let cv: Vec<usize> = clique.iter().copied().collect();
        monomials.extend(subsets(&cv).into_iter().filter(|s| !s.is_empty()).map(|s| s.into_iter().collect()));
    }
    let kept_edges = edges.iter().filter(|(a, b)| keep.contains(a) && keep.contains(b)).copied();
    let gk = LoopGraph::from_parts(keep.clone(), kept_edges, [], [])?;
    let td = gk.min_fill_tree_decomposition();
    let monomials: Vec<NodeSet> = monomials.into_iter().collect();
    add_multilinear_jtree(prog, &monomials, &td)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::EXAMPLE_TWO;

    #[test]
    fn example_two_structure() {
        let inst = QpInstance::parse(EXAMPLE_TWO).unwrap();
        let g = inst.build_graph();
        let prog = build_exact_hull(&g, &inst).unwrap();
        let h = prog.block_histogram();
        assert_eq!(h.get(&3), Some(&2));
        assert_eq!(h.get(&2), Some(&8));
        assert_eq!(h.get(&1), Some(&9));
        assert!(prog.equalities().is_empty());
    }

    #[test]
    fn triplet_refused() {
        let g = LoopGraph::new(3, [(1, 2), (2, 3)], [1, 2, 3], []).unwrap();
        let inst = QpInstance::parse("n 3\nd 1 1\nd 2 1\nd 3 1\nq 1 2 1\nq 2 3 1\n").unwrap();
        let err = build_exact_hull(&g, &inst).unwrap_err();
        assert_eq!(err.to_string(), "connected-plus-triplet {1,2,3}");
        assert!(build_component_psd2(&g, &inst).is_ok());
    }

    #[test]
    fn component_limit() {
        let inst = QpInstance::parse(EXAMPLE_TWO).unwrap();
        let g = inst.build_graph();
        let opts = HullOptions { component_limit: 2, allow_triplet: false };
        assert!(matches!(build_exact_hull_with(&g, &inst, opts), Err(RelaxError::TooLarge { size: 3, .. })));
    }

    #[test]
    fn plus_free_instance_uses_jtree_only() {
        let inst = QpInstance::parse("n 3\nq 1 2 1\nq 2 3 -1\nc 1 -1\n").unwrap();
        let g = inst.build_graph();
        let prog = build_exact_hull(&g, &inst).unwrap();
        assert!(prog.blocks().iter().all(|b| b.size() == 1));
        assert!(!prog.equalities().is_empty());
        assert!(prog.check_point(&[0.2, 0.4, 0.6]).unwrap().max_equality_residual < 1e-12);
    }
}
