use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{one, RelaxError, RelaxationProgram};
use crate::graph::{NodeSet, TreeDecomp};
use crate::rlt::{LinearForm, VarKey};

const MAX_BAG: usize = 20;

/// Size of a junction-tree fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JtreeStats {
    pub weights: usize,
    pub monomials: usize,
    pub bags: usize,
    pub width: usize,
}

/// Appends the bag-assignment formulation of the multilinear polytope:
/// one nonnegative weight per 0/1 assignment of each bag, weights summing to
/// one, equal marginals on every separator, and each monomial tied to the
/// weights of the first bag covering it.
pub fn add_multilinear_jtree(
    prog: &mut RelaxationProgram,
    monomials: &[NodeSet],
    td: &TreeDecomp,
) -> Result<JtreeStats, RelaxError> {
    let mut stats = JtreeStats { bags: td.bags.len(), width: td.width(), ..Default::default() };
    let mut ids = Vec::with_capacity(td.bags.len());
    for bag in &td.bags {
        if bag.len() > MAX_BAG {
            return Err(RelaxError::TooLarge { component: bag.clone(), size: bag.len(), limit: MAX_BAG });
        }
        let nodes: Vec<usize> = bag.iter().copied().collect();
        let id = prog.new_bag(nodes);
        let mut total = LinearForm::zero();
        for mask in 0..1u32 << bag.len() {
            let w = VarKey::Weight(id, mask);
            prog.push_scalar(LinearForm::var(w.clone()), format!("jtree bag {id} weight {mask:b}"));
            total.add_term(w, one());
        }
        stats.weights += 1 << bag.len();
        prog.push_equality(total, BigRational::one());
        ids.push(id);
    }

    for &(s, t) in &td.tree_edges {
        let sep: Vec<usize> = td.bags[s].intersection(&td.bags[t]).copied().collect();
        for assign in 0..1u32 << sep.len() {
            let mut form = marginal(ids[s], &td.bags[s], &sep, assign);
            form -= &marginal(ids[t], &td.bags[t], &sep, assign);
            prog.push_equality(form, BigRational::zero());
        }
    }

    for mono in monomials.iter().filter(|m| !m.is_empty()) {
        let t = td.bags.iter().position(|b| mono.is_subset(b)).ok_or_else(|| RelaxError::Uncovered(mono.clone()))?;
        let bits = bag_mask(&td.bags[t], mono);
        let mut form = LinearForm::var(VarKey::monomial(mono.iter().copied()));
        for mask in (0..1u32 << td.bags[t].len()).filter(|m| m & bits == bits) {
            form.add_term(VarKey::Weight(ids[t], mask), -one());
        }
        prog.push_equality(form, BigRational::zero());
        stats.monomials += 1;
    }
    Ok(stats)
}

/// Standalone fragment with a zero objective.
pub fn build_multilinear_jtree(monomials: &[NodeSet], td: &TreeDecomp) -> Result<RelaxationProgram, RelaxError> {
    let mut prog = RelaxationProgram::new();
    add_multilinear_jtree(&mut prog, monomials, td)?;
    Ok(prog)
}

fn bag_mask(bag: &NodeSet, nodes: &NodeSet) -> u32 {
    bag.iter().enumerate().filter(|(_, v)| nodes.contains(v)).fold(0, |acc, (k, _)| acc | 1 << k)
}

/// Sum of the bag's weights whose restriction to `sep` equals `assign`
/// (bit `k` of `assign` is the value of `sep[k]`).
fn marginal(id: u32, bag: &NodeSet, sep: &[usize], assign: u32) -> LinearForm {
    let pos: Vec<usize> = sep.iter().map(|v| bag.iter().position(|w| w == v).unwrap()).collect();
    let mut form = LinearForm::zero();
    for mask in 0..1u32 << bag.len() {
        if pos.iter().enumerate().all(|(k, &p)| (mask >> p & 1) == (assign >> k & 1)) {
            form.add_term(VarKey::Weight(id, mask), one());
        }
    }
    form
}
