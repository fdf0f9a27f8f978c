//! Relaxation programs over extended variables and the builders that fill
//! them: Shor-type baselines, psd2 systems, junction-tree polytopes and the
//! exact hull assembly.

mod baseline;
mod hull;
mod jtree;
mod psd2;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{GraphError, NodeSet};
use crate::instance::{format_rational, to_f64, QpInstance};
use crate::rlt::{LinearForm, Registry, RltError, VarKey};

pub use baseline::{
    add_mccormick, add_minus_loop_bounds, add_shor_block, add_triangle, build_baseline, build_deyida,
    build_shor, Baseline,
};
pub use hull::{build_component_psd2, build_exact_hull, build_exact_hull_with, HullOptions, DEFAULT_COMPONENT_LIMIT};
pub use jtree::{add_multilinear_jtree, build_multilinear_jtree, JtreeStats};
pub use psd2::{add_psd2, build_psd2, dominance_split_check, psd2_block, DominanceKind, Psd2Config};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelaxError {
    #[error("invalid psd2 configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rlt(#[from] RltError),
    #[error("connected-plus-triplet {}", fmt_set(.0))]
    Triplet(NodeSet),
    #[error("component {} with neighborhood has {size} nodes, limit {limit}", fmt_set(.component))]
    TooLarge { component: NodeSet, size: usize, limit: usize },
    #[error("monomial {} is not covered by any bag", fmt_set(.0))]
    Uncovered(NodeSet),
    #[error("configurations are not related by adding one minus node or growing the plus set")]
    Unrelated,
    #[error("block '{0}' is not symmetric")]
    Asymmetric(String),
    #[error("instance has {inst} variables but graph has {graph} nodes")]
    DimensionMismatch { inst: usize, graph: usize },
}

/// `{1,2,3}` rendering used in labels and messages.
pub fn fmt_set<'a>(set: impl IntoIterator<Item = &'a usize>) -> String {
    let items: Vec<String> = set.into_iter().map(ToString::to_string).collect();
    format!("{{{}}}", items.join(","))
}

/// Symmetric matrix of linear forms constrained to be PSD. Size 1 is a
/// scalar inequality `form >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LmiBlock {
    entries: Vec<Vec<LinearForm>>,
    label: String,
}

impl LmiBlock {
    pub fn new(entries: Vec<Vec<LinearForm>>, label: impl Into<String>) -> Result<Self, RelaxError> {
        let label = label.into();
        let k = entries.len();
        if k == 0 || entries.iter().any(|row| row.len() != k) {
            return Err(RelaxError::Asymmetric(label));
        }
        for a in 0..k {
            for b in a + 1..k {
                if entries[a][b] != entries[b][a] {
                    return Err(RelaxError::Asymmetric(label));
                }
            }
        }
        Ok(Self { entries, label })
    }

    pub fn scalar(form: LinearForm, label: impl Into<String>) -> Self {
        Self { entries: vec![vec![form]], label: label.into() }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, a: usize, b: usize) -> &LinearForm {
        &self.entries[a][b]
    }

    pub fn entries(&self) -> &[Vec<LinearForm>] {
        &self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Principal submatrix on the given row indices.
    pub fn principal(&self, rows: &[usize]) -> Vec<Vec<LinearForm>> {
        rows.iter().map(|&a| rows.iter().map(|&b| self.entries[a][b].clone()).collect()).collect()
    }

    fn forms(&self) -> impl Iterator<Item = &LinearForm> {
        self.entries.iter().enumerate().flat_map(|(a, row)| row[a..].iter())
    }
}

/// An SDP over extended variables: minimize `objective + offset` subject to
/// every block being PSD and every equality holding.
#[derive(Debug, Clone, Default)]
pub struct RelaxationProgram {
    registry: Registry,
    blocks: Vec<LmiBlock>,
    scalar_index: BTreeSet<LinearForm>,
    equalities: Vec<(LinearForm, BigRational)>,
    objective: LinearForm,
    offset: BigRational,
    bags: Vec<Vec<usize>>,
}

impl RelaxationProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    pub fn equalities(&self) -> &[(LinearForm, BigRational)] {
        &self.equalities
    }

    pub fn objective(&self) -> &LinearForm {
        &self.objective
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    /// Node lists of junction-tree bags, indexed by the bag id stored in
    /// `VarKey::Weight`.
    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    /// Appends a block. Scalar blocks identical to an existing one are
    /// skipped; returns whether the block was added.
    pub fn push_block(&mut self, block: LmiBlock) -> bool {
        if block.size() == 1 && !self.scalar_index.insert(block.entries[0][0].clone()) {
            return false;
        }
        for f in block.forms() {
            self.registry.intern_form(f);
        }
        self.blocks.push(block);
        true
    }

    pub fn push_scalar(&mut self, form: LinearForm, label: impl Into<String>) -> bool {
        self.push_block(LmiBlock::scalar(form, label))
    }

    /// Adds `form = rhs`; a constant term in `form` is moved to the right.
    pub fn push_equality(&mut self, form: LinearForm, rhs: BigRational) {
        let c = form.constant_term();
        let mut lhs = form;
        lhs.substitute(&VarKey::one(), &LinearForm::zero());
        self.registry.intern_form(&lhs);
        self.equalities.push((lhs, rhs - c));
    }

    /// Sets the objective; its constant term becomes the offset.
    pub fn set_objective(&mut self, form: LinearForm) {
        self.offset = form.constant_term();
        let mut obj = form;
        obj.substitute(&VarKey::one(), &LinearForm::zero());
        self.registry.intern_form(&obj);
        self.objective = obj;
    }

    /// Maps `d_i` to `z_ii`, `a_ij` to `z_ij` and `c_i` to `z_i`.
    pub fn set_instance_objective(&mut self, inst: &QpInstance) {
        self.set_objective(objective_form(inst));
    }

    pub(crate) fn new_bag(&mut self, nodes: Vec<usize>) -> u32 {
        self.bags.push(nodes);
        (self.bags.len() - 1) as u32
    }

    /// Value of `key` at the lift of a box point. Bag weights ground to the
    /// product of `x_v` or `1 - x_v` over the bag, which is the distribution
    /// of independent coin flips with biases `x`.
    pub fn ground(&self, key: &VarKey, x: &[f64]) -> Result<f64, RltError> {
        match key {
            VarKey::Weight(b, mask) => {
                let nodes = self.bags.get(*b as usize).ok_or_else(|| RltError::Ungroundable(key.to_string()))?;
                let mut w = 1.0;
                for (k, &v) in nodes.iter().enumerate() {
                    let xv = *x.get(v.wrapping_sub(1)).ok_or(RltError::OutOfRange(v))?;
                    w *= if mask >> k & 1 == 1 { xv } else { 1.0 - xv };
                }
                Ok(w)
            }
            _ => key.ground(x),
        }
    }

    /// Smallest block eigenvalue and largest equality residual at the lift
    /// of `x`.
    pub fn check_point(&self, x: &[f64]) -> Result<PointCheck, RltError> {
        let mut min_eig = f64::INFINITY;
        for block in &self.blocks {
            let k = block.size();
            let mut m = DMatrix::zeros(k, k);
            for a in 0..k {
                for b in a..k {
                    let v = block.entries[a][b].evaluate_with(|key| self.ground(key, x))?;
                    m[(a, b)] = v;
                    m[(b, a)] = v;
                }
            }
            let e = if k == 1 { m[(0, 0)] } else { SymmetricEigen::new(m).eigenvalues.min() };
            min_eig = min_eig.min(e);
        }
        let mut max_residual: f64 = 0.0;
        for (form, rhs) in &self.equalities {
            let v = form.evaluate_with(|key| self.ground(key, x))?;
            max_residual = max_residual.max((v - to_f64(rhs)).abs());
        }
        Ok(PointCheck { min_eigenvalue: min_eig, max_equality_residual: max_residual })
    }

    /// Counts of blocks keyed by size.
    pub fn block_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for b in &self.blocks {
            *h.entry(b.size()).or_insert(0) += 1;
        }
        h
    }

    /// Human-readable summary such as `1×(3×3), 4×(2×2), 4 scalar`.
    pub fn size_summary(&self) -> String {
        let h = self.block_histogram();
        let mut parts: Vec<String> =
            h.iter().rev().filter(|(&k, _)| k > 1).map(|(k, c)| format!("{c}×({k}×{k})")).collect();
        if let Some(c) = h.get(&1) {
            parts.push(format!("{c} scalar"));
        }
        if parts.is_empty() {
            "no blocks".into()
        } else {
            parts.join(", ")
        }
    }
}

/// Result of [`RelaxationProgram::check_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointCheck {
    pub min_eigenvalue: f64,
    pub max_equality_residual: f64,
}

/// Objective of the lifted problem as a linear form.
pub fn objective_form(inst: &QpInstance) -> LinearForm {
    let mut f = LinearForm::zero();
    for (&i, d) in inst.diag() {
        f.add_term(VarKey::Square(i, Vec::new()), d.clone());
    }
    for (&(i, j), a) in inst.offdiag() {
        f.add_term(VarKey::monomial([i, j]), a.clone());
    }
    for (&i, c) in inst.linear() {
        f.add_term(VarKey::monomial([i]), c.clone());
    }
    f
}

impl fmt::Display for RelaxationProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "minimize {}", self.objective)?;
        if !self.offset.is_zero() {
            writeln!(f, "offset {}", format_rational(&self.offset))?;
        }
        writeln!(f, "variables {}", self.registry.len())?;
        for block in &self.blocks {
            let k = block.size();
            if k == 1 {
                writeln!(f, "[{}] {} >= 0", block.label, block.entries[0][0])?;
                continue;
            }
            writeln!(f, "[{}] {k}x{k} psd", block.label)?;
            for a in 0..k {
                for b in a..k {
                    writeln!(f, "  ({a},{b}) {}", block.entries[a][b])?;
                }
            }
        }
        for (form, rhs) in &self.equalities {
            writeln!(f, "{form} = {}", format_rational(rhs))?;
        }
        Ok(())
    }
}

pub(crate) fn one() -> BigRational {
    BigRational::one()
}
