use serde::Serialize;

use super::{fmt_set, LmiBlock, RelaxError, RelaxationProgram};
use crate::graph::{LoopGraph, NodeSet};
use crate::rlt::{ell, rho, subsets};

/// Plus set `P` and minus set `M` of a psd2 system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Psd2Config {
    pub p: NodeSet,
    pub m: NodeSet,
}

impl Psd2Config {
    pub fn new(p: impl IntoIterator<Item = usize>, m: impl IntoIterator<Item = usize>) -> Result<Self, RelaxError> {
        let cfg = Self { p: p.into_iter().collect(), m: m.into_iter().collect() };
        if let Some(v) = cfg.p.intersection(&cfg.m).next() {
            return Err(RelaxError::InvalidConfig(format!("node {v} in both P and M")));
        }
        Ok(cfg)
    }

    /// Full check: nodes exist, `M` carries no plus loops, and every `M`
    /// node has a neighbor in `P`.
    pub fn validate(&self, g: &LoopGraph) -> Result<(), RelaxError> {
        self.validate_relaxed(g)?;
        for &k in &self.m {
            if g.plus_loops().contains(&k) {
                return Err(RelaxError::InvalidConfig(format!("node {k} in M has a plus loop")));
            }
            if g.neighbors(k).is_disjoint(&self.p) {
                return Err(RelaxError::InvalidConfig(format!("node {k} in M has no neighbor in P")));
            }
        }
        Ok(())
    }

    /// Only checks that the nodes exist. Used when `M` is a plain
    /// neighborhood that may include plus nodes.
    pub fn validate_relaxed(&self, g: &LoopGraph) -> Result<(), RelaxError> {
        if let Some(v) = self.p.intersection(&self.m).next() {
            return Err(RelaxError::InvalidConfig(format!("node {v} in both P and M")));
        }
        if let Some(&v) = self.p.iter().chain(&self.m).find(|v| !g.nodes().contains(v)) {
            return Err(RelaxError::InvalidConfig(format!("node {v} not in graph")));
        }
        Ok(())
    }

    fn universe(&self) -> NodeSet {
        self.p.union(&self.m).copied().collect()
    }

    /// Number of size-1 (pure RLT) blocks, `2^{|M|+|P|}`.
    pub fn expected_scalar_blocks(&self) -> u64 {
        1u64 << (self.p.len() + self.m.len())
    }

    /// Number of blocks with `|R| >= 1`, `2^{|M|} (3^{|P|} - 2^{|P|})`.
    pub fn expected_lmis(&self) -> u64 {
        (1u64 << self.m.len()) * (3u64.pow(self.p.len() as u32) - (1u64 << self.p.len()))
    }

    /// `(|P|/2 + 1) 2^{|M|+|P|}`: all monomials over `M ∪ P` including the
    /// constant, plus `z_ii^J` for `i ∈ P`, `J ⊆ (M ∪ P) \ {i}`.
    pub fn expected_variables(&self) -> u64 {
        let base = 1u64 << (self.p.len() + self.m.len());
        base + self.p.len() as u64 * base / 2
    }
}

/// The block indexed by `R ⊆ P` and `J ⊆ M_R` where `M_R = (M ∪ P) \ R`.
pub fn psd2_block(cfg: &Psd2Config, r: &NodeSet, j: &NodeSet) -> Result<LmiBlock, RelaxError> {
    if !r.is_subset(&cfg.p) {
        return Err(RelaxError::InvalidConfig(format!("R={} not inside P", fmt_set(r))));
    }
    let m_r: NodeSet = cfg.universe().difference(r).copied().collect();
    if !j.is_subset(&m_r) {
        return Err(RelaxError::InvalidConfig(format!("J={} not inside M_R", fmt_set(j))));
    }
    let rest: Vec<usize> = m_r.difference(j).copied().collect();
    let jv: Vec<usize> = j.iter().copied().collect();
    let with = |extra: &[usize]| -> Vec<usize> { jv.iter().chain(extra).copied().collect() };
    let rv: Vec<usize> = r.iter().copied().collect();
    let k = rv.len() + 1;
    let mut entries = vec![vec![crate::rlt::LinearForm::zero(); k]; k];
    entries[0][0] = ell(&jv, &rest)?;
    for (a, &ia) in rv.iter().enumerate() {
        let f = ell(&with(&[ia]), &rest)?;
        entries[0][a + 1] = f.clone();
        entries[a + 1][0] = f;
        entries[a + 1][a + 1] = rho(ia, &jv, &rest)?;
        for (b, &ib) in rv.iter().enumerate().skip(a + 1) {
            let f = ell(&with(&[ia, ib]), &rest)?;
            entries[a + 1][b + 1] = f.clone();
            entries[b + 1][a + 1] = f;
        }
    }
    let label = format!("psd2 P={} R={} J={}", fmt_set(&cfg.p), fmt_set(r), fmt_set(j));
    LmiBlock::new(entries, label)
}

/// Appends every psd2 block of `cfg` to `prog` without validating against a
/// graph. Order: `R` then `J`, each in binary-counter subset order.
pub fn add_psd2(prog: &mut RelaxationProgram, cfg: &Psd2Config) -> Result<(), RelaxError> {
    let pv: Vec<usize> = cfg.p.iter().copied().collect();
    let universe = cfg.universe();
    for r in subsets(&pv) {
        let r: NodeSet = r.into_iter().collect();
        let m_r: Vec<usize> = universe.difference(&r).copied().collect();
        for j in subsets(&m_r) {
            prog.push_block(psd2_block(cfg, &r, &j.into_iter().collect())?);
        }
    }
    Ok(())
}

/// psd2 system as a standalone program (zero objective).
pub fn build_psd2(g: &LoopGraph, cfg: &Psd2Config) -> Result<RelaxationProgram, RelaxError> {
    cfg.validate(g)?;
    let mut prog = RelaxationProgram::new();
    add_psd2(&mut prog, cfg)?;
    Ok(prog)
}

/// Which dominance relation links two configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceKind {
    /// Same `M`, `P ⊆ P'`.
    PlusGrowth,
    /// Same `P`, `M' = M ∪ {k}`.
    MinusSplit(usize),
}

fn relation(cfg: &Psd2Config, cfg2: &Psd2Config) -> Result<DominanceKind, RelaxError> {
    if cfg.p == cfg2.p && cfg2.m.is_superset(&cfg.m) && cfg2.m.len() == cfg.m.len() + 1 {
        let k = *cfg2.m.difference(&cfg.m).next().unwrap();
        return Ok(DominanceKind::MinusSplit(k));
    }
    if cfg.m == cfg2.m && cfg.p.is_subset(&cfg2.p) {
        return Ok(DominanceKind::PlusGrowth);
    }
    Err(RelaxError::Unrelated)
}

/// Checks that every block of `cfg` is implied by blocks of `cfg2`: either
/// as the sum of the `J` and `J ∪ {k}` blocks when `M' = M ∪ {k}`, or as a
/// principal submatrix when `P ⊆ P'`. Comparison is exact on forms.
pub fn dominance_split_check(cfg: &Psd2Config, cfg2: &Psd2Config) -> Result<bool, RelaxError> {
    let kind = relation(cfg, cfg2)?;
    let pv: Vec<usize> = cfg.p.iter().copied().collect();
    let universe = cfg.universe();
    for r in subsets(&pv) {
        let r: NodeSet = r.into_iter().collect();
        let m_r: Vec<usize> = universe.difference(&r).copied().collect();
        for j in subsets(&m_r) {
            let j: NodeSet = j.into_iter().collect();
            let block = psd2_block(cfg, &r, &j)?;
            let ok = match kind {
                DominanceKind::MinusSplit(k) => {
                    let mut jk = j.clone();
                    jk.insert(k);
                    let lo = psd2_block(cfg2, &r, &j)?;
                    let hi = psd2_block(cfg2, &r, &jk)?;
                    let n = block.size();
                    (0..n).all(|a| (0..n).all(|b| &(lo.entry(a, b) + hi.entry(a, b)) == block.entry(a, b)))
                }
                DominanceKind::PlusGrowth => {
                    let big_r: NodeSet = r.union(&cfg2.p.difference(&cfg.p).copied().collect()).copied().collect();
                    let big = psd2_block(cfg2, &big_r, &j)?;
                    let rows: Vec<usize> = std::iter::once(0)
                        .chain(big_r.iter().enumerate().filter(|(_, v)| r.contains(v)).map(|(a, _)| a + 1))
                        .collect();
                    big.principal(&rows) == block.entries()
                }
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
