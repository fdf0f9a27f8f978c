use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::{SdpBlock, SdpStandard};
use crate::instance::{format_rational, to_f64};
use crate::relax::RelaxationProgram;
use crate::rlt::{LinearForm, VarKey};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LowerError {
    #[error("equality {row} contradicts earlier rows: reduces to 0 = {value}")]
    Inconsistent { row: usize, value: String },
    #[error("constant block '{label}' is not PSD")]
    ConstantBlock { label: String },
}

/// A lowered program together with the map back to extended variables.
#[derive(Debug, Clone)]
pub struct Lowered {
    pub sdp: SdpStandard,
    /// Extended variable behind each `y` index.
    pub columns: Vec<VarKey>,
    /// Eliminated variables as affine forms in the surviving ones.
    pub eliminated: BTreeMap<VarKey, LinearForm>,
    /// Equality rows that reduced to `0 = 0`.
    pub redundant_rows: Vec<usize>,
    /// Blocks that became constant and were dropped after checking them.
    pub dropped_blocks: usize,
}

impl Lowered {
    /// Values of every registered variable given a solution `y`.
    pub fn recover(&self, y: &[f64]) -> BTreeMap<VarKey, f64> {
        let mut out: BTreeMap<VarKey, f64> = self.columns.iter().cloned().zip(y.iter().copied()).collect();
        for (k, form) in &self.eliminated {
            let v = form.evaluate_with(|key| Ok::<f64, ()>(out.get(key).copied().unwrap_or(0.0))).unwrap_or(0.0);
            out.insert(k.clone(), v);
        }
        out
    }
}

/// Eliminates equalities exactly, then maps the surviving variables to
/// `y` indices. Scalar blocks are merged into one diagonal block placed
/// last; larger blocks stay dense.
pub fn lower(prog: &RelaxationProgram) -> Result<Lowered, LowerError> {
    let order: BTreeMap<&VarKey, usize> = prog.registry().keys().iter().enumerate().map(|(k, v)| (v, k)).collect();
    let mut eliminated: BTreeMap<VarKey, LinearForm> = BTreeMap::new();
    let mut redundant_rows = Vec::new();

    for (row, (form, rhs)) in prog.equalities().iter().enumerate() {
        let mut r = form.clone();
        r.add_term(VarKey::one(), -rhs.clone());
        let r = reduce(&r, &eliminated);
        let vars: Vec<&VarKey> = r.variables().collect();
        if vars.is_empty() {
            let c = r.constant_term();
            if c.is_zero() {
                redundant_rows.push(row);
                continue;
            }
            return Err(LowerError::Inconsistent { row, value: format_rational(&-c) });
        }
        // Prefer a monomial or square so bag weights stay as the free
        // coordinates; among equals take the most recently registered.
        let pivot = vars
            .iter()
            .max_by_key(|k| (!matches!(k, VarKey::Weight(..)), order.get(**k).copied().unwrap_or(usize::MAX)))
            .map(|k| (*k).clone())
            .unwrap();
        let coef = r.coef(&pivot);
        let mut expr = r.clone();
        expr.substitute(&pivot, &LinearForm::zero());
        let expr = expr.scaled(&(-BigRational::from_integer(1.into()) / coef));
        for e in eliminated.values_mut() {
            e.substitute(&pivot, &expr);
        }
        eliminated.insert(pivot, expr);
    }

    let columns: Vec<VarKey> = prog.registry().keys().iter().filter(|k| !eliminated.contains_key(k)).cloned().collect();
    let col: BTreeMap<&VarKey, usize> = columns.iter().enumerate().map(|(k, v)| (v, k)).collect();
    let split = |form: &LinearForm| -> (f64, Vec<(usize, f64)>) {
        let c = to_f64(&form.constant_term());
        let terms = form.terms().iter().filter(|(k, _)| !k.is_constant()).map(|(k, v)| (col[k], to_f64(v))).collect();
        (c, terms)
    };

    let mut blocks = Vec::new();
    let mut scalars: BTreeSet<LinearForm> = BTreeSet::new();
    let mut scalar_rows = Vec::new();
    let mut dropped_blocks = 0;
    for block in prog.blocks() {
        let k = block.size();
        let entries: Vec<Vec<LinearForm>> =
            block.entries().iter().map(|row| row.iter().map(|f| reduce(f, &eliminated)).collect()).collect();
        let constant = entries.iter().flatten().all(|f| f.variables().next().is_none());
        if constant {
            let ok = if k == 1 {
                !entries[0][0].constant_term().is_negative()
            } else {
                let m = DMatrix::from_fn(k, k, |a, b| to_f64(&entries[a][b].constant_term()));
                SymmetricEigen::new(m).eigenvalues.min() >= -1e-12
            };
            if !ok {
                return Err(LowerError::ConstantBlock { label: block.label().to_string() });
            }
            dropped_blocks += 1;
            continue;
        }
        if k == 1 {
            if scalars.insert(entries[0][0].clone()) {
                scalar_rows.push(entries[0][0].clone());
            } else {
                dropped_blocks += 1;
            }
            continue;
        }
        let mut out = SdpBlock::new(k, false);
        for a in 0..k {
            for b in a..k {
                let (c, terms) = split(&entries[a][b]);
                out.add(None, a, b, -c);
                for (var, v) in terms {
                    out.add(Some(var), a, b, v);
                }
            }
        }
        blocks.push(out);
    }
    if !scalar_rows.is_empty() {
        let mut diag = SdpBlock::new(scalar_rows.len(), true);
        for (i, form) in scalar_rows.iter().enumerate() {
            let (c, terms) = split(form);
            diag.add(None, i, i, -c);
            for (var, v) in terms {
                diag.add(Some(var), i, i, v);
            }
        }
        blocks.push(diag);
    }

    let objective = reduce(prog.objective(), &eliminated);
    let (c0, terms) = split(&objective);
    let mut cost = vec![0.0; columns.len()];
    for (var, v) in terms {
        cost[var] += v;
    }
    let sdp = SdpStandard { num_vars: columns.len(), blocks, cost, offset: c0 + to_f64(prog.offset()) };
    Ok(Lowered { sdp, columns, eliminated, redundant_rows, dropped_blocks })
}

fn reduce(form: &LinearForm, eliminated: &BTreeMap<VarKey, LinearForm>) -> LinearForm {
    let mut out = form.clone();
    for key in form.variables() {
        if let Some(e) = eliminated.get(key) {
            out.substitute(key, e);
        }
    }
    out
}
