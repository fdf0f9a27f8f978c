//! Block SDPs in LMI form: minimize `c^T y + offset` subject to
//! `sum_k y_k F_k - F_0 ⪰ 0` in every block.

mod lower;
mod sdpa;
mod solver;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

pub use lower::{lower, LowerError, Lowered};
pub use sdpa::{export_sdpa, fmt_g17, import_sdpa, to_sdpa_string, SdpaError};
pub use solver::{solve, solve_with, SolveOptions, SolveResult, SolveStatus};

pub const MAX_BLOCK_SIZE: usize = 64;
pub const MAX_VARS: usize = 20_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("tolerance {0} outside (0, 1e-3]")]
    BadTolerance(f64),
    #[error("block of size {size} exceeds the limit {limit}")]
    BlockTooLarge { size: usize, limit: usize },
    #[error("{m} variables exceed the limit {limit}")]
    TooManyVars { m: usize, limit: usize },
    #[error("malformed problem: {0}")]
    Malformed(String),
}

/// Symmetric sparse matrix stored as its upper triangle (`i <= j`,
/// zero-based).
pub type SymSparse = BTreeMap<(usize, usize), f64>;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SdpBlock {
    pub size: usize,
    /// Only diagonal entries are allowed; exported with a negative size.
    pub diagonal: bool,
    /// `F_0`.
    pub constant: SymSparse,
    /// `F_k` for every variable `k` that touches this block.
    pub coeffs: BTreeMap<usize, SymSparse>,
}

impl SdpBlock {
    pub fn new(size: usize, diagonal: bool) -> Self {
        Self { size, diagonal, ..Default::default() }
    }

    /// Adds `v` at `(i, j)` of `F_k` (`k = None` for `F_0`), storing the
    /// upper triangle.
    pub fn add(&mut self, k: Option<usize>, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let target = match k {
            None => &mut self.constant,
            Some(k) => self.coeffs.entry(k).or_default(),
        };
        *target.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
    }

    /// `sum_k y_k F_k - F_0` as a dense matrix.
    pub fn slack(&self, y: &[f64]) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.size, self.size);
        let mut put = |mat: &SymSparse, scale: f64| {
            for (&(i, j), &v) in mat {
                s[(i, j)] += scale * v;
                if i != j {
                    s[(j, i)] += scale * v;
                }
            }
        };
        put(&self.constant, -1.0);
        for (&k, mat) in &self.coeffs {
            put(mat, y[k]);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SdpStandard {
    pub num_vars: usize,
    pub blocks: Vec<SdpBlock>,
    pub cost: Vec<f64>,
    pub offset: f64,
}

impl SdpStandard {
    pub fn validate(&self) -> Result<(), SdpError> {
        if self.cost.len() != self.num_vars {
            return Err(SdpError::Malformed(format!("{} costs for {} variables", self.cost.len(), self.num_vars)));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            if block.size == 0 {
                return Err(SdpError::Malformed(format!("block {} is empty", b + 1)));
            }
            let mats = std::iter::once(&block.constant).chain(block.coeffs.values());
            for mat in mats {
                for &(i, j) in mat.keys() {
                    if i > j || j >= block.size || (block.diagonal && i != j) {
                        return Err(SdpError::Malformed(format!("bad entry ({}, {}) in block {}", i + 1, j + 1, b + 1)));
                    }
                }
            }
            if let Some(&k) = block.coeffs.keys().find(|&&k| k >= self.num_vars) {
                return Err(SdpError::Malformed(format!("variable {} out of range in block {}", k + 1, b + 1)));
            }
        }
        Ok(())
    }

    /// Smallest eigenvalue of `sum_k y_k F_k - F_0` per block, recomputed
    /// from the data.
    pub fn block_min_eigenvalues(&self, y: &[f64]) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| {
                let s = b.slack(y);
                if b.diagonal {
                    s.diagonal().min()
                } else {
                    SymmetricEigen::new(s).eigenvalues.min()
                }
            })
            .collect()
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        self.cost.iter().zip(y).map(|(c, v)| c * v).sum::<f64>() + self.offset
    }
}

/// Independent check of a claimed optimum: rebuilds every slack block from
/// `y` and the data, then tests the eigenvalue floor and the duality gap.
pub fn verify_certificate(sdp: &SdpStandard, res: &SolveResult, tol: f64) -> Result<(), String> {
    if res.status != SolveStatus::Optimal {
        return Err(format!("status is {:?}", res.status));
    }
    if res.y.len() != sdp.num_vars {
        return Err("solution length mismatch".into());
    }
    for (b, e) in sdp.block_min_eigenvalues(&res.y).into_iter().enumerate() {
        if e < -10.0 * tol {
            return Err(format!("block {} has eigenvalue {e:e}", b + 1));
        }
    }
    let pobj = sdp.objective(&res.y);
    if (pobj - res.primal_objective).abs() > 1e-9 * (1.0 + pobj.abs()) {
        return Err(format!("reported objective {} differs from recomputed {pobj}", res.primal_objective));
    }
    let gap = (res.primal_objective - res.dual_objective).abs() / (1.0 + res.primal_objective.abs() + res.dual_objective.abs());
    if gap > tol {
        return Err(format!("relative gap {gap:e} above {tol:e}"));
    }
    Ok(())
}
