//! Global minimization of small box-constrained QPs by face enumeration.
//!
//! Every face of the box is visited: fixed coordinates sit at 0 or 1 and
//! the free ones solve the stationarity system of the restricted
//! objective. The global minimizer is stationary on the face whose relative
//! interior contains it, so the best feasible candidate is optimal.

use std::cmp::Ordering;
use std::thread;

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::instance::{to_f64, QpInstance};

/// Largest dimension accepted by [`global_min_boxqp`].
pub const MAX_ORACLE_N: usize = 14;
/// Up to this dimension the enumeration runs in exact arithmetic.
pub const EXACT_ORACLE_N: usize = 6;
/// Largest dimension accepted by [`grid_refine_check`].
pub const MAX_GRID_N: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("dimension {n} exceeds the oracle limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("grid resolution must be positive")]
    ZeroResolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceTag {
    Lower,
    Upper,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalSolution {
    pub value: f64,
    /// Exact optimum, present when the enumeration ran in rational mode.
    #[serde(skip)]
    pub exact_value: Option<BigRational>,
    pub argmin: Vec<f64>,
    #[serde(skip)]
    pub exact_argmin: Option<Vec<BigRational>>,
    pub face: Vec<FaceTag>,
    pub candidates_examined: usize,
}

/// Exact global minimum over `[0,1]^n`, rational for `n <= 6`.
pub fn global_min_boxqp(inst: &QpInstance) -> Result<GlobalSolution, OracleError> {
    let n = inst.n();
    if n > MAX_ORACLE_N {
        return Err(OracleError::TooLarge { n, limit: MAX_ORACLE_N });
    }
    if n <= EXACT_ORACLE_N {
        Ok(exact_search(inst))
    } else {
        Ok(float_search(inst))
    }
}

fn faces(n: usize) -> usize {
    3usize.pow(n as u32)
}

fn face_tags(n: usize, mut code: usize) -> Vec<FaceTag> {
    let mut tags = Vec::with_capacity(n);
    for _ in 0..n {
        tags.push(match code % 3 {
            0 => FaceTag::Lower,
            1 => FaceTag::Upper,
            _ => FaceTag::Free,
        });
        code /= 3;
    }
    tags
}

struct ExactBest {
    value: BigRational,
    x: Vec<BigRational>,
    face: Vec<FaceTag>,
}

fn exact_search(inst: &QpInstance) -> GlobalSolution {
    let n = inst.n();
    let h = inst.hessian();
    let c = inst.linear_dense();
    let mut best: Option<ExactBest> = None;
    let mut examined = 0;
    for code in 0..faces(n) {
        let tags = face_tags(n, code);
        let Some(x) = exact_face_point(inst, &h, &c, &tags) else {
            continue;
        };
        examined += 1;
        let value = inst.objective_exact(&x).expect("dimension matches");
        let better = match &best {
            None => true,
            Some(b) => match value.cmp(&b.value) {
                Ordering::Less => true,
                Ordering::Equal => x < b.x,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some(ExactBest { value, x, face: tags });
        }
    }
    let b = best.expect("the all-lower vertex is always a candidate");
    GlobalSolution {
        value: to_f64(&b.value),
        argmin: b.x.iter().map(to_f64).collect(),
        exact_value: Some(b.value),
        exact_argmin: Some(b.x),
        face: b.face,
        candidates_examined: examined,
    }
}

/// Stationary point of the objective restricted to a face, if one exists
/// in the closed box.
fn exact_face_point(
    inst: &QpInstance,
    h: &[Vec<BigRational>],
    c: &[BigRational],
    tags: &[FaceTag],
) -> Option<Vec<BigRational>> {
    let n = tags.len();
    let mut x: Vec<BigRational> = tags
        .iter()
        .map(|t| if *t == FaceTag::Upper { BigRational::one() } else { BigRational::zero() })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&i| tags[i] == FaceTag::Free).collect();
    if free.is_empty() {
        return Some(x);
    }
    // H_FF x_F = -(c_F + H_F,fixed x_fixed)
    let a: Vec<Vec<BigRational>> = free.iter().map(|&i| free.iter().map(|&j| h[i][j].clone()).collect()).collect();
    let b: Vec<BigRational> = free
        .iter()
        .map(|&i| {
            let mut r = -c[i].clone();
            for j in 0..n {
                if tags[j] == FaceTag::Upper {
                    r -= &h[i][j];
                }
            }
            r
        })
        .collect();
    let sol = solve_rational(a, b)?;
    for (k, &i) in free.iter().enumerate() {
        x[i] = sol.particular[k].clone();
    }
    if x.iter().any(|v| v.is_negative() || v > &BigRational::one()) {
        return None;
    }
    if let Some(other) = &sol.alternative {
        // The objective is flat along the stationary affine set.
        let mut y = x.clone();
        for (k, &i) in free.iter().enumerate() {
            y[i] = other[k].clone();
        }
        debug_assert_eq!(inst.objective_exact(&x).ok(), inst.objective_exact(&y).ok());
    }
    Some(x)
}

struct RationalSolution {
    /// Solution with every non-pivot unknown at zero.
    particular: Vec<BigRational>,
    /// A second solution (non-pivot unknowns at one) when the system is
    /// underdetermined.
    alternative: Option<Vec<BigRational>>,
}

/// Gauss-Jordan elimination; `None` if the system is inconsistent.
fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<RationalSolution> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][col].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        b[r] *= &inv;
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..cols {
                    let t = &a[r][j] * &f;
                    a[i][j] -= t;
                }
                let t = &b[r] * &f;
                b[i] -= t;
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let assemble = |fill: BigRational| {
        let mut x = vec![fill; cols];
        for (row, &col) in pivots.iter().enumerate() {
            let mut v = b[row].clone();
            for j in 0..cols {
                if !pivots.contains(&j) {
                    v -= &a[row][j] * &x[j];
                }
            }
            x[col] = v;
        }
        x
    };
    let particular = assemble(BigRational::zero());
    let alternative = (pivots.len() < cols).then(|| assemble(BigRational::one()));
    Some(RationalSolution { particular, alternative })
}

#[derive(Clone)]
struct FloatBest {
    value: f64,
    x: Vec<f64>,
    face: Vec<FaceTag>,
    examined: usize,
}

fn float_search(inst: &QpInstance) -> GlobalSolution {
    let n = inst.n();
    let hr = inst.hessian();
    let h = DMatrix::from_fn(n, n, |i, j| to_f64(&hr[i][j]));
    let c: Vec<f64> = inst.linear_dense().iter().map(to_f64).collect();
    let total = faces(n);
    let workers = thread::available_parallelism().map_or(1, |p| p.get()).min(16);
    let chunk = total.div_ceil(workers);
    // Chunks are contiguous and reduced in order, so the result does not
    // depend on scheduling.
    let partial: Vec<Option<FloatBest>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (h, c) = (&h, &c);
                scope.spawn(move || {
                    let mut best: Option<FloatBest> = None;
                    let mut examined = 0;
                    for code in (w * chunk)..((w + 1) * chunk).min(total) {
                        let tags = face_tags(n, code);
                        let Some(x) = float_face_point(h, c, &tags) else {
                            continue;
                        };
                        examined += 1;
                        let value = inst.objective_value(&x).expect("dimension matches");
                        if best.as_ref().is_none_or(|b| better_float(value, &x, b)) {
                            best = Some(FloatBest { value, x, face: tags, examined: 0 });
                        }
                    }
                    best.map(|b| FloatBest { examined, ..b })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle worker panicked")).collect()
    });
    let mut best: Option<FloatBest> = None;
    let mut examined = 0;
    for cand in partial.into_iter().flatten() {
        examined += cand.examined;
        if best.as_ref().is_none_or(|b| better_float(cand.value, &cand.x, b)) {
            best = Some(cand);
        }
    }
    let b = best.expect("the all-lower vertex is always a candidate");
    GlobalSolution {
        value: b.value,
        exact_value: None,
        argmin: b.x,
        exact_argmin: None,
        face: b.face,
        candidates_examined: examined,
    }
}

fn better_float(value: f64, x: &[f64], best: &FloatBest) -> bool {
    match value.partial_cmp(&best.value) {
        Some(Ordering::Less) => true,
        Some(Ordering::Equal) => x < best.x.as_slice(),
        _ => false,
    }
}

const FLOAT_BOX_SLACK: f64 = 1e-9;

fn float_face_point(h: &DMatrix<f64>, c: &[f64], tags: &[FaceTag]) -> Option<Vec<f64>> {
    let n = tags.len();
    let mut x: Vec<f64> = tags.iter().map(|t| if *t == FaceTag::Upper { 1.0 } else { 0.0 }).collect();
    let free: Vec<usize> = (0..n).filter(|&i| tags[i] == FaceTag::Free).collect();
    if free.is_empty() {
        return Some(x);
    }
    let k = free.len();
    let a = DMatrix::from_fn(k, k, |p, q| h[(free[p], free[q])]);
    let b = DVector::from_fn(k, |p, _| {
        let i = free[p];
        -c[i] - (0..n).filter(|&j| tags[j] == FaceTag::Upper).map(|j| h[(i, j)]).sum::<f64>()
    });
    let scale = a.amax().max(1.0);
    // Minimum-norm least squares; reject systems without an exact solution.
    let sol = a.clone().svd(true, true).solve(&b, 1e-12 * scale).ok()?;
    let resid = (&a * &sol - &b).amax();
    if resid > 1e-8 * (scale + b.amax()) {
        return None;
    }
    for (p, &i) in free.iter().enumerate() {
        let v = sol[p];
        if !(-FLOAT_BOX_SLACK..=1.0 + FLOAT_BOX_SLACK).contains(&v) {
            return None;
        }
        x[i] = v.clamp(0.0, 1.0);
    }
    Some(x)
}

/// Smallest objective on the uniform grid with `resolution` cells per axis.
pub fn grid_minimum(inst: &QpInstance, resolution: usize) -> Result<(f64, Vec<f64>), OracleError> {
    let n = inst.n();
    if n > MAX_GRID_N {
        return Err(OracleError::TooLarge { n, limit: MAX_GRID_N });
    }
    if resolution == 0 {
        return Err(OracleError::ZeroResolution);
    }
    let step = 1.0 / resolution as f64;
    let mut idx = vec![0usize; n];
    let mut best = (f64::INFINITY, vec![0.0; n]);
    loop {
        let x: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        let v = inst.objective_value(&x).expect("dimension matches");
        if v < best.0 {
            best = (v, x);
        }
        let mut pos = 0;
        while pos < n && idx[pos] == resolution {
            idx[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
        idx[pos] += 1;
    }
    Ok(best)
}

/// Checks that neither the grid nor a pattern search started from its best
/// point finds a value below `value - 1e-7`.
pub fn grid_refine_check(inst: &QpInstance, value: f64, resolution: usize) -> Result<bool, OracleError> {
    let (mut fx, mut x) = grid_minimum(inst, resolution)?;
    let mut step = 0.5 / resolution as f64;
    while step > 1e-10 {
        let mut moved = false;
        for i in 0..x.len() {
            for dir in [-1.0, 1.0] {
                let mut y = x.clone();
                y[i] = (y[i] + dir * step).clamp(0.0, 1.0);
                let fy = inst.objective_value(&y).expect("dimension matches");
                if fy < fx {
                    (fx, x) = (fy, y);
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok(fx >= value - 1e-7)
}
