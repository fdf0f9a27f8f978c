//! Sparse box-constrained QP instances in coefficient form.
//!
//! The objective is
//!
//! ```text
//! f(x) = sum_i d_i x_i^2 + sum_{i<j} a_ij x_i x_j + sum_i c_i x_i,   x in [0,1]^n
//! ```
//!
//! Off-diagonal coefficients multiply `x_i x_j` exactly once. A symmetric
//! matrix `Q` with objective `x'Qx` converts via `a_ij = 2 Q_ij`, see
//! [`QpInstance::from_symmetric`].
//!
//! Indices are 1-based everywhere in the public surface.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::graph::LoopGraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: index {index} outside [1, {n}]")]
    IndexOutOfRange { line: usize, index: usize, n: usize },
    #[error("line {line}: duplicate coefficient {key}")]
    Duplicate { line: usize, key: String },
    #[error("missing or nonpositive `n` header")]
    MissingDimension,
    #[error("point has dimension {got}, instance has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid coefficient: {0}")]
    Invalid(String),
}

/// A sparse QP over the unit box. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QpInstance {
    n: usize,
    diag: BTreeMap<usize, BigRational>,
    offdiag: BTreeMap<(usize, usize), BigRational>,
    linear: BTreeMap<usize, BigRational>,
}

impl QpInstance {
    pub fn new(n: usize) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::MissingDimension);
        }
        Ok(Self {
            n,
            diag: BTreeMap::new(),
            offdiag: BTreeMap::new(),
            linear: BTreeMap::new(),
        })
    }

    /// Builds an instance from `x'Qx + c'x` with a dense symmetric `Q`.
    pub fn from_symmetric(q: &[Vec<BigRational>], c: &[BigRational]) -> Result<Self, InstanceError> {
        let n = c.len();
        let mut inst = Self::new(n)?;
        if q.len() != n || q.iter().any(|row| row.len() != n) {
            return Err(InstanceError::Invalid("Q must be n x n".into()));
        }
        let two = BigRational::from_integer(BigInt::from(2));
        for i in 0..n {
            inst.set_diag(i + 1, q[i][i].clone())?;
            inst.set_linear(i + 1, c[i].clone())?;
            for j in i + 1..n {
                if q[i][j] != q[j][i] {
                    return Err(InstanceError::Invalid(format!("Q not symmetric at ({}, {})", i + 1, j + 1)));
                }
                inst.set_offdiag(i + 1, j + 1, &q[i][j] * &two)?;
            }
        }
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &BTreeMap<usize, BigRational> {
        &self.diag
    }

    /// Keys are ordered pairs `(i, j)` with `i < j`.
    pub fn offdiag(&self) -> &BTreeMap<(usize, usize), BigRational> {
        &self.offdiag
    }

    pub fn linear(&self) -> &BTreeMap<usize, BigRational> {
        &self.linear
    }

    fn check_index(&self, i: usize) -> Result<(), InstanceError> {
        if i == 0 || i > self.n {
            return Err(InstanceError::IndexOutOfRange { line: 0, index: i, n: self.n });
        }
        Ok(())
    }

    /// Sets `d_i`; a zero value removes the entry.
    pub fn set_diag(&mut self, i: usize, v: BigRational) -> Result<(), InstanceError> {
        self.check_index(i)?;
        put(&mut self.diag, i, v);
        Ok(())
    }

    pub fn set_linear(&mut self, i: usize, v: BigRational) -> Result<(), InstanceError> {
        self.check_index(i)?;
        put(&mut self.linear, i, v);
        Ok(())
    }

    /// Sets `a_ij`, accepting either index order.
    pub fn set_offdiag(&mut self, i: usize, j: usize, v: BigRational) -> Result<(), InstanceError> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(InstanceError::Invalid(format!("off-diagonal key ({i}, {i})")));
        }
        put(&mut self.offdiag, (i.min(j), i.max(j)), v);
        Ok(())
    }

    /// Exact objective at a rational point.
    pub fn objective_exact(&self, x: &[BigRational]) -> Result<BigRational, InstanceError> {
        if x.len() != self.n {
            return Err(InstanceError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut acc = BigRational::zero();
        for (&i, d) in &self.diag {
            acc += d * &x[i - 1] * &x[i - 1];
        }
        for (&(i, j), a) in &self.offdiag {
            acc += a * &x[i - 1] * &x[j - 1];
        }
        for (&i, c) in &self.linear {
            acc += c * &x[i - 1];
        }
        Ok(acc)
    }

    /// Floating-point objective.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64, InstanceError> {
        if x.len() != self.n {
            return Err(InstanceError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut acc = 0.0;
        for (&i, d) in &self.diag {
            acc += to_f64(d) * x[i - 1] * x[i - 1];
        }
        for (&(i, j), a) in &self.offdiag {
            acc += to_f64(a) * x[i - 1] * x[j - 1];
        }
        for (&i, c) in &self.linear {
            acc += to_f64(c) * x[i - 1];
        }
        Ok(acc)
    }

    /// Hessian of the objective (`H_ii = 2 d_i`, `H_ij = a_ij`), 0-based.
    pub fn hessian(&self) -> Vec<Vec<BigRational>> {
        let mut h = vec![vec![BigRational::zero(); self.n]; self.n];
        let two = BigRational::from_integer(BigInt::from(2));
        for (&i, d) in &self.diag {
            h[i - 1][i - 1] = d * &two;
        }
        for (&(i, j), a) in &self.offdiag {
            h[i - 1][j - 1] = a.clone();
            h[j - 1][i - 1] = a.clone();
        }
        h
    }

    /// Dense linear coefficient vector, 0-based.
    pub fn linear_dense(&self) -> Vec<BigRational> {
        let mut c = vec![BigRational::zero(); self.n];
        for (&i, v) in &self.linear {
            c[i - 1] = v.clone();
        }
        c
    }

    /// Node per variable, edge per nonzero `a_ij`, plus loop for `d_i > 0`,
    /// minus loop for `d_i < 0`.
    pub fn build_graph(&self) -> LoopGraph {
        let edges = self.offdiag.keys().copied();
        let plus = self.diag.iter().filter(|(_, d)| d.is_positive()).map(|(&i, _)| i);
        let minus = self.diag.iter().filter(|(_, d)| d.is_negative()).map(|(&i, _)| i);
        LoopGraph::new(self.n, edges, plus, minus).expect("instance indices are validated on insert")
    }

    /// Renders the instance in the line format read by [`QpInstance::parse`].
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n);
        for (i, v) in &self.diag {
            let _ = writeln!(out, "d {} {}", i, format_rational(v));
        }
        for ((i, j), v) in &self.offdiag {
            let _ = writeln!(out, "q {} {} {}", i, j, format_rational(v));
        }
        for (i, v) in &self.linear {
            let _ = writeln!(out, "c {} {}", i, format_rational(v));
        }
        out
    }

    /// Parses the line format: `#` comments, `n <int>` header, then
    /// `d i v`, `q i j v`, `c i v` lines.
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut inst: Option<QpInstance> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let malformed = |msg: &str| InstanceError::Malformed { line, msg: msg.to_string() };
            let Some(cur) = inst.as_mut() else {
                if toks.len() != 2 || toks[0] != "n" {
                    return Err(InstanceError::MissingDimension);
                }
                let n: usize = toks[1].parse().map_err(|_| malformed("bad dimension"))?;
                if n == 0 {
                    return Err(InstanceError::MissingDimension);
                }
                inst = Some(QpInstance::new(n)?);
                continue;
            };
            let n = cur.n;
            let index = |tok: &str| -> Result<usize, InstanceError> {
                let i: usize = tok.parse().map_err(|_| malformed(&format!("bad index `{tok}`")))?;
                if i == 0 || i > n {
                    return Err(InstanceError::IndexOutOfRange { line, index: i, n });
                }
                Ok(i)
            };
            let value = |tok: &str| -> Result<BigRational, InstanceError> {
                parse_decimal(tok).ok_or_else(|| malformed(&format!("bad value `{tok}`")))
            };
            match (toks[0], toks.len()) {
                ("d", 3) => {
                    let i = index(toks[1])?;
                    let v = value(toks[2])?;
                    insert_checked(&mut cur.diag, i, v, line, || format!("d {i}"))?;
                }
                ("q", 4) => {
                    let i = index(toks[1])?;
                    let j = index(toks[2])?;
                    if i == j {
                        return Err(malformed("q line with i == j; use a d line"));
                    }
                    let v = value(toks[3])?;
                    let key = (i.min(j), i.max(j));
                    insert_checked(&mut cur.offdiag, key, v, line, || format!("q {} {}", key.0, key.1))?;
                }
                ("c", 3) => {
                    let i = index(toks[1])?;
                    let v = value(toks[2])?;
                    insert_checked(&mut cur.linear, i, v, line, || format!("c {i}"))?;
                }
                ("n", _) => return Err(malformed("repeated `n` header")),
                _ => return Err(malformed(&format!("unrecognised line `{body}`"))),
            }
        }
        let mut inst = inst.ok_or(InstanceError::MissingDimension)?;
        inst.diag.retain(|_, v| !v.is_zero());
        inst.offdiag.retain(|_, v| !v.is_zero());
        inst.linear.retain(|_, v| !v.is_zero());
        Ok(inst)
    }
}

impl FromStr for QpInstance {
    type Err = InstanceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

// Zero-valued lines are kept until the end of parsing so that duplicates of
// them are still reported.
fn insert_checked<K: Ord + Copy>(
    map: &mut BTreeMap<K, BigRational>,
    key: K,
    v: BigRational,
    line: usize,
    name: impl Fn() -> String,
) -> Result<(), InstanceError> {
    if map.contains_key(&key) {
        return Err(InstanceError::Duplicate { line, key: name() });
    }
    map.insert(key, v);
    Ok(())
}

fn put<K: Ord>(map: &mut BTreeMap<K, BigRational>, key: K, v: BigRational) {
    if v.is_zero() {
        map.remove(&key);
    } else {
        map.insert(key, v);
    }
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses a decimal literal (`-12`, `0.25`, `1.5e-3`, `3/7`) exactly.
pub fn parse_decimal(tok: &str) -> Option<BigRational> {
    if let Some((num, den)) = tok.split_once('/') {
        let num: BigInt = num.parse().ok()?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (mantissa, exp) = match tok.find(['e', 'E']) {
        Some(pos) => (&tok[..pos], tok[pos + 1..].parse::<i32>().ok()?),
        None => (tok, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

/// Formats a rational as a finite decimal when possible, else as `p/q`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    // finite decimal iff the reduced denominator only has factors 2 and 5
    let mut den = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut p2, mut p5) = (0usize, 0usize);
    while (&den % &two).is_zero() {
        den /= &two;
        p2 += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        p5 += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = p2.max(p5);
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let int = scaled.to_integer();
    let neg = int.is_negative();
    let mut s = int.abs().to_string();
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
    }
    let split = s.len() - digits;
    format!("{}{}.{}", if neg { "-" } else { "" }, &s[..split], &s[split..])
}
