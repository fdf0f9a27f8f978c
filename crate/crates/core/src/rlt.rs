//! Extended variables, exact linear forms over them, and the two factor
//! families used to build every relaxation: RLT factors
//! `l(J1, J2) ~ prod_{J1} z_i prod_{J2} (1 - z_i)` and square-augmented factors
//! `rho(i, J1, J2) ~ z_i^2 l(J1, J2)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::instance::to_f64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RltError {
    #[error("index sets overlap on node {0}")]
    Overlap(usize),
    #[error("square index {0} lies inside the factor sets")]
    SquareInside(usize),
    #[error("node {0} outside the point's dimension")]
    OutOfRange(usize),
    #[error("variable {0} cannot be grounded from a point alone")]
    Ungroundable(String),
}

/// An extended variable.
///
/// * `Monomial(S)` stands for `prod_{i in S} z_i`; the empty set is the
///   constant 1.
/// * `Square(i, J)` stands for `z_i^2 prod_{j in J} z_j` with `i` not in `J`.
/// * `Weight(bag, mask)` is a junction-tree weight for one 0/1 assignment
///   (bit `k` of `mask` is the value of the `k`-th smallest bag node).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    Monomial(Vec<usize>),
    Square(usize, Vec<usize>),
    Weight(u32, u32),
}

impl VarKey {
    pub fn monomial(set: impl IntoIterator<Item = usize>) -> Self {
        VarKey::Monomial(canonical(set))
    }

    pub fn one() -> Self {
        VarKey::Monomial(Vec::new())
    }

    /// Panics if `i` is in `set`; use [`rho`] for a checked path.
    pub fn square(i: usize, set: impl IntoIterator<Item = usize>) -> Self {
        let set = canonical(set);
        assert!(!set.contains(&i), "square index inside its set");
        VarKey::Square(i, set)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, VarKey::Monomial(s) if s.is_empty())
    }

    /// Value of the variable at a box point (1-based node indices).
    pub fn ground(&self, x: &[f64]) -> Result<f64, RltError> {
        let get = |i: usize| x.get(i.wrapping_sub(1)).copied().ok_or(RltError::OutOfRange(i));
        match self {
            VarKey::Monomial(s) => s.iter().try_fold(1.0, |acc, &i| Ok(acc * get(i)?)),
            VarKey::Square(i, s) => {
                let xi = get(*i)?;
                s.iter().try_fold(xi * xi, |acc, &j| Ok(acc * get(j)?))
            }
            VarKey::Weight(..) => Err(RltError::Ungroundable(self.to_string())),
        }
    }
}

fn canonical(set: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = set.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn join(s: &[usize]) -> String {
    s.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Monomial(s) if s.is_empty() => write!(f, "1"),
            VarKey::Monomial(s) => write!(f, "z{{{}}}", join(s)),
            VarKey::Square(i, s) if s.is_empty() => write!(f, "z{{{i},{i}}}"),
            VarKey::Square(i, s) => write!(f, "z{{{i},{i}}}^{{{}}}", join(s)),
            VarKey::Weight(b, m) => write!(f, "w{b}[{m:b}]"),
        }
    }
}

/// Affine combination of extended variables with exact rational
/// coefficients. The constant term is the coefficient of `Monomial(∅)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearForm {
    terms: BTreeMap<VarKey, BigRational>,
}

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(VarKey::one(), c)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(key: VarKey) -> Self {
        Self::term(key, BigRational::one())
    }

    pub fn term(key: VarKey, coef: BigRational) -> Self {
        let mut f = Self::zero();
        f.add_term(key, coef);
        f
    }

    pub fn add_term(&mut self, key: VarKey, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &LinearForm, scale: &BigRational) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c * scale);
        }
    }

    pub fn scaled(&self, scale: &BigRational) -> LinearForm {
        let mut out = LinearForm::zero();
        out.add_scaled(self, scale);
        out
    }

    pub fn terms(&self) -> &BTreeMap<VarKey, BigRational> {
        &self.terms
    }

    pub fn coef(&self, key: &VarKey) -> BigRational {
        self.terms.get(key).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coef(&VarKey::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Non-constant keys.
    pub fn variables(&self) -> impl Iterator<Item = &VarKey> {
        self.terms.keys().filter(|k| !k.is_constant())
    }

    /// Value with every variable mapped through `ground`.
    pub fn evaluate_with<E>(&self, mut ground: impl FnMut(&VarKey) -> Result<f64, E>) -> Result<f64, E> {
        let mut acc = 0.0;
        for (k, c) in &self.terms {
            let v = if k.is_constant() { 1.0 } else { ground(k)? };
            acc += to_f64(c) * v;
        }
        Ok(acc)
    }

    /// Value at a box point, grounding monomials and squares as products.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, RltError> {
        self.evaluate_with(|k| k.ground(x))
    }

    /// Replaces `key` by `replacement` wherever it occurs.
    pub fn substitute(&mut self, key: &VarKey, replacement: &LinearForm) {
        if let Some(c) = self.terms.remove(key) {
            self.add_scaled(replacement, &c);
        }
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (n, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if k.is_constant() {
                write!(f, "{}", crate::instance::format_rational(&mag))?;
            } else if mag.is_one() {
                write!(f, "{k}")?;
            } else {
                write!(f, "{}*{k}", crate::instance::format_rational(&mag))?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&LinearForm> for LinearForm {
    fn add_assign(&mut self, rhs: &LinearForm) {
        self.add_scaled(rhs, &BigRational::one());
    }
}

impl SubAssign<&LinearForm> for LinearForm {
    fn sub_assign(&mut self, rhs: &LinearForm) {
        self.add_scaled(rhs, &-BigRational::one());
    }
}

impl Add<&LinearForm> for &LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&LinearForm> for &LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        self.scaled(&-BigRational::one())
    }
}

impl Mul<&BigRational> for &LinearForm {
    type Output = LinearForm;
    fn mul(self, rhs: &BigRational) -> LinearForm {
        self.scaled(rhs)
    }
}

fn check_disjoint(j1: &[usize], j2: &[usize]) -> Result<(), RltError> {
    match j1.iter().find(|v| j2.contains(v)) {
        Some(&v) => Err(RltError::Overlap(v)),
        None => Ok(()),
    }
}

/// Calls `f(t)` for every subset `t` of `set`, in binary-counter order over
/// the sorted set.
fn for_each_subset(set: &[usize], mut f: impl FnMut(&[usize])) {
    assert!(set.len() < 32, "subset enumeration limited to 31 elements");
    let mut buf = Vec::with_capacity(set.len());
    for mask in 0u32..(1u32 << set.len()) {
        buf.clear();
        buf.extend(set.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v));
        f(&buf);
    }
}

fn sign(len: usize) -> BigRational {
    if len.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// Linearised RLT factor: `sum_{t ⊆ J2} (-1)^|t| z_{J1 ∪ t}`.
pub fn ell(j1: &[usize], j2: &[usize]) -> Result<LinearForm, RltError> {
    let (j1, j2) = (canonical(j1.iter().copied()), canonical(j2.iter().copied()));
    check_disjoint(&j1, &j2)?;
    let mut out = LinearForm::zero();
    for_each_subset(&j2, |t| {
        out.add_term(VarKey::monomial(j1.iter().chain(t).copied()), sign(t.len()));
    });
    Ok(out)
}

/// Linearised square-augmented factor: `sum_{t ⊆ J2} (-1)^|t| z_ii^{J1 ∪ t}`.
pub fn rho(i: usize, j1: &[usize], j2: &[usize]) -> Result<LinearForm, RltError> {
    let (j1, j2) = (canonical(j1.iter().copied()), canonical(j2.iter().copied()));
    check_disjoint(&j1, &j2)?;
    if j1.contains(&i) || j2.contains(&i) {
        return Err(RltError::SquareInside(i));
    }
    let mut out = LinearForm::zero();
    for_each_subset(&j2, |t| {
        out.add_term(VarKey::Square(i, canonical(j1.iter().chain(t).copied())), sign(t.len()));
    });
    Ok(out)
}

/// All subsets of `set` (sorted input), in binary-counter order.
pub fn subsets(set: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << set.len());
    for_each_subset(set, |t| out.push(t.to_vec()));
    out
}

/// Interns keys and hands out dense column indices in first-use order.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    index: BTreeMap<VarKey, usize>,
    keys: Vec<VarKey>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, key: &VarKey) -> usize {
        if let Some(&k) = self.index.get(key) {
            return k;
        }
        let k = self.keys.len();
        self.index.insert(key.clone(), k);
        self.keys.push(key.clone());
        k
    }

    /// Interns every non-constant key of `form`.
    pub fn intern_form(&mut self, form: &LinearForm) {
        for k in form.variables() {
            self.intern(k);
        }
    }

    pub fn get(&self, key: &VarKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn keys(&self) -> &[VarKey] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, key: &VarKey) -> bool {
        self.index.contains_key(key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(c: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(c))
    }

    fn form(terms: &[(VarKey, i64)]) -> LinearForm {
        let mut f = LinearForm::zero();
        for (k, c) in terms {
            f.add_term(k.clone(), int(*c));
        }
        f
    }

    fn m(s: &[usize]) -> VarKey {
        VarKey::monomial(s.iter().copied())
    }

    fn sq(i: usize, s: &[usize]) -> VarKey {
        VarKey::square(i, s.iter().copied())
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell(&[], &[]).unwrap(), LinearForm::from_int(1));
        assert_eq!(
            ell(&[], &[1, 2]).unwrap(),
            form(&[(m(&[]), 1), (m(&[1]), -1), (m(&[2]), -1), (m(&[1, 2]), 1)])
        );
        assert_eq!(
            ell(&[1], &[2, 3]).unwrap(),
            form(&[(m(&[1]), 1), (m(&[1, 2]), -1), (m(&[1, 3]), -1), (m(&[1, 2, 3]), 1)])
        );
        assert_eq!(ell(&[1], &[1]), Err(RltError::Overlap(1)));
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho(1, &[], &[]).unwrap(), LinearForm::var(sq(1, &[])));
        assert_eq!(rho(1, &[], &[2]).unwrap(), form(&[(sq(1, &[]), 1), (sq(1, &[2]), -1)]));
        assert_eq!(rho(1, &[2], &[3]).unwrap(), form(&[(sq(1, &[2]), 1), (sq(1, &[2, 3]), -1)]));
        assert_eq!(rho(1, &[1], &[2]), Err(RltError::SquareInside(1)));
        assert_eq!(rho(1, &[2], &[3, 2]), Err(RltError::Overlap(2)));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(ell(&[], &[1, 2]).unwrap().evaluate(&[1.0, 1.0]).unwrap(), 0.0);
        let v = rho(1, &[], &[2]).unwrap().evaluate(&[0.5, 0.25]).unwrap();
        assert!((v - 0.1875).abs() < 1e-15);
        assert_eq!(ell(&[3], &[]).unwrap().evaluate(&[0.5]), Err(RltError::OutOfRange(3)));
    }

    #[test]
    fn term_count_and_signs() {
        let f = ell(&[4], &[1, 2, 3, 5]).unwrap();
        assert_eq!(f.len(), 16);
        assert!(f.terms().values().all(|c| c.abs().is_one()));
        let g = rho(6, &[], &[1, 2, 3]).unwrap();
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn display_forms() {
        assert_eq!(ell(&[], &[1, 2]).unwrap().to_string(), "1 - z{1} + z{1,2} - z{2}");
        assert_eq!(rho(1, &[], &[2]).unwrap().to_string(), "z{1,1} - z{1,1}^{2}");
    }

    #[test]
    fn registry_interns_in_first_use_order() {
        let mut reg = Registry::new();
        assert_eq!(reg.intern(&m(&[2])), 0);
        assert_eq!(reg.intern(&sq(1, &[2])), 1);
        assert_eq!(reg.intern(&m(&[2])), 0);
        assert_eq!(reg.len(), 2);
        assert_eq!(reg.get(&sq(1, &[2])), Some(1));
    }

    #[test]
    fn substitution() {
        let mut f = ell(&[], &[1]).unwrap();
        f.substitute(&m(&[1]), &LinearForm::from_int(1));
        assert!(f.is_zero());
    }
}
