//! Side-by-side bounds from the baseline and new relaxations, and a seeded
//! instance generator.

use std::fmt::Write as _;
use std::thread;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::instance::{format_rational, QpInstance};
use crate::oracle::{global_min_boxqp, OracleError};
use crate::relax::{build_baseline, build_component_psd2, build_deyida, build_exact_hull, Baseline, RelaxationProgram};
use crate::sdp::{lower, solve, SolveStatus};

/// Relaxations compared, in table order.
pub const ROW_NAMES: [&str; 4] = ["shor-mc-tri", "DeyIda", "DeyIda+Shor", "new"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub name: String,
    /// Lower bound; absent when the row failed.
    pub bound: Option<f64>,
    pub status: Option<SolveStatus>,
    pub iterations: usize,
    pub wall_time_ms: f64,
    /// `(oracle - bound) / max(1, |oracle|)`; positive below the oracle.
    pub gap: Option<f64>,
    /// For the `new` row: `exact` or `psd2` (triplet present).
    pub variant: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub oracle: Option<f64>,
    /// Exact optimum as `p/q` or a decimal, when available.
    pub oracle_exact: Option<String>,
    pub oracle_error: Option<String>,
}

impl CompareReport {
    /// True when every row solved to optimality.
    pub fn all_optimal(&self) -> bool {
        self.rows.iter().all(|r| r.status == Some(SolveStatus::Optimal))
    }

    pub fn row(&self, name: &str) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Aligned text table with 4 significant digits.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:>12} {:>17} {:>5} {:>10} {:>10}", "relaxation", "bound", "status", "iter", "time[ms]", "gap");
        for r in &self.rows {
            let bound = r.bound.map_or("-".into(), |b| fmt_sig(b, 4));
            let status = match (&r.status, &r.error) {
                (Some(s), _) => status_name(*s).to_string(),
                (None, Some(_)) => "error".into(),
                _ => "-".into(),
            };
            let gap = r.gap.map_or("-".into(), |g| fmt_sig(g, 4));
            let name = match &r.variant {
                Some(v) => format!("{} ({v})", r.name),
                None => r.name.clone(),
            };
            let _ = writeln!(
                out,
                "{name:<12} {bound:>12} {status:>17} {:>5} {:>10.1} {gap:>10}",
                r.iterations, r.wall_time_ms
            );
        }
        if let Some(o) = self.oracle {
            let exact = self.oracle_exact.as_deref().map(|e| format!(" = {e}")).unwrap_or_default();
            let _ = writeln!(out, "{:<12} {:>12}{exact}", "oracle", fmt_sig(o, 4));
        }
        if let Some(e) = &self.oracle_error {
            let _ = writeln!(out, "oracle: {e}");
        }
        for r in self.rows.iter().filter(|r| r.error.is_some()) {
            let _ = writeln!(out, "{}: {}", r.name, r.error.as_deref().unwrap_or_default());
        }
        out
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::NumericalFailure => "numerical_failure",
    }
}

/// `%.{digits}g`-style rounding without exponent for moderate magnitudes.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        return format!("{:.*e}", digits.saturating_sub(1), v);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn build_row(name: &str, inst: &QpInstance) -> Result<(RelaxationProgram, Option<String>), String> {
    let g = inst.build_graph();
    let prog = match name {
        "shor-mc-tri" => build_baseline(&g, inst, Baseline::ShorMcTri),
        "DeyIda" => build_deyida(&g, inst, false),
        "DeyIda+Shor" => build_deyida(&g, inst, true),
        _ => {
            return if g.has_connected_plus_triplet() {
                build_component_psd2(&g, inst).map(|p| (p, Some("psd2".to_string())))
            } else {
                build_exact_hull(&g, inst).map(|p| (p, Some("exact".to_string())))
            }
            .map_err(|e| e.to_string());
        }
    };
    prog.map(|p| (p, None)).map_err(|e| e.to_string())
}

fn run_row(name: &str, inst: &QpInstance, tol: f64) -> CompareRow {
    let start = Instant::now();
    let mut row = CompareRow {
        name: name.to_string(),
        bound: None,
        status: None,
        iterations: 0,
        wall_time_ms: 0.0,
        gap: None,
        variant: None,
        error: None,
    };
    let outcome = build_row(name, inst).and_then(|(prog, variant)| {
        row.variant = variant;
        let low = lower(&prog).map_err(|e| e.to_string())?;
        solve(&low.sdp, tol).map_err(|e| e.to_string())
    });
    match outcome {
        Ok(res) => {
            row.status = Some(res.status);
            row.iterations = res.iterations;
            if res.status == SolveStatus::Optimal {
                row.bound = Some(res.primal_objective);
            } else {
                row.error = Some(format!("solver stopped with status {}", status_name(res.status)));
            }
        }
        Err(e) => row.error = Some(e),
    }
    row.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Solves every relaxation in parallel (and the oracle when asked). A
/// failing row is reported without affecting the others.
pub fn compare(inst: &QpInstance, with_oracle: bool, tol: f64) -> CompareReport {
    let (rows, oracle) = thread::scope(|scope| {
        let handles: Vec<_> = ROW_NAMES.iter().map(|name| scope.spawn(move || run_row(name, inst, tol))).collect();
        let oracle = with_oracle.then(|| global_min_boxqp(inst));
        let rows: Vec<CompareRow> = handles.into_iter().map(|h| h.join().expect("compare worker panicked")).collect();
        (rows, oracle)
    });
    let mut report = CompareReport { rows, oracle: None, oracle_exact: None, oracle_error: None };
    match oracle {
        Some(Ok(sol)) => {
            report.oracle = Some(sol.value);
            report.oracle_exact = sol.exact_value.as_ref().map(format_rational);
            for row in &mut report.rows {
                row.gap = row.bound.map(|b| (sol.value - b) / sol.value.abs().max(1.0));
            }
        }
        Some(Err(OracleError::TooLarge { n, limit })) => {
            report.oracle_error = Some(format!("oracle skipped: n = {n} exceeds {limit}"));
        }
        Some(Err(e)) => report.oracle_error = Some(e.to_string()),
        None => {}
    }
    report
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator option: {0}")]
    Invalid(String),
    #[error("no instance without a connected plus triplet after {0} attempts")]
    Unsatisfiable(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub n: usize,
    /// Probability of each edge.
    pub density: f64,
    /// Number of plus-loop nodes; every other node gets a minus loop or
    /// none with equal probability.
    pub plus: usize,
    pub seed: u64,
    pub no_triplet: bool,
    /// Coefficients are integers in `[-coef_max, coef_max]`.
    pub coef_max: i64,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { n: 5, density: 0.5, plus: 2, seed: 0, no_triplet: false, coef_max: 10 }
    }
}

const GEN_ATTEMPTS: usize = 1000;

/// Deterministic pseudorandom instance. With `no_triplet`, draws are
/// repeated until every plus component has at most two nodes.
pub fn generate(opts: &GenOptions) -> Result<QpInstance, GenError> {
    if opts.n == 0 {
        return Err(GenError::Invalid("n must be positive".into()));
    }
    if !(0.0..=1.0).contains(&opts.density) {
        return Err(GenError::Invalid(format!("density {} outside [0, 1]", opts.density)));
    }
    if opts.plus > opts.n {
        return Err(GenError::Invalid(format!("{} plus nodes for n = {}", opts.plus, opts.n)));
    }
    if opts.coef_max < 1 {
        return Err(GenError::Invalid("coefficient range must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..GEN_ATTEMPTS {
        let inst = draw(opts, &mut rng);
        if !opts.no_triplet || !inst.build_graph().has_connected_plus_triplet() {
            return Ok(inst);
        }
    }
    Err(GenError::Unsatisfiable(GEN_ATTEMPTS))
}

fn draw(opts: &GenOptions, rng: &mut ChaCha8Rng) -> QpInstance {
    let n = opts.n;
    let k = opts.coef_max;
    let mut inst = QpInstance::new(n).expect("n checked");
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let nonzero = |rng: &mut ChaCha8Rng| {
        let v = rng.gen_range(1..=k);
        if rng.gen_bool(0.5) {
            -v
        } else {
            v
        }
    };
    let mut nodes: Vec<usize> = (1..=n).collect();
    nodes.shuffle(rng);
    for (pos, &i) in nodes.iter().enumerate() {
        let d = if pos < opts.plus {
            rng.gen_range(1..=k)
        } else if rng.gen_bool(0.5) {
            -rng.gen_range(1..=k)
        } else {
            0
        };
        inst.set_diag(i, int(d)).expect("index in range");
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.gen_bool(opts.density) {
                let a = nonzero(rng);
                inst.set_offdiag(i, j, int(a)).expect("index in range");
            }
        }
        let c = rng.gen_range(-k..=k);
        inst.set_linear(i, int(c)).expect("index in range");
    }
    inst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(-177.3662932, 4), "-177.4");
        assert_eq!(fmt_sig(-4.0024107, 4), "-4.002");
        assert_eq!(fmt_sig(-1.4285714, 4), "-1.429");
        assert_eq!(fmt_sig(0.0005997, 4), "0.0005997");
        assert_eq!(fmt_sig(12345.6, 4), "12346");
        assert_eq!(fmt_sig(0.0, 4), "0");
    }

    #[test]
    fn generator_is_deterministic() {
        let opts = GenOptions { n: 6, seed: 7, ..GenOptions::default() };
        assert_eq!(generate(&opts).unwrap().emit(), generate(&opts).unwrap().emit());
        let other = GenOptions { seed: 8, ..opts.clone() };
        assert_ne!(generate(&opts).unwrap().emit(), generate(&other).unwrap().emit());
    }

    #[test]
    fn no_triplet_unsatisfiable() {
        let opts = GenOptions { n: 4, density: 1.0, plus: 4, no_triplet: true, ..GenOptions::default() };
        assert_eq!(generate(&opts).unwrap_err(), GenError::Unsatisfiable(GEN_ATTEMPTS));
    }
}
