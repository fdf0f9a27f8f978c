//! Infeasible-start primal-dual interior-point method with Nesterov-Todd
//! scaling and Mehrotra predictor-corrector steps.
//!
//! The problem `min c^T y  s.t. S = sum_k y_k F_k - F_0 ⪰ 0` is solved
//! together with its dual `max F_0 • Z  s.t. F_k • Z = c_k, Z ⪰ 0`.
//! Diagonal blocks are handled as a vector LP part.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};
use serde::Serialize;

use super::{SdpError, SdpStandard, MAX_BLOCK_SIZE, MAX_VARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub y: Vec<f64>,
    pub block_min_eigenvalues: Vec<f64>,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_block_size: usize,
    pub max_vars: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iterations: 200, max_block_size: MAX_BLOCK_SIZE, max_vars: MAX_VARS }
    }
}

pub fn solve(sdp: &SdpStandard, tol: f64) -> Result<SolveResult, SdpError> {
    solve_with(sdp, SolveOptions { tol, ..SolveOptions::default() })
}

/// Entry of some `F_k` in one block, expanded to both triangles.
type Entries = Vec<(usize, usize, f64)>;

struct DenseBlock {
    n: usize,
    f0: DMatrix<f64>,
    /// (active variable index, entries)
    vars: Vec<(usize, Entries)>,
}

struct LpPart {
    rows: usize,
    b: DVector<f64>,
    /// Column of `A` for each active variable: (row, value).
    cols: Vec<Vec<(usize, f64)>>,
}

struct Problem {
    dense: Vec<DenseBlock>,
    lp: LpPart,
    c: DVector<f64>,
    f0_max: f64,
}

fn expand(mat: &super::SymSparse) -> Entries {
    let mut out = Vec::with_capacity(mat.len() * 2);
    for (&(i, j), &v) in mat {
        out.push((i, j, v));
        if i != j {
            out.push((j, i, v));
        }
    }
    out
}

fn inner(entries: &Entries, x: &DMatrix<f64>) -> f64 {
    entries.iter().map(|&(i, j, v)| v * x[(i, j)]).sum()
}

fn sym(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

impl Problem {
    fn build(sdp: &SdpStandard, active: &[Option<usize>], c: DVector<f64>) -> Self {
        let mut dense = Vec::new();
        let mut lp_rows = 0;
        let mut lp_b = Vec::new();
        let na = c.len();
        let mut cols = vec![Vec::new(); na];
        let mut f0_max: f64 = 0.0;
        for block in &sdp.blocks {
            f0_max = block.constant.values().fold(f0_max, |m, v| m.max(v.abs()));
            if block.diagonal {
                for i in 0..block.size {
                    lp_b.push(block.constant.get(&(i, i)).copied().unwrap_or(0.0));
                }
                for (&k, mat) in &block.coeffs {
                    if let Some(a) = active[k] {
                        for (&(i, _), &v) in mat {
                            cols[a].push((lp_rows + i, v));
                        }
                    }
                }
                lp_rows += block.size;
            } else {
                let n = block.size;
                let mut f0 = DMatrix::zeros(n, n);
                for (i, j, v) in expand(&block.constant) {
                    f0[(i, j)] = v;
                }
                let vars = block.coeffs.iter().filter_map(|(&k, mat)| active[k].map(|a| (a, expand(mat)))).collect();
                dense.push(DenseBlock { n, f0, vars });
            }
        }
        Problem { dense, lp: LpPart { rows: lp_rows, b: DVector::from_vec(lp_b), cols }, c, f0_max }
    }

    fn apply_dense(&self, b: usize, y: &DVector<f64>) -> DMatrix<f64> {
        let blk = &self.dense[b];
        let mut s = DMatrix::zeros(blk.n, blk.n);
        for (k, ent) in &blk.vars {
            for &(i, j, v) in ent {
                s[(i, j)] += y[*k] * v;
            }
        }
        s
    }

    fn apply_lp(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.lp.rows);
        for (k, col) in self.lp.cols.iter().enumerate() {
            for &(r, v) in col {
                out[r] += y[k] * v;
            }
        }
        out
    }

    fn adjoint(&self, z: &[DMatrix<f64>], zl: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.c.len());
        for (b, blk) in self.dense.iter().enumerate() {
            for (k, ent) in &blk.vars {
                out[*k] += inner(ent, &z[b]);
            }
        }
        for (k, col) in self.lp.cols.iter().enumerate() {
            out[k] += col.iter().map(|&(r, v)| v * zl[r]).sum::<f64>();
        }
        out
    }

    fn dual_obj(&self, z: &[DMatrix<f64>], zl: &DVector<f64>) -> f64 {
        self.dense.iter().zip(z).map(|(b, zb)| dot(&b.f0, zb)).sum::<f64>() + self.lp.b.dot(zl)
    }
}

/// NT scaling data of one dense block.
struct Scaling {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    g: DMatrix<f64>,
    lambda: DVector<f64>,
    ls_inv: DMatrix<f64>,
    lz_inv: DMatrix<f64>,
}

fn scaling(s: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Scaling> {
    let n = s.nrows();
    let ls = Cholesky::new(s.clone())?.l();
    let lz = Cholesky::new(z.clone())?.l();
    let eye = DMatrix::identity(n, n);
    let ls_inv = ls.solve_lower_triangular(&eye)?;
    let lz_inv = lz.solve_lower_triangular(&eye)?;
    let svd = SVD::new(lz.transpose() * &ls, true, true);
    let v = svd.v_t?.transpose();
    let d = svd.singular_values;
    if d.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return None;
    }
    let dm = DMatrix::from_diagonal(&d.map(|x| 1.0 / x.sqrt()));
    let dp = DMatrix::from_diagonal(&d.map(f64::sqrt));
    let r = &ls * &v * dm;
    let rinv = dp * v.transpose() * &ls_inv;
    let g = rinv.transpose() * &rinv;
    Some(Scaling { r, rinv, g, lambda: d, ls_inv, lz_inv })
}

/// Largest step keeping `L L^T + a * dx` PSD, given `L^{-1}`.
fn max_step_psd(l_inv: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let m = sym(&(l_inv * dx * l_inv.transpose()));
    let e = SymmetricEigen::new(m).eigenvalues.min();
    if e >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / e
    }
}

fn max_step_lp(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter().zip(dx.iter()).filter(|(_, &d)| d < 0.0).map(|(&v, &d)| -v / d).fold(f64::INFINITY, f64::min)
}

struct Direction {
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dsl: DVector<f64>,
    dzl: DVector<f64>,
}

pub fn solve_with(sdp: &SdpStandard, opts: SolveOptions) -> Result<SolveResult, SdpError> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-3) {
        return Err(SdpError::BadTolerance(opts.tol));
    }
    sdp.validate()?;
    if sdp.num_vars > opts.max_vars {
        return Err(SdpError::TooManyVars { m: sdp.num_vars, limit: opts.max_vars });
    }
    if let Some(b) = sdp.blocks.iter().find(|b| !b.diagonal && b.size > opts.max_block_size) {
        return Err(SdpError::BlockTooLarge { size: b.size, limit: opts.max_block_size });
    }

    let m = sdp.num_vars;
    let mut used = vec![false; m];
    for b in &sdp.blocks {
        for (&k, mat) in &b.coeffs {
            if !mat.is_empty() {
                used[k] = true;
            }
        }
    }
    let finish = |status: SolveStatus, y: Vec<f64>, dual: f64, iters: usize, pinf: f64, dinf: f64, gap: f64| {
        let primal = sdp.objective(&y);
        SolveResult {
            status,
            primal_objective: primal,
            dual_objective: dual,
            block_min_eigenvalues: sdp.block_min_eigenvalues(&y),
            y,
            iterations: iters,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            relative_gap: gap,
        }
    };
    if (0..m).any(|k| !used[k] && sdp.cost[k] != 0.0) {
        return Ok(finish(SolveStatus::Unbounded, vec![0.0; m], f64::NEG_INFINITY, 0, 0.0, f64::INFINITY, f64::INFINITY));
    }
    let mut active = vec![None; m];
    let mut back = Vec::new();
    for k in 0..m {
        if used[k] {
            active[k] = Some(back.len());
            back.push(k);
        }
    }
    let cscale = back.iter().map(|&k| sdp.cost[k].abs()).fold(1.0, f64::max);
    let c = DVector::from_iterator(back.len(), back.iter().map(|&k| sdp.cost[k] / cscale));
    let prob = Problem::build(sdp, &active, c);
    let expand_y = |ya: &DVector<f64>| -> Vec<f64> {
        let mut y = vec![0.0; m];
        for (a, &k) in back.iter().enumerate() {
            y[k] = ya[a];
        }
        y
    };

    if back.is_empty() {
        // Nothing to optimize: feasible iff every -F_0 is PSD.
        let y = vec![0.0; m];
        let ok = sdp.block_min_eigenvalues(&y).iter().all(|&e| e >= -opts.tol);
        let status = if ok { SolveStatus::Optimal } else { SolveStatus::Infeasible };
        return Ok(finish(status, y, sdp.offset, 0, 0.0, 0.0, 0.0));
    }

    Ok(ipm(&prob, opts, sdp.offset, cscale, &expand_y, &finish))
}

#[allow(clippy::type_complexity)]
fn ipm(
    prob: &Problem,
    opts: SolveOptions,
    offset: f64,
    cscale: f64,
    expand_y: &dyn Fn(&DVector<f64>) -> Vec<f64>,
    finish: &dyn Fn(SolveStatus, Vec<f64>, f64, usize, f64, f64, f64) -> SolveResult,
) -> SolveResult {
    let na = prob.c.len();
    let nb = prob.dense.len();
    let total_dim = prob.dense.iter().map(|b| b.n).sum::<usize>() + prob.lp.rows;
    let cnorm = prob.c.norm();

    // Starting point: multiples of the identity sized from the data.
    let mut y = DVector::zeros(na);
    let mut s = Vec::with_capacity(nb);
    let mut z = Vec::with_capacity(nb);
    for blk in &prob.dense {
        let n = blk.n as f64;
        let mut fmax = blk.f0.norm();
        let mut ratio: f64 = 0.0;
        for (k, ent) in &blk.vars {
            let fnorm = ent.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
            fmax = fmax.max(fnorm);
            ratio = ratio.max((1.0 + prob.c[*k].abs()) / (1.0 + fnorm));
        }
        let xi = 10f64.max(n.sqrt()).max(n * ratio);
        let eta = 10f64.max(n.sqrt()).max(fmax);
        s.push(DMatrix::identity(blk.n, blk.n) * eta);
        z.push(DMatrix::identity(blk.n, blk.n) * xi);
    }
    let (mut sl, mut zl) = {
        let l = prob.lp.rows as f64;
        let mut fmax = prob.lp.b.norm();
        let mut ratio: f64 = 0.0;
        for (k, col) in prob.lp.cols.iter().enumerate() {
            let an = col.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
            fmax = fmax.max(an);
            if an > 0.0 {
                ratio = ratio.max((1.0 + prob.c[k].abs()) / (1.0 + an));
            }
        }
        let xi = 10f64.max(l.sqrt()).max(l.sqrt() * ratio);
        let eta = 10f64.max(l.sqrt()).max(fmax);
        (DVector::from_element(prob.lp.rows, eta), DVector::from_element(prob.lp.rows, xi))
    };

    let mut last = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut stalls = 0;
    // Late iterations can lose accuracy once the Schur system turns
    // ill-conditioned, so the best iterate seen is kept as a fallback.
    let mut best: Option<(f64, Vec<f64>, f64, usize, f64, f64, f64)> = None;
    for iter in 0..=opts.max_iterations {
        // Residuals and measures.
        let pres: Vec<DMatrix<f64>> =
            (0..nb).map(|b| prob.apply_dense(b, &y) - &prob.dense[b].f0 - &s[b]).collect();
        let pres_lp = prob.apply_lp(&y) - &prob.lp.b - &sl;
        let fz = prob.adjoint(&z, &zl);
        let dres = &prob.c - &fz;
        let pobj = prob.c.dot(&y);
        let dobj = prob.dual_obj(&z, &zl);
        let comp = (0..nb).map(|b| dot(&s[b], &z[b])).sum::<f64>() + sl.dot(&zl);
        let mu = comp / total_dim.max(1) as f64;
        let pnorm = (pres.iter().map(|p| p.norm_squared()).sum::<f64>() + pres_lp.norm_squared()).sqrt();
        let pinf = pnorm / (1.0 + prob.f0_max);
        let dinf = cscale * dres.norm() / (1.0 + cscale * cnorm);
        let (po, do_) = (cscale * pobj + offset, cscale * dobj + offset);
        let gap = (po - do_).abs() / (1.0 + po.abs() + do_.abs());
        let report = |status| {
            finish(status, expand_y(&y), cscale * dobj + offset, iter, pinf, dinf, gap)
        };
        let fallback = |best: Option<(f64, Vec<f64>, f64, usize, f64, f64, f64)>| match best {
            Some((score, by, bd, bi, bp, bdi, bg)) => {
                let status = if score <= opts.tol { SolveStatus::Optimal } else { SolveStatus::NumericalFailure };
                finish(status, by, bd, bi, bp, bdi, bg)
            }
            None => report(SolveStatus::NumericalFailure),
        };
        if !(pinf.is_finite() && dinf.is_finite() && mu.is_finite()) {
            return fallback(best);
        }
        let score = pinf.max(dinf).max(gap);
        if best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, expand_y(&y), do_, iter, pinf, dinf, gap));
        }
        if pinf <= opts.tol && dinf <= opts.tol && gap <= opts.tol {
            return report(SolveStatus::Optimal);
        }
        // Infeasibility certificates along diverging iterates.
        if dobj > 0.0 && fz.norm() / dobj < 1e-8 && dobj > 1e3 {
            return report(SolveStatus::Infeasible);
        }
        if pobj < 0.0 {
            let ray = ((0..nb).map(|b| (prob.apply_dense(b, &y) - &s[b]).norm_squared()).sum::<f64>()
                + (prob.apply_lp(&y) - &sl).norm_squared())
            .sqrt();
            if ray / -pobj < 1e-8 && -pobj > 1e3 {
                return report(SolveStatus::Unbounded);
            }
        }
        if iter == opts.max_iterations {
            return fallback(best);
        }
        let progress = pinf < 0.9 * last.0 || dinf < 0.9 * last.1 || gap < 0.9 * last.2;
        stalls = if progress { 0 } else { stalls + 1 };
        if stalls > 30 || (iter > 0 && score > 1e3 * best.as_ref().map_or(f64::INFINITY, |b| b.0.max(opts.tol))) {
            return fallback(best);
        }
        last = (last.0.min(pinf), last.1.min(dinf), last.2.min(gap));

        // Scaling and Schur complement.
        let mut scal = Vec::with_capacity(nb);
        for b in 0..nb {
            match scaling(&s[b], &z[b]) {
                Some(sc) => scal.push(sc),
                None => return fallback(best),
            }
        }
        let glp = zl.component_div(&sl);
        let mut schur = DMatrix::<f64>::zeros(na, na);
        for (b, blk) in prob.dense.iter().enumerate() {
            let g = &scal[b].g;
            for (ik, (k, fk)) in blk.vars.iter().enumerate() {
                for (j, fj) in &blk.vars[ik..] {
                    let mut acc = 0.0;
                    for &(p, q, v) in fk {
                        for &(r, t, w) in fj {
                            acc += v * w * g[(q, r)] * g[(t, p)];
                        }
                    }
                    schur[(*k, *j)] += acc;
                    if k != j {
                        schur[(*j, *k)] += acc;
                    }
                }
            }
        }
        let mut row_vars: Vec<Vec<(usize, f64)>> = vec![Vec::new(); prob.lp.rows];
        for (k, col) in prob.lp.cols.iter().enumerate() {
            for &(r, v) in col {
                row_vars[r].push((k, v));
            }
        }
        for (r, entries) in row_vars.iter().enumerate() {
            for &(k, v) in entries {
                for &(j, w) in entries {
                    schur[(k, j)] += glp[r] * v * w;
                }
            }
        }
        // Symmetric Jacobi scaling first: diagonal entries can span many
        // orders of magnitude once some slacks approach zero.
        let dscale = DVector::from_iterator(na, (0..na).map(|k| {
            let d = schur[(k, k)];
            if d > 0.0 && d.is_finite() { 1.0 / d.sqrt() } else { 1.0 }
        }));
        let scaled = DMatrix::from_fn(na, na, |i, j| schur[(i, j)] * dscale[i] * dscale[j]);
        let mut factor = None;
        for reg in [0.0, 1e-14, 1e-12, 1e-10, 1e-8] {
            let mut reg_m = scaled.clone();
            for k in 0..na {
                reg_m[(k, k)] += reg;
            }
            if let Some(ch) = Cholesky::new(reg_m) {
                factor = Some(ch);
                break;
            }
        }
        let Some(factor) = factor else {
            return fallback(best);
        };
        let schur_solve = |rhs: &DVector<f64>| -> DVector<f64> {
            let mut dy = factor.solve(&rhs.component_mul(&dscale)).component_mul(&dscale);
            let mut last = f64::INFINITY;
            for _ in 0..4 {
                let resid = rhs - &schur * &dy;
                let rn = resid.norm();
                if !(rn < 0.5 * last) || rn <= 1e-15 * rhs.norm() {
                    break;
                }
                last = rn;
                dy += factor.solve(&resid.component_mul(&dscale)).component_mul(&dscale);
            }
            dy
        };

        let solve_dir = |h: &[DMatrix<f64>], hl: &DVector<f64>| -> Direction {
            let mut rhs = -&dres;
            let mut ts = Vec::with_capacity(nb);
            for (b, blk) in prob.dense.iter().enumerate() {
                let sc = &scal[b];
                let n = blk.n;
                let t = DMatrix::from_fn(n, n, |i, j| 2.0 * h[b][(i, j)] / (sc.lambda[i] + sc.lambda[j]));
                let q = sc.rinv.transpose() * &t * &sc.rinv - &sc.g * &pres[b] * &sc.g;
                for (k, ent) in &blk.vars {
                    rhs[*k] += inner(ent, &q);
                }
                ts.push(t);
            }
            for (k, col) in prob.lp.cols.iter().enumerate() {
                rhs[k] += col.iter().map(|&(r, v)| v * (hl[r] - zl[r] * pres_lp[r]) / sl[r]).sum::<f64>();
            }
            let dy = schur_solve(&rhs);
            let mut ds = Vec::with_capacity(nb);
            let mut dz = Vec::with_capacity(nb);
            for b in 0..nb {
                let dsb = sym(&(prob.apply_dense(b, &dy) + &pres[b]));
                // Formed in the scaled space, where both terms are O(lambda).
                let sc = &scal[b];
                let dzt = &ts[b] - &sc.rinv * &dsb * sc.rinv.transpose();
                let dzb = sym(&(sc.rinv.transpose() * dzt * &sc.rinv));
                ds.push(dsb);
                dz.push(dzb);
            }
            let dsl = prob.apply_lp(&dy) + &pres_lp;
            let dzl = (hl - zl.component_mul(&dsl)).component_div(&sl);
            Direction { dy, ds, dz, dsl, dzl }
        };
        let steps = |d: &Direction| -> (f64, f64) {
            let mut ap = max_step_lp(&sl, &d.dsl);
            let mut ad = max_step_lp(&zl, &d.dzl);
            for b in 0..nb {
                ap = ap.min(max_step_psd(&scal[b].ls_inv, &d.ds[b]));
                ad = ad.min(max_step_psd(&scal[b].lz_inv, &d.dz[b]));
            }
            (ap, ad)
        };

        // Predictor.
        let lam2: Vec<DMatrix<f64>> =
            scal.iter().map(|sc| DMatrix::from_diagonal(&sc.lambda.map(|l| -l * l))).collect();
        let hl_aff = -sl.component_mul(&zl);
        let aff = solve_dir(&lam2, &hl_aff);
        let (ap, ad) = steps(&aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let comp_aff = (0..nb).map(|b| dot(&(&s[b] + &aff.ds[b] * ap), &(&z[b] + &aff.dz[b] * ad))).sum::<f64>()
            + (&sl + &aff.dsl * ap).dot(&(&zl + &aff.dzl * ad));
        let sigma = if mu > 0.0 { (comp_aff.max(0.0) / comp).powi(3).clamp(0.0, 1.0) } else { 0.0 };
        // Driving mu far below what the tolerance needs only hurts conditioning.
        let mu_floor = 0.1 * opts.tol * (1.0 + po.abs() + do_.abs()) / (cscale * total_dim.max(1) as f64);
        let sigma = if mu > 0.0 && pinf <= opts.tol && dinf <= opts.tol { sigma.max((mu_floor / mu).min(1.0)) } else { sigma };

        // Corrector.
        let h: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| {
                let sc = &scal[b];
                let dst = &sc.rinv * &aff.ds[b] * sc.rinv.transpose();
                let dzt = sc.r.transpose() * &aff.dz[b] * &sc.r;
                let corr = sym(&(dst * dzt));
                let n = prob.dense[b].n;
                DMatrix::identity(n, n) * (sigma * mu) + &lam2[b] - corr
            })
            .collect();
        let hl = DVector::from_element(prob.lp.rows, sigma * mu) - sl.component_mul(&zl) - aff.dsl.component_mul(&aff.dzl);
        let dir = solve_dir(&h, &hl);
        let (ap, ad) = steps(&dir);
        let gamma = 0.9 + 0.09 * ap.min(ad).min(1.0);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        y += &dir.dy * ap;
        sl += &dir.dsl * ap;
        zl += &dir.dzl * ad;
        for b in 0..nb {
            s[b] = sym(&(&s[b] + &dir.ds[b] * ap));
            z[b] = sym(&(&z[b] + &dir.dz[b] * ad));
        }
    }
    unreachable!("loop returns on the final iteration")
}

#[cfg(test)]
mod tests {
    use super::super::SdpBlock;
    use super::*;

    fn one_var(cost: f64, rhs: f64) -> SdpStandard {
        let mut b = SdpBlock::new(1, false);
        b.add(None, 0, 0, rhs);
        b.add(Some(0), 0, 0, 1.0);
        SdpStandard { num_vars: 1, blocks: vec![b], cost: vec![cost], offset: 0.0 }
    }

    #[test]
    fn smallest_problem() {
        let res = solve(&one_var(1.0, 1.0), 1e-8).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.primal_objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unbounded_direction() {
        let res = solve(&one_var(-1.0, 1.0), 1e-8).unwrap();
        assert_eq!(res.status, SolveStatus::Unbounded);
    }

    #[test]
    fn unconstrained_variable_with_cost() {
        let sdp = SdpStandard { num_vars: 1, blocks: vec![], cost: vec![1.0], offset: 0.0 };
        assert_eq!(solve(&sdp, 1e-8).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn infeasible_pair() {
        // y >= 1 and -y >= 0.
        let mut b = SdpBlock::new(2, true);
        b.add(None, 0, 0, 1.0);
        b.add(Some(0), 0, 0, 1.0);
        b.add(Some(0), 1, 1, -1.0);
        let sdp = SdpStandard { num_vars: 1, blocks: vec![b], cost: vec![1.0], offset: 0.0 };
        assert_eq!(solve(&sdp, 1e-8).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn bad_tolerance() {
        assert!(solve(&one_var(1.0, 1.0), 0.1).is_err());
    }

    #[test]
    fn free_scalar_quadratic() {
        // min y2 + y1 s.t. [[1, y1], [y1, y2]] ⪰ 0: minimum of t^2 + t is -1/4.
        let mut b = SdpBlock::new(2, false);
        b.add(None, 0, 0, -1.0);
        b.add(Some(0), 0, 1, 1.0);
        b.add(Some(1), 1, 1, 1.0);
        let sdp = SdpStandard { num_vars: 2, blocks: vec![b], cost: vec![1.0, 1.0], offset: 0.0 };
        let res = solve(&sdp, 1e-9).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.primal_objective + 0.25).abs() < 1e-7);
        assert!((res.y[0] + 0.5).abs() < 1e-4);
    }
}
