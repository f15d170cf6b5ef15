//! Homogeneous self-dual primal–dual interior-point method with Nesterov–Todd
//! scaling and Mehrotra predictor–corrector steps, over complex Hermitian blocks.

use nalgebra::{DMatrix, DVector};

use super::presolve::{presolve, PresolveReport};
use super::{apply_op, unembed_block, ConicProblem, ConicSolution, Entry, Form, SparseOp, Status};
use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_part, inner, ComplexMatrix, C64};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Relative primal/dual residual tolerance.
    pub feas_tol: f64,
    /// Ratio test for infeasibility certificates.
    pub infeas_tol: f64,
    pub max_iter: usize,
    /// Solve through the real-symmetric embedding instead of natively.
    pub real_embedding: bool,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Pivot threshold of the dependent-row presolve.
    pub presolve_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            infeas_tol: 1e-8,
            max_iter: 150,
            real_embedding: false,
            step_fraction: 0.98,
            presolve_tol: 1e-10,
        }
    }
}

impl SolverOptions {
    pub fn with_gap_tol(tol: f64) -> Self {
        Self { gap_tol: tol, ..Self::default() }
    }
}

pub fn solve(p: &ConicProblem, tol: f64) -> Result<ConicSolution> {
    solve_with(p, &SolverOptions::with_gap_tol(tol))
}

pub fn solve_with(p: &ConicProblem, opts: &SolverOptions) -> Result<ConicSolution> {
    if opts.real_embedding {
        let e = p.real_embedding();
        let mut sol = Prepared::new(&e, opts.presolve_tol)?.solve(None, opts);
        sol.x = sol.x.iter().map(unembed_block).collect();
        sol.s = sol.s.iter().map(unembed_block).collect();
        return Ok(sol);
    }
    Ok(Prepared::new(p, opts.presolve_tol)?.solve(None, opts))
}

struct Part {
    block: usize,
    idx: Vec<(usize, usize)>,
    val: Vec<C64>,
    dense: Option<ComplexMatrix>,
}

/// A problem with canonical rows, dependent rows removed and Schur-complement
/// evaluation strategy fixed; reusable across objectives (Frank–Wolfe oracles).
pub struct Prepared {
    blocks: Vec<usize>,
    form: Form,
    objective_sign: f64,
    c: SparseOp,
    orig_rows: Vec<SparseOp>,
    orig_b: Vec<f64>,
    report: PresolveReport,
    /// Normalized kept rows, split by block.
    rows: Vec<Vec<Part>>,
    row_scale: Vec<f64>,
    b: Vec<f64>,
    /// (row, part) pairs touching each block, ascending in row.
    by_block: Vec<Vec<(usize, usize)>>,
}

fn canonical(op: &[Entry], blocks: &[usize]) -> Result<SparseOp> {
    let mut v: Vec<Entry> = Vec::with_capacity(op.len());
    for e in op {
        let n = *blocks.get(e.block).ok_or_else(|| Error::Solver(format!("block {} out of range", e.block)))?;
        if e.row >= n || e.col >= n {
            return Err(Error::Solver(format!("entry ({},{}) outside block of order {}", e.row, e.col, n)));
        }
        v.push(*e);
    }
    v.sort_by_key(|e| (e.block, e.row, e.col));
    let mut out: Vec<Entry> = Vec::with_capacity(v.len());
    for e in v {
        match out.last_mut() {
            Some(l) if (l.block, l.row, l.col) == (e.block, e.row, e.col) => l.value += e.value,
            _ => out.push(e),
        }
    }
    out.retain(|e| e.value.norm() > 0.0);
    // Symmetrize so that every row is exactly Hermitian.
    let mut sym: Vec<Entry> = Vec::with_capacity(out.len());
    for e in &out {
        let t = out
            .binary_search_by_key(&(e.block, e.col, e.row), |x| (x.block, x.row, x.col))
            .map(|k| out[k].value.conj())
            .unwrap_or(C64::new(0.0, 0.0));
        let v = (e.value + t) * 0.5;
        sym.push(Entry { value: v, ..*e });
        if e.row != e.col && out.binary_search_by_key(&(e.block, e.col, e.row), |x| (x.block, x.row, x.col)).is_err() {
            sym.push(Entry { block: e.block, row: e.col, col: e.row, value: v.conj() });
        }
    }
    sym.sort_by_key(|e| (e.block, e.row, e.col));
    Ok(sym)
}

fn op_norm(op: &[Entry]) -> f64 {
    op.iter().map(|e| e.value.norm_sqr()).sum::<f64>().sqrt()
}

impl Prepared {
    pub fn new(p: &ConicProblem, presolve_tol: f64) -> Result<Self> {
        if p.a.len() != p.b.len() {
            return Err(Error::Solver("constraint and right-hand-side counts differ".into()));
        }
        let blocks = p.blocks.clone();
        let orig_rows: Vec<SparseOp> = p.a.iter().map(|r| canonical(r, &blocks)).collect::<Result<_>>()?;
        let c = canonical(&p.c, &blocks)?;
        let norms: Vec<f64> = orig_rows.iter().map(|r| op_norm(r)).collect();
        let normalized: Vec<SparseOp> = orig_rows
            .iter()
            .zip(&norms)
            .map(|(r, &n)| if n > 0.0 { super::scaled(r, 1.0 / n) } else { r.clone() })
            .collect();
        let nb: Vec<f64> = p.b.iter().zip(&norms).map(|(&b, &n)| if n > 0.0 { b / n } else { b }).collect();
        let report = presolve(&normalized, &nb, presolve_tol);
        let mut rows = Vec::with_capacity(report.kept.len());
        let mut row_scale = Vec::with_capacity(report.kept.len());
        let mut b = Vec::with_capacity(report.kept.len());
        for &i in &report.kept {
            let mut parts: Vec<Part> = Vec::new();
            for e in &normalized[i] {
                if parts.last().is_none_or(|pt| pt.block != e.block) {
                    parts.push(Part { block: e.block, idx: Vec::new(), val: Vec::new(), dense: None });
                }
                let pt = parts.last_mut().unwrap();
                pt.idx.push((e.row, e.col));
                pt.val.push(e.value);
            }
            rows.push(parts);
            row_scale.push(norms[i]);
            b.push(nb[i]);
        }
        let mut by_block = vec![Vec::new(); blocks.len()];
        for (i, parts) in rows.iter().enumerate() {
            for (k, pt) in parts.iter().enumerate() {
                by_block[pt.block].push((i, k));
            }
        }
        // Dense W·A·W products pay off when a row has many entries in a block.
        for (bk, list) in by_block.iter().enumerate() {
            let n = blocks[bk] as f64;
            let total: f64 = list.iter().map(|&(i, k)| rows[i][k].idx.len() as f64).sum();
            for &(i, k) in list {
                let nnz = rows[i][k].idx.len() as f64;
                let sparse_cost = 0.5 * nnz * total * 2.0;
                let dense_cost = 2.0 * n * n * n + 0.5 * total;
                if dense_cost < sparse_cost {
                    let pt = &mut rows[i][k];
                    let mut d = ComplexMatrix::zeros(blocks[bk], blocks[bk]);
                    for (&(r, cc), &v) in pt.idx.iter().zip(&pt.val) {
                        d[(r, cc)] += v;
                    }
                    pt.dense = Some(d);
                }
            }
        }
        Ok(Self {
            blocks,
            form: p.form,
            objective_sign: p.objective_sign(),
            c,
            orig_rows,
            orig_b: p.b.clone(),
            report,
            rows,
            row_scale,
            b,
            by_block,
        })
    }

    pub fn presolve_report(&self) -> &PresolveReport {
        &self.report
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn a_apply(&self, x: &[ComplexMatrix]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|parts| {
                let mut s = 0.0;
                for pt in parts {
                    let xb = &x[pt.block];
                    for (&(r, c), v) in pt.idx.iter().zip(&pt.val) {
                        let z = xb[(c, r)];
                        s += v.re * z.re - v.im * z.im;
                    }
                }
                s
            }),
        )
    }

    fn a_adjoint(&self, y: &DVector<f64>) -> Vec<ComplexMatrix> {
        let mut out = self.zero_blocks();
        for (parts, &yi) in self.rows.iter().zip(y.iter()) {
            if yi == 0.0 {
                continue;
            }
            for pt in parts {
                let ob = &mut out[pt.block];
                for (&(r, c), v) in pt.idx.iter().zip(&pt.val) {
                    ob[(r, c)] += v * yi;
                }
            }
        }
        out
    }

    fn zero_blocks(&self) -> Vec<ComplexMatrix> {
        self.blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect()
    }

    fn identity_blocks(&self) -> Vec<ComplexMatrix> {
        self.blocks.iter().map(|&n| ComplexMatrix::identity(n, n)).collect()
    }

    fn schur(&self, w: &[ComplexMatrix]) -> DMatrix<f64> {
        let m = self.m();
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for (bk, list) in self.by_block.iter().enumerate() {
            let wb = &w[bk];
            for (jpos, &(j, kj)) in list.iter().enumerate() {
                let pj = &self.rows[j][kj];
                if let Some(aj) = &pj.dense {
                    let g = wb * aj * wb;
                    for &(i, ki) in &list[..=jpos] {
                        let pi = &self.rows[i][ki];
                        let mut s = 0.0;
                        for (&(k, l), a) in pi.idx.iter().zip(&pi.val) {
                            let z = g[(l, k)];
                            s += a.re * z.re - a.im * z.im;
                        }
                        mm[(i, j)] += s;
                    }
                } else {
                    for &(i, ki) in &list[..=jpos] {
                        let pi = &self.rows[i][ki];
                        let mut s = C64::new(0.0, 0.0);
                        for (&(k, l), a) in pi.idx.iter().zip(&pi.val) {
                            let mut t = C64::new(0.0, 0.0);
                            for (&(p, q), cv) in pj.idx.iter().zip(&pj.val) {
                                t += wb[(l, p)] * cv * wb[(q, k)];
                            }
                            s += a * t;
                        }
                        mm[(i, j)] += s.re;
                    }
                }
            }
        }
        for j in 0..m {
            for i in 0..j {
                mm[(j, i)] = mm[(i, j)];
            }
        }
        mm
    }

    /// Solve with the stored objective, or with `objective` replacing C.
    pub fn solve(&self, objective: Option<&SparseOp>, opts: &SolverOptions) -> ConicSolution {
        let c_op = match objective {
            Some(o) => canonical(o, &self.blocks).unwrap_or_default(),
            None => self.c.clone(),
        };
        if !self.report.consistent() {
            return self.finish(Status::Infeasible, None, &c_op, 0);
        }
        run(self, &c_op, opts)
    }

    fn finish(&self, status: Status, iterate: Option<(Vec<ComplexMatrix>, DVector<f64>, Vec<ComplexMatrix>)>, c_op: &SparseOp, iterations: usize) -> ConicSolution {
        let (x, ys, s) = iterate.unwrap_or_else(|| (self.zero_blocks(), DVector::zeros(self.m()), self.zero_blocks()));
        // Undo row normalization; dropped rows get zero multipliers.
        let mut y = vec![0.0; self.orig_rows.len()];
        for (k, &i) in self.report.kept.iter().enumerate() {
            y[i] = ys[k] / self.row_scale[k];
        }
        let cx = apply_op(c_op, &x);
        let by: f64 = y.iter().zip(&self.orig_b).map(|(a, b)| a * b).sum();
        let presid = self
            .orig_rows
            .iter()
            .zip(&self.orig_b)
            .map(|(r, &b)| (apply_op(r, &x) - b).abs())
            .fold(0.0f64, f64::max);
        let mut resid_blocks = super::densify(c_op, &self.blocks);
        for (r, &yi) in self.orig_rows.iter().zip(&y) {
            for e in r {
                resid_blocks[e.block][(e.row, e.col)] -= e.value * yi;
            }
        }
        let dresid = resid_blocks.iter().zip(&s).map(|(r, sb)| (r - sb).norm_squared()).sum::<f64>().sqrt();
        let sg = self.objective_sign;
        let (primal_objective, dual_objective) = match self.form {
            Form::Primal => (sg * cx, sg * by),
            Form::Dual => (sg * by, sg * cx),
        };
        let status = match (status, self.form) {
            (Status::Infeasible, Form::Dual) => Status::Unbounded,
            (Status::Unbounded, Form::Dual) => Status::Infeasible,
            (s, _) => s,
        };
        ConicSolution {
            status,
            x,
            y,
            s,
            primal_objective,
            dual_objective,
            gap: (cx - by).abs(),
            primal_residual: presid,
            dual_residual: dresid,
            iterations,
        }
    }
}

struct Scaling {
    g: ComplexMatrix,
    ginv: ComplexMatrix,
    d: Vec<f64>,
    w: ComplexMatrix,
}

fn nt_scaling(x: &ComplexMatrix, s: &ComplexMatrix) -> Scaling {
    let n = x.nrows();
    let ex = eigh(x);
    let floor = 1e-300;
    let sq: Vec<f64> = ex.eigenvalues.iter().map(|&l| l.max(floor).sqrt()).collect();
    let isq: Vec<f64> = sq.iter().map(|v| 1.0 / v).collect();
    let l = ex.reconstruct_with(&sq);
    let linv = ex.reconstruct_with(&isq);
    let t = hermitian_part(&(&l * s * &l));
    let et = eigh(&t);
    let d: Vec<f64> = et.eigenvalues.iter().map(|&v| v.max(floor).sqrt()).collect();
    let q = &et.eigenvectors;
    let mut g = &l * q;
    let mut ginv = q.adjoint() * &linv;
    for k in 0..n {
        let a = d[k].sqrt();
        for i in 0..n {
            g[(i, k)] /= a;
            ginv[(k, i)] *= a;
        }
    }
    let w = hermitian_part(&(&g * g.adjoint()));
    Scaling { g, ginv, d, w }
}

/// Largest α ≤ 1/0 with D + α·Δ̃ ⪰ 0 for diagonal D, via λ_min(D^{-1/2} Δ̃ D^{-1/2}).
fn max_step(d: &[f64], dt: &ComplexMatrix) -> f64 {
    let n = d.len();
    let m = ComplexMatrix::from_fn(n, n, |i, j| dt[(i, j)] / (d[i] * d[j]).sqrt());
    let lmin = eigh(&m).min_eigenvalue();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn rs(m: &ComplexMatrix, s: f64) -> ComplexMatrix {
    m * C64::new(s, 0.0)
}

fn blocks_inner(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| inner(x, y)).sum()
}

fn blocks_norm(a: &[ComplexMatrix]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn run(p: &Prepared, c_op: &SparseOp, opts: &SolverOptions) -> ConicSolution {
    let m = p.m();
    let nu: f64 = p.blocks.iter().sum::<usize>() as f64;
    let c_dense = super::densify(c_op, &p.blocks);
    // Problem scaling for the iteration: b̃ = b/β, C̃ = C/γ.
    let bnorm = p.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let beta = bnorm.max(1e-3);
    let gamma = blocks_norm(&c_dense).max(1e-3);
    let b = DVector::from_iterator(m, p.b.iter().map(|v| v / beta));
    let c: Vec<ComplexMatrix> = c_dense.iter().map(|x| rs(x, 1.0 / gamma)).collect();

    let mut x = p.identity_blocks();
    let mut s = p.identity_blocks();
    let mut y = DVector::<f64>::zeros(m);
    let (mut tau, mut kappa) = (1.0f64, 1.0f64);

    let unscale = |x: &[ComplexMatrix], y: &DVector<f64>, s: &[ComplexMatrix], tau: f64| {
        let xs: Vec<ComplexMatrix> = x.iter().map(|v| rs(v, beta / tau)).collect();
        let ys = y * (gamma / tau);
        let ss: Vec<ComplexMatrix> = s.iter().map(|v| rs(v, gamma / tau)).collect();
        (xs, ys, ss)
    };

    let mut status = Status::MaxIter;
    let mut iter = 0;
    let mut stalls = 0;
    while iter < opts.max_iter {
        let ax = p.a_apply(&x);
        let aty = p.a_adjoint(&y);
        let rp = &ax - &b * tau;
        let rd: Vec<ComplexMatrix> = aty.iter().zip(&s).zip(&c).map(|((a, sb), cb)| a + sb - rs(cb, tau)).collect();
        let pobj = blocks_inner(&c, &x);
        let dobj = b.dot(&y);
        let rg = pobj - dobj + kappa;
        let xs = blocks_inner(&x, &s);
        let mu = (xs + tau * kappa) / (nu + 1.0);

        // Termination in the original scaling.
        let pres = rp.amax() * beta / tau / (1.0 + bnorm);
        let dres = blocks_norm(&rd) * gamma / tau / (1.0 + gamma);
        let (po, dob) = (pobj * beta * gamma / tau, dobj * beta * gamma / tau);
        let rel_gap = (po - dob).abs() / (1.0 + po.abs() + dob.abs());
        if pres <= opts.feas_tol && dres <= opts.feas_tol && rel_gap <= opts.gap_tol {
            status = Status::Optimal;
            break;
        }
        if dobj > 0.0 {
            let ray: Vec<ComplexMatrix> = aty.iter().zip(&s).map(|(a, sb)| a + sb).collect();
            if blocks_norm(&ray) / dobj <= opts.infeas_tol && kappa > tau {
                status = Status::Infeasible;
                break;
            }
        }
        if pobj < 0.0 && ax.amax() / (-pobj) <= opts.infeas_tol && kappa > tau {
            status = Status::Unbounded;
            break;
        }

        let sc: Vec<Scaling> = x.iter().zip(&s).map(|(xb, sb)| nt_scaling(xb, sb)).collect();
        let w: Vec<ComplexMatrix> = sc.iter().map(|k| k.w.clone()).collect();
        let mut mm = p.schur(&w);
        let chol = {
            let mut reg = 0.0;
            let maxd = (0..m).map(|i| mm[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
            loop {
                if let Some(ch) = mm.clone().cholesky() {
                    break Some(ch);
                }
                reg = if reg == 0.0 { 1e-14 * maxd } else { reg * 100.0 };
                if reg > 1e-4 * maxd {
                    break None;
                }
                for i in 0..m {
                    mm[(i, i)] += reg;
                }
            }
        };
        let Some(chol) = chol else { break };
        let msolve = |r: &DVector<f64>| -> DVector<f64> {
            let mut u = chol.solve(r);
            let res = r - &mm * &u;
            u += chol.solve(&res);
            u
        };

        let wcw: Vec<ComplexMatrix> = w.iter().zip(&c).map(|(wb, cb)| wb * cb * wb).collect();
        let wrdw: Vec<ComplexMatrix> = w.iter().zip(&rd).map(|(wb, r)| wb * r * wb).collect();
        let gvec = p.a_apply(&wcw);
        let cwc = blocks_inner(&c, &wcw);
        let v = msolve(&(&gvec + &b));
        let gmb = &gvec - &b;
        let denom = gmb.dot(&v) - cwc - kappa / tau;

        struct Dir {
            dx: Vec<ComplexMatrix>,
            dy: DVector<f64>,
            ds: Vec<ComplexMatrix>,
            dt: f64,
            dk: f64,
        }
        let direction = |eta: f64, r_x: &[ComplexMatrix], r_tau: f64| -> Dir {
            let tmp: Vec<ComplexMatrix> = r_x.iter().zip(&wrdw).map(|(a, b)| a + rs(b, eta)).collect();
            let h = -(&rp * eta) - p.a_apply(&tmp);
            let u = msolve(&h);
            let rhs = -eta * rg - blocks_inner(&c, &tmp) - r_tau / tau;
            let dt = (rhs - gmb.dot(&u)) / denom;
            let dy = &u + &v * dt;
            let atdy = p.a_adjoint(&dy);
            let ds: Vec<ComplexMatrix> = rd
                .iter()
                .zip(&atdy)
                .zip(&c)
                .map(|((r, a), cb)| -rs(r, eta) - a + rs(cb, dt))
                .collect();
            let dx: Vec<ComplexMatrix> = r_x
                .iter()
                .zip(&w)
                .zip(&ds)
                .map(|((rx, wb), dsb)| hermitian_part(&(rx - wb * dsb * wb)))
                .collect();
            let dk = (r_tau - kappa * dt) / tau;
            Dir { dx, dy, ds, dt, dk }
        };
        let scaled_dirs = |dir: &Dir| -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
            let dxs = sc.iter().zip(&dir.dx).map(|(k, d)| &k.ginv * d * k.ginv.adjoint()).collect();
            let dss = sc.iter().zip(&dir.ds).map(|(k, d)| k.g.adjoint() * d * &k.g).collect();
            (dxs, dss)
        };
        let step_len = |dir: &Dir, dxs: &[ComplexMatrix], dss: &[ComplexMatrix]| -> f64 {
            let mut a = f64::INFINITY;
            for (k, (dx, ds)) in sc.iter().zip(dxs.iter().zip(dss)) {
                a = a.min(max_step(&k.d, dx)).min(max_step(&k.d, ds));
            }
            if dir.dt < 0.0 {
                a = a.min(-tau / dir.dt);
            }
            if dir.dk < 0.0 {
                a = a.min(-kappa / dir.dk);
            }
            a
        };

        // Predictor.
        let neg_x: Vec<ComplexMatrix> = x.iter().map(|v| -v).collect();
        let aff = direction(1.0, &neg_x, -tau * kappa);
        let (adx, ads) = scaled_dirs(&aff);
        let a_aff = step_len(&aff, &adx, &ads).min(1.0);
        let xa: Vec<ComplexMatrix> = x.iter().zip(&aff.dx).map(|(a, d)| a + rs(d, a_aff)).collect();
        let sa: Vec<ComplexMatrix> = s.iter().zip(&aff.ds).map(|(a, d)| a + rs(d, a_aff)).collect();
        let mu_aff = (blocks_inner(&xa, &sa) + (tau + a_aff * aff.dt) * (kappa + a_aff * aff.dk)) / (nu + 1.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector with the Mehrotra second-order term in the scaled space.
        let r_x: Vec<ComplexMatrix> = sc
            .iter()
            .zip(adx.iter().zip(&ads))
            .map(|(k, (dxs, dss))| {
                let n = k.d.len();
                let prod = dxs * dss;
                let sym = rs(&(&prod + prod.adjoint()), 0.5);
                let mut h = ComplexMatrix::zeros(n, n);
                for j in 0..n {
                    for i in 0..n {
                        let mut r = -sym[(i, j)];
                        if i == j {
                            r += C64::new(sigma * mu - k.d[i] * k.d[i], 0.0);
                        }
                        h[(i, j)] = r * (2.0 / (k.d[i] + k.d[j]));
                    }
                }
                &k.g * h * k.g.adjoint()
            })
            .collect();
        let r_tau = sigma * mu - tau * kappa - aff.dt * aff.dk;
        let dir = direction(1.0 - sigma, &r_x, r_tau);
        let (dxs, dss) = scaled_dirs(&dir);
        let amax = step_len(&dir, &dxs, &dss);
        let alpha = (opts.step_fraction * amax).min(1.0);
        let finite = alpha.is_finite()
            && dir.dt.is_finite()
            && dir.dk.is_finite()
            && dir.dy.iter().all(|v| v.is_finite())
            && blocks_norm(&dir.dx).is_finite()
            && blocks_norm(&dir.ds).is_finite();
        if !finite {
            // Numerical breakdown: keep the last finite iterate.
            break;
        }

        for (a, d) in x.iter_mut().zip(&dir.dx) {
            *a = hermitian_part(&(&*a + rs(d, alpha)));
        }
        for (a, d) in s.iter_mut().zip(&dir.ds) {
            *a = hermitian_part(&(&*a + rs(d, alpha)));
        }
        y += &dir.dy * alpha;
        tau += alpha * dir.dt;
        kappa += alpha * dir.dk;
        iter += 1;

        if alpha < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
        if !(tau.is_finite() && kappa.is_finite()) || tau <= 0.0 {
            break;
        }
    }

    let (xs, ys, ss) = match status {
        Status::Infeasible | Status::Unbounded => {
            // Report the (normalized) certificate ray itself.
            let ny = y.amax().max(blocks_norm(&x)).max(1e-300);
            (x.iter().map(|v| rs(v, 1.0 / ny)).collect(), &y / ny, s.iter().map(|v| rs(v, 1.0 / ny)).collect())
        }
        _ => unscale(&x, &y, &s, tau),
    };
    p.finish(status, Some((xs, ys, ss)), c_op, iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{LmiBuilder, PrimalBuilder, Sense};
    use crate::linalg::c;

    fn e(block: usize, row: usize, col: usize, v: C64) -> Entry {
        Entry { block, row, col, value: v }
    }

    // max ⟨M, X⟩ s.t. tr X = 1 has value λ_max(M).
    fn max_eig_problem() -> (ConicProblem, f64) {
        let mut pb = PrimalBuilder::new(Sense::Maximize);
        let b = pb.block(2);
        pb.constraint(vec![e(b, 0, 0, c(1.0)), e(b, 1, 1, c(1.0))], 1.0);
        pb.objective(vec![
            e(b, 0, 0, c(1.0)),
            e(b, 0, 1, C64::new(0.0, 1.0)),
            e(b, 1, 0, C64::new(0.0, -1.0)),
            e(b, 1, 1, c(-1.0)),
        ]);
        (pb.finish("max eigenvalue"), 2f64.sqrt())
    }

    #[test]
    fn complex_max_eigenvalue() {
        let (p, want) = max_eig_problem();
        let s = solve(&p, 1e-10).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_objective - want).abs() < 1e-8);
        assert!((s.dual_objective - want).abs() < 1e-8);
        let r = solve_with(&p, &SolverOptions { real_embedding: true, ..SolverOptions::default() }).unwrap();
        assert!((r.primal_objective - want).abs() < 1e-8);
        assert_eq!(r.x[0].nrows(), 2);
    }

    #[test]
    fn detects_primal_infeasibility() {
        // X ⪰ 0 with X_00 = −1.
        let mut pb = PrimalBuilder::new(Sense::Minimize);
        let b = pb.block(2);
        pb.constraint(vec![e(b, 0, 0, c(1.0))], -1.0);
        pb.objective(vec![e(b, 1, 1, c(1.0))]);
        let s = solve(&pb.finish("infeasible"), 1e-8).unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn detects_unbounded_lmi() {
        // maximize y s.t. diag(1, 1) + y·diag(1, 0) ⪰ 0: unbounded above.
        let mut lb = LmiBuilder::new(Sense::Maximize);
        let b = lb.block(2);
        let y = lb.var(1.0);
        lb.coeff(y, vec![e(b, 0, 0, c(1.0))]);
        lb.constant(vec![e(b, 0, 0, c(1.0)), e(b, 1, 1, c(1.0))]);
        let s = solve(&lb.finish("unbounded"), 1e-8).unwrap();
        assert_eq!(s.status, Status::Unbounded);
    }

    #[test]
    fn lmi_form_reports_modeller_objective() {
        // minimize y s.t. y·I − diag(1, 3) ⪰ 0 → 3.
        let mut lb = LmiBuilder::new(Sense::Minimize);
        let b = lb.block(2);
        let y = lb.var(1.0);
        lb.coeff(y, vec![e(b, 0, 0, c(1.0)), e(b, 1, 1, c(1.0))]);
        lb.constant(vec![e(b, 0, 0, c(-1.0)), e(b, 1, 1, c(-3.0))]);
        let s = solve(&lb.finish("shift"), 1e-10).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_objective - 3.0).abs() < 1e-8);
        assert!((s.y[0] - 3.0).abs() < 1e-7);
    }

    #[test]
    fn dump_round_trip() {
        let (p, _) = max_eig_problem();
        let q = ConicProblem::from_text(&p.to_text()).unwrap();
        assert_eq!(p, q);
        assert!(ConicProblem::from_text("unext-conic 2\n").is_err());
    }

    #[test]
    fn reused_preparation_changes_objective() {
        let (p, _) = max_eig_problem();
        let prep = Prepared::new(&p, 1e-10).unwrap();
        // minimize X_11 under tr X = 1 → 0.
        let s = prep.solve(Some(&vec![e(0, 1, 1, c(1.0))]), &SolverOptions::default());
        assert!(s.primal_objective.abs() < 1e-7, "{:?}", s);
    }
}
