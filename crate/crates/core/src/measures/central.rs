//! Interior warm start for the Frank–Wolfe engine: damped Newton on
//! h(T̃σ̃) − μ·ln det σ̃ restricted to the extension set, following the central path.
//! At a centred point the Frank–Wolfe gap is at most μ·n, so a few stages
//! usually reach the requested gap without any atom bookkeeping.

use nalgebra::{DMatrix, DVector};

use crate::conic::{herm_basis, ExtensionProgram};
use crate::linalg::{eigh, ComplexMatrix, C64};

type Basis = Vec<Vec<(usize, usize, C64)>>;

fn coords(basis: &Basis, m: &ComplexMatrix) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|h| h.iter().map(|&(i, j, v)| (v * m[(j, i)]).re).sum::<f64>()))
}

fn assemble(basis: &Basis, x: &DVector<f64>, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for (h, &xk) in basis.iter().zip(x.iter()) {
        for &(i, j, v) in h {
            m[(i, j)] += v * xk;
        }
    }
    m
}

fn single(h: &[(usize, usize, C64)], n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for &(i, j, v) in h {
        m[(i, j)] = v;
    }
    m
}

/// ln det of a Hermitian matrix, or None if it is not positive definite.
fn log_det(m: &ComplexMatrix) -> Option<f64> {
    let ch = m.clone().cholesky()?;
    let l = ch.l_dirty();
    let mut s = 0.0;
    for i in 0..m.nrows() {
        let d = l[(i, i)].re;
        if !(d > 0.0) {
            return None;
        }
        s += 2.0 * d.ln();
    }
    Some(s)
}

pub(super) struct CentralPath<'a> {
    ep: &'a ExtensionProgram,
    n: usize,
    q: usize,
    basis_n: Basis,
    basis_q: Basis,
    /// T̃ in orthonormal Hermitian coordinates (q² × n²).
    jac: DMatrix<f64>,
    /// tr_B′ in Hermitian coordinates (r² × n²).
    cons: DMatrix<f64>,
}

/// Largest n² for which the dense Newton system is formed.
pub(super) const MAX_COORDS: usize = 1024;

impl<'a> CentralPath<'a> {
    pub fn new(ep: &'a ExtensionProgram) -> Option<Self> {
        let (n, q, r, d_b) = (ep.ext_dim(), ep.marg_dim(), ep.rank(), ep.d_b());
        if n * n > MAX_COORDS {
            return None;
        }
        let basis_n = herm_basis(n);
        let basis_q = herm_basis(q);
        let basis_r = herm_basis(r);
        let mut jac = DMatrix::zeros(q * q, n * n);
        let mut cons = DMatrix::zeros(r * r, n * n);
        for (k, h) in basis_n.iter().enumerate() {
            let e = single(h, n);
            jac.set_column(k, &coords(&basis_q, &ep.reduced_marginal(&e)));
            let pt = ComplexMatrix::from_fn(r, r, |i, j| (0..d_b).map(|b| e[(i * d_b + b, j * d_b + b)]).sum());
            cons.set_column(k, &coords(&basis_r, &pt));
        }
        Some(Self { ep, n, q, basis_n, basis_q, jac, cons })
    }

    /// Strictly feasible start ρ̃ ⊗ I/d_B.
    pub fn start(&self) -> ComplexMatrix {
        let d_b = self.ep.d_b();
        crate::linalg::kron(self.ep.rho_tilde(), &(crate::linalg::identity(d_b) * crate::linalg::c(1.0 / d_b as f64)))
    }

    fn phi(&self, h: &dyn Fn(&ComplexMatrix) -> f64, sigma: &ComplexMatrix, mu: f64) -> Option<f64> {
        let ld = log_det(sigma)?;
        let v = h(&self.ep.reduced_marginal(sigma)) - mu * ld;
        v.is_finite().then_some(v)
    }

    /// Hessian of h at τ in q-coordinates, by central differences of the gradient.
    fn hessian_h(&self, grad: &dyn Fn(&ComplexMatrix) -> ComplexMatrix, tau: &ComplexMatrix) -> DMatrix<f64> {
        let m = self.q * self.q;
        let lmin = eigh(tau).min_eigenvalue().max(1e-300);
        let eps = 1e-4 * lmin.min(1.0);
        let mut hh = DMatrix::zeros(m, m);
        for (j, f) in self.basis_q.iter().enumerate() {
            let d = single(f, self.q) * crate::linalg::c(eps);
            let gp = coords(&self.basis_q, &grad(&(tau + &d)));
            let gm = coords(&self.basis_q, &grad(&(tau - &d)));
            hh.set_column(j, &((gp - gm) / (2.0 * eps)));
        }
        (&hh + hh.transpose()) * 0.5
    }

    /// Centres σ̃ for barrier weight μ; returns the number of Newton steps taken.
    pub fn centre(
        &self,
        h: &dyn Fn(&ComplexMatrix) -> f64,
        grad: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
        sigma: &mut ComplexMatrix,
        mu: f64,
        max_steps: usize,
    ) -> usize {
        let n = self.n;
        let Some(mut phi) = self.phi(h, sigma, mu) else { return 0 };
        for step in 0..max_steps {
            let tau = self.ep.reduced_marginal(sigma);
            let Some(inv) = sigma.clone().try_inverse() else { return step };
            let inv = crate::linalg::hermitian_part(&inv);
            let g = self.jac.transpose() * coords(&self.basis_q, &grad(&tau)) - coords(&self.basis_n, &inv) * mu;
            let mut hess = self.jac.transpose() * self.hessian_h(grad, &tau) * &self.jac;
            for (l, e) in self.basis_n.iter().enumerate() {
                // σ⁻¹ E_l σ⁻¹ as a sum of rank-one terms.
                let mut m = ComplexMatrix::zeros(n, n);
                for &(i, j, v) in e {
                    m += inv.column(i) * inv.row(j) * v;
                }
                let col = coords(&self.basis_n, &m) * mu;
                for k in 0..n * n {
                    hess[(k, l)] += col[k];
                }
            }
            let hess = (&hess + hess.transpose()) * 0.5;
            let Some(ch) = hess.cholesky() else { return step };
            let hg = ch.solve(&g);
            let hat = ch.solve(&self.cons.transpose());
            let s = &self.cons * &hat;
            let Some(sch) = s.cholesky() else { return step };
            let nu = sch.solve(&(-(&self.cons * &hg)));
            let dx = -(hg + hat * nu);
            let dec = -g.dot(&dx);
            if !(dec > 1e-6 * mu) {
                return step;
            }
            let d = assemble(&self.basis_n, &dx, n);
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let cand = &*sigma + &d * crate::linalg::c(t);
                if let Some(pc) = self.phi(h, &cand, mu) {
                    if pc <= phi - 0.25 * t * dec {
                        *sigma = crate::linalg::hermitian_part(&cand);
                        phi = pc;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted || dec < 1e-3 * mu {
                return step + 1;
            }
        }
        max_steps
    }
}
