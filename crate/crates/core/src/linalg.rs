//! Dense complex linear algebra over Hermitian operators.
//!
//! Tensor convention: a composite index over subsystems `dims = [d0, d1, ...]` is
//! row-major with the first subsystem as the slowest index, so `kron(a, b)` places
//! `a` on the slow index and `partial_trace` derives its strides from the same rule.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative PSD tolerance: accepted if λ_min ≥ −PSD_TOL·max(1, λ_max).
pub const PSD_TOL: f64 = 1e-9;
/// Relative eigenvalue cutoff defining supports.
pub const SUPPORT_CUTOFF: f64 = 1e-9;
pub const HERMITICITY_TOL: f64 = 1e-12;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize, m: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, m)
}

/// Real part of tr[a b].
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            let x = a[(i, k)];
            let y = b[(k, i)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

pub fn trace_re(m: &ComplexMatrix) -> f64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)].re).sum()
}

/// (m + m†)/2
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Validates squareness and Hermiticity, then stores the exact Hermitian part.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let dev = hermiticity_defect(&matrix);
        if dev > HERMITICITY_TOL * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix: hermitian_part(&matrix) })
    }

    /// Symmetrizes without checking; for matrices Hermitian by construction.
    pub fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        Self { matrix: hermitian_part(matrix) }
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: identity(n) }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| c(x)));
        Self { matrix: ComplexMatrix::from_diagonal(&v) }
    }

    pub fn projector(psi: &DVector<C64>) -> Self {
        Self { matrix: psi * psi.adjoint() }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { matrix: self.matrix.scale(s) }
    }

    pub fn eigh(&self) -> SpectralDecomposition {
        eigh(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let ev = self.matrix.clone().symmetric_eigenvalues();
        ev.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self) -> bool {
        let ev = self.matrix.clone().symmetric_eigenvalues();
        psd_ok(ev.as_slice())
    }

    pub fn check_psd(&self) -> Result<()> {
        let ev = self.matrix.clone().symmetric_eigenvalues();
        if psd_ok(ev.as_slice()) {
            Ok(())
        } else {
            Err(Error::NotPsd(ev.iter().cloned().fold(f64::INFINITY, f64::min)))
        }
    }
}

fn psd_ok(ev: &[f64]) -> bool {
    let max = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    min >= -PSD_TOL * max.max(1.0)
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Eigenvalue threshold below which a direction counts as kernel.
    pub fn cutoff(&self, rel: f64) -> f64 {
        let scale = self.eigenvalues.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        rel * scale
    }

    /// U diag(w) U†, skipping zero weights.
    pub fn reconstruct_with(&self, w: &[f64]) -> ComplexMatrix {
        let n = self.eigenvectors.nrows();
        let mut out = zeros(n, n);
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let u = self.eigenvectors.column(k);
            for j in 0..n {
                let uj = u[j].conj() * wk;
                if uj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..n {
                    out[(i, j)] += u[i] * uj;
                }
            }
        }
        out
    }

    /// Isometry whose columns span the eigenspaces with λ > rel·max|λ|.
    pub fn support_isometry(&self, rel: f64) -> ComplexMatrix {
        let cut = self.cutoff(rel);
        let keep: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k] > cut)
            .collect();
        let n = self.eigenvectors.nrows();
        ComplexMatrix::from_fn(n, keep.len(), |i, j| self.eigenvectors[(i, keep[j])])
    }

    pub fn rank(&self, rel: f64) -> usize {
        let cut = self.cutoff(rel);
        self.eigenvalues.iter().filter(|&&x| x > cut).count()
    }
}

pub fn eigh(m: &ComplexMatrix) -> SpectralDecomposition {
    let n = m.nrows();
    let e = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    SpectralDecomposition { eigenvalues, eigenvectors }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::from_element(1, 1, c(1.0));
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over the chosen subsystems.
fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &k in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &o in &out {
            for i in 0..dims[k] {
                next.push(o + i * st[k]);
            }
        }
        out = next;
    }
    out
}

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<()> {
    let n: usize = dims.iter().product();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{} does not match subsystem dims {:?}",
            m.nrows(),
            m.ncols(),
            dims
        )));
    }
    Ok(())
}

pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], traced: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    if traced.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("traced index out of range for {:?}", dims)));
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| traced.contains(k)).collect();
    let base = offsets(dims, &kept);
    let inner_off = offsets(dims, &traced);
    let n = base.len();
    let mut out = zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for &t in &inner_off {
                s += m[(base[i] + t, base[j] + t)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

/// Flat-index map for reordering subsystems: output subsystem k is input subsystem perm[k].
pub fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(Error::DimensionMismatch("permutation length".into()));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::DimensionMismatch(format!("invalid permutation {:?}", perm)));
        }
        seen[p] = true;
    }
    Ok(offsets(dims, perm))
}

pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    let map = permutation_map(dims, perm)?;
    let n = map.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

pub fn permute_vector(v: &DVector<C64>, dims: &[usize], perm: &[usize]) -> Result<DVector<C64>> {
    let map = permutation_map(dims, perm)?;
    if v.len() != map.len() {
        return Err(Error::DimensionMismatch("vector length".into()));
    }
    Ok(DVector::from_fn(map.len(), |i, _| v[map[i]]))
}

/// Partial transpose of the listed subsystems.
pub fn partial_transpose(m: &ComplexMatrix, dims: &[usize], sub: &[usize]) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    let st = strides(dims);
    let n = m.nrows();
    let mut out = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (mut ii, mut jj) = (i, j);
            for &k in sub {
                let a = (i / st[k]) % dims[k];
                let b = (j / st[k]) % dims[k];
                ii = ii - a * st[k] + b * st[k];
                jj = jj - b * st[k] + a * st[k];
            }
            out[(ii, jj)] = m[(i, j)];
        }
    }
    Ok(out)
}

pub fn matrix_function(
    h: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    support_only: bool,
) -> Result<HermitianOperator> {
    let e = h.eigh();
    let cut = e.cutoff(SUPPORT_CUTOFF);
    let mut w = Vec::with_capacity(e.eigenvalues.len());
    for &l in &e.eigenvalues {
        let v = if support_only {
            if l > cut {
                f(l)
            } else if l >= -cut {
                0.0
            } else {
                f(l)
            }
        } else if l.abs() <= cut {
            f(0.0)
        } else {
            f(l)
        };
        if !v.is_finite() {
            return Err(if l.abs() <= cut || l > 0.0 {
                Error::SingularFunction
            } else {
                Error::NotPsd(l)
            });
        }
        w.push(v);
    }
    Ok(HermitianOperator { matrix: e.reconstruct_with(&w) })
}

/// x^p on the support (kernel maps to zero).
pub fn support_power(h: &HermitianOperator, p: f64) -> HermitianOperator {
    let e = h.eigh();
    support_power_of(&e, p)
}

pub fn support_power_of(e: &SpectralDecomposition, p: f64) -> HermitianOperator {
    let cut = e.cutoff(SUPPORT_CUTOFF);
    let w: Vec<f64> = e.eigenvalues.iter().map(|&l| if l > cut { l.powf(p) } else { 0.0 }).collect();
    HermitianOperator { matrix: e.reconstruct_with(&w) }
}

pub fn support_projector(h: &HermitianOperator, cutoff: f64) -> HermitianOperator {
    let e = h.eigh();
    let cut = e.cutoff(cutoff);
    let w: Vec<f64> = e.eigenvalues.iter().map(|&l| if l > cut { 1.0 } else { 0.0 }).collect();
    HermitianOperator { matrix: e.reconstruct_with(&w) }
}

/// Columns spanning supp(h).
pub fn support_isometry(h: &HermitianOperator, cutoff: f64) -> ComplexMatrix {
    h.eigh().support_isometry(cutoff)
}

pub fn root_fidelity(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch("fidelity arguments".into()));
    }
    rho.check_psd()?;
    sigma.check_psd()?;
    let half = |h: &HermitianOperator| {
        let e = h.eigh();
        let cut = e.cutoff(SUPPORT_CUTOFF);
        let keep: Vec<usize> = (0..e.eigenvalues.len()).filter(|&k| e.eigenvalues[k] > cut).collect();
        ComplexMatrix::from_fn(h.dim(), keep.len(), |i, j| {
            e.eigenvectors[(i, keep[j])] * e.eigenvalues[keep[j]].sqrt()
        })
    };
    let a = half(rho);
    let b = half(sigma);
    if a.ncols() == 0 || b.ncols() == 0 {
        return Ok(0.0);
    }
    // ‖√ρ√σ‖₁ = ‖A†B‖₁; square the smaller side so exact zeros stay structural.
    let k = a.adjoint() * b;
    let g = if k.nrows() <= k.ncols() { &k * k.adjoint() } else { k.adjoint() * &k };
    let ev = hermitian_part(&g).symmetric_eigenvalues();
    Ok(ev.iter().map(|&x| x.max(0.0).sqrt()).sum())
}

/// Scalar functions with the divided differences the Fréchet gradients need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFn {
    /// Natural logarithm.
    Ln,
    Power(f64),
}

impl ScalarFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ScalarFn::Ln => x.ln(),
            ScalarFn::Power(p) => x.powf(p),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ScalarFn::Ln => 1.0 / x,
            ScalarFn::Power(p) => p * x.powf(p - 1.0),
        }
    }

    /// (f(a) − f(b))/(a − b), stable for a ≈ b.
    pub fn divided_difference(self, a: f64, b: f64) -> f64 {
        if a == b {
            return self.derivative(a);
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        let t = (hi - lo) / lo;
        match self {
            ScalarFn::Ln => t.ln_1p() / (hi - lo),
            ScalarFn::Power(p) => lo.powf(p - 1.0) * (p * t.ln_1p()).exp_m1() / t,
        }
    }
}

/// G with tr[G Δ] = d/dt tr[ρ f(σ + tΔ)] at t=0, restricted to supp(σ).
pub fn frechet_gradient(sigma: &SpectralDecomposition, rho: &ComplexMatrix, f: ScalarFn) -> ComplexMatrix {
    frechet_gradient_above(sigma, rho, f, sigma.cutoff(SUPPORT_CUTOFF))
}

/// As [`frechet_gradient`] but keeping every strictly positive eigenvalue (for
/// regularized arguments whose small eigenvalues are meaningful).
pub fn frechet_gradient_full(sigma: &SpectralDecomposition, rho: &ComplexMatrix, f: ScalarFn) -> ComplexMatrix {
    frechet_gradient_above(sigma, rho, f, 0.0)
}

fn frechet_gradient_above(sigma: &SpectralDecomposition, rho: &ComplexMatrix, f: ScalarFn, cut: f64) -> ComplexMatrix {
    let keep: Vec<usize> = (0..sigma.eigenvalues.len())
        .filter(|&k| sigma.eigenvalues[k] > cut)
        .collect();
    let n = sigma.eigenvectors.nrows();
    let u = ComplexMatrix::from_fn(n, keep.len(), |i, j| sigma.eigenvectors[(i, keep[j])]);
    let lam: Vec<f64> = keep.iter().map(|&k| sigma.eigenvalues[k]).collect();
    let mut rt = u.adjoint() * rho * &u;
    for j in 0..lam.len() {
        for i in 0..lam.len() {
            rt[(i, j)] *= f.divided_difference(lam[i], lam[j]);
        }
    }
    hermitian_part(&(&u * rt * u.adjoint()))
}

/// Gradient of σ ↦ tr[ρ ln σ] (natural log), by Daleckii–Krein divided differences.
pub fn log_frechet_gradient(sigma: &HermitianOperator, rho: &HermitianOperator) -> Result<HermitianOperator> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch("gradient arguments".into()));
    }
    let e = sigma.eigh();
    let pi = e.support_isometry(SUPPORT_CUTOFF);
    let inside = trace_re(&(pi.adjoint() * rho.matrix() * &pi));
    if rho.trace() - inside > SUPPORT_CUTOFF * rho.trace().abs().max(1.0) {
        return Err(Error::SupportViolation);
    }
    Ok(HermitianOperator { matrix: frechet_gradient(&e, rho.matrix(), ScalarFn::Ln) })
}
