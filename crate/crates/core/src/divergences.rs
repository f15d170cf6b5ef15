//! Quantum Rényi-type divergences and entropies, in bits.
//!
//! Infinite values are returned as `f64::INFINITY`, never as errors.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh, kron, support_power_of, trace_re, ComplexMatrix, HermitianOperator, SpectralDecomposition, C64,
    SUPPORT_CUTOFF,
};
use crate::states::{seeded_rng, BipartiteState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Petz,
    Sandwiched,
    Geometric,
    Max,
    Min,
    RelEnt,
    Bs,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceValue {
    /// Bits; `f64::INFINITY` when the support condition fails.
    pub value: f64,
    pub alpha: f64,
    pub family: Family,
}

impl DivergenceValue {
    fn new(value: f64, alpha: f64, family: Family) -> Self {
        Self { value, alpha, family }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

fn check_pair(omega: &HermitianOperator, tau: &HermitianOperator) -> Result<()> {
    if omega.dim() != tau.dim() {
        return Err(Error::DimensionMismatch(format!("divergence arguments {} vs {}", omega.dim(), tau.dim())));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha.is_nan() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

/// Whether supp(ω) ⊆ supp(τ), judged by the weight of ω outside supp(τ).
fn supported(omega: &HermitianOperator, tau_eig: &SpectralDecomposition) -> bool {
    let v = tau_eig.support_isometry(SUPPORT_CUTOFF);
    let inside = trace_re(&(v.adjoint() * omega.matrix() * &v));
    let total = omega.trace();
    total - inside <= SUPPORT_CUTOFF * total.abs().max(1.0)
}

/// log₂ Σ λ^α over positive eigenvalues, overflow-safe.
fn log2_power_sum(ev: &[f64], alpha: f64) -> f64 {
    let max = ev.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let cut = SUPPORT_CUTOFF * max;
    let s: f64 = ev.iter().filter(|&&x| x > cut).map(|&x| (x / max).powf(alpha)).sum();
    alpha * max.log2() + s.log2()
}

fn rescale(log2_q: f64, alpha: f64) -> f64 {
    if log2_q == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    log2_q / (alpha - 1.0)
}

/// log₂ tr[ω^α τ^{1−α}]; −∞ if the overlap vanishes.
pub fn petz_log2_q(omega: &HermitianOperator, tau: &HermitianOperator, alpha: f64) -> f64 {
    let wa = support_power_of(&omega.eigh(), alpha);
    let tb = support_power_of(&tau.eigh(), 1.0 - alpha);
    let q = crate::linalg::inner(wa.matrix(), tb.matrix());
    if q <= 0.0 {
        f64::NEG_INFINITY
    } else {
        q.log2()
    }
}

pub fn petz_renyi(omega: &HermitianOperator, tau: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        let d = relative_entropy(omega, tau)?;
        return Ok(DivergenceValue::new(d.value, 1.0, Family::Petz));
    }
    let te = tau.eigh();
    if alpha > 1.0 && !supported(omega, &te) {
        return Ok(DivergenceValue::new(f64::INFINITY, alpha, Family::Petz));
    }
    let wa = support_power_of(&omega.eigh(), alpha);
    let tb = support_power_of(&te, 1.0 - alpha);
    let q = crate::linalg::inner(wa.matrix(), tb.matrix());
    let lq = if q <= 0.0 { f64::NEG_INFINITY } else { q.log2() };
    Ok(DivergenceValue::new(rescale(lq, alpha), alpha, Family::Petz))
}

pub fn sandwiched_renyi(omega: &HermitianOperator, tau: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        let d = relative_entropy(omega, tau)?;
        return Ok(DivergenceValue::new(d.value, 1.0, Family::Sandwiched));
    }
    if alpha.is_infinite() {
        let d = max_relative_entropy(omega, tau)?;
        return Ok(DivergenceValue::new(d.value, alpha, Family::Sandwiched));
    }
    let te = tau.eigh();
    if alpha > 1.0 && !supported(omega, &te) {
        return Ok(DivergenceValue::new(f64::INFINITY, alpha, Family::Sandwiched));
    }
    let p = (1.0 - alpha) / (2.0 * alpha);
    let tp = support_power_of(&te, p);
    let m = tp.matrix() * omega.matrix() * tp.matrix();
    let ev = eigh(&m).eigenvalues;
    Ok(DivergenceValue::new(rescale(log2_power_sum(&ev, alpha), alpha), alpha, Family::Sandwiched))
}

pub fn geometric_renyi(omega: &HermitianOperator, tau: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        let d = bs_relative_entropy(omega, tau)?;
        return Ok(DivergenceValue::new(d.value, 1.0, Family::Geometric));
    }
    let te = tau.eigh();
    if !supported(omega, &te) {
        return Ok(DivergenceValue::new(f64::INFINITY, alpha, Family::Geometric));
    }
    let tih = support_power_of(&te, -0.5);
    let m = tih.matrix() * omega.matrix() * tih.matrix();
    let ma = support_power_of(&eigh(&m), alpha);
    let q = crate::linalg::inner(tau.matrix(), ma.matrix());
    let lq = if q <= 0.0 { f64::NEG_INFINITY } else { q.log2() };
    Ok(DivergenceValue::new(rescale(lq, alpha), alpha, Family::Geometric))
}

/// Σ λ log₂ λ over the spectrum.
fn neg_entropy(e: &SpectralDecomposition) -> f64 {
    let cut = e.cutoff(SUPPORT_CUTOFF);
    e.eigenvalues.iter().filter(|&&x| x > cut).map(|&x| x * x.log2()).sum()
}

/// tr[ω log₂ τ] on supp(τ).
fn cross_log(omega: &ComplexMatrix, te: &SpectralDecomposition) -> f64 {
    let cut = te.cutoff(SUPPORT_CUTOFF);
    let mut s = 0.0;
    for (k, &l) in te.eigenvalues.iter().enumerate() {
        if l <= cut {
            continue;
        }
        let u = te.eigenvectors.column(k);
        let w = (u.adjoint() * omega * u)[(0, 0)].re;
        s += w * l.log2();
    }
    s
}

pub fn relative_entropy(omega: &HermitianOperator, tau: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    let te = tau.eigh();
    if !supported(omega, &te) {
        return Ok(DivergenceValue::new(f64::INFINITY, 1.0, Family::RelEnt));
    }
    let v = neg_entropy(&omega.eigh()) - cross_log(omega.matrix(), &te);
    Ok(DivergenceValue::new(v, 1.0, Family::RelEnt))
}

pub fn bs_relative_entropy(omega: &HermitianOperator, tau: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    let te = tau.eigh();
    if !supported(omega, &te) {
        return Ok(DivergenceValue::new(f64::INFINITY, 1.0, Family::Bs));
    }
    let wh = support_power_of(&omega.eigh(), 0.5);
    let ti = support_power_of(&te, -1.0);
    let m = wh.matrix() * ti.matrix() * wh.matrix();
    let me = eigh(&m);
    let v = cross_log(omega.matrix(), &me);
    Ok(DivergenceValue::new(v, 1.0, Family::Bs))
}

pub fn max_relative_entropy(omega: &HermitianOperator, tau: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    let te = tau.eigh();
    if !supported(omega, &te) {
        return Ok(DivergenceValue::new(f64::INFINITY, f64::INFINITY, Family::Max));
    }
    let tih = support_power_of(&te, -0.5);
    let m = tih.matrix() * omega.matrix() * tih.matrix();
    let l = eigh(&m).max_eigenvalue();
    Ok(DivergenceValue::new(l.log2(), f64::INFINITY, Family::Max))
}

pub fn min_relative_entropy(omega: &HermitianOperator, tau: &HermitianOperator) -> Result<DivergenceValue> {
    check_pair(omega, tau)?;
    let v = omega.eigh().support_isometry(SUPPORT_CUTOFF);
    let t = trace_re(&(v.adjoint() * tau.matrix() * &v));
    let value = if t <= 0.0 { f64::INFINITY } else { -t.log2() };
    Ok(DivergenceValue::new(value, 0.0, Family::Min))
}

/// H_α in bits; α ∈ {0, 1, ∞} handled as limits.
pub fn renyi_entropy(rho: &HermitianOperator, alpha: f64) -> Result<f64> {
    if alpha < 0.0 || alpha.is_nan() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be nonnegative")));
    }
    let e = rho.eigh();
    Ok(renyi_entropy_of_spectrum(&e.eigenvalues, alpha))
}

pub fn renyi_entropy_of_spectrum(spectrum: &[f64], alpha: f64) -> f64 {
    let max = spectrum.iter().cloned().fold(0.0f64, f64::max);
    let cut = SUPPORT_CUTOFF * max;
    let p: Vec<f64> = spectrum.iter().cloned().filter(|&x| x > cut).collect();
    if alpha == 0.0 {
        (p.len() as f64).log2()
    } else if alpha == 1.0 {
        -p.iter().map(|&x| x * x.log2()).sum::<f64>()
    } else if alpha.is_infinite() {
        -max.log2()
    } else {
        log2_power_sum(&p, alpha) / (1.0 - alpha)
    }
}

fn pure_marginal(psi: &BipartiteState) -> Result<HermitianOperator> {
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("state is not pure (purity {purity})")));
    }
    Ok(psi.marginal_a())
}

/// 2·H_γ(ψ_A) with γ = (2−α)/α.
pub fn petz_mi_closed_form(psi: &BipartiteState, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = pure_marginal(psi)?;
    let gamma = ((2.0 - alpha) / alpha).max(0.0);
    Ok(2.0 * renyi_entropy(&a, gamma)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiFamily {
    Petz,
    Sandwiched,
    Geometric,
}

#[derive(Clone, Debug)]
pub struct BruteMi {
    pub value: f64,
    pub sigma_b: HermitianOperator,
    pub converged: bool,
}

pub fn divergence(family: MiFamily, omega: &HermitianOperator, tau: &HermitianOperator, alpha: f64) -> Result<DivergenceValue> {
    match family {
        MiFamily::Petz => petz_renyi(omega, tau, alpha),
        MiFamily::Sandwiched => sandwiched_renyi(omega, tau, alpha),
        MiFamily::Geometric => geometric_renyi(omega, tau, alpha),
    }
}

fn sigma_from_params(x: &[f64], d: usize) -> HermitianOperator {
    let mut l = ComplexMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in 0..=i {
            if i == j {
                l[(i, j)] = c(x[k]);
                k += 1;
            } else {
                l[(i, j)] = C64::new(x[k], x[k + 1]);
                k += 2;
            }
        }
    }
    let m = &l * l.adjoint();
    let tr = trace_re(&m);
    HermitianOperator::from_hermitian_part(&m.unscale(tr))
}

/// min over σ_B of D(ψ_AB ‖ ψ_A⊗σ_B), by multi-start Armijo gradient descent on a
/// Cholesky-factor parameterization. A verification oracle, not a fast path.
pub fn brute_mi(psi: &BipartiteState, family: MiFamily, alpha: f64, seed: u64) -> Result<BruteMi> {
    check_alpha(alpha)?;
    let d = psi.d_b();
    if d > 4 {
        return Err(Error::InvalidParameter(format!("brute_mi needs d_B <= 4, got {d}")));
    }
    let rho_a = psi.marginal_a();
    let np = d * d;
    let objective = |x: &[f64]| -> f64 {
        let s = sigma_from_params(x, d);
        let tau = HermitianOperator::from_hermitian_part(&kron(rho_a.matrix(), s.matrix()));
        match divergence(family, psi.rho(), &tau, alpha) {
            Ok(v) if v.value.is_finite() => v.value,
            _ => f64::INFINITY,
        }
    };
    let mut rng = seeded_rng(seed);
    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    for start in 0..8 {
        let mut x: Vec<f64> = if start == 0 {
            identity_params(d)
        } else {
            (0..np).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let (fx, conv) = armijo_descent(&objective, &mut x, 3000);
        if best.as_ref().is_none_or(|b| fx < b.0) {
            best = Some((fx, x, conv));
        }
    }
    let (value, x, converged) = best.expect("eight starts ran");
    Ok(BruteMi { value, sigma_b: sigma_from_params(&x, d), converged })
}

fn identity_params(d: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..=i {
            if i == j {
                x.push(1.0);
            } else {
                x.push(0.0);
                x.push(0.0);
            }
        }
    }
    x
}

/// Gradient descent with central-difference gradients and Armijo backtracking.
/// Returns the final value and whether the gradient test was met.
pub(crate) fn armijo_descent(f: &dyn Fn(&[f64]) -> f64, x: &mut [f64], max_iter: usize) -> (f64, bool) {
    let n = x.len();
    let mut fx = f(x);
    if !fx.is_finite() {
        return (fx, false);
    }
    let mut step = 1.0;
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    for _ in 0..max_iter {
        let h = 1e-6;
        for i in 0..n {
            let xi = x[i];
            x[i] = xi + h;
            let fp = f(x);
            x[i] = xi - h;
            let fm = f(x);
            x[i] = xi;
            g[i] = if fp.is_finite() && fm.is_finite() { (fp - fm) / (2.0 * h) } else { 0.0 };
        }
        let gn2: f64 = g.iter().map(|v| v * v).sum();
        if gn2.sqrt() < 1e-9 {
            return (fx, true);
        }
        let mut accepted = false;
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] - step * g[i];
            }
            let ft = f(&trial);
            if ft <= fx - 1e-4 * step * gn2 {
                x.copy_from_slice(&trial);
                let gain = fx - ft;
                fx = ft;
                step *= 2.0;
                accepted = true;
                if gain < 1e-15 * fx.abs().max(1.0) {
                    return (fx, true);
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return (fx, true);
        }
    }
    (fx, false)
}
