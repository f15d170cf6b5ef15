//! Unextendible-entanglement measures.
//!
//! E_max, E_min and F^u come from one SDP each; E^u (relative entropy) and the
//! Petz α-measures are convex in the extension and are minimized by a fully
//! corrective Frank–Wolfe method whose linear oracle is an SDP over the same set.

use std::f64::consts::LN_2;

use crate::conic::{
    build_emax, build_emin, build_extension_linear, build_fidelity, dense_entries, solve_with, two_extendible_feasibility,
    ConicSolution, ExtensionProgram, Feasibility, Prepared, SolverOptions, Status, EXT_BLOCK,
};
use crate::divergences::{renyi_entropy_of_spectrum, MiFamily};
use crate::error::{Error, Result};
use crate::linalg::{eigh, frechet_gradient_full, hermitian_part, identity, inner, ComplexMatrix, ScalarFn};
use crate::states::BipartiteState;

mod central;

use central::CentralPath;

#[derive(Clone, Debug)]
pub struct MeasureOptions {
    /// Frank–Wolfe stopping gap, in bits of the reported measure.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative gap passed to the conic solver.
    pub sdp_tol: f64,
    /// Floor ε·I added to tr_B σ before logarithms and negative powers.
    pub reg: f64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self { tol: 1e-5, max_iter: 500, sdp_tol: 1e-9, reg: 1e-12 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    pub converged: bool,
    pub iterations: usize,
    /// SDP: |primal − dual| of the solve. Frank–Wolfe: final duality gap in bits.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Certified lower bound on the value (SDP dual or Frank–Wolfe bound), same units as `value`.
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Clone, Debug)]
pub struct MeasureResult {
    /// Bits, except for the fidelity which is reported raw in [0, 1].
    pub value: f64,
    /// Optimal (or final) extension σ_ABB′.
    pub optimal_extension: Option<ComplexMatrix>,
    /// max-entry residual of tr_B′σ − ρ.
    pub extension_residual: Option<f64>,
    /// Dual multipliers of the SDP, when the measure came from one.
    pub dual_certificate: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

fn sdp_opts(tol: f64) -> SolverOptions {
    SolverOptions { gap_tol: tol, ..SolverOptions::default() }
}

fn bits_from_sqrt(x: f64) -> f64 {
    (-0.5 * x.log2()).max(0.0)
}

fn from_sdp(ep: &ExtensionProgram, sol: ConicSolution, map: impl Fn(f64) -> f64) -> MeasureResult {
    let sigma_t = hermitian_part(&sol.x[EXT_BLOCK]);
    let residual = ep.extension_residual(&sigma_t);
    let (a, b) = (map(sol.primal_objective), map(sol.dual_objective));
    MeasureResult {
        value: a,
        optimal_extension: Some(ep.lift(&sigma_t)),
        extension_residual: Some(residual),
        dual_certificate: Some(sol.y.clone()),
        diagnostics: Diagnostics {
            converged: sol.status == Status::Optimal,
            iterations: sol.iterations,
            gap: (sol.primal_objective - sol.dual_objective).abs(),
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            lower_bound: a.min(b),
            upper_bound: a.max(b),
        },
    }
}

fn sdp_measure(
    rho: &BipartiteState,
    opts: &MeasureOptions,
    build: fn(&ExtensionProgram) -> crate::conic::ConicProblem,
    map: fn(f64) -> f64,
) -> Result<MeasureResult> {
    let ep = ExtensionProgram::new(rho)?;
    let sol = solve_with(&build(&ep), &sdp_opts(opts.sdp_tol))?;
    if matches!(sol.status, Status::Infeasible | Status::Unbounded) {
        return Err(Error::Solver(format!("extension program reported {:?}", sol.status)));
    }
    Ok(from_sdp(&ep, sol, map))
}

/// E_max^u = −½ log₂ λ* with λ* the optimum of the max-primal SDP.
pub fn e_max_u(rho: &BipartiteState) -> Result<MeasureResult> {
    e_max_u_with(rho, &MeasureOptions::default())
}

pub fn e_max_u_with(rho: &BipartiteState, opts: &MeasureOptions) -> Result<MeasureResult> {
    sdp_measure(rho, opts, build_emax, bits_from_sqrt)
}

/// E_min^u = −½ log₂ max tr[Π^ρ σ_AB′].
pub fn e_min_u(rho: &BipartiteState) -> Result<MeasureResult> {
    e_min_u_with(rho, &MeasureOptions::default())
}

pub fn e_min_u_with(rho: &BipartiteState, opts: &MeasureOptions) -> Result<MeasureResult> {
    sdp_measure(rho, opts, build_emin, bits_from_sqrt)
}

/// F^u, the largest root fidelity between ρ and a free state; raw value in [0, 1].
pub fn unext_fidelity(rho: &BipartiteState) -> Result<MeasureResult> {
    unext_fidelity_with(rho, &MeasureOptions::default())
}

pub fn unext_fidelity_with(rho: &BipartiteState, opts: &MeasureOptions) -> Result<MeasureResult> {
    sdp_measure(rho, opts, build_fidelity, |f| f.clamp(0.0, 1.0))
}

/// Ẽ_{1/2}^u = −log₂ F^u, in bits.
pub fn e_tilde_half_u(rho: &BipartiteState) -> Result<MeasureResult> {
    let mut r = unext_fidelity(rho)?;
    let to_bits = |f: f64| (-f.log2()).max(0.0);
    r.value = to_bits(r.value);
    let (lo, hi) = (r.diagnostics.lower_bound, r.diagnostics.upper_bound);
    r.diagnostics.lower_bound = to_bits(hi);
    r.diagnostics.upper_bound = to_bits(lo);
    Ok(r)
}

pub fn is_two_extendible(rho: &BipartiteState) -> Result<Feasibility> {
    let ep = ExtensionProgram::new(rho)?;
    two_extendible_feasibility(&ep, 1e-8)
}

/// Closed forms for pure states: Petz → H_γ, γ = (2−α)/α; sandwiched → H_β,
/// β = 1/(2α−1) (α = ∞ gives β = 0); geometric → H₀.
pub fn pure_state_measures(psi: &BipartiteState, family: MiFamily, alpha: f64) -> Result<f64> {
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("state is not pure (purity {purity})")));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    let spectrum = psi.marginal_a().eigh().eigenvalues;
    let order = match family {
        MiFamily::Petz => {
            if alpha > 2.0 {
                return Err(Error::InvalidParameter(format!("Petz alpha = {alpha} outside (0, 2]")));
            }
            (2.0 - alpha) / alpha
        }
        MiFamily::Sandwiched => {
            if alpha < 0.5 {
                return Err(Error::InvalidParameter(format!("sandwiched alpha = {alpha} below 1/2")));
            }
            if alpha.is_infinite() {
                0.0
            } else if alpha == 0.5 {
                f64::INFINITY
            } else {
                1.0 / (2.0 * alpha - 1.0)
            }
        }
        MiFamily::Geometric => 0.0,
    };
    Ok(renyi_entropy_of_spectrum(&spectrum, order))
}

/// Outcome of the Frank–Wolfe engine on a convex objective h(τ̃) of the compressed marginal.
struct FwOutcome {
    sigma_t: ComplexMatrix,
    h: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 * hi.max(1e-300) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    // Endpoints win ties so that atoms can be dropped exactly.
    [(f(0.0), 0.0), (f(hi), hi), (f(x), x)].into_iter().min_by(|p, q| p.0.total_cmp(&q.0)).map(|p| p.1).unwrap()
}

fn combine(atoms: &[ComplexMatrix], w: &[f64]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(atoms[0].nrows(), atoms[0].ncols());
    for (a, &wi) in atoms.iter().zip(w) {
        if wi != 0.0 {
            out += a * crate::linalg::c(wi);
        }
    }
    out
}

/// Fully corrective (pairwise) Frank–Wolfe over the extension spectrahedron.
/// `tol_of(h)` is the stopping gap in h units at objective value h.
fn frank_wolfe(
    ep: &ExtensionProgram,
    h: &dyn Fn(&ComplexMatrix) -> f64,
    grad: &dyn Fn(&ComplexMatrix) -> ComplexMatrix,
    tol_of: &dyn Fn(f64) -> f64,
    opts: &MeasureOptions,
) -> Result<FwOutcome> {
    let n = ep.ext_dim();
    let template = build_extension_linear(ep, &ComplexMatrix::zeros(n, n));
    let lmo = Prepared::new(&template, 1e-10)?;
    let sdp = sdp_opts(1e-10);
    // Linear oracle at τ̃: the minimizing extension, its marginal and the certified gap.
    let oracle = |t: &ComplexMatrix| {
        let g = grad(t);
        let wmat = hermitian_part(&ep.reduced_marginal_adjoint(&g));
        let sol = lmo.solve(Some(&dense_entries(EXT_BLOCK, &wmat)), &sdp);
        let s = hermitian_part(&sol.x[EXT_BLOCK]);
        let ts = ep.reduced_marginal(&s);
        let at_s = inner(&g, &ts);
        let lower = if sol.status == Status::Optimal { at_s.min(sol.dual_objective) } else { at_s };
        ((inner(&g, t) - lower).max(0.0), s, ts)
    };
    let mut s0 = ep.initial_extension();
    let mut iterations = 0;
    if let Some(cp) = CentralPath::new(ep) {
        let mut sigma = cp.start();
        let mut mu = 0.1 / n as f64;
        for _ in 0..20 {
            iterations += cp.centre(h, grad, &mut sigma, mu, 50);
            let t = ep.reduced_marginal(&sigma);
            let hv = h(&t);
            let (gap, _, _) = oracle(&t);
            if gap <= tol_of(hv) {
                return Ok(FwOutcome { sigma_t: sigma, h: hv, gap, iterations, converged: true });
            }
            s0 = sigma.clone();
            mu *= 0.1;
        }
    }
    let mut sig = vec![s0.clone()];
    let mut tau = vec![ep.reduced_marginal(&s0)];
    let mut w = vec![1.0];
    let mut gap = f64::INFINITY;
    let mut t = combine(&tau, &w);
    let mut hv = h(&t);
    for it in iterations..opts.max_iter {
        let (g_now, s, ts) = oracle(&t);
        gap = g_now;
        if gap <= tol_of(hv) {
            return Ok(FwOutcome { sigma_t: combine(&sig, &w), h: hv, gap, iterations: it, converged: true });
        }
        sig.push(s);
        tau.push(ts);
        w.push(0.0);
        // Corrective pairwise steps over the current atoms.
        for _ in 0..2000 {
            let g = grad(&t);
            let scores: Vec<f64> = tau.iter().map(|a| inner(&g, a)).collect();
            let best = (0..scores.len()).min_by(|&a, &b| scores[a].total_cmp(&scores[b])).unwrap();
            let worst = (0..scores.len())
                .filter(|&k| w[k] > 0.0)
                .max_by(|&a, &b| scores[a].total_cmp(&scores[b]))
                .unwrap();
            if scores[worst] - scores[best] <= 0.01 * tol_of(hv) || best == worst {
                break;
            }
            let d = &tau[best] - &tau[worst];
            let step = golden_section(|x| h(&(&t + &d * crate::linalg::c(x))), w[worst]);
            if step <= 0.0 {
                break;
            }
            w[best] += step;
            w[worst] -= step;
            if w[worst] < 1e-15 {
                w[worst] = 0.0;
            }
            t = combine(&tau, &w);
            hv = h(&t);
        }
        // Drop unused atoms.
        let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 0.0).collect();
        sig = keep.iter().map(|&k| sig[k].clone()).collect();
        tau = keep.iter().map(|&k| tau[k].clone()).collect();
        w = keep.iter().map(|&k| w[k]).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        t = combine(&tau, &w);
        hv = h(&t);
    }
    Ok(FwOutcome { sigma_t: combine(&sig, &w), h: hv, gap, iterations: opts.max_iter, converged: false })
}

fn regularized(t: &ComplexMatrix, reg: f64) -> ComplexMatrix {
    hermitian_part(t) + identity(t.nrows()) * crate::linalg::c(reg)
}

fn fw_result(ep: &ExtensionProgram, out: &FwOutcome, value: f64, gap_bits: f64) -> MeasureResult {
    MeasureResult {
        value,
        optimal_extension: Some(ep.lift(&out.sigma_t)),
        extension_residual: Some(ep.extension_residual(&out.sigma_t)),
        dual_certificate: None,
        diagnostics: Diagnostics {
            converged: out.converged,
            iterations: out.iterations,
            gap: gap_bits,
            primal_residual: ep.extension_residual(&out.sigma_t),
            dual_residual: 0.0,
            lower_bound: (value - gap_bits).max(0.0),
            upper_bound: value,
        },
    }
}

/// Frank–Wolfe only approaches a zero optimum to within its gap. When the bound
/// cannot exclude zero, a symmetric extension (if one exists) makes it exact.
fn snap_to_zero(ep: &ExtensionProgram, r: MeasureResult) -> Result<MeasureResult> {
    if r.diagnostics.lower_bound > 1e-9 {
        return Ok(r);
    }
    match two_extendible_feasibility(ep, 1e-9)? {
        Feasibility::Feasible { extension, residual } if residual <= 1e-7 => Ok(MeasureResult {
            value: 0.0,
            optimal_extension: Some(extension),
            extension_residual: Some(residual),
            dual_certificate: None,
            diagnostics: Diagnostics { gap: 0.0, lower_bound: 0.0, upper_bound: 0.0, converged: true, ..r.diagnostics },
        }),
        _ => Ok(r),
    }
}

/// E^u = ½ min D(ρ_AB ‖ tr_B σ_ABB′) over extensions, in bits.
pub fn e_rel_u(rho: &BipartiteState, opts: &MeasureOptions) -> Result<MeasureResult> {
    let ep = ExtensionProgram::new(rho)?;
    let rho_hat = ep.rho_hat().clone();
    let re = eigh(&rho_hat);
    // tr[ρ ln ρ] in nats.
    let neg_entropy: f64 = re.eigenvalues.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum();
    let reg = opts.reg;
    let h = |t: &ComplexMatrix| -> f64 {
        let e = eigh(&regularized(t, reg));
        let p = e.eigenvectors.adjoint() * &rho_hat * &e.eigenvectors;
        -e.eigenvalues.iter().enumerate().map(|(k, &l)| p[(k, k)].re * l.ln()).sum::<f64>()
    };
    let grad = |t: &ComplexMatrix| -> ComplexMatrix {
        let e = eigh(&regularized(t, reg));
        -frechet_gradient_full(&e, &rho_hat, ScalarFn::Ln)
    };
    // ½·(h + tr ρ ln ρ)/ln 2 bits: a gap of g nats in h is g/(2 ln 2) bits.
    let tol_of = |_h: f64| opts.tol * 2.0 * LN_2;
    let out = frank_wolfe(&ep, &h, &grad, &tol_of, opts)?;
    let value = (0.5 * (out.h + neg_entropy) / LN_2).max(0.0);
    let gap_bits = out.gap / (2.0 * LN_2);
    snap_to_zero(&ep, fw_result(&ep, &out, value, gap_bits))
}

/// E_α^u = ½ extremum of D_α(ρ‖tr_B σ) for α ∈ (0,1) ∪ (1,2], in bits.
pub fn petz_alpha_u(rho: &BipartiteState, alpha: f64, opts: &MeasureOptions) -> Result<MeasureResult> {
    if alpha == 1.0 {
        return e_rel_u(rho, opts);
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::InvalidParameter(format!("Petz alpha = {alpha} outside (0,1)∪(1,2]")));
    }
    let ep = ExtensionProgram::new(rho)?;
    let re = eigh(ep.rho_hat());
    let rho_a = re.reconstruct_with(&re.eigenvalues.iter().map(|&x| if x > 0.0 { x.powf(alpha) } else { 0.0 }).collect::<Vec<_>>());
    let reg = opts.reg;
    // α > 1: minimize Q (convex); α < 1: maximize Q (concave), i.e. minimize −Q.
    let sgn = if alpha > 1.0 { 1.0 } else { -1.0 };
    let p = 1.0 - alpha;
    let h = |t: &ComplexMatrix| -> f64 {
        let e = eigh(&regularized(t, reg));
        let tp = e.reconstruct_with(&e.eigenvalues.iter().map(|&l| l.powf(p)).collect::<Vec<_>>());
        sgn * inner(&rho_a, &tp)
    };
    let grad = |t: &ComplexMatrix| -> ComplexMatrix {
        let e = eigh(&regularized(t, reg));
        frechet_gradient_full(&e, &rho_a, ScalarFn::Power(p)) * crate::linalg::c(sgn)
    };
    let scale = 2.0 * (alpha - 1.0).abs() * LN_2;
    let tol_of = |hv: f64| opts.tol * scale * hv.abs();
    let out = frank_wolfe(&ep, &h, &grad, &tol_of, opts)?;
    let q = sgn * out.h;
    let value = (0.5 * q.log2() / (alpha - 1.0)).max(0.0);
    let gap_bits = out.gap / (scale * q.abs());
    snap_to_zero(&ep, fw_result(&ep, &out, value, gap_bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{erased, max_entangled, pure_from_schmidt};

    #[test]
    fn bell_state_values() {
        let phi = max_entangled(2).unwrap();
        assert!((e_max_u(&phi).unwrap().value - 1.0).abs() < 1e-7);
        assert!((e_min_u(&phi).unwrap().value - 1.0).abs() < 1e-7);
        assert!((unext_fidelity(&phi).unwrap().value - 0.5).abs() < 1e-7);
        let r = e_rel_u(&phi, &MeasureOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5, "{:?}", r.diagnostics);
    }

    #[test]
    fn erased_relative_entropy() {
        let r = e_rel_u(&erased(0.3).unwrap(), &MeasureOptions::default()).unwrap();
        assert!((r.value - 0.7).abs() < 1e-4, "{} {:?}", r.value, r.diagnostics);
    }

    #[test]
    fn pure_petz() {
        let psi = pure_from_schmidt(&[0.7, 0.3], None).unwrap();
        for alpha in [0.5, 1.5] {
            let r = petz_alpha_u(&psi, alpha, &MeasureOptions::default()).unwrap();
            let want = pure_state_measures(&psi, MiFamily::Petz, alpha).unwrap();
            assert!((r.value - want).abs() < 1e-4, "{alpha}: {} vs {want}", r.value);
        }
    }
}
