//! The three semidefinite primal/dual pairs over the extension set, plus the
//! two-extendibility feasibility problem and the linear program used by Frank–Wolfe.
//!
//! All programs are written on the facially reduced coordinates of
//! [`ExtensionProgram`]; every dual is the exact Lagrange dual of its primal, which
//! for full-rank ρ is the textbook form with Y_AB, X_AB′ etc.

use super::extension::{herm_basis, ExtensionProgram};
use super::{dense_entries, ConicProblem, ConicSolution, Entry, LmiBuilder, PrimalBuilder, Sense, SparseOp, Status};
use crate::error::Result;
use crate::linalg::{eigh, hermitian_part, inner, ComplexMatrix, C64};

/// Block of σ̃ in every primal builder.
pub const EXT_BLOCK: usize = 0;
/// Scalar λ block of [`build_emax`].
pub const EMAX_LAMBDA_BLOCK: usize = 2;
/// The 2×2 block matrix [[ρ̃, X], [X†, T̃(σ̃)]] of [`build_fidelity`].
pub const FID_MATRIX_BLOCK: usize = 1;

type Basis = Vec<(usize, usize, C64)>;

fn place(block: usize, h: &Basis, offset: usize) -> SparseOp {
    h.iter().map(|&(i, j, v)| Entry { block, row: i + offset, col: j + offset, value: v }).collect()
}

fn basis_inner(h: &Basis, m: &ComplexMatrix) -> f64 {
    h.iter().map(|&(i, j, v)| (v * m[(j, i)]).re).sum()
}

/// H ⊗ I_B′ placed on the σ̃ block.
fn tensor_identity(block: usize, h: &Basis, d_b: usize) -> SparseOp {
    let mut out = Vec::with_capacity(h.len() * d_b);
    for &(i, j, v) in h {
        for bp in 0..d_b {
            out.push(Entry { block, row: i * d_b + bp, col: j * d_b + bp, value: v });
        }
    }
    out
}

fn from_coords(basis: &[Basis], y: &[f64], n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for (h, &c) in basis.iter().zip(y) {
        for &(i, j, v) in h {
            m[(i, j)] += v * c;
        }
    }
    m
}

/// maximize λ s.t. λρ ⪯ tr_B σ, tr_B′ σ = ρ, σ ⪰ 0. Optimum is 2^{−2E_max}.
pub fn build_emax(ep: &ExtensionProgram) -> ConicProblem {
    let mut pb = PrimalBuilder::new(Sense::Maximize);
    let s = pb.block(ep.ext_dim());
    let z = pb.block(ep.marg_dim());
    let l = pb.block(1);
    debug_assert_eq!((s, l), (EXT_BLOCK, EMAX_LAMBDA_BLOCK));
    for (row, rhs) in ep.extension_rows(s) {
        pb.constraint(row, rhs);
    }
    for h in herm_basis(ep.marg_dim()) {
        let mut row = ep.reduced_adjoint_sparse(s, &h);
        row.extend(place(z, &h, 0).into_iter().map(|e| Entry { value: -e.value, ..e }));
        let w = basis_inner(&h, ep.rho_hat());
        if w != 0.0 {
            row.push(Entry { block: l, row: 0, col: 0, value: C64::new(-w, 0.0) });
        }
        pb.constraint(row, 0.0);
    }
    pb.objective(vec![Entry { block: l, row: 0, col: 0, value: C64::new(1.0, 0.0) }]);
    pb.finish("emax primal")
}

/// minimize tr[ρY] s.t. X ⪰ 0, Y⊗I_B′ ⪰ tr_B-adjoint(X), tr[ρX] ≥ 1.
pub fn build_emax_dual(ep: &ExtensionProgram) -> ConicProblem {
    let mut lb = LmiBuilder::new(Sense::Minimize);
    let bx = lb.block(ep.marg_dim());
    let bs = lb.block(ep.ext_dim());
    let bl = lb.block(1);
    for h in herm_basis(ep.rank()) {
        let k = lb.var(basis_inner(&h, ep.rho_tilde()));
        lb.coeff(k, tensor_identity(bs, &h, ep.d_b()));
    }
    for h in herm_basis(ep.marg_dim()) {
        let k = lb.var(0.0);
        lb.coeff(k, place(bx, &h, 0));
        let adj = ep.reduced_adjoint_sparse(bs, &h);
        lb.coeff(k, adj.into_iter().map(|e| Entry { value: -e.value, ..e }).collect());
        let w = basis_inner(&h, ep.rho_hat());
        if w != 0.0 {
            lb.coeff(k, vec![Entry { block: bl, row: 0, col: 0, value: C64::new(w, 0.0) }]);
        }
    }
    lb.constant(vec![Entry { block: bl, row: 0, col: 0, value: C64::new(-1.0, 0.0) }]);
    lb.finish("emax dual")
}

/// Π^ρ on the compressed AB′ space, pulled back to σ̃.
fn projector_objective(ep: &ExtensionProgram) -> ComplexMatrix {
    let u = ep.marginal_isometry();
    let v = ep.support_isometry();
    let pu = u.adjoint() * v;
    let proj = hermitian_part(&(&pu * pu.adjoint()));
    ep.reduced_marginal_adjoint(&proj)
}

/// maximize tr[Π^ρ tr_B σ] over the extension set. Optimum is 2^{−2E_min}.
pub fn build_emin(ep: &ExtensionProgram) -> ConicProblem {
    let mut pb = PrimalBuilder::new(Sense::Maximize);
    let s = pb.block(ep.ext_dim());
    for (row, rhs) in ep.extension_rows(s) {
        pb.constraint(row, rhs);
    }
    pb.objective(dense_entries(s, &projector_objective(ep)));
    pb.finish("emin primal")
}

/// minimize tr[ρX] s.t. X⊗I_B′ ⪰ tr_B-adjoint(Π^ρ).
pub fn build_emin_dual(ep: &ExtensionProgram) -> ConicProblem {
    let mut lb = LmiBuilder::new(Sense::Minimize);
    let bs = lb.block(ep.ext_dim());
    for h in herm_basis(ep.rank()) {
        let k = lb.var(basis_inner(&h, ep.rho_tilde()));
        lb.coeff(k, tensor_identity(bs, &h, ep.d_b()));
    }
    let p = projector_objective(ep);
    lb.constant(dense_entries(bs, &(-p)));
    lb.finish("emin dual")
}

fn fidelity_cost(ep: &ExtensionProgram) -> ComplexMatrix {
    let (r, q) = (ep.rank(), ep.marg_dim());
    let vu = ep.support_isometry().adjoint() * ep.marginal_isometry();
    let mut c = ComplexMatrix::zeros(r + q, r + q);
    for i in 0..r {
        for j in 0..q {
            c[(i, r + j)] = vu[(i, j)] * 0.5;
            c[(r + j, i)] = vu[(i, j)].conj() * 0.5;
        }
    }
    c
}

/// maximize Re tr X s.t. [[ρ, X], [X†, tr_B σ]] ⪰ 0 over the extension set.
pub fn build_fidelity(ep: &ExtensionProgram) -> ConicProblem {
    let (r, q) = (ep.rank(), ep.marg_dim());
    let mut pb = PrimalBuilder::new(Sense::Maximize);
    let s = pb.block(ep.ext_dim());
    let m = pb.block(r + q);
    debug_assert_eq!(m, FID_MATRIX_BLOCK);
    for h in herm_basis(r) {
        pb.constraint(place(m, &h, 0), basis_inner(&h, ep.rho_tilde()));
    }
    for h in herm_basis(q) {
        let mut row = place(m, &h, r);
        row.extend(ep.reduced_adjoint_sparse(s, &h).into_iter().map(|e| Entry { value: -e.value, ..e }));
        pb.constraint(row, 0.0);
    }
    for (row, rhs) in ep.extension_rows(s) {
        pb.constraint(row, rhs);
    }
    pb.objective(dense_entries(m, &fidelity_cost(ep)));
    pb.finish("fidelity primal")
}

/// Linear (pre-equalization) dual: minimize tr[ρ(Y₁₁ + Y₃₃)] s.t.
/// diag(Y₁₁, Y₂₂) ⪰ C and Y₃₃⊗I_B′ ⪰ tr_B-adjoint(Y₂₂).
pub fn build_fidelity_dual(ep: &ExtensionProgram) -> ConicProblem {
    let (r, q) = (ep.rank(), ep.marg_dim());
    let mut lb = LmiBuilder::new(Sense::Minimize);
    let bm = lb.block(r + q);
    let bs = lb.block(ep.ext_dim());
    for h in herm_basis(r) {
        let k = lb.var(basis_inner(&h, ep.rho_tilde()));
        lb.coeff(k, place(bm, &h, 0));
    }
    for h in herm_basis(q) {
        let k = lb.var(0.0);
        lb.coeff(k, place(bm, &h, r));
        lb.coeff(k, ep.reduced_adjoint_sparse(bs, &h).into_iter().map(|e| Entry { value: -e.value, ..e }).collect());
    }
    for h in herm_basis(r) {
        let k = lb.var(basis_inner(&h, ep.rho_tilde()));
        lb.coeff(k, tensor_identity(bs, &h, ep.d_b()));
    }
    lb.constant(dense_entries(bm, &(-fidelity_cost(ep))));
    lb.finish("fidelity dual")
}

/// Geometric-mean value √(tr[Y₂₂⁻¹ρ]·tr[Y₃₃ρ]) of a solved [`build_fidelity_dual`]:
/// the optimal Y₁₁ given Y₂₂ is ¼Y₂₂⁻¹ (Schur complement), and rescaling
/// (Y₂₂, Y₃₃) → (tY₂₂, tY₃₃) with t = √(a/b) equalizes ¼a/t + tb = √(ab).
pub fn fidelity_dual_geometric_value(ep: &ExtensionProgram, sol: &ConicSolution) -> f64 {
    let (r, q) = (ep.rank(), ep.marg_dim());
    let y22 = from_coords(&herm_basis(q), &sol.y[r * r..r * r + q * q], q);
    let y33 = from_coords(&herm_basis(r), &sol.y[r * r + q * q..], r);
    let e = eigh(&hermitian_part(&y22));
    let floor = 1e-14 * e.max_eigenvalue().abs().max(1e-300);
    let inv = e.reconstruct_with(&e.eigenvalues.iter().map(|&l| 1.0 / l.max(floor)).collect::<Vec<_>>());
    let a = inner(&inv, ep.rho_hat());
    let b = inner(&y33, ep.rho_tilde());
    (a * b).max(0.0).sqrt()
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    /// A symmetric extension σ_ABB′ (full space) and its max-entry constraint residual.
    Feasible { extension: ComplexMatrix, residual: f64 },
    Infeasible,
    Indeterminate { primal_residual: f64, dual_residual: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> Option<bool> {
        match self {
            Feasibility::Feasible { .. } => Some(true),
            Feasibility::Infeasible => Some(false),
            Feasibility::Indeterminate { .. } => None,
        }
    }
}

/// The constraint set {σ ⪰ 0 : tr_B′σ = ρ, tr_Bσ = ρ} as a zero-objective program.
pub fn build_two_extendible(ep: &ExtensionProgram) -> ConicProblem {
    let mut pb = PrimalBuilder::new(Sense::Minimize);
    let s = pb.block(ep.ext_dim());
    for (row, rhs) in ep.extension_rows(s) {
        pb.constraint(row, rhs);
    }
    for h in herm_basis(ep.marg_dim()) {
        let rhs = basis_inner(&h, ep.rho_hat());
        pb.constraint(ep.reduced_adjoint_sparse(s, &h), rhs);
    }
    pb.finish("two-extendibility")
}

pub fn two_extendible_feasibility(ep: &ExtensionProgram, tol: f64) -> Result<Feasibility> {
    let p = build_two_extendible(ep);
    let sol = super::solve(&p, tol)?;
    Ok(match sol.status {
        Status::Optimal => {
            let st = &sol.x[EXT_BLOCK];
            let t_res = (ep.reduced_marginal(st) - ep.rho_hat()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let residual = ep.extension_residual(st).max(t_res);
            Feasibility::Feasible { extension: ep.lift(st), residual }
        }
        Status::Infeasible => Feasibility::Infeasible,
        _ => Feasibility::Indeterminate { primal_residual: sol.primal_residual, dual_residual: sol.dual_residual },
    })
}

/// minimize ⟨W, σ̃⟩ over the extension set (the Frank–Wolfe oracle template).
pub fn build_extension_linear(ep: &ExtensionProgram, w: &ComplexMatrix) -> ConicProblem {
    let mut pb = PrimalBuilder::new(Sense::Minimize);
    let s = pb.block(ep.ext_dim());
    for (row, rhs) in ep.extension_rows(s) {
        pb.constraint(row, rhs);
    }
    pb.objective(dense_entries(s, w));
    pb.finish("extension linear oracle")
}
