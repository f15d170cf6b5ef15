//! The extension set {σ_ABB′ ⪰ 0 : tr_B′ σ = ρ_AB} in facially reduced coordinates.
//!
//! Every feasible σ lives on supp(ρ) ⊗ B′, so the program variable is
//! σ̃ = (V⊗I)† σ (V⊗I) with V the support isometry of ρ; its AB′ marginal lives on
//! supp(ρ_A) ⊗ B′ and is compressed by U = V_A ⊗ I. Without this reduction rank-deficient
//! inputs (pure and erased states) leave the cone with empty interior.

use super::{dense_entries, Entry, SparseOp};
use crate::error::Result;
use crate::linalg::{identity, inner, kron, support_isometry, ComplexMatrix, C64, SUPPORT_CUTOFF};
use crate::states::BipartiteState;

/// Orthonormal basis of n×n Hermitian matrices: E_ii, (E_ij+E_ji)/√2, i(E_ij−E_ji)/√2.
pub fn herm_basis(n: usize) -> Vec<Vec<(usize, usize, C64)>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(vec![(i, i, C64::new(1.0, 0.0))]);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(vec![(i, j, C64::new(s, 0.0)), (j, i, C64::new(s, 0.0))]);
            out.push(vec![(i, j, C64::new(0.0, -s)), (j, i, C64::new(0.0, s))]);
        }
    }
    out
}

/// ⟨H, M⟩ for a sparse Hermitian H.
fn basis_inner(h: &[(usize, usize, C64)], m: &ComplexMatrix) -> f64 {
    h.iter().map(|&(i, j, v)| (v * m[(j, i)]).re).sum()
}

#[derive(Clone, Debug)]
pub struct ExtensionProgram {
    state: BipartiteState,
    d_a: usize,
    d_b: usize,
    /// n × r support isometry of ρ.
    v: ComplexMatrix,
    /// d_A × r_A support isometry of ρ_A.
    v_a: ComplexMatrix,
    rho_t: ComplexMatrix,
    rho_hat: ComplexMatrix,
    /// Sparse rows of K_b = (V_A† V_b) ⊗ I_B′, one list per b: T̃(σ̃) = Σ_b K_b σ̃ K_b†.
    k_rows: Vec<Vec<Vec<(usize, C64)>>>,
    full_rank: bool,
}

impl ExtensionProgram {
    pub fn new(state: &BipartiteState) -> Result<Self> {
        let (d_a, d_b) = (state.d_a(), state.d_b());
        // Full-rank factors keep the identity isometry so the coefficient rows stay sparse.
        let isometry = |h: &crate::linalg::HermitianOperator| {
            let v = support_isometry(h, SUPPORT_CUTOFF);
            if v.ncols() == h.dim() {
                identity(h.dim())
            } else {
                v
            }
        };
        let v = isometry(state.rho());
        let v_a = isometry(&state.marginal_a());
        let r = v.ncols();
        let r_a = v_a.ncols();
        let rho_t = crate::linalg::hermitian_part(&(v.adjoint() * state.matrix() * &v));
        let u = kron(&v_a, &identity(d_b));
        let rho_hat = crate::linalg::hermitian_part(&(u.adjoint() * state.matrix() * &u));
        let mut k_rows = Vec::with_capacity(d_b);
        for b in 0..d_b {
            let vb = ComplexMatrix::from_fn(d_a, r, |a, k| v[(a * d_b + b, k)]);
            let kt = v_a.adjoint() * vb;
            let mut rows = Vec::with_capacity(r_a * d_b);
            for i in 0..r_a {
                for bp in 0..d_b {
                    let mut row = Vec::new();
                    for k in 0..r {
                        let z = kt[(i, k)];
                        if z.norm() > 1e-15 {
                            row.push((k * d_b + bp, z));
                        }
                    }
                    rows.push(row);
                }
            }
            k_rows.push(rows);
        }
        let full_rank = r == d_a * d_b && r_a == d_a;
        Ok(Self { state: state.clone(), d_a, d_b, v, v_a, rho_t, rho_hat, k_rows, full_rank })
    }

    pub fn state(&self) -> &BipartiteState {
        &self.state
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Rank of ρ (the reduced A-side dimension of σ̃).
    pub fn rank(&self) -> usize {
        self.v.ncols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    /// Order of σ̃.
    pub fn ext_dim(&self) -> usize {
        self.rank() * self.d_b
    }

    /// Order of the compressed AB′ marginal.
    pub fn marg_dim(&self) -> usize {
        self.v_a.ncols() * self.d_b
    }

    pub fn support_isometry(&self) -> &ComplexMatrix {
        &self.v
    }

    /// U = V_A ⊗ I_B′.
    pub fn marginal_isometry(&self) -> ComplexMatrix {
        kron(&self.v_a, &identity(self.d_b))
    }

    /// V†ρV.
    pub fn rho_tilde(&self) -> &ComplexMatrix {
        &self.rho_t
    }

    /// U†ρU, the state viewed on the compressed AB′ space.
    pub fn rho_hat(&self) -> &ComplexMatrix {
        &self.rho_hat
    }

    /// σ = (V⊗I) σ̃ (V⊗I)† on A⊗B⊗B′.
    pub fn lift(&self, sigma_t: &ComplexMatrix) -> ComplexMatrix {
        let w = kron(&self.v, &identity(self.d_b));
        &w * sigma_t * w.adjoint()
    }

    /// T̃(σ̃) = U† tr_B[σ] U.
    pub fn reduced_marginal(&self, sigma_t: &ComplexMatrix) -> ComplexMatrix {
        let q = self.marg_dim();
        let mut out = ComplexMatrix::zeros(q, q);
        for rows in &self.k_rows {
            // t = K_b σ̃, then out += t K_b†.
            let mut t = ComplexMatrix::zeros(q, sigma_t.ncols());
            for (i, row) in rows.iter().enumerate() {
                for &(k, z) in row {
                    for c in 0..sigma_t.ncols() {
                        t[(i, c)] += z * sigma_t[(k, c)];
                    }
                }
            }
            for (j, row) in rows.iter().enumerate() {
                for &(k, z) in row {
                    let zc = z.conj();
                    for i in 0..q {
                        out[(i, j)] += t[(i, k)] * zc;
                    }
                }
            }
        }
        crate::linalg::hermitian_part(&out)
    }

    /// tr_B σ on A⊗B′ (full dimension).
    pub fn marginal(&self, sigma_t: &ComplexMatrix) -> ComplexMatrix {
        let u = self.marginal_isometry();
        &u * self.reduced_marginal(sigma_t) * u.adjoint()
    }

    /// T̃*(G) for G on the compressed AB′ space.
    pub fn reduced_marginal_adjoint(&self, g: &ComplexMatrix) -> ComplexMatrix {
        let n = self.ext_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for rows in &self.k_rows {
            for (i, ri) in rows.iter().enumerate() {
                for (j, rj) in rows.iter().enumerate() {
                    let gij = g[(i, j)];
                    if gij.norm() == 0.0 {
                        continue;
                    }
                    for &(k, zi) in ri {
                        let a = zi.conj() * gij;
                        for &(l, zj) in rj {
                            out[(k, l)] += a * zj;
                        }
                    }
                }
            }
        }
        out
    }

    /// Adjoint of σ̃ ↦ tr_B σ for G on the full A⊗B′ space.
    pub fn marginal_adjoint(&self, g: &ComplexMatrix) -> ComplexMatrix {
        let u = self.marginal_isometry();
        self.reduced_marginal_adjoint(&(u.adjoint() * g * &u))
    }

    /// T̃*(H) for a sparse Hermitian H, as entries in `block`.
    pub fn reduced_adjoint_sparse(&self, block: usize, h: &[(usize, usize, C64)]) -> SparseOp {
        let n = self.ext_dim();
        let mut acc: std::collections::BTreeMap<(usize, usize), C64> = std::collections::BTreeMap::new();
        for rows in &self.k_rows {
            for &(i, j, v) in h {
                for &(k, zi) in &rows[i] {
                    let a = zi.conj() * v;
                    for &(l, zj) in &rows[j] {
                        *acc.entry((k, l)).or_insert(C64::new(0.0, 0.0)) += a * zj;
                    }
                }
            }
        }
        debug_assert!(acc.keys().all(|&(k, l)| k < n && l < n));
        let scale = acc.values().fold(0.0f64, |m, z| m.max(z.norm()));
        acc.into_iter()
            .filter(|(_, z)| z.norm() > 1e-14 * scale)
            .map(|((row, col), value)| Entry { block, row, col, value })
            .collect()
    }

    /// Dense T̃*(G) as entries in `block`.
    pub fn reduced_adjoint_entries(&self, block: usize, g: &ComplexMatrix) -> SparseOp {
        dense_entries(block, &self.reduced_marginal_adjoint(g))
    }

    /// Rows ⟨H_k ⊗ I_B′, σ̃⟩ = ⟨H_k, ρ̃⟩ encoding tr_B′ σ = ρ.
    pub fn extension_rows(&self, block: usize) -> Vec<(SparseOp, f64)> {
        let d_b = self.d_b;
        herm_basis(self.rank())
            .into_iter()
            .map(|h| {
                let mut row = Vec::with_capacity(h.len() * d_b);
                for &(i, j, v) in &h {
                    for bp in 0..d_b {
                        row.push(Entry { block, row: i * d_b + bp, col: j * d_b + bp, value: v });
                    }
                }
                (row, basis_inner(&h, &self.rho_t))
            })
            .collect()
    }

    /// σ̃⁰ = ρ̃ ⊗ ρ_B, the lift of ρ_AB ⊗ ρ_B′.
    pub fn initial_extension(&self) -> ComplexMatrix {
        kron(&self.rho_t, self.state.marginal_b().matrix())
    }

    /// max-entry residual of tr_B′ σ̃ − ρ̃.
    pub fn extension_residual(&self, sigma_t: &ComplexMatrix) -> f64 {
        let (r, d_b) = (self.rank(), self.d_b);
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                let mut s = C64::new(0.0, 0.0);
                for bp in 0..d_b {
                    s += sigma_t[(i * d_b + bp, j * d_b + bp)];
                }
                worst = worst.max((s - self.rho_t[(i, j)]).norm());
            }
        }
        worst
    }

    /// ⟨G, tr_B σ⟩ with G on the full AB′ space.
    pub fn marginal_inner(&self, g: &ComplexMatrix, sigma_t: &ComplexMatrix) -> f64 {
        inner(g, &self.marginal(sigma_t))
    }
}
