//! Semidefinite programs over Hermitian PSD blocks.
//!
//! A [`ConicProblem`] stores the standard pair
//!
//! ```text
//!   (P)  min ⟨C, X⟩  s.t. ⟨A_i, X⟩ = b_i,  X ⪰ 0
//!   (D)  max bᵀy     s.t. C − Σ y_i A_i ⪰ 0
//! ```
//!
//! together with which side the modeller wrote (`Form`) and in which sense, so
//! reported objective values are always those of the problem as built.

mod dump;
mod extension;
mod ipm;
mod presolve;
mod programs;

pub use extension::{herm_basis, ExtensionProgram};
pub use ipm::{solve, solve_with, Prepared, SolverOptions};
pub use presolve::PresolveReport;
pub use programs::{
    build_emax, build_emax_dual, build_emin, build_emin_dual, build_extension_linear, build_fidelity,
    build_fidelity_dual, build_two_extendible, fidelity_dual_geometric_value, two_extendible_feasibility,
    Feasibility, EMAX_LAMBDA_BLOCK, EXT_BLOCK, FID_MATRIX_BLOCK,
};

use crate::linalg::{ComplexMatrix, C64};

/// One nonzero of a block-diagonal Hermitian coefficient operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: C64,
}

/// Every nonzero (both triangles) of a block-diagonal Hermitian operator.
pub type SparseOp = Vec<Entry>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// Built in the X-form (P).
    Primal,
    /// Built in the y/LMI form (D).
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub blocks: Vec<usize>,
    pub c: SparseOp,
    pub a: Vec<SparseOp>,
    pub b: Vec<f64>,
    pub form: Form,
    pub sense: Sense,
    pub label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    /// The problem as built has no feasible point (certificate found).
    Infeasible,
    /// The problem as built is unbounded (its conjugate is infeasible).
    Unbounded,
    MaxIter,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: Status,
    /// Standard-form X blocks (for Form::Dual problems these are the multipliers).
    pub x: Vec<ComplexMatrix>,
    /// Standard-form y (for Form::Dual problems these are the decision variables).
    pub y: Vec<f64>,
    /// Slack C − Σ y_i A_i.
    pub s: Vec<ComplexMatrix>,
    /// Objective of the problem as built.
    pub primal_objective: f64,
    /// Bound from its conjugate program.
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

impl ConicProblem {
    pub fn num_constraints(&self) -> usize {
        self.a.len()
    }

    /// +1 if the stored standard data carry the modeller's objective unchanged.
    pub(crate) fn objective_sign(&self) -> f64 {
        match (self.form, self.sense) {
            (Form::Primal, Sense::Minimize) | (Form::Dual, Sense::Maximize) => 1.0,
            _ => -1.0,
        }
    }

    /// Complex Hermitian blocks mapped to real symmetric ones, H ↦ ½[[Re, −Im], [Im, Re]],
    /// so that every inner product is preserved.
    pub fn real_embedding(&self) -> ConicProblem {
        let embed = |op: &SparseOp| -> SparseOp {
            let mut out = Vec::with_capacity(op.len() * 4);
            for e in op {
                let n = self.blocks[e.block];
                let (x, y) = (0.5 * e.value.re, 0.5 * e.value.im);
                let mut push = |r, c, v: f64| {
                    if v != 0.0 {
                        out.push(Entry { block: e.block, row: r, col: c, value: C64::new(v, 0.0) });
                    }
                };
                push(e.row, e.col, x);
                push(e.row + n, e.col + n, x);
                push(e.row, e.col + n, -y);
                push(e.row + n, e.col, y);
            }
            out
        };
        ConicProblem {
            blocks: self.blocks.iter().map(|n| 2 * n).collect(),
            c: embed(&self.c),
            a: self.a.iter().map(embed).collect(),
            b: self.b.clone(),
            form: self.form,
            sense: self.sense,
            label: format!("{} (real embedding)", self.label),
        }
    }

    pub fn to_text(&self) -> String {
        dump::write(self)
    }

    pub fn from_text(s: &str) -> crate::error::Result<Self> {
        dump::read(s)
    }
}

/// Recover a complex Hermitian block from its real embedding.
pub fn unembed_block(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.nrows() / 2;
    ComplexMatrix::from_fn(n, n, |i, j| {
        let p = 0.5 * (x[(i, j)].re + x[(i + n, j + n)].re);
        let q = 0.5 * (x[(i + n, j)].re - x[(i, j + n)].re);
        C64::new(p, q)
    })
}

/// Entries of a dense Hermitian matrix placed in `block`, dropping roundoff-level zeros.
pub fn dense_entries(block: usize, m: &ComplexMatrix) -> SparseOp {
    let scale = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let tol = 1e-14 * scale;
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v.norm() > tol {
                out.push(Entry { block, row: i, col: j, value: v });
            }
        }
    }
    out
}

pub fn scaled(op: &[Entry], s: f64) -> SparseOp {
    op.iter().map(|e| Entry { value: e.value * s, ..*e }).collect()
}

/// ⟨A, X⟩ = Re Σ A_rc X_cr over the entries.
pub fn apply_op(op: &[Entry], x: &[ComplexMatrix]) -> f64 {
    op.iter()
        .map(|e| {
            let v = x[e.block][(e.col, e.row)];
            e.value.re * v.re - e.value.im * v.im
        })
        .sum()
}

/// Dense block matrices of an operator.
pub fn densify(op: &[Entry], blocks: &[usize]) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = blocks.iter().map(|&n| ComplexMatrix::zeros(n, n)).collect();
    for e in op {
        out[e.block][(e.row, e.col)] += e.value;
    }
    out
}

/// X-form builder: variables are PSD blocks, constraints are equalities.
#[derive(Clone, Debug)]
pub struct PrimalBuilder {
    blocks: Vec<usize>,
    rows: Vec<SparseOp>,
    rhs: Vec<f64>,
    objective: SparseOp,
    sense: Sense,
}

impl PrimalBuilder {
    pub fn new(sense: Sense) -> Self {
        Self { blocks: Vec::new(), rows: Vec::new(), rhs: Vec::new(), objective: Vec::new(), sense }
    }

    pub fn block(&mut self, n: usize) -> usize {
        self.blocks.push(n);
        self.blocks.len() - 1
    }

    pub fn constraint(&mut self, row: SparseOp, rhs: f64) {
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn objective(&mut self, mut op: SparseOp) {
        self.objective.append(&mut op);
    }

    pub fn finish(self, label: impl Into<String>) -> ConicProblem {
        let c = match self.sense {
            Sense::Minimize => self.objective,
            Sense::Maximize => scaled(&self.objective, -1.0),
        };
        ConicProblem {
            blocks: self.blocks,
            c,
            a: self.rows,
            b: self.rhs,
            form: Form::Primal,
            sense: self.sense,
            label: label.into(),
        }
    }
}

/// y-form builder: F₀ + Σ y_k F_k ⪰ 0 with a linear objective in y.
#[derive(Clone, Debug)]
pub struct LmiBuilder {
    blocks: Vec<usize>,
    constant: SparseOp,
    coeffs: Vec<SparseOp>,
    cost: Vec<f64>,
    sense: Sense,
}

impl LmiBuilder {
    pub fn new(sense: Sense) -> Self {
        Self { blocks: Vec::new(), constant: Vec::new(), coeffs: Vec::new(), cost: Vec::new(), sense }
    }

    pub fn block(&mut self, n: usize) -> usize {
        self.blocks.push(n);
        self.blocks.len() - 1
    }

    pub fn var(&mut self, cost: f64) -> usize {
        self.coeffs.push(Vec::new());
        self.cost.push(cost);
        self.coeffs.len() - 1
    }

    pub fn coeff(&mut self, var: usize, mut op: SparseOp) {
        self.coeffs[var].append(&mut op);
    }

    pub fn constant(&mut self, mut op: SparseOp) {
        self.constant.append(&mut op);
    }

    pub fn finish(self, label: impl Into<String>) -> ConicProblem {
        let b = match self.sense {
            Sense::Maximize => self.cost,
            Sense::Minimize => self.cost.iter().map(|c| -c).collect(),
        };
        ConicProblem {
            blocks: self.blocks,
            c: self.constant,
            a: self.coeffs.iter().map(|f| scaled(f, -1.0)).collect(),
            b,
            form: Form::Dual,
            sense: self.sense,
            label: label.into(),
        }
    }
}
