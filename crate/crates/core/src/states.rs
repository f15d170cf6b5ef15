//! Bipartite states, channels and the standard families used throughout.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    c, identity, kron, partial_trace, partial_transpose, permute_subsystems, zeros, ComplexMatrix,
    HermitianOperator, C64, SUPPORT_CUTOFF,
};

pub const TRACE_TOL: f64 = 1e-10;
pub const TP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct BipartiteState {
    rho: HermitianOperator,
    d_a: usize,
    d_b: usize,
}

impl BipartiteState {
    pub fn new(rho: HermitianOperator, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 || rho.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch(format!(
                "operator of order {} is not {}x{}",
                rho.dim(),
                d_a,
                d_b
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        rho.check_psd()?;
        Ok(Self { rho, d_a, d_b })
    }

    pub fn from_matrix(m: ComplexMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?, d_a, d_b)
    }

    /// Trusted constructor for factories: rescales to unit trace.
    fn build(m: &ComplexMatrix, d_a: usize, d_b: usize) -> Self {
        let h = HermitianOperator::from_hermitian_part(m);
        let tr = h.trace();
        Self { rho: h.scale(1.0 / tr), d_a, d_b }
    }

    pub fn rho(&self) -> &HermitianOperator {
        &self.rho
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.rho.matrix()
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn marginal_a(&self) -> HermitianOperator {
        let m = partial_trace(self.matrix(), &[self.d_a, self.d_b], &[1]).expect("dims checked");
        HermitianOperator::from_hermitian_part(&m)
    }

    pub fn marginal_b(&self) -> HermitianOperator {
        let m = partial_trace(self.matrix(), &[self.d_a, self.d_b], &[0]).expect("dims checked");
        HermitianOperator::from_hermitian_part(&m)
    }

    /// ρ₁⊗ρ₂ regrouped across the cut (A₁A₂):(B₁B₂).
    pub fn tensor(&self, other: &BipartiteState) -> BipartiteState {
        let m = kron(self.matrix(), other.matrix());
        let dims = [self.d_a, self.d_b, other.d_a, other.d_b];
        let p = permute_subsystems(&m, &dims, &[0, 2, 1, 3]).expect("dims consistent");
        Self::build(&p, self.d_a * other.d_a, self.d_b * other.d_b)
    }

    pub fn apply_local_unitaries(&self, ua: &ComplexMatrix, ub: &ComplexMatrix) -> Result<BipartiteState> {
        if ua.nrows() != self.d_a || ub.nrows() != self.d_b {
            return Err(Error::DimensionMismatch("local unitary dims".into()));
        }
        let u = kron(ua, ub);
        Ok(Self::build(&(&u * self.matrix() * u.adjoint()), self.d_a, self.d_b))
    }

    /// Positive partial transpose test (exact separability criterion for 2⊗2 and 2⊗3).
    pub fn is_ppt(&self) -> bool {
        let pt = partial_transpose(self.matrix(), &[self.d_a, self.d_b], &[1]).expect("dims checked");
        HermitianOperator::from_hermitian_part(&pt).is_psd()
    }

    pub fn purity(&self) -> f64 {
        crate::linalg::inner(self.matrix(), self.matrix())
    }

    /// Convex mixture p·self + (1−p)·other.
    pub fn mix(&self, other: &BipartiteState, p: f64) -> Result<BipartiteState> {
        if self.d_a != other.d_a || self.d_b != other.d_b {
            return Err(Error::DimensionMismatch("mixture of different shapes".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("mixing weight {p}")));
        }
        let m = self.matrix().scale(p) + other.matrix().scale(1.0 - p);
        Ok(Self::build(&m, self.d_a, self.d_b))
    }
}

pub fn product_state(rho_a: &HermitianOperator, rho_b: &HermitianOperator) -> Result<BipartiteState> {
    BipartiteState::new(
        HermitianOperator::from_hermitian_part(&kron(rho_a.matrix(), rho_b.matrix())),
        rho_a.dim(),
        rho_b.dim(),
    )
}

fn max_entangled_vector(d: usize) -> DVector<C64> {
    let mut v = DVector::zeros(d * d);
    let a = c(1.0 / (d as f64).sqrt());
    for i in 0..d {
        v[i * d + i] = a;
    }
    v
}

pub fn max_entangled(d: usize) -> Result<BipartiteState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("Schmidt rank {d} < 2")));
    }
    let v = max_entangled_vector(d);
    Ok(BipartiteState::build(&(&v * v.adjoint()), d, d))
}

pub fn isotropic(d: usize, r: f64) -> Result<BipartiteState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension {d} < 2")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("isotropic parameter {r} outside [0,1]")));
    }
    let v = max_entangled_vector(d);
    let phi = &v * v.adjoint();
    let n = d * d;
    let rest = (identity(n) - &phi).scale((1.0 - r) / (n as f64 - 1.0));
    Ok(BipartiteState::build(&(phi.scale(r) + rest), d, d))
}

/// (1−ε)Φ² on the qubit subspace of A′ plus ε|e⟩⟨e|⊗I/2, with d_A′ = 3, d_B = 2.
pub fn erased(eps: f64) -> Result<BipartiteState> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("erasure probability {eps} outside [0,1]")));
    }
    let mut m = zeros(6, 6);
    let w = c((1.0 - eps) / 2.0);
    for &i in &[0usize, 3] {
        for &j in &[0usize, 3] {
            m[(i, j)] = w;
        }
    }
    m[(4, 4)] = c(eps / 2.0);
    m[(5, 5)] = c(eps / 2.0);
    Ok(BipartiteState { rho: HermitianOperator::from_hermitian_part(&m), d_a: 3, d_b: 2 })
}

pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let z = r[(j, j)];
        let ph = if z.norm() > 0.0 { z / z.norm() } else { c(1.0) };
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pure_schmidt_vector(coeffs: &[f64], seed: Option<u64>) -> Result<DVector<C64>> {
    if coeffs.is_empty() || coeffs.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidParameter("Schmidt coefficients must be nonnegative".into()));
    }
    let s: f64 = coeffs.iter().sum();
    if (s - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidParameter(format!("Schmidt coefficients sum to {s}")));
    }
    let d = coeffs.len();
    let mut v = DVector::zeros(d * d);
    for (i, &a) in coeffs.iter().enumerate() {
        v[i * d + i] = c(a.sqrt());
    }
    if let Some(seed) = seed {
        let mut rng = seeded_rng(seed);
        let u = haar_unitary(d, &mut rng);
        let w = haar_unitary(d, &mut rng);
        v = kron(&u, &w) * v;
    }
    Ok(v)
}

pub fn pure_from_schmidt(coeffs: &[f64], seed: Option<u64>) -> Result<BipartiteState> {
    let v = pure_schmidt_vector(coeffs, seed)?;
    let d = coeffs.len();
    Ok(BipartiteState::build(&(&v * v.adjoint()), d, d))
}

pub fn random_state_with(d: usize, rank: usize, rng: &mut impl Rng) -> Result<HermitianOperator> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!("rank {rank} outside 1..={d}")));
    }
    let g = ComplexMatrix::from_fn(d, rank, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = crate::linalg::trace_re(&m);
    Ok(HermitianOperator::from_hermitian_part(&m.unscale(tr)))
}

/// Ginibre-induced random state of the given rank; deterministic per seed.
pub fn random_state(d: usize, rank: usize, seed: u64) -> Result<HermitianOperator> {
    random_state_with(d, rank, &mut seeded_rng(seed))
}

pub fn random_bipartite(d_a: usize, d_b: usize, rank: usize, seed: u64) -> Result<BipartiteState> {
    let h = random_state(d_a * d_b, rank, seed)?;
    BipartiteState::new(h, d_a, d_b)
}

/// Purification vector on A⊗R with dim R = rank(ρ).
pub fn purification(rho: &HermitianOperator) -> DVector<C64> {
    let e = rho.eigh();
    let r = e.rank(SUPPORT_CUTOFF).max(1);
    let n = rho.dim();
    let mut v = DVector::zeros(n * r);
    for k in 0..r {
        let s = e.eigenvalues[k].max(0.0).sqrt();
        for i in 0..n {
            v[i * r + k] = e.eigenvectors[(i, k)] * s;
        }
    }
    v
}

#[derive(Clone, Debug)]
pub enum Twist {
    Identity,
    Random,
    Unitaries(Vec<ComplexMatrix>),
}

#[derive(Clone, Debug)]
pub struct PrivateState {
    pub state: BipartiteState,
    pub key_dim: usize,
    pub shield_dims: (usize, usize),
    pub shield: HermitianOperator,
    /// U^{ij} at index i·K + j.
    pub twist: Vec<ComplexMatrix>,
}

impl PrivateState {
    /// Σ_ij |i⟩⟨i|⊗|j⟩⟨j|⊗U^{ij} on A B A′ B′.
    pub fn twisting_unitary(&self) -> ComplexMatrix {
        twisting_unitary(self.key_dim, self.shield_dims, &self.twist)
    }

    /// γ reordered to A B A′ B′.
    pub fn key_shield_matrix(&self) -> ComplexMatrix {
        let (sa, sb) = self.shield_dims;
        let k = self.key_dim;
        permute_subsystems(self.state.matrix(), &[k, sa, k, sb], &[0, 2, 1, 3]).expect("dims consistent")
    }
}

fn twisting_unitary(k: usize, (sa, sb): (usize, usize), twist: &[ComplexMatrix]) -> ComplexMatrix {
    let s = sa * sb;
    let mut u = zeros(k * k * s, k * k * s);
    for i in 0..k {
        for j in 0..k {
            let off = (i * k + j) * s;
            let t = &twist[i * k + j];
            u.view_mut((off, off), (s, s)).copy_from(t);
        }
    }
    u
}

pub fn private_state(k: usize, shield: &HermitianOperator, shield_dims: (usize, usize), twist: Twist, seed: Option<u64>) -> Result<PrivateState> {
    let (sa, sb) = shield_dims;
    if k < 2 {
        return Err(Error::InvalidParameter(format!("key dimension {k} < 2")));
    }
    if shield.dim() != sa * sb {
        return Err(Error::DimensionMismatch("shield state does not match shield dims".into()));
    }
    if (shield.trace() - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(shield.trace()));
    }
    shield.check_psd()?;
    let s = sa * sb;
    let twist = match twist {
        Twist::Identity => vec![identity(s); k * k],
        Twist::Random => {
            let mut rng = seeded_rng(seed.unwrap_or(0));
            (0..k * k).map(|_| haar_unitary(s, &mut rng)).collect()
        }
        Twist::Unitaries(us) => {
            if us.len() != k * k || us.iter().any(|u| u.nrows() != s || u.ncols() != s) {
                return Err(Error::DimensionMismatch(format!("need {} twist unitaries of order {}", k * k, s)));
            }
            for u in &us {
                let dev = (u.adjoint() * u - identity(s)).norm();
                if dev > 1e-10 {
                    return Err(Error::InvalidParameter(format!("twist is not unitary (deviation {dev:.2e})")));
                }
            }
            us
        }
    };
    let phi = max_entangled(k)?;
    let u = twisting_unitary(k, shield_dims, &twist);
    let g = &u * kron(phi.matrix(), shield.matrix()) * u.adjoint();
    let g = permute_subsystems(&g, &[k, k, sa, sb], &[0, 2, 1, 3])?;
    Ok(PrivateState {
        state: BipartiteState::build(&g, k * sa, k * sb),
        key_dim: k,
        shield_dims,
        shield: shield.clone(),
        twist,
    })
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    pub kraus: Vec<ComplexMatrix>,
    pub label: String,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one Kraus operator".into()))?;
        let shape = first.shape();
        if kraus.iter().any(|k| k.shape() != shape) {
            return Err(Error::DimensionMismatch("Kraus operators of different shapes".into()));
        }
        Ok(Self { kraus, label: label.into() })
    }

    pub fn identity(d: usize) -> Self {
        Self { kraus: vec![identity(d)], label: "id".into() }
    }

    pub fn unitary(u: ComplexMatrix) -> Self {
        Self { kraus: vec![u], label: "unitary".into() }
    }

    /// Completely depolarizing channel with probability p, via the d² Weyl operators.
    pub fn depolarizing(d: usize, p: f64) -> Self {
        let mut kraus = Vec::with_capacity(d * d);
        let omega = 2.0 * std::f64::consts::PI / d as f64;
        for a in 0..d {
            for b in 0..d {
                let w = if a == 0 && b == 0 {
                    (1.0 - p + p / (d * d) as f64).sqrt()
                } else {
                    (p / (d * d) as f64).sqrt()
                };
                let mut m = zeros(d, d);
                for j in 0..d {
                    m[((j + a) % d, j)] = C64::from_polar(w, omega * (b * j) as f64);
                }
                kraus.push(m);
            }
        }
        Self { kraus, label: format!("depolarizing({p})") }
    }

    pub fn input_dim(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// Σ K†K
    pub fn gram(&self) -> ComplexMatrix {
        let n = self.input_dim();
        self.kraus.iter().fold(zeros(n, n), |acc, k| acc + k.adjoint() * k)
    }

    pub fn tp_defect(&self) -> f64 {
        (self.gram() - identity(self.input_dim())).norm()
    }

    pub fn apply(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let n = self.output_dim();
        self.kraus.iter().fold(zeros(n, n), |acc, k| acc + k * m * k.adjoint())
    }

    /// Random channel from a Haar isometry into output⊗environment.
    pub fn random(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut impl Rng) -> Self {
        let big = (d_out * n_kraus).max(d_in);
        let u = haar_unitary(big, rng);
        let kraus = (0..n_kraus)
            .map(|k| ComplexMatrix::from_fn(d_out, d_in, |i, j| u[(k * d_out + i, j)]))
            .collect();
        Self { kraus, label: "random".into() }
    }

    /// Random instrument on d_in → d_out split into `outcomes` CP maps.
    pub fn random_instrument(d_in: usize, d_out: usize, outcomes: usize, kraus_per: usize, rng: &mut impl Rng) -> Vec<Self> {
        let total = Self::random(d_in, d_out, outcomes * kraus_per, rng);
        total
            .kraus
            .chunks(kraus_per)
            .enumerate()
            .map(|(x, ks)| Self { kraus: ks.to_vec(), label: format!("outcome {x}") })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
    /// Joint map on AB with the given output dimensions.
    Both { d_a: usize, d_b: usize },
}

fn lift_kraus(ch: &KrausChannel, state: &BipartiteState, side: Side) -> Result<(Vec<ComplexMatrix>, usize, usize)> {
    let (da, db) = (state.d_a(), state.d_b());
    match side {
        Side::A => {
            if ch.input_dim() != da {
                return Err(Error::DimensionMismatch(format!("channel input {} vs d_A {}", ch.input_dim(), da)));
            }
            let i = identity(db);
            Ok((ch.kraus.iter().map(|k| kron(k, &i)).collect(), ch.output_dim(), db))
        }
        Side::B => {
            if ch.input_dim() != db {
                return Err(Error::DimensionMismatch(format!("channel input {} vs d_B {}", ch.input_dim(), db)));
            }
            let i = identity(da);
            Ok((ch.kraus.iter().map(|k| kron(&i, k)).collect(), da, ch.output_dim()))
        }
        Side::Both { d_a, d_b } => {
            if ch.input_dim() != da * db || ch.output_dim() != d_a * d_b {
                return Err(Error::DimensionMismatch("joint channel shape".into()));
            }
            Ok((ch.kraus.clone(), d_a, d_b))
        }
    }
}

/// Trace-preserving application.
pub fn apply_channel(ch: &KrausChannel, state: &BipartiteState, side: Side) -> Result<BipartiteState> {
    let (ks, oa, ob) = lift_kraus(ch, state, side)?;
    let n = oa * ob;
    let out = ks.iter().fold(zeros(n, n), |acc, k| acc + k * state.matrix() * k.adjoint());
    BipartiteState::new(HermitianOperator::from_hermitian_part(&out), oa, ob)
}

/// Selective branch: probability and the normalized post-measurement state (None if p ≈ 0).
pub fn apply_branch(ch: &KrausChannel, state: &BipartiteState, side: Side) -> Result<(f64, Option<BipartiteState>)> {
    let (ks, oa, ob) = lift_kraus(ch, state, side)?;
    let n = oa * ob;
    let out = ks.iter().fold(zeros(n, n), |acc, k| acc + k * state.matrix() * k.adjoint());
    let p = crate::linalg::trace_re(&out);
    if p <= 1e-14 {
        return Ok((p.max(0.0), None));
    }
    Ok((p, Some(BipartiteState::build(&out, oa, ob))))
}

/// Outcome maps L^y = Σ_x F^{x,y} ⊗ G^{x,y}, indexed `[y][x]`.
pub fn one_locc_instrument(f_maps: &[Vec<KrausChannel>], g_channels: &[Vec<KrausChannel>]) -> Result<Vec<KrausChannel>> {
    if f_maps.len() != g_channels.len() || f_maps.iter().zip(g_channels).any(|(f, g)| f.len() != g.len()) {
        return Err(Error::DimensionMismatch("F and G lists must match".into()));
    }
    let first = f_maps
        .iter()
        .flatten()
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty instrument".into()))?;
    let d_in = first.input_dim();
    let mut total = zeros(d_in, d_in);
    for f in f_maps.iter().flatten() {
        if f.input_dim() != d_in {
            return Err(Error::DimensionMismatch("F maps act on different inputs".into()));
        }
        total += f.gram();
    }
    let dev = (total - identity(d_in)).norm();
    if dev > TP_TOL {
        return Err(Error::NotTracePreserving(dev));
    }
    for g in g_channels.iter().flatten() {
        let dev = g.tp_defect();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
    }
    let mut out = Vec::with_capacity(f_maps.len());
    for (y, (fs, gs)) in f_maps.iter().zip(g_channels).enumerate() {
        let mut kraus = Vec::new();
        for (f, g) in fs.iter().zip(gs) {
            for kf in &f.kraus {
                for kg in &g.kraus {
                    kraus.push(kron(kf, kg));
                }
            }
        }
        out.push(KrausChannel { kraus, label: format!("L^{y}") });
    }
    Ok(out)
}

/// Sum of the outcome maps as one channel.
pub fn coarse_grain(outcomes: &[KrausChannel]) -> KrausChannel {
    KrausChannel {
        kraus: outcomes.iter().flat_map(|c| c.kraus.iter().cloned()).collect(),
        label: "coarse-grained".into(),
    }
}
