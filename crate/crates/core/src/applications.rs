//! Operational consequences: overhead and rate bounds, the erased and isotropic
//! case studies, parameter sweeps and a simulation of the erased-state protocol.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::relative_entropy;
use crate::error::{Error, Result};
use crate::linalg::{c, zeros, HermitianOperator};
use crate::measures::{e_max_u_with, e_min_u_with, e_rel_u, golden_section, unext_fidelity_with, MeasureOptions};
use crate::states::{erased, isotropic, BipartiteState, PrivateState};

/// Measures below this many bits count as zero; the matching overhead is ∞.
pub const ZERO_MEASURE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    KeyOverhead,
    EntOverhead,
    ExactKey,
    ExactEnt,
    DetRate,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "key-overhead" => Task::KeyOverhead,
            "ent-overhead" => Task::EntOverhead,
            "exact-key" => Task::ExactKey,
            "exact-ent" => Task::ExactEnt,
            "det-rate" => Task::DetRate,
            _ => return Err(Error::InvalidParameter(format!("unknown task '{s}'"))),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub task: Task,
    /// Copies per success for overheads, bits per copy for rates; may be ∞.
    pub value: f64,
    pub measure: &'static str,
    pub measure_value: f64,
    pub state: String,
    pub converged: bool,
}

fn describe(rho: &BipartiteState) -> String {
    format!("{}x{}", rho.d_a(), rho.d_b())
}

/// n / E, with ∞ when E is numerically zero.
pub fn overhead(n: f64, measure: f64) -> f64 {
    if measure <= ZERO_MEASURE {
        f64::INFINITY
    } else {
        n / measure
    }
}

fn overhead_bound(rho: &BipartiteState, task: Task, n: usize, opts: &MeasureOptions) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("target count must be positive".into()));
    }
    let e = e_rel_u(rho, opts)?;
    Ok(BoundReport {
        task,
        value: overhead(n as f64, e.value),
        measure: "e_rel_u",
        measure_value: e.value,
        state: describe(rho),
        converged: e.diagnostics.converged,
    })
}

/// Fewest expected copies per success for distilling k private bits.
pub fn key_overhead_lower_bound(rho: &BipartiteState, k: usize, opts: &MeasureOptions) -> Result<BoundReport> {
    overhead_bound(rho, Task::KeyOverhead, k, opts)
}

/// Fewest expected copies per success for distilling m ebits.
pub fn ent_overhead_lower_bound(rho: &BipartiteState, m: usize, opts: &MeasureOptions) -> Result<BoundReport> {
    overhead_bound(rho, Task::EntOverhead, m, opts)
}

fn exact_bound(rho: &BipartiteState, task: Task, opts: &MeasureOptions) -> Result<BoundReport> {
    let e = e_min_u_with(rho, opts)?;
    Ok(BoundReport {
        task,
        value: e.value,
        measure: "e_min_u",
        measure_value: e.value,
        state: describe(rho),
        converged: e.diagnostics.converged,
    })
}

pub fn exact_key_upper_bound(rho: &BipartiteState, opts: &MeasureOptions) -> Result<BoundReport> {
    exact_bound(rho, Task::ExactKey, opts)
}

pub fn exact_ent_upper_bound(rho: &BipartiteState, opts: &MeasureOptions) -> Result<BoundReport> {
    exact_bound(rho, Task::ExactEnt, opts)
}

/// Deterministic rate ψ → Φ²: −log₂ of the largest Schmidt coefficient.
pub fn det_rate_to_ebit(psi: &BipartiteState) -> Result<f64> {
    let purity = psi.purity();
    if (purity - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!("state is not pure (purity {purity})")));
    }
    Ok(-psi.marginal_a().eigh().max_eigenvalue().log2())
}

#[derive(Clone, Debug, Serialize)]
pub struct PrivateStateCheck {
    pub log_k: f64,
    pub e_min: f64,
    pub e_max: f64,
    /// −log₂ F^u.
    pub e_fid: f64,
    pub holds: bool,
}

/// Each SDP measure of γ across (AA′):(BB′) must be at least log₂K.
pub fn private_state_bound_check(gamma: &PrivateState, opts: &MeasureOptions) -> Result<PrivateStateCheck> {
    let rho = &gamma.state;
    let log_k = (gamma.key_dim as f64).log2();
    let e_min = e_min_u_with(rho, opts)?.value;
    let e_max = e_max_u_with(rho, opts)?.value;
    let f = unext_fidelity_with(rho, opts)?.value;
    let e_fid = if f > 0.0 { -f.log2() } else { f64::INFINITY };
    let holds = [e_min, e_max, e_fid].iter().all(|&v| v >= log_k - 1e-6);
    Ok(PrivateStateCheck { log_k, e_min, e_max, e_fid, holds })
}

/// The separable state (1−ε)/2·(|00⟩⟨00| + |11⟩⟨11|) + ε|e⟩⟨e|⊗π in the layout of [`erased`].
pub fn erased_separable_witness(eps: f64) -> Result<BipartiteState> {
    let base = erased(eps)?;
    let mut m = zeros(6, 6);
    m[(0, 0)] = c((1.0 - eps) / 2.0);
    m[(3, 3)] = c((1.0 - eps) / 2.0);
    m[(4, 4)] = c(eps / 2.0);
    m[(5, 5)] = c(eps / 2.0);
    BipartiteState::new(HermitianOperator::new(m)?, base.d_a(), base.d_b())
}

/// Relative entropy of entanglement of the erased state, 1 − ε, confirmed against
/// the divergence to the separable witness.
pub fn ree_erased(eps: f64) -> Result<f64> {
    let rho = erased(eps)?;
    let sigma = erased_separable_witness(eps)?;
    let d = relative_entropy(rho.rho(), sigma.rho())?.value;
    let closed = 1.0 - eps;
    if (d - closed).abs() > 1e-10 {
        return Err(Error::Solver(format!("witness divergence {d} differs from 1 − ε = {closed}")));
    }
    Ok(closed)
}

/// Relative entropy of entanglement of the two-qubit isotropic state ρ_r.
/// The twirl maps any separable state to a separable isotropic one without
/// increasing the divergence, so the search runs over ρ_s with s ∈ [0, 1/2].
pub fn ree_isotropic_qubit(r: f64) -> Result<f64> {
    let rho = isotropic(2, r)?;
    if rho.is_ppt() {
        return Ok(0.0);
    }
    let d = |s: f64| -> f64 {
        isotropic(2, s).and_then(|sig| relative_entropy(rho.rho(), sig.rho())).map(|v| v.value).unwrap_or(f64::INFINITY)
    };
    let s = golden_section(d, 0.5);
    Ok(d(s).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepFamily {
    Isotropic { d: usize },
    Erased,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepMeasure {
    Rel,
    Max,
    Min,
    Fidelity,
}

impl SweepMeasure {
    pub const ALL: [SweepMeasure; 4] = [SweepMeasure::Rel, SweepMeasure::Max, SweepMeasure::Min, SweepMeasure::Fidelity];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub e_rel: Option<f64>,
    pub e_max: Option<f64>,
    pub e_min: Option<f64>,
    /// F^u itself, not −log₂ F^u.
    pub f_u: Option<f64>,
    pub overhead_rel: Option<f64>,
    pub overhead_ree: Option<f64>,
}

impl SweepFamily {
    pub fn state(&self, param: f64) -> Result<BipartiteState> {
        match *self {
            SweepFamily::Isotropic { d } => isotropic(d, param),
            SweepFamily::Erased => erased(param),
        }
    }

    /// Relative entropy of entanglement where it is available in closed or reduced form.
    pub fn ree(&self, param: f64) -> Result<Option<f64>> {
        match *self {
            SweepFamily::Isotropic { d: 2 } => ree_isotropic_qubit(param).map(Some),
            SweepFamily::Isotropic { .. } => Ok(None),
            SweepFamily::Erased => ree_erased(param).map(Some),
        }
    }
}

pub fn sweep_point(family: SweepFamily, param: f64, measures: &[SweepMeasure], opts: &MeasureOptions) -> Result<SweepRow> {
    let rho = family.state(param)?;
    let mut row = SweepRow { param, ..Default::default() };
    for m in measures {
        match m {
            SweepMeasure::Rel => {
                let e = e_rel_u(&rho, opts)?.value;
                row.e_rel = Some(e);
                row.overhead_rel = Some(overhead(1.0, e));
            }
            SweepMeasure::Max => row.e_max = Some(e_max_u_with(&rho, opts)?.value),
            SweepMeasure::Min => row.e_min = Some(e_min_u_with(&rho, opts)?.value),
            SweepMeasure::Fidelity => row.f_u = Some(unext_fidelity_with(&rho, opts)?.value),
        }
    }
    row.overhead_ree = family.ree(param)?.map(|e| overhead(1.0, e));
    Ok(row)
}

/// One row per grid point; points are evaluated in parallel on the current rayon pool.
pub fn sweep(family: SweepFamily, grid: &[f64], measures: &[SweepMeasure], opts: &MeasureOptions) -> Result<Vec<SweepRow>> {
    grid.par_iter().map(|&p| sweep_point(family, p, measures, opts)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    /// Mean copies consumed per ebit produced.
    pub mean: f64,
    pub std_err: f64,
    pub trials: usize,
    /// Born-rule probability that Alice's flag measurement reports "not erased".
    pub success_probability: f64,
}

const TRIAL_BLOCK: usize = 4096;

/// Alice measures {1_A, |e⟩⟨e|} on each copy and stops at the first "not erased"
/// outcome, which leaves an ebit; the number of copies consumed is geometric.
pub fn erased_protocol_monte_carlo(eps: f64, trials: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let rho = erased(eps)?;
    // Projector onto the qubit subspace of A′, tensored with 1_B.
    let mut keep = zeros(6, 6);
    for i in 0..4 {
        keep[(i, i)] = c(1.0);
    }
    let p = crate::linalg::inner(&keep, rho.matrix()).clamp(0.0, 1.0);
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if p <= 0.0 {
        return Ok(MonteCarloEstimate { mean: f64::INFINITY, std_err: 0.0, trials, success_probability: p });
    }
    let geo = Geometric::new(p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let blocks = trials.div_ceil(TRIAL_BLOCK);
    let (sum, sum_sq) = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let n = TRIAL_BLOCK.min(trials - b * TRIAL_BLOCK);
            (0..n).fold((0.0, 0.0), |(s, s2), _| {
                let copies = 1.0 + geo.sample(&mut rng) as f64;
                (s + copies, s2 + copies * copies)
            })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarloEstimate { mean, std_err: (var / n).sqrt(), trials, success_probability: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erased_ree_matches_witness() {
        for eps in [0.0, 0.3, 1.0] {
            assert!((ree_erased(eps).unwrap() - (1.0 - eps)).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_ree_endpoints() {
        assert!((ree_isotropic_qubit(1.0).unwrap() - 1.0).abs() < 1e-4);
        assert_eq!(ree_isotropic_qubit(0.5).unwrap(), 0.0);
    }

    #[test]
    fn protocol_is_deterministic_per_seed() {
        let a = erased_protocol_monte_carlo(0.5, 10_000, 7).unwrap();
        let b = erased_protocol_monte_carlo(0.5, 10_000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(erased_protocol_monte_carlo(0.0, 100, 1).unwrap().mean, 1.0);
    }
}
