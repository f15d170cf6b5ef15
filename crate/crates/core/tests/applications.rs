use num_complex::Complex64 as C;
use unext::applications::{
    det_rate_to_ebit, ent_overhead_lower_bound, erased_protocol_monte_carlo, erased_separable_witness, exact_ent_upper_bound,
    exact_key_upper_bound, key_overhead_lower_bound, private_state_bound_check, ree_erased, ree_isotropic_qubit, sweep,
    SweepFamily, SweepMeasure, Task,
};
use unext::divergences::relative_entropy;
use unext::linalg::{identity, ComplexMatrix, HermitianOperator};
use unext::measures::{e_rel_u, MeasureOptions};
use unext::states::{erased, isotropic, max_entangled, private_state, product_state, pure_from_schmidt, random_state, Twist};

fn opts() -> MeasureOptions {
    MeasureOptions { tol: 1e-7, ..MeasureOptions::default() }
}

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn product() -> unext::BipartiteState {
    product_state(&random_state(2, 2, 3).unwrap(), &random_state(2, 1, 4).unwrap()).unwrap()
}

#[test]
fn overhead_bounds() {
    let o = opts();
    assert!((key_overhead_lower_bound(&erased(0.5).unwrap(), 1, &o).unwrap().value - 2.0).abs() < 1e-3);
    assert!((key_overhead_lower_bound(&max_entangled(2).unwrap(), 1, &o).unwrap().value - 1.0).abs() < 1e-4);
    assert!(key_overhead_lower_bound(&isotropic(2, 0.6).unwrap(), 1, &o).unwrap().value.is_infinite());
    let r = ent_overhead_lower_bound(&erased(0.25).unwrap(), 2, &o).unwrap();
    assert_eq!(r.task, Task::EntOverhead);
    assert!((r.value - 8.0 / 3.0).abs() < 1e-3);
    assert!((ent_overhead_lower_bound(&max_entangled(4).unwrap(), 2, &o).unwrap().value - 1.0).abs() < 1e-4);
    assert!(ent_overhead_lower_bound(&product(), 2, &o).unwrap().value.is_infinite());
    assert!(key_overhead_lower_bound(&erased(0.5).unwrap(), 0, &o).is_err());
}

#[test]
fn overhead_is_linear_in_target() {
    let rho = isotropic(2, 0.9).unwrap();
    let one = key_overhead_lower_bound(&rho, 1, &opts()).unwrap().value;
    for k in [2, 3, 7] {
        let v = key_overhead_lower_bound(&rho, k, &opts()).unwrap().value;
        assert!((v - k as f64 * one).abs() < 1e-9 * v, "k {k}");
    }
}

#[test]
fn exact_distillation_bounds() {
    let o = opts();
    assert!((exact_key_upper_bound(&max_entangled(2).unwrap(), &o).unwrap().value - 1.0).abs() < 1e-6);
    let psi = pure_from_schmidt(&[0.8, 0.2], None).unwrap();
    assert!((exact_ent_upper_bound(&psi, &o).unwrap().value + 0.8f64.log2()).abs() < 1e-6);
    let er = erased(0.5).unwrap();
    let emin = exact_key_upper_bound(&er, &o).unwrap().value;
    assert!(emin <= e_rel_u(&er, &o).unwrap().value + 1e-5 && emin <= 0.5 + 1e-5);
    assert!(exact_ent_upper_bound(&product(), &o).unwrap().value.abs() < 1e-6);
}

#[test]
fn deterministic_rate() {
    assert!((det_rate_to_ebit(&max_entangled(2).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    assert!((det_rate_to_ebit(&pure_from_schmidt(&[0.5, 0.25, 0.25], None).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    assert!(det_rate_to_ebit(&pure_from_schmidt(&[1.0], None).unwrap()).unwrap().abs() < 1e-12);
    assert!(det_rate_to_ebit(&erased(0.5).unwrap()).is_err());
}

fn swap() -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(i, j)] = C::new(1.0, 0.0);
    }
    s
}

#[test]
fn private_states_carry_their_key() {
    let o = opts();
    // An unentangled shield adds nothing to the key's bit.
    let plain = product_state(&random_state(2, 2, 6).unwrap(), &random_state(2, 2, 7).unwrap()).unwrap();
    let trivial = private_state(2, plain.rho(), (2, 2), Twist::Identity, None).unwrap();
    let c = private_state_bound_check(&trivial, &o).unwrap();
    assert!(c.holds);
    for v in [c.e_min, c.e_max, c.e_fid] {
        assert!((v - 1.0).abs() < 1e-6, "{c:?}");
    }
    let shield = random_state(4, 2, 6).unwrap();
    let random = private_state(2, &shield, (2, 2), Twist::Random, Some(8)).unwrap();
    assert!(private_state_bound_check(&random, &o).unwrap().holds);
    let mixed = HermitianOperator::identity(4).scale(0.25);
    let twist = Twist::Unitaries(vec![identity(4), swap(), swap(), identity(4)]);
    let swapped = private_state(2, &mixed, (2, 2), twist, None).unwrap();
    let c = private_state_bound_check(&swapped, &o).unwrap();
    assert!(c.holds && c.e_min >= 1.0 - 1e-6, "{c:?}");
}

#[test]
fn erased_relative_entropy_of_entanglement() {
    assert!((ree_erased(0.0).unwrap() - 1.0).abs() < 1e-10);
    assert!(ree_erased(1.0).unwrap().abs() < 1e-10);
    let v = ree_erased(0.3).unwrap();
    assert!((v - 0.7).abs() < 1e-10);
    let w = relative_entropy(erased(0.3).unwrap().rho(), erased_separable_witness(0.3).unwrap().rho()).unwrap().value;
    assert!((v - w).abs() < 1e-10);
    assert!(erased_separable_witness(0.3).unwrap().is_ppt());
}

#[test]
fn isotropic_qubit_relative_entropy_of_entanglement() {
    // Independent closed form 1 − h₂(r) for entangled two-qubit isotropic states.
    assert!((ree_isotropic_qubit(1.0).unwrap() - 1.0).abs() < 1e-4);
    assert!(ree_isotropic_qubit(0.5).unwrap().abs() < 1e-9);
    assert!(ree_isotropic_qubit(0.3).unwrap().abs() < 1e-9);
    for r in [0.6, 0.75, 0.9] {
        let v = ree_isotropic_qubit(r).unwrap();
        assert!((v - (1.0 - binary_entropy(r))).abs() < 1e-6, "r {r}: {v}");
    }
}

#[test]
fn erased_sweep_overheads() {
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let rows = sweep(SweepFamily::Erased, &grid, &[SweepMeasure::Rel], &opts()).unwrap();
    assert_eq!(rows.len(), 11);
    for row in &rows {
        let want = 1.0 / (1.0 - row.param);
        let got = row.overhead_rel.unwrap();
        if row.param == 1.0 {
            assert!(got.is_infinite() && row.overhead_ree.unwrap().is_infinite());
        } else {
            assert!((got - want).abs() <= 1e-3 * want.max(1.0), "eps {}: {got} vs {want}", row.param);
        }
        assert!(row.e_max.is_none() && row.f_u.is_none());
    }
}

#[test]
fn isotropic_sweep_endpoint_and_monotone() {
    let grid = [0.8, 0.85, 0.9, 0.95, 1.0];
    let rows = sweep(SweepFamily::Isotropic { d: 2 }, &grid, &SweepMeasure::ALL, &opts()).unwrap();
    let last = rows.last().unwrap();
    assert!((last.overhead_rel.unwrap() - 1.0).abs() < 1e-4);
    assert!((last.overhead_ree.unwrap() - 1.0).abs() < 1e-4);
    for w in rows.windows(2) {
        assert!(w[1].overhead_rel.unwrap() <= w[0].overhead_rel.unwrap() + 1e-6);
        assert!(w[1].overhead_ree.unwrap() <= w[0].overhead_ree.unwrap() + 1e-6);
    }
    // E_R upper-bounds the unextendible measure, so its overhead is never larger.
    for row in &rows {
        assert!(row.overhead_ree.unwrap() <= row.overhead_rel.unwrap() + 1e-6);
    }
}

#[test]
fn monte_carlo_matches_geometric_mean() {
    let m = erased_protocol_monte_carlo(0.5, 100_000, 1).unwrap();
    assert!((m.mean - 2.0).abs() < 0.02, "{m:?}");
    let m = erased_protocol_monte_carlo(0.0, 1000, 2).unwrap();
    assert_eq!((m.mean, m.std_err), (1.0, 0.0));
    let m = erased_protocol_monte_carlo(0.9, 100_000, 3).unwrap();
    assert!((m.mean - 10.0).abs() < 0.15, "{m:?}");
    assert!(erased_protocol_monte_carlo(1.0, 10, 4).unwrap().mean.is_infinite());
    // Same seed, same answer, regardless of thread scheduling.
    assert_eq!(erased_protocol_monte_carlo(0.3, 9000, 5).unwrap(), erased_protocol_monte_carlo(0.3, 9000, 5).unwrap());
}
