use unext::divergences::{
    bs_relative_entropy, geometric_renyi, max_relative_entropy, min_relative_entropy, petz_renyi, relative_entropy,
    renyi_entropy, sandwiched_renyi,
};
use unext::linalg::HermitianOperator;
use unext::states::{random_state, seeded_rng, KrausChannel};

fn pair(seed: u64, d: usize) -> (HermitianOperator, HermitianOperator) {
    (random_state(d, d, seed).unwrap(), random_state(d, d, 500 + seed).unwrap())
}

#[test]
fn nonnegative_and_zero_on_equal_arguments() {
    for seed in 0..10 {
        let (r, s) = pair(seed, 3);
        for a in [0.5, 0.9, 1.5, 2.0] {
            assert!(petz_renyi(&r, &s, a).unwrap().value > 1e-6);
            assert!(sandwiched_renyi(&r, &s, a).unwrap().value > 1e-6);
            assert!(geometric_renyi(&r, &s, a).unwrap().value > 1e-6);
            assert!(petz_renyi(&r, &r, a).unwrap().value.abs() < 1e-10);
            assert!(sandwiched_renyi(&r, &r, a).unwrap().value.abs() < 1e-10);
            assert!(geometric_renyi(&r, &r, a).unwrap().value.abs() < 1e-10);
        }
        assert!(relative_entropy(&r, &s).unwrap().value > 0.0);
        assert!(relative_entropy(&r, &r).unwrap().value.abs() < 1e-10);
        assert!(max_relative_entropy(&r, &r).unwrap().value.abs() < 1e-10);
    }
}

#[test]
fn sandwiched_increases_with_alpha() {
    let alphas = [0.5, 0.75, 1.0, 1.5, 2.0, 5.0, f64::INFINITY];
    for seed in 0..10 {
        let (r, s) = pair(seed, 3);
        let v: Vec<f64> = alphas.iter().map(|&a| sandwiched_renyi(&r, &s, a).unwrap().value).collect();
        for w in v.windows(2) {
            assert!(w[0] <= w[1] + 1e-10, "seed {seed}: {v:?}");
        }
    }
}

#[test]
fn family_ordering() {
    for seed in 0..10 {
        let (r, s) = pair(seed, 3);
        for a in [0.3, 0.5, 0.8] {
            let p = petz_renyi(&r, &s, a).unwrap().value;
            let q = sandwiched_renyi(&r, &s, a).unwrap().value;
            assert!(a * p <= q + 1e-10 && q <= p + 1e-10, "alpha {a}: {p} {q}");
        }
        for a in [1.2, 1.5, 2.0] {
            let p = petz_renyi(&r, &s, a).unwrap().value;
            let q = sandwiched_renyi(&r, &s, a).unwrap().value;
            let g = geometric_renyi(&r, &s, a).unwrap().value;
            assert!(q <= p + 1e-10 && q <= g + 1e-10, "alpha {a}: {q} {p} {g}");
        }
        let d = relative_entropy(&r, &s).unwrap().value;
        assert!(d <= bs_relative_entropy(&r, &s).unwrap().value + 1e-10);
        assert!(min_relative_entropy(&r, &s).unwrap().value <= d + 1e-10);
        assert!(d <= max_relative_entropy(&r, &s).unwrap().value + 1e-10);
    }
}

#[test]
fn data_processing() {
    let mut rng = seeded_rng(42);
    for seed in 0..20 {
        let (r, s) = pair(seed, 3);
        let ch = KrausChannel::random(3, 2, 2, &mut rng);
        let nr = HermitianOperator::from_hermitian_part(&ch.apply(r.matrix()));
        let ns = HermitianOperator::from_hermitian_part(&ch.apply(s.matrix()));
        let checks: [(&str, fn(&HermitianOperator, &HermitianOperator, f64) -> f64, &[f64]); 3] = [
            ("petz", |a, b, x| petz_renyi(a, b, x).unwrap().value, &[0.3, 0.7, 1.0, 1.5, 2.0]),
            ("sandwiched", |a, b, x| sandwiched_renyi(a, b, x).unwrap().value, &[0.5, 0.8, 1.5, 3.0, f64::INFINITY]),
            ("geometric", |a, b, x| geometric_renyi(a, b, x).unwrap().value, &[0.4, 1.0, 1.5, 2.0]),
        ];
        for (name, f, alphas) in checks {
            for &a in alphas {
                let (before, after) = (f(&r, &s, a), f(&nr, &ns, a));
                assert!(after <= before + 1e-8, "{name} alpha {a} seed {seed}: {after} > {before}");
            }
        }
    }
}

#[test]
fn alpha_limits() {
    for seed in 0..5 {
        let (r, s) = pair(seed, 3);
        let d = relative_entropy(&r, &s).unwrap().value;
        for a in [1.0 - 1e-4, 1.0 + 1e-4] {
            assert!((petz_renyi(&r, &s, a).unwrap().value - d).abs() < 1e-3);
            assert!((sandwiched_renyi(&r, &s, a).unwrap().value - d).abs() < 1e-3);
        }
        let bs = bs_relative_entropy(&r, &s).unwrap().value;
        assert!((geometric_renyi(&r, &s, 1.0 + 1e-4).unwrap().value - bs).abs() < 1e-3);
        let dmax = max_relative_entropy(&r, &s).unwrap().value;
        let big = sandwiched_renyi(&r, &s, 1e3).unwrap().value;
        assert!(big <= dmax + 1e-10 && dmax - big < 1e-2, "{big} vs {dmax}");
        let dmin = min_relative_entropy(&r, &s).unwrap().value;
        assert!((petz_renyi(&r, &s, 1e-6).unwrap().value - dmin).abs() < 1e-4);
    }
}

#[test]
fn support_mismatch_is_infinite() {
    let r = HermitianOperator::from_real_diagonal(&[0.5, 0.5]);
    let s = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
    assert!(relative_entropy(&r, &s).unwrap().is_infinite());
    assert!(sandwiched_renyi(&r, &s, 2.0).unwrap().is_infinite());
    assert!(max_relative_entropy(&r, &s).unwrap().is_infinite());
    assert!(petz_renyi(&r, &s, 0.5).unwrap().value.is_finite());
    assert!(petz_renyi(&r, &s, 0.0).is_err());
}

#[test]
fn renyi_entropy_limits() {
    let r = HermitianOperator::from_real_diagonal(&[0.5, 0.25, 0.25, 0.0]);
    assert!((renyi_entropy(&r, 0.0).unwrap() - 3f64.log2()).abs() < 1e-12);
    assert!((renyi_entropy(&r, 1.0).unwrap() - 1.5).abs() < 1e-12);
    assert!((renyi_entropy(&r, 2.0).unwrap() - (1.0 / 0.375f64).log2()).abs() < 1e-12);
    assert!((renyi_entropy(&r, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
}
