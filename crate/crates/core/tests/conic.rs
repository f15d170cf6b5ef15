use unext::conic::{
    build_emax, build_emax_dual, build_emin, build_emin_dual, build_fidelity, build_fidelity_dual, solve, solve_with,
    two_extendible_feasibility, ConicProblem, ExtensionProgram, SolverOptions,
};
use unext::measures::{e_max_u, e_min_u, unext_fidelity};
use unext::states::{erased, isotropic, random_bipartite};

fn optimum(p: &ConicProblem) -> f64 {
    let s = solve(p, 1e-10).unwrap();
    assert!(s.is_optimal(), "{}: {:?}", p.label, s.status);
    s.primal_objective
}

#[test]
fn real_embedding_agrees_with_native_solve() {
    for seed in 0..3 {
        let rho = random_bipartite(2, 2, 2, seed).unwrap();
        let p = build_emax(&ExtensionProgram::new(&rho).unwrap());
        let native = solve(&p, 1e-10).unwrap();
        let opts = SolverOptions { real_embedding: true, ..SolverOptions::with_gap_tol(1e-10) };
        let real = solve_with(&p, &opts).unwrap();
        assert!(native.is_optimal() && real.is_optimal());
        assert!((native.primal_objective - real.primal_objective).abs() < 1e-8, "seed {seed}");
        // The unembedded extension is a complex Hermitian matrix again.
        assert_eq!(real.x[0].shape(), native.x[0].shape());
    }
}

#[test]
fn primal_and_dual_builders_agree() {
    for (name, rho) in [
        ("isotropic", isotropic(2, 0.85).unwrap()),
        ("erased", erased(0.3).unwrap()),
        ("random", random_bipartite(2, 2, 3, 11).unwrap()),
    ] {
        let ep = ExtensionProgram::new(&rho).unwrap();
        let pairs = [
            ("emax", build_emax(&ep), build_emax_dual(&ep)),
            ("emin", build_emin(&ep), build_emin_dual(&ep)),
            ("fidelity", build_fidelity(&ep), build_fidelity_dual(&ep)),
        ];
        for (what, p, d) in pairs {
            let (a, b) = (optimum(&p), optimum(&d));
            assert!((a - b).abs() < 1e-7, "{name} {what}: {a} vs {b}");
        }
    }
}

#[test]
fn matches_reference_solver() {
    // Values from an independent CVXPY + Clarabel model of the same programs.
    let iso9 = isotropic(2, 0.9).unwrap();
    assert!((e_max_u(&iso9).unwrap().value - 0.3424969368).abs() < 1e-6);
    assert!(e_min_u(&iso9).unwrap().value.abs() < 1e-6);
    assert!((unext_fidelity(&iso9).unwrap().value - 0.9196152415).abs() < 1e-6);
    let iso8 = isotropic(2, 0.8).unwrap();
    assert!((e_max_u(&iso8).unwrap().value - 0.1000313730).abs() < 1e-6);
    assert!((unext_fidelity(&iso8).unwrap().value - 0.9928203230).abs() < 1e-6);
    let er = erased(0.5).unwrap();
    assert!((e_max_u(&er).unwrap().value - 1.0).abs() < 1e-6);
    assert!((e_min_u(&er).unwrap().value - 0.339035933).abs() < 1e-6);
    assert!((unext_fidelity(&er).unwrap().value - 0.75).abs() < 1e-6);
}

#[test]
fn extension_certificates_are_tight() {
    for r in [0.3, 0.6, 0.72] {
        let ep = ExtensionProgram::new(&isotropic(2, r).unwrap()).unwrap();
        match two_extendible_feasibility(&ep, 1e-9).unwrap() {
            unext::conic::Feasibility::Feasible { residual, extension } => {
                assert!(residual <= 1e-8, "r {r}: residual {residual}");
                assert_eq!(extension.nrows(), 8);
            }
            other => panic!("r {r}: {other:?}"),
        }
    }
}

#[test]
fn extendibility_is_monotone_in_isotropic_weight() {
    let grid = [0.5, 0.6, 0.7, 0.74, 0.76, 0.8, 0.9, 1.0];
    let feasible: Vec<bool> = grid
        .iter()
        .map(|&r| {
            let ep = ExtensionProgram::new(&isotropic(2, r).unwrap()).unwrap();
            two_extendible_feasibility(&ep, 1e-9).unwrap().is_feasible().expect("decided")
        })
        .collect();
    assert_eq!(feasible, [true, true, true, true, false, false, false, false]);
}

#[test]
fn dump_round_trip() {
    let ep = ExtensionProgram::new(&random_bipartite(2, 2, 4, 3).unwrap()).unwrap();
    for p in [build_emax(&ep), build_emin_dual(&ep), build_fidelity(&ep)] {
        let text = p.to_text();
        assert!(text.starts_with("unext-conic 1\n"));
        assert_eq!(ConicProblem::from_text(&text).unwrap(), p);
    }
}

#[test]
fn dump_parse_errors() {
    let good = build_emin(&ExtensionProgram::new(&erased(0.2).unwrap()).unwrap()).to_text();
    let cases = [
        good.replacen("unext-conic 1", "unext-conic 2", 1),
        good.replacen("sense max", "sense sideways", 1),
        good.replacen("end\n", "", 1),
        good.replacen("constraint 0", "constraint 5", 1),
        good.replacen("objective", "objektive", 1),
        String::new(),
    ];
    for (i, bad) in cases.iter().enumerate() {
        assert!(ConicProblem::from_text(bad).is_err(), "case {i} parsed");
    }
    // An entry outside its block.
    let mut lines: Vec<String> = good.lines().map(String::from).collect();
    let at = lines.iter().position(|l| l.starts_with("constraint 0")).unwrap() + 1;
    lines[at] = "0 99 0 1.0 0.0".into();
    assert!(ConicProblem::from_text(&lines.join("\n")).is_err());
}
