use std::f64::consts::PI;
use std::sync::Arc;

use fgps::fracdiff::FgpsOperator;
use fgps::ocp::{
    reconstruct, solve_pfocp, DiscreteNlp, PfocpProblem, PolynomialProblem, SolverOptions,
    BENCHMARK_PERIOD,
};
use fgps::reference::quadrature_fd;

#[test]
fn multi_harmonic_input_matches_quadrature() {
    // f = cos 2t + 0.5 sin 3t on [0, 2π), checked off the sine oracle
    let f = |t: f64| (2.0 * t).cos() + 0.5 * (3.0 * t).sin();
    let fp = |t: f64| -2.0 * (2.0 * t).sin() + 1.5 * (3.0 * t).cos();
    for alpha in [0.25, 0.75] {
        let op = FgpsOperator::build(alpha, 12.0, 16, 2.0 * PI, 0.5, 400).unwrap();
        let approx = op.apply(&op.grid().sample(f)).unwrap();
        for (l, a) in approx.iter().enumerate() {
            let want = quadrature_fd(fp, alpha, 12.0, op.grid().node(l), 1e-12).unwrap();
            assert!((a - want).abs() < 1e-8, "alpha {alpha} node {l}: {a} vs {want}");
        }
    }
}

#[test]
fn off_grid_evaluation_agrees_with_nodes() {
    let op = FgpsOperator::build(0.4, 8.0, 12, 2.0 * PI, 0.0, 200).unwrap();
    let samples = op.grid().sample(f64::sin);
    let at_nodes = op.apply(&samples).unwrap();
    for l in [0, 5, 11] {
        let v = op.apply_at(&samples, op.grid().node(l)).unwrap();
        assert!((v - at_nodes[l]).abs() < 1e-12);
    }
}

#[test]
fn benchmark_solution_is_periodic_and_feasible() {
    let problem = PfocpProblem::new(
        Arc::new(PolynomialProblem::benchmark()),
        BENCHMARK_PERIOD,
        0.99,
        30.0,
    )
    .unwrap();
    let r = solve_pfocp(&problem, 12, 0.0, 40, None, &SolverOptions::default()).unwrap();
    assert!(r.converged && !r.collapsed_to_static);
    assert!((r.max_adfe() - r.residual_norm).abs() <= 1e-10);

    let op = FgpsOperator::build(0.99, 30.0, 12, BENCHMARK_PERIOD, 0.0, 40).unwrap();
    let (a, _) = reconstruct(&r, op.grid(), 0.3).unwrap();
    let (b, _) = reconstruct(&r, op.grid(), 0.3 + BENCHMARK_PERIOD).unwrap();
    assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);

    // a cyclic shift of the optimum stays feasible for the autonomous benchmark
    let nlp = DiscreteNlp::new(problem, op).unwrap();
    let lay = nlp.layout();
    let mut shifted = vec![0.0; lay.n_vars()];
    for l in 0..12 {
        let src = (l + 5) % 12;
        shifted[lay.state_index(0, l)] = r.states[src][0];
        shifted[lay.state_index(1, l)] = r.states[src][1];
        shifted[lay.control_index(0, l)] = r.controls[src][0];
    }
    let res = nlp.residuals(&shifted).unwrap();
    assert!(res.iter().all(|v| v.abs() <= 1e-8));
    assert!((nlp.objective_value(&shifted).unwrap() - r.objective).abs() < 1e-14);
}
