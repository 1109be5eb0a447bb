//! Periodic fractional optimal control: collocation on the FGPS grid, the NLP
//! solver, trajectory reconstruction and feasibility errors.

pub mod discretize;
pub mod polynomial;
pub mod problem;
pub mod solver;

use serde::Serialize;

pub use discretize::{DiscreteNlp, Layout};
pub use polynomial::{Monomial, Polynomial, PolynomialProblem, BENCHMARK_PERIOD};
pub use problem::{PfocpProblem, ProblemFunctions};
pub use solver::{minimize, Nlp, SolveReport, SolverOptions, StopReason};

use crate::error::{check_len, domain, Result};
use crate::fourier::PeriodicGrid;
use crate::fracdiff::FgpsOperator;

/// Below this `‖X‖∞` a solution counts as the trivial static one.
pub const STATIC_SOLUTION_THRESHOLD: f64 = 1e-6;

/// Default entry of the initial guess.
pub const DEFAULT_INITIAL_VALUE: f64 = 10.0;

/// A solved collocation problem. Matrices are stored node-major:
/// `states[l][i] = x_i(t_l)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NlpResult {
    pub nodes: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<Vec<f64>>,
    pub objective: f64,
    pub adfe: Vec<Vec<f64>>,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub residual_norm: f64,
    pub saddle_escapes: usize,
    /// `‖X‖∞ < 1e-6`.
    pub collapsed_to_static: bool,
}

impl NlpResult {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Node samples of state `i`.
    pub fn state_samples(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|row| row[i]).collect()
    }

    /// Node samples of control `j`.
    pub fn control_samples(&self, j: usize) -> Vec<f64> {
        self.controls.iter().map(|row| row[j]).collect()
    }

    pub fn max_adfe(&self) -> f64 {
        self.adfe.iter().flatten().fold(0.0_f64, |m, v| m.max(*v))
    }
}

fn node_major(layout: Layout, vars: &[f64], block: usize, count: usize) -> Vec<Vec<f64>> {
    (0..layout.n)
        .map(|l| (0..count).map(|k| vars[(block + k) * layout.n + l]).collect())
        .collect()
}

impl DiscreteNlp {
    /// Runs the solver and packages the result, recomputing the ADFE.
    pub fn solve(&self, initial_guess: &[f64], opts: &SolverOptions) -> Result<NlpResult> {
        let report = minimize(self, initial_guess, opts)?;
        let lay = self.layout();
        let mut result = NlpResult {
            nodes: self.operator().grid().nodes().to_vec(),
            states: node_major(lay, &report.x, 0, lay.n_x),
            controls: node_major(lay, &report.x, lay.n_x, lay.n_u),
            objective: report.objective,
            adfe: Vec::new(),
            iterations: report.iterations,
            outer_iterations: report.outer_iterations,
            converged: report.converged,
            stop_reason: report.stop_reason,
            residual_norm: report.residual_norm,
            saddle_escapes: report.saddle_escapes,
            collapsed_to_static: report
                .x
                .iter()
                .all(|v| v.abs() < STATIC_SOLUTION_THRESHOLD),
        };
        result.adfe = adfe(&result, self.operator(), self.problem())?;
        Ok(result)
    }
}

/// `(x(t), u(t))` from the trigonometric interpolants of the node values.
pub fn reconstruct(result: &NlpResult, grid: &PeriodicGrid, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len("result nodes", grid.n(), result.n())?;
    let n_x = result.states.first().map_or(0, Vec::len);
    let n_u = result.controls.first().map_or(0, Vec::len);
    let x = (0..n_x)
        .map(|i| grid.interpolate(&result.state_samples(i), t))
        .collect::<Result<_>>()?;
    let u = (0..n_u)
        .map(|j| grid.interpolate(&result.control_samples(j), t))
        .collect::<Result<_>>()?;
    Ok((x, u))
}

/// Absolute discrete feasibility error `|scale·Q x_i − f_i|` at every node,
/// node-major, computed from the stored node values.
pub fn adfe(result: &NlpResult, operator: &FgpsOperator, problem: &PfocpProblem) -> Result<Vec<Vec<f64>>> {
    let n = operator.n();
    check_len("result nodes", n, result.n())?;
    let n_x = problem.n_x();
    let n_u = problem.n_u();
    if result.states.iter().any(|r| r.len() != n_x) || result.controls.iter().any(|r| r.len() != n_u) {
        return domain("result dimensions do not match the problem");
    }
    let derivs: Vec<Vec<f64>> = (0..n_x)
        .map(|i| operator.apply(&result.state_samples(i)))
        .collect::<Result<_>>()?;
    let mut f = vec![0.0; n_x];
    Ok((0..n)
        .map(|l| {
            problem.functions().dynamics(
                &result.states[l],
                &result.controls[l],
                operator.grid().node(l),
                &mut f,
            );
            (0..n_x).map(|i| (derivs[i][l] - f[i]).abs()).collect()
        })
        .collect())
}

/// Discretises and solves `problem` on `n` nodes with the rule `(λ, N_G)`,
/// starting from `initial_guess` (all tens when `None`).
pub fn solve_pfocp(
    problem: &PfocpProblem,
    n: usize,
    lambda: f64,
    n_g: usize,
    initial_guess: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<NlpResult> {
    let operator = FgpsOperator::build(
        problem.alpha(),
        problem.memory_length(),
        n,
        problem.period(),
        lambda,
        n_g,
    )?;
    let nlp = DiscreteNlp::new(problem.clone(), operator)?;
    let default_guess;
    let guess = match initial_guess {
        Some(g) => g,
        None => {
            default_guess = vec![DEFAULT_INITIAL_VALUE; nlp.n_vars()];
            &default_guess
        }
    };
    nlp.solve(guess, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn linear_problem() -> PfocpProblem {
        // g = x² − x/2 + u²/10, D^α x = u
        let definition = PolynomialProblem {
            schema_version: 1,
            n_x: 1,
            n_u: 1,
            running_cost: Polynomial::new(vec![
                Monomial::new(1.0, &[2], &[]),
                Monomial::new(0.1, &[], &[2]),
                Monomial::new(-0.5, &[1], &[]),
            ]),
            dynamics: vec![Polynomial::new(vec![Monomial::new(1.0, &[], &[1])])],
            inequalities: vec![],
            period: None,
        };
        PfocpProblem::new(Arc::new(definition), 2.0 * PI, 0.6, 10.0).unwrap()
    }

    #[test]
    fn linear_system_is_feasible() {
        let p = linear_problem();
        let r = solve_pfocp(&p, 8, 0.0, 32, None, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.max_adfe() <= 1e-8);
        assert!((r.max_adfe() - r.residual_norm).abs() <= 1e-10);
        // constant optimum: u = 0, x = 1/4
        for row in &r.states {
            assert!((row[0] - 0.25).abs() < 1e-7);
        }
    }

    #[test]
    fn active_inequality_from_violated_start() {
        // g = (x − 1)², D^α x = u, x ≤ 1/2: optimum x = 1/2, J = 1/4
        let definition = PolynomialProblem {
            schema_version: 1,
            n_x: 1,
            n_u: 1,
            running_cost: Polynomial::new(vec![
                Monomial::new(1.0, &[2], &[]),
                Monomial::new(-2.0, &[1], &[]),
                Monomial::new(1.0, &[], &[]),
            ]),
            dynamics: vec![Polynomial::new(vec![Monomial::new(1.0, &[], &[1])])],
            inequalities: vec![Polynomial::new(vec![
                Monomial::new(1.0, &[1], &[]),
                Monomial::new(-0.5, &[], &[]),
            ])],
            period: None,
        };
        let p = PfocpProblem::new(Arc::new(definition), 3.0, 0.4, 5.0).unwrap();
        let r = solve_pfocp(&p, 6, 0.0, 20, None, &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.objective - 0.25).abs() < 1e-7);
        for row in &r.states {
            assert!(row[0] <= 0.5 + 1e-8);
        }
    }

    #[test]
    fn reconstruct_interpolates() {
        let p = linear_problem();
        let op = FgpsOperator::build(0.6, 10.0, 8, 2.0 * PI, 0.0, 16).unwrap();
        let nlp = DiscreteNlp::new(p.clone(), op.clone()).unwrap();
        let vars: Vec<f64> = (0..16).map(|k| (k as f64 * 0.7).sin()).collect();
        let lay = nlp.layout();
        let mut result = NlpResult {
            nodes: op.grid().nodes().to_vec(),
            states: node_major(lay, &vars, 0, 1),
            controls: node_major(lay, &vars, 1, 1),
            objective: 0.0,
            adfe: Vec::new(),
            iterations: 0,
            outer_iterations: 0,
            converged: true,
            stop_reason: StopReason::StepTol,
            residual_norm: 0.0,
            saddle_escapes: 0,
            collapsed_to_static: false,
        };
        result.adfe = adfe(&result, &op, &p).unwrap();
        for l in 0..8 {
            let (x, u) = reconstruct(&result, op.grid(), op.grid().node(l)).unwrap();
            assert!((x[0] - vars[l]).abs() < 1e-14);
            assert!((u[0] - vars[8 + l]).abs() < 1e-14);
        }
        let (a, _) = reconstruct(&result, op.grid(), 1.234).unwrap();
        let (b, _) = reconstruct(&result, op.grid(), 1.234 + 2.0 * PI).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-12);

        // ADFE matches the NLP residuals and responds linearly to a perturbation
        let res = nlp.residuals(&vars).unwrap();
        for l in 0..8 {
            assert!((result.adfe[l][0] - res[l].abs()).abs() < 1e-14);
        }
        let base = result.adfe.clone();
        result.states[3][0] += 1e-3;
        let bumped = adfe(&result, &op, &p).unwrap();
        for l in 0..8 {
            let change = (bumped[l][0] - base[l][0]).abs();
            let expected = op.scale() * op.entry(l, 3).abs() * 1e-3;
            assert!(change <= expected + 1e-15);
        }
    }
}
