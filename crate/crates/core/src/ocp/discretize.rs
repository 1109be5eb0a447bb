//! Collocation of a problem on the FGPS grid.

use super::problem::PfocpProblem;
use super::solver::Nlp;
use crate::error::{check_len, domain, Result};
use crate::fracdiff::FgpsOperator;
use crate::special::compensated_sum;

/// Position of every unknown in the decision vector
/// `X = [x_1(t_0..t_{N−1}); …; x_{n_x}(…); u_1(…); …; u_{n_u}(…)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub n_x: usize,
    pub n_u: usize,
}

impl Layout {
    pub fn n_vars(&self) -> usize {
        self.n * (self.n_x + self.n_u)
    }

    pub fn state_index(&self, i: usize, node: usize) -> usize {
        i * self.n + node
    }

    pub fn control_index(&self, j: usize, node: usize) -> usize {
        (self.n_x + j) * self.n + node
    }

    /// Gathers `(x, u)` at one node.
    pub fn node_values(&self, vars: &[f64], node: usize, x: &mut [f64], u: &mut [f64]) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = vars[self.state_index(i, node)];
        }
        for (j, uj) in u.iter_mut().enumerate() {
            *uj = vars[self.control_index(j, node)];
        }
    }

    /// State block `i` of `vars`.
    pub fn state<'a>(&self, vars: &'a [f64], i: usize) -> &'a [f64] {
        &vars[i * self.n..(i + 1) * self.n]
    }

    /// Control block `j` of `vars`.
    pub fn control<'a>(&self, vars: &'a [f64], j: usize) -> &'a [f64] {
        &vars[(self.n_x + j) * self.n..(self.n_x + j + 1) * self.n]
    }
}

/// The collocated nonlinear program: objective `J_N = mean_l g(x_l, u_l, t_l)`,
/// equalities `scale · Q x_i − f_i` and inequalities `c_k` at every node.
#[derive(Debug, Clone)]
pub struct DiscreteNlp {
    problem: PfocpProblem,
    operator: FgpsOperator,
    layout: Layout,
}

fn fd_step(v: f64) -> f64 {
    1e-6 * (1.0 + v.abs())
}

impl DiscreteNlp {
    pub fn new(problem: PfocpProblem, operator: FgpsOperator) -> Result<Self> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !close(problem.period(), operator.grid().period()) {
            return domain(format!(
                "operator period {} does not match problem period {}",
                operator.grid().period(),
                problem.period()
            ));
        }
        if !close(problem.alpha(), operator.alpha()) {
            return domain(format!(
                "operator order {} does not match problem order {}",
                operator.alpha(),
                problem.alpha()
            ));
        }
        if !close(problem.memory_length(), operator.memory_length()) {
            return domain(format!(
                "operator memory length {} does not match problem memory length {}",
                operator.memory_length(),
                problem.memory_length()
            ));
        }
        let layout = Layout {
            n: operator.n(),
            n_x: problem.n_x(),
            n_u: problem.n_u(),
        };
        Ok(Self {
            problem,
            operator,
            layout,
        })
    }

    pub fn problem(&self) -> &PfocpProblem {
        &self.problem
    }

    pub fn operator(&self) -> &FgpsOperator {
        &self.operator
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    fn width(&self) -> usize {
        self.layout.n_x + self.layout.n_u
    }

    fn check_vars(&self, vars: &[f64]) -> Result<()> {
        check_len("decision vector", self.layout.n_vars(), vars.len())
    }

    /// Running cost at every node.
    pub fn running_costs(&self, vars: &[f64]) -> Result<Vec<f64>> {
        self.check_vars(vars)?;
        let lay = self.layout;
        let mut x = vec![0.0; lay.n_x];
        let mut u = vec![0.0; lay.n_u];
        Ok((0..lay.n)
            .map(|l| {
                lay.node_values(vars, l, &mut x, &mut u);
                self.problem
                    .functions()
                    .running_cost(&x, &u, self.operator.grid().node(l))
            })
            .collect())
    }

    /// `J_N`, compensated so the node order does not matter.
    pub fn objective_value(&self, vars: &[f64]) -> Result<f64> {
        Ok(compensated_sum(self.running_costs(vars)?) / self.layout.n as f64)
    }

    /// Dynamics `f(x_l, u_l, t_l)`, block per state.
    pub fn dynamics_values(&self, vars: &[f64]) -> Result<Vec<f64>> {
        self.check_vars(vars)?;
        let lay = self.layout;
        let mut x = vec![0.0; lay.n_x];
        let mut u = vec![0.0; lay.n_u];
        let mut f = vec![0.0; lay.n_x];
        let mut out = vec![0.0; lay.n * lay.n_x];
        for l in 0..lay.n {
            lay.node_values(vars, l, &mut x, &mut u);
            self.problem
                .functions()
                .dynamics(&x, &u, self.operator.grid().node(l), &mut f);
            for (i, fi) in f.iter().enumerate() {
                out[i * lay.n + l] = *fi;
            }
        }
        Ok(out)
    }

    /// `scale · Q x_i − f_i` at every node, block per state.
    pub fn residuals(&self, vars: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.dynamics_values(vars)?;
        for i in 0..self.layout.n_x {
            let d = self.operator.apply(self.layout.state(vars, i))?;
            for (o, di) in out[i * self.layout.n..].iter_mut().zip(d) {
                *o = di - *o;
            }
        }
        Ok(out)
    }

    /// The same residuals through an explicit dense matrix product.
    pub fn residuals_dense(&self, vars: &[f64]) -> Result<Vec<f64>> {
        let q = self.operator.dense_matrix();
        let s = self.operator.scale();
        let mut out = self.dynamics_values(vars)?;
        let n = self.layout.n;
        for i in 0..self.layout.n_x {
            let xi = self.layout.state(vars, i);
            for (l, row) in q.iter().enumerate() {
                let qx: f64 = row.iter().zip(xi).map(|(a, b)| a * b).sum();
                out[i * n + l] = s * qx - out[i * n + l];
            }
        }
        Ok(out)
    }

    /// Inequality values `c_k` at every node, block per constraint.
    pub fn inequality_values(&self, vars: &[f64]) -> Result<Vec<f64>> {
        self.check_vars(vars)?;
        let lay = self.layout;
        let p = self.problem.n_c();
        let mut x = vec![0.0; lay.n_x];
        let mut u = vec![0.0; lay.n_u];
        let mut c = vec![0.0; p];
        let mut out = vec![0.0; lay.n * p];
        for l in 0..lay.n {
            lay.node_values(vars, l, &mut x, &mut u);
            self.problem
                .functions()
                .inequalities(&x, &u, self.operator.grid().node(l), &mut c);
            for (k, ck) in c.iter().enumerate() {
                out[k * lay.n + l] = *ck;
            }
        }
        Ok(out)
    }

    fn cost_gradient_at(&self, x: &[f64], u: &[f64], t: f64, grad: &mut [f64]) {
        let fun = self.problem.functions();
        if fun.running_cost_gradient(x, u, t, grad) {
            return;
        }
        let mut v: Vec<f64> = x.iter().chain(u).copied().collect();
        let nx = x.len();
        for k in 0..v.len() {
            let orig = v[k];
            let h = fd_step(orig);
            v[k] = orig + h;
            let up = fun.running_cost(&v[..nx], &v[nx..], t);
            v[k] = orig - h;
            let dn = fun.running_cost(&v[..nx], &v[nx..], t);
            v[k] = orig;
            grad[k] = (up - dn) / (2.0 * h);
        }
    }

    /// Row-major Jacobian of `f` (`ineq = false`) or `c` (`ineq = true`) at one node.
    fn node_jacobian(&self, x: &[f64], u: &[f64], t: f64, ineq: bool, jac: &mut [f64]) {
        let fun = self.problem.functions();
        let rows = if ineq { self.problem.n_c() } else { self.layout.n_x };
        let analytic = if ineq {
            fun.inequalities_jacobian(x, u, t, jac)
        } else {
            fun.dynamics_jacobian(x, u, t, jac)
        };
        if analytic {
            return;
        }
        let w = self.width();
        let nx = x.len();
        let mut v: Vec<f64> = x.iter().chain(u).copied().collect();
        let mut up = vec![0.0; rows];
        let mut dn = vec![0.0; rows];
        let eval = |v: &[f64], out: &mut [f64]| {
            if ineq {
                fun.inequalities(&v[..nx], &v[nx..], t, out)
            } else {
                fun.dynamics(&v[..nx], &v[nx..], t, out)
            }
        };
        for k in 0..w {
            let orig = v[k];
            let h = fd_step(orig);
            v[k] = orig + h;
            eval(&v, &mut up);
            v[k] = orig - h;
            eval(&v, &mut dn);
            v[k] = orig;
            for r in 0..rows {
                jac[r * w + k] = (up[r] - dn[r]) / (2.0 * h);
            }
        }
    }

    /// `out += Jᵀ v` for the node-local part (`−∂f/∂X` or `∂c/∂X`).
    fn accumulate_node_jt(&self, vars: &[f64], v: &[f64], ineq: bool, sign: f64, out: &mut [f64]) {
        let lay = self.layout;
        let rows = if ineq { self.problem.n_c() } else { lay.n_x };
        if rows == 0 {
            return;
        }
        let w = self.width();
        let mut x = vec![0.0; lay.n_x];
        let mut u = vec![0.0; lay.n_u];
        let mut jac = vec![0.0; rows * w];
        for l in 0..lay.n {
            lay.node_values(vars, l, &mut x, &mut u);
            self.node_jacobian(&x, &u, self.operator.grid().node(l), ineq, &mut jac);
            for r in 0..rows {
                let vr = v[r * lay.n + l];
                if vr == 0.0 {
                    continue;
                }
                for k in 0..w {
                    out[k * lay.n + l] += sign * vr * jac[r * w + k];
                }
            }
        }
    }
}

impl Nlp for DiscreteNlp {
    fn n_vars(&self) -> usize {
        self.layout.n_vars()
    }

    fn n_eq(&self) -> usize {
        self.layout.n * self.layout.n_x
    }

    fn n_ineq(&self) -> usize {
        self.layout.n * self.problem.n_c()
    }

    fn objective(&self, vars: &[f64]) -> f64 {
        self.objective_value(vars).expect("decision vector length")
    }

    fn objective_gradient(&self, vars: &[f64], grad: &mut [f64]) {
        let lay = self.layout;
        let inv_n = 1.0 / lay.n as f64;
        let mut x = vec![0.0; lay.n_x];
        let mut u = vec![0.0; lay.n_u];
        let mut g = vec![0.0; self.width()];
        for l in 0..lay.n {
            lay.node_values(vars, l, &mut x, &mut u);
            self.cost_gradient_at(&x, &u, self.operator.grid().node(l), &mut g);
            for (k, gk) in g.iter().enumerate() {
                grad[k * lay.n + l] = gk * inv_n;
            }
        }
    }

    fn equalities(&self, vars: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.residuals(vars).expect("decision vector length"));
    }

    fn inequalities(&self, vars: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.inequality_values(vars).expect("decision vector length"));
    }

    fn equality_jt_vec(&self, vars: &[f64], v: &[f64], out: &mut [f64]) {
        let n = self.layout.n;
        let s = self.operator.scale();
        for i in 0..self.layout.n_x {
            let qt = self
                .operator
                .apply_transpose_unscaled(&v[i * n..(i + 1) * n])
                .expect("multiplier length");
            for (o, q) in out[i * n..(i + 1) * n].iter_mut().zip(qt) {
                *o += s * q;
            }
        }
        self.accumulate_node_jt(vars, v, false, -1.0, out);
    }

    fn inequality_jt_vec(&self, vars: &[f64], v: &[f64], out: &mut [f64]) {
        self.accumulate_node_jt(vars, v, true, 1.0, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ocp::polynomial::{Monomial, Polynomial, PolynomialProblem, BENCHMARK_PERIOD};
    use crate::ocp::problem::ProblemFunctions;
    use std::sync::Arc;

    fn benchmark_nlp(n_g: usize) -> DiscreteNlp {
        let problem = PfocpProblem::new(
            Arc::new(PolynomialProblem::benchmark()),
            BENCHMARK_PERIOD,
            0.99,
            30.0,
        )
        .unwrap();
        let op = FgpsOperator::build(0.99, 30.0, 12, BENCHMARK_PERIOD, 0.0, n_g).unwrap();
        DiscreteNlp::new(problem, op).unwrap()
    }

    fn test_vars(len: usize) -> Vec<f64> {
        (0..len).map(|k| (0.37 * k as f64).sin() + 0.1 * k as f64 % 1.3).collect()
    }

    #[test]
    fn benchmark_layout() {
        let nlp = benchmark_nlp(10);
        assert_eq!(nlp.n_vars(), 36);
        assert_eq!(nlp.n_eq(), 24);
        assert_eq!(nlp.n_ineq(), 0);
        let lay = nlp.layout();
        assert_eq!(lay.state_index(1, 3), 15);
        assert_eq!(lay.control_index(0, 11), 35);
    }

    #[test]
    fn constants_annihilated() {
        let definition = PolynomialProblem {
            schema_version: 1,
            n_x: 1,
            n_u: 0,
            running_cost: Polynomial::new(vec![Monomial::new(1.0, &[2], &[])]),
            dynamics: vec![Polynomial::default()],
            inequalities: vec![],
            period: None,
        };
        let problem = PfocpProblem::new(Arc::new(definition), 2.0, 0.5, 30.0).unwrap();
        let op = FgpsOperator::build(0.5, 30.0, 8, 2.0, 0.0, 64).unwrap();
        let nlp = DiscreteNlp::new(problem, op).unwrap();
        let vars = vec![1.7; 8];
        assert!(nlp.residuals(&vars).unwrap().iter().all(|r| r.abs() < 1e-12));
        assert!((nlp.objective_value(&vars).unwrap() - 1.7 * 1.7).abs() < 1e-14);
    }

    #[test]
    fn residual_paths_agree() {
        let nlp = benchmark_nlp(40);
        let vars = test_vars(36);
        let a = nlp.residuals(&vars).unwrap();
        let b = nlp.residuals_dense(&vars).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn objective_order_invariant() {
        let nlp = benchmark_nlp(10);
        let vars = test_vars(36);
        let j = nlp.objective_value(&vars).unwrap();
        let mut g = nlp.running_costs(&vars).unwrap();
        g.reverse();
        g.rotate_left(5);
        let j2 = compensated_sum(g) / 12.0;
        assert!((j - j2).abs() <= 1e-14);
    }

    #[test]
    fn residuals_shift_equivariant() {
        let nlp = benchmark_nlp(40);
        let vars = test_vars(36);
        let r = nlp.residuals(&vars).unwrap();
        let mut shifted = vars.clone();
        for block in shifted.chunks_mut(12) {
            block.rotate_right(3);
        }
        let rs = nlp.residuals(&shifted).unwrap();
        for (b, bs) in r.chunks(12).zip(rs.chunks(12)) {
            let mut want = b.to_vec();
            want.rotate_right(3);
            for (x, y) in want.iter().zip(bs) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    /// The benchmark without analytic derivatives.
    struct Opaque(PolynomialProblem);

    impl ProblemFunctions for Opaque {
        fn n_x(&self) -> usize {
            self.0.n_x
        }
        fn n_u(&self) -> usize {
            self.0.n_u
        }
        fn running_cost(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
            self.0.running_cost(x, u, t)
        }
        fn dynamics(&self, x: &[f64], u: &[f64], t: f64, out: &mut [f64]) {
            self.0.dynamics(x, u, t, out)
        }
    }

    #[test]
    fn derivatives_analytic_vs_differences() {
        let exact = benchmark_nlp(20);
        let problem = PfocpProblem::new(
            Arc::new(Opaque(PolynomialProblem::benchmark())),
            BENCHMARK_PERIOD,
            0.99,
            30.0,
        )
        .unwrap();
        let fd = DiscreteNlp::new(problem, exact.operator().clone()).unwrap();
        let vars = test_vars(36);
        let mut g1 = vec![0.0; 36];
        let mut g2 = vec![0.0; 36];
        exact.objective_gradient(&vars, &mut g1);
        fd.objective_gradient(&vars, &mut g2);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-8);
        }
        let v: Vec<f64> = (0..24).map(|k| (k as f64 * 0.9).cos()).collect();
        let mut j1 = vec![0.0; 36];
        let mut j2 = vec![0.0; 36];
        exact.equality_jt_vec(&vars, &v, &mut j1);
        fd.equality_jt_vec(&vars, &v, &mut j2);
        for (a, b) in j1.iter().zip(&j2) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobian_transpose_matches_differences() {
        let nlp = benchmark_nlp(20);
        let vars = test_vars(36);
        let v: Vec<f64> = (0..24).map(|k| (k as f64 * 0.4).sin()).collect();
        let mut jt = vec![0.0; 36];
        nlp.equality_jt_vec(&vars, &v, &mut jt);
        let phi = |x: &[f64]| -> f64 {
            nlp.residuals(x).unwrap().iter().zip(&v).map(|(a, b)| a * b).sum()
        };
        for k in 0..36 {
            let mut p = vars.clone();
            p[k] += 1e-6;
            let up = phi(&p);
            p[k] -= 2e-6;
            let dn = phi(&p);
            assert!((jt[k] - (up - dn) / 2e-6).abs() < 1e-6);
        }
    }

    #[test]
    fn mismatched_operator_rejected() {
        let problem = PfocpProblem::new(
            Arc::new(PolynomialProblem::benchmark()),
            BENCHMARK_PERIOD,
            0.99,
            30.0,
        )
        .unwrap();
        let op = FgpsOperator::build(0.5, 30.0, 12, BENCHMARK_PERIOD, 0.0, 10).unwrap();
        assert!(DiscreteNlp::new(problem.clone(), op).is_err());
        let op = FgpsOperator::build(0.99, 30.0, 12, 6.0, 0.0, 10).unwrap();
        assert!(DiscreteNlp::new(problem, op).is_err());
    }
}
