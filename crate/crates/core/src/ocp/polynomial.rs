//! Problems whose `g`, `f` and `c` are polynomials in the states, the controls
//! and time, with exact derivatives.

use serde::{Deserialize, Serialize};

use super::problem::ProblemFunctions;
use crate::error::{domain, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Period of the built-in benchmark problem.
pub const BENCHMARK_PERIOD: f64 = 4.431_736;

/// `coeff · Π x_i^{x[i]} · Π u_j^{u[j]} · t^t`; missing exponents are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coeff: f64,
    #[serde(default)]
    pub x: Vec<u32>,
    #[serde(default)]
    pub u: Vec<u32>,
    #[serde(default)]
    pub t: u32,
}

impl Monomial {
    pub fn new(coeff: f64, x: &[u32], u: &[u32]) -> Self {
        Self {
            coeff,
            x: x.to_vec(),
            u: u.to_vec(),
            t: 0,
        }
    }

    fn eval(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        let mut v = self.coeff * t.powi(self.t as i32);
        for (xi, &p) in x.iter().zip(&self.x) {
            v *= xi.powi(p as i32);
        }
        for (uj, &p) in u.iter().zip(&self.u) {
            v *= uj.powi(p as i32);
        }
        v
    }

    fn exponent(&self, slot: usize, n_x: usize) -> u32 {
        let list = if slot < n_x { &self.x } else { &self.u };
        let k = if slot < n_x { slot } else { slot - n_x };
        list.get(k).copied().unwrap_or(0)
    }

    /// Adds `∂/∂(x, u)` of this term into `grad`.
    fn accumulate_gradient(&self, x: &[f64], u: &[f64], t: f64, grad: &mut [f64]) {
        let n_x = x.len();
        let value = |slot: usize| if slot < n_x { x[slot] } else { u[slot - n_x] };
        let width = n_x + u.len();
        for slot in 0..width {
            let p = self.exponent(slot, n_x);
            if p == 0 {
                continue;
            }
            let mut d = self.coeff * t.powi(self.t as i32) * p as f64 * value(slot).powi(p as i32 - 1);
            for other in (0..width).filter(|&k| k != slot) {
                d *= value(other).powi(self.exponent(other, n_x) as i32);
            }
            grad[slot] += d;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        self.terms.iter().map(|m| m.eval(x, u, t)).sum()
    }

    /// `∂/∂(x, u)`, overwriting `grad`.
    pub fn gradient(&self, x: &[f64], u: &[f64], t: f64, grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for m in &self.terms {
            m.accumulate_gradient(x, u, t, grad);
        }
    }

    fn validate(&self, what: &str, n_x: usize, n_u: usize) -> Result<()> {
        for m in &self.terms {
            if m.x.len() > n_x || m.u.len() > n_u {
                return domain(format!(
                    "{what}: monomial has {} state and {} control exponents, problem has {n_x} and {n_u}",
                    m.x.len(),
                    m.u.len()
                ));
            }
            if !m.coeff.is_finite() {
                return domain(format!("{what}: non-finite coefficient"));
            }
        }
        Ok(())
    }
}

/// A polynomial problem description, as stored in JSON problem files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialProblem {
    pub schema_version: u32,
    pub n_x: usize,
    pub n_u: usize,
    pub running_cost: Polynomial,
    pub dynamics: Vec<Polynomial>,
    #[serde(default)]
    pub inequalities: Vec<Polynomial>,
    /// Optional default period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
}

impl PolynomialProblem {
    /// `g = x₁²/2 + x₂⁴/4 − x₂²/2 + 0.12375 u²`, `f = (x₂, u)`.
    pub fn benchmark() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n_x: 2,
            n_u: 1,
            running_cost: Polynomial::new(vec![
                Monomial::new(0.5, &[2, 0], &[]),
                Monomial::new(0.25, &[0, 4], &[]),
                Monomial::new(-0.5, &[0, 2], &[]),
                Monomial::new(0.12375, &[], &[2]),
            ]),
            dynamics: vec![
                Polynomial::new(vec![Monomial::new(1.0, &[0, 1], &[])]),
                Polynomial::new(vec![Monomial::new(1.0, &[], &[1])]),
            ],
            inequalities: Vec::new(),
            period: Some(BENCHMARK_PERIOD),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return domain(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            ));
        }
        if self.n_x == 0 {
            return domain("a problem needs at least one state");
        }
        if self.dynamics.len() != self.n_x {
            return domain(format!(
                "expected {} dynamics components, got {}",
                self.n_x,
                self.dynamics.len()
            ));
        }
        if let Some(p) = self.period {
            if !(p > 0.0 && p.is_finite()) {
                return domain(format!("period must be positive, got {p}"));
            }
        }
        self.running_cost.validate("running_cost", self.n_x, self.n_u)?;
        for (i, p) in self.dynamics.iter().enumerate() {
            p.validate(&format!("dynamics[{i}]"), self.n_x, self.n_u)?;
        }
        for (i, p) in self.inequalities.iter().enumerate() {
            p.validate(&format!("inequalities[{i}]"), self.n_x, self.n_u)?;
        }
        Ok(())
    }
}

impl ProblemFunctions for PolynomialProblem {
    fn n_x(&self) -> usize {
        self.n_x
    }

    fn n_u(&self) -> usize {
        self.n_u
    }

    fn n_c(&self) -> usize {
        self.inequalities.len()
    }

    fn running_cost(&self, x: &[f64], u: &[f64], t: f64) -> f64 {
        self.running_cost.eval(x, u, t)
    }

    fn dynamics(&self, x: &[f64], u: &[f64], t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.dynamics) {
            *o = p.eval(x, u, t);
        }
    }

    fn inequalities(&self, x: &[f64], u: &[f64], t: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.inequalities) {
            *o = p.eval(x, u, t);
        }
    }

    fn running_cost_gradient(&self, x: &[f64], u: &[f64], t: f64, grad: &mut [f64]) -> bool {
        self.running_cost.gradient(x, u, t, grad);
        true
    }

    fn dynamics_jacobian(&self, x: &[f64], u: &[f64], t: f64, jac: &mut [f64]) -> bool {
        let w = self.n_x + self.n_u;
        for (row, p) in jac.chunks_mut(w).zip(&self.dynamics) {
            p.gradient(x, u, t, row);
        }
        true
    }

    fn inequalities_jacobian(&self, x: &[f64], u: &[f64], t: f64, jac: &mut [f64]) -> bool {
        let w = self.n_x + self.n_u;
        for (row, p) in jac.chunks_mut(w).zip(&self.inequalities) {
            p.gradient(x, u, t, row);
        }
        true
    }
}
