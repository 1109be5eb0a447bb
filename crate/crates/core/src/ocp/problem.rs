//! Continuous problem data.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};

/// Pointwise problem functions `g(x, u, t)`, `f(x, u, t)` and `c(x, u, t)`.
///
/// The derivative methods return `false` when no analytic form is available,
/// in which case central differences are used.
pub trait ProblemFunctions: Send + Sync {
    fn n_x(&self) -> usize;
    fn n_u(&self) -> usize;
    fn n_c(&self) -> usize {
        0
    }

    fn running_cost(&self, x: &[f64], u: &[f64], t: f64) -> f64;

    fn dynamics(&self, x: &[f64], u: &[f64], t: f64, out: &mut [f64]);

    fn inequalities(&self, _x: &[f64], _u: &[f64], _t: f64, _out: &mut [f64]) {}

    /// Writes `∂g/∂(x, u)` into `grad` (length `n_x + n_u`).
    fn running_cost_gradient(&self, _x: &[f64], _u: &[f64], _t: f64, _grad: &mut [f64]) -> bool {
        false
    }

    /// Writes `∂f/∂(x, u)` row-major into `jac` (`n_x` rows of `n_x + n_u`).
    fn dynamics_jacobian(&self, _x: &[f64], _u: &[f64], _t: f64, _jac: &mut [f64]) -> bool {
        false
    }

    /// Writes `∂c/∂(x, u)` row-major into `jac` (`n_c` rows of `n_x + n_u`).
    fn inequalities_jacobian(&self, _x: &[f64], _u: &[f64], _t: f64, _jac: &mut [f64]) -> bool {
        false
    }
}

/// A periodic fractional optimal control problem: minimise the period mean of
/// `g` subject to `D^α x = f` (sliding memory `L`) and `c ≤ 0`.
#[derive(Clone)]
pub struct PfocpProblem {
    functions: Arc<dyn ProblemFunctions>,
    period: f64,
    alpha: f64,
    memory_length: f64,
}

impl fmt::Debug for PfocpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PfocpProblem")
            .field("n_x", &self.n_x())
            .field("n_u", &self.n_u())
            .field("n_c", &self.n_c())
            .field("period", &self.period)
            .field("alpha", &self.alpha)
            .field("memory_length", &self.memory_length)
            .finish()
    }
}

impl PfocpProblem {
    pub fn new(
        functions: Arc<dyn ProblemFunctions>,
        period: f64,
        alpha: f64,
        memory_length: f64,
    ) -> Result<Self> {
        if functions.n_x() == 0 {
            return domain("a problem needs at least one state");
        }
        if !(period > 0.0 && period.is_finite()) {
            return domain(format!("period must be positive, got {period}"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
        }
        if !(memory_length > 0.0 && memory_length.is_finite()) {
            return domain(format!("memory length must be positive, got {memory_length}"));
        }
        Ok(Self {
            functions,
            period,
            alpha,
            memory_length,
        })
    }

    pub fn functions(&self) -> &dyn ProblemFunctions {
        self.functions.as_ref()
    }

    pub fn n_x(&self) -> usize {
        self.functions.n_x()
    }

    pub fn n_u(&self) -> usize {
        self.functions.n_u()
    }

    pub fn n_c(&self) -> usize {
        self.functions.n_c()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn memory_length(&self) -> f64 {
        self.memory_length
    }
}
