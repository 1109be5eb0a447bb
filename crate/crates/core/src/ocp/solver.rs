//! Augmented-Lagrangian solver with a BFGS inner minimiser.
//!
//! Inequalities `c ≤ 0` become equalities `c + s² = 0` in extra slack
//! variables. Each outer iteration minimises
//! `J + wᵀh + (ρ/2)|h|²` over `(x, s)` for the stacked constraint values `h`,
//! then updates `w ← w + ρh` and grows `ρ` tenfold when `|h|∞` fails to drop
//! by a factor of four.
//!
//! A point where the stopping rules fire is checked for negative curvature of
//! the augmented Lagrangian; if some direction descends, the solver steps along
//! it and resumes. Without this, symmetric starts (such as a constant initial
//! guess on a time-invariant problem) end on saddle points.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, domain, Result};

/// A smooth constrained program `min J(x)` s.t. `e(x) = 0`, `c(x) ≤ 0`.
pub trait Nlp {
    fn n_vars(&self) -> usize;
    fn n_eq(&self) -> usize;
    fn n_ineq(&self) -> usize;
    fn objective(&self, x: &[f64]) -> f64;
    /// Overwrites `grad`.
    fn objective_gradient(&self, x: &[f64], grad: &mut [f64]);
    fn equalities(&self, x: &[f64], out: &mut [f64]);
    fn inequalities(&self, x: &[f64], out: &mut [f64]);
    /// `out += (∂e/∂x)ᵀ v`.
    fn equality_jt_vec(&self, x: &[f64], v: &[f64], out: &mut [f64]);
    /// `out += (∂c/∂x)ᵀ v`.
    fn inequality_jt_vec(&self, x: &[f64], v: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Cap on inner (BFGS) iterations over the whole solve.
    pub max_iter: usize,
    /// Largest admissible `|constraint|∞` at a reported solution.
    pub feasibility_tol: f64,
    /// Stop when `‖Δx‖₂` between outer iterations falls below this.
    pub step_tol: f64,
    /// Stop when `|ΔJ|` between outer iterations falls below this.
    pub objective_tol: f64,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub residual_shrink: f64,
    pub max_penalty: f64,
    /// Inner iterations end once `‖∇‖∞` is below this.
    pub gradient_tol: f64,
    pub escape_saddles: bool,
    pub max_escapes: usize,
    /// Eigenvalues below `−negative_curvature_tol` count as descent directions.
    pub negative_curvature_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            feasibility_tol: 1e-8,
            step_tol: 1e-15,
            objective_tol: 1e-15,
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            residual_shrink: 4.0,
            max_penalty: 1e10,
            gradient_tol: 1e-12,
            escape_saddles: true,
            max_escapes: 20,
            negative_curvature_tol: 1e-8,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("feasibility_tol", self.feasibility_tol),
            ("step_tol", self.step_tol),
            ("objective_tol", self.objective_tol),
            ("initial_penalty", self.initial_penalty),
            ("max_penalty", self.max_penalty),
            ("gradient_tol", self.gradient_tol),
            ("negative_curvature_tol", self.negative_curvature_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("solver option {name} must be positive, got {v}"));
            }
        }
        if !(self.penalty_growth > 1.0) || !(self.residual_shrink > 1.0) {
            return domain("penalty growth and residual shrink factors must exceed 1");
        }
        if self.max_iter == 0 {
            return domain("max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    StepTol,
    ObjectiveTol,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Inner iterations summed over the solve.
    pub iterations: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// `|constraint|∞`, with inequalities counted through `max(c, 0)`.
    pub residual_norm: f64,
    pub equality_multipliers: Vec<f64>,
    pub penalty: f64,
    pub saddle_escapes: usize,
}

struct Augmented<'a> {
    nlp: &'a dyn Nlp,
    n: usize,
    m_e: usize,
    m_i: usize,
    w_e: Vec<f64>,
    w_i: Vec<f64>,
    rho: f64,
}

impl Augmented<'_> {
    /// Constraint values `[e(x); c(x) + s²]`.
    fn constraints(&self, z: &[f64]) -> Vec<f64> {
        let mut h = vec![0.0; self.m_e + self.m_i];
        let x = &z[..self.n];
        self.nlp.equalities(x, &mut h[..self.m_e]);
        if self.m_i > 0 {
            self.nlp.inequalities(x, &mut h[self.m_e..]);
            for (hi, s) in h[self.m_e..].iter_mut().zip(&z[self.n..]) {
                *hi += s * s;
            }
        }
        h
    }

    fn weights(&self) -> impl Iterator<Item = &f64> {
        self.w_e.iter().chain(&self.w_i)
    }

    fn value(&self, z: &[f64]) -> f64 {
        let h = self.constraints(z);
        let pen: f64 = h
            .iter()
            .zip(self.weights())
            .map(|(hi, wi)| wi * hi + 0.5 * self.rho * hi * hi)
            .sum();
        self.nlp.objective(&z[..self.n]) + pen
    }

    /// Gradient of `J + vᵀh` with the multiplier vector `v` held fixed.
    fn lagrangian_gradient(&self, z: &[f64], v: &[f64], grad: &mut [f64]) {
        let x = &z[..self.n];
        let (gx, gs) = grad.split_at_mut(self.n);
        self.nlp.objective_gradient(x, gx);
        self.nlp.equality_jt_vec(x, &v[..self.m_e], gx);
        if self.m_i > 0 {
            self.nlp.inequality_jt_vec(x, &v[self.m_e..], gx);
            for ((g, s), vi) in gs.iter_mut().zip(&z[self.n..]).zip(&v[self.m_e..]) {
                *g = 2.0 * s * vi;
            }
        }
    }

    fn gradient(&self, z: &[f64], grad: &mut [f64]) {
        let h = self.constraints(z);
        let v: Vec<f64> = h
            .iter()
            .zip(self.weights())
            .map(|(hi, wi)| wi + self.rho * hi)
            .collect();
        self.lagrangian_gradient(z, &v, grad);
    }

    /// Hessian of the Lagrangian with weights `w + ρh` (by differences of its
    /// gradient) and the constraint Jacobian `A`.
    fn curvature(&self, z: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let dim = z.len();
        let m = self.m_e + self.m_i;
        let h = self.constraints(z);
        let v: Vec<f64> = h
            .iter()
            .zip(self.weights())
            .map(|(hi, wi)| wi + self.rho * hi)
            .collect();
        let mut hess = DMatrix::<f64>::zeros(dim, dim);
        let mut zp = z.to_vec();
        let mut gp = vec![0.0; dim];
        let mut gm = vec![0.0; dim];
        for k in 0..dim {
            let step = 1e-6 * (1.0 + z[k].abs());
            zp[k] = z[k] + step;
            self.lagrangian_gradient(&zp, &v, &mut gp);
            zp[k] = z[k] - step;
            self.lagrangian_gradient(&zp, &v, &mut gm);
            zp[k] = z[k];
            for r in 0..dim {
                hess[(r, k)] = (gp[r] - gm[r]) / (2.0 * step);
            }
        }
        // constraint Jacobian, one row per constraint
        let mut a = DMatrix::<f64>::zeros(m, dim);
        let mut unit = vec![0.0; m];
        let mut row = vec![0.0; dim];
        let x = &z[..self.n];
        for c in 0..m {
            unit[c] = 1.0;
            row.iter_mut().for_each(|r| *r = 0.0);
            if c < self.m_e {
                self.nlp.equality_jt_vec(x, &unit[..self.m_e], &mut row[..self.n]);
            } else {
                self.nlp.inequality_jt_vec(x, &unit[self.m_e..], &mut row[..self.n]);
                let s = c - self.m_e;
                row[self.n + s] = 2.0 * z[self.n + s];
            }
            unit[c] = 0.0;
            for (k, rk) in row.iter().enumerate() {
                a[(c, k)] = *rk;
            }
        }
        ((&hess + hess.transpose()) * 0.5, a)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quasi-Newton minimisation of the augmented function from `z`, in place.
/// Returns the number of iterations taken.
fn bfgs(al: &Augmented<'_>, z: &mut [f64], max_iter: usize, gtol: f64) -> usize {
    let dim = z.len();
    let identity = |h: &mut Vec<f64>, scale: f64| {
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..dim {
            h[i * dim + i] = scale;
        }
    };
    let mut hinv = vec![0.0; dim * dim];
    identity(&mut hinv, 1.0);
    let mut scaled = false;
    let mut f = al.value(z);
    let mut g = vec![0.0; dim];
    al.gradient(z, &mut g);
    let mut d = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];
    let mut hy = vec![0.0; dim];
    for it in 0..max_iter {
        if inf_norm(&g) <= gtol {
            return it;
        }
        for i in 0..dim {
            d[i] = -dot(&hinv[i * dim..(i + 1) * dim], &g);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            identity(&mut hinv, 1.0);
            scaled = false;
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = -dot(&g, &g);
        }
        let mut t = if scaled { 1.0 } else { (1.0 / inf_norm(&d)).min(1.0) };
        // Armijo, or near the rounding floor of f the approximate Wolfe test
        // on directional derivatives
        let f_tol = 1e-10 * f.abs();
        let f_new = loop {
            for i in 0..dim {
                trial[i] = z[i] + t * d[i];
            }
            if trial == z {
                return it;
            }
            let v = al.value(&trial);
            if v < f && v <= f + 1e-4 * t * slope {
                al.gradient(&trial, &mut g_new);
                break v;
            }
            if v <= f + f_tol {
                al.gradient(&trial, &mut g_new);
                let slope_new = dot(&g_new, &d);
                if slope_new >= 0.9 * slope && slope_new <= -0.8 * slope {
                    break v;
                }
            }
            t *= 0.5;
            if t < 1e-20 {
                return it;
            }
        };
        let s: Vec<f64> = d.iter().map(|di| t * di).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * yy.sqrt() && sy > 0.0 {
            if !scaled {
                identity(&mut hinv, sy / yy);
                scaled = true;
            }
            for i in 0..dim {
                hy[i] = dot(&hinv[i * dim..(i + 1) * dim], &y);
            }
            let yhy = dot(&y, &hy);
            let r = 1.0 / sy;
            let coef = (1.0 + yhy * r) * r;
            for i in 0..dim {
                for j in 0..dim {
                    hinv[i * dim + j] += coef * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        z.copy_from_slice(&trial);
        f = f_new;
        std::mem::swap(&mut g, &mut g_new);
    }
    max_iter
}

/// Steps along the most negative curvature direction of the Lagrangian
/// restricted to the null space of the constraint Jacobian, if that lowers the
/// augmented function. Returns whether a step was taken.
fn escape_saddle(al: &Augmented<'_>, z: &mut [f64], tol: f64) -> bool {
    let (hess, a) = al.curvature(z);
    let dim = z.len();
    let basis = if a.nrows() == 0 {
        DMatrix::<f64>::identity(dim, dim)
    } else {
        let gram = SymmetricEigen::new(a.transpose() * &a);
        let top = gram.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(*v));
        let cols: Vec<usize> = (0..dim)
            .filter(|&k| gram.eigenvalues[k] <= 1e-10 * top.max(1.0))
            .collect();
        if cols.is_empty() {
            return false;
        }
        gram.eigenvectors.select_columns(&cols)
    };
    let reduced = basis.transpose() * &hess * &basis;
    let eig = SymmetricEigen::new(reduced);
    let (k, &lowest) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty null space");
    if !(lowest < -tol) {
        return false;
    }
    let dir = &basis * eig.eigenvectors.column(k);
    let f0 = al.value(z);
    let mut trial = z.to_vec();
    let mut t = 1.0;
    while t > 1e-8 {
        for sign in [1.0, -1.0] {
            for (i, v) in trial.iter_mut().enumerate() {
                *v = z[i] + sign * t * dir[i];
            }
            if al.value(&trial) < f0 {
                z.copy_from_slice(&trial);
                return true;
            }
        }
        t *= 0.5;
    }
    false
}

/// Solves the program from `x0`.
pub fn minimize(nlp: &dyn Nlp, x0: &[f64], opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let n = nlp.n_vars();
    check_len("initial guess", n, x0.len())?;
    if x0.iter().any(|v| !v.is_finite()) {
        return domain("initial guess contains non-finite entries");
    }
    let m_e = nlp.n_eq();
    let m_i = nlp.n_ineq();

    let mut z = x0.to_vec();
    if m_i > 0 {
        let mut c = vec![0.0; m_i];
        nlp.inequalities(x0, &mut c);
        // s = 0 is stationary in the slack, so violated constraints start at s = 1
        z.extend(c.iter().map(|&ci| if ci < 0.0 { (-ci).sqrt() } else { 1.0 }));
    }
    let mut al = Augmented {
        nlp,
        n,
        m_e,
        m_i,
        w_e: vec![0.0; m_e],
        w_i: vec![0.0; m_i],
        rho: opts.initial_penalty,
    };

    let original_residual = |z: &[f64]| -> f64 {
        let mut e = vec![0.0; m_e];
        nlp.equalities(&z[..n], &mut e);
        let mut c = vec![0.0; m_i];
        nlp.inequalities(&z[..n], &mut c);
        inf_norm(&e).max(c.iter().fold(0.0_f64, |m, v| m.max(*v)))
    };

    let mut prev_x = x0.to_vec();
    let mut prev_j = nlp.objective(x0);
    let mut prev_h = f64::INFINITY;
    let mut iterations = 0;
    let mut outer = 0;
    let mut escapes = 0;
    let (converged, stop_reason) = loop {
        let budget = opts.max_iter - iterations;
        if budget == 0 {
            break (false, StopReason::MaxIter);
        }
        iterations += bfgs(&al, &mut z, budget.min(1000), opts.gradient_tol);
        outer += 1;
        let x = &z[..n];
        let j = nlp.objective(x);
        let h = al.constraints(&z);
        let h_norm = inf_norm(&h);
        if original_residual(&z) <= opts.feasibility_tol && h_norm <= opts.feasibility_tol {
            let dx = x
                .iter()
                .zip(&prev_x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let dj = (j - prev_j).abs();
            let reason = if dx < opts.step_tol {
                Some(StopReason::StepTol)
            } else if dj < opts.objective_tol {
                Some(StopReason::ObjectiveTol)
            } else {
                None
            };
            if let Some(reason) = reason {
                let escaped = opts.escape_saddles
                    && escapes < opts.max_escapes
                    && escape_saddle(&al, &mut z, opts.negative_curvature_tol);
                if !escaped {
                    break (true, reason);
                }
                escapes += 1;
                prev_x.copy_from_slice(&z[..n]);
                prev_j = nlp.objective(&z[..n]);
                prev_h = f64::INFINITY;
                continue;
            }
        }
        for (w, hi) in al.w_e.iter_mut().chain(al.w_i.iter_mut()).zip(&h) {
            *w += al.rho * hi;
        }
        if h_norm > prev_h / opts.residual_shrink {
            al.rho = (al.rho * opts.penalty_growth).min(opts.max_penalty);
        }
        prev_h = h_norm;
        prev_x.copy_from_slice(&z[..n]);
        prev_j = j;
    };

    let x = z[..n].to_vec();
    Ok(SolveReport {
        objective: nlp.objective(&x),
        residual_norm: original_residual(&z),
        x,
        iterations,
        outer_iterations: outer,
        converged,
        stop_reason,
        equality_multipliers: al.w_e.clone(),
        penalty: al.rho,
        saddle_escapes: escapes,
    })
}
