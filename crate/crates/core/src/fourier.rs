//! Equispaced periodic grid and the trigonometric Lagrange cardinal basis `F_j`.
//!
//! The symmetric sums over `|k| ≤ N/2` carry half weight on both `k = ±N/2`
//! terms, which makes every `F_j` real and equal to the closed form
//! `sin(Nν) cot(ν) / N`, `ν = π (t − t_j) / T`.

use std::f64::consts::PI;

use crate::error::{check_len, domain, Result};

/// `|ν mod π|` below which the closed form is swapped for the explicit sum.
const NEAR_NODE: f64 = 1e-8;

/// `N` equally spaced nodes `t_j = T j / N` on `[0, T)`, `N` even.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    period: f64,
    nodes: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return domain(format!("grid size must be a positive even integer, got {n}"));
        }
        if !(period.is_finite() && period > 0.0) {
            return domain(format!("period must be positive and finite, got {period}"));
        }
        let nodes = (0..n).map(|j| period * j as f64 / n as f64).collect();
        Ok(Self { n, period, nodes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// `t − t_j` reduced to `[−T/2, T/2)`.
    fn offset(&self, j: usize, t: f64) -> f64 {
        assert!(j < self.n, "cardinal index {j} out of range for N = {}", self.n);
        let d = (t - self.nodes[j]).rem_euclid(self.period);
        if d >= 0.5 * self.period {
            d - self.period
        } else {
            d
        }
    }

    /// `F_j(t)`.
    pub fn cardinal_eval(&self, j: usize, t: f64) -> f64 {
        let d = self.offset(j, t);
        let nu = PI * d / self.period;
        if d == 0.0 {
            1.0
        } else if nu.abs() < NEAR_NODE {
            self.cosine_sum(d)
        } else {
            (self.n as f64 * nu).sin() / (self.n as f64 * nu.tan())
        }
    }

    /// `F_j(t)` from the half-weighted cosine sum; the reference form of the basis.
    pub fn cardinal_eval_sum(&self, j: usize, t: f64) -> f64 {
        self.cosine_sum(self.offset(j, t))
    }

    fn cosine_sum(&self, d: f64) -> f64 {
        let half = self.n / 2;
        let w = 2.0 * PI / self.period;
        let mut s = 1.0 + (w * half as f64 * d).cos();
        for k in 1..half {
            s += 2.0 * (w * k as f64 * d).cos();
        }
        s / self.n as f64
    }

    /// `F'_j(t)`.
    pub fn cardinal_derivative(&self, j: usize, t: f64) -> f64 {
        let d = self.offset(j, t);
        let half = self.n / 2;
        let w = 2.0 * PI / self.period;
        let mut s = 0.5 * half as f64 * (w * half as f64 * d).sin();
        for k in 1..half {
            s += k as f64 * (w * k as f64 * d).sin();
        }
        -2.0 * w * s / self.n as f64
    }

    /// `F_j^{(order+1)}(t)`: the `order`-th derivative of `F'_j`.
    ///
    /// Implements the closed sum
    /// `(−1)^{⌊(n+2)/2⌋} (1/N) Σ'_k (ω_k)^{n+1} sin(ω_k (t − t_j) + [n odd] π/2)`
    /// with `ω_k = 2πk/T`.
    pub fn cardinal_derivative_n(&self, j: usize, order: usize, t: f64) -> f64 {
        if order == 0 {
            return self.cardinal_derivative(j, t);
        }
        let d = self.offset(j, t);
        let half = self.n / 2;
        let w = 2.0 * PI / self.period;
        let phase = if order % 2 == 1 { 0.5 * PI } else { 0.0 };
        let power = (order + 1) as i32;
        let term = |k: usize| {
            let wk = w * k as f64;
            wk.powi(power) * (wk * d + phase).sin()
        };
        let mut s = term(half);
        for k in 1..half {
            s += 2.0 * term(k);
        }
        let sign = if ((order + 2) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * s / self.n as f64
    }

    /// `Σ_j samples_j F_j(t)`: the trigonometric interpolant at `t`.
    pub fn interpolate(&self, samples: &[f64], t: f64) -> Result<f64> {
        check_len("interpolation samples", self.n, samples.len())?;
        Ok(samples
            .iter()
            .enumerate()
            .map(|(j, s)| s * self.cardinal_eval(j, t))
            .sum())
    }

    /// Node samples of `f`.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }
}
