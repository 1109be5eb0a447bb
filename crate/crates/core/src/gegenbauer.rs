//! Gegenbauer-Gauss nodes and interpolatory integration weights.
//!
//! Polynomials are evaluated in the symmetric Jacobi normalization
//! `P_n^{(λ−1/2, λ−1/2)}`, which stays non-degenerate at `λ = 0` (Chebyshev
//! case). Only the zeros and the interpolatory weights built on them are used
//! downstream, so the normalization never leaks into results.

use std::f64::consts::PI;

use crate::error::{domain, FgpsError, Result};
use crate::special::ln_gamma_signed;

/// Gegenbauer-Gauss rule with `n_g + 1` nodes on `(−1, 1)`, the nodes shifted to
/// `(0, 1)`, and the plain-integral row vector `P` on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GegenbauerRule {
    lambda: f64,
    n_g: usize,
    nodes: Vec<f64>,
    shifted_nodes: Vec<f64>,
    integration_vector: Vec<f64>,
}

impl GegenbauerRule {
    pub fn new(lambda: f64, n_g: usize) -> Result<Self> {
        let nodes = gg_nodes(lambda, n_g)?;
        let shifted_nodes = nodes.iter().map(|z| (z + 1.0) / 2.0).collect();
        let integration_vector = integration_vector(&nodes)?;
        Ok(Self {
            lambda,
            n_g,
            nodes,
            shifted_nodes,
            integration_vector,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_g(&self) -> usize {
        self.n_g
    }

    /// Number of quadrature points, `n_g + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn shifted_nodes(&self) -> &[f64] {
        &self.shifted_nodes
    }

    pub fn integration_vector(&self) -> &[f64] {
        &self.integration_vector
    }

    /// `∫_{−1}^{1} h` approximated from samples of `h` at the nodes.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        crate::error::check_len("quadrature samples", self.len(), samples.len())?;
        Ok(self
            .integration_vector
            .iter()
            .zip(samples)
            .map(|(p, h)| p * h)
            .sum())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > -0.5 {
        Ok(())
    } else {
        domain(format!("Gegenbauer index must exceed -1/2, got {lambda}"))
    }
}

/// `(P_n(x), P_{n−1}(x))` for the symmetric Jacobi family with parameter `a = λ − 1/2`.
fn jacobi_pair(a: f64, n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) * x;
    for k in 2..=n {
        let k = k as f64;
        let next = ((2.0 * k + 2.0 * a - 1.0) * (k + a) * x * cur
            - (k + a - 1.0) * (k + a) * prev)
            / (k * (k + 2.0 * a));
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Value of the degree-`degree` Gegenbauer polynomial with index `lambda` at `x`
/// (Jacobi normalization; `λ = 1/2` gives Legendre, `λ = 0` a multiple of Chebyshev `T_n`).
pub fn gegenbauer_poly_eval(lambda: f64, degree: usize, x: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if !(-1.0..=1.0).contains(&x) {
        return domain(format!("evaluation point must lie in [-1, 1], got {x}"));
    }
    Ok(jacobi_pair(lambda - 0.5, degree, x).0)
}

/// The `n_g + 1` zeros of the degree-`(n_g + 1)` Gegenbauer polynomial, ascending.
///
/// `λ = 0` uses the Chebyshev closed form; every other index goes through
/// [`gg_nodes_newton`].
pub fn gg_nodes(lambda: f64, n_g: usize) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        Ok(chebyshev_zeros(n_g + 1))
    } else {
        gg_nodes_newton(lambda, n_g)
    }
}

fn chebyshev_zeros(n: usize) -> Vec<f64> {
    let half: Vec<f64> = (0..n / 2)
        .map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    mirror(&half, n)
}

/// Builds the full ascending node set from the non-negative half (descending).
fn mirror(positive_desc: &[f64], n: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(n);
    nodes.extend(positive_desc.iter().map(|x| -x));
    if n % 2 == 1 {
        nodes.push(0.0);
    }
    nodes.extend(positive_desc.iter().rev());
    nodes
}

/// Gegenbauer-Gauss zeros by Newton iteration on the three-term recurrence.
///
/// Starting guesses are `cos θ_k` with `θ_k = π(k + a/2 − 1/4)/(n + a + 1/2)`,
/// `a = λ − 1/2`; at `λ = 0` these are exactly the Chebyshev zeros. Only the
/// positive half is iterated and the rest mirrored, so the result is exactly
/// antisymmetric.
pub fn gg_nodes_newton(lambda: f64, n_g: usize) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let a = lambda - 0.5;
    let n = n_g + 1;
    let nf = n as f64;
    let mut half = Vec::with_capacity(n / 2);
    for k in 1..=n / 2 {
        let theta = PI * (k as f64 + a / 2.0 - 0.25) / (nf + a + 0.5);
        let mut x = theta.cos();
        let mut last_step = f64::INFINITY;
        let mut converged = false;
        for _ in 0..100 {
            let (p, q) = jacobi_pair(a, n, x);
            let dp = (-nf * x * p + (nf + a) * q) / (1.0 - x * x);
            let step = p / dp;
            x -= step;
            last_step = step.abs();
            if last_step <= 4.0 * f64::EPSILON * x.abs().max(1e-3) {
                converged = true;
                break;
            }
        }
        if !converged || !(x > 0.0 && x < 1.0) {
            return Err(FgpsError::RootNotConverged {
                index: n - k,
                last_step,
            });
        }
        half.push(x);
    }
    let nodes = mirror(&half, n);
    if let Some(i) = nodes.windows(2).position(|w| w[0] >= w[1]) {
        return Err(FgpsError::RootNotConverged {
            index: i + 1,
            last_step: 0.0,
        });
    }
    Ok(nodes)
}

/// Gauss-Legendre nodes and weights with `n` points.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return domain("Gauss-Legendre rule needs at least one point");
    }
    let nodes = gg_nodes(0.5, n - 1)?;
    let nf = n as f64;
    let weights = nodes
        .iter()
        .map(|&x| {
            // at a zero of P_n: (1 − x²) P_n' = n P_{n−1}
            let (_, q) = jacobi_pair(0.0, n, x);
            2.0 * (1.0 - x * x) / (nf * nf * q * q)
        })
        .collect();
    Ok((nodes, weights))
}

/// Barycentric weights scaled so the largest magnitude is 1.
fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let mut log_mag = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k == j {
                continue;
            }
            let d = nodes[j] - nodes[k];
            if d == 0.0 {
                return domain(format!("duplicate quadrature node {}", nodes[j]));
            }
            log_mag[j] -= d.abs().ln();
            if d < 0.0 {
                sign[j] = -sign[j];
            }
        }
    }
    let max = log_mag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(log_mag
        .iter()
        .zip(&sign)
        .map(|(l, s)| s * (l - max).exp())
        .collect())
}

/// Interpolatory weights for `∫_{−1}^{1}` at arbitrary distinct nodes.
///
/// `P_j = Σ_q w_q ℓ_j(x_q)` with an `n`-point Gauss-Legendre rule `(x_q, w_q)`;
/// it integrates every Lagrange basis polynomial (degree `n − 1`) exactly.
pub fn integration_vector(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    if n == 0 {
        return domain("integration vector needs at least one node");
    }
    if let Some(x) = nodes.iter().find(|x| !(x.abs() < 1.0)) {
        return domain(format!("nodes must lie inside (-1, 1), got {x}"));
    }
    let bary = barycentric_weights(nodes)?;
    let (xq, wq) = gauss_legendre(n)?;
    let mut p = vec![0.0; n];
    let mut terms = vec![0.0; n];
    for (&x, &w) in xq.iter().zip(&wq) {
        if let Some(hit) = nodes.iter().position(|&z| z == x) {
            p[hit] += w;
            continue;
        }
        let mut denom = 0.0;
        for j in 0..n {
            terms[j] = bary[j] / (x - nodes[j]);
            denom += terms[j];
        }
        for j in 0..n {
            p[j] += w * terms[j] / denom;
        }
    }
    Ok(p)
}

/// Leading coefficient `K_l^{(λ)}` of the degree-`l` shifted Gegenbauer polynomial:
/// `2^{2l−1} Γ(2λ+1) Γ(l+λ) / (Γ(λ+1) Γ(l+2λ))`.
///
/// At `λ = 0` the ratio `Γ(l+λ)/Γ(l+2λ)` is replaced by its limit (1 for `l ≥ 1`,
/// 2 for `l = 0`).
pub fn leading_coefficient(lambda: f64, l: usize) -> Result<f64> {
    check_lambda(lambda)?;
    let lf = l as f64;
    let pow2 = (2.0 * lf - 1.0) * std::f64::consts::LN_2;
    let ratio_ln_sign = if lambda == 0.0 {
        (if l == 0 { 2f64.ln() } else { 0.0 }, 1.0)
    } else {
        let num = ln_gamma_signed(lf + lambda);
        let den = ln_gamma_signed(lf + 2.0 * lambda);
        match (num, den) {
            (Some((ln_n, s_n)), Some((ln_d, s_d))) => (ln_n - ln_d, s_n * s_d),
            _ => {
                return domain(format!(
                    "Gamma pole in leading coefficient for lambda = {lambda}, l = {l}"
                ))
            }
        }
    };
    let (ln_a, s_a) = ln_gamma_signed(2.0 * lambda + 1.0).expect("2λ+1 > 0");
    let (ln_b, s_b) = ln_gamma_signed(lambda + 1.0).expect("λ+1 > 0");
    let ln_k = pow2 + ln_a - ln_b + ratio_ln_sign.0;
    Ok(s_a * s_b * ratio_ln_sign.1 * ln_k.exp())
}
