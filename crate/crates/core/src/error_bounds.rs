//! A priori error machinery for the FGPS quadrature: falling factorials, the
//! γ amplification factor, the ψ coefficient function and a trend estimator
//! of the truncation-error bound.
//!
//! The bound involves constants whose values are unknown; all of them are set
//! to 1 here, so [`bound_estimate`] is meaningful only for comparisons.

use std::f64::consts::PI;

use crate::error::{check_len, domain, Result};
use crate::fourier::PeriodicGrid;
use crate::special::{compensated_sum, ln_binomial, ln_gamma_signed, log_sum_exp};

/// Euler-Mascheroni constant.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// `e^{1−γ_em}`: memory lengths above this make the bound monotone in `L`.
pub fn lmk_threshold() -> f64 {
    (1.0 - EULER_MASCHERONI).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBoundInputs {
    pub n: usize,
    pub n_g: usize,
    pub memory_length: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub zeta: f64,
}

impl ErrorBoundInputs {
    /// Inputs with `ζ = 1`.
    pub fn new(n: usize, n_g: usize, memory_length: f64, alpha: f64, lambda: f64) -> Result<Self> {
        Self::with_zeta(n, n_g, memory_length, alpha, lambda, 1.0)
    }

    pub fn with_zeta(
        n: usize,
        n_g: usize,
        memory_length: f64,
        alpha: f64,
        lambda: f64,
        zeta: f64,
    ) -> Result<Self> {
        if n == 0 {
            return domain("number of Fourier modes must be positive");
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
        }
        if !(memory_length > 0.0 && memory_length.is_finite()) {
            return domain(format!("memory length must be positive, got {memory_length}"));
        }
        if !(lambda > -0.5 && lambda.is_finite()) {
            return domain(format!("Gegenbauer index must exceed -1/2, got {lambda}"));
        }
        if !(zeta > 0.0 && zeta <= 1.0) {
            return domain(format!("zeta must lie in (0, 1], got {zeta}"));
        }
        Ok(Self {
            n,
            n_g,
            memory_length,
            alpha,
            lambda,
            zeta,
        })
    }

    /// `L > 1 − α`.
    pub fn condition_tss(&self) -> bool {
        self.memory_length > 1.0 - self.alpha
    }

    /// `L > e^{1−γ_em}`.
    pub fn condition_lmk(&self) -> bool {
        self.memory_length > lmk_threshold()
    }
}

/// `(x)^{(k)} = x (x−1) ⋯ (x−k+1)`.
pub fn falling_factorial(x: f64, k: usize) -> f64 {
    (0..k).map(|l| x - l as f64).product()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("fractional order must lie in (0, 1), got {alpha}"))
    }
}

/// `γ = Σ_{m=0}^{N_G+1} |(α/(1−α))^{(m)}|`; `+∞` on overflow.
pub fn gamma_factor(alpha: f64, n_g: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let r = alpha / (1.0 - alpha);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for l in 0..=n_g {
        term *= (r - l as f64).abs();
        sum += term;
        if term == 0.0 {
            break;
        }
    }
    Ok(sum)
}

/// `ln γ`, finite where [`gamma_factor`] overflows.
pub fn ln_gamma_factor(alpha: f64, n_g: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let r = alpha / (1.0 - alpha);
    let mut logs = Vec::with_capacity(n_g + 2);
    let mut acc = 0.0_f64;
    logs.push(0.0);
    for l in 0..=n_g {
        let f = (r - l as f64).abs();
        if f == 0.0 {
            break;
        }
        acc += f.ln();
        logs.push(acc);
    }
    Ok(log_sum_exp(&logs))
}

fn memory_exponent(alpha: f64) -> f64 {
    1.0 / (1.0 - alpha)
}

fn check_psi_args(inputs: &ErrorBoundInputs, grid: &PeriodicGrid, j: usize, y: f64) -> Result<()> {
    check_len("grid size", inputs.n, grid.n())?;
    if j >= grid.n() {
        return domain(format!("cardinal index {j} out of range for N = {}", grid.n()));
    }
    if !(y > 0.0 && y <= 1.0) {
        return domain(format!("y must lie in (0, 1], got {y}"));
    }
    Ok(())
}

/// The coefficient function
/// `ψ(y; t) = Σ_{k=0}^{N_G+1} C(N_G+1, k) (L/(α−1))^k (α/(α−1))^{(N_G−k+1)}
///            y^{kα/(1−α) + k − N_G − 1} F_j^{(k+1)}(t − L y^{1/(1−α)})`,
/// summed exactly as stated.
///
/// This differs from the `(N_G+1)`-th y-derivative of `F'_j(t − L y^{1/(1−α)})`,
/// which is [`memory_derivative`]. At `N_G = 0` the gap is
/// `(α/(α−1)) y^{−1} F'_j(τ)`.
pub fn psi(inputs: &ErrorBoundInputs, grid: &PeriodicGrid, j: usize, y: f64, t: f64) -> Result<f64> {
    Ok(compensated_sum(psi_terms(inputs, grid, j, y, t)?))
}

/// The `N_G + 2` summands of [`psi`], indexed by `k`.
pub fn psi_terms(
    inputs: &ErrorBoundInputs,
    grid: &PeriodicGrid,
    j: usize,
    y: f64,
    t: f64,
) -> Result<Vec<f64>> {
    check_psi_args(inputs, grid, j, y)?;
    let a = inputs.alpha;
    let l = inputs.memory_length;
    let m = inputs.n_g + 1;
    let tau = t - l * y.powf(memory_exponent(a));
    let ratio = a / (a - 1.0);
    let lk = l / (a - 1.0);
    Ok((0..=m)
        .map(|k| {
            let power = k as f64 * a / (1.0 - a) + k as f64 - m as f64;
            ln_binomial(m as u64, k as u64).exp()
                * lk.powi(k as i32)
                * falling_factorial(ratio, m - k)
                * y.powf(power)
                * grid.cardinal_derivative_n(j, k, tau)
        })
        .collect())
}

/// `d^order/dy^order F'_j(t − L y^{1/(1−α)})`, by Taylor-series composition.
pub fn memory_derivative(
    inputs: &ErrorBoundInputs,
    grid: &PeriodicGrid,
    j: usize,
    order: usize,
    y: f64,
    t: f64,
) -> Result<f64> {
    check_psi_args(inputs, grid, j, y)?;
    let p = memory_exponent(inputs.alpha);
    let l = inputs.memory_length;
    let n = grid.n();
    let half = n / 2;
    let w = 2.0 * PI / grid.period();

    // Taylor coefficients of d(y + e) = t − t_j − L (y + e)^p in e
    let yp = y.powf(p);
    let mut d = vec![0.0; order + 1];
    d[0] = t - grid.node(j) - l * yp;
    let mut binom = 1.0;
    for (m, dm) in d.iter_mut().enumerate().skip(1) {
        binom *= (p - (m - 1) as f64) / m as f64;
        *dm = -l * yp * binom * y.powi(-(m as i32));
    }

    // F'_j(τ) = −(2w/N)[Σ_{k<N/2} k sin(wk d) + (N/4) sin(w (N/2) d)]
    let sine_coeff = |freq: f64| -> f64 {
        let u: Vec<f64> = d.iter().map(|c| freq * c).collect();
        let mut s = vec![0.0; order + 1];
        let mut c = vec![0.0; order + 1];
        s[0] = u[0].sin();
        c[0] = u[0].cos();
        for m in 1..=order {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for i in 1..=m {
                ss += i as f64 * u[i] * c[m - i];
                cc += i as f64 * u[i] * s[m - i];
            }
            s[m] = ss / m as f64;
            c[m] = -cc / m as f64;
        }
        s[order]
    };
    let mut acc = 0.25 * n as f64 * sine_coeff(w * half as f64);
    for k in 1..half {
        acc += k as f64 * sine_coeff(w * k as f64);
    }
    let factorial: f64 = (1..=order).map(|i| i as f64).product();
    Ok(-2.0 * w / n as f64 * acc * factorial)
}

/// How the binomial factor of the bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseBranch {
    /// `C(N_G+1, ⌊N_G/2⌋)`, valid for every `N_G ≥ 1`.
    Finite,
    /// Large-`N_G` forms, separate for even and odd `N_G`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEstimate {
    /// Natural log of the estimate.
    pub ln_value: f64,
    /// The estimate itself; `+∞` when it overflows.
    pub value: f64,
    /// `L > 1 − α`; the estimate is meaningless otherwise.
    pub valid: bool,
    /// `L > e^{1−γ_em}`.
    pub condition_lmk: bool,
}

/// Trend estimate of the quadrature error bound with all unknown constants set
/// to 1 and the finite-`N_G` binomial factor.
pub fn bound_estimate(inputs: &ErrorBoundInputs) -> Result<BoundEstimate> {
    bound_estimate_with(inputs, CaseBranch::Finite)
}

pub fn bound_estimate_with(inputs: &ErrorBoundInputs, branch: CaseBranch) -> Result<BoundEstimate> {
    let ng = inputs.n_g;
    if ng == 0 {
        return domain("the bound is defined for N_G >= 1");
    }
    let ngf = ng as f64;
    let lam = inputs.lambda;
    let a = inputs.alpha;

    let ln_a = (ngf + 1.0)
        * ((inputs.n as f64).ln() - inputs.zeta.ln() + (inputs.memory_length / (1.0 - a)).ln())
        + ln_gamma_factor(a, ng)?
        + match branch {
            CaseBranch::Finite => ln_binomial(ng as u64 + 1, ng as u64 / 2),
            CaseBranch::Asymptotic if ng % 2 == 0 => 0.5 * ngf * (2.0 * 1f64.exp()).ln() - 0.5 * ngf.ln(),
            CaseBranch::Asymptotic => {
                let h = (ng / 2) as f64;
                h * (ngf.ln() + 1.0) - (h + 0.5) * h.ln()
            }
        };

    let ln_core = -(2.0 * ngf + 1.0) * 2f64.ln() + ngf + (lam - ngf - 1.5) * ngf.ln();

    let ln_case = if lam >= 0.0 {
        0.0
    } else {
        let lg = |x: f64| ln_gamma_signed(x).map(|v| v.0).unwrap_or(f64::INFINITY);
        let ln_sqrt_pi = 0.5 * PI.ln();
        if ng % 2 == 1 {
            lg(ngf / 2.0 + 1.0) + lg(lam + 0.5) - ln_sqrt_pi - lg(ngf / 2.0 + lam + 1.0)
        } else {
            2f64.ln() + lg((ngf + 3.0) / 2.0) + lg(lam + 0.5)
                - ln_sqrt_pi
                - 0.5 * ((ngf + 1.0) * (ngf + 2.0 * lam + 1.0)).ln()
                - lg((ngf + 1.0) / 2.0 + lam)
        }
    };

    let ln_value = ln_a + ln_core + ln_case;
    Ok(BoundEstimate {
        ln_value,
        value: ln_value.exp(),
        valid: inputs.condition_tss(),
        condition_lmk: inputs.condition_lmk(),
    })
}
