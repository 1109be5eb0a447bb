//! Scalar special-function helpers shared across modules.

use std::f64::consts::PI;

pub use statrs::function::gamma::gamma;

/// `ln|Γ(x)|` together with the sign of `Γ(x)`.
///
/// Returns `None` at the poles `x ∈ {0, −1, −2, …}`.
pub fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if x > 0.0 {
        return Some((statrs::function::gamma::ln_gamma(x), 1.0));
    }
    if x == x.floor() {
        return None;
    }
    // Γ(x) Γ(1 − x) = π / sin(πx)
    let s = (PI * x).sin();
    let (ln_rest, _) = ln_gamma_signed(1.0 - x)?;
    Some((PI.ln() - s.abs().ln() - ln_rest, s.signum()))
}

/// `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 0.0 && x < 170.0 {
        return 1.0 / gamma(x);
    }
    match ln_gamma_signed(x) {
        Some((lg, sign)) => sign * (-lg).exp(),
        None => 0.0,
    }
}

/// Natural log of the binomial coefficient `C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    debug_assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Neumaier-compensated sum; order-insensitive to within a few ulps of the result.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln(Σ exp(x_i))` without overflow; `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_known_values() {
        assert!((gamma(1.5) - PI.sqrt() / 2.0).abs() < 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        // Γ(1.3) from tables: 0.897470696306277...
        assert!((gamma(1.3) - 0.897_470_696_306_277_2).abs() < 1e-14);
    }

    #[test]
    fn signed_log_gamma_negative_arguments() {
        let (lg, s) = ln_gamma_signed(-0.5).unwrap();
        // Γ(−1/2) = −2√π
        assert_eq!(s, -1.0);
        assert!((lg.exp() - 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!(ln_gamma_signed(-2.0).is_none());
        assert!(ln_gamma_signed(0.0).is_none());
    }

    #[test]
    fn reciprocal_gamma_vanishes_at_poles() {
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert!((recip_gamma(-1.5) - 1.0 / (4.0 * PI.sqrt() / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn log_sum_exp_basic() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
