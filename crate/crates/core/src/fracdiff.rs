//! The FGPS fractional integration matrix and the periodic fractional derivative.
//!
//! For `0 < α < 1` the sliding-memory Caputo derivative reduces, under
//! `τ = t − L y^{1/(1−α)}`, to
//!
//! ```text
//! D^α f(t) = L^{1−α}/Γ(2−α) ∫₀¹ f'(t − L y^{1/(1−α)}) dy .
//! ```
//!
//! Replacing `f` by its trigonometric interpolant and the integral by the
//! shifted Gegenbauer-Gauss rule gives entries
//! `Q[l][j] = ½ Σ_q P_q F'_j(t_l − L ẑ_q^{1/(1−α)})`. `Q` is Toeplitz (indeed
//! circulant, since `F'_j` is periodic), so only its first row and first column
//! are stored.

use rayon::prelude::*;

use crate::error::{check_len, domain, Result};
use crate::fourier::PeriodicGrid;
use crate::gegenbauer::GegenbauerRule;
use crate::special::gamma;

/// Integer order `m = ⌈α⌉` of the derivative inside the sliding-memory integral.
/// Always 1 here since `0 < α < 1`.
pub const DERIVATIVE_ORDER: u32 = 1;

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        domain(format!("fractional order must lie in (0, 1), got {alpha}"))
    }
}

fn check_memory(memory_length: f64) -> Result<()> {
    if memory_length.is_finite() && memory_length > 0.0 {
        Ok(())
    } else {
        domain(format!("memory length must be positive, got {memory_length}"))
    }
}

/// `y^{1/(1−α)}`, flushed to zero once it underflows.
fn memory_power(y: f64, alpha: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let e = y.ln() / (1.0 - alpha);
    if e < -745.0 {
        0.0
    } else {
        e.exp()
    }
}

/// `τ = t − L y^{1/(1−α)}`.
pub fn memory_argument(t: f64, alpha: f64, memory_length: f64, y: f64) -> Result<f64> {
    check_order(alpha)?;
    if !(0.0..=1.0).contains(&y) {
        return domain(format!("memory coordinate must lie in [0, 1], got {y}"));
    }
    Ok(t - memory_length * memory_power(y, alpha))
}

/// `L^{1−α} / Γ(2−α)`.
pub fn operator_scale(alpha: f64, memory_length: f64) -> f64 {
    memory_length.powf(1.0 - alpha) / gamma(2.0 - alpha)
}

/// Evaluates quadrature values `½ Σ_q P_q F'_j(t − L ẑ_q^{1/(1−α)})` for one
/// parameter set; the memory offsets are computed once.
#[derive(Debug, Clone)]
pub struct FgpsQuadrature<'a> {
    grid: &'a PeriodicGrid,
    weights: &'a [f64],
    offsets: Vec<f64>,
}

impl<'a> FgpsQuadrature<'a> {
    pub fn new(
        alpha: f64,
        memory_length: f64,
        grid: &'a PeriodicGrid,
        rule: &'a GegenbauerRule,
    ) -> Result<Self> {
        check_order(alpha)?;
        check_memory(memory_length)?;
        let offsets = rule
            .shifted_nodes()
            .iter()
            .map(|&z| memory_length * memory_power(z, alpha))
            .collect();
        Ok(Self {
            grid,
            weights: rule.integration_vector(),
            offsets,
        })
    }

    /// Quadrature of `∫₀¹ F'_j(t − L y^{1/(1−α)}) dy` at an arbitrary `t`.
    pub fn value_at(&self, t: f64, j: usize) -> f64 {
        0.5 * self
            .weights
            .iter()
            .zip(&self.offsets)
            .map(|(p, off)| p * self.grid.cardinal_derivative(j, t - off))
            .sum::<f64>()
    }

    /// The matrix entry `Q[l][j]`.
    pub fn entry(&self, l: usize, j: usize) -> f64 {
        self.value_at(self.grid.node(l), j)
    }
}

/// One FGPS quadrature entry `Q[l][j]`, computed directly.
pub fn fgpsq_entry(
    alpha: f64,
    memory_length: f64,
    grid: &PeriodicGrid,
    rule: &GegenbauerRule,
    l: usize,
    j: usize,
) -> Result<f64> {
    if l >= grid.n() || j >= grid.n() {
        return domain(format!("entry ({l}, {j}) out of range for N = {}", grid.n()));
    }
    Ok(FgpsQuadrature::new(alpha, memory_length, grid, rule)?.entry(l, j))
}

/// Periodic fractional derivative operator on a grid: the scaled Toeplitz FGPS matrix.
#[derive(Debug, Clone)]
pub struct FgpsOperator {
    alpha: f64,
    memory_length: f64,
    grid: PeriodicGrid,
    rule: GegenbauerRule,
    first_row: Vec<f64>,
    first_col: Vec<f64>,
    scale: f64,
}

impl FgpsOperator {
    /// Computes the `2N − 1` distinct matrix entries (in parallel).
    pub fn new(
        alpha: f64,
        memory_length: f64,
        grid: PeriodicGrid,
        rule: GegenbauerRule,
    ) -> Result<Self> {
        let n = grid.n();
        let (first_row, first_col) = {
            let quad = FgpsQuadrature::new(alpha, memory_length, &grid, &rule)?;
            // index i < n: row entry (0, i); index n + i: column entry (i + 1, 0)
            let entries: Vec<f64> = (0..2 * n - 1)
                .into_par_iter()
                .map(|i| {
                    if i < n {
                        quad.entry(0, i)
                    } else {
                        quad.entry(i - n + 1, 0)
                    }
                })
                .collect();
            let mut first_col = Vec::with_capacity(n);
            first_col.push(entries[0]);
            first_col.extend_from_slice(&entries[n..]);
            (entries[..n].to_vec(), first_col)
        };
        Ok(Self {
            alpha,
            memory_length,
            scale: operator_scale(alpha, memory_length),
            grid,
            rule,
            first_row,
            first_col,
        })
    }

    /// Convenience constructor from raw parameters.
    pub fn build(
        alpha: f64,
        memory_length: f64,
        n: usize,
        period: f64,
        lambda: f64,
        n_g: usize,
    ) -> Result<Self> {
        check_order(alpha)?;
        check_memory(memory_length)?;
        let grid = PeriodicGrid::new(n, period)?;
        let rule = GegenbauerRule::new(lambda, n_g)?;
        Self::new(alpha, memory_length, grid, rule)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn memory_length(&self) -> f64 {
        self.memory_length
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn rule(&self) -> &GegenbauerRule {
        &self.rule
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn first_col(&self) -> &[f64] {
        &self.first_col
    }

    /// Unscaled `Q[l][j]` read from the Toeplitz storage.
    #[inline]
    pub fn entry(&self, l: usize, j: usize) -> f64 {
        if l >= j {
            self.first_col[l - j]
        } else {
            self.first_row[j - l]
        }
    }

    /// The unscaled `N × N` matrix, row-major.
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|l| (0..n).map(|j| self.entry(l, j)).collect())
            .collect()
    }

    /// `scale · Q · samples`: the derivative approximation at every node.
    pub fn apply(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len("operator samples", n, samples.len())?;
        Ok((0..n)
            .map(|l| {
                let acc: f64 = samples
                    .iter()
                    .enumerate()
                    .map(|(j, s)| self.entry(l, j) * s)
                    .sum();
                self.scale * acc
            })
            .collect())
    }

    /// `Qᵀ v` (unscaled); used for constraint gradients.
    pub fn apply_transpose_unscaled(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        check_len("operator samples", n, v.len())?;
        Ok((0..n)
            .map(|j| (0..n).map(|l| self.entry(l, j) * v[l]).sum())
            .collect())
    }

    /// Derivative approximation at an arbitrary `t`, with the quadrature centred at `t`.
    pub fn apply_at(&self, samples: &[f64], t: f64) -> Result<f64> {
        check_len("operator samples", self.n(), samples.len())?;
        let quad = FgpsQuadrature::new(self.alpha, self.memory_length, &self.grid, &self.rule)?;
        Ok(self.scale
            * samples
                .iter()
                .enumerate()
                .map(|(j, s)| s * quad.value_at(t, j))
                .sum::<f64>())
    }
}
