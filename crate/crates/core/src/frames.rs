//! Riesz-type bounds for Gaussian translate systems.
//!
//! For `f = Σ c_k φ(· - λk)` one has
//! `μ(λ) Σ|c_k|² <= ‖f‖₂² <= M(λ) Σ|c_k|²` with
//! `μ, M = (2π/λ) inf/sup_ω G(ω)` and `G(ω) = Σ_l |φ̂((ω + 2πl)/λ)|²`.
//! For the Gaussian, `G(ω) = ½ Σ_l e^{-(ω+2πl)²/(2λ²)}`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::kernels::TranslateNetwork;
use crate::norms::{l2_norm_squared, NormEstimate};
use crate::quadrature::{self, Quadrature};

/// Default number of ω cells per period.
pub const DEFAULT_OMEGA_GRID: usize = 4096;

/// Relative accuracy of the certified inf and sup of `G`.
const RELATIVE_GAP: f64 = 1e-9;

const REFINEMENT_BUDGET: usize = 2_000_000;

/// `πλ⁻¹ e^{-π²/(2λ²)}`, the closed-form lower bound for `μ(λ)`.
pub fn explicit_mu_lower_bound(lambda: f64) -> f64 {
    PI / lambda * (-PI * PI / (2.0 * lambda * lambda)).exp()
}

// ω reduced to [-π, π].
fn reduce(omega: f64) -> f64 {
    omega - TAU * (omega / TAU).round()
}

fn term(lambda: f64, u: f64) -> f64 {
    0.5 * (-u * u / (2.0 * lambda * lambda)).exp()
}

/// `Σ_{|l| <= l_max} |φ̂((ω + 2πl)/λ)|²` with `ω` first reduced to `[-π, π]`.
pub fn periodized_transform_energy(lambda: f64, omega: f64, l_max: usize) -> f64 {
    let w = reduce(omega);
    let l_max = l_max as i64;
    // Small terms first.
    let mut sum = 0.0;
    for l in (1..=l_max).rev() {
        sum += term(lambda, w + TAU * l as f64) + term(lambda, w - TAU * l as f64);
    }
    sum + term(lambda, w)
}

/// Smallest `L >= 1` whose dropped terms are below `1e-15` of `inf G`.
pub fn l_truncation(lambda: f64) -> usize {
    let target = (4e15f64).ln();
    let mut l = 1usize;
    while PI * PI * (((2 * l + 1) as f64).powi(2) - 1.0) / (2.0 * lambda * lambda) < target {
        l += 1;
    }
    l
}

// Absolute bound on Σ_{|l|>L} ½ e^{-(ω+2πl)²/(2λ²)} for ω in [-π, π].
fn dropped_tail(lambda: f64, l_max: usize) -> f64 {
    let d = PI * (2 * l_max + 1) as f64;
    2.0 * (-d * d / (2.0 * lambda * lambda)).exp()
}

/// Certified frame constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lambda: f64,
    /// Certified lower bound for `μ(λ)`.
    pub mu: f64,
    /// `(2π/λ)` times the smallest sampled `G`.
    pub mu_estimate: f64,
    /// Certified upper bound for `M(λ)`.
    pub big_m: f64,
    pub big_m_estimate: f64,
    pub omega_grid: usize,
    pub l_truncation: usize,
    /// `πλ⁻¹ e^{-π²/(2λ²)}`.
    pub explicit_mu_bound: f64,
}

#[derive(Clone, Copy)]
struct Cell {
    centre: f64,
    half_width: f64,
}

// Enclosure of G over a cell: each term is monotone in |u|, so it is
// bracketed by its values at |u| ± w.
fn cell_bounds(lambda: f64, cell: Cell, l_max: usize) -> (f64, f64, f64) {
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut centre = 0.0;
    let l_max = l_max as i64;
    for l in -l_max..=l_max {
        let u = (cell.centre + TAU * l as f64).abs();
        let w = cell.half_width;
        lower += term(lambda, u + w);
        upper += term(lambda, (u - w).max(0.0));
        centre += term(lambda, u);
    }
    (lower, upper, centre)
}

fn split(cell: Cell) -> [Cell; 2] {
    let w = 0.5 * cell.half_width;
    [
        Cell {
            centre: cell.centre - w,
            half_width: w,
        },
        Cell {
            centre: cell.centre + w,
            half_width: w,
        },
    ]
}

// (certified, sampled) extremum of G over one period.
fn certified_extremum(lambda: f64, grid: usize, l_max: usize, minimise: bool) -> (f64, f64) {
    let h = TAU / grid as f64;
    let mut cells: Vec<Cell> = (0..grid)
        .map(|i| Cell {
            centre: -PI + h * (i as f64 + 0.5),
            half_width: 0.5 * h,
        })
        .collect();
    let mut sampled = if minimise { f64::INFINITY } else { 0.0 };
    let mut certified = sampled;
    let mut evaluations = 0;
    while !cells.is_empty() && evaluations < REFINEMENT_BUDGET {
        let bounds: Vec<_> = cells
            .iter()
            .map(|&c| cell_bounds(lambda, c, l_max))
            .collect();
        evaluations += cells.len();
        for &(_, _, centre) in &bounds {
            sampled = if minimise {
                sampled.min(centre)
            } else {
                sampled.max(centre)
            };
        }
        let mut next = Vec::new();
        for (cell, (lower, upper, _)) in cells.into_iter().zip(bounds) {
            let settled = if minimise {
                lower >= sampled * (1.0 - RELATIVE_GAP)
            } else {
                upper <= sampled * (1.0 + RELATIVE_GAP)
            };
            if settled {
                certified = if minimise {
                    certified.min(lower)
                } else {
                    certified.max(upper)
                };
            } else {
                next.extend(split(cell));
            }
        }
        cells = next;
    }
    // Budget exhausted: fall back to the enclosures of what is left.
    for cell in cells {
        let (lower, upper, _) = cell_bounds(lambda, cell, l_max);
        certified = if minimise {
            certified.min(lower)
        } else {
            certified.max(upper)
        };
    }
    (certified, sampled)
}

/// Certified `μ(λ)` and `M(λ)` from a `grid`-cell scan of one period,
/// refined by bisection until inf and sup of `G` are enclosed to 1e-9
/// relative.
pub fn frame_bounds(lambda: f64, grid: usize) -> Result<FrameBounds> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CertError::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if grid < 64 {
        return Err(CertError::InvalidParameter(format!(
            "omega grid needs at least 64 cells, got {grid}"
        )));
    }
    let l_max = l_truncation(lambda);
    let scale = TAU / lambda;
    let (inf_lower, inf_sampled) = certified_extremum(lambda, grid, l_max, true);
    let (sup_upper, sup_sampled) = certified_extremum(lambda, grid, l_max, false);
    Ok(FrameBounds {
        lambda,
        mu: scale * inf_lower,
        mu_estimate: scale * inf_sampled,
        big_m: scale * (sup_upper + dropped_tail(lambda, l_max)),
        big_m_estimate: scale * sup_sampled,
        omega_grid: grid,
        l_truncation: l_max,
        explicit_mu_bound: explicit_mu_lower_bound(lambda),
    })
}

/// Both sides of the two-sided Riesz inequality for one network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCheck {
    pub lambda: f64,
    pub l2_squared: NormEstimate,
    pub coefficient_energy: f64,
    pub mu: f64,
    pub big_m: f64,
    /// `μ(λ) Σ|c_k|²`.
    pub lower_side: f64,
    /// `M(λ) Σ|c_k|²`.
    pub upper_side: f64,
    /// `‖f‖₂² >= μ Σ|c_k|² - tol`.
    pub holds: bool,
    /// `‖f‖₂² <= M Σ|c_k|² + tol`.
    pub upper_holds: bool,
}

pub fn frame_inequality_check(net: &TranslateNetwork, tol: f64) -> Result<FrameCheck> {
    let bounds = frame_bounds(net.lambda(), DEFAULT_OMEGA_GRID)?;
    frame_inequality_check_with(net, &bounds, tol)
}

/// As [`frame_inequality_check`] with precomputed bounds for the same `λ`.
pub fn frame_inequality_check_with(
    net: &TranslateNetwork,
    bounds: &FrameBounds,
    tol: f64,
) -> Result<FrameCheck> {
    if bounds.lambda != net.lambda() {
        return Err(CertError::InvalidParameter(format!(
            "frame bounds for lambda = {} used with a network at lambda = {}",
            bounds.lambda,
            net.lambda()
        )));
    }
    let l2 = l2_norm_squared(net, tol)?;
    let energy = net.coefficient_energy();
    let lower_side = bounds.mu * energy;
    let upper_side = bounds.big_m * energy;
    Ok(FrameCheck {
        lambda: bounds.lambda,
        l2_squared: l2,
        coefficient_energy: energy,
        mu: bounds.mu,
        big_m: bounds.big_m,
        lower_side,
        upper_side,
        holds: l2.value >= lower_side - tol,
        upper_holds: l2.value <= upper_side + tol,
    })
}

/// `‖f‖₂²` through the frequency domain:
/// `(1/λ) ∫_{-π}^{π} G(ω) |Σ c_k e^{ikω}|² dω`.
pub fn periodized_l2_norm_squared(net: &TranslateNetwork, tol: f64) -> Result<Quadrature> {
    let lambda = net.lambda();
    let l_max = l_truncation(lambda);
    let terms: Vec<(f64, f64)> = net.terms().map(|(k, c)| (k as f64, c)).collect();
    let span = net
        .index_range()
        .map(|(lo, hi)| (hi - lo).max(1) as f64)
        .unwrap_or(1.0);
    let breaks = quadrature::uniform_breaks(-PI, PI, PI / (4.0 * span));
    let q = quadrature::integrate_panels(
        |w| {
            let (mut re, mut im) = (0.0, 0.0);
            for &(k, c) in &terms {
                let (s, co) = (k * w).sin_cos();
                re += c * co;
                im += c * s;
            }
            periodized_transform_energy(lambda, w, l_max) * (re * re + im * im)
        },
        &breaks,
        tol * lambda,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    Ok(Quadrature {
        value: q.value / lambda,
        abs_error: q.abs_error / lambda,
        evaluations: q.evaluations,
    })
}
