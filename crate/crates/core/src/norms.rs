//! Certified sup norms and L² norms of translate networks.
//!
//! Sup norms use Lipschitz certification on cells: with `m` the centre and
//! `w` the half-width of a cell, `|f| <= |f(m)| + min(L₁w, |f'(m)|w + L₂w²/2)`
//! on the cell, where `L₁`, `L₂` are `Σ|c_k|` times the sup of the next two
//! Gaussian derivatives. Cells whose bound cannot beat the best sample by
//! more than the requested gap are dropped; the rest are halved. This is
//! exact up to floating-point roundoff, which is not tracked.

use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::kernels::{gaussian_derivative_sup, TranslateNetwork};
use crate::quadrature;

/// Evaluation budget for one sup-norm certification.
pub const SUP_NORM_BUDGET: usize = 50_000_000;

/// A norm together with a certified enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub grid_points: usize,
    pub truncation_radius: f64,
    /// Location of the best sample, for sup norms.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax: Option<f64>,
}

impl NormEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn zero(truncation_radius: f64) -> Self {
        NormEstimate {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            grid_points: 0,
            truncation_radius,
            argmax: Some(0.0),
        }
    }
}

/// `24/(1+x²)`, the uniform envelope for the limit witness when `λ ∈ (0,1)`.
pub fn decay_envelope(lambda: f64, x: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(CertError::Domain {
            quantity: "decay envelope",
            lambda,
        });
    }
    Ok(24.0 / (1.0 + x * x))
}

/// `12/|x|`, the weaker envelope valid for `x ≠ 0` and every `λ > 0`.
pub fn reciprocal_envelope(x: f64) -> f64 {
    12.0 / x.abs()
}

// sup_{|u| >= d} |φ^{(order)}(u)| for d >= 2.
fn gaussian_tail_sup(order: usize, d: f64) -> f64 {
    let e = (-d * d).exp();
    match order {
        0 => e,
        1 => 2.0 * d * e,
        _ => unreachable!("only value and first derivative are certified"),
    }
}

// Distance D >= 2 beyond the outermost node with Σ|c| sup_{|u|>=D}|φ^{(order)}| <= target.
fn truncation_distance(order: usize, mass: f64, target: f64) -> f64 {
    let mut d: f64 = 2.0;
    while mass * gaussian_tail_sup(order, d) > target {
        d += 0.25;
    }
    d
}

fn initial_spacing(lambda: f64) -> f64 {
    0.01 * lambda.min(1.0)
}

/// Number of cells on the starting grid of a sup-norm certification,
/// an estimate of its minimum cost.
pub fn initial_grid_size(net: &TranslateNetwork) -> usize {
    (2.0 * (net.reach() + 4.0) / initial_spacing(net.lambda())).ceil() as usize
}

struct Cell {
    centre: f64,
    half_width: f64,
}

fn certify_sup(net: &TranslateNetwork, order: usize, gap: f64) -> Result<NormEstimate> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(CertError::InvalidParameter(format!(
            "certification gap must be positive, got {gap}"
        )));
    }
    let mass = net.abs_coefficient_sum();
    if mass == 0.0 {
        return Ok(NormEstimate::zero(0.0));
    }
    if gap < 1e-12 * mass {
        return Err(CertError::NormNonConvergence {
            gap,
            achieved: f64::NAN,
            evaluations: 0,
        });
    }
    let slope = gaussian_derivative_sup(order + 1) * mass;
    let curvature = gaussian_derivative_sup(order + 2) * mass;
    let omitted = net.omitted_bound();

    let distance = truncation_distance(order, mass, 0.5 * gap);
    let radius = net.reach() + distance;
    let tail = mass * gaussian_tail_sup(order, distance);

    let spacing = initial_spacing(net.lambda());
    let count = ((2.0 * radius / spacing).ceil() as usize).max(1);
    if count > SUP_NORM_BUDGET {
        return Err(CertError::NormNonConvergence {
            gap,
            achieved: f64::INFINITY,
            evaluations: 0,
        });
    }
    let h = 2.0 * radius / count as f64;
    let mut cells: Vec<Cell> = (0..count)
        .map(|i| Cell {
            centre: -radius + h * (i as f64 + 0.5),
            half_width: 0.5 * h,
        })
        .collect();

    let mut best = 0.0f64;
    let mut argmax = 0.0;
    let mut dropped_upper = tail;
    let mut evaluations = 0usize;

    loop {
        let mut bounds = Vec::with_capacity(cells.len());
        for cell in &cells {
            let jet = net.jet(cell.centre);
            let value = jet[order].abs();
            let w = cell.half_width;
            let growth = (slope * w).min(jet[order + 1].abs() * w + 0.5 * curvature * w * w);
            bounds.push(value + growth + omitted);
            if value > best {
                best = value;
                argmax = cell.centre;
            }
        }
        evaluations += cells.len();

        let mut next = Vec::new();
        let mut open_upper = 0.0f64;
        for (cell, upper) in cells.into_iter().zip(bounds) {
            if upper <= best + gap {
                dropped_upper = dropped_upper.max(upper);
            } else {
                open_upper = open_upper.max(upper);
                next.push(cell);
            }
        }
        if next.is_empty() {
            break;
        }
        if evaluations + 2 * next.len() > SUP_NORM_BUDGET {
            return Err(CertError::NormNonConvergence {
                gap,
                achieved: open_upper.max(dropped_upper) - best,
                evaluations,
            });
        }
        cells = next
            .into_iter()
            .flat_map(|c| {
                let w = 0.5 * c.half_width;
                [
                    Cell {
                        centre: c.centre - w,
                        half_width: w,
                    },
                    Cell {
                        centre: c.centre + w,
                        half_width: w,
                    },
                ]
            })
            .collect();
    }

    let lower = (best - omitted).max(0.0);
    Ok(NormEstimate {
        value: best,
        lower,
        upper: dropped_upper.max(best + omitted),
        grid_points: evaluations,
        truncation_radius: radius,
        argmax: Some(argmax),
    })
}

/// Certified `‖P‖∞` with `upper - lower <= gap`.
pub fn sup_norm(net: &TranslateNetwork, gap: f64) -> Result<NormEstimate> {
    certify_sup(net, 0, gap)
}

/// Certified `‖P'‖∞` with `upper - lower <= gap`.
pub fn sup_norm_derivative(net: &TranslateNetwork, gap: f64) -> Result<NormEstimate> {
    certify_sup(net, 1, gap)
}

/// Largest `|P^{(order)}|` on the initial certification grid; a cheap
/// estimate used to scale gaps.
pub fn coarse_sup(net: &TranslateNetwork, order: usize) -> f64 {
    let radius = net.reach() + 4.0;
    let spacing = initial_spacing(net.lambda());
    let count = (2.0 * radius / spacing).ceil() as usize;
    (0..=count)
        .map(|i| net.jet(-radius + spacing * i as f64)[order].abs())
        .fold(0.0, f64::max)
}

/// `∫ P(x)² dx` for a Gaussian network in closed form.
///
/// Uses `∫ φ(x-a) φ(x-b) dx = √(π/2) e^{-(a-b)²/2}`, grouped by lag.
pub fn l2_norm_squared_closed_form(net: &TranslateNetwork) -> f64 {
    let coeffs: Vec<f64> = net.terms().map(|(_, c)| c).collect();
    let lambda = net.lambda();
    let max_lag = coeffs.len().min((40.0 / lambda).ceil() as usize + 1);
    let base = (std::f64::consts::PI / 2.0).sqrt();
    let mut total = 0.0;
    for lag in (0..max_lag).rev() {
        let r: f64 = coeffs.iter().zip(&coeffs[lag..]).map(|(a, b)| a * b).sum();
        let weight = (-0.5 * (lambda * lag as f64).powi(2)).exp();
        total += if lag == 0 { r } else { 2.0 * r } * weight;
    }
    base * total
}

/// `‖P‖₂²` by adaptive quadrature, cross-checked against the closed form.
///
/// Fails with [`CertError::CrossCheck`] if the two routes differ by more
/// than `2·tol`.
pub fn l2_norm_squared(net: &TranslateNetwork, tol: f64) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(CertError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mass = net.abs_coefficient_sum();
    let closed = l2_norm_squared_closed_form(net);
    if mass == 0.0 {
        return Ok(NormEstimate {
            argmax: None,
            ..NormEstimate::zero(0.0)
        });
    }
    // ∫_{|x| > reach + D} P² <= (Σ|c|)² e^{-2D²} / (2D)
    let mut distance: f64 = 2.0;
    while mass * mass * (-2.0 * distance * distance).exp() / (2.0 * distance) > 0.25 * tol {
        distance += 0.25;
    }
    let radius = net.reach() + distance;
    let tail = mass * mass * (-2.0 * distance * distance).exp() / (2.0 * distance);
    let breaks = quadrature::uniform_breaks(-radius, radius, 0.5 * net.lambda().min(1.0));
    let q = quadrature::integrate_panels(
        |x| {
            let p = net.evaluate(x);
            p * p
        },
        &breaks,
        0.5 * tol,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    let numeric = q.value;
    let error = q.abs_error + tail;
    if (closed - numeric).abs() > 2.0 * tol {
        return Err(CertError::CrossCheck(format!(
            "closed-form L2 norm {closed:.15e} differs from quadrature {numeric:.15e} by more than {:.3e}",
            2.0 * tol
        )));
    }
    Ok(NormEstimate {
        value: closed,
        lower: (closed.min(numeric) - error).max(0.0),
        upper: closed.max(numeric) + error,
        grid_points: q.evaluations,
        truncation_radius: radius,
        argmax: None,
    })
}
