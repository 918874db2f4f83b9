//! Positive and negative Fourier mass of a network on `[-r, r]`, and the
//! oscillation estimate: if `P(0) = 0` and `r > (8³/π)‖P'‖∞/‖P‖∞`, then
//! both `∫_{-r}^{r} (P̂)₊` and `∫_{-r}^{r} (P̂)₋` are at least
//! `(√(2π)/4)‖P‖∞`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::kernels::{fejer_scaled, FourierProfile, TranslateNetwork, INV_SQRT_TAU};
use crate::norms::{coarse_sup, sup_norm, sup_norm_derivative, NormEstimate};
use crate::quadrature;

/// `8³/π`, the frequency-radius constant of the oscillation estimate.
pub const RADIUS_CONSTANT: f64 = 512.0 / PI;

/// `√(2π)/4`, the mass constant of the oscillation estimate.
pub const MASS_CONSTANT: f64 = 0.626_657_068_657_750_1;

/// Relative slack allowed on the mass threshold.
pub const MASS_SLACK: f64 = 1e-6;

/// Maximum number of sign changes isolated before giving up.
pub const MAX_SIGN_CHANGES: usize = 10_000;

/// Default safety factor applied to the minimal radius.
pub const DEFAULT_SAFETY: f64 = 1.01;

/// Masses of the positive and negative parts of a transform on `[-r, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedMasses {
    pub r: f64,
    pub plus_mass: f64,
    pub minus_mass: f64,
    pub quad_error: f64,
    pub sign_changes: usize,
}

/// Outcome of checking the oscillation estimate on one network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub r: f64,
    pub plus_mass: f64,
    pub minus_mass: f64,
    pub quad_error: f64,
    pub sign_changes: usize,
    pub sup_norm_used: NormEstimate,
    pub deriv_norm_used: NormEstimate,
    /// Certified upper bound on `‖P'‖∞/‖P‖∞` used to place `r`.
    pub ratio_upper: f64,
    /// `(√(2π)/4)‖P‖∞` at the upper end of the sup-norm enclosure.
    pub threshold: f64,
    pub passed: bool,
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-13 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `∫_{-r}^{r} (P̂)₊` and `∫_{-r}^{r} (P̂)₋` for a real profile.
///
/// Sign changes are found on a scan at the profile's oscillation step and
/// refined by bisection; integration then runs between consecutive zeros so
/// the kinks of the clipped integrands sit on panel boundaries. Beyond the
/// band radius the transform is below 1e-15 and its mass is added to
/// `quad_error` instead of being integrated.
pub fn signed_part_integrals(profile: &FourierProfile, r: f64, tol: f64) -> Result<SignedMasses> {
    if !(r > 0.0) || !(tol > 0.0) {
        return Err(CertError::InvalidParameter(format!(
            "radius and tolerance must be positive, got r = {r}, tol = {tol}"
        )));
    }
    if !profile.is_real() {
        return Err(CertError::InvalidParameter(
            "oscillation masses need a real-valued transform".into(),
        ));
    }
    let band = profile.band_radius();
    let reach = r.min(band);
    let mut quad_error = 0.0;
    if r > band && band > 0.0 {
        // ∫_{|ω|>R} |P̂| <= (4/R) · (1/√2) Σ|c| e^{-R²/4} < (4/R) · 1e-15
        quad_error += 4.0 / band * crate::kernels::BAND_EPSILON;
    }
    if reach == 0.0 {
        return Ok(SignedMasses {
            r,
            plus_mass: 0.0,
            minus_mass: 0.0,
            quad_error,
            sign_changes: 0,
        });
    }

    let g = |w: f64| profile.value(w);
    let step = profile.scan_step();
    let samples = ((2.0 * reach / step).ceil() as usize).max(2);
    let h = 2.0 * reach / samples as f64;

    let mut breaks = vec![-reach];
    let mut sign_changes = 0;
    let mut prev_w = -reach;
    let mut prev_g = g(prev_w);
    for i in 1..=samples {
        let w = if i == samples {
            reach
        } else {
            -reach + h * i as f64
        };
        let gw = g(w);
        if prev_g != 0.0 && gw != 0.0 && (prev_g > 0.0) != (gw > 0.0) {
            sign_changes += 1;
            if sign_changes > MAX_SIGN_CHANGES {
                return Err(CertError::TooManySignChanges(sign_changes));
            }
            breaks.push(bisect_root(&g, prev_w, w, prev_g));
        } else if gw == 0.0 && i < samples {
            breaks.push(w);
        }
        // Keep panels near the oscillation scale even without sign changes.
        if i % 64 == 0 && i < samples && breaks.last() != Some(&w) {
            breaks.push(w);
        }
        prev_w = w;
        prev_g = gw;
    }
    breaks.push(reach);
    breaks.dedup();

    let plus = quadrature::integrate_panels(
        |w| g(w).max(0.0),
        &breaks,
        0.5 * tol,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    let minus = quadrature::integrate_panels(
        |w| (-g(w)).max(0.0),
        &breaks,
        0.5 * tol,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    quad_error += plus.abs_error + minus.abs_error;

    Ok(SignedMasses {
        r,
        plus_mass: plus.value,
        minus_mass: minus.value,
        quad_error,
        sign_changes,
    })
}

fn check_vanishes_at_origin(net: &TranslateNetwork) -> Result<()> {
    let at_zero = net.evaluate(0.0);
    let scale = net.abs_coefficient_sum().max(1.0);
    if at_zero.abs() > 1e-12 * scale {
        return Err(CertError::HypothesisViolation(format!(
            "network must vanish at the origin, P(0) = {at_zero:e}"
        )));
    }
    Ok(())
}

/// Check the oscillation estimate on `net`, certifying both norms with a
/// gap of `1e-4` times their coarse estimates.
pub fn lemma1_certificate(
    net: &TranslateNetwork,
    safety: f64,
    tol: f64,
) -> Result<OscillationReport> {
    check_vanishes_at_origin(net)?;
    let rough = coarse_sup(net, 0);
    if rough == 0.0 {
        return Err(CertError::HypothesisViolation(
            "network vanishes identically".into(),
        ));
    }
    let sup = sup_norm(net, 1e-4 * rough)?;
    let deriv = sup_norm_derivative(net, 1e-4 * coarse_sup(net, 1).max(rough))?;
    lemma1_certificate_with_norms(net, &sup, &deriv, safety, tol)
}

/// As [`lemma1_certificate`], reusing already certified norms.
///
/// The radius is placed with `‖P‖∞` at its lower end and `‖P'‖∞` at its
/// upper end, so it is never below the required threshold.
pub fn lemma1_certificate_with_norms(
    net: &TranslateNetwork,
    sup: &NormEstimate,
    deriv: &NormEstimate,
    safety: f64,
    tol: f64,
) -> Result<OscillationReport> {
    if !(safety >= 1.0) {
        return Err(CertError::InvalidParameter(format!(
            "safety factor must be at least 1, got {safety}"
        )));
    }
    check_vanishes_at_origin(net)?;
    if !(sup.lower > 0.0) {
        return Err(CertError::HypothesisViolation(
            "sup norm is not certified positive".into(),
        ));
    }
    let ratio_upper = deriv.upper / sup.lower;
    let r = safety * RADIUS_CONSTANT * ratio_upper;
    let profile = crate::kernels::analytic_fourier_transform(net);
    let masses = signed_part_integrals(&profile, r, tol)?;
    let threshold = MASS_CONSTANT * sup.upper;
    let worst = masses.plus_mass.min(masses.minus_mass) - masses.quad_error;
    Ok(OscillationReport {
        r,
        plus_mass: masses.plus_mass,
        minus_mass: masses.minus_mass,
        quad_error: masses.quad_error,
        sign_changes: masses.sign_changes,
        sup_norm_used: *sup,
        deriv_norm_used: *deriv,
        ratio_upper,
        threshold,
        passed: worst >= threshold * (1.0 - MASS_SLACK),
    })
}

/// Upper bound on `max_x |(P ⋆ h_r)(x) - P(x)|` over the sample points,
/// where `(P ⋆ h_r)(x) = (2π)^{-1/2} ∫ P(x - t) r h(rt) dt`.
///
/// For `r` above `(8³/π)‖P'‖∞/‖P‖∞` the true value is below `‖P‖∞/4`.
/// The convolution is integrated in `u = x - t` over the window where `P`
/// is non-negligible, with panels between consecutive zeros of the kernel;
/// quadrature and truncation errors are added to the result.
pub fn fejer_smoothing_error(net: &TranslateNetwork, r: f64, x_samples: &[f64]) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(CertError::InvalidParameter(format!(
            "smoothing radius must be positive, got {r}"
        )));
    }
    let mass = net.abs_coefficient_sum();
    if mass == 0.0 {
        return Ok(0.0);
    }
    // Outside reach + D, |P| <= Σ|c| e^{-D²}; the kernel has unit mass.
    let mut distance: f64 = 2.0;
    while (-distance * distance).exp() > 1e-14 {
        distance += 0.25;
    }
    let window = net.reach() + distance;
    let outside = mass * (-distance * distance).exp();
    let tol = 1e-9 * mass;
    let period = 2.0 * PI / r;

    let mut worst = 0.0f64;
    for &x in x_samples {
        // Kernel zeros at u = x - 2πj/r.
        let j_lo = ((x - window) / period).ceil() as i64;
        let j_hi = ((x + window) / period).floor() as i64;
        let mut breaks = Vec::with_capacity((j_hi - j_lo + 3).max(2) as usize);
        breaks.push(-window);
        for j in (j_lo..=j_hi).rev() {
            let u = x - period * j as f64;
            if u > -window && u < window {
                breaks.push(u);
            }
        }
        breaks.push(window);
        let q = quadrature::integrate_panels(
            |u| net.evaluate(u) * fejer_scaled(r, x - u),
            &breaks,
            tol * (1.0 / INV_SQRT_TAU),
            quadrature::DEFAULT_MAX_INTERVALS,
        )?;
        let smoothed = INV_SQRT_TAU * q.value;
        let error = (smoothed - net.evaluate(x)).abs() + INV_SQRT_TAU * q.abs_error + outside;
        worst = worst.max(error);
    }
    Ok(worst)
}
