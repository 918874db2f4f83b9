//! Choosing the truncation order, building the canonical witness and
//! certifying `‖P'‖∞/‖P‖∞ >= π²/(2¹⁰λ)`.
//!
//! Gaps passed to this module are relative: each sup norm is certified
//! to `gap` times a coarse estimate of its size.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{
    auxiliary_h, cosine_coefficient, f_infinite, shift_functional, tail_abs_sum_bound,
    ShiftParameters,
};
use crate::error::{CertError, Result};
use crate::kernels::{canonical_witness, gaussian_hat, TranslateNetwork, INV_SQRT_TAU};
use crate::norms::{
    coarse_sup, initial_grid_size, sup_norm, sup_norm_derivative, NormEstimate, SUP_NORM_BUDGET,
};
use crate::oscillation::{lemma1_certificate_with_norms, OscillationReport, DEFAULT_SAFETY};
use crate::quadrature;

/// Largest order tried by [`choose_n`].
pub const N_MAX: usize = 10_000_000;

/// Relative gap used when none is given.
pub const DEFAULT_GAP: f64 = 1e-4;

/// Weight of the limit witness' sup norm in the sufficient tail condition.
const TAIL_FACTOR: f64 = 20.0;

/// Decay constant of the limit witness, `|P_∞(x)| <= C/|x|`.
const DECAY_C: f64 = 12.0;

/// Quadrature tolerance for the transform masses.
const OSCILLATION_TOL: f64 = 1e-10;

/// `π²/(2¹⁰λ)`.
pub fn ratio_threshold(lambda: f64) -> f64 {
    PI * PI / (1024.0 * lambda)
}

fn check_unit_interval(lambda: f64, quantity: &'static str) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(CertError::Domain { quantity, lambda })
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(CertError::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )))
    }
}

/// `(1280/(3π)) λ e^{π²/(2λ²)}`, the order above which the tail
/// condition holds with the printed coefficient constants.
pub fn paper_n0(lambda: f64) -> Result<f64> {
    check_unit_interval(lambda, "paper N0")?;
    Ok(1280.0 / (3.0 * PI) * lambda * (PI * PI / (2.0 * lambda * lambda)).exp())
}

/// The same threshold with `Σ_{k>=1} a_k² = 1/4`, namely
/// `(1920/π) λ e^{π²/(2λ²)}`.
pub fn recomputed_n0(lambda: f64) -> Result<f64> {
    check_unit_interval(lambda, "recomputed N0")?;
    Ok(1920.0 / PI * lambda * (PI * PI / (2.0 * lambda * lambda)).exp())
}

/// Analytic lower bound `(π/(4Cλ)) e^{-π²/(2λ²)} Σ|α_k|²` for `‖P_∞‖∞`,
/// with `C = 12` and the coefficient energy bounded below by `energy`.
fn analytic_p_infty_bound(lambda: f64, energy: f64) -> f64 {
    PI / (4.0 * DECAY_C * lambda) * (-PI * PI / (2.0 * lambda * lambda)).exp() * energy
}

/// The printed analytic bound, `(9π/(16Cλ)) e^{-π²/(2λ²)}`.
pub fn paper_p_infty_bound(lambda: f64) -> f64 {
    analytic_p_infty_bound(lambda, 9.0 / 4.0)
}

/// The analytic bound with `Σ|α_k|² >= 2 Σ_{k>=1} a_k² = 1/2`.
pub fn recomputed_p_infty_bound(lambda: f64) -> f64 {
    analytic_p_infty_bound(lambda, 0.5)
}

/// Upper bound on `‖P_∞‖∞` through `(2π)^{-1/2} ∫ |P̂_∞|`, where
/// `P̂_∞(ω) = 2φ̂(ω)(H(λω) - F(λ))`.
pub fn p_infty_sup_upper_bound(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let f = f_infinite(lambda);
    // φ̂(ω) < 1e-17 beyond ω = 12.6.
    let omega_max = 12.6;
    let step = (PI / (2.0 * lambda)).min(0.5);
    let breaks = quadrature::uniform_breaks(0.0, omega_max, step);
    let q = quadrature::integrate_panels(
        |w| 2.0 * gaussian_hat(w) * (auxiliary_h(lambda * w) - f).abs(),
        &breaks,
        1e-13,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    // Both half-lines, plus the dropped tail (|H - F| <= 2).
    let tail = 8.0 * (-omega_max * omega_max / 4.0).exp();
    Ok(INV_SQRT_TAU * 2.0 * (q.value + q.abs_error + tail))
}

fn certified_norms(net: &TranslateNetwork, gap: f64) -> Result<(NormEstimate, NormEstimate)> {
    let rough = coarse_sup(net, 0);
    let rough_deriv = coarse_sup(net, 1);
    if rough == 0.0 || rough_deriv == 0.0 {
        return Err(CertError::HypothesisViolation(
            "network vanishes on the sampling grid".into(),
        ));
    }
    let sup = sup_norm(net, gap * rough)?;
    let deriv = sup_norm_derivative(net, gap * rough_deriv)?;
    Ok((sup, deriv))
}

/// `max(0, ‖P_n‖∞ - 4 Σ_{k>n}|a_k|)` from a certified lower end of
/// `‖P_n‖∞`; a lower bound for `‖P_∞‖∞`.
pub fn p_infty_sup_lower_bound(lambda: f64, n_probe: usize, gap: f64) -> Result<f64> {
    let net = canonical_witness(&ShiftParameters::new(lambda, n_probe)?);
    let rough = coarse_sup(&net, 0);
    if rough == 0.0 {
        return Ok(0.0);
    }
    let sup = sup_norm(&net, gap * rough)?;
    Ok((sup.lower - 4.0 * tail_abs_sum_bound(n_probe)).max(0.0))
}

/// Outcome of the order search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderChoice {
    pub n: usize,
    pub tail_bound: f64,
    pub p_infty_lower: f64,
    /// Whether `n` exceeds the printed threshold; `None` for `λ >= 1`.
    pub exceeds_paper_n0: Option<bool>,
}

/// Smallest power of two `n` with `20 Σ_{k>n}|a_k| < ‖P_∞‖∞`, the latter
/// bounded below through `P_n`.
///
/// Orders whose tail already exceeds the Fourier upper bound on
/// `‖P_∞‖∞` are skipped without certifying any norm. The search also
/// stops once a witness is too wide to certify within the sup-norm
/// evaluation budget; the error then names the largest order tried.
pub fn choose_n(lambda: f64, gap: f64) -> Result<OrderChoice> {
    check_lambda(lambda)?;
    check_gap(gap)?;
    let ceiling = p_infty_sup_upper_bound(lambda)?;
    let mut n = 1usize;
    let mut tried = 0;
    while n <= N_MAX {
        let tail = tail_abs_sum_bound(n);
        if TAIL_FACTOR * tail < ceiling {
            let net = canonical_witness(&ShiftParameters::new(lambda, n)?);
            if initial_grid_size(&net) > SUP_NORM_BUDGET {
                break;
            }
            let lower = p_infty_sup_lower_bound(lambda, n, gap)?;
            if TAIL_FACTOR * tail < lower {
                return Ok(OrderChoice {
                    n,
                    tail_bound: tail,
                    p_infty_lower: lower,
                    exceeds_paper_n0: paper_n0(lambda).ok().map(|n0| n as f64 > n0),
                });
            }
        }
        tried = n;
        n *= 2;
    }
    Err(CertError::SearchExhausted {
        lambda,
        n_max: tried,
    })
}

fn check_gap(gap: f64) -> Result<()> {
    if gap > 0.0 && gap < 1.0 {
        Ok(())
    } else {
        Err(CertError::InvalidParameter(format!(
            "relative gap must lie in (0, 1), got {gap}"
        )))
    }
}

/// Audit record for one certified witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    pub lambda: f64,
    pub n: usize,
    /// `None` outside `λ ∈ (0,1)`.
    pub n0_paper: Option<f64>,
    /// `‖P'‖∞` lower end over `‖P‖∞` upper end.
    pub ratio_lower: f64,
    pub threshold: f64,
    pub passed: bool,
    pub sup_norm: NormEstimate,
    pub deriv_norm: NormEstimate,
    pub tail_bound: f64,
    pub p_infty_lower: f64,
    pub oscillation: Option<OscillationReport>,
}

impl WitnessCertificate {
    /// `20 Σ_{k>n}|a_k| < ‖P_∞‖∞` with the recorded bounds.
    pub fn tail_condition_holds(&self) -> bool {
        TAIL_FACTOR * self.tail_bound < self.p_infty_lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub gap: f64,
    pub with_oscillation: bool,
    /// Skip the order search and use this `n`.
    pub n_override: Option<usize>,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            gap: DEFAULT_GAP,
            with_oscillation: false,
            n_override: None,
        }
    }
}

/// Certified ratio bound for an arbitrary network.
pub fn certified_ratio(
    net: &TranslateNetwork,
    gap: f64,
) -> Result<(f64, NormEstimate, NormEstimate)> {
    check_gap(gap)?;
    let (sup, deriv) = certified_norms(net, gap)?;
    Ok((deriv.lower.max(0.0) / sup.upper, sup, deriv))
}

pub fn certify(lambda: f64, gap: f64, with_oscillation: bool) -> Result<WitnessCertificate> {
    certify_with(
        lambda,
        &CertifyOptions {
            gap,
            with_oscillation,
            n_override: None,
        },
    )
}

pub fn certify_with(lambda: f64, options: &CertifyOptions) -> Result<WitnessCertificate> {
    check_lambda(lambda)?;
    check_gap(options.gap)?;
    let n = match options.n_override {
        Some(n) => n,
        None => choose_n(lambda, options.gap)?.n,
    };
    let net = canonical_witness(&ShiftParameters::new(lambda, n)?);
    let (ratio_lower, sup, deriv) = certified_ratio(&net, options.gap)?;
    let tail_bound = tail_abs_sum_bound(n);
    let threshold = ratio_threshold(lambda);
    let oscillation = if options.with_oscillation {
        Some(lemma1_certificate_with_norms(
            &net,
            &sup,
            &deriv,
            DEFAULT_SAFETY,
            OSCILLATION_TOL * sup.upper,
        )?)
    } else {
        None
    };
    let n0_paper = paper_n0(lambda).ok();
    let passed = ratio_lower >= threshold;
    if let Some(n0) = n0_paper {
        if n as f64 > n0 && !passed {
            return Err(CertError::CrossCheck(format!(
                "critical discrepancy: n = {n} exceeds N0 = {n0:.6e} at lambda = {lambda} \
                 but the ratio bound {ratio_lower:.6e} is below {threshold:.6e}"
            )));
        }
    }
    Ok(WitnessCertificate {
        lambda,
        n,
        n0_paper,
        ratio_lower,
        threshold,
        passed,
        sup_norm: sup,
        deriv_norm: deriv,
        tail_bound,
        p_infty_lower: (sup.lower - 4.0 * tail_bound).max(0.0),
        oscillation,
    })
}

/// Truncation bounds for `P_n` together with a sampled check of the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationDiagnostics {
    /// `2 Σ_{k>n}|a_k|`, bounding `|T_n(ω) - H(λω) + F_n(λ)|`.
    pub delta_bound: f64,
    /// `4 Σ_{k>n}|a_k|`, bounding `‖P_∞ - P_n‖∞`.
    pub p_diff_bound: f64,
    /// Largest sampled `|T_n(ω) - H(λω) + F_n(λ)|`.
    pub sampled_delta: f64,
    pub samples: usize,
}

impl TruncationDiagnostics {
    pub fn sampled_within_bound(&self) -> bool {
        self.sampled_delta <= self.delta_bound
    }
}

pub fn truncation_diagnostics(lambda: f64, n: usize) -> Result<TruncationDiagnostics> {
    let p = ShiftParameters::new(lambda, n)?;
    let tail = tail_abs_sum_bound(n);
    let f_n = cosine_coefficient(0) - shift_functional(lambda, n);
    // One period of H(λω), sampled densely enough to see the kinks.
    let period = 2.0 * PI / lambda;
    let samples = 2001;
    let coeffs: Vec<f64> = (1..=n).map(cosine_coefficient).collect();
    let phi_sum: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a * crate::kernels::gaussian(lambda * (i + 1) as f64))
        .sum();
    let mut sampled_delta: f64 = 0.0;
    for i in 0..samples {
        let w = -0.5 * period + period * i as f64 / (samples - 1) as f64;
        // T_n(ω) without re-summing the constant part for every sample.
        let t: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| a * (((k + 1) as f64) * lambda * w).cos())
            .sum::<f64>()
            - phi_sum;
        sampled_delta = sampled_delta.max((t - auxiliary_h(lambda * w) + f_n).abs());
    }
    debug_assert!(p.n() == n);
    Ok(TruncationDiagnostics {
        delta_bound: 2.0 * tail,
        p_diff_bound: 4.0 * tail,
        sampled_delta,
        samples,
    })
}

/// One row of the sharpness sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub n: Option<usize>,
    pub ratio_lower: Option<f64>,
    pub threshold: f64,
    /// `ratio_lower · λ`, to be compared with `π²/2¹⁰`.
    pub product: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

impl SweepRow {
    fn from_result(lambda: f64, result: Result<WitnessCertificate>) -> Self {
        let threshold = ratio_threshold(lambda);
        match result {
            Ok(cert) => SweepRow {
                lambda,
                n: Some(cert.n),
                ratio_lower: Some(cert.ratio_lower),
                threshold,
                product: Some(cert.ratio_lower * lambda),
                passed: cert.passed,
                error: None,
            },
            Err(e) => SweepRow {
                lambda,
                n: None,
                ratio_lower: None,
                threshold,
                product: None,
                passed: false,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Certify every `λ` in parallel; failing rows are recorded, not fatal.
pub fn sharpness_sweep(lambdas: &[f64], gap: f64) -> Vec<SweepRow> {
    lambdas
        .par_iter()
        .map(|&lambda| SweepRow::from_result(lambda, certify(lambda, gap, false)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n0_examples() {
        let near_one = paper_n0(1.0 - 1e-12).unwrap();
        assert!((near_one - 18_884.096_332_7).abs() < 1e-3);
        let half = paper_n0(0.5).unwrap();
        assert!((half / 2.538_272_861_8e10 - 1.0).abs() < 1e-9);
        assert!(paper_n0(0.4).unwrap() > paper_n0(0.8).unwrap());
        assert!(paper_n0(1.0).is_err() && paper_n0(0.0).is_err());
        let ratio = recomputed_n0(0.7).unwrap() / paper_n0(0.7).unwrap();
        assert!((ratio - 4.5).abs() < 1e-12);
    }

    #[test]
    fn threshold_value() {
        assert!((ratio_threshold(1.0) - 0.009_638_285_547_938_8).abs() < 1e-15);
    }

    #[test]
    fn analytic_bounds_are_consistent() {
        for lambda in [0.5, 0.8, 1.0, 1.5] {
            let lower = recomputed_p_infty_bound(lambda);
            let upper = p_infty_sup_upper_bound(lambda).unwrap();
            let certified = p_infty_sup_lower_bound(lambda, 256, 1e-6).unwrap();
            assert!(lower <= certified, "lambda {lambda}: {lower} > {certified}");
            assert!(certified <= upper, "lambda {lambda}: {certified} > {upper}");
        }
        assert!(paper_p_infty_bound(0.7) > recomputed_p_infty_bound(0.7));
    }

    #[test]
    fn lower_bound_examples() {
        assert!(p_infty_sup_lower_bound(0.5, 200, 1e-4).unwrap() > 0.0);
        assert_eq!(p_infty_sup_lower_bound(0.5, 1, 1e-4).unwrap(), 0.0);
        let mut last = 0.0;
        for n in [16, 32, 64, 128] {
            let b = p_infty_sup_lower_bound(0.8, n, 1e-6).unwrap();
            assert!(b >= last - 1e-6 * b.max(1e-300), "n {n}: {b} < {last}");
            last = b;
        }
    }

    #[test]
    fn order_search() {
        let one = choose_n(1.0, 1e-4).unwrap();
        assert!(one.n <= 100_000);
        assert!(one.exceeds_paper_n0.is_none());
        let half = choose_n(0.5, 1e-4).unwrap();
        let nine = choose_n(0.9, 1e-4).unwrap();
        assert!(half.n >= nine.n);
        assert_eq!(half.exceeds_paper_n0, Some(false));
        assert!(20.0 * half.tail_bound < half.p_infty_lower);
        assert!(matches!(
            choose_n(0.1, 1e-4),
            Err(CertError::SearchExhausted { .. })
        ));
        // The tail condition stays just out of reach here; the search must
        // give up on cost grounds instead of allocating a huge grid.
        assert!(matches!(
            choose_n(0.3, 1e-4),
            Err(CertError::SearchExhausted { .. })
        ));
    }

    #[test]
    fn certify_half() {
        let cert = certify(0.5, 1e-4, false).unwrap();
        assert!(cert.passed);
        assert!(cert.ratio_lower >= cert.threshold);
        assert!(cert.tail_condition_holds());
        assert!(cert.deriv_norm.lower <= cert.deriv_norm.upper);
        assert!(cert.oscillation.is_none());
        let net = canonical_witness(&ShiftParameters::new(0.5, cert.n).unwrap());
        assert!(net.evaluate(0.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        let net = canonical_witness(&ShiftParameters::new(0.8, 32).unwrap());
        let (r1, ..) = certified_ratio(&net, 1e-6).unwrap();
        let (r3, ..) = certified_ratio(&net.scaled(3.0).unwrap(), 1e-6).unwrap();
        assert!((r1 - r3).abs() <= 1e-12 * r1);
        let (r4, ..) = certified_ratio(&net.scaled(4.0).unwrap(), 1e-6).unwrap();
        assert_eq!(r1, r4);
    }

    #[test]
    fn certificates_are_deterministic() {
        let options = CertifyOptions {
            gap: 1e-4,
            with_oscillation: false,
            n_override: Some(16),
        };
        let a = serde_json::to_string(&certify_with(0.9, &options).unwrap()).unwrap();
        let b = serde_json::to_string(&certify_with(0.9, &options).unwrap()).unwrap();
        assert_eq!(a, b);
        for field in [
            "\"lambda\"",
            "\"n\"",
            "\"n0_paper\"",
            "\"ratio_lower\"",
            "\"threshold\"",
            "\"passed\"",
            "\"sup_norm\"",
            "\"deriv_norm\"",
            "\"tail_bound\"",
            "\"p_infty_lower\"",
            "\"oscillation\"",
        ] {
            assert!(a.contains(field), "missing {field}");
        }
    }

    #[test]
    fn truncation_examples() {
        let d = truncation_diagnostics(0.7, 100).unwrap();
        assert!(d.delta_bound <= 0.02 && d.p_diff_bound <= 0.04);
        assert!(d.sampled_within_bound());
        let d2 = truncation_diagnostics(0.7, 200).unwrap();
        assert!(d2.delta_bound < 0.6 * d.delta_bound);
        // At ω = 0 the difference is the plain partial-sum error of H(0) = 1.
        let p = ShiftParameters::new(0.7, 50).unwrap();
        let f_n = 0.75 - shift_functional(0.7, 50);
        let at_zero = crate::kernels::trig_polynomial_t(&p, 0.0) - 1.0 + f_n;
        assert!(at_zero.abs() <= tail_abs_sum_bound(50));
    }

    #[test]
    fn sweep_examples() {
        assert!(sharpness_sweep(&[], 1e-4).is_empty());
        let rows = sharpness_sweep(&[0.9, 0.05], 1e-4);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].passed && rows[0].product.unwrap() >= PI * PI / 1024.0);
        assert!(!rows[1].passed && rows[1].error.is_some());
        let cert = certify(0.9, 1e-4, false).unwrap();
        assert_eq!(rows[0].ratio_lower, Some(cert.ratio_lower));
        assert_eq!(rows[0].n, Some(cert.n));
    }
}
