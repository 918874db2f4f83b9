//! Globally adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! The error estimate of a panel is the raw difference between the Kronrod
//! and embedded Gauss results. That is pessimistic for smooth integrands,
//! which is the direction we want when the result feeds a certificate.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{CertError, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default cap on the number of live subintervals.
pub const DEFAULT_MAX_INTERVALS: usize = 200_000;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // Sum of |f| weights, used for the roundoff floor.
    magnitude: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut magnitude = WGK[7] * fc.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        magnitude += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let h = half.abs();
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        magnitude: magnitude * h,
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    integrate_panels(f, &[a, b], tol, DEFAULT_MAX_INTERVALS)
}

/// Integrate over the union of consecutive panels `[breaks[i], breaks[i+1]]`.
///
/// Breakpoints should sit on kinks of the integrand or be spaced at its
/// oscillation scale; every panel starts in the work queue.
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(CertError::InvalidParameter(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    if breaks.len() < 2 {
        return Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }

    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] != w[0] {
            heap.push(kronrod15(&f, w[0], w[1]));
            evaluations += 15;
        }
    }

    loop {
        let (value, error, magnitude) = heap.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.value, acc.1 + p.error, acc.2 + p.magnitude)
        });
        let roundoff_floor = 50.0 * f64::EPSILON * magnitude;
        if error <= tol || error <= roundoff_floor {
            return Ok(Quadrature {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if heap.len() >= max_intervals {
            return Err(CertError::QuadratureNonConvergence {
                error,
                tol,
                intervals: heap.len(),
            });
        }

        // Split the worst panels until the remaining error is cut in half;
        // recomputing the totals after every split would be quadratic.
        let mut removed = 0.0;
        let mut splits = 0;
        while let Some(worst) = heap.pop() {
            if worst.error == 0.0 {
                heap.push(worst);
                break;
            }
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
                // Panel at machine resolution; keep it and stop refining here.
                heap.push(Panel {
                    error: 0.0,
                    ..worst
                });
                removed += worst.error;
                continue;
            }
            let left = kronrod15(&f, worst.a, mid);
            let right = kronrod15(&f, mid, worst.b);
            evaluations += 30;
            removed += worst.error - left.error - right.error;
            heap.push(left);
            heap.push(right);
            splits += 1;
            if removed >= 0.5 * (error - tol)
                || splits > heap.len() / 8
                || heap.len() >= max_intervals
            {
                break;
            }
        }
    }
}

/// Evenly spaced breakpoints covering `[a, b]` with spacing at most `step`.
pub fn uniform_breaks(a: f64, b: f64, step: f64) -> Vec<f64> {
    let count = (((b - a) / step).ceil() as usize).max(1);
    let h = (b - a) / count as f64;
    let mut out: Vec<f64> = (0..count).map(|i| a + h * i as f64).collect();
    out.push(b);
    out
}
