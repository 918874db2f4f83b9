//! The auxiliary even, 2π-periodic function `H` and its Fourier cosine
//! coefficients `a_k`, together with tail sums and the shift functionals
//! `A_n(λ)` and `F_n(λ)` built from them.
//!
//! `H` equals 1 on `|x| <= π/2` and `sin²x` on `π/2 < |x| <= π`. Its cosine
//! series `H(x) = Σ_{k>=0} a_k cos kx` has closed-form coefficients:
//! `a_0 = 3/4`, `a_1 = 4/(3π)`, `a_2 = -1/4`, and for `k >= 3`
//! `a_k = -4 sin(kπ/2) / (π k (k² - 4))`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::kernels::gaussian;
use crate::quadrature;

/// Cutoff beyond which tails are bounded by `Σ_{k>K} 1/k² < 1/K`.
pub const TAIL_CUTOFF: usize = 1_000_000;

/// `Σ_{k>=1} |a_k|` as printed in the literature this toolkit audits.
pub const PRINTED_ABS_SUM: f64 = 1.0 + 5.0 / (3.0 * PI);
/// `Σ_{k>=1} a_k²` as printed in the literature this toolkit audits.
pub const PRINTED_SQUARE_SUM: f64 = 9.0 / 8.0;

/// The auxiliary function `H`, extended evenly with period 2π.
pub fn auxiliary_h(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y = TAU - y;
    }
    if y <= FRAC_PI_2 {
        1.0
    } else {
        let s = y.sin();
        s * s
    }
}

/// Closed-form cosine coefficient `a_k` of [`auxiliary_h`].
pub fn cosine_coefficient(k: usize) -> f64 {
    match k {
        0 => 0.75,
        1 => 4.0 / (3.0 * PI),
        2 => -0.25,
        _ if k.is_multiple_of(2) => 0.0,
        _ => {
            let kf = k as f64;
            let magnitude = 4.0 / (PI * kf * (kf * kf - 4.0));
            if k % 4 == 1 {
                -magnitude
            } else {
                magnitude
            }
        }
    }
}

/// Cosine coefficient of [`auxiliary_h`] by adaptive quadrature.
///
/// Computes `(1/π)∫_{-π}^{π} H(x) cos(kx) dx` for `k >= 1` and the mean
/// `(1/2π)∫ H` for `k = 0`. Independent of the closed form; used only as an
/// oracle.
pub fn cosine_coefficient_oracle(k: usize, tol: f64) -> Result<f64> {
    let kf = k as f64;
    let scale = if k == 0 { 1.0 / TAU } else { 1.0 / PI };
    // Panels at the kinks of H and at the half-periods of cos(kx).
    let per_panel = (PI / (kf.max(1.0))).min(FRAC_PI_2);
    let mut breaks = Vec::new();
    for w in [-PI, -FRAC_PI_2, FRAC_PI_2, PI].windows(2) {
        let seg = quadrature::uniform_breaks(w[0], w[1], per_panel);
        if breaks.is_empty() {
            breaks.extend(seg);
        } else {
            breaks.extend(seg.into_iter().skip(1));
        }
    }
    let q = quadrature::integrate_panels(
        |x| auxiliary_h(x) * (kf * x).cos(),
        &breaks,
        tol / scale,
        quadrature::DEFAULT_MAX_INTERVALS,
    )?;
    Ok(q.value * scale)
}

/// Immutable table of `a_0..=a_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    max_index: usize,
    values: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(max_index: usize) -> Self {
        Self {
            max_index,
            values: (0..=max_index).map(cosine_coefficient).collect(),
        }
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    /// `Σ_{k=1}^{n} |a_k|`.
    pub fn abs_sum(&self) -> f64 {
        self.values.iter().skip(1).map(|a| a.abs()).sum()
    }
}

// suffix[n] = Σ_{k=n+1}^{K} |a_k| for 0 <= n <= K, accumulated from k = K down.
fn tail_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut suffix = vec![0.0; TAIL_CUTOFF + 1];
        let mut acc = 0.0;
        for k in (1..=TAIL_CUTOFF).rev() {
            acc += cosine_coefficient(k).abs();
            suffix[k - 1] = acc;
        }
        suffix
    })
}

/// Rigorous upper bound for `Σ_{k>n} |a_k|`.
///
/// Explicit summation up to `K = 10⁶` plus the `1/K` remainder from
/// `|a_k| <= 1/k²`, capped by `1/n`.
pub fn tail_abs_sum_bound(n: usize) -> f64 {
    let n = n.max(1);
    let crude = 1.0 / n as f64;
    if n >= TAIL_CUTOFF {
        return crude;
    }
    let explicit = tail_table()[n] + 1.0 / TAIL_CUTOFF as f64;
    explicit.min(crude)
}

/// `Σ_{k=1}^{K} |a_k|` with `K = 10⁶`; the remainder beyond `K` is below 1e-12.
pub fn abs_sum_recomputed() -> f64 {
    tail_table()[0]
}

/// `Σ_{k=1}^{∞} a_k²`, recomputed by explicit summation.
///
/// The neglected remainder is below `Σ_{k>K} 1/k⁴ < 1/(3K³)`.
pub fn square_sum_recomputed() -> f64 {
    (1..=TAIL_CUTOFF)
        .rev()
        .map(|k| {
            let a = cosine_coefficient(k);
            a * a
        })
        .sum()
}

/// Translation spacing `λ` and truncation order `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftParameters {
    lambda: f64,
    n: usize,
}

impl ShiftParameters {
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CertError::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if n == 0 {
            return Err(CertError::InvalidParameter("n must be at least 1".into()));
        }
        Ok(Self { lambda, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `A_n(λ)` and the truncated `F_n(λ) = a_0 - A_n(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFunctionals {
    pub a_n: f64,
    pub f_n: f64,
}

/// `A_n(λ) = -Σ_{k=1}^{n} a_k φ(λk)`; `n = 0` gives the empty sum.
pub fn shift_functional(lambda: f64, n: usize) -> f64 {
    let mut sum = 0.0;
    for k in 1..=n {
        let weight = gaussian(lambda * k as f64);
        if weight == 0.0 {
            // Underflowed; every later term underflows as well.
            break;
        }
        sum += cosine_coefficient(k) * weight;
    }
    -sum
}

pub fn coefficient_functionals(p: &ShiftParameters) -> CoefficientFunctionals {
    let a_n = shift_functional(p.lambda, p.n);
    CoefficientFunctionals {
        a_n,
        f_n: cosine_coefficient(0) - a_n,
    }
}

/// `A_∞(λ)`, summed until the Gaussian weight underflows.
///
/// The dropped remainder is below `e^{-(λK)²}` times `Σ|a_k|`, under 1e-300.
pub fn shift_functional_infinite(lambda: f64) -> f64 {
    // φ(λk) underflows once λk > 27.3.
    let last = (27.5 / lambda).ceil().min(TAIL_CUTOFF as f64) as usize;
    let mut sum = 0.0;
    for k in (1..=last).rev() {
        sum += cosine_coefficient(k) * gaussian(lambda * k as f64);
    }
    -sum
}

/// `F(λ) = Σ_{k>=0} a_k φ(λk) = a_0 - A_∞(λ)`.
pub fn f_infinite(lambda: f64) -> f64 {
    cosine_coefficient(0) - shift_functional_infinite(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Σ_{odd k>=m} 4/(πk(k²-4)) telescopes to 1/(π m (m-2)).
    fn tail_closed_form(n: usize) -> f64 {
        let mut head = 0.0;
        if n < 1 {
            head += cosine_coefficient(1).abs();
        }
        if n < 2 {
            head += 0.25;
        }
        let mut m = (n + 1).max(3);
        if m.is_multiple_of(2) {
            m += 1;
        }
        head + 1.0 / (PI * m as f64 * (m as f64 - 2.0))
    }

    #[test]
    fn h_values() {
        assert_eq!(auxiliary_h(0.0), 1.0);
        assert!(auxiliary_h(PI).abs() < 1e-30);
        assert!((auxiliary_h(3.0 * PI / 4.0) - 0.5).abs() < 1e-15);
        assert_eq!(auxiliary_h(FRAC_PI_2), 1.0);
        assert!((auxiliary_h(-3.0 * PI / 4.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(cosine_coefficient(0), 0.75);
        assert_eq!(cosine_coefficient(2), -0.25);
        assert_eq!(cosine_coefficient(4), 0.0);
        assert!((cosine_coefficient(3) - 4.0 / (15.0 * PI)).abs() < 1e-16);
        assert!((cosine_coefficient(3) - 0.084_882_6).abs() < 1e-7);
        assert!((cosine_coefficient(5) + 4.0 / (105.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn oracle_values() {
        let a1 = cosine_coefficient_oracle(1, 1e-10).unwrap();
        assert!((a1 - 4.0 / (3.0 * PI)).abs() < 1e-10);
        assert!(cosine_coefficient_oracle(6, 1e-10).unwrap().abs() < 1e-10);
        let a5 = cosine_coefficient_oracle(5, 1e-10).unwrap();
        assert!((a5 + 4.0 / (105.0 * PI)).abs() < 1e-10);
        let a0 = cosine_coefficient_oracle(0, 1e-10).unwrap();
        assert!((a0 - 0.75).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_oracle() {
        for k in [0, 1, 2, 3, 7, 8, 13, 50, 199, 200] {
            let oracle = cosine_coefficient_oracle(k, 1e-10).unwrap();
            assert!(
                (cosine_coefficient(k) - oracle).abs() < 1e-8,
                "k = {k}: {} vs {oracle}",
                cosine_coefficient(k)
            );
        }
    }

    #[test]
    fn coefficient_decay_and_sign_pattern() {
        for k in 1..=10_000usize {
            let a = cosine_coefficient(k);
            assert!(a.abs() <= 1.0 / (k * k) as f64, "k = {k}");
            if k >= 3 && k % 2 == 1 {
                assert_eq!(a < 0.0, k % 4 == 1);
            }
            if k >= 4 && k % 2 == 0 {
                assert_eq!(a, 0.0);
            }
        }
    }

    #[test]
    fn table_holds_closed_forms() {
        let t = CoefficientTable::new(10);
        assert_eq!(t.values().len(), 11);
        assert_eq!(t.get(2), Some(-0.25));
        assert_eq!(t.get(11), None);
        let full = 0.25 + 5.0 / (3.0 * PI);
        assert!((t.abs_sum() - (full - tail_closed_form(10))).abs() < 1e-14);
    }

    #[test]
    fn tail_bound_examples() {
        assert!(tail_abs_sum_bound(1) <= 1.0);
        let t10 = tail_abs_sum_bound(10);
        assert!(t10 <= 0.1 && t10 >= tail_closed_form(10));
        let partial: f64 = (101..=TAIL_CUTOFF)
            .map(|k| cosine_coefficient(k).abs())
            .sum();
        assert!((tail_abs_sum_bound(100) - (partial + 1e-6)).abs() < 1e-8);
    }

    #[test]
    fn tail_bound_is_rigorous_and_monotone() {
        let mut previous = f64::INFINITY;
        for n in 1..=1000 {
            let b = tail_abs_sum_bound(n);
            assert!(b < 1.0 / n as f64, "n = {n}");
            assert!(b >= tail_closed_form(n), "n = {n}");
            assert!(b <= previous);
            previous = b;
        }
        assert_eq!(
            tail_abs_sum_bound(2 * TAIL_CUTOFF),
            0.5 / TAIL_CUTOFF as f64
        );
    }

    #[test]
    fn recomputed_sums() {
        assert!((abs_sum_recomputed() - (0.25 + 5.0 / (3.0 * PI))).abs() < 1e-12);
        assert!((square_sum_recomputed() - 0.25).abs() < 1e-12);
        assert!((PRINTED_ABS_SUM - 1.530_516).abs() < 1e-6);
    }

    #[test]
    fn functionals() {
        assert_eq!(shift_functional(1.0, 0), 0.0);
        assert_eq!(cosine_coefficient(0) - shift_functional(1.0, 0), 0.75);
        let p = ShiftParameters::new(100.0, 5).unwrap();
        assert!(coefficient_functionals(&p).a_n.abs() < 1e-300);
        let p = ShiftParameters::new(1.0, 2).unwrap();
        let got = coefficient_functionals(&p);
        let expected = -(4.0 / (3.0 * PI) * (-1f64).exp() - 0.25 * (-4f64).exp());
        assert!((got.a_n - expected).abs() < 1e-15);
        assert!((got.a_n + 0.151_554).abs() < 1e-6);
        assert!((got.f_n - 0.75 - 0.151_554).abs() < 1e-6);
    }

    #[test]
    fn shift_parameters_validate() {
        assert!(ShiftParameters::new(0.0, 3).is_err());
        assert!(ShiftParameters::new(f64::NAN, 3).is_err());
        assert!(ShiftParameters::new(0.5, 0).is_err());
    }

    #[test]
    fn infinite_functional_limits() {
        // F(λ) → H(0) = 1 as λ → 0.
        assert!((f_infinite(0.05) - 1.0).abs() < 1e-12);
        assert!((shift_functional_infinite(0.7) - shift_functional(0.7, 200)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn h_is_even_and_periodic(x in -50.0f64..50.0) {
            prop_assert!((auxiliary_h(x) - auxiliary_h(-x)).abs() < 1e-12);
            prop_assert!((auxiliary_h(x + TAU) - auxiliary_h(x)).abs() < 1e-10);
        }

        #[test]
        fn functional_increments_are_single_terms(lambda in 0.05f64..3.0, n in 1usize..300) {
            let step = shift_functional(lambda, n + 1) - shift_functional(lambda, n);
            let bound = cosine_coefficient(n + 1).abs() * gaussian(lambda * (n + 1) as f64);
            prop_assert!(step.abs() <= bound + 1e-16);
        }
    }
}
