//! Base functions and translate networks.
//!
//! The generator is the Gaussian `φ(x) = e^{-x²}`, whose transform under
//! `f̂(ω) = (2π)^{-1/2} ∫ f(x) e^{-iωx} dx` is `φ̂(ω) = e^{-ω²/4}/√2`.
//! The construction works for any even, continuous, integrable `φ` with
//! `φ(0) = 1` and a nonnegative, integrable, analytic transform, but only the
//! Gaussian is implemented.
//!
//! Networks are `P(x) = Σ_k c_k φ(x - λk)` over a finite index window.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{cosine_coefficient, shift_functional, ShiftParameters};
use crate::error::{CertError, Result};

/// `1/√(2π)`.
pub const INV_SQRT_TAU: f64 = 0.398_942_280_401_432_677_939_946_059_934_381_87;

/// Terms with `|x - λk|` beyond this are skipped during evaluation.
pub const EVAL_CUTOFF: f64 = 9.0;

/// Upper bound for `sup_{|u| >= EVAL_CUTOFF} |φ^{(d)}(u)|`, `d <= 3`.
pub const EVAL_TAIL: f64 = 1e-32;

pub fn gaussian(x: f64) -> f64 {
    (-x * x).exp()
}

pub fn gaussian_derivative(x: f64) -> f64 {
    -2.0 * x * (-x * x).exp()
}

pub fn gaussian_second_derivative(x: f64) -> f64 {
    (4.0 * x * x - 2.0) * (-x * x).exp()
}

pub fn gaussian_third_derivative(x: f64) -> f64 {
    (12.0 * x - 8.0 * x * x * x) * (-x * x).exp()
}

pub fn gaussian_hat(omega: f64) -> f64 {
    FRAC_1_SQRT_2 * (-0.25 * omega * omega).exp()
}

/// `sup |φ^{(d)}|` for `d = 0..=3`.
pub fn gaussian_derivative_sup(order: usize) -> f64 {
    match order {
        0 => 1.0,
        // attained at x = 1/√2
        1 => SQRT_2 * (-0.5f64).exp(),
        // attained at x = 0
        2 => 2.0,
        // attained at x² = (3 - √6)/2
        3 => {
            let x = ((3.0 - 6f64.sqrt()) / 2.0).sqrt();
            gaussian_third_derivative(x)
        }
        _ => panic!("derivative order {order} not tabulated"),
    }
}

/// Fejér kernel `h(x) = (2π)^{-1/2} (sin(x/2)/(x/2))²`.
pub fn fejer(x: f64) -> f64 {
    let sinc = if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 24.0 + x2 * x2 / 1920.0
    } else {
        (0.5 * x).sin() / (0.5 * x)
    };
    INV_SQRT_TAU * sinc * sinc
}

/// `ĥ(ω) = max(1 - |ω|, 0)`.
pub fn fejer_hat(omega: f64) -> f64 {
    (1.0 - omega.abs()).max(0.0)
}

/// Dilated kernel `h_r(t) = r h(rt)`.
pub fn fejer_scaled(r: f64, t: f64) -> f64 {
    r * fejer(r * t)
}

/// A finite sum `Σ_k c_k φ(x - λk)` with consecutive indices starting at
/// `first_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "NetworkJson", try_from = "NetworkJson")]
pub struct TranslateNetwork {
    lambda: f64,
    first_index: i64,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NetworkJson {
    lambda: f64,
    coefficients: Vec<(i64, f64)>,
}

impl From<TranslateNetwork> for NetworkJson {
    fn from(net: TranslateNetwork) -> Self {
        NetworkJson {
            lambda: net.lambda,
            coefficients: net.terms().collect(),
        }
    }
}

impl TryFrom<NetworkJson> for TranslateNetwork {
    type Error = CertError;

    fn try_from(json: NetworkJson) -> Result<Self> {
        TranslateNetwork::from_pairs(json.lambda, &json.coefficients)
    }
}

impl TranslateNetwork {
    pub fn new(lambda: f64, first_index: i64, coefficients: Vec<f64>) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(CertError::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(CertError::InvalidParameter(
                "network coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            lambda,
            first_index,
            coefficients,
        })
    }

    /// Build from `(k, c_k)` pairs; missing indices are zero and repeated
    /// indices accumulate.
    pub fn from_pairs(lambda: f64, pairs: &[(i64, f64)]) -> Result<Self> {
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            return Self::new(lambda, 0, Vec::new());
        };
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(lo);
        let mut coefficients = vec![0.0; (hi - lo + 1) as usize];
        for &(k, c) in pairs {
            coefficients[(k - lo) as usize] += c;
        }
        Self::new(lambda, lo, coefficients)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Coefficient at shift index `k` (zero outside the window).
    pub fn coefficient(&self, k: i64) -> f64 {
        let offset = k - self.first_index;
        if offset < 0 {
            return 0.0;
        }
        self.coefficients
            .get(offset as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// `(k, c_k)` over the stored window.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.first_index + i as i64, c))
    }

    /// Inclusive index window, `None` for an empty network.
    pub fn index_range(&self) -> Option<(i64, i64)> {
        if self.coefficients.is_empty() {
            None
        } else {
            Some((
                self.first_index,
                self.first_index + self.coefficients.len() as i64 - 1,
            ))
        }
    }

    /// Largest `|λk|` over the window.
    pub fn reach(&self) -> f64 {
        self.index_range()
            .map(|(lo, hi)| self.lambda * lo.unsigned_abs().max(hi.unsigned_abs()) as f64)
            .unwrap_or(0.0)
    }

    /// Largest `|k|` over the window.
    pub fn max_abs_index(&self) -> u64 {
        self.index_range()
            .map(|(lo, hi)| lo.unsigned_abs().max(hi.unsigned_abs()))
            .unwrap_or(0)
    }

    /// `Σ|c_k|`.
    pub fn abs_coefficient_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c.abs()).sum()
    }

    /// `Σ|c_k|²`.
    pub fn coefficient_energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// True when `c_k = c_{-k}` for every k.
    pub fn is_symmetric(&self) -> bool {
        self.terms().all(|(k, c)| self.coefficient(-k) == c)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.lambda,
            self.first_index,
            self.coefficients.iter().map(|c| c * factor).collect(),
        )
    }

    // Index window of terms within EVAL_CUTOFF of x.
    fn local_window(&self, x: f64) -> std::ops::Range<usize> {
        let n = self.coefficients.len() as i64;
        let lo = ((x - EVAL_CUTOFF) / self.lambda).ceil();
        let hi = ((x + EVAL_CUTOFF) / self.lambda).floor();
        let lo = (lo.max(self.first_index as f64) as i64 - self.first_index).clamp(0, n);
        let hi = (hi.min((self.first_index + n) as f64) as i64 - self.first_index + 1).clamp(lo, n);
        lo as usize..hi as usize
    }

    /// `Σ c_k φ(x - λk)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    /// `Σ c_k φ'(x - λk)`.
    pub fn evaluate_derivative(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }

    /// Value and first three derivatives at `x`.
    ///
    /// Terms farther than [`EVAL_CUTOFF`] are dropped; the error is at most
    /// [`Self::omitted_bound`].
    pub fn jet(&self, x: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in self.local_window(x) {
            let c = self.coefficients[i];
            if c == 0.0 {
                continue;
            }
            let u = x - self.lambda * (self.first_index + i as i64) as f64;
            let e = c * (-u * u).exp();
            let u2 = u * u;
            out[0] += e;
            out[1] += -2.0 * u * e;
            out[2] += (4.0 * u2 - 2.0) * e;
            out[3] += (12.0 * u - 8.0 * u2 * u) * e;
        }
        out
    }

    /// Bound on the error from skipping far terms in [`Self::jet`].
    pub fn omitted_bound(&self) -> f64 {
        EVAL_TAIL * self.abs_coefficient_sum()
    }
}

/// The network `2A_n φ(x) + Σ_{k=1}^{n} a_k (φ(x + λk) + φ(x - λk))`.
///
/// `A_n` is chosen so that the network vanishes at the origin.
pub fn canonical_witness(p: &ShiftParameters) -> TranslateNetwork {
    let n = p.n();
    let mut coefficients = vec![0.0; 2 * n + 1];
    for k in 1..=n {
        let a = cosine_coefficient(k);
        coefficients[n + k] = a;
        coefficients[n - k] = a;
    }
    coefficients[n] = 2.0 * shift_functional(p.lambda(), n);
    TranslateNetwork {
        lambda: p.lambda(),
        first_index: -(n as i64),
        coefficients,
    }
}

/// `T_n(ω) = Σ_{k=1}^{n} a_k (cos(kλω) - φ(λk))`.
pub fn trig_polynomial_t(p: &ShiftParameters, omega: f64) -> f64 {
    let lambda = p.lambda();
    (1..=p.n())
        .map(|k| {
            let kf = k as f64;
            cosine_coefficient(k) * ((kf * lambda * omega).cos() - gaussian(lambda * kf))
        })
        .sum()
}

/// Analytic transform `P̂(ω) = φ̂(ω) Σ c_k e^{-ikλω}` of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierProfile {
    network: TranslateNetwork,
    symmetric: bool,
    band_radius: f64,
}

/// Declared bound on `|P̂|` beyond the band radius.
pub const BAND_EPSILON: f64 = 1e-15;

impl FourierProfile {
    pub fn network(&self) -> &TranslateNetwork {
        &self.network
    }

    /// Radius `R` with `|P̂(ω)| < 1e-15` for `|ω| > R`.
    pub fn band_radius(&self) -> f64 {
        self.band_radius
    }

    /// True when the transform is real (symmetric coefficients).
    pub fn is_real(&self) -> bool {
        self.symmetric
    }

    /// Frequency step resolving the oscillation of `Σ c_k e^{-ikλω}`.
    pub fn scan_step(&self) -> f64 {
        let lambda = self.network.lambda;
        let k = self.network.max_abs_index().max(1) as f64;
        lambda.min(1.0 / lambda) * PI / (64.0 * k)
    }

    pub fn value_complex(&self, omega: f64) -> Complex64 {
        let net = &self.network;
        let lambda = net.lambda;
        let mut re = 0.0;
        let mut im = 0.0;
        if self.symmetric {
            re = net.coefficient(0);
            for k in 1..=net.max_abs_index() as i64 {
                re += 2.0 * net.coefficient(k) * (k as f64 * lambda * omega).cos();
            }
        } else {
            for (k, c) in net.terms() {
                let theta = k as f64 * lambda * omega;
                re += c * theta.cos();
                im -= c * theta.sin();
            }
        }
        Complex64::new(re, im) * gaussian_hat(omega)
    }

    /// Real part of `P̂(ω)`; the whole transform when [`Self::is_real`].
    pub fn value(&self, omega: f64) -> f64 {
        self.value_complex(omega).re
    }
}

pub fn analytic_fourier_transform(net: &TranslateNetwork) -> FourierProfile {
    let mass = net.abs_coefficient_sum();
    // (1/√2) e^{-R²/4} Σ|c_k| < ε
    let band_radius = if mass > 0.0 {
        let ratio = FRAC_1_SQRT_2 * mass / BAND_EPSILON;
        2.0 * ratio.ln().max(0.0).sqrt() + 1e-9
    } else {
        0.0
    };
    FourierProfile {
        network: net.clone(),
        symmetric: net.is_symmetric(),
        band_radius,
    }
}
