//! Transforms computed by quadrature against their closed forms.

use std::f64::consts::PI;

use turan_cert::coefficients::ShiftParameters;
use turan_cert::kernels::{
    analytic_fourier_transform, canonical_witness, fejer, fejer_hat, gaussian_hat,
    trig_polynomial_t, TranslateNetwork, INV_SQRT_TAU,
};
use turan_cert::quadrature::{integrate_panels, uniform_breaks, DEFAULT_MAX_INTERVALS};

// (2π)^{-1/2} ∫ P(x) e^{-iωx} dx on a window wide enough for the Gaussian tails.
fn transform_by_quadrature(net: &TranslateNetwork, omega: f64) -> (f64, f64) {
    let radius = net.reach() + 7.0;
    let breaks = uniform_breaks(-radius, radius, 0.25);
    let re = integrate_panels(
        |x| net.evaluate(x) * (omega * x).cos(),
        &breaks,
        1e-13,
        DEFAULT_MAX_INTERVALS,
    )
    .unwrap();
    let im = integrate_panels(
        |x| -net.evaluate(x) * (omega * x).sin(),
        &breaks,
        1e-13,
        DEFAULT_MAX_INTERVALS,
    )
    .unwrap();
    (INV_SQRT_TAU * re.value, INV_SQRT_TAU * im.value)
}

#[test]
fn asymmetric_network_transform() {
    let net =
        TranslateNetwork::from_pairs(0.6, &[(-2, 0.4), (0, -1.0), (1, 0.7), (4, 0.25)]).unwrap();
    let profile = analytic_fourier_transform(&net);
    for omega in [-3.0, -0.7, 0.0, 0.4, 1.3, 2.9, 5.5] {
        let (re, im) = transform_by_quadrature(&net, omega);
        let z = profile.value_complex(omega);
        assert!((z.re - re).abs() < 1e-8, "re at {omega}: {} vs {re}", z.re);
        assert!((z.im - im).abs() < 1e-8, "im at {omega}: {} vs {im}", z.im);
    }
}

#[test]
fn canonical_transform_factorises() {
    for lambda in [0.5, 0.9] {
        let p = ShiftParameters::new(lambda, 12).unwrap();
        let net = canonical_witness(&p);
        let profile = analytic_fourier_transform(&net);
        assert!(profile.is_real());
        for omega in [0.0, 0.8, 2.1, 4.0] {
            let (re, im) = transform_by_quadrature(&net, omega);
            assert!(im.abs() < 1e-10);
            assert!((profile.value(omega) - re).abs() < 1e-8);
            let factored = 2.0 * gaussian_hat(omega) * trig_polynomial_t(&p, omega);
            assert!((profile.value(omega) - factored).abs() < 1e-12);
        }
        // Vanishing at the origin forces zero total mass of the transform.
        let total = integrate_panels(
            |w| profile.value(w),
            &uniform_breaks(-14.0, 14.0, 0.1),
            1e-13,
            DEFAULT_MAX_INTERVALS,
        )
        .unwrap();
        assert!(total.value.abs() < 1e-10);
    }
}

#[test]
fn fejer_spectrum() {
    // ∫ h(t) cos(ωt) dt on [-T, T]; the remainder is below 2·(2π)^{-1/2}·4/T.
    let t_max = 4.0e4;
    let breaks = uniform_breaks(0.0, t_max, 2.0 * PI);
    for omega in [0.0, 0.25, 0.5, 0.9, 1.5] {
        let q = integrate_panels(
            |t| 2.0 * fejer(t) * (omega * t).cos(),
            &breaks,
            1e-12,
            DEFAULT_MAX_INTERVALS,
        )
        .unwrap();
        let value = INV_SQRT_TAU * q.value;
        let slack = 8.0 * INV_SQRT_TAU * INV_SQRT_TAU / t_max * 2.0 + 1e-9;
        assert!(
            (value - fejer_hat(omega)).abs() < slack,
            "omega {omega}: {value}"
        );
    }
}
