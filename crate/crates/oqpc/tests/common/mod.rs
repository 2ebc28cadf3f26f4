#![allow(dead_code)]

use num_complex::Complex64;
use oqpc::quadrature::{integrate_breaks, Tolerance};
use std::f64::consts::PI;

/// S(t) and S'(t) from the fluctuation-dissipation integral over the Drude susceptibility.
pub fn spectral_correlation(gamma: f64, wd: f64, beta: f64, t: f64) -> (f64, f64) {
    let chi2 = |w: f64| {
        let gh = Complex64::new(gamma * wd, 0.0) / Complex64::new(wd, -w);
        (1.0 / (Complex64::new(1.0 - w * w, 0.0) - Complex64::new(0.0, w) * gh)).im
    };
    let coth = |x: f64| if x < 1e-8 { 1.0 / x } else { 1.0 / x.tanh() };
    let mut br = vec![0.0, 0.5, 0.9, 0.97, 0.99, 0.995, 1.0, 1.005, 1.01, 1.03, 1.1, 1.5, 3.0];
    let mut b = 3.0;
    while b < 2e3 * wd.max(1.0) {
        b *= 2.0;
        br.push(b);
    }
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_panels: 200_000 };
    let w_s = |w: f64| if w == 0.0 { 0.0 } else { chi2(w) * coth(0.5 * beta * w) / PI };
    let s = integrate_breaks(|w| w_s(w) * (w * t).cos(), &br, tol).unwrap();
    let sd = integrate_breaks(|w| -w * w_s(w) * (w * t).sin(), &br, tol).unwrap();
    (s, sd)
}

/// `int_0^inf w^power chi''(w) coth(beta w / 2) dw / pi` for the Drude bath; power 0 gives
/// `<q^2>`, power 2 gives `<p^2>`.
pub fn spectral_moment(gamma: f64, wd: f64, beta: f64, power: i32) -> f64 {
    let chi2 = |w: f64| {
        let gh = Complex64::new(gamma * wd, 0.0) / Complex64::new(wd, -w);
        (1.0 / (Complex64::new(1.0 - w * w, 0.0) - Complex64::new(0.0, w) * gh)).im
    };
    let mut br = vec![0.0, 0.5, 0.9, 0.97, 0.99, 0.995, 1.0, 1.005, 1.01, 1.03, 1.1, 1.5, 3.0];
    let mut b = 3.0;
    while b < 1e5 * wd.max(1.0) {
        b *= 2.0;
        br.push(b);
    }
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_panels: 200_000 };
    let f = |w: f64| if w == 0.0 { 0.0 } else { w.powi(power) * chi2(w) / (0.5 * beta * w).tanh() / PI };
    integrate_breaks(f, &br, tol).unwrap()
}
