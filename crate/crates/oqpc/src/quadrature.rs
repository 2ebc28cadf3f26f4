//! Adaptive Gauss-Kronrod integration and fixed Gauss-Legendre / Gauss-Hermite rules.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Values that can be integrated: real or complex.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
/// Returns (kronrod, |kronrod - gauss|).
pub fn gk15<T: Integrand, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).magnitude())
}

/// Adaptive integration control.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-11, max_panels: 20_000 }
    }
}

/// Globally adaptive Gauss-Kronrod over the given breakpoints.
///
/// `breaks` must be increasing with at least two entries; each initial interval is
/// refined by bisecting the panel with the largest error estimate.
pub fn integrate_breaks<T: Integrand, F: Fn(f64) -> T>(f: F, breaks: &[f64], tol: Tolerance) -> Result<T> {
    let mut panels: Vec<(f64, f64, T, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    if panels.is_empty() {
        return Ok(T::zero());
    }
    loop {
        let total = panels.iter().fold(T::zero(), |acc, p| acc + p.2);
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= tol.abs.max(tol.rel * total.magnitude()) {
            return Ok(total);
        }
        if panels.len() >= tol.max_panels {
            return Err(Error::QuadratureNotConverged(format!(
                "error estimate {err:e} after {} panels on [{}, {}]",
                panels.len(),
                breaks[0],
                breaks[breaks.len() - 1]
            )));
        }
        let (idx, _) =
            panels.iter().enumerate().fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (a, b, _, _) = panels[idx];
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Err(Error::QuadratureNotConverged(format!("panel [{a}, {b}] cannot be bisected")));
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        panels[idx] = (a, m, v1, e1);
        panels.push((m, b, v2, e2));
    }
}

/// Adaptive integration on `[a, b]` split into panels no wider than `max_width`.
pub fn integrate<T: Integrand, F: Fn(f64) -> T>(f: F, a: f64, b: f64, max_width: f64, tol: Tolerance) -> Result<T> {
    if b <= a {
        return Ok(T::zero());
    }
    let n = ((b - a) / max_width).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    integrate_breaks(f, &breaks, tol)
}

/// Fixed n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            dp = if dp == 0.0 { legendre(n, x).1 } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<T: Integrand, F: Fn(f64) -> T>(&self, f: F, a: f64, b: f64) -> T {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + f(c + h * x) * *w;
        }
        s * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss-Hermite rule for weight `exp(-x^2)` (physicists' convention).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = std::f64::consts::PI.powf(-0.25);
        let nf = n as f64;
        let mut z = 0.0_f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                // orthonormal Hermite recurrence
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Self { nodes, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_oscillatory_function() {
        let v = integrate(|x: f64| (30.0 * x).cos() * (-x * x).exp(), -8.0, 8.0, 0.5, Tolerance::default()).unwrap();
        let exact = std::f64::consts::PI.sqrt() * (-225.0_f64).exp();
        assert!((v - exact).abs() < 1e-14);
        let v = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 10.0, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn complex_integrand() {
        let v = integrate(|x: f64| Complex64::new(0.0, x).exp(), 0.0, 1.0, 1.0, Tolerance::default()).unwrap();
        let exact = (Complex64::new(0.0, 1.0).exp() - 1.0) / Complex64::new(0.0, 1.0);
        assert!((v - exact).norm() < 1e-14);
    }

    #[test]
    fn non_convergence_is_reported() {
        let tol = Tolerance { abs: 0.0, rel: 1e-15, max_panels: 4 };
        assert!(integrate(|x: f64| x.abs().sqrt().recip(), 0.0, 1.0, 1.0, tol).is_err());
    }

    #[test]
    fn legendre_exact_for_polynomials() {
        let gl = GaussLegendre::new(6);
        let v = gl.integrate(|x: f64| x.powi(10) + 3.0 * x.powi(3), -1.0, 2.0);
        let exact = (2f64.powi(11) + 1.0) / 11.0 + 0.75 * (16.0 - 1.0);
        assert!((v - exact).abs() < 1e-11);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_moments() {
        for n in [1usize, 2, 5, 20, 40] {
            let gh = GaussHermite::new(n);
            let m0: f64 = gh.weights.iter().sum();
            assert!((m0 - std::f64::consts::PI.sqrt()).abs() < 1e-13, "n={n}");
            if n >= 3 {
                let m4: f64 = gh.nodes.iter().zip(&gh.weights).map(|(x, w)| w * x.powi(4)).sum();
                assert!((m4 - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
            }
        }
    }
}
