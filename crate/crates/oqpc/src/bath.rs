//! Bath spectral densities and the memory kernels derived from them.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_breaks, Tolerance};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Spectral density of the harmonic bath (units with hbar = m = omega0 = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `J(w) = gamma w wd^2 / (w^2 + wd^2)`.
    OhmicDrude { gamma: f64, omega_d: f64 },
    /// `J(w) = gamma wph^(1-s) w^s exp(-w / wd)`.
    SubOhmic { gamma: f64, omega_ph: f64, omega_d: f64, s: f64 },
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::OhmicDrude { gamma, omega_d } => {
                if !(gamma >= 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
                }
                if !(omega_d > 0.0 && omega_d.is_finite()) {
                    return Err(Error::InvalidParameter(format!("omega_d must be > 0, got {omega_d}")));
                }
            }
            Self::SubOhmic { gamma, omega_ph, omega_d, s } => {
                if !(gamma >= 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
                }
                if !(omega_ph > 0.0 && omega_d > 0.0 && omega_ph.is_finite() && omega_d.is_finite()) {
                    return Err(Error::InvalidParameter("omega_ph and omega_d must be > 0".into()));
                }
                if !(s > 0.0 && s < 1.0) {
                    return Err(Error::InvalidParameter(format!("sub-Ohmic exponent must lie in (0, 1), got {s}")));
                }
            }
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            Self::OhmicDrude { gamma, .. } | Self::SubOhmic { gamma, .. } => gamma,
        }
    }

    /// Same model with a different coupling strength.
    pub fn with_gamma(&self, g: f64) -> Self {
        match *self {
            Self::OhmicDrude { omega_d, .. } => Self::OhmicDrude { gamma: g, omega_d },
            Self::SubOhmic { omega_ph, omega_d, s, .. } => Self::SubOhmic { gamma: g, omega_ph, omega_d, s },
        }
    }

    pub fn omega_d(&self) -> f64 {
        match *self {
            Self::OhmicDrude { omega_d, .. } | Self::SubOhmic { omega_d, .. } => omega_d,
        }
    }

    /// Low-frequency exponent of `J`.
    pub fn exponent(&self) -> f64 {
        match *self {
            Self::OhmicDrude { .. } => 1.0,
            Self::SubOhmic { s, .. } => s,
        }
    }

    pub fn spectral_density(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::OhmicDrude { gamma, omega_d } => gamma * w * omega_d * omega_d / (w * w + omega_d * omega_d),
            Self::SubOhmic { gamma, omega_ph, omega_d, s } => {
                gamma * omega_ph.powf(1.0 - s) * w.powf(s) * (-w / omega_d).exp()
            }
        }
    }

    fn sub_ohmic_prefactor(&self) -> f64 {
        match *self {
            Self::SubOhmic { gamma, omega_ph, omega_d, s } => {
                2.0 / PI * gamma * omega_ph.powf(1.0 - s) * statrs::function::gamma::gamma(s) * omega_d.powf(s)
            }
            Self::OhmicDrude { .. } => unreachable!(),
        }
    }

    /// Friction kernel `gamma(t) = (2/pi) int_0^inf J(w)/w cos(w t) dw`.
    pub fn dissipative_kernel(&self, t: f64) -> f64 {
        let t = t.abs();
        match *self {
            Self::OhmicDrude { gamma, omega_d } => gamma * omega_d * (-omega_d * t).exp(),
            Self::SubOhmic { omega_d, s, .. } => {
                let x = omega_d * t;
                self.sub_ohmic_prefactor() * (1.0 + x * x).powf(-0.5 * s) * (s * x.atan()).cos()
            }
        }
    }

    /// `int_0^t gamma(u) du` for `t >= 0`.
    pub fn kernel_integral(&self, t: f64) -> f64 {
        match *self {
            Self::OhmicDrude { gamma, omega_d } => gamma * -(-omega_d * t).exp_m1(),
            Self::SubOhmic { omega_d, s, .. } => {
                // Re int_0^t (1 - i wd u)^(-s) du
                let w = Complex64::new(1.0, -omega_d * t);
                let v = (w.powf(1.0 - s) - 1.0) / Complex64::new(0.0, -omega_d * (1.0 - s));
                self.sub_ohmic_prefactor() * v.re
            }
        }
    }

    /// `gamma(0)`, which also fixes the leading large-frequency behaviour `gamma_hat(z) ~ gamma(0)/z`.
    pub fn kernel_at_zero(&self) -> f64 {
        self.dissipative_kernel(0.0)
    }

    /// Coefficients of `nu gamma_hat(nu) = sum_k a_k nu^-k` for large real `nu`; `a_k` is the
    /// k-th derivative of the friction kernel at the origin.
    pub fn large_frequency_coefficients(&self) -> [f64; 5] {
        match *self {
            Self::OhmicDrude { gamma, omega_d } => {
                let a0 = gamma * omega_d;
                [a0, -a0 * omega_d, a0 * omega_d.powi(2), -a0 * omega_d.powi(3), a0 * omega_d.powi(4)]
            }
            Self::SubOhmic { omega_d, s, .. } => {
                // Re (1 - i wd t)^-s: only even derivatives survive
                let a0 = self.kernel_at_zero();
                let a2 = -s * (1.0 + s) * omega_d.powi(2) * a0;
                let a4 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * omega_d.powi(4) * a0;
                [a0, 0.0, a2, 0.0, a4]
            }
        }
    }

    /// Laplace transform `gamma_hat(z) = int_0^inf exp(-z t) gamma(t) dt`, `Re z > 0`.
    pub fn laplace_gamma(&self, z: Complex64) -> Result<Complex64> {
        match *self {
            Self::OhmicDrude { gamma, omega_d } => Ok(gamma * omega_d / (z + omega_d)),
            Self::SubOhmic { omega_d, .. } => {
                if z.re <= 0.0 {
                    return Err(Error::DomainError(format!("Laplace variable needs Re z > 0, got {z}")));
                }
                let t_end = 40.0 / z.re;
                let mut breaks = vec![0.0];
                let mut b = 0.25 / omega_d.max(z.re);
                while b < t_end {
                    breaks.push(b);
                    b *= 2.0;
                }
                breaks.push(t_end);
                if z.im != 0.0 {
                    let w = PI / (4.0 * z.im.abs());
                    let mut refined = vec![0.0];
                    for win in breaks.windows(2) {
                        let n = ((win[1] - win[0]) / w).ceil().max(1.0) as usize;
                        for i in 1..=n {
                            refined.push(win[0] + (win[1] - win[0]) * i as f64 / n as f64);
                        }
                    }
                    breaks = refined;
                }
                let tol = Tolerance { abs: 1e-16, rel: 1e-13, max_panels: 200_000 };
                integrate_breaks(|t| (-z * t).exp() * self.dissipative_kernel(t), &breaks, tol)
            }
        }
    }

    /// Real-axis Laplace transform.
    pub fn laplace_gamma_real(&self, nu: f64) -> Result<f64> {
        Ok(self.laplace_gamma(Complex64::new(nu, 0.0))?.re)
    }

    /// Noise kernel `K'(t) = int_0^inf (dw/pi) J(w) coth(beta w / 2) cos(w t)`.
    ///
    /// Split into the zero-temperature part (closed form) and the thermal occupation part.
    /// For the Drude model the zero-temperature part diverges logarithmically at `t = 0`.
    pub fn decoherence_kernel(&self, t: f64, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
        }
        let t = t.abs();
        let zero_t = match *self {
            Self::OhmicDrude { gamma, omega_d } => {
                if t == 0.0 {
                    return Err(Error::Divergent("Drude noise kernel is logarithmically divergent at t = 0".into()));
                }
                let x = omega_d * t;
                -gamma * omega_d * omega_d / (2.0 * PI) * (exp_scaled_ei(x) + exp_scaled_e1(x))
            }
            Self::SubOhmic { gamma, omega_ph, omega_d, s } => {
                let w = Complex64::new(1.0 / omega_d, -t);
                gamma * omega_ph.powf(1.0 - s) / PI * statrs::function::gamma::gamma(1.0 + s) * w.powf(-(1.0 + s)).re
            }
        };
        let w_max = 45.0 / beta;
        let s = self.exponent();
        let occupation = |w: f64| {
            let x = beta * w;
            if x < 1e-4 {
                2.0 / x - 1.0 + x / 6.0
            } else {
                2.0 / x.exp_m1()
            }
        };
        let integrand = |w: f64| self.spectral_density(w) * occupation(w) * (w * t).cos() / PI;
        let w_c = (1.0 / beta).min(self.omega_d()).min(w_max);
        let tol = Tolerance { abs: 1e-15, rel: 1e-11, max_panels: 2_000_000 };
        // w = w_c u^(1/s) removes the w^(s-1) endpoint singularity
        let low = integrate(
            |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let w = w_c * u.powf(1.0 / s);
                integrand(w) * w_c / s * u.powf(1.0 / s - 1.0)
            },
            0.0,
            1.0,
            if t > 0.0 { (PI / (4.0 * w_c * t)).min(1.0) } else { 1.0 },
            tol,
        )?;
        let width = if t > 0.0 { PI / (4.0 * t) } else { f64::INFINITY };
        let width = width.min((w_max - w_c).max(1e-300) / 16.0).min(self.omega_d().max(w_c));
        let high = integrate(integrand, w_c, w_max, width, tol)?;
        Ok(zero_t + low + high)
    }
}

/// `exp(x) E1(x)` for `x > 0`.
pub fn exp_scaled_e1(x: f64) -> f64 {
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        (-EULER_GAMMA - x.ln() - sum) * x.exp()
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// `exp(-x) Ei(x)` for `x > 0`.
pub fn exp_scaled_ei(x: f64) -> f64 {
    if x < 40.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..400 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        (EULER_GAMMA + x.ln() + sum) * (-x).exp()
    } else {
        let mut sum = 0.0;
        let mut term = 1.0 / x;
        for k in 1..60 {
            sum += term;
            let next = term * k as f64 / x;
            if next > term || next < 1e-17 * sum {
                break;
            }
            term = next;
        }
        sum
    }
}

/// Friction kernel and its running integral tabulated on a uniform grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub dt: f64,
    pub kernel: Vec<f64>,
    pub integral: Vec<f64>,
}

impl KernelTable {
    pub fn new(model: &SpectralDensity, dt: f64, len: usize) -> Self {
        let kernel = (0..len).map(|k| model.dissipative_kernel(k as f64 * dt)).collect();
        let integral = (0..len).map(|k| model.kernel_integral(k as f64 * dt)).collect();
        Self { dt, kernel, integral }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drude_closed_forms() {
        let m = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 2.0 };
        assert!((m.dissipative_kernel(0.0) - 0.1).abs() < 1e-16);
        assert!((m.dissipative_kernel(-0.5) - m.dissipative_kernel(0.5)).abs() == 0.0);
        let z = Complex64::new(1.0, 0.5);
        assert!((m.laplace_gamma(z).unwrap() - 0.1 / (z + 2.0)).norm() < 1e-16);
        assert!((m.kernel_integral(3.0) - 0.05 * (1.0 - (-6.0f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn sub_ohmic_integral_matches_quadrature() {
        let m = SpectralDensity::SubOhmic { gamma: 0.05, omega_ph: 1.0, omega_d: 1.0, s: 0.1 };
        let num = integrate(|u| m.dissipative_kernel(u), 0.0, 7.0, 0.5, Tolerance::default()).unwrap();
        assert!((num - m.kernel_integral(7.0)).abs() < 1e-12);
    }

    #[test]
    fn special_functions() {
        // E1(1) = 0.219383934395520, Ei(1) = 1.89511781635594
        assert!((exp_scaled_e1(1.0) * (-1.0f64).exp() - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((exp_scaled_e1(0.5) * (-0.5f64).exp() - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((exp_scaled_ei(1.0) * 1.0f64.exp() - 1.895_117_816_355_937).abs() < 1e-13);
        // both sides of the asymptotic switch
        assert!((exp_scaled_ei(40.0) - 0.025_658_862_785_975_1).abs() < 1e-15);
        assert!((exp_scaled_ei(39.999_999) - 0.025_658_863_444_837_9).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(SpectralDensity::OhmicDrude { gamma: -1.0, omega_d: 1.0 }.validate().is_err());
        assert!(SpectralDensity::SubOhmic { gamma: 0.1, omega_ph: 1.0, omega_d: 1.0, s: 1.0 }.validate().is_err());
        assert!(SpectralDensity::OhmicDrude { gamma: 0.0, omega_d: 1.0 }.validate().is_ok());
    }

    #[test]
    fn drude_noise_kernel_diverges_at_origin() {
        let m = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 };
        assert!(matches!(m.decoherence_kernel(0.0, 1.0), Err(Error::Divergent(_))));
    }
}
