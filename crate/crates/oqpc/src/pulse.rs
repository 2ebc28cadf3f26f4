//! Linearly chirped Gaussian pulses and their windowed Fourier transforms.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::{FIELD_SCALE, OMEGA0};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Envelope cutoff: outside `t0 +- HALF_WIDTH_FACTOR * delta_t` the envelope is below 1e-16.
pub const HALF_WIDTH_FACTOR: f64 = 3.034_854_258_770_293;

/// `E(t) = e0 exp(-4 ((t - t0)/delta_t)^2) cos(omega_l (t - t0) + chirp (t - t0)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub e0: f64,
    pub t0: f64,
    pub omega_l: f64,
    pub delta_t: f64,
    pub chirp: f64,
}

impl PulseParams {
    pub fn new(e0: f64, t0: f64, omega_l: f64, delta_t: f64, chirp: f64) -> Result<Self> {
        let p = Self { e0, t0, omega_l, delta_t, chirp };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.e0, self.t0, self.omega_l, self.delta_t, self.chirp].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParameter("pulse parameters must be finite".into()));
        }
        if self.delta_t <= 0.0 {
            return Err(Error::InvalidParameter(format!("pulse duration must be positive, got {}", self.delta_t)));
        }
        Ok(())
    }

    /// Same pulse with the opposite chirp sign.
    pub fn mirrored(&self) -> Self {
        Self { chirp: -self.chirp, ..*self }
    }

    pub fn field_at(&self, t: f64) -> f64 {
        let x = t - self.t0;
        let env = (-4.0 * (x / self.delta_t).powi(2)).exp();
        self.e0 * env * (self.omega_l * x + self.chirp * x * x).cos()
    }

    /// Interval outside of which the field is negligible.
    pub fn support(&self) -> (f64, f64) {
        let hw = HALF_WIDTH_FACTOR * self.delta_t;
        (self.t0 - hw, self.t0 + hw)
    }

    /// Largest instantaneous angular frequency of the carrier inside the support.
    pub fn max_instantaneous_frequency(&self) -> f64 {
        self.omega_l.abs() + 2.0 * self.chirp.abs() * HALF_WIDTH_FACTOR * self.delta_t
    }

    /// `int_{-inf}^{t} exp(-i omega s) E(s) ds`; pass `f64::INFINITY` for the full transform.
    pub fn windowed_transform(&self, omega: f64, t: f64) -> Result<Complex64> {
        let (lo, hi) = self.support();
        let upper = t.min(hi);
        if upper <= lo {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let fmax = self.max_instantaneous_frequency() + omega.abs();
        let width = if fmax > 0.0 { std::f64::consts::TAU / (8.0 * fmax) } else { self.delta_t };
        let tol = Tolerance { abs: 1e-16 * self.e0.abs() * self.delta_t, rel: 1e-12, max_panels: 100_000 };
        integrate(|s| Complex64::from_polar(self.field_at(s), -omega * s), lo, upper, width, tol)
    }

    /// Spectral phase and amplitude with `FT(omega) = amplitude exp(-i phase)`, phase in (-pi, pi].
    pub fn spectral_phase_amplitude(&self, omega: f64) -> Result<(f64, f64)> {
        let ft = self.windowed_transform(omega, f64::INFINITY)?;
        let amp = ft.norm();
        if amp < 1e-300 {
            return Err(Error::PhaseUndefined(amp));
        }
        let mut phase = -ft.arg();
        if phase <= -std::f64::consts::PI {
            phase += std::f64::consts::TAU;
        }
        Ok((phase, amp))
    }

    /// Rescale `e0` so that `|FT(omega0)| / FIELD_SCALE` equals `ratio`.
    pub fn with_spectral_ratio(&self, ratio: f64) -> Result<Self> {
        let unit = Self { e0: 1.0, ..*self };
        let (_, amp) = unit.spectral_phase_amplitude(OMEGA0)?;
        Ok(Self { e0: ratio * FIELD_SCALE / amp, ..*self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(chirp: f64) -> PulseParams {
        PulseParams::new(1.0, 10.0, 10.0, 4.0, chirp).unwrap()
    }

    #[test]
    fn field_peak_and_symmetry() {
        let p = fig1(0.0);
        assert_eq!(p.field_at(10.0), 1.0);
        assert!((p.field_at(8.0) - p.field_at(12.0)).abs() < 1e-15);
        let (lo, hi) = p.support();
        assert!(p.field_at(lo).abs() <= 1e-16);
        assert!(p.field_at(hi).abs() <= 1e-16);
    }

    #[test]
    fn window_before_support_is_zero() {
        let p = fig1(2.5);
        assert_eq!(p.windowed_transform(1.0, -5.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn chirp_sign_conjugates_spectrum_about_carrier() {
        // E(t0 + x) with chirp -c is the time-mirror of chirp +c, so |FT| is unchanged
        let (_, a1) = fig1(2.5).spectral_phase_amplitude(1.0).unwrap();
        let (_, a2) = fig1(-2.5).spectral_phase_amplitude(1.0).unwrap();
        assert!((a1 - a2).abs() < 1e-12 * a1);
    }

    #[test]
    fn zero_field_has_undefined_phase() {
        let p = PulseParams { e0: 0.0, ..fig1(1.0) };
        assert!(matches!(p.spectral_phase_amplitude(1.0), Err(Error::PhaseUndefined(_))));
    }

    #[test]
    fn invalid_duration_rejected() {
        assert!(PulseParams::new(1.0, 0.0, 1.0, 0.0, 0.0).is_err());
    }
}
