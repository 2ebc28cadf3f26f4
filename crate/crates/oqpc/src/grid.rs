//! Uniform simulation time grid and cubic Hermite interpolation on it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Points `t_k = k dt` for `k = 0 .. len`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || len < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs dt > 0 and >= 2 points, got dt = {dt}, len = {len}"
            )));
        }
        Ok(Self { dt, len })
    }

    /// Grid covering `[0, t_end]` with step `dt`.
    pub fn covering(t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be > 0, got {t_end}")));
        }
        Self::new(dt, (t_end / dt - 1e-9).ceil() as usize + 1)
    }

    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.t(k))
    }

    /// Index of the first grid point at or after `t`.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        ((t / self.dt - 1e-9).ceil().max(0.0) as usize).min(self.len - 1)
    }

    /// Cubic Hermite interpolation of tabulated values `y` with derivatives `dy`.
    pub fn interpolate(&self, y: &[f64], dy: &[f64], t: f64) -> Result<f64> {
        let t_max = self.t_max();
        if !(t >= 0.0 && t <= t_max * (1.0 + 1e-14)) {
            return Err(Error::OutOfGrid { t, t_max });
        }
        let x = t / self.dt;
        let k = (x.floor() as usize).min(self.len - 2);
        Ok(hermite(y[k], dy[k], y[k + 1], dy[k + 1], self.dt, x - k as f64))
    }
}

/// Cubic Hermite interpolant on an interval of width `h` at fraction `u`.
pub fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * h * d0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_grid_reaches_end() {
        let g = TimeGrid::covering(50.0, 0.01).unwrap();
        assert_eq!(g.len, 5001);
        assert!((g.t_max() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_is_fourth_order() {
        let g = TimeGrid::new(0.01, 1001).unwrap();
        let y: Vec<f64> = g.times().map(f64::sin).collect();
        let dy: Vec<f64> = g.times().map(f64::cos).collect();
        let v = g.interpolate(&y, &dy, 3.0731).unwrap();
        assert!((v - 3.0731f64.sin()).abs() < 1e-10);
        assert!(g.interpolate(&y, &dy, 10.5).is_err());
        assert!(g.interpolate(&y, &dy, -0.1).is_err());
    }
}
