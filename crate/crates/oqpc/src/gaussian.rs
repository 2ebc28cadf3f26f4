//! Complex-symmetric Gaussian integrals and Hermite generating-function coefficients.
//!
//! Every Fock-basis matrix element in this crate is a Gaussian integral of products of
//! Hermite functions. With generating variables `s_j`,
//! `sum_n phi_n(x) s^n / sqrt(n!) = pi^{-1/4} exp(-s^2/2 + sqrt(2) s x - x^2/2)`, so each
//! element is a Taylor coefficient of `exp(c + g.s + s.H.s/2)`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// `Z = L D L^T` for complex symmetric `Z` with positive-definite real part.
#[derive(Debug, Clone)]
pub struct Ldlt {
    l: CMatrix,
    d: Vec<Complex64>,
}

impl Ldlt {
    pub fn new(z: &CMatrix) -> Result<Self> {
        let n = z.nrows();
        let mut l = CMatrix::identity(n, n);
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            let mut dj = z[(j, j)];
            for k in 0..j {
                dj -= l[(j, k)] * l[(j, k)] * d[k];
            }
            if dj.re <= 0.0 || !dj.re.is_finite() {
                return Err(Error::DomainError(format!("pivot {j} has non-positive real part {dj}")));
            }
            d[j] = dj;
            for i in j + 1..n {
                let mut v = z[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)] * d[k];
                }
                l[(i, j)] = v / dj;
            }
        }
        Ok(Self { l, d })
    }

    /// Branch of `sqrt(det Z)` continuous from the real positive-definite case.
    pub fn sqrt_det(&self) -> Complex64 {
        self.d.iter().fold(Complex64::new(1.0, 0.0), |acc, d| acc * d.sqrt())
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let t = self.l[(i, k)] * y[k];
                y[i] -= t;
            }
        }
        for i in 0..n {
            y[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.l[(k, i)] * y[k];
                y[i] -= t;
            }
        }
        y
    }

    pub fn inverse(&self) -> CMatrix {
        let n = self.d.len();
        let mut inv = CMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[c] = Complex64::new(1.0, 0.0);
            for (r, v) in self.solve(&e).into_iter().enumerate() {
                inv[(r, c)] = v;
            }
        }
        inv
    }

    /// `C` with `Z = C C^T`, using principal square roots of the pivots.
    pub fn factor(&self) -> CMatrix {
        let mut c = self.l.clone();
        for j in 0..self.d.len() {
            let s = self.d[j].sqrt();
            for i in 0..c.nrows() {
                c[(i, j)] *= s;
            }
        }
        c
    }
}

/// Normalized Taylor coefficients `d_k = sqrt(k!) [s^k] exp(g.s + s.H.s/2)` for all
/// multi-indices `k` with `k_j < dims[j]`, stored row-major (last axis fastest).
///
/// Uses `sqrt(k_i) d_k = g_i d_{k-e_i} + sum_j H_ij sqrt(k_j - delta_ij) d_{k-e_i-e_j}`.
pub fn hermite_coefficients(g: &[Complex64], h: &CMatrix, dims: &[usize]) -> Vec<Complex64> {
    let rank = dims.len();
    assert_eq!(g.len(), rank);
    let total: usize = dims.iter().product();
    let mut strides = vec![1usize; rank];
    for j in (0..rank.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dims[j + 1];
    }
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    if total == 0 {
        return out;
    }
    out[0] = Complex64::new(1.0, 0.0);
    let mut k = vec![0usize; rank];
    for idx in 1..total {
        // increment multi-index
        let mut ax = rank - 1;
        loop {
            k[ax] += 1;
            if k[ax] < dims[ax] {
                break;
            }
            k[ax] = 0;
            ax -= 1;
        }
        let i = (0..rank).rev().find(|&j| k[j] > 0).expect("nonzero index");
        let prev = idx - strides[i];
        let mut v = g[i] * out[prev];
        for j in 0..rank {
            let kj = if j == i { k[j] - 1 } else { k[j] };
            if kj > 0 {
                v += h[(i, j)] * (kj as f64).sqrt() * out[prev - strides[j]];
            }
        }
        out[idx] = v / (k[i] as f64).sqrt();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ldlt_matches_direct_determinant_and_inverse() {
        let z = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0, 0.3),
                c(0.1, -0.5),
                c(0.0, 0.2),
                c(0.1, -0.5),
                c(1.5, 0.0),
                c(0.3, 0.1),
                c(0.0, 0.2),
                c(0.3, 0.1),
                c(1.0, -0.4),
            ],
        );
        let f = Ldlt::new(&z).unwrap();
        let det = z.clone().determinant();
        let sd = f.sqrt_det();
        assert!((sd * sd - det).norm() < 1e-13);
        assert!(sd.re > 0.0);
        let prod = &z * f.inverse();
        assert!((prod - CMatrix::identity(3, 3)).norm() < 1e-13);
        let cc = f.factor();
        assert!((&cc * cc.transpose() - &z).norm() < 1e-13);
    }

    #[test]
    fn one_dimensional_coefficients_are_scaled_hermite_values() {
        // exp(-s^2/2 + sqrt2 x s) = sum He-type; d_n = H_n(x) / sqrt(2^n n!)
        let x = 0.7;
        let h = CMatrix::from_element(1, 1, c(-1.0, 0.0));
        let d = hermite_coefficients(&[c(2f64.sqrt() * x, 0.0)], &h, &[6]);
        let herm =
            [1.0, 2.0 * x, 4.0 * x * x - 2.0, 8.0 * x.powi(3) - 12.0 * x, 16.0 * x.powi(4) - 48.0 * x * x + 12.0];
        let mut fact = 1.0;
        for n in 0..5 {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = herm[n] / (2f64.powi(n as i32) * fact).sqrt();
            assert!((d[n].re - expect).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn two_dimensional_cross_term() {
        // exp(a s t) -> [s^n t^n] = a^n / n!, normalized d_{nn} = a^n
        let a = c(0.3, 0.2);
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), a, a, c(0.0, 0.0)]);
        let d = hermite_coefficients(&[c(0.0, 0.0), c(0.0, 0.0)], &h, &[5, 5]);
        for n in 0..5 {
            assert!((d[n * 5 + n] - a.powu(n as u32)).norm() < 1e-14);
            for m in 0..5 {
                if m != n {
                    assert!(d[n * 5 + m].norm() < 1e-15);
                }
            }
        }
    }
}
