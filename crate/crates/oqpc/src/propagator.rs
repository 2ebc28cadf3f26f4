//! Propagating function `J_{nm;nu mu}(t)` of the reduced density matrix in the Fock basis.
//!
//! The oscillator starts in the global thermal state conditioned on the system preparation:
//! `W(0) = int dx dy f(x, y) P_x W_beta P_y` with `f = rho_S(x, y) / rho_beta(x, y)`. This keeps
//! the system-bath correlations of the equilibrium state, leaves `rho_beta` stationary and
//! reduces to `U (.) U^dag` without coupling. Because the total dynamics is linear, the
//! kernel in position representation is Gaussian and fixed by `G+`, `S` and the second
//! moments.
//!
//! Kernel variables (regular form) are `z = (l, r'', k, r0)` with `l = x'' - y''`,
//! `r'' = (x'' + y'')/2`, `r0 = (x + y)/2` and `x - y = G+ k + G+' l`. Singular-form variables
//! replace `k` by `d0 = x - y`, which makes the coefficients singular at zeros of `G+`.

use crate::error::{Error, Result};
use crate::gaussian::{hermite_coefficients, CMatrix, Ldlt};
use crate::greens::{FieldResponse, GreensTable};
use crate::pulse::PulseParams;
use crate::quadrature::GaussHermite;
use crate::{FIELD_SCALE, OMEGA0};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Correlation data entering the kernel at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelInputs {
    pub q2: f64,
    pub p2: f64,
    pub g: f64,
    pub g_dot: f64,
    pub s: f64,
    pub s_dot: f64,
}

impl KernelInputs {
    /// Long-time limit: correlations decayed, only the equilibrium moments remain.
    pub fn stationary(q2: f64, p2: f64) -> Self {
        Self { q2, p2, g: 0.0, g_dot: 0.0, s: 0.0, s_dot: 0.0 }
    }

    pub fn from_table(tab: &GreensTable, k: usize) -> Self {
        Self { q2: tab.q2, p2: tab.p2, g: tab.g[k], g_dot: tab.g_dot[k], s: tab.s[k], s_dot: tab.s_dot[k] }
    }
}

/// Kernel quadratic form `Q` (exponent `-z.Q.z/2`) in regular variables `(l, r'', k, r0)`.
pub fn kernel_quadratic(inp: &KernelInputs) -> CMatrix {
    let KernelInputs { q2, p2, g, g_dot, s, s_dot } = *inp;
    let mut q = CMatrix::zeros(4, 4);
    q[(0, 0)] = c(p2 - s_dot * s_dot / q2 - p2 * g_dot * g_dot);
    q[(2, 2)] = c(q2 - s * s / q2 - p2 * g * g);
    let kl = c(-s * s_dot / q2 - p2 * g * g_dot);
    q[(0, 2)] = kl;
    q[(2, 0)] = kl;
    q[(1, 2)] = I;
    q[(2, 1)] = I;
    q[(3, 2)] = -I * (s / q2);
    q[(2, 3)] = q[(3, 2)];
    q[(3, 0)] = -I * (s_dot / q2);
    q[(0, 3)] = q[(3, 0)];
    q
}

/// Map from `(l, r'', k, r0)` to the Hermite arguments `(x'', y'', x, y)`.
fn hermite_map(inp: &KernelInputs) -> DMatrix<f64> {
    let (g, gd) = (inp.g, inp.g_dot);
    DMatrix::from_row_slice(
        4,
        4,
        &[0.5, 1.0, 0.0, 0.0, -0.5, 1.0, 0.0, 0.0, 0.5 * gd, 0.0, 0.5 * g, 1.0, -0.5 * gd, 0.0, -0.5 * g, 1.0],
    )
}

/// Gaussian integral data for one time: `J = J0 sqrt(k!) [s^k] exp(g.s + s.H.s/2)`.
#[derive(Debug, Clone)]
pub struct KernelForm {
    pub inputs: KernelInputs,
    /// `Z = Q + X^T X` including the ground-state weights of the four Hermite functions.
    pub z: CMatrix,
    ldlt: Ldlt,
    z_inv: CMatrix,
    /// `P = sqrt2 X^T`.
    p: CMatrix,
    x: DMatrix<f64>,
}

impl KernelForm {
    pub fn new(inputs: KernelInputs) -> Result<Self> {
        let x = hermite_map(&inputs);
        let xc = x.map(c);
        let z = kernel_quadratic(&inputs) + xc.transpose() * &xc;
        let ldlt = Ldlt::new(&z)?;
        let z_inv = ldlt.inverse();
        let p = xc.transpose() * c(SQRT_2);
        Ok(Self { inputs, z, ldlt, z_inv, p, x })
    }

    pub fn from_table(tab: &GreensTable, k: usize) -> Result<Self> {
        Self::new(KernelInputs::from_table(tab, k))
    }

    /// Linear coefficient vector `b` for a classical response `(x_c, p_c)`.
    pub fn linear_term(x_c: f64, p_c: f64) -> [Complex64; 4] {
        [I * p_c, c(0.0), I * x_c, c(0.0)]
    }

    /// Ground-state amplitude, Hermite linear coefficients and quadratic coefficients.
    pub fn hermite_data(&self, x_c: f64, p_c: f64) -> (Complex64, [Complex64; 4], CMatrix) {
        let b = Self::linear_term(x_c, p_c);
        let zb = self.ldlt.solve(&b);
        let quad: Complex64 = b.iter().zip(&zb).map(|(u, v)| u * v).sum();
        let j0 = 2.0 / self.ldlt.sqrt_det() * (0.5 * quad).exp();
        let pt = self.p.transpose();
        let mut g = [c(0.0); 4];
        for (i, gi) in g.iter_mut().enumerate() {
            *gi = (0..4).map(|j| pt[(i, j)] * zb[j]).sum();
        }
        let h = &pt * &self.z_inv * &self.p - CMatrix::identity(4, 4);
        (j0, g, h)
    }

    /// `[[A11, A12], [A12, A22]]` with `J_{00;00} ∝ exp(E.A.E/2)`, `E = (E+, E-)`.
    pub fn a_matrix(&self) -> AMatrix {
        let (g, gd) = (self.inputs.g, self.inputs.g_dot);
        // b = i (p_c, 0, x_c, 0) with x_c = -G E+, p_c = -E- - G' E+
        let cols = [[-gd, -g], [-1.0, 0.0]];
        let idx = [0usize, 2];
        let mut a = [[0.0; 2]; 2];
        let mut imag = 0.0f64;
        for r in 0..2 {
            for s in 0..2 {
                let mut v = c(0.0);
                for (i, &zi) in idx.iter().enumerate() {
                    for (j, &zj) in idx.iter().enumerate() {
                        v += cols[r][i] * self.z_inv[(zi, zj)] * cols[s][j];
                    }
                }
                a[r][s] = -v.re;
                imag = imag.max(v.im.abs());
            }
        }
        AMatrix { a11: a[0][0], a12: a[0][1], a22: a[1][1], imag_residue: imag }
    }

    /// Integrate the Hermite product for one index set by tensor Gauss-Hermite quadrature
    /// after whitening `Z = C C^T`.
    pub fn gauss_hermite_element(&self, x_c: f64, p_c: f64, idx: [usize; 4], nodes: usize) -> Complex64 {
        let b = Self::linear_term(x_c, p_c);
        let cf = self.ldlt.factor();
        // c = C^{-1} b,  z = C^{-T} (u + c)
        let cinv = cf.clone().try_inverse().expect("whitening factor is invertible");
        let cvec: Vec<Complex64> = (0..4).map(|i| (0..4).map(|j| cinv[(i, j)] * b[j]).sum()).collect();
        let shift: Complex64 = cvec.iter().map(|v| v * v).sum();
        let cit = cinv.transpose();
        let xz = self.x.map(c) * &cit;
        let gh = GaussHermite::new(nodes);
        let pts: Vec<f64> = gh.nodes.iter().map(|x| SQRT_2 * x).collect();
        let wts: Vec<f64> = gh.weights.iter().map(|w| SQRT_2 * w).collect();
        let mut total = c(0.0);
        let mut u = [0.0; 4];
        for a in 0..nodes {
            u[0] = pts[a];
            for b2 in 0..nodes {
                u[1] = pts[b2];
                for c2 in 0..nodes {
                    u[2] = pts[c2];
                    for d in 0..nodes {
                        u[3] = pts[d];
                        let w = wts[a] * wts[b2] * wts[c2] * wts[d];
                        let mut prod = c(1.0);
                        for (r, &k) in idx.iter().enumerate() {
                            let xr: Complex64 = (0..4).map(|s| xz[(r, s)] * (u[s] + cvec[s])).sum();
                            prod *= hermite_poly(k, xr);
                        }
                        total += prod * w;
                    }
                }
            }
        }
        total * (0.5 * shift).exp() / (2.0 * PI * PI * self.ldlt.sqrt_det())
    }
}

/// Normalized Hermite polynomial `H_k(x) / sqrt(2^k k!)`.
fn hermite_poly(k: usize, x: Complex64) -> Complex64 {
    let mut h0 = c(1.0);
    if k == 0 {
        return h0;
    }
    let mut h1 = x * SQRT_2;
    for j in 1..k {
        let jf = j as f64;
        let h2 = x * (2.0 / (jf + 1.0)).sqrt() * h1 - h0 * (jf / (jf + 1.0)).sqrt();
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Quadratic form of the field amplitudes in the ground-state element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// Largest imaginary part discarded; zero up to rounding.
    pub imag_residue: f64,
}

impl AMatrix {
    pub fn quadratic_form(&self, e_plus: f64, e_minus: f64) -> f64 {
        self.a11 * e_plus * e_plus + 2.0 * self.a12 * e_plus * e_minus + self.a22 * e_minus * e_minus
    }
}

/// Kernel in singular-form variables `(l, r'', d0, r0)`: `M = T^T Q T` with `k = (d0 - G' l)/G`.
#[derive(Debug, Clone)]
pub struct MMatrix {
    pub m: CMatrix,
    /// Ground-state Hermite weights `X_p^T X_p` in the same variables.
    pub weights: CMatrix,
}

impl MMatrix {
    pub fn new(inputs: &KernelInputs, t: f64) -> Result<Self> {
        if inputs.g.abs() < 1e-12 {
            return Err(Error::NearZeroDenominator { t, value: inputs.g });
        }
        let mut tm = CMatrix::identity(4, 4);
        tm[(2, 0)] = c(-inputs.g_dot / inputs.g);
        tm[(2, 2)] = c(1.0 / inputs.g);
        let q = kernel_quadratic(inputs);
        let xp = hermite_map(inputs).map(c) * &tm;
        Ok(Self { m: tm.transpose() * q * &tm, weights: xp.transpose() * xp })
    }

    /// Entry `(i, j)` of the kernel.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }
}

/// Normalization `N(t) = 2 pi |G+(t)| sqrt(2 pi <q^2>)` of the singular-form kernel.
pub fn kernel_normalization(inputs: &KernelInputs) -> f64 {
    2.0 * PI * inputs.g.abs() * (2.0 * PI * inputs.q2).sqrt()
}

/// Fock tensor `J_{nm;nu mu}` for all indices below `dims`.
#[derive(Debug, Clone)]
pub struct ElementTensor {
    pub dims: [usize; 4],
    pub data: Vec<Complex64>,
}

impl ElementTensor {
    pub fn identity(dims: [usize; 4]) -> Self {
        let mut data = vec![c(0.0); dims.iter().product()];
        for n in 0..dims[0].min(dims[2]) {
            for m in 0..dims[1].min(dims[3]) {
                data[((n * dims[1] + m) * dims[2] + n) * dims[3] + m] = c(1.0);
            }
        }
        Self { dims, data }
    }

    pub fn get(&self, n: usize, m: usize, nu: usize, mu: usize) -> Complex64 {
        let d = self.dims;
        self.data[((n * d[1] + m) * d[2] + nu) * d[3] + mu]
    }
}

/// Propagating function for one bath, temperature and pulse on the tabulated grid.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    pub table: &'a GreensTable,
    pub response: FieldResponse,
}

impl<'a> Propagator<'a> {
    pub fn new(table: &'a GreensTable, pulse: &PulseParams) -> Result<Self> {
        Ok(Self { table, response: table.field_response(pulse)? })
    }

    /// Field-free propagator.
    pub fn free(table: &'a GreensTable) -> Self {
        let len = table.grid.len;
        Self { table, response: FieldResponse { grid: table.grid, x_c: vec![0.0; len], p_c: vec![0.0; len] } }
    }

    pub fn form(&self, k: usize) -> Result<KernelForm> {
        KernelForm::from_table(self.table, k)
    }

    /// Full tensor at grid index `k`; the identity at `t = 0`.
    pub fn tensor(&self, k: usize, dims: [usize; 4]) -> Result<ElementTensor> {
        if k == 0 {
            return Ok(ElementTensor::identity(dims));
        }
        let form = self.form(k)?;
        let (j0, g, h) = form.hermite_data(self.response.x_c[k], self.response.p_c[k]);
        let mut data = hermite_coefficients(&g, &h, &dims);
        for v in data.iter_mut() {
            *v *= j0;
        }
        Ok(ElementTensor { dims, data })
    }

    /// `J_{00;00}` from the regular form.
    pub fn j_0000(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let form = self.form(k)?;
        Ok(form.hermite_data(self.response.x_c[k], self.response.p_c[k]).0.re)
    }

    /// `J_{00;00} = sqrt(2^4 2 pi^3 <q^2> / det(M + W)) / N(t) exp(E.A.E/2)` from the
    /// singular-form kernel; singular where `G+` vanishes.
    pub fn j_0000_singular_form(&self, k: usize) -> Result<f64> {
        let inputs = KernelInputs::from_table(self.table, k);
        let t = self.table.grid.t(k);
        let mm = MMatrix::new(&inputs, t)?;
        let (e_plus, e_minus) = self.response.field_projections(self.table, k)?;
        let zp = &mm.m + &mm.weights;
        let ld = Ldlt::new(&zp)?;
        let b = [-I * e_minus, c(0.0), -I * e_plus, c(0.0)];
        let zb = ld.solve(&b);
        let quad: Complex64 = b.iter().zip(&zb).map(|(u, v)| u * v).sum();
        let pref = (16.0 * 2.0 * PI.powi(3) * inputs.q2).sqrt() / kernel_normalization(&inputs);
        Ok((pref / ld.sqrt_det() * (0.5 * quad).exp()).re)
    }

    /// `J_{00;20} = J_{00;00} (H_33 + g_3^2) / sqrt2`.
    pub fn j_0020(&self, k: usize) -> Result<Complex64> {
        if k == 0 {
            return Ok(c(0.0));
        }
        let form = self.form(k)?;
        let (j0, g, h) = form.hermite_data(self.response.x_c[k], self.response.p_c[k]);
        Ok(j0 * (h[(2, 2)] + g[2] * g[2]) / SQRT_2)
    }

    /// Any single element by Gauss-Hermite quadrature, refined until two node counts agree.
    pub fn j_general(&self, idx: [usize; 4], k: usize) -> Result<Complex64> {
        if k == 0 {
            let id = idx[0] == idx[2] && idx[1] == idx[3];
            return Ok(c(if id { 1.0 } else { 0.0 }));
        }
        let form = self.form(k)?;
        let (x_c, p_c) = (self.response.x_c[k], self.response.p_c[k]);
        let deg: usize = idx.iter().sum();
        let nodes = (deg / 2 + 4).max(8);
        let a = form.gauss_hermite_element(x_c, p_c, idx, nodes);
        let b = form.gauss_hermite_element(x_c, p_c, idx, nodes + 4);
        let scale = form.hermite_data(x_c, p_c).0.norm().max(1e-300);
        if (a - b).norm() > 1e-10 * scale.max(b.norm()) {
            return Err(Error::QuadratureNotConverged(format!(
                "Gauss-Hermite element {idx:?}: {a} vs {b} with {nodes} and {} nodes",
                nodes + 4
            )));
        }
        Ok(b)
    }

    pub fn a_matrix(&self, k: usize) -> Result<AMatrix> {
        Ok(self.form(k)?.a_matrix())
    }

    pub fn m_matrix(&self, k: usize) -> Result<MMatrix> {
        MMatrix::new(&KernelInputs::from_table(self.table, k), self.table.grid.t(k))
    }
}

/// Long-time form of `E.A.E` in terms of the classical response:
/// `-[p_c^2 / (<p^2> + 1/2) + x_c^2 / (<q^2> + 1/2)]`. The `E+` dependence enters only through
/// `x_c = -G+ E+` and `p_c = -E- - G+' E+`, so it fades with the decay of `G+`.
pub fn long_time_quadratic_form(q2: f64, p2: f64, x_c: f64, p_c: f64) -> f64 {
    -(p_c * p_c / (p2 + 0.5) + x_c * x_c / (q2 + 0.5))
}

/// Long-time `J_{00;20}` from the stationary kernel; it vanishes once the initial coherence
/// is forgotten, so deviations measure the remaining memory.
pub fn long_time_j_0020(q2: f64, p2: f64, x_c: f64, p_c: f64) -> Result<Complex64> {
    let form = KernelForm::new(KernelInputs::stationary(q2, p2))?;
    let (j0, g, h) = form.hermite_data(x_c, p_c);
    Ok(j0 * (h[(2, 2)] + g[2] * g[2]) / SQRT_2)
}

/// Closed-form elements of the uncoupled, driven oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryElements {
    pub j_nn00: f64,
    pub j_nn01: Complex64,
    pub j_nn11: f64,
}

/// Uncoupled elements at time `t` from `E(t) = int_{-inf}^t exp(-i omega0 s) E(s) ds`.
///
/// With `H = p^2/2 + q^2/2 + q E(t)` the Schroedinger-picture amplitudes are those of a
/// displacement by `alpha = -i conj(E(t)) / FIELD_SCALE`; the `01` element therefore carries
/// `i conj(E(t))`.
pub fn unitary_elements(pulse: &PulseParams, n: usize, t: f64) -> Result<UnitaryElements> {
    let e = pulse.windowed_transform(OMEGA0, t)?;
    Ok(unitary_elements_from_amplitude(e, n))
}

pub fn unitary_elements_from_amplitude(e: Complex64, n: usize) -> UnitaryElements {
    let x = e.norm_sqr() / (FIELD_SCALE * FIELD_SCALE);
    let lnfact: f64 = (1..=n).map(|j| (j as f64).ln()).sum();
    let et = I * e.conj() / FIELD_SCALE;
    let w = (-x - lnfact).exp();
    if n == 0 {
        return UnitaryElements { j_nn00: (-x).exp(), j_nn01: et * (-x).exp(), j_nn11: x * (-x).exp() };
    }
    let nf = n as f64;
    let xp = x.powi(n as i32 - 1);
    UnitaryElements { j_nn00: w * xp * x, j_nn01: et * w * xp * (x - nf), j_nn11: w * xp * (x - nf).powi(2) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_elements_preserve_trace() {
        let e = Complex64::new(0.7, -0.4);
        let (mut s0, mut s1, mut s11) = (0.0, c(0.0), 0.0);
        for n in 0..60 {
            let u = unitary_elements_from_amplitude(e, n);
            s0 += u.j_nn00;
            s1 += u.j_nn01;
            s11 += u.j_nn11;
        }
        assert!((s0 - 1.0).abs() < 1e-14);
        assert!(s1.norm() < 1e-14);
        assert!((s11 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_unitary_elements() {
        let u = unitary_elements_from_amplitude(c(0.0), 0);
        assert_eq!((u.j_nn00, u.j_nn01, u.j_nn11), (1.0, c(0.0), 0.0));
        let u = unitary_elements_from_amplitude(c(0.0), 3);
        assert_eq!((u.j_nn00, u.j_nn01, u.j_nn11), (0.0, c(0.0), 0.0));
    }

    #[test]
    fn identity_tensor() {
        let t = ElementTensor::identity([3, 3, 3, 3]);
        assert_eq!(t.get(1, 2, 1, 2), c(1.0));
        assert_eq!(t.get(1, 2, 2, 1), c(0.0));
    }
}
