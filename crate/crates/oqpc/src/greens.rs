//! Response function `G+`, its derivatives, the symmetrized equilibrium correlation `S(t)`
//! and the classical field response of the damped oscillator.
//!
//! `G+` solves `G'' + G + int_0^t gamma(t-u) G'(u) du = 0` with `G(0) = 0`, `G'(0) = 1`.
//! For the Drude kernel it is a sum of three exponentials; otherwise it comes from the
//! equivalent Volterra equation `G(t) = t - int_0^t [(t-u) + Gamma1(t-u)] G(u) du`.

use crate::bath::SpectralDensity;
use crate::equilibrium::{matsubara_cutoff, second_moments, zeta_tail};
use crate::error::{Error, Result};
use crate::grid::{hermite, TimeGrid};
use crate::output::fmt17;
use crate::pulse::PulseParams;
use crate::quadrature::GaussLegendre;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

/// `G_hat(nu) = 1 / (nu^2 + nu gamma_hat(nu) + 1)` for real `nu >= 0`.
pub fn laplace_green(model: &SpectralDensity, nu: f64) -> Result<f64> {
    if nu == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (nu * nu + nu * model.laplace_gamma_real(nu)? + 1.0))
}

/// Residue representation `G+(t) = sum_k c_k exp(z_k t)` for the Drude kernel.
#[derive(Debug, Clone)]
pub struct ResidueForm {
    pub roots: [Complex64; 3],
    pub coeffs: [Complex64; 3],
    omega_d: f64,
}

impl ResidueForm {
    /// Roots of `z^3 + wd z^2 + (1 + gamma wd) z + wd`.
    pub fn drude(gamma: f64, omega_d: f64) -> Result<Self> {
        let (a, b, c) = (omega_d, 1.0 + gamma * omega_d, omega_d);
        let p = |z: Complex64| ((z + a) * z + b) * z + c;
        let dp = |z: Complex64| (3.0 * z + 2.0 * a) * z + b;
        let pr = |x: f64| ((x + a) * x + b) * x + c;
        let (mut lo, mut hi) = (-(1.0 + a.max(b).max(c)), 0.0);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if pr(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-16 * lo.abs() {
                break;
            }
        }
        let r = 0.5 * (lo + hi);
        let bq = a + r;
        let cq = b + r * bq;
        let disc = Complex64::new(bq * bq - 4.0 * cq, 0.0).sqrt();
        let sgn = if bq >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (bq + sgn * disc);
        let mut roots = [Complex64::new(r, 0.0), q, if q.norm() > 0.0 { cq / q } else { q }];
        for z in roots.iter_mut() {
            for _ in 0..4 {
                let d = dp(*z);
                if d.norm() == 0.0 {
                    break;
                }
                *z -= p(*z) / d;
            }
        }
        let scale = 1.0 + a.max(b);
        for i in 0..3 {
            for j in i + 1..3 {
                if (roots[i] - roots[j]).norm() < 1e-6 * scale {
                    return Err(Error::RootFindingFailed(format!(
                        "near-degenerate roots {} and {} (critical damping)",
                        roots[i], roots[j]
                    )));
                }
            }
            if roots[i].re > 1e-12 {
                return Err(Error::RootFindingFailed(format!("unstable root {}", roots[i])));
            }
        }
        let coeffs = roots.map(|z| (z + a) / dp(z));
        Ok(Self { roots, coeffs, omega_d })
    }

    fn sum(&self, t: f64, power: i32) -> f64 {
        (0..3).map(|k| (self.coeffs[k] * self.roots[k].powi(power) * (self.roots[k] * t).exp()).re).sum()
    }

    pub fn g(&self, t: f64) -> f64 {
        self.sum(t, 0)
    }
    pub fn g_dot(&self, t: f64) -> f64 {
        self.sum(t, 1)
    }
    pub fn g_ddot(&self, t: f64) -> f64 {
        self.sum(t, 2)
    }

    pub fn g_hat(&self, z: Complex64) -> Complex64 {
        let [r0, r1, r2] = self.roots;
        (z + self.omega_d) / ((z - r0) * (z - r1) * (z - r2))
    }
}

fn coth(w: Complex64) -> Complex64 {
    if w.re < 0.0 {
        return -coth(-w);
    }
    let e = (-2.0 * w).exp();
    (1.0 + e) / (1.0 - e)
}

/// `e^y E_k(y)` for `k = 1..=kmax` by upward recurrence.
fn scaled_expint_table(y: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    out[1] = crate::bath::exp_scaled_e1(y);
    for k in 1..kmax {
        out[k + 1] = (1.0 - y * out[k]) / k as f64;
    }
    out
}

/// `sum_{n > N} (nu1 n)^{-k} exp(-nu1 n t)` by Euler-Maclaurin.
fn power_exp_tail(nu1: f64, n: usize, k: usize, t: f64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    if t == 0.0 {
        return zeta_tail(kf, n) / nu1.powf(kf);
    }
    let y = nu1 * t * nf;
    if y > 700.0 {
        return 0.0;
    }
    let e = scaled_expint_table(y, k);
    let ey = (-y).exp();
    let integral = nf.powf(1.0 - kf) * e[k] * ey;
    let f = nf.powf(-kf) * ey;
    let df = f * (-kf / nf - nu1 * t);
    (integral - 0.5 * f - df / 12.0) / nu1.powf(kf)
}

/// Closed-form `S(t)` and `S'(t)` for the Drude kernel: Matsubara poles plus oscillator poles.
fn drude_correlation(
    res: &ResidueForm,
    model: &SpectralDensity,
    beta: f64,
    times: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let nu1 = 2.0 * PI / beta;
    let n_terms = matsubara_cutoff(model, beta)?;
    let d: Vec<f64> = (1..=n_terms)
        .map(|n| {
            let nu = Complex64::new(nu1 * n as f64, 0.0);
            (res.g_hat(nu) - res.g_hat(-nu)).re
        })
        .collect();
    let [a0, a1, _, a3, _] = model.large_frequency_coefficients();
    let big_a = 1.0 + a0;
    // odd part of G_hat: -a1 z^-5 + (2 A a1 - a3) z^-7
    let c5 = -2.0 * a1;
    let c7 = 2.0 * (2.0 * big_a * a1 - a3);
    let pole: Vec<Complex64> = (0..3)
        .map(|k| Complex64::new(0.0, 0.5) * res.coeffs[k] * coth(Complex64::new(0.0, -0.5 * beta) * res.roots[k]))
        .collect();
    let mut s = Vec::with_capacity(times.len());
    let mut sd = Vec::with_capacity(times.len());
    for &t in times {
        let x = (-nu1 * t).exp();
        let mut xn = 1.0;
        let mut acc = 0.0;
        let mut accd = 0.0;
        for (i, dn) in d.iter().enumerate() {
            xn *= x;
            if xn < 1e-300 {
                break;
            }
            acc += dn * xn;
            accd -= nu1 * (i + 1) as f64 * dn * xn;
        }
        acc += c5 * power_exp_tail(nu1, n_terms, 5, t) + c7 * power_exp_tail(nu1, n_terms, 7, t);
        accd -= c5 * power_exp_tail(nu1, n_terms, 4, t) + c7 * power_exp_tail(nu1, n_terms, 6, t);
        let mut ps = 0.0;
        let mut psd = 0.0;
        for k in 0..3 {
            let e = pole[k] * (res.roots[k] * t).exp();
            ps += e.re;
            psd += (e * res.roots[k]).re;
        }
        s.push(acc / beta + ps);
        sd.push(accd / beta + psd);
    }
    Ok((s, sd))
}

/// Numerical Volterra machinery on a uniform grid with fourth-order Gregory weights and a
/// six-step polynomial starting block.
pub struct Volterra {
    h: f64,
    start: DMatrix<f64>,
    kvals: Vec<f64>,
}

const START: usize = 6;
const GREGORY: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];

impl Volterra {
    /// Prepare for convolutions with kernel `k` on `len` points of spacing `h`.
    pub fn new<K: Fn(f64) -> f64>(k: K, h: f64, len: usize) -> Self {
        let gl = GaussLegendre::new(24);
        let nodes: Vec<f64> = (0..=START).map(|j| j as f64 * h).collect();
        let lagrange = |j: usize, u: f64| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .fold(1.0, |acc, (_, &xi)| acc * (u - xi) / (nodes[j] - xi))
        };
        let mut start = DMatrix::zeros(START + 1, START + 1);
        for n in 1..=START {
            let tn = n as f64 * h;
            for j in 0..=START {
                start[(n, j)] = gl.integrate(|u| k(tn - u) * lagrange(j, u), 0.0, tn);
            }
        }
        let kvals = (0..len).map(|m| k(m as f64 * h)).collect();
        Self { h, start, kvals }
    }

    fn gregory_sum(&self, y: &[f64], n: usize) -> f64 {
        let k = &self.kvals;
        let mut s = 0.0;
        for j in 0..=n {
            s += k[n - j] * y[j];
        }
        for (i, w) in GREGORY.iter().enumerate() {
            s += (w - 1.0) * (k[n - i] * y[i] + k[i] * y[n - i]);
        }
        self.h * s
    }

    /// `c_n = int_0^{t_n} k(t_n - u) y(u) du`.
    pub fn convolve(&self, y: &[f64]) -> Vec<f64> {
        let mut c = vec![0.0; y.len()];
        for n in 1..y.len() {
            c[n] =
                if n <= START { (0..=START).map(|j| self.start[(n, j)] * y[j]).sum() } else { self.gregory_sum(y, n) };
        }
        c
    }

    /// Solve `y = f - k * y`; requires `k(0) = 0`.
    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        let len = f.len();
        let mut y = vec![0.0; len];
        y[0] = f[0];
        let m = START.min(len - 1);
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        for n in 1..=m {
            rhs[n - 1] = f[n] - self.start[(n, 0)] * y[0];
            for j in 1..=m {
                a[(n - 1, j - 1)] += self.start[(n, j)];
            }
        }
        let sol = a.lu().solve(&rhs).expect("starting block is well conditioned for small h");
        for n in 1..=m {
            y[n] = sol[n - 1];
        }
        for n in START + 1..len {
            y[n] = f[n] - self.gregory_sum(&y, n);
        }
        y
    }
}

/// `G+`, `G+'` and `G+''` on `len` grid points from the Volterra equations.
pub fn volterra_green(model: &SpectralDensity, h: f64, len: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = *model;
    let solver = Volterra::new(move |x| x + m.kernel_integral(x), h, len);
    let f: Vec<f64> = (0..len).map(|k| k as f64 * h).collect();
    let g = solver.solve(&f);
    let conv1 = Volterra::new(move |x| 1.0 + m.dissipative_kernel(x), h, len).convolve(&g);
    let gd: Vec<f64> = conv1.iter().map(|c| 1.0 - c).collect();
    let conv2 = Volterra::new(move |x| m.dissipative_kernel(x), h, len).convolve(&gd);
    let gdd: Vec<f64> = g.iter().zip(&conv2).map(|(g, c)| -g - c).collect();
    (g, gd, gdd)
}

/// Fourth-order finite-difference derivative of uniformly sampled data (at least 5 points).
fn derivative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|k| {
            if k >= 2 && k + 2 < n {
                (y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]) / (12.0 * h)
            } else if k == 0 {
                (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h)
            } else if k == 1 {
                (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h)
            } else if k == n - 1 {
                (25.0 * y[k] - 48.0 * y[k - 1] + 36.0 * y[k - 2] - 16.0 * y[k - 3] + 3.0 * y[k - 4]) / (12.0 * h)
            } else {
                (3.0 * y[k + 1] + 10.0 * y[k] - 18.0 * y[k - 1] + 6.0 * y[k - 2] - y[k - 3]) / (12.0 * h)
            }
        })
        .collect()
}

/// `S(t)` and `S'(t)` from tabulated `G+` on an extended grid through
/// `S(t) = (1/beta)(1 - int_0^t G) + (2/beta) sum_{n>=1} I_n(t)` with
/// `I_n(t) = (1/2nu_n) int exp(-nu_n |t-u|) G'(|u|) du`.
///
/// `g`, `gd`, `gdd` must extend far enough beyond `out_len` for `exp(-nu_1 u)` to decay.
pub fn correlation_from_green(
    model: &SpectralDensity,
    beta: f64,
    h: f64,
    g: &[f64],
    gd: &[f64],
    gdd: &[f64],
    out_len: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let len = g.len();
    let nu1 = 2.0 * PI / beta;
    let n_terms = matsubara_cutoff(model, beta)?;
    // cubic Hermite coefficients of G' on every interval, in the local variable u in [0, 1]
    let cubic: Vec<[f64; 4]> = (0..len - 1)
        .map(|k| {
            let (y0, y1, d0, d1) = (gd[k], gd[k + 1], h * gdd[k], h * gdd[k + 1]);
            [y0, d0, 3.0 * (y1 - y0) - 2.0 * d0 - d1, 2.0 * (y0 - y1) + d0 + d1]
        })
        .collect();
    let mut sum_i = vec![0.0; out_len];
    let mut sum_id = vec![0.0; out_len];
    let mut fwd = vec![0.0; len];
    let mut bwd = vec![0.0; len];
    for n in 1..=n_terms {
        let nu = nu1 * n as f64;
        let ghat = laplace_green(model, nu)?;
        let decay = (-nu * h).exp();
        let (lw, mw) = exponential_moments(nu * h);
        let local = |c: &[f64; 4], w: &[f64; 4]| h * (c[0] * w[0] + c[1] * w[1] + c[2] * w[2] + c[3] * w[3]);
        for k in 0..out_len - 1 {
            fwd[k + 1] = decay * fwd[k] + local(&cubic[k], &mw);
        }
        bwd[len - 1] = gd[len - 1] / nu + gdd[len - 1] / (nu * nu);
        for k in (0..len - 1).rev() {
            bwd[k] = decay * bwd[k + 1] + local(&cubic[k], &lw);
        }
        let mut e = 1.0;
        for k in 0..out_len {
            let head = e * nu * ghat;
            sum_i[k] += (head + fwd[k] + bwd[k]) / (2.0 * nu);
            sum_id[k] += 0.5 * (-head - fwd[k] + bwd[k]);
            e *= decay;
        }
    }
    let g3 = derivative(gdd, h);
    let g4 = derivative(&g3, h);
    let g5 = derivative(&g4, h);
    let g6 = derivative(&g5, h);
    let z2 = zeta_tail(2.0, n_terms) / nu1.powi(2);
    let z4 = zeta_tail(4.0, n_terms) / nu1.powi(4);
    let z6 = zeta_tail(6.0, n_terms) / nu1.powi(6);
    let mut cum = 0.0;
    let mut s = vec![0.0; out_len];
    let mut sd = vec![0.0; out_len];
    // G'(|u|) has a jump -2 gamma'(0) in its third derivative at u = 0
    let kink = -model.large_frequency_coefficients()[1];
    for k in 0..out_len {
        if k > 0 {
            cum += h * 0.5 * (g[k - 1] + g[k]) + h * h * (gd[k - 1] - gd[k]) / 12.0;
        }
        let t = k as f64 * h;
        let (k5, k4) = if kink != 0.0 {
            (power_exp_tail(nu1, n_terms, 5, t), power_exp_tail(nu1, n_terms, 4, t))
        } else {
            (0.0, 0.0)
        };
        s[k] = (1.0 - cum) / beta + 2.0 / beta * (sum_i[k] + gd[k] * z2 + g3[k] * z4 + g5[k] * z6 + kink * k5);
        sd[k] = -g[k] / beta + 2.0 / beta * (sum_id[k] + gdd[k] * z2 + g4[k] * z4 + g6[k] * z6 - kink * k4);
    }
    Ok((s, sd))
}

/// `L_m(a) = int_0^1 exp(-a u) u^m du` and `M_m(a) = int_0^1 exp(-a (1-u)) u^m du`, `m = 0..4`.
fn exponential_moments(a: f64) -> ([f64; 4], [f64; 4]) {
    let mut l = [0.0; 4];
    let mut m = [0.0; 4];
    if a < 4.0 {
        for j in 0..4 {
            // L_j = sum (-a)^k / (k! (j+k+1)),  M_j = sum (-a)^k j! / (k+j+1)!
            let mut term = 1.0;
            let mut r = 1.0 / (j + 1) as f64;
            for k in 0..80 {
                if k > 0 {
                    term *= -a / k as f64;
                    r *= k as f64 / (k + j + 1) as f64;
                }
                l[j] += term / (j + k + 1) as f64;
                m[j] += term * r;
                if term.abs() < 1e-18 {
                    break;
                }
            }
        }
    } else {
        let e = (-a).exp();
        l[0] = -(-a).exp_m1() / a;
        m[0] = l[0];
        for j in 1..4 {
            l[j] = (j as f64 * l[j - 1] - e) / a;
            m[j] = (1.0 - j as f64 * m[j - 1]) / a;
        }
    }
    (l, m)
}

/// Largest extended grid used for the general correlation route.
pub const MAX_EXTENDED_POINTS: usize = 80_000;

/// Response and correlation functions tabulated on the simulation grid.
#[derive(Debug, Clone)]
pub struct GreensTable {
    pub model: SpectralDensity,
    pub beta: f64,
    pub grid: TimeGrid,
    pub g: Vec<f64>,
    pub g_dot: Vec<f64>,
    pub g_ddot: Vec<f64>,
    pub s: Vec<f64>,
    pub s_dot: Vec<f64>,
    pub q2: f64,
    pub p2: f64,
    residues: Option<ResidueForm>,
}

impl GreensTable {
    pub fn new(model: &SpectralDensity, beta: f64, grid: TimeGrid) -> Result<Self> {
        model.validate()?;
        let moments = second_moments(model, beta)?;
        let times: Vec<f64> = grid.times().collect();
        match *model {
            SpectralDensity::OhmicDrude { gamma, omega_d } => {
                let res = ResidueForm::drude(gamma, omega_d)?;
                let (s, s_dot) = drude_correlation(&res, model, beta, &times)?;
                Ok(Self {
                    model: *model,
                    beta,
                    grid,
                    g: times.iter().map(|&t| res.g(t)).collect(),
                    g_dot: times.iter().map(|&t| res.g_dot(t)).collect(),
                    g_ddot: times.iter().map(|&t| res.g_ddot(t)).collect(),
                    s,
                    s_dot,
                    q2: moments.q2,
                    p2: moments.p2,
                    residues: Some(res),
                })
            }
            SpectralDensity::SubOhmic { .. } => {
                let ext = grid.len + (36.0 * beta / (2.0 * PI) / grid.dt).ceil() as usize + 8;
                if ext > MAX_EXTENDED_POINTS {
                    return Err(Error::InvalidParameter(format!(
                        "correlation table would need {ext} points (> {MAX_EXTENDED_POINTS}); raise the temperature or the step"
                    )));
                }
                let (g, gd, gdd) = volterra_green(model, grid.dt, ext);
                let (s, s_dot) = correlation_from_green(model, beta, grid.dt, &g, &gd, &gdd, grid.len)?;
                Ok(Self {
                    model: *model,
                    beta,
                    grid,
                    g: g[..grid.len].to_vec(),
                    g_dot: gd[..grid.len].to_vec(),
                    g_ddot: gdd[..grid.len].to_vec(),
                    s,
                    s_dot,
                    q2: moments.q2,
                    p2: moments.p2,
                    residues: None,
                })
            }
        }
    }

    pub fn residues(&self) -> Option<&ResidueForm> {
        self.residues.as_ref()
    }

    /// `(G+(t), G+'(t))` by cubic Hermite interpolation.
    pub fn antisymmetric_corr(&self, t: f64) -> Result<(f64, f64)> {
        Ok((self.grid.interpolate(&self.g, &self.g_dot, t)?, self.grid.interpolate(&self.g_dot, &self.g_ddot, t)?))
    }

    /// `(S(t), S'(t))`; the derivative is interpolated from its own samples.
    pub fn symmetric_corr(&self, t: f64) -> Result<(f64, f64)> {
        let sdd = derivative(&self.s_dot, self.grid.dt);
        Ok((self.grid.interpolate(&self.s, &self.s_dot, t)?, self.grid.interpolate(&self.s_dot, &sdd, t)?))
    }

    /// CSV with columns `t,G+,G+dot,S,Sdot`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,G+,G+dot,S,Sdot")?;
        for k in 0..self.grid.len {
            let row = [self.grid.t(k), self.g[k], self.g_dot[k], self.s[k], self.s_dot[k]];
            writeln!(w, "{}", row.map(fmt17).join(","))?;
        }
        Ok(())
    }

    /// Classical response `x_c = -int_0^t G(t-s) E(s) ds`, `p_c = -int_0^t G'(t-s) E(s) ds`.
    pub fn field_response(&self, pulse: &PulseParams) -> Result<FieldResponse> {
        let h = self.grid.dt;
        let len = self.grid.len;
        let panels = ((h * pulse.max_instantaneous_frequency()).ceil() as usize).max(1);
        let gl = GaussLegendre::new(8);
        let (lo, hi) = pulse.support();
        let active = |k: usize| {
            let (a, b) = (k as f64 * h, (k + 1) as f64 * h);
            b > lo && a < hi
        };
        let mut x_c = vec![0.0; len];
        let mut p_c = vec![0.0; len];
        if let Some(res) = &self.residues {
            let mut f = [Complex64::new(0.0, 0.0); 3];
            let steps: Vec<Complex64> = res.roots.iter().map(|z| (z * h).exp()).collect();
            for k in 0..len - 1 {
                let b = (k + 1) as f64 * h;
                for r in 0..3 {
                    let z = res.roots[r];
                    let mut loc = Complex64::new(0.0, 0.0);
                    if active(k) {
                        for p in 0..panels {
                            let a0 = k as f64 * h + p as f64 * h / panels as f64;
                            loc +=
                                gl.integrate(|s| (z * (b - s)).exp() * pulse.field_at(s), a0, a0 + h / panels as f64);
                        }
                    }
                    f[r] = steps[r] * f[r] + loc;
                }
                x_c[k + 1] = -(0..3).map(|r| (res.coeffs[r] * f[r]).re).sum::<f64>();
                p_c[k + 1] = -(0..3).map(|r| (res.coeffs[r] * res.roots[r] * f[r]).re).sum::<f64>();
            }
        } else {
            // product integration against interpolated G on each active source interval
            let m = gl.nodes.len() * panels;
            let mut frac = Vec::with_capacity(m);
            let mut wts = Vec::with_capacity(m);
            for p in 0..panels {
                for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                    frac.push((p as f64 + 0.5 * (x + 1.0)) / panels as f64);
                    wts.push(0.5 * w * h / panels as f64);
                }
            }
            let sources: Vec<usize> = (0..len - 1).filter(|&k| active(k)).collect();
            let field: Vec<Vec<f64>> = sources
                .iter()
                .map(|&j| frac.iter().zip(&wts).map(|(u, w)| w * pulse.field_at((j as f64 + u) * h)).collect())
                .collect();
            let interp =
                |y: &[f64], dy: &[f64], m: usize, i: usize| hermite(y[m], dy[m], y[m + 1], dy[m + 1], h, 1.0 - frac[i]);
            for n in 1..len {
                let (mut xs, mut ps) = (0.0, 0.0);
                for (si, &j) in sources.iter().enumerate() {
                    if j >= n {
                        break;
                    }
                    let lag = n - j - 1;
                    for i in 0..m {
                        xs += field[si][i] * interp(&self.g, &self.g_dot, lag, i);
                        ps += field[si][i] * interp(&self.g_dot, &self.g_ddot, lag, i);
                    }
                }
                x_c[n] = -xs;
                p_c[n] = -ps;
            }
        }
        Ok(FieldResponse { grid: self.grid, x_c, p_c })
    }
}

/// Classical displacement and momentum driven by the pulse.
#[derive(Debug, Clone)]
pub struct FieldResponse {
    pub grid: TimeGrid,
    pub x_c: Vec<f64>,
    pub p_c: Vec<f64>,
}

impl FieldResponse {
    /// `(E+, E-)` with `x_c = -G+ E+` and `p_c = -E- - G+' E+`.
    pub fn field_projections(&self, table: &GreensTable, k: usize) -> Result<(f64, f64)> {
        let g = table.g[k];
        if g.abs() < 1e-12 {
            return Err(Error::NearZeroDenominator { t: self.grid.t(k), value: g });
        }
        let e_plus = -self.x_c[k] / g;
        Ok((e_plus, -self.p_c[k] - table.g_dot[k] * e_plus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undamped_residues_give_sine() {
        let r = ResidueForm::drude(0.0, 1.0).unwrap();
        for t in [0.0, 0.3, 7.0, 40.0] {
            assert!((r.g(t) - t.sin()).abs() < 1e-13);
            assert!((r.g_dot(t) - t.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn residue_initial_conditions() {
        for (g, wd) in [(0.05, 1.0), (0.3, 100.0), (0.02, 10.0)] {
            let r = ResidueForm::drude(g, wd).unwrap();
            assert!(r.g(0.0).abs() < 1e-12);
            assert!((r.g_dot(0.0) - 1.0).abs() < 1e-12);
            assert!(r.g_ddot(0.0).abs() < 1e-10);
        }
    }

    #[test]
    fn critical_damping_is_reported() {
        // (z + 2)^2 (z + 4/3) = z^3 + (16/3) z^2 + (1 + gamma wd) z + 16/3 with gamma = 25/16
        assert!(matches!(ResidueForm::drude(25.0 / 16.0, 16.0 / 3.0), Err(Error::RootFindingFailed(_))));
    }

    #[test]
    fn volterra_reproduces_sine() {
        let m = SpectralDensity::OhmicDrude { gamma: 0.0, omega_d: 1.0 };
        let (g, gd, gdd) = volterra_green(&m, 0.01, 2001);
        for k in [0usize, 5, 100, 2000] {
            let t = k as f64 * 0.01;
            assert!((g[k] - t.sin()).abs() < 5e-9, "k={k}: {}", g[k] - t.sin());
            assert!((gd[k] - t.cos()).abs() < 5e-9);
            assert!((gdd[k] + t.sin()).abs() < 5e-9);
        }
    }

    #[test]
    fn out_of_grid_is_error() {
        let m = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 };
        let tab = GreensTable::new(&m, 40.0, TimeGrid::new(0.01, 101).unwrap()).unwrap();
        assert!(matches!(tab.antisymmetric_corr(1.5), Err(Error::OutOfGrid { .. })));
    }
}
