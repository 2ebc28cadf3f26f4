//! Equilibrium of the oscillator strongly coupled to the bath: Matsubara second moments,
//! the reduced (non-Boltzmann) stationary state and its Fock-basis projection.

use crate::bath::SpectralDensity;
use crate::error::{Error, Result};
use crate::gaussian::{hermite_coefficients, CMatrix};
use crate::greens::laplace_green;
use crate::output::fmt17;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::io::Write;

/// Largest number of explicit Matsubara terms before giving up.
pub const MAX_MATSUBARA_TERMS: usize = 20_000_000;

/// Stationary `<q^2>` and `<p^2>` of the reduced oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub q2: f64,
    pub p2: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// `sum_{n > N} n^{-k}` by Euler-Maclaurin (accurate for `N >= 32`).
pub(crate) fn zeta_tail(k: f64, n: usize) -> f64 {
    let x = n as f64;
    x.powf(1.0 - k) / (k - 1.0) - 0.5 * x.powf(-k) + k * x.powf(-k - 1.0) / 12.0
        - k * (k + 1.0) * (k + 2.0) * x.powf(-k - 3.0) / 720.0
}

/// Number of explicit Matsubara terms used for a model at inverse temperature `beta`.
pub(crate) fn matsubara_cutoff(model: &SpectralDensity, beta: f64) -> Result<usize> {
    let nu1 = 2.0 * PI / beta;
    let scale = 50.0 * model.omega_d().max(1.0).max(model.kernel_at_zero());
    let n = ((scale / nu1).ceil() as usize).max(64);
    if n > MAX_MATSUBARA_TERMS {
        return Err(Error::SeriesNotConverged { partial: f64::NAN, tail_bound: f64::INFINITY });
    }
    Ok(n)
}

/// Matsubara sums
/// `<q^2> = (1/beta) sum_n 1/(nu_n^2 + |nu_n| gamma_hat(|nu_n|) + 1)` and
/// `<p^2> = (1/beta) sum_n (1 + |nu_n| gamma_hat)/(...)`, with the tail beyond the explicit
/// cutoff summed from the large-frequency expansion of `nu gamma_hat(nu)`.
pub fn second_moments(model: &SpectralDensity, beta: f64) -> Result<Moments> {
    model.validate()?;
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta must be finite and > 0, got {beta}")));
    }
    let mut n_terms = matsubara_cutoff(model, beta)?;
    loop {
        match moments_with_cutoff(model, beta, n_terms) {
            Err(Error::SeriesNotConverged { .. }) if 2 * n_terms <= MAX_MATSUBARA_TERMS => n_terms *= 2,
            r => return r,
        }
    }
}

fn moments_with_cutoff(model: &SpectralDensity, beta: f64, n_terms: usize) -> Result<Moments> {
    let nu1 = 2.0 * PI / beta;
    let mut sq = 0.0;
    let mut sp = 0.0;
    for n in (1..=n_terms).rev() {
        let nu = nu1 * n as f64;
        let gh = laplace_green(model, nu)?;
        let friction = 1.0 / gh - nu * nu - 1.0;
        sq += gh;
        sp += (1.0 + friction) * gh;
    }
    let [a0, a1, a2, a3, a4] = model.large_frequency_coefficients();
    let a = 1.0 + a0;
    let z = |k: f64| zeta_tail(k, n_terms) / nu1.powf(k);
    let q_last = (2.0 * a * a1 - a3) * z(7.0);
    let tail_q = z(2.0) - a * z(4.0) - a1 * z(5.0) + (a * a - a2) * z(6.0) + q_last;
    let p_last = (a.powi(3) - 2.0 * a * a2 - a1 * a1 + a4) * z(6.0);
    let tail_p = a * z(2.0) + a1 * z(3.0) + (a2 - a * a) * z(4.0) + (a3 - 2.0 * a * a1) * z(5.0) + p_last;
    // next omitted order is smaller than the last retained one by about (wd + A) / nu_N
    let ratio = (model.omega_d() + a) / (nu1 * n_terms as f64);
    let tail_bound = 2.0 / beta * q_last.abs().max(p_last.abs()) * ratio;
    let q2 = (1.0 + 2.0 * (sq + tail_q)) / beta;
    let p2 = (1.0 + 2.0 * (sp + tail_p)) / beta;
    if tail_bound > 1e-10 * q2.min(p2) {
        return Err(Error::SeriesNotConverged { partial: q2, tail_bound });
    }
    Ok(Moments { q2, p2, terms: n_terms, tail_bound })
}

/// Effective harmonic Hamiltonian whose Gibbs state reproduces given moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHamiltonian {
    pub m_eff: f64,
    pub omega_eff: f64,
}

/// `omega_eff = (2/beta) arccoth(2 sqrt(q2 p2))`, `m_eff = sqrt(p2/q2) / omega_eff`.
pub fn effective_hamiltonian(q2: f64, p2: f64, beta: f64) -> Result<EffectiveHamiltonian> {
    let x = 2.0 * (q2 * p2).sqrt();
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::DomainError(format!("uncertainty product 2 sqrt(<q2><p2>) = {x} must exceed 1")));
    }
    let omega_eff = ((x + 1.0) / (x - 1.0)).ln() / beta;
    Ok(EffectiveHamiltonian { m_eff: (p2 / q2).sqrt() / omega_eff, omega_eff })
}

/// Truncated Fock-basis density matrix with the population lost to truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub rho: CMatrix,
    pub leakage: f64,
}

impl DensityMatrix {
    pub fn from_matrix(rho: CMatrix) -> Self {
        let tr = rho.trace().re;
        Self { rho, leakage: 1.0 - tr }
    }

    /// Highest retained Fock index.
    pub fn n_max(&self) -> usize {
        self.rho.nrows() - 1
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.rho[(n, m)]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        flush_tiny(h).symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `(1/2) || rho - sigma ||_1` on the common truncated space.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let d = self.rho.nrows().min(other.rho.nrows());
        let diff = self.rho.view((0, 0), (d, d)) - other.rho.view((0, 0), (d, d));
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        0.5 * flush_tiny(h).symmetric_eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Real diagonal populations.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|n| self.rho[(n, n)].re).collect()
    }
}

/// Zero entries far below the largest one; the eigen-solver breaks down on subnormals.
fn flush_tiny(mut h: CMatrix) -> CMatrix {
    let cut = 1e-60 * h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    h.iter_mut().filter(|z| z.norm() < cut).for_each(|z| *z = Complex64::new(0.0, 0.0));
    h
}

/// Fock projection of the Gaussian state with variances `(q2, p2)` and means `(q, p)`.
///
/// Not renormalized: `trace = 1 - leakage`.
pub fn gaussian_state(q2: f64, p2: f64, mean_q: f64, mean_p: f64, n_max: usize) -> Result<DensityMatrix> {
    if !(q2 > 0.0 && p2 > 0.0) || q2 * p2 < 0.25 * (1.0 - 1e-12) {
        return Err(Error::DomainError(format!("moments (q2 = {q2}, p2 = {p2}) violate q2 p2 >= 1/4")));
    }
    let ar = 1.0 + 0.5 / q2;
    let ad = 0.25 + 0.5 * p2;
    let pref = (2.0 * PI * q2).sqrt().recip() * (1.0 / ar).sqrt() * (PI / ad).sqrt();
    let c0 = -mean_q * mean_q / (2.0 * q2) + mean_q * mean_q / (4.0 * ar * q2 * q2) - mean_p * mean_p / (4.0 * ad);
    let lin_r = SQRT_2 * mean_q / (2.0 * ar * q2);
    let lin_d = Complex64::new(0.0, SQRT_2 * mean_p / (4.0 * ad));
    let g = [lin_r + lin_d, lin_r - lin_d];
    let h11 = 1.0 / ar + 0.25 / ad - 1.0;
    let h12 = 1.0 / ar - 0.25 / ad;
    let h = CMatrix::from_row_slice(2, 2, &[h11.into(), h12.into(), h12.into(), h11.into()]);
    let dim = n_max + 1;
    let d = hermite_coefficients(&g, &h, &[dim, dim]);
    let scale = pref * c0.exp();
    let rho = CMatrix::from_fn(dim, dim, |n, m| d[n * dim + m] * scale);
    Ok(DensityMatrix::from_matrix(rho))
}

/// Reduced stationary state in the Fock basis, with leakage at most `1e-6`.
pub fn stationary_state(q2: f64, p2: f64, n_max: usize) -> Result<DensityMatrix> {
    if n_max < 4 {
        return Err(Error::InvalidParameter(format!("n_max must be >= 4, got {n_max}")));
    }
    let rho = gaussian_state(q2, p2, 0.0, 0.0, n_max)?;
    if rho.leakage > 1e-6 {
        return Err(Error::TruncationTooSmall { leakage: rho.leakage, n_max });
    }
    Ok(rho)
}

/// Canonical Gibbs state of the bare oscillator.
pub fn canonical_state(beta: f64, n_max: usize) -> DensityMatrix {
    let x = (-beta).exp();
    let rho = CMatrix::from_fn(n_max + 1, n_max + 1, |n, m| {
        if n == m {
            Complex64::new((1.0 - x) * x.powi(n as i32), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DensityMatrix::from_matrix(rho)
}

/// Uhlmann fidelity between centred Gaussian states with diagonal covariances.
pub fn gaussian_fidelity(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (v1q, v1p) = (2.0 * a.0, 2.0 * a.1);
    let (v2q, v2p) = (2.0 * b.0, 2.0 * b.1);
    let big = (v1q + v2q) * (v1p + v2p);
    let small = (v1q * v1p - 1.0) * (v2q * v2p - 1.0);
    2.0 / ((big + small).sqrt() - small.sqrt())
}

/// Coherence `<0|rho_beta|2>` over a (gamma, temperature) grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoherenceScan {
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
    /// `values[i][j]` for `gammas[i]`, `temperatures[j]`; `None` marks a failed cell.
    pub values: Vec<Vec<Option<f64>>>,
    pub failures: Vec<String>,
}

pub fn coherence_scan(family: &SpectralDensity, gammas: &[f64], temperatures: &[f64], n_max: usize) -> CoherenceScan {
    let cells: Vec<(usize, usize)> =
        (0..gammas.len()).flat_map(|i| (0..temperatures.len()).map(move |j| (i, j))).collect();
    let results: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let model = family.with_gamma(gammas[i]);
            let m = second_moments(&model, 1.0 / temperatures[j])?;
            Ok(stationary_state(m.q2, m.p2, n_max)?.get(0, 2).re)
        })
        .collect();
    let mut values = vec![vec![None; temperatures.len()]; gammas.len()];
    let mut failures = Vec::new();
    for (&(i, j), r) in cells.iter().zip(results) {
        match r {
            Ok(v) => values[i][j] = Some(v),
            Err(e) => failures.push(format!("gamma = {}, T = {}: {e}", gammas[i], temperatures[j])),
        }
    }
    CoherenceScan { gammas: gammas.to_vec(), temperatures: temperatures.to_vec(), values, failures }
}

impl CoherenceScan {
    /// CSV with columns `gamma,T,coh02`; failed cells are written as `nan`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,T,coh02")?;
        for (i, g) in self.gammas.iter().enumerate() {
            for (j, t) in self.temperatures.iter().enumerate() {
                match self.values[i][j] {
                    Some(v) => writeln!(w, "{},{},{}", fmt17(*g), fmt17(*t), fmt17(v))?,
                    None => writeln!(w, "{},{},nan", fmt17(*g), fmt17(*t))?,
                }
            }
        }
        Ok(())
    }
}

/// Real symmetric matrix of the effective Hamiltonian in a truncated bare Fock basis.
pub fn effective_hamiltonian_matrix(h: &EffectiveHamiltonian, dim: usize) -> DMatrix<f64> {
    // q = (a + a^dag)/sqrt2, p = i (a^dag - a)/sqrt2
    let mut q2m = DMatrix::zeros(dim, dim);
    let mut p2m = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        let nf = n as f64;
        q2m[(n, n)] = nf + 0.5;
        p2m[(n, n)] = nf + 0.5;
        if n + 2 < dim {
            let v = 0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt();
            q2m[(n, n + 2)] = v;
            q2m[(n + 2, n)] = v;
            p2m[(n, n + 2)] = -v;
            p2m[(n + 2, n)] = -v;
        }
    }
    p2m / (2.0 * h.m_eff) + q2m * (0.5 * h.m_eff * h.omega_eff * h.omega_eff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drude(gamma: f64) -> SpectralDensity {
        SpectralDensity::OhmicDrude { gamma, omega_d: 1.0 }
    }

    #[test]
    fn zero_coupling_moments_are_canonical() {
        for beta in [0.5, 2.0, 40.0] {
            let m = second_moments(&drude(0.0), beta).unwrap();
            let c = 0.5 / (0.5 * beta).tanh();
            assert!((m.q2 - c).abs() < 1e-12 * c, "beta {beta}: {} vs {c}", m.q2);
            assert!((m.p2 - c).abs() < 1e-12 * c);
        }
    }

    #[test]
    fn effective_hamiltonian_reduces_to_bare_oscillator() {
        let c = 0.5 / (1.0f64).tanh();
        let h = effective_hamiltonian(c, c, 2.0).unwrap();
        assert!((h.m_eff - 1.0).abs() < 1e-12 && (h.omega_eff - 1.0).abs() < 1e-12);
        assert!(effective_hamiltonian(0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn vacuum_projection() {
        let rho = gaussian_state(0.5, 0.5, 0.0, 0.0, 6).unwrap();
        assert!((rho.get(0, 0).re - 1.0).abs() < 1e-14);
        assert!(rho.leakage.abs() < 1e-14);
    }

    #[test]
    fn coherent_state_projection() {
        let (q, p) = (0.3, -0.2);
        let alpha = Complex64::new(q, p) / SQRT_2;
        let rho = gaussian_state(0.5, 0.5, q, p, 8).unwrap();
        let mut fact = 1.0;
        let amp: Vec<Complex64> = (0..9)
            .map(|n| {
                if n > 0 {
                    fact *= n as f64;
                }
                (-0.5 * alpha.norm_sqr()).exp() * alpha.powu(n as u32) / fact.sqrt()
            })
            .collect();
        for n in 0..9 {
            for m in 0..9 {
                assert!((rho.get(n, m) - amp[n] * amp[m].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn truncation_error_reported() {
        assert!(matches!(stationary_state(20.0, 20.0, 6), Err(Error::TruncationTooSmall { .. })));
        assert!(stationary_state(0.5, 0.5, 3).is_err());
    }

    #[test]
    fn fidelity_of_identical_thermal_states_is_one() {
        assert!((gaussian_fidelity((3.0, 3.0), (3.0, 3.0)) - 1.0).abs() < 1e-12);
        assert!(gaussian_fidelity((0.5, 0.5), (0.6, 0.55)) < 1.0);
    }

    #[test]
    fn zeta_tail_accuracy() {
        let exact: f64 = (65..2_000_000).map(|n| (n as f64).powi(-4)).sum::<f64>();
        assert!((zeta_tail(4.0, 64) - exact).abs() < 1e-15);
    }
}
