//! Structural invariants of the propagating function, shared by scenario runs, the `check`
//! command and the acceptance suite.

use crate::bath::SpectralDensity;
use crate::dynamics::{propagate_at, PropagatorSet};
use crate::equilibrium::stationary_state;
use crate::error::Result;
use crate::gaussian::hermite_coefficients;
use crate::greens::GreensTable;
use crate::grid::TimeGrid;
use crate::propagator::{KernelForm, KernelInputs, Propagator};
use crate::pulse::PulseParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, passed: value >= tolerance }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

/// Largest `|J_{nm;nu mu}(0) - delta_{n nu} delta_{m mu}|` from the kernel built on the
/// exact `t = 0` data `G+ = 0, G+' = 1, S = <q^2>, S' = 0`.
pub fn identity_deviation(q2: f64, p2: f64, dim: usize) -> Result<f64> {
    let form = KernelForm::new(KernelInputs { q2, p2, g: 0.0, g_dot: 1.0, s: q2, s_dot: 0.0 })?;
    let (j0, g, h) = form.hermite_data(0.0, 0.0);
    let dims = [dim; 4];
    let c = hermite_coefficients(&g, &h, &dims);
    let mut err = 0.0f64;
    for n in 0..dim {
        for m in 0..dim {
            for nu in 0..dim {
                for mu in 0..dim {
                    let v = c[((n * dim + m) * dim + nu) * dim + mu] * j0;
                    let e = if n == nu && m == mu { 1.0 } else { 0.0 };
                    err = err.max((v - e).norm());
                }
            }
        }
    }
    Ok(err)
}

/// Structural suite for one bath and pulse on `grid`, sampled at `samples`.
pub fn structural_suite(
    model: &SpectralDensity,
    beta: f64,
    pulse: &PulseParams,
    grid: TimeGrid,
    n_max: usize,
    samples: &[usize],
) -> Result<Vec<CheckResult>> {
    let table = GreensTable::new(model, beta, grid)?;
    propagator_checks(&table, Some(pulse), n_max, samples)
}

/// Checks on an existing table: the `t = 0` identity and the table's values there,
/// conjugation symmetry, parity zeros of the field-free kernel, trace preservation,
/// positivity and stationarity of the reduced equilibrium state.
pub fn propagator_checks(
    table: &GreensTable,
    pulse: Option<&PulseParams>,
    n_max: usize,
    samples: &[usize],
) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        CheckResult::at_most("identity at t = 0", identity_deviation(table.q2, table.p2, 5)?, 1e-10),
        CheckResult::at_most("S(0) = <q^2>", (table.s[0] - table.q2).abs(), 1e-9),
        CheckResult::at_most("S'(0) = 0", table.s_dot[0].abs(), 1e-9),
    ];

    let free = Propagator::free(table);
    let driven = match pulse {
        Some(p) => Propagator::new(table, p)?,
        None => free.clone(),
    };
    let d = 6;
    let (mut herm, mut parity) = (0.0f64, 0.0f64);
    for &k in samples {
        let t = driven.tensor(k, [d; 4])?;
        let f = free.tensor(k, [d; 4])?;
        for n in 0..d {
            for m in 0..d {
                for nu in 0..d {
                    for mu in 0..d {
                        herm = herm.max((t.get(n, m, nu, mu) - t.get(m, n, mu, nu).conj()).norm());
                        if (n + m + nu + mu) % 2 == 1 {
                            parity = parity.max(f.get(n, m, nu, mu).norm());
                        }
                    }
                }
            }
        }
    }
    out.push(CheckResult::at_most("conjugation symmetry", herm, 1e-12));
    out.push(CheckResult::at_most("parity zeros", parity, 1e-12));

    let init = stationary_state(table.q2, table.p2, n_max)?;
    let traj = propagate_at(&init, &PropagatorSet::covering(driven, &init), samples)?;
    out.push(CheckResult::at_most("trace preservation", traj.report.max_trace_drift, 1e-6));
    out.push(CheckResult::at_least("positivity", traj.report.min_eigenvalue, -1e-8));
    out.push(CheckResult::at_most("hermiticity", traj.report.max_hermiticity_error, 1e-10));

    let still = propagate_at(&init, &PropagatorSet::covering(free, &init), samples)?;
    let drift = still.states.iter().map(|s| s.trace_distance(&init)).fold(0.0, f64::max);
    out.push(CheckResult::at_most("stationarity without field", drift, 1e-8));
    Ok(out)
}

/// Largest change of `J_{nm;nu mu}` at common times when the grid step is halved.
pub fn grid_halving(
    model: &SpectralDensity,
    beta: f64,
    pulse: &PulseParams,
    dt: f64,
    t_end: f64,
    dim: usize,
) -> Result<f64> {
    let coarse = GreensTable::new(model, beta, TimeGrid::covering(t_end, dt)?)?;
    let fine = GreensTable::new(model, beta, TimeGrid::covering(t_end, 0.5 * dt)?)?;
    let pc = Propagator::new(&coarse, pulse)?;
    let pf = Propagator::new(&fine, pulse)?;
    let mut err = 0.0f64;
    let stride = (coarse.grid.len / 20).max(1);
    for k in (0..coarse.grid.len).step_by(stride) {
        let a = pc.tensor(k, [dim; 4])?;
        let b = pf.tensor(2 * k, [dim; 4])?;
        err = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm()).fold(err, f64::max);
    }
    Ok(err)
}

/// Default suite used by the `check` command: Fig. 4 style Ohmic bath and a sub-Ohmic bath.
pub fn default_suite() -> Result<Vec<CheckResult>> {
    let pulse = PulseParams::new(1.0, 10.0, 10.0, 4.0, 2.5)?.with_spectral_ratio(0.003415)?;
    let grid = TimeGrid::covering(30.0, 0.01)?;
    let samples: Vec<usize> = (0..grid.len).step_by(100).collect();
    let mut out = Vec::new();
    let baths = [
        ("ohmic", SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 }),
        ("sub-ohmic", SpectralDensity::SubOhmic { gamma: 0.05, omega_ph: 1.0, omega_d: 1.0, s: 0.1 }),
    ];
    for (tag, model) in baths {
        for mut r in structural_suite(&model, 40.0, &pulse, grid, 12, &samples)? {
            r.name = format!("{tag}: {}", r.name);
            out.push(r);
        }
        let conv = grid_halving(&model, 40.0, &pulse, 0.01, 30.0, 4)?;
        out.push(CheckResult::at_most(&format!("{tag}: grid halving"), conv, 1e-8));
    }
    Ok(out)
}
