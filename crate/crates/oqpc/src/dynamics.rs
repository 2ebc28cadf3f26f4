//! Density-matrix trajectories `rho_nm(t) = sum J_{nm;nu mu}(t) rho_{nu mu}(0)`, diagonal
//! observables and the `+chi / -chi` phase contrast.

use crate::equilibrium::{stationary_state, DensityMatrix};
use crate::error::{Error, Result};
use crate::gaussian::CMatrix;
use crate::greens::GreensTable;
use crate::output::fmt17;
use crate::propagator::{ElementTensor, Propagator};
use crate::pulse::PulseParams;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Initial elements below this magnitude are not propagated.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
/// Initial elements above this magnitude are recorded as contributing.
pub const CONTRIBUTION_THRESHOLD: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-6;
pub const POSITIVITY_TOLERANCE: f64 = -1e-8;
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// The initial pairs `(nu, mu)` a propagator has to supply, plus the output truncation.
#[derive(Debug, Clone)]
pub struct PropagatorSet<'a> {
    pub propagator: Propagator<'a>,
    pub n_max: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl<'a> PropagatorSet<'a> {
    pub fn new(propagator: Propagator<'a>, n_max: usize, pairs: Vec<(usize, usize)>) -> Self {
        Self { propagator, n_max, pairs }
    }

    /// Pairs carrying weight in `initial`; odd pairs of parity-symmetric states drop out here.
    pub fn covering(propagator: Propagator<'a>, initial: &DensityMatrix) -> Self {
        let d = initial.rho.nrows();
        let pairs = (0..d)
            .flat_map(|nu| (0..d).map(move |mu| (nu, mu)))
            .filter(|&(nu, mu)| initial.get(nu, mu).norm() > PRUNE_THRESHOLD)
            .collect();
        Self::new(propagator, d - 1, pairs)
    }

    fn input_dims(&self) -> [usize; 2] {
        let nu = self.pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let mu = self.pairs.iter().map(|p| p.1).max().unwrap_or(0);
        [nu + 1, mu + 1]
    }

    /// Element tensor at grid index `k`, restricted to the set's input range.
    pub fn elements_at(&self, k: usize) -> Result<ElementTensor> {
        let [a, b] = self.input_dims();
        let d = self.n_max + 1;
        self.propagator.tensor(k, [d, d, a, b])
    }

    fn require(&self, initial: &DensityMatrix) -> Result<()> {
        let d = initial.rho.nrows();
        for nu in 0..d {
            for mu in 0..d {
                if initial.get(nu, mu).norm() > PRUNE_THRESHOLD && !self.pairs.contains(&(nu, mu)) {
                    return Err(Error::MissingElement(nu, mu));
                }
            }
        }
        Ok(())
    }
}

/// Worst invariant values seen along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.max_trace_drift <= TRACE_TOLERANCE
            && self.max_hermiticity_error <= HERMITICITY_TOLERANCE
            && self.min_eigenvalue >= POSITIVITY_TOLERANCE
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Initial elements above the contribution threshold.
    pub contributing: Vec<(usize, usize)>,
    pub report: InvariantReport,
}

fn contract(tensor: &ElementTensor, set: &PropagatorSet, initial: &DensityMatrix) -> DensityMatrix {
    let d = set.n_max + 1;
    let mut rho = CMatrix::zeros(d, d);
    for &(nu, mu) in &set.pairs {
        let w = initial.get(nu, mu);
        for n in 0..d {
            for m in 0..d {
                rho[(n, m)] += tensor.get(n, m, nu, mu) * w;
            }
        }
    }
    DensityMatrix::from_matrix(rho)
}

/// Evolve `initial` over the whole grid of the set's table.
pub fn evolve(initial: &DensityMatrix, set: &PropagatorSet) -> Result<Trajectory> {
    let idx: Vec<usize> = (0..set.propagator.table.grid.len).collect();
    evolve_at(initial, set, &idx)
}

/// Evolve `initial` at selected grid indices; fails if any invariant is violated.
pub fn evolve_at(initial: &DensityMatrix, set: &PropagatorSet, indices: &[usize]) -> Result<Trajectory> {
    let traj = propagate_at(initial, set, indices)?;
    let r = traj.report;
    if !r.passed() {
        return Err(Error::InvariantViolation(format!(
            "trace drift {:.3e}, hermiticity error {:.3e}, smallest eigenvalue {:.3e}",
            r.max_trace_drift, r.max_hermiticity_error, r.min_eigenvalue
        )));
    }
    Ok(traj)
}

/// Evolve without enforcing the invariants; the report records the worst values.
pub fn propagate_at(initial: &DensityMatrix, set: &PropagatorSet, indices: &[usize]) -> Result<Trajectory> {
    set.require(initial)?;
    if initial.rho.nrows() != set.n_max + 1 {
        return Err(Error::InvalidParameter(format!(
            "initial state dimension {} does not match n_max = {}",
            initial.rho.nrows(),
            set.n_max
        )));
    }
    let grid = set.propagator.table.grid;
    let tr0 = initial.trace().re;
    let states: Vec<DensityMatrix> =
        indices.par_iter().map(|&k| Ok(contract(&set.elements_at(k)?, set, initial))).collect::<Result<_>>()?;
    let worst = states
        .par_iter()
        .map(|s| InvariantReport {
            max_trace_drift: (s.trace().re - tr0).abs(),
            max_hermiticity_error: s.hermiticity_error(),
            min_eigenvalue: s.min_eigenvalue(),
        })
        .reduce(
            || InvariantReport { max_trace_drift: 0.0, max_hermiticity_error: 0.0, min_eigenvalue: f64::INFINITY },
            |a, b| InvariantReport {
                max_trace_drift: a.max_trace_drift.max(b.max_trace_drift),
                max_hermiticity_error: a.max_hermiticity_error.max(b.max_hermiticity_error),
                min_eigenvalue: a.min_eigenvalue.min(b.min_eigenvalue),
            },
        );
    let contributing =
        set.pairs.iter().copied().filter(|&(a, b)| initial.get(a, b).norm() > CONTRIBUTION_THRESHOLD).collect();
    Ok(Trajectory { times: indices.iter().map(|&k| grid.t(k)).collect(), states, contributing, report: worst })
}

/// `sum_n o_n rho_nn(t)` at every stored time.
pub fn expectation(traj: &Trajectory, weights: &[f64]) -> Result<Vec<f64>> {
    let dim = traj.states.first().map_or(0, |s| s.rho.nrows());
    if weights.len() != dim {
        return Err(Error::InvalidParameter(format!("{} observable weights for dimension {dim}", weights.len())));
    }
    traj.states
        .iter()
        .zip(&traj.times)
        .map(|(s, &t)| {
            let v: Complex64 = weights.iter().enumerate().map(|(n, &o)| s.get(n, n) * o).sum();
            if v.im.abs() > 1e-10 {
                return Err(Error::InvariantViolation(format!("imaginary expectation {:.3e} at t = {t}", v.im)));
            }
            Ok(v.re)
        })
        .collect()
}

/// Write `t, rho_{n,m}_re, rho_{n,m}_im, ...` for the listed elements.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, elements: &[(usize, usize)], mut w: W) -> Result<()> {
    write!(w, "t")?;
    for (n, m) in elements {
        write!(w, ",rho_{n}_{m}_re,rho_{n}_{m}_im")?;
    }
    writeln!(w)?;
    for (s, t) in traj.states.iter().zip(&traj.times) {
        write!(w, "{}", fmt17(*t))?;
        for &(n, m) in elements {
            let z = s.get(n, m);
            write!(w, ",{},{}", fmt17(z.re), fmt17(z.im))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Preparation of the system at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    /// Reduced equilibrium state of the coupled oscillator.
    Stationary,
    /// Diagonal state with the given populations.
    Populations { populations: Vec<f64> },
    /// `(|0> + |1>)(<0| + <1|) / 2`.
    Superposition,
}

impl InitialState {
    pub fn build(&self, table: &GreensTable, n_max: usize) -> Result<DensityMatrix> {
        let d = n_max + 1;
        match self {
            InitialState::Stationary => stationary_state(table.q2, table.p2, n_max),
            InitialState::Populations { populations } => {
                if populations.len() > d || populations.iter().any(|&p| p < 0.0) {
                    return Err(Error::InvalidParameter(format!("populations {populations:?} for n_max = {n_max}")));
                }
                let mut rho = CMatrix::zeros(d, d);
                for (n, &p) in populations.iter().enumerate() {
                    rho[(n, n)] = p.into();
                }
                Ok(DensityMatrix::from_matrix(rho))
            }
            InitialState::Superposition => {
                let mut rho = CMatrix::zeros(d, d);
                for n in 0..2 {
                    for m in 0..2 {
                        rho[(n, m)] = 0.5.into();
                    }
                }
                Ok(DensityMatrix::from_matrix(rho))
            }
        }
    }
}

/// Diagonal observable commuting with the bare Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Population { level: usize },
    Number,
    Diagonal { weights: Vec<f64> },
}

impl Observable {
    pub fn weights(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            Observable::Population { level } if *level < dim => {
                Ok((0..dim).map(|n| if n == *level { 1.0 } else { 0.0 }).collect())
            }
            Observable::Population { level } => {
                Err(Error::InvalidParameter(format!("population of level {level} outside dimension {dim}")))
            }
            Observable::Number => Ok((0..dim).map(|n| n as f64).collect()),
            Observable::Diagonal { weights } => Ok(weights.clone()),
        }
    }

    pub fn id(&self) -> String {
        match self {
            Observable::Population { level } => format!("p{level}"),
            Observable::Number => "n".into(),
            Observable::Diagonal { .. } => "diag".into(),
        }
    }
}

/// Difference of an observable between the `+chi` and `-chi` pulses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseContrast {
    pub times: Vec<f64>,
    pub delta: Vec<f64>,
    pub observable: String,
    /// Start of the post-pulse window, `t0 + dt_pulse`.
    pub pulse_end: f64,
    pub post_pulse_max: f64,
    /// Time after which `|delta|` stays below a tenth of its post-pulse maximum.
    pub decay_time: Option<f64>,
}

impl PhaseContrast {
    pub fn new(times: Vec<f64>, delta: Vec<f64>, observable: String, pulse_end: f64) -> Self {
        let post = || times.iter().zip(&delta).filter(|(t, _)| **t > pulse_end);
        let post_pulse_max = post().map(|(_, d)| d.abs()).fold(0.0, f64::max);
        let last_above = post().filter(|(_, d)| d.abs() >= 0.1 * post_pulse_max).map(|(t, _)| *t).next_back();
        let decay_time = match (last_above, times.last()) {
            (Some(t), Some(&end)) if t < end && post_pulse_max > 0.0 => Some(t),
            _ => None,
        };
        Self { times, delta, observable, pulse_end, post_pulse_max, decay_time }
    }

    /// Largest `|delta|` inside `[t_a, t_b]`.
    pub fn window_max(&self, t_a: f64, t_b: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.delta)
            .filter(|(t, _)| **t >= t_a && **t <= t_b)
            .map(|(_, d)| d.abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,delta")?;
        for (t, d) in self.times.iter().zip(&self.delta) {
            writeln!(w, "{},{}", fmt17(*t), fmt17(*d))?;
        }
        Ok(())
    }
}

/// Trajectories for `+chi` and `-chi` with everything else fixed.
pub fn chirp_pair(
    table: &GreensTable,
    pulse: &PulseParams,
    initial: &DensityMatrix,
    indices: &[usize],
) -> Result<(Trajectory, Trajectory)> {
    if !(pulse.chirp > 0.0) {
        return Err(Error::InvalidParameter(format!("phase contrast needs chirp > 0, got {}", pulse.chirp)));
    }
    let run = |p: &PulseParams| -> Result<Trajectory> {
        let set = PropagatorSet::covering(Propagator::new(table, p)?, initial);
        evolve_at(initial, &set, indices)
    };
    let mirrored = pulse.mirrored();
    let (a, b) = rayon::join(|| run(pulse), || run(&mirrored));
    Ok((a?, b?))
}

pub fn phase_contrast(
    table: &GreensTable,
    pulse: &PulseParams,
    initial: &DensityMatrix,
    observable: &Observable,
    indices: &[usize],
) -> Result<PhaseContrast> {
    let (plus, minus) = chirp_pair(table, pulse, initial, indices)?;
    contrast_of(&plus, &minus, observable, pulse.t0 + pulse.delta_t)
}

pub fn contrast_of(
    plus: &Trajectory,
    minus: &Trajectory,
    observable: &Observable,
    pulse_end: f64,
) -> Result<PhaseContrast> {
    let w = observable.weights(plus.states[0].rho.nrows())?;
    let a = expectation(plus, &w)?;
    let b = expectation(minus, &w)?;
    let delta = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Ok(PhaseContrast::new(plus.times.clone(), delta, observable.id(), pulse_end))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contrast_summary() {
        let times: Vec<f64> = (0..100).map(|k| k as f64 * 0.1).collect();
        let delta: Vec<f64> = times.iter().map(|&t| if t > 2.0 { (-(t - 2.0)).exp() * 1e-3 } else { 0.0 }).collect();
        let c = PhaseContrast::new(times, delta, "p0".into(), 2.0);
        assert!((c.post_pulse_max - 1e-3 * (-0.1f64).exp()).abs() < 1e-12);
        let td = c.decay_time.unwrap();
        assert!(td > 4.3 && td < 4.5, "{td}");
    }

    #[test]
    fn observable_weights() {
        assert_eq!(Observable::Population { level: 1 }.weights(3).unwrap(), vec![0.0, 1.0, 0.0]);
        assert_eq!(Observable::Number.weights(3).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(Observable::Population { level: 5 }.weights(3).is_err());
    }
}
