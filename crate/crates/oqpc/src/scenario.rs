//! Runs one `ScenarioConfig` end to end and writes its artifacts.
//!
//! Files written into the output directory:
//! `greens.csv`, `trajectory_<tag>.csv`, `observables_<tag>.csv`, `elements_<tag>.csv`,
//! `contrast_<observable>.csv` (contrast mode), `coherence_scan.csv` (scan mode) and
//! `summary.json`. Tags are `field` or `free` for single runs and `plus` / `minus` for the
//! two chirp signs.

use crate::checks::{all_passed, propagator_checks, CheckResult};
use crate::config::{RunMode, ScenarioConfig};
use crate::dynamics::{
    contrast_of, expectation, propagate_at, write_trajectory_csv, InvariantReport, PropagatorSet, Trajectory,
};
use crate::equilibrium::{coherence_scan, second_moments, stationary_state};
use crate::error::Result;
use crate::greens::GreensTable;
use crate::grid::TimeGrid;
use crate::output::{fmt17, write_json};
use crate::propagator::Propagator;
use crate::pulse::PulseParams;
use rayon::prelude::*;
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Length of the late window used for the oscillation amplitude.
pub const LATE_WINDOW: f64 = 20.0;
/// Time between structural-check samples.
const CHECK_SPACING: f64 = 1.0;

#[derive(Debug, Clone, Serialize)]
pub struct Moments {
    pub q2: f64,
    pub p2: f64,
    pub rho_00: f64,
    pub rho_11: f64,
    pub rho_02: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub tag: String,
    pub chirp: Option<f64>,
    pub report: InvariantReport,
    pub final_populations: Vec<f64>,
    /// Half the peak-to-peak spread of the detrended ground population over the late window.
    pub late_oscillation_amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContrastSummary {
    pub observable: String,
    /// Maximum `|delta|` for `t > t0 + delta_t`.
    pub post_pulse_max: f64,
    /// Maximum `|delta|` once the pulse support has ended.
    pub after_pulse_max: f64,
    pub decay_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSummary {
    pub cells: usize,
    pub failures: Vec<String>,
    pub min_coh02: f64,
    pub max_coh02: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub label: String,
    pub config: ScenarioConfig,
    /// Canonical config document; parsing it reproduces the run.
    pub config_text: String,
    pub pulse: Option<PulseParams>,
    pub moments: Option<Moments>,
    pub runs: Vec<RunSummary>,
    pub contrasts: Vec<ContrastSummary>,
    pub scan: Option<ScanSummary>,
    pub invariants: Vec<CheckResult>,
    pub passed: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Detrended half peak-to-peak of `y` over `t >= t_end - LATE_WINDOW`.
pub fn late_oscillation_amplitude(times: &[f64], y: &[f64]) -> f64 {
    let t_end = times.last().copied().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> =
        times.iter().zip(y).filter(|(t, _)| **t >= t_end - LATE_WINDOW).map(|(t, v)| (*t, *v)).collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mt) * (p.1 - my), a.1 + (p.0 - mt).powi(2)));
    let slope = sxy / sxx;
    let r: Vec<f64> = pts.iter().map(|p| p.1 - my - slope * (p.0 - mt)).collect();
    let hi = r.iter().copied().fold(f64::MIN, f64::max);
    let lo = r.iter().copied().fold(f64::MAX, f64::min);
    0.5 * (hi - lo)
}

fn write_elements(prop: &Propagator, elements: &[[usize; 4]], path: &Path) -> Result<()> {
    let mut dims = [1usize; 4];
    for e in elements {
        for i in 0..4 {
            dims[i] = dims[i].max(e[i] + 1);
        }
    }
    let grid = prop.table.grid;
    let rows: Vec<String> = (0..grid.len)
        .into_par_iter()
        .map(|k| {
            let t = prop.tensor(k, dims)?;
            let mut row = fmt17(grid.t(k));
            for e in elements {
                let z = t.get(e[0], e[1], e[2], e[3]);
                row.push_str(&format!(",{},{}", fmt17(z.re), fmt17(z.im)));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut w = create(path)?;
    write!(w, "t")?;
    for e in elements {
        write!(w, ",J_{}_{}_{}_{}_re,J_{}_{}_{}_{}_im", e[0], e[1], e[2], e[3], e[0], e[1], e[2], e[3])?;
    }
    writeln!(w)?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    Ok(())
}

fn write_observables(cfg: &ScenarioConfig, traj: &Trajectory, path: &Path) -> Result<()> {
    let dim = cfg.n_max + 1;
    let series: Vec<Vec<f64>> =
        cfg.observables.iter().map(|o| expectation(traj, &o.weights(dim)?)).collect::<Result<_>>()?;
    let mut w = create(path)?;
    let ids: Vec<String> = cfg.observables.iter().map(|o| o.id()).collect();
    writeln!(w, "t,{}", ids.join(","))?;
    for (k, t) in traj.times.iter().enumerate() {
        let vals: Vec<String> = series.iter().map(|s| fmt17(s[k])).collect();
        writeln!(w, "{},{}", fmt17(*t), vals.join(","))?;
    }
    Ok(())
}

fn exported_elements(n_max: usize) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = (0..=n_max.min(3)).map(|n| (n, n)).collect();
    v.extend([(0, 1), (0, 2)].into_iter().filter(|&(_, m)| m <= n_max));
    v
}

fn run_summary(tag: &str, chirp: Option<f64>, traj: &Trajectory) -> RunSummary {
    let p0: Vec<f64> = traj.states.iter().map(|s| s.get(0, 0).re).collect();
    RunSummary {
        tag: tag.into(),
        chirp,
        report: traj.report,
        final_populations: traj.states.last().map(|s| s.populations()).unwrap_or_default(),
        late_oscillation_amplitude: late_oscillation_amplitude(&traj.times, &p0),
    }
}

fn trajectory_checks(tag: &str, r: &InvariantReport) -> Vec<CheckResult> {
    vec![
        CheckResult::at_most(&format!("{tag}: trace drift"), r.max_trace_drift, crate::dynamics::TRACE_TOLERANCE),
        CheckResult::at_most(
            &format!("{tag}: hermiticity"),
            r.max_hermiticity_error,
            crate::dynamics::HERMITICITY_TOLERANCE,
        ),
        CheckResult::at_least(&format!("{tag}: positivity"), r.min_eigenvalue, crate::dynamics::POSITIVITY_TOLERANCE),
    ]
}

/// Run `cfg` and write its artifacts into `out`. The returned summary's `passed` flag is
/// false when any invariant check failed; the files are written regardless.
pub fn run_scenario(cfg: &ScenarioConfig, out: &Path) -> Result<Summary> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let mut summary = Summary {
        label: cfg.label.clone(),
        config: cfg.clone(),
        config_text: cfg.to_text(),
        pulse: cfg.pulse.resolve()?,
        moments: None,
        runs: Vec::new(),
        contrasts: Vec::new(),
        scan: None,
        invariants: Vec::new(),
        passed: false,
    };
    if cfg.mode == RunMode::Scan {
        run_scan(cfg, out, &mut summary)?;
    } else {
        run_dynamics(cfg, out, &mut summary)?;
    }
    summary.passed = all_passed(&summary.invariants);
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn run_scan(cfg: &ScenarioConfig, out: &Path, summary: &mut Summary) -> Result<()> {
    let scan = coherence_scan(&cfg.bath, &cfg.gammas, &cfg.temperatures, cfg.n_max);
    scan.write_csv(create(&out.join("coherence_scan.csv"))?)?;
    let vals: Vec<f64> = scan.values.iter().flatten().flatten().copied().collect();
    summary.scan = Some(ScanSummary {
        cells: vals.len(),
        failures: scan.failures.clone(),
        min_coh02: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max_coh02: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    summary.invariants.push(CheckResult::at_most("failed scan cells", scan.failures.len() as f64, 0.0));
    // strongest coupling at the lowest temperature has the largest off-diagonal weight
    let g = cfg.gammas.iter().copied().fold(f64::MIN, f64::max);
    let t = cfg.temperatures.iter().copied().fold(f64::MAX, f64::min);
    let m = second_moments(&cfg.bath.with_gamma(g), 1.0 / t)?;
    let rho = stationary_state(m.q2, m.p2, cfg.n_max)?;
    let d = cfg.n_max + 1;
    let odd: f64 = (0..d)
        .flat_map(|n| (0..d).map(move |k| (n, k)))
        .filter(|(n, k)| (n + k) % 2 == 1)
        .map(|(n, k)| rho.get(n, k).norm())
        .sum();
    summary.invariants.push(CheckResult::at_most("parity of stationary state", odd, 1e-12));
    summary.invariants.push(CheckResult::at_least("positivity of stationary state", rho.min_eigenvalue(), -1e-10));
    Ok(())
}

fn run_dynamics(cfg: &ScenarioConfig, out: &Path, summary: &mut Summary) -> Result<()> {
    let grid = TimeGrid::covering(cfg.t_end, cfg.dt)?;
    let table = GreensTable::new(&cfg.bath, cfg.beta, grid)?;
    table.write_csv(create(&out.join("greens.csv"))?)?;
    let eq = stationary_state(table.q2, table.p2, cfg.n_max.max(4))?;
    summary.moments = Some(Moments {
        q2: table.q2,
        p2: table.p2,
        rho_00: eq.get(0, 0).re,
        rho_11: eq.get(1, 1).re,
        rho_02: eq.get(0, 2).re,
    });
    let initial = cfg.initial.build(&table, cfg.n_max)?;
    let pulse = summary.pulse;
    let runs: Vec<(String, Option<PulseParams>)> = match (cfg.mode, pulse) {
        (RunMode::Contrast, Some(p)) => vec![("plus".into(), Some(p)), ("minus".into(), Some(p.mirrored()))],
        (_, Some(p)) => vec![("field".into(), Some(p))],
        (_, None) => vec![("free".into(), None)],
    };
    let all: Vec<usize> = (0..grid.len).collect();
    let trajs: Vec<Trajectory> = runs
        .par_iter()
        .map(|(tag, p)| {
            let prop = match p {
                Some(p) => Propagator::new(&table, p)?,
                None => Propagator::free(&table),
            };
            write_elements(&prop, &cfg.elements, &out.join(format!("elements_{tag}.csv")))?;
            let set = PropagatorSet::covering(prop, &initial);
            let traj = propagate_at(&initial, &set, &all)?;
            write_trajectory_csv(
                &traj,
                &exported_elements(cfg.n_max),
                create(&out.join(format!("trajectory_{tag}.csv")))?,
            )?;
            write_observables(cfg, &traj, &out.join(format!("observables_{tag}.csv")))?;
            Ok(traj)
        })
        .collect::<Result<_>>()?;
    for ((tag, p), traj) in runs.iter().zip(&trajs) {
        summary.runs.push(run_summary(tag, p.map(|p| p.chirp), traj));
        summary.invariants.extend(trajectory_checks(tag, &traj.report));
    }
    if let (RunMode::Contrast, Some(p)) = (cfg.mode, pulse) {
        let support_end = p.support().1;
        for o in &cfg.observables {
            let c = contrast_of(&trajs[0], &trajs[1], o, p.t0 + p.delta_t)?;
            c.write_csv(create(&out.join(format!("contrast_{}.csv", c.observable)))?)?;
            summary.contrasts.push(ContrastSummary {
                observable: c.observable.clone(),
                post_pulse_max: c.post_pulse_max,
                after_pulse_max: c.window_max(support_end, f64::INFINITY),
                decay_time: c.decay_time,
            });
        }
    }
    let stride = ((CHECK_SPACING / cfg.dt).round() as usize).max(1);
    let samples: Vec<usize> = (0..grid.len).step_by(stride).collect();
    if cfg.n_max >= 4 {
        summary.invariants.extend(propagator_checks(&table, pulse.as_ref(), cfg.n_max, &samples)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn late_amplitude_removes_trend() {
        let times: Vec<f64> = (0..3001).map(|k| k as f64 * 0.01).collect();
        let y: Vec<f64> = times.iter().map(|t| 0.5 + 1e-3 * t + 2e-4 * (3.0 * t).sin()).collect();
        let a = late_oscillation_amplitude(&times, &y);
        assert!((a - 2e-4).abs() < 2e-5, "{a}");
    }
}
