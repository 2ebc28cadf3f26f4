//! Named, versioned figure presets. Acceptance tests and the CLI refer to these instead of
//! repeating raw parameters.

use crate::bath::SpectralDensity;
use crate::config::{PulseSpec, RunMode, ScenarioConfig, DEFAULT_DT, DEFAULT_N_MAX};
use crate::dynamics::{InitialState, Observable};
use crate::error::{Error, Result};
use crate::output::write_json;
use crate::scenario::{run_scenario, Summary};
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

/// Pulse of the chirp figures: `t0 = 10`, `omega_l = 10`, `delta_t = 4`, `chi = 2.5`,
/// `sqrt|S(omega0)| / E_scale = 0.003415`.
pub const CHIRP_PULSE: PulseSpec =
    PulseSpec::SpectralRatio { ratio: 0.003415, t0: 10.0, omega_l: 10.0, delta_t: 4.0, chirp: 2.5 };
pub const BETA: f64 = 40.0;
pub const COUPLINGS: [f64; 3] = [0.01, 0.025, 0.05];
pub const CUTOFFS: [f64; 3] = [1.0, 10.0, 100.0];
pub const SUB_OHMIC_S: f64 = 0.1;
/// Long enough to see the contrast equilibrate at the weakest coupling.
pub const T_END: f64 = 100.0;

pub struct Preset {
    pub name: &'static str,
    pub version: u32,
    pub description: &'static str,
    build: fn() -> Vec<ScenarioConfig>,
}

impl Preset {
    pub fn scenarios(&self) -> Vec<ScenarioConfig> {
        (self.build)()
    }
}

fn base(label: String, bath: SpectralDensity) -> ScenarioConfig {
    ScenarioConfig {
        label,
        n_max: DEFAULT_N_MAX,
        pulse: CHIRP_PULSE,
        bath,
        beta: BETA,
        t_end: T_END,
        dt: DEFAULT_DT,
        mode: RunMode::Contrast,
        initial: InitialState::Stationary,
        observables: vec![Observable::Population { level: 0 }, Observable::Population { level: 1 }],
        elements: vec![[0, 0, 0, 0], [0, 0, 2, 0]],
        gammas: Vec::new(),
        temperatures: Vec::new(),
    }
}

fn drude(gamma: f64, omega_d: f64) -> SpectralDensity {
    SpectralDensity::OhmicDrude { gamma, omega_d }
}

fn sub_ohmic(gamma: f64) -> SpectralDensity {
    SpectralDensity::SubOhmic { gamma, omega_ph: 1.0, omega_d: 1.0, s: SUB_OHMIC_S }
}

fn scan_axes() -> (Vec<f64>, Vec<f64>) {
    let gammas = (1..=20).map(|i| 0.005 * i as f64).collect();
    let temps = (1..=20).map(|j| 0.025 * j as f64).collect();
    (gammas, temps)
}

fn scan(label: &str, bath: SpectralDensity) -> ScenarioConfig {
    let (gammas, temperatures) = scan_axes();
    ScenarioConfig { mode: RunMode::Scan, pulse: PulseSpec::Off, gammas, temperatures, ..base(label.into(), bath) }
}

fn fig1() -> Vec<ScenarioConfig> {
    vec![ScenarioConfig {
        initial: InitialState::Populations { populations: vec![1.0] },
        elements: vec![[0, 0, 0, 0], [0, 0, 1, 0], [1, 1, 0, 0]],
        ..base("unitary".into(), drude(0.0, 1.0))
    }]
}

fn fig2() -> Vec<ScenarioConfig> {
    vec![scan("ohmic-wd1", drude(0.05, 1.0)), scan("ohmic-wd100", drude(0.05, 100.0))]
}

fn fig3() -> Vec<ScenarioConfig> {
    COUPLINGS
        .iter()
        .map(|&g| ScenarioConfig {
            elements: vec![[0, 0, 2, 0], [0, 0, 0, 0]],
            ..base(format!("gamma-{g}"), drude(g, 1.0))
        })
        .collect()
}

fn fig4() -> Vec<ScenarioConfig> {
    COUPLINGS.iter().map(|&g| base(format!("gamma-{g}"), drude(g, 1.0))).collect()
}

fn fig5() -> Vec<ScenarioConfig> {
    vec![scan("sub-ohmic", sub_ohmic(0.05))]
}

fn fig6() -> Vec<ScenarioConfig> {
    CUTOFFS.iter().map(|&w| base(format!("wd-{w}"), drude(0.05, w))).collect()
}

fn fig7() -> Vec<ScenarioConfig> {
    COUPLINGS
        .iter()
        .flat_map(|&g| {
            [base(format!("sub-ohmic-gamma-{g}"), sub_ohmic(g)), base(format!("ohmic-gamma-{g}"), drude(g, 1.0))]
        })
        .collect()
}

static REGISTRY: [Preset; 7] = [
    Preset {
        name: "fig1",
        version: 1,
        description: "uncoupled oscillator, J elements and populations for chi = +-2.5",
        build: fig1,
    },
    Preset {
        name: "fig2-scan",
        version: 1,
        description: "<0|rho|2> over (gamma, T), Ohmic-Drude at omega_D = 1 and 100",
        build: fig2,
    },
    Preset {
        name: "fig3",
        version: 1,
        description: "J_{00;20} and J_{00;00} for gamma in {0.01, 0.025, 0.05}",
        build: fig3,
    },
    Preset {
        name: "fig4",
        version: 1,
        description: "ground and first excited populations for gamma in {0.01, 0.025, 0.05}",
        build: fig4,
    },
    Preset { name: "fig5-scan", version: 1, description: "<0|rho|2> over (gamma, T), sub-Ohmic s = 0.1", build: fig5 },
    Preset {
        name: "fig6",
        version: 1,
        description: "populations at gamma = 0.05 for omega_D in {1, 10, 100}",
        build: fig6,
    },
    Preset {
        name: "fig7-subohmic",
        version: 1,
        description: "sub-Ohmic populations with Ohmic baselines and late-oscillation comparison",
        build: fig7,
    },
];

pub fn registry() -> &'static [Preset] {
    &REGISTRY
}

pub fn find(name: &str) -> Result<&'static Preset> {
    REGISTRY.iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownPreset(name.into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub label: String,
    pub passed: bool,
    pub error: Option<String>,
}

/// Late-oscillation comparison of a sub-Ohmic run against the Ohmic run at equal coupling.
#[derive(Debug, Clone, Serialize)]
pub struct Persistence {
    pub gamma: f64,
    pub sub_ohmic_amplitude: f64,
    pub ohmic_amplitude: f64,
    pub persistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetSummary {
    pub name: String,
    pub version: u32,
    pub scenarios: Vec<ScenarioResult>,
    pub persistence: Vec<Persistence>,
    pub passed: bool,
}

/// Run every scenario of `preset` under `out/<label>/` and write `out/preset_summary.json`.
pub fn run_preset(preset: &Preset, out: &Path) -> Result<PresetSummary> {
    let cfgs = preset.scenarios();
    let results: Vec<(String, Result<Summary>)> =
        cfgs.par_iter().map(|c| (c.label.clone(), run_scenario(c, &out.join(&c.label)))).collect();
    let mut persistence = Vec::new();
    for &g in &COUPLINGS {
        let amp = |label: String| {
            results
                .iter()
                .find(|(l, _)| *l == label)
                .and_then(|(_, r)| r.as_ref().ok())
                .and_then(|s| s.runs.first().map(|r| r.late_oscillation_amplitude))
        };
        if let (Some(a), Some(b)) = (amp(format!("sub-ohmic-gamma-{g}")), amp(format!("ohmic-gamma-{g}"))) {
            persistence.push(Persistence { gamma: g, sub_ohmic_amplitude: a, ohmic_amplitude: b, persistent: a > b });
        }
    }
    let scenarios: Vec<ScenarioResult> = results
        .into_iter()
        .map(|(label, r)| match r {
            Ok(s) => ScenarioResult { label, passed: s.passed, error: None },
            Err(e) => ScenarioResult { label, passed: false, error: Some(e.to_string()) },
        })
        .collect();
    let summary = PresetSummary {
        name: preset.name.into(),
        version: preset.version,
        passed: scenarios.iter().all(|s| s.passed),
        scenarios,
        persistence,
    };
    write_json(&out.join("preset_summary.json"), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for p in registry() {
            for c in p.scenarios() {
                c.validate().unwrap_or_else(|e| panic!("{} / {}: {e}", p.name, c.label));
                assert_eq!(ScenarioConfig::parse(&c.to_text()).unwrap(), c, "{}", p.name);
            }
        }
    }

    #[test]
    fn fig4_parameters() {
        let s = find("fig4").unwrap().scenarios();
        let gammas: Vec<f64> = s.iter().map(|c| c.bath.gamma()).collect();
        assert_eq!(gammas, COUPLINGS);
        assert!(s.iter().all(|c| c.beta == 40.0 && c.bath.omega_d() == 1.0));
        assert!(find("fig9").is_err());
    }
}
