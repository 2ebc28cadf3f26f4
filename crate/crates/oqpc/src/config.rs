//! Flat `key = value` scenario documents.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, blank lines are ignored.
//! Keys are dotted (`bath.gamma`); lists are comma separated. Unknown and repeated keys are
//! errors. See `ScenarioConfig::to_text` for the canonical form of every key.

use crate::bath::SpectralDensity;
use crate::dynamics::{InitialState, Observable};
use crate::error::{Error, Result};
use crate::pulse::PulseParams;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const DEFAULT_N_MAX: usize = 12;
pub const DEFAULT_T_END: f64 = 50.0;
pub const DEFAULT_DT: f64 = 0.01;
/// Largest allowed `dt * omega_l`.
pub const MAX_PHASE_STEP: f64 = 0.1;

const KEYS: &[&str] = &[
    "label",
    "system.omega0",
    "system.n_max",
    "pulse.e0",
    "pulse.spectral_ratio",
    "pulse.t0",
    "pulse.omega_l",
    "pulse.delta_t",
    "pulse.chirp",
    "bath.kind",
    "bath.gamma",
    "bath.omega_d",
    "bath.omega_ph",
    "bath.s",
    "beta",
    "grid.t_end",
    "grid.dt",
    "run.mode",
    "run.initial",
    "run.populations",
    "run.observables",
    "run.weights",
    "run.elements",
    "run.gammas",
    "run.temperatures",
];

/// Pulse amplitude given directly or through `sqrt|S(omega0)| / E_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PulseSpec {
    Off,
    Amplitude { params: PulseParams },
    SpectralRatio { ratio: f64, t0: f64, omega_l: f64, delta_t: f64, chirp: f64 },
}

impl PulseSpec {
    /// Resolved pulse, `None` for a field-free run.
    pub fn resolve(&self) -> Result<Option<PulseParams>> {
        match *self {
            PulseSpec::Off => Ok(None),
            PulseSpec::Amplitude { params } => params.validate().map(|_| Some(params)),
            PulseSpec::SpectralRatio { ratio, t0, omega_l, delta_t, chirp } => {
                Ok(Some(PulseParams::new(1.0, t0, omega_l, delta_t, chirp)?.with_spectral_ratio(ratio)?))
            }
        }
    }

    fn shape(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            PulseSpec::Off => None,
            PulseSpec::Amplitude { params: p } => Some((p.t0, p.omega_l, p.delta_t, p.chirp)),
            PulseSpec::SpectralRatio { t0, omega_l, delta_t, chirp, .. } => Some((t0, omega_l, delta_t, chirp)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// One pulse as given.
    Single,
    /// `+chi` and `-chi` runs and their difference.
    Contrast,
    /// Stationary coherence over a (gamma, T) grid.
    Scan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub label: String,
    pub n_max: usize,
    pub pulse: PulseSpec,
    pub bath: SpectralDensity,
    pub beta: f64,
    pub t_end: f64,
    pub dt: f64,
    pub mode: RunMode,
    pub initial: InitialState,
    pub observables: Vec<Observable>,
    /// Propagator elements `(n, m, nu, mu)` exported on the grid.
    pub elements: Vec<[usize; 4]>,
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
}

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| Error::Parse { line, msg: format!("{key}: '{v}' is not a number") })
}

fn parse_list(key: &str, v: &str, line: usize) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_f64(key, s, line)).collect()
}

fn parse_observable(s: &str, line: usize) -> Result<Observable> {
    let s = s.trim();
    if s == "n" {
        return Ok(Observable::Number);
    }
    s.strip_prefix('p')
        .and_then(|l| l.parse().ok())
        .map(|level| Observable::Population { level })
        .ok_or_else(|| Error::Parse { line, msg: format!("run.observables: unknown observable '{s}'") })
}

fn parse_element(s: &str, line: usize) -> Result<[usize; 4]> {
    let parts: Vec<usize> = s
        .trim()
        .split(':')
        .map(|p| p.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line, msg: format!("run.elements: '{s}' is not n:m:nu:mu") })?;
    <[usize; 4]>::try_from(parts)
        .map_err(|_| Error::Parse { line, msg: format!("run.elements: '{s}' needs four indices") })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, msg: format!("expected 'key = value', got '{body}'") })?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Parse { line, msg: format!("unknown key '{k}'") });
            }
            if kv.insert(k, (line, v.trim())).is_some() {
                return Err(Error::Parse { line, msg: format!("repeated key '{k}'") });
            }
        }
        let num = |k: &str| kv.get(k).map(|&(l, v)| parse_f64(k, v, l)).transpose();
        let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing required key '{k}'") };

        if let Some(w) = num("system.omega0")? {
            if w != 1.0 {
                return Err(Error::Validation(vec![format!(
                    "system.omega0 is the frequency unit and must be 1, got {w}"
                )]));
            }
        }
        let n_max = match kv.get("system.n_max") {
            Some(&(l, v)) => v.parse().map_err(|_| Error::Parse { line: l, msg: format!("system.n_max: '{v}'") })?,
            None => DEFAULT_N_MAX,
        };

        let amp = (num("pulse.e0")?, num("pulse.spectral_ratio")?);
        let any_pulse = KEYS.iter().filter(|k| k.starts_with("pulse.")).any(|k| kv.contains_key(k));
        let pulse = if !any_pulse {
            PulseSpec::Off
        } else {
            let req = |k: &str| num(k)?.ok_or_else(|| missing(k));
            let (t0, omega_l, delta_t) = (req("pulse.t0")?, req("pulse.omega_l")?, req("pulse.delta_t")?);
            let chirp = num("pulse.chirp")?.unwrap_or(0.0);
            match amp {
                (Some(e0), None) => PulseSpec::Amplitude { params: PulseParams { e0, t0, omega_l, delta_t, chirp } },
                (None, Some(ratio)) => PulseSpec::SpectralRatio { ratio, t0, omega_l, delta_t, chirp },
                (Some(_), Some(_)) => {
                    let line = kv["pulse.spectral_ratio"].0;
                    return Err(Error::Parse { line, msg: "give either pulse.e0 or pulse.spectral_ratio".into() });
                }
                (None, None) => return Err(missing("pulse.e0 or pulse.spectral_ratio")),
            }
        };

        let gamma = num("bath.gamma")?.ok_or_else(|| missing("bath.gamma"))?;
        let omega_d = num("bath.omega_d")?.ok_or_else(|| missing("bath.omega_d"))?;
        let (kl, kind) = *kv.get("bath.kind").ok_or_else(|| missing("bath.kind"))?;
        let bath = match kind {
            "ohmic_drude" => {
                for k in ["bath.omega_ph", "bath.s"] {
                    if let Some(&(l, _)) = kv.get(k) {
                        return Err(Error::Parse { line: l, msg: format!("{k} is not used by ohmic_drude") });
                    }
                }
                SpectralDensity::OhmicDrude { gamma, omega_d }
            }
            "sub_ohmic" => SpectralDensity::SubOhmic {
                gamma,
                omega_d,
                omega_ph: num("bath.omega_ph")?.ok_or_else(|| missing("bath.omega_ph"))?,
                s: num("bath.s")?.ok_or_else(|| missing("bath.s"))?,
            },
            other => return Err(Error::Parse { line: kl, msg: format!("bath.kind: unknown '{other}'") }),
        };

        let mode = match kv.get("run.mode").copied() {
            None | Some((_, "single")) => RunMode::Single,
            Some((_, "contrast")) => RunMode::Contrast,
            Some((_, "scan")) => RunMode::Scan,
            Some((l, other)) => return Err(Error::Parse { line: l, msg: format!("run.mode: unknown '{other}'") }),
        };
        let initial = match kv.get("run.initial").copied() {
            None | Some((_, "stationary")) => InitialState::Stationary,
            Some((_, "superposition")) => InitialState::Superposition,
            Some((l, "populations")) => {
                let (pl, pv) = *kv
                    .get("run.populations")
                    .ok_or(Error::Parse { line: l, msg: "run.initial = populations needs run.populations".into() })?;
                InitialState::Populations { populations: parse_list("run.populations", pv, pl)? }
            }
            Some((l, other)) => return Err(Error::Parse { line: l, msg: format!("run.initial: unknown '{other}'") }),
        };
        if let (Some(&(l, _)), false) = (kv.get("run.populations"), matches!(initial, InitialState::Populations { .. }))
        {
            return Err(Error::Parse { line: l, msg: "run.populations needs run.initial = populations".into() });
        }
        let mut observables = match kv.get("run.observables") {
            Some(&(l, v)) => {
                v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_observable(s, l)).collect::<Result<_>>()?
            }
            None => vec![Observable::Population { level: 0 }, Observable::Population { level: 1 }],
        };
        if let Some(&(l, v)) = kv.get("run.weights") {
            observables.push(Observable::Diagonal { weights: parse_list("run.weights", v, l)? });
        }
        let elements = match kv.get("run.elements") {
            Some(&(l, v)) => {
                v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_element(s, l)).collect::<Result<_>>()?
            }
            None => vec![[0, 0, 0, 0], [0, 0, 2, 0]],
        };
        let list = |k: &str| kv.get(k).map(|&(l, v)| parse_list(k, v, l)).transpose().map(|o| o.unwrap_or_default());

        let cfg = Self {
            label: kv.get("label").map_or("run", |p| p.1).to_string(),
            n_max,
            pulse,
            bath,
            beta: num("beta")?.ok_or_else(|| missing("beta"))?,
            t_end: num("grid.t_end")?.unwrap_or(DEFAULT_T_END),
            dt: num("grid.dt")?.unwrap_or(DEFAULT_DT),
            mode,
            initial,
            observables,
            elements,
            gammas: list("run.gammas")?,
            temperatures: list("run.temperatures")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every violated bound, not only the first.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(1..=DEFAULT_N_MAX).contains(&self.n_max) {
            v.push(format!("system.n_max = {} outside [1, {DEFAULT_N_MAX}]", self.n_max));
        }
        if matches!(self.initial, InitialState::Stationary) && self.n_max < 4 {
            v.push(format!("stationary initial state needs system.n_max >= 4, got {}", self.n_max));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            v.push(format!("beta = {} must be positive", self.beta));
        }
        if !(self.dt > 0.0) {
            v.push(format!("grid.dt = {} must be positive", self.dt));
        }
        if !(self.t_end > self.dt) {
            v.push(format!("grid.t_end = {} must exceed grid.dt", self.t_end));
        }
        if let Err(e) = self.bath.validate() {
            v.push(e.to_string());
        }
        if let Some((_, omega_l, delta_t, chirp)) = self.pulse.shape() {
            if self.dt * omega_l.abs() > MAX_PHASE_STEP {
                v.push(format!("grid.dt * pulse.omega_l = {} exceeds {MAX_PHASE_STEP}", self.dt * omega_l.abs()));
            }
            if !(delta_t > 0.0) {
                v.push(format!("pulse.delta_t = {delta_t} must be positive"));
            }
            if self.mode == RunMode::Contrast && !(chirp > 0.0) {
                v.push(format!("contrast mode needs pulse.chirp > 0, got {chirp}"));
            }
        } else if self.mode == RunMode::Contrast {
            v.push("contrast mode needs a pulse".into());
        }
        match self.pulse {
            PulseSpec::Amplitude { params } if !(params.e0 >= 0.0) => {
                v.push(format!("pulse.e0 = {} must be >= 0", params.e0))
            }
            PulseSpec::SpectralRatio { ratio, .. } if !(ratio > 0.0) => {
                v.push(format!("pulse.spectral_ratio = {ratio} must be positive"))
            }
            _ => {}
        }
        let dim = self.n_max + 1;
        if let InitialState::Populations { populations } = &self.initial {
            if populations.len() > dim || populations.iter().any(|&p| p < 0.0) {
                v.push(format!("run.populations must be {dim} or fewer non-negative values"));
            }
            let total: f64 = populations.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                v.push(format!("run.populations sum to {total}, not 1"));
            }
        }
        for o in &self.observables {
            if let Err(e) = o.weights(dim).and_then(|w| {
                if w.len() == dim {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("run.weights has {} entries for dimension {dim}", w.len())))
                }
            }) {
                v.push(e.to_string());
            }
        }
        for e in &self.elements {
            if e.iter().any(|&i| i > self.n_max) {
                v.push(format!("run.elements entry {e:?} exceeds system.n_max"));
            }
        }
        if self.mode == RunMode::Scan {
            if self.gammas.is_empty() || self.gammas.iter().any(|&g| !(g > 0.0)) {
                v.push("scan mode needs positive run.gammas".into());
            }
            if self.temperatures.is_empty() || self.temperatures.iter().any(|&t| !(t > 0.0)) {
                v.push("scan mode needs positive run.temperatures".into());
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Canonical document; `parse(to_text())` reproduces the config exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label = {}", self.label);
        let _ = writeln!(s, "system.omega0 = 1.0");
        let _ = writeln!(s, "system.n_max = {}", self.n_max);
        if let Some((t0, omega_l, delta_t, chirp)) = self.pulse.shape() {
            match self.pulse {
                PulseSpec::Amplitude { params } => {
                    let _ = writeln!(s, "pulse.e0 = {:?}", params.e0);
                }
                PulseSpec::SpectralRatio { ratio, .. } => {
                    let _ = writeln!(s, "pulse.spectral_ratio = {ratio:?}");
                }
                PulseSpec::Off => {}
            }
            let _ = writeln!(
                s,
                "pulse.t0 = {t0:?}\npulse.omega_l = {omega_l:?}\npulse.delta_t = {delta_t:?}\npulse.chirp = {chirp:?}"
            );
        }
        match self.bath {
            SpectralDensity::OhmicDrude { gamma, omega_d } => {
                let _ = writeln!(s, "bath.kind = ohmic_drude\nbath.gamma = {gamma:?}\nbath.omega_d = {omega_d:?}");
            }
            SpectralDensity::SubOhmic { gamma, omega_ph, omega_d, s: e } => {
                let _ = writeln!(
                    s,
                    "bath.kind = sub_ohmic\nbath.gamma = {gamma:?}\nbath.omega_d = {omega_d:?}\nbath.omega_ph = {omega_ph:?}\nbath.s = {e:?}"
                );
            }
        }
        let _ = writeln!(s, "beta = {:?}\ngrid.t_end = {:?}\ngrid.dt = {:?}", self.beta, self.t_end, self.dt);
        let mode = match self.mode {
            RunMode::Single => "single",
            RunMode::Contrast => "contrast",
            RunMode::Scan => "scan",
        };
        let _ = writeln!(s, "run.mode = {mode}");
        match &self.initial {
            InitialState::Stationary => {
                let _ = writeln!(s, "run.initial = stationary");
            }
            InitialState::Superposition => {
                let _ = writeln!(s, "run.initial = superposition");
            }
            InitialState::Populations { populations } => {
                let _ = writeln!(s, "run.initial = populations\nrun.populations = {}", join(populations));
            }
        }
        let named: Vec<String> =
            self.observables.iter().filter(|o| !matches!(o, Observable::Diagonal { .. })).map(|o| o.id()).collect();
        let _ = writeln!(s, "run.observables = {}", named.join(", "));
        for o in &self.observables {
            if let Observable::Diagonal { weights } = o {
                let _ = writeln!(s, "run.weights = {}", join(weights));
            }
        }
        let els: Vec<String> = self.elements.iter().map(|e| format!("{}:{}:{}:{}", e[0], e[1], e[2], e[3])).collect();
        let _ = writeln!(s, "run.elements = {}", els.join(", "));
        if !self.gammas.is_empty() {
            let _ = writeln!(s, "run.gammas = {}", join(&self.gammas));
        }
        if !self.temperatures.is_empty() {
            let _ = writeln!(s, "run.temperatures = {}", join(&self.temperatures));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "
# Fig. 4 style run
label = demo
bath.kind = ohmic_drude
bath.gamma = 0.05
bath.omega_d = 1
beta = 40
pulse.spectral_ratio = 0.003415
pulse.t0 = 10
pulse.omega_l = 10
pulse.delta_t = 4
pulse.chirp = 2.5
run.mode = contrast
";

    #[test]
    fn parses_with_defaults() {
        let c = ScenarioConfig::parse(BASIC).unwrap();
        assert_eq!(c.n_max, 12);
        assert_eq!(c.dt, 0.01);
        assert_eq!(c.mode, RunMode::Contrast);
        assert_eq!(c.initial, InitialState::Stationary);
        assert!(matches!(c.pulse, PulseSpec::SpectralRatio { ratio, .. } if ratio == 0.003415));
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut c = ScenarioConfig::parse(BASIC).unwrap();
        c.observables.push(Observable::Diagonal { weights: vec![0.1; 13] });
        c.beta = 1.0 / 3.0;
        assert_eq!(ScenarioConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn empty_pulse_section_is_field_free() {
        let c =
            ScenarioConfig::parse("bath.kind = ohmic_drude\nbath.gamma = 0.1\nbath.omega_d = 1\nbeta = 40").unwrap();
        assert_eq!(c.pulse, PulseSpec::Off);
        assert_eq!(c.pulse.resolve().unwrap(), None);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let err = ScenarioConfig::parse("beta = 1\nbath.gama = 0.1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn coarse_step_fails_validation() {
        let text = BASIC.replace("run.mode = contrast", "run.mode = contrast\ngrid.dt = 0.1");
        match ScenarioConfig::parse(&text).unwrap_err() {
            Error::Validation(v) => assert!(v.iter().any(|m| m.contains("omega_l"))),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn all_violations_listed() {
        let text = BASIC.replace("beta = 40", "beta = -1\ngrid.dt = 0.1\nsystem.n_max = 40");
        match ScenarioConfig::parse(&text).unwrap_err() {
            Error::Validation(v) => assert!(v.len() >= 3, "{v:?}"),
            e => panic!("{e}"),
        }
    }
}
