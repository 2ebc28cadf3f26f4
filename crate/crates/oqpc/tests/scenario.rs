use oqpc::bath::SpectralDensity;
use oqpc::config::{PulseSpec, RunMode, ScenarioConfig};
use oqpc::dynamics::{InitialState, Observable};
use oqpc::scenario::run_scenario;
use proptest::prelude::*;
use std::process::Command;

const QUICK: &str = "
label = quick
bath.kind = ohmic_drude
bath.gamma = 0.05
bath.omega_d = 1
pulse.spectral_ratio = 0.003415
pulse.t0 = 10
pulse.omega_l = 10
pulse.delta_t = 4
pulse.chirp = 2.5
beta = 40
grid.t_end = 16
system.n_max = 6
run.mode = contrast
run.observables = p0, n
run.elements = 0:0:0:0, 0:0:2:0
";

fn files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn scenario_output_is_deterministic() {
    let cfg = ScenarioConfig::parse(QUICK).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let s = run_scenario(&cfg, a.path()).unwrap();
    run_scenario(&cfg, b.path()).unwrap();
    assert!(s.passed);
    let (fa, fb) = (files(a.path()), files(b.path()));
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    for want in
        ["summary.json", "greens.csv", "elements_plus.csv", "trajectory_minus.csv", "contrast_p0.csv", "contrast_n.csv"]
    {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert_eq!(fa, fb);
}

#[test]
fn summary_records_config_and_checks() {
    let cfg = ScenarioConfig::parse(QUICK).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&cfg, dir.path()).unwrap();
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(v["label"], "quick");
    assert_eq!(ScenarioConfig::parse(v["config_text"].as_str().unwrap()).unwrap(), cfg);
    assert!(v["invariants"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert_eq!(v["contrasts"].as_array().unwrap().len(), 2);
}

#[test]
fn scan_mode_writes_grid() {
    let text =
        "bath.kind = sub_ohmic\nbath.gamma = 0.05\nbath.omega_d = 1\nbath.omega_ph = 1\nbath.s = 0.1\nbeta = 40\n\
                run.mode = scan\nrun.gammas = 0.01, 0.05\nrun.temperatures = 0.05, 0.5\n";
    let cfg = ScenarioConfig::parse(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let s = run_scenario(&cfg, dir.path()).unwrap();
    assert!(s.passed);
    let csv = std::fs::read_to_string(dir.path().join("coherence_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("gamma,T,coh02"));
}

#[test]
fn cli_reports_errors_and_lists_presets() {
    let bin = env!("CARGO_BIN_EXE_oqpc");
    let out = Command::new(bin).arg("list-presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("fig4") && text.contains("fig7-subohmic"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "beta = 40\nbath.colour = red\n").unwrap();
    let out = Command::new(bin).arg("run").arg(&bad).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = Command::new(bin).args(["preset", "fig99"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cli_run_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("quick.cfg");
    std::fs::write(&cfg, QUICK).unwrap();
    let out =
        Command::new(env!("CARGO_BIN_EXE_oqpc")).arg("run").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("quick").join("summary.json").exists());
}

fn bath() -> impl Strategy<Value = SpectralDensity> {
    prop_oneof![
        (0.0f64..0.5, 0.1f64..100.0).prop_map(|(gamma, omega_d)| SpectralDensity::OhmicDrude { gamma, omega_d }),
        (0.0f64..0.5, 0.1f64..10.0, 0.1f64..10.0, 0.05f64..0.95)
            .prop_map(|(gamma, omega_ph, omega_d, s)| SpectralDensity::SubOhmic { gamma, omega_ph, omega_d, s }),
    ]
}

fn pulse() -> impl Strategy<Value = PulseSpec> {
    (1e-4f64..0.1, 0.0f64..20.0, 0.5f64..10.0, 0.5f64..8.0, 0.1f64..4.0).prop_map(
        |(ratio, t0, omega_l, delta_t, chirp)| PulseSpec::SpectralRatio { ratio, t0, omega_l, delta_t, chirp },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(
        bath in bath(),
        pulse in pulse(),
        beta in 0.5f64..100.0,
        n_max in 4usize..=12,
        t_end in 1.0f64..200.0,
        levels in prop::collection::vec(0usize..4, 1..4),
        elements in prop::collection::vec(prop::array::uniform4(0usize..4), 0..4),
    ) {
        let cfg = ScenarioConfig {
            label: "prop".into(),
            n_max,
            pulse,
            bath,
            beta,
            t_end,
            dt: 0.01,
            mode: RunMode::Contrast,
            initial: InitialState::Stationary,
            observables: levels.into_iter().map(|level| Observable::Population { level }).collect(),
            elements,
            gammas: Vec::new(),
            temperatures: Vec::new(),
        };
        prop_assert!(cfg.validate().is_ok());
        let back = ScenarioConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
