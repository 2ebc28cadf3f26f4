//! Parse a scenario document, run it, and read back the summary.

use oqpc::config::ScenarioConfig;
use oqpc::presets::registry;
use oqpc::scenario::run_scenario;

const DOC: &str = "
label = example
bath.kind = ohmic_drude
bath.gamma = 0.025
bath.omega_d = 1
pulse.spectral_ratio = 0.003415
pulse.t0 = 10
pulse.omega_l = 10
pulse.delta_t = 4
pulse.chirp = 2.5
beta = 40
grid.t_end = 25
run.mode = contrast
run.observables = p0, n
run.elements = 0:0:0:0, 0:0:2:0
";

fn main() -> oqpc::Result<()> {
    let cfg = ScenarioConfig::parse(DOC)?;
    print!("{}", cfg.to_text());
    let out = std::env::temp_dir().join("oqpc-example");
    let s = run_scenario(&cfg, &out)?;
    for c in &s.contrasts {
        println!("{}: post-pulse max {:.3e}", c.observable, c.post_pulse_max);
    }
    println!("invariants {}; files in {}", if s.passed { "ok" } else { "FAILED" }, out.display());
    println!("presets:");
    for p in registry() {
        println!("  {} v{}", p.name, p.version);
    }
    Ok(())
}
