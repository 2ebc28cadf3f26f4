use clap::{Parser, Subcommand};
use oqpc::checks::{all_passed, default_suite};
use oqpc::config::ScenarioConfig;
use oqpc::presets::{find, registry, run_preset};
use oqpc::scenario::run_scenario;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "oqpc", version, about = "Chirped-pulse phase control of a damped oscillator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario document.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a named preset.
    Preset {
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the preset registry.
    ListPresets,
    /// Run the structural self-checks.
    Check,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> oqpc::Result<bool> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::parse(&std::fs::read_to_string(&config)?)?;
            let dir = out.join(&cfg.label);
            let s = run_scenario(&cfg, &dir)?;
            for c in &s.invariants {
                println!("{:<40} {:>12.3e}  {}", c.name, c.value, if c.passed { "ok" } else { "FAIL" });
            }
            println!("{} -> {}", s.label, dir.display());
            Ok(s.passed)
        }
        Command::Preset { name, out, workers } => {
            if let Some(n) = workers {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| oqpc::Error::InvalidParameter(e.to_string()))?;
            }
            let preset = find(&name)?;
            let dir = out.join(preset.name);
            let s = run_preset(preset, &dir)?;
            for r in &s.scenarios {
                match &r.error {
                    Some(e) => println!("{:<28} error: {e}", r.label),
                    None => println!("{:<28} {}", r.label, if r.passed { "ok" } else { "FAIL" }),
                }
            }
            for p in &s.persistence {
                println!(
                    "gamma {:<6} late amplitude sub-ohmic {:.3e} ohmic {:.3e}",
                    p.gamma, p.sub_ohmic_amplitude, p.ohmic_amplitude
                );
            }
            println!("{} v{} -> {}", s.name, s.version, dir.display());
            Ok(s.passed)
        }
        Command::ListPresets => {
            for p in registry() {
                println!("{:<14} v{}  {}", p.name, p.version, p.description);
            }
            Ok(true)
        }
        Command::Check => {
            let results = default_suite()?;
            for c in &results {
                println!(
                    "{:<48} {:>12.3e} (tol {:.1e})  {}",
                    c.name,
                    c.value,
                    c.tolerance,
                    if c.passed { "ok" } else { "FAIL" }
                );
            }
            Ok(all_passed(&results))
        }
    }
}
