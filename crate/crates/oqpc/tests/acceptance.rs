//! Acceptance criteria, one pass/fail line each. Exits nonzero if any criterion fails.

mod common;

use common::spectral_correlation;
use oqpc::bath::SpectralDensity;
use oqpc::checks::{all_passed, default_suite};
use oqpc::config::ScenarioConfig;
use oqpc::dynamics::{phase_contrast, Observable, PhaseContrast};
use oqpc::equilibrium::{second_moments, stationary_state};
use oqpc::greens::{volterra_green, GreensTable, ResidueForm};
use oqpc::grid::TimeGrid;
use oqpc::presets::{find, COUPLINGS};
use oqpc::propagator::{unitary_elements, Propagator};
use oqpc::pulse::PulseParams;
use oqpc::{FIELD_SCALE, OMEGA0};
use std::process::ExitCode;
use std::time::Instant;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome { id, passed, detail }
}

fn failed(id: &'static str, e: impl std::fmt::Display) -> Outcome {
    outcome(id, false, format!("error: {e}"))
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn preset_scenario(preset: &str, label: &str) -> ScenarioConfig {
    find(preset).unwrap().scenarios().into_iter().find(|c| c.label == label).unwrap()
}

/// Ground-population contrast between the two chirp signs on every grid point.
fn ground_contrast(cfg: &ScenarioConfig) -> oqpc::Result<(PhaseContrast, PulseParams)> {
    let grid = TimeGrid::covering(cfg.t_end, cfg.dt)?;
    let pulse = cfg.pulse.resolve()?.expect("chirp presets have a pulse");
    let tab = GreensTable::new(&cfg.bath, cfg.beta, grid)?;
    let rho = cfg.initial.build(&tab, cfg.n_max)?;
    let idx: Vec<usize> = (0..grid.len).collect();
    let c = phase_contrast(&tab, &pulse, &rho, &Observable::Population { level: 0 }, &idx)?;
    Ok((c, pulse))
}

const COHERENCE: [f64; 3] = [-0.00088, -0.00219, -0.00435];
const EXCITED: [f64; 3] = [0.000446, 0.00113, 0.00223];

fn stationary_element(gamma: f64, n: usize, m: usize) -> oqpc::Result<(f64, f64)> {
    let start = Instant::now();
    let mo = second_moments(&SpectralDensity::OhmicDrude { gamma, omega_d: 1.0 }, 40.0)?;
    let v = stationary_state(mo.q2, mo.p2, 12)?.get(n, m).re;
    Ok((v, start.elapsed().as_secs_f64()))
}

fn criterion_1() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (g, want) in COUPLINGS.iter().zip(COHERENCE) {
        match stationary_element(*g, 0, 2) {
            Ok((v, secs)) => {
                ok &= rel(v, want) < 0.1 && secs < 10.0;
                parts.push(format!("gamma {g}: {v:.6} vs {want} ({:.1}%, {secs:.2}s)", 100.0 * rel(v, want)));
            }
            Err(e) => return failed("1 stationary <0|rho|2>", e),
        }
    }
    outcome("1 stationary <0|rho|2>", ok, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (g, want) in COUPLINGS.iter().zip(EXCITED) {
        match stationary_element(*g, 1, 1) {
            Ok((v, _)) => {
                ok &= rel(v, want) < 0.1;
                parts.push(format!("gamma {g}: {v:.6} vs {want} ({:.1}%)", 100.0 * rel(v, want)));
            }
            Err(e) => return failed("2 stationary <1|rho|1>", e),
        }
    }
    outcome("2 stationary <1|rho|1>", ok, parts.join("; "))
}

/// Returns the outcome and the noise floor used by criterion 6.
fn criterion_3() -> (Outcome, f64) {
    let id = "3 unitary no-control";
    let start = Instant::now();
    let cfg = preset_scenario("fig1", "unitary");
    let (c, pulse) = match ground_contrast(&cfg) {
        Ok(x) => x,
        Err(e) => return (failed(id, e), f64::EPSILON),
    };
    let secs = start.elapsed().as_secs_f64();
    let (_, end) = pulse.support();
    let post = c.window_max(end, cfg.t_end);
    let inside = c.window_max(pulse.t0 + pulse.delta_t, end);
    let ok = post < 1e-10 && secs < 30.0;
    let detail = format!(
        "max |dP0| after field support (t > {end:.2}) {post:.2e}; in [t0+dt, {end:.2}] {inside:.2e}; {secs:.1}s"
    );
    (outcome(id, ok, detail), post.max(f64::EPSILON))
}

fn criterion_4() -> Outcome {
    let id = "4 unitary-limit recovery";
    let run = || -> oqpc::Result<f64> {
        let cfg = preset_scenario("fig1", "unitary");
        let pulse = cfg.pulse.resolve()?.unwrap();
        let grid = TimeGrid::covering(30.0, cfg.dt)?;
        let tab = GreensTable::new(&SpectralDensity::OhmicDrude { gamma: 1e-8, omega_d: 1.0 }, cfg.beta, grid)?;
        let prop = Propagator::new(&tab, &pulse)?;
        let mut worst: f64 = 0.0;
        for k in 0..grid.len {
            let j = prop.tensor(k, [4, 4, 2, 2])?;
            for n in 0..4 {
                let u = unitary_elements(&pulse, n, grid.t(k))?;
                worst = worst
                    .max((j.get(n, n, 0, 0).re - u.j_nn00).abs())
                    .max((j.get(n, n, 0, 1) - u.j_nn01).norm())
                    .max((j.get(n, n, 1, 1).re - u.j_nn11).abs());
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => outcome(id, w < 1e-6, format!("max abs deviation over t in [0, 30], n < 4: {w:.2e}")),
        Err(e) => failed(id, e),
    }
}

fn criterion_5() -> (Outcome, Outcome) {
    let cfg = preset_scenario("fig1", "unitary");
    let pulse = cfg.pulse.resolve().unwrap().unwrap();
    let late = pulse.support().1 + 10.0;
    let u = unitary_elements(&pulse, 0, late).unwrap();
    let ft = pulse.windowed_transform(OMEGA0, f64::INFINITY).unwrap();
    let x = ft.norm_sqr() / (FIELD_SCALE * FIELD_SCALE);
    let r = rel(u.j_nn11, x);
    let a = outcome(
        "5a J00;11(inf) = |FT|^2/E0^2",
        r < 1e-6,
        format!("J00;11 {:.9e}, |FT|^2/E0^2 {x:.9e}, relative {r:.2e} (exact element is x exp(-x))", u.j_nn11),
    );
    let s = (u.j_nn00 + u.j_nn11 - 1.0).abs();
    let b = outcome("5b J00;00 + J00;11 = 1", s < 1e-6, format!("|sum - 1| {s:.2e}"));
    (a, b)
}

fn criterion_6(floor: f64) -> Outcome {
    let id = "6 open-system control";
    let mut posts = Vec::new();
    let mut tails = Vec::new();
    for g in COUPLINGS {
        match ground_contrast(&preset_scenario("fig4", &format!("gamma-{g}"))) {
            Ok((c, p)) => {
                posts.push(c.window_max(p.t0 + p.delta_t, 30.0));
                tails.push(c.window_max(60.0, c.times[c.times.len() - 1]));
            }
            Err(e) => return failed(id, e),
        }
    }
    let strongest = posts[2];
    let ordered = posts.windows(2).all(|w| w[0] < w[1]);
    let decayed = tails.iter().all(|&t| t < 1e-6);
    let ok = strongest > 100.0 * floor && ordered && decayed;
    let detail = format!(
        "post [14, 30] {:.2e} < {:.2e} < {:.2e} ({}); gamma 0.05 / noise floor {:.1e}; tail [60, 100] max {:.2e}",
        posts[0],
        posts[1],
        posts[2],
        if ordered { "increasing" } else { "NOT increasing" },
        strongest / floor,
        tails.iter().cloned().fold(0.0, f64::max)
    );
    outcome(id, ok, detail)
}

fn criterion_7() -> Outcome {
    let id = "7 Markovian/non-Markovian ordering";
    let mut short = Vec::new();
    let mut tail = Vec::new();
    for label in ["wd-1", "wd-100"] {
        match ground_contrast(&preset_scenario("fig6", label)) {
            Ok((c, p)) => {
                short.push(c.window_max(p.t0 + p.delta_t, 30.0));
                tail.push(c.window_max(60.0, 100.0));
            }
            Err(e) => return failed(id, e),
        }
    }
    let ok = short[1] > short[0] && tail[0] > tail[1];
    let detail = format!(
        "[14, 30]: wd=100 {:.2e} vs wd=1 {:.2e}; [60, 100]: wd=1 {:.2e} vs wd=100 {:.2e}",
        short[1], short[0], tail[0], tail[1]
    );
    outcome(id, ok, detail)
}

fn criterion_8() -> Outcome {
    let s = 0.1;
    let wd = 1.0;
    let b = SpectralDensity::SubOhmic { gamma: 0.05, omega_ph: 1.0, omega_d: wd, s };
    let k0 = b.dissipative_kernel(0.0);
    let t = 0.01 / wd;
    let quad = (1.0 - b.dissipative_kernel(t) / k0) / (t * t);
    let want = 0.5 * s * (1.0 + s) * wd * wd;
    let r = rel(quad, want);
    let t_long = 100.0 / wd;
    let tail =
        (b.dissipative_kernel(t_long) / k0 * (wd * t_long).powf(s) - (std::f64::consts::FRAC_PI_2 * s).cos()).abs();
    outcome(
        "8 sub-Ohmic kernel asymptotics",
        r < 0.01 && tail < 0.01,
        format!("quadratic coefficient {quad:.6} vs {want:.6} ({:.3}%); long-time deviation {tail:.2e}", 100.0 * r),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    match default_suite() {
        Ok(results) => {
            let secs = start.elapsed().as_secs_f64();
            let bad: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            let ok = all_passed(&results) && secs < 300.0;
            let detail = if bad.is_empty() {
                format!("{} checks green in {secs:.1}s", results.len())
            } else {
                format!("failing: {} ({secs:.1}s)", bad.join(", "))
            };
            outcome("9 structural invariant suite", ok, detail)
        }
        Err(e) => failed("9 structural invariant suite", e),
    }
}

fn criterion_10() -> Outcome {
    let id = "10 oracle equivalences";
    let run = || -> oqpc::Result<(f64, f64, f64)> {
        let model = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 };
        let res = ResidueForm::drude(0.05, 1.0)?;
        let (g, gd, _) = volterra_green(&model, 0.01, 5001);
        let dg = (0..5001)
            .map(|k| {
                let t = k as f64 * 0.01;
                (g[k] - res.g(t)).abs().max((gd[k] - res.g_dot(t)).abs())
            })
            .fold(0.0, f64::max);

        let cfg = preset_scenario("fig4", "gamma-0.05");
        let grid = TimeGrid::covering(30.0, cfg.dt)?;
        let tab = GreensTable::new(&cfg.bath, cfg.beta, grid)?;
        let ds = [0usize, 50, 700, 1500, 3000]
            .iter()
            .map(|&k| {
                let (s, sd) = spectral_correlation(0.05, 1.0, cfg.beta, grid.t(k));
                (tab.s[k] - s).abs().max((tab.s_dot[k] - sd).abs())
            })
            .fold(0.0, f64::max);

        let prop = Propagator::new(&tab, &cfg.pulse.resolve()?.unwrap())?;
        let mut dj: f64 = 0.0;
        for k in [1usize, 400, 1000, 1400, 2200, 3000] {
            dj = dj
                .max((prop.j_general([0, 0, 0, 0], k)?.re - prop.j_0000(k)?).abs())
                .max((prop.j_general([0, 0, 2, 0], k)? - prop.j_0020(k)?).norm());
        }
        Ok((dg, ds, dj))
    };
    match run() {
        Ok((dg, ds, dj)) => outcome(
            id,
            dg < 1e-8 && ds < 1e-6 && dj < 1e-8,
            format!("residue vs Volterra {dg:.1e}; Matsubara vs spectral {ds:.1e}; quadrature vs closed form {dj:.1e}"),
        ),
        Err(e) => failed(id, e),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (c3, floor) = criterion_3();
    let (c5a, c5b) = criterion_5();
    let all = vec![
        criterion_1(),
        criterion_2(),
        c3,
        criterion_4(),
        c5a,
        c5b,
        criterion_6(floor),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ];
    println!();
    for o in &all {
        println!("[{}] criterion {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.detail);
    }
    let n_fail = all.iter().filter(|o| !o.passed).count();
    println!("\nacceptance: {} passed, {n_fail} failed ({:.0}s)", all.len() - n_fail, start.elapsed().as_secs_f64());
    if n_fail == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
