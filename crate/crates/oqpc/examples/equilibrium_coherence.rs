//! Stationary moments, the equivalent Gibbs Hamiltonian, and the <0|rho|2> coherence
//! over coupling and temperature.

use oqpc::bath::SpectralDensity;
use oqpc::equilibrium::{coherence_scan, effective_hamiltonian, second_moments, stationary_state};

fn main() -> oqpc::Result<()> {
    let model = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 };
    let beta = 40.0;
    let m = second_moments(&model, beta)?;
    println!("<q^2> = {:.12}  <p^2> = {:.12}  ({} terms)", m.q2, m.p2, m.terms);
    let h = effective_hamiltonian(m.q2, m.p2, beta)?;
    println!("m_eff = {:.8}  omega_eff = {:.8}", h.m_eff, h.omega_eff);
    let rho = stationary_state(m.q2, m.p2, 12)?;
    println!("rho_00 = {:.8}  rho_11 = {:.8}  rho_02 = {:+.8}", rho.get(0, 0).re, rho.get(1, 1).re, rho.get(0, 2).re);

    let gammas = [0.01, 0.05, 0.1];
    let temps = [0.025, 0.1, 0.5];
    let scan = coherence_scan(&model, &gammas, &temps, 12);
    for (g, row) in gammas.iter().zip(&scan.values) {
        let cells: Vec<String> = row.iter().map(|v| v.map_or("nan".into(), |x| format!("{x:+.4e}"))).collect();
        println!("gamma {g:<5} {}", cells.join("  "));
    }
    Ok(())
}
