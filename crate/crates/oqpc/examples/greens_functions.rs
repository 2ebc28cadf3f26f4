//! Green's function G+ and symmetric correlation S on a grid, for the closed-form Drude
//! route and the Volterra route used for sub-Ohmic baths.

use oqpc::bath::SpectralDensity;
use oqpc::greens::GreensTable;
use oqpc::grid::TimeGrid;

fn main() -> oqpc::Result<()> {
    let grid = TimeGrid::covering(40.0, 0.01)?;
    let drude = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 };
    let sub = SpectralDensity::SubOhmic { gamma: 0.05, omega_ph: 1.0, omega_d: 1.0, s: 0.1 };
    for (name, model) in [("drude", drude), ("sub-ohmic", sub)] {
        let tab = GreensTable::new(&model, 40.0, grid)?;
        println!("{name}: <q^2> = {:.10}, <p^2> = {:.10}", tab.q2, tab.p2);
        if let Some(r) = tab.residues() {
            println!("  closed form available, G(5) = {:.10}", r.g(5.0));
        }
        for t in [0.0, 5.0, 10.0, 20.0, 40.0] {
            let k = (t / grid.dt).round() as usize;
            println!("  t = {t:>4}: G {:+.6e}  G' {:+.6e}  S {:+.6e}", tab.g[k], tab.g_dot[k], tab.s[k]);
        }
    }
    Ok(())
}
