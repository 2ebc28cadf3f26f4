//! Propagating-function elements J_{nm;nu mu}(t) for a driven, damped oscillator,
//! comparing closed-form and quadrature evaluations and the long-time limit.

use oqpc::bath::SpectralDensity;
use oqpc::greens::GreensTable;
use oqpc::grid::TimeGrid;
use oqpc::propagator::{long_time_quadratic_form, Propagator};
use oqpc::pulse::PulseParams;

fn main() -> oqpc::Result<()> {
    let model = SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 };
    let tab = GreensTable::new(&model, 40.0, TimeGrid::covering(60.0, 0.01)?)?;
    let pulse = PulseParams::new(1.0, 10.0, 10.0, 4.0, 2.5)?.with_spectral_ratio(0.003415)?;
    let prop = Propagator::new(&tab, &pulse)?;
    let resp = tab.field_response(&pulse)?;

    for t in [5.0, 10.0, 20.0, 60.0] {
        let k = (t / tab.grid.dt).round() as usize;
        let closed = prop.j_0020(k)?;
        let quad = prop.j_general([0, 0, 2, 0], k)?;
        println!(
            "t = {t:>4}: J0000 {:.12} (singular form {:.12})  J0020 {:+.6e}{:+.6e}i  quadrature diff {:.1e}",
            prop.j_0000(k)?,
            prop.j_0000_singular_form(k)?,
            closed.re,
            closed.im,
            (closed - quad).norm()
        );
        let (e_plus, e_minus) = resp.field_projections(&tab, k)?;
        let a = prop.a_matrix(k)?;
        println!(
            "          E^T A E = {:+.6e}  long-time form {:+.6e}",
            a.quadratic_form(e_plus, e_minus),
            long_time_quadratic_form(tab.q2, tab.p2, resp.x_c[k], resp.p_c[k])
        );
    }
    Ok(())
}
