//! Population contrast between +chi and -chi for a thermally correlated initial state.

use oqpc::bath::SpectralDensity;
use oqpc::dynamics::{phase_contrast, InitialState, Observable};
use oqpc::greens::GreensTable;
use oqpc::grid::TimeGrid;
use oqpc::pulse::PulseParams;

fn main() -> oqpc::Result<()> {
    let pulse = PulseParams::new(1.0, 10.0, 10.0, 4.0, 2.5)?.with_spectral_ratio(0.003415)?;
    let grid = TimeGrid::covering(40.0, 0.01)?;
    let indices: Vec<usize> = (0..grid.len).step_by(10).collect();
    for gamma in [0.0, 0.05] {
        let model = SpectralDensity::OhmicDrude { gamma, omega_d: 1.0 };
        let tab = GreensTable::new(&model, 40.0, grid)?;
        let rho = InitialState::Stationary.build(&tab, 12)?;
        let c = phase_contrast(&tab, &pulse, &rho, &Observable::Population { level: 0 }, &indices)?;
        let (_, end) = pulse.support();
        println!(
            "gamma = {gamma}: max |dP0| during [14, {end:.1}] {:.3e}, after {:.3e}",
            c.window_max(14.0, end),
            c.window_max(end, 40.0)
        );
    }
    Ok(())
}
