//! Isolated oscillator: displacement-operator elements for a chirped pulse and their
//! independence of the chirp sign once the pulse is over.

use oqpc::propagator::unitary_elements;
use oqpc::pulse::PulseParams;

fn main() -> oqpc::Result<()> {
    let pulse = PulseParams::new(1.0, 10.0, 10.0, 4.0, 2.5)?.with_spectral_ratio(0.003415)?;
    for t in [8.0, 10.0, 12.0, 30.0] {
        let plus = unitary_elements(&pulse, 0, t)?;
        let minus = unitary_elements(&pulse.mirrored(), 0, t)?;
        println!(
            "t = {t:>4}: J00;00 {:.15} / {:.15}   J00;11 {:.6e} / {:.6e}",
            plus.j_nn00, minus.j_nn00, plus.j_nn11, minus.j_nn11
        );
    }
    Ok(())
}
