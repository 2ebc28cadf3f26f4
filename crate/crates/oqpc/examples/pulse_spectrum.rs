//! Chirped pulse: field samples, spectral phase at the oscillator frequency, and the
//! amplitude calibration used by the figure presets.

use oqpc::pulse::PulseParams;
use oqpc::{FIELD_SCALE, OMEGA0};

fn main() -> oqpc::Result<()> {
    let shape = PulseParams::new(1.0, 10.0, 10.0, 4.0, 2.5)?;
    let pulse = shape.with_spectral_ratio(0.003415)?;
    println!("e0 = {:.15}", pulse.e0);
    let (lo, hi) = pulse.support();
    println!("support [{lo:.3}, {hi:.3}]");

    for t in [6.0, 8.0, 10.0, 12.0, 14.0] {
        println!("E({t:>4}) = {:+.6e}", pulse.field_at(t));
    }
    for p in [pulse, pulse.mirrored()] {
        let (phase, amp) = p.spectral_phase_amplitude(OMEGA0)?;
        println!("chi = {:+}: phase {phase:+.6}, |FT|/scale {:.6e}", p.chirp, amp / FIELD_SCALE);
    }
    // windowed transform approaching the full one once the pulse is over
    for t in [10.0, 14.0, 18.0, 30.0] {
        let w = pulse.windowed_transform(OMEGA0, t)?;
        println!("FT(omega0; t = {t:>4}) = {:+.6e} {:+.6e}i", w.re, w.im);
    }
    Ok(())
}
