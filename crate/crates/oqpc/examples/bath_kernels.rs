//! Spectral densities, damping kernels and the Laplace-transformed friction.

use oqpc::bath::SpectralDensity;

fn main() -> oqpc::Result<()> {
    let baths = [
        ("ohmic-drude", SpectralDensity::OhmicDrude { gamma: 0.05, omega_d: 1.0 }),
        ("sub-ohmic", SpectralDensity::SubOhmic { gamma: 0.05, omega_ph: 1.0, omega_d: 1.0, s: 0.1 }),
    ];
    for (name, b) in baths {
        b.validate()?;
        println!("{name}: K(0) = {:.6}", b.kernel_at_zero());
        println!("{:>6} {:>14} {:>14} {:>14}", "w|t", "J(w)", "K(t)", "int K");
        for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
            println!(
                "{x:>6} {:>14.6e} {:>14.6e} {:>14.6e}",
                b.spectral_density(x),
                b.dissipative_kernel(x),
                b.kernel_integral(x)
            );
        }
        for nu in [0.1, 1.0, 10.0] {
            println!("  gamma_hat({nu}) = {:.6e}", b.laplace_gamma_real(nu)?);
        }
    }
    Ok(())
}
