//! Theta function values, quasiperiodicity and the four-term identity.

use elliptika::{ModularParams, Period};
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let p = ModularParams::default();
    let u = Complex64::new(0.3, 0.1);
    println!("theta({u}) = {:.15}", p.theta(u)?);
    println!("omega({u}) = {:.15}", p.omega(u)?);

    println!("u+1 residual   {:.3e}", p.quasi_period_residual(Period::One, u)?);
    println!("u+tau residual {:.3e}", p.quasi_period_residual(Period::Tau, u)?);

    let [v, x, y] = [Complex64::new(-0.21, 0.05), Complex64::new(0.11, -0.2), Complex64::new(0.4, 0.17)];
    println!("four-term residual {:.3e}", p.four_term_residual(u, v, x, y)?);
    Ok(())
}
