//! Commuting transfer matrices on the zero-weight sector, and what
//! happens off it.

use elliptika::repspace::{chain, default_sites};
use elliptika::sampling::stream;
use elliptika::transfer::{commutator_residual, random_inputs, weight_leakage};
use elliptika::ModularParams;
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let p = ModularParams::default();
    let q0 = Complex64::new(0.137, 0.45);
    let (u, v) = (Complex64::new(0.31, 0.02), Complex64::new(-0.12, 0.09));
    let mut rng = stream(3, "transfer-example");
    for n in [2, 3] {
        let rep = chain(&default_sites(n), p)?;
        let zero = random_inputs(&mut rng, &rep, 0, q0, 12, 4)?;
        let one = random_inputs(&mut rng, &rep, 1, q0, 12, 4)?;
        println!("N = {n}");
        println!("  [t(u), t(v)] on weight 0: {:.3e}", commutator_residual(&rep, u, v, &zero)?);
        println!("  [t(u), t(v)] on weight 1: {:.3e}", commutator_residual(&rep, u, v, &one)?);
        println!("  weight leakage:           {:.3e}", weight_leakage(&rep, u, &zero[0], 0)?);
    }
    Ok(())
}
