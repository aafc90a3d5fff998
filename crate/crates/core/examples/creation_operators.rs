//! Symbolic creation operators: expansion into A1/B1/B2 words and the
//! exchange symmetry under swapping spectral points.

use elliptika::bethe::phi_build;
use elliptika::bethe::phi_symmetry_residual;
use elliptika::dynalg::LatticeFn;
use elliptika::repspace::{chain, default_sites};
use elliptika::sampling::stream;
use elliptika::ModularParams;
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let us = [Complex64::new(0.12, 0.03), Complex64::new(-0.21, 0.08), Complex64::new(0.33, -0.05)];
    for n in 1..=3 {
        let poly = phi_build(&us[..n])?;
        println!("Phi_{n}: {} words", poly.words.len());
        for w in &poly.words {
            println!("  {w}");
        }
    }

    let p = ModularParams::default();
    let rep = chain(&default_sites(2), p)?;
    let q0 = Complex64::new(0.137, 0.45);
    let mut rng = stream(11, "creation-example");
    let inputs: Vec<LatticeFn> =
        (0..4).map(|_| LatticeFn::random(&mut rng, rep.weights(), None, q0, p.step(), 12)).collect();
    for i in 1..3 {
        println!("swap {i},{}: {:.3e}", i + 1, phi_symmetry_residual(&us, i, &rep, &inputs)?);
    }
    Ok(())
}
