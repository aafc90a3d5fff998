//! Two magnons on a two-site chain: solve the Bethe equations, build the
//! state and check it is an eigenvector of the transfer matrix.

use elliptika::bethe::{bethe_residual_n2, eigencheck, magnon_vacuum, solve_bethe, SolveOptions, U_SAMPLES};
use elliptika::repspace::{chain, default_sites};
use elliptika::ModularParams;
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let rep = chain(&default_sites(2), ModularParams::default())?;
    let vac = magnon_vacuum(&rep, 2, Complex64::new(0.137, 0.45), 12)?;
    let roots = solve_bethe(2, &vac, None, &SolveOptions::default())?;
    let (u1, u2) = (roots.roots[0], roots.roots[1]);
    println!("roots {u1:.12}, {u2:.12}");
    let [r1, r2] = bethe_residual_n2(u1, u2, 0, &vac)?;
    println!("|r1| = {:.3e}  |r2| = {:.3e}", r1.norm(), r2.norm());
    let check = eigencheck(&vac, &roots.roots, &U_SAMPLES)?;
    println!("eigen residual {:.3e}  spread {:.3e}", check.residual, check.spread);
    println!("{}", serde_json::to_string(&roots)?);
    Ok(())
}
