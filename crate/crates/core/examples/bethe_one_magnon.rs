//! One magnon on a single site: locate the root from a grid scan and
//! confirm the eigenvector property.

use elliptika::bethe::{eigencheck, magnon_vacuum, solve_bethe, SolveOptions, U_SAMPLES};
use elliptika::repspace::{chain, default_sites};
use elliptika::ModularParams;
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let rep = chain(&default_sites(1), ModularParams::default())?;
    let vac = magnon_vacuum(&rep, 1, Complex64::new(0.137, 0.45), 12)?;
    let roots = solve_bethe(1, &vac, None, &SolveOptions::default())?;
    println!("root u1 = {:.12}", roots.roots[0]);
    let check = eigencheck(&vac, &roots.roots, &U_SAMPLES)?;
    for (u, l) in U_SAMPLES.iter().zip(&check.lambdas) {
        println!("  Lambda({u:.3}) = {l:.10}");
    }
    println!("residual {:.3e}  spread {:.3e}", check.residual, check.spread);
    Ok(())
}
