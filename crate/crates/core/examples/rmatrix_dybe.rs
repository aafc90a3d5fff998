//! Build R(q, u), print its nonzero entries and check the dynamical
//! Yang-Baxter equation and unitarity.

use elliptika::rmatrix::{dybe_residual, nonzero_count, r_build, unitarity_residual};
use elliptika::ModularParams;
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let p = ModularParams::default();
    let (q, u) = (Complex64::new(0.137, 0.45), Complex64::new(0.21, -0.07));
    let r = r_build(q, u, &p)?;
    println!("{} nonzero entries", nonzero_count(&r));
    for a in 0..9 {
        for b in 0..9 {
            let x = r.matrix[(a, b)];
            if x.norm() > 0.0 {
                println!("  R[{a}][{b}] = {x:.12}");
            }
        }
    }
    println!("unitarity residual {:.3e}", unitarity_residual(q, u, &p)?);
    let u2 = Complex64::new(-0.33, 0.12);
    println!("DYBE residual      {:.3e}", dybe_residual(q, u, u2, &p)?);
    Ok(())
}
