//! Lax operators of a two-site chain as shift operators: the RLL relation
//! and the exchange relations among A1, B1, B2.

use elliptika::dynalg::LatticeFn;
use elliptika::exchange::CommRel;
use elliptika::repspace::{chain, default_sites, rll_residual};
use elliptika::sampling::stream;
use elliptika::ModularParams;
use num_complex::Complex64;

fn main() -> elliptika::Result<()> {
    let p = ModularParams::default();
    let rep = chain(&default_sites(2), p)?;
    let q0 = Complex64::new(0.137, 0.45);
    let (u1, u2) = (Complex64::new(0.23, 0.05), Complex64::new(-0.14, 0.11));
    println!("RLL residual {:.3e}", rll_residual(&rep, q0, u1, u2)?);

    let mut rng = stream(7, "operator-algebra");
    let inputs: Vec<LatticeFn> =
        (0..4).map(|_| LatticeFn::random(&mut rng, rep.weights(), None, q0, p.step(), 10)).collect();
    for rel in CommRel::ALL {
        println!("{:<5} {:.3e}", rel.name(), rel.residual(&rep, u1, u2, &inputs)?);
    }
    Ok(())
}
