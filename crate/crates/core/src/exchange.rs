//! Exchange relations of the operator algebra: the `RLL` relation written
//! entrywise in terms of shift operators, and the commutation relations among
//! `A₁`, `B₁`, `B₂` used to build Bethe states.

use num_complex::Complex64;

use crate::dynalg::{DynOp, LatticeFn};
use crate::error::Result;
use crate::linalg::max_abs;
use crate::repspace::{lax_to_dynops, LaxOps, Rep};
use crate::rmatrix::{pair, r_build, WEIGHTS};

/// Both sides of the `(ik, jl)` entry of
/// `R⁽¹²⁾(q − 2ηh, u₁₂) L⁽¹⁾(u₁) L⁽²⁾(u₂) = L⁽²⁾(u₂) L⁽¹⁾(u₁) R̃⁽¹²⁾(q, u₁₂)`,
/// where `h` is the weight of `W` and `R̃_{mn,jl}(q) = R_{mn,jl}(q + 2η(w_m + w_n))`.
pub fn rllti_sides(
    rep: &Rep,
    l1: &LaxOps,
    l2: &LaxOps,
    (i, k): (usize, usize),
    (j, l): (usize, usize),
) -> Result<(DynOp, DynOp)> {
    let p = *rep.params();
    let step = p.step();
    let grading = rep.weights().clone();
    let u12 = l1.u - l2.u;
    let mut lhs = DynOp::zero(grading.clone(), step);
    let mut rhs = DynOp::zero(grading.clone(), step);
    for m in 0..3 {
        for n in 0..3 {
            let w = grading.clone();
            let left = DynOp::term(
                grading.clone(),
                step,
                0,
                std::sync::Arc::new(move |q| {
                    let mut cache: Vec<(i32, Complex64)> = Vec::new();
                    let mut diag = Vec::with_capacity(w.len());
                    for &lam in w.iter() {
                        let v = match cache.iter().find(|(l, _)| *l == lam) {
                            Some(&(_, v)) => v,
                            None => {
                                let v = r_build(q - step * f64::from(lam), u12, &p)?.matrix[(pair(i, k), pair(m, n))];
                                cache.push((lam, v));
                                v
                            }
                        };
                        diag.push(v);
                    }
                    Ok(crate::linalg::diag(diag))
                }),
            );
            lhs = lhs.add(&left.mul(l1.get(m, j))?.mul(l2.get(n, l))?)?;
            let shift = step * f64::from(WEIGHTS[m] + WEIGHTS[n]);
            let right = DynOp::scalar(grading.clone(), step, move |q| {
                Ok(r_build(q + shift, u12, &p)?.matrix[(pair(m, n), pair(j, l))])
            });
            rhs = rhs.add(&l2.get(k, n).mul(l1.get(i, m))?.mul(&right)?)?;
        }
    }
    Ok((lhs, rhs))
}

/// Largest coefficient discrepancy of the entrywise `RLL` relation over all
/// 81 entries, every shift and the given sample points.
pub fn rllti_residual(rep: &Rep, u1: Complex64, u2: Complex64, qs: &[Complex64]) -> Result<f64> {
    let l1 = lax_to_dynops(rep, u1);
    let l2 = lax_to_dynops(rep, u2);
    let mut worst = 0.0_f64;
    for ik in 0..9 {
        for jl in 0..9 {
            let (lhs, rhs) = rllti_sides(rep, &l1, &l2, (ik / 3, ik % 3), (jl / 3, jl % 3))?;
            let diff = lhs.sub(&rhs)?;
            for s in diff.shifts().collect::<Vec<_>>() {
                for &q in qs {
                    worst = worst.max(max_abs(&diff.coeff(s, q)?));
                }
            }
        }
    }
    Ok(worst)
}

/// The commutation relations among `A₁`, `B₁`, `B₂` at two spectral points.
/// Scalar coefficients multiply from the left; `X₂₁` is evaluated at
/// `u₂ − u₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CommRel {
    /// `B₁(u₁)B₁(u₂) = ω₂₁(B₁(u₂)B₁(u₁) − B₂(u₂)A₁(u₁)/y₂₁(q)) + B₂(u₁)A₁(u₂)/y₁₂(q)`
    B1B1,
    /// `A₁(u₁)B₁(u₂) = z₂₁(q)B₁(u₂)A₁(u₁) − α₂₁(η,q)/β₂₁(q,η) B₁(u₁)A₁(u₂)`
    A1B1,
    /// `A₁(u₁)B₂(u₂) = (g₂₁B₂(u₂)A₁(u₁) + γ₂₁(η,−q)B₁(u₁)B₁(u₂) − δ₂₁(−q)B₂(u₁)A₁(u₂))/γ₂₁(q,−q)`
    A1B2,
    /// `B₁(u₂)B₂(u₁) = (β₂₁(−q,η)B₂(u₁)B₁(u₂) + α₂₁(η,−q)B₁(u₁)B₂(u₂))/g₂₁`
    B1B2,
    /// `B₂(u₂)B₁(u₁) = (β₂₁(η,−q)B₁(u₁)B₂(u₂) + α₂₁(−q,η)B₂(u₁)B₁(u₂))/g₂₁`
    B2B1,
}

impl CommRel {
    pub const ALL: [CommRel; 5] = [CommRel::B1B1, CommRel::A1B1, CommRel::A1B2, CommRel::B1B2, CommRel::B2B1];

    pub fn name(self) -> &'static str {
        match self {
            CommRel::B1B1 => "B1B1",
            CommRel::A1B1 => "A1B1",
            CommRel::A1B2 => "A1B2",
            CommRel::B1B2 => "B1B2",
            CommRel::B2B1 => "B2B1",
        }
    }

    /// Left and right hand sides as operators.
    pub fn sides(self, rep: &Rep, u1: Complex64, u2: Complex64) -> Result<(DynOp, DynOp)> {
        let p = *rep.params();
        let eta = p.eta;
        let (x, y) = (lax_to_dynops(rep, u1), lax_to_dynops(rep, u2));
        let u21 = u2 - u1;
        let s = |f: Box<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>| x.a1().scalar_like(f);
        let mul = |a: &DynOp, b: &DynOp| a.mul(b);
        Ok(match self {
            CommRel::B1B1 => {
                let w = p.omega(u21)?;
                let inner = mul(y.b1(), x.b1())?
                    .sub(&mul(&s(Box::new(move |q| Ok(1.0 / p.y(q, u21)?))), &mul(y.b2(), x.a1())?)?)?;
                let rhs =
                    inner.scale(w).add(&mul(&s(Box::new(move |q| Ok(1.0 / p.y(q, -u21)?))), &mul(x.b2(), y.a1())?)?)?;
                (mul(x.b1(), y.b1())?, rhs)
            }
            CommRel::A1B1 => {
                let rhs = mul(&s(Box::new(move |q| p.z(q, u21))), &mul(y.b1(), x.a1())?)?.sub(&mul(
                    &s(Box::new(move |q| Ok(p.alpha(eta, q, u21)? / p.beta(q, eta, u21)?))),
                    &mul(x.b1(), y.a1())?,
                )?)?;
                (mul(x.a1(), y.b1())?, rhs)
            }
            CommRel::A1B2 => {
                let g = p.g(u21)?;
                let inner = mul(y.b2(), x.a1())?
                    .scale(g)
                    .add(&mul(&s(Box::new(move |q| p.gamma(eta, -q, u21))), &mul(x.b1(), y.b1())?)?)?
                    .sub(&mul(&s(Box::new(move |q| p.delta(-q, u21))), &mul(x.b2(), y.a1())?)?)?;
                let rhs = mul(&s(Box::new(move |q| Ok(1.0 / p.gamma(q, -q, u21)?))), &inner)?;
                (mul(x.a1(), y.b2())?, rhs)
            }
            CommRel::B1B2 => {
                let g = p.g(u21)?;
                let rhs = mul(&s(Box::new(move |q| p.beta(-q, eta, u21))), &mul(x.b2(), y.b1())?)?
                    .add(&mul(&s(Box::new(move |q| p.alpha(eta, -q, u21))), &mul(x.b1(), y.b2())?)?)?
                    .scale(1.0 / g);
                (mul(y.b1(), x.b2())?, rhs)
            }
            CommRel::B2B1 => {
                let g = p.g(u21)?;
                let rhs = mul(&s(Box::new(move |q| p.beta(eta, -q, u21))), &mul(x.b1(), y.b2())?)?
                    .add(&mul(&s(Box::new(move |q| p.alpha(-q, eta, u21))), &mul(x.b2(), y.b1())?)?)?
                    .scale(1.0 / g);
                (mul(y.b2(), x.b1())?, rhs)
            }
        })
    }

    /// `‖(lhs − rhs) f‖ / ‖f‖` for each input.
    pub fn residuals(self, rep: &Rep, u1: Complex64, u2: Complex64, inputs: &[LatticeFn]) -> Result<Vec<f64>> {
        let (lhs, rhs) = self.sides(rep, u1, u2)?;
        let out = lhs.sub(&rhs)?.apply_all(inputs)?;
        Ok(out.iter().zip(inputs).map(|(o, f)| o.sup_norm() / f.sup_norm()).collect())
    }

    /// Largest of [`Self::residuals`].
    pub fn residual(self, rep: &Rep, u1: Complex64, u2: Complex64, inputs: &[LatticeFn]) -> Result<f64> {
        Ok(self.residuals(rep, u1, u2, inputs)?.into_iter().fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::ModularParams;
    use crate::repspace::{chain, default_sites};
    use crate::sampling::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn inputs(rep: &Rep, count: usize) -> Vec<LatticeFn> {
        let mut rng = stream(7, "exchange");
        (0..count)
            .map(|_| LatticeFn::random(&mut rng, rep.weights(), None, c(0.137, 0.043), rep.params().step(), 6))
            .collect()
    }

    #[test]
    fn rllti_holds_on_one_site() {
        let rep = chain(&default_sites(1), ModularParams::default()).unwrap();
        let qs = [c(0.137, 0.043), c(-0.21, 0.11)];
        let r = rllti_residual(&rep, c(0.21, 0.03), c(-0.12, 0.05), &qs).unwrap();
        assert!(r < 1e-8, "{r}");
    }

    #[test]
    fn commutation_relations_two_sites() {
        let rep = chain(&default_sites(2), ModularParams::default()).unwrap();
        let fs = inputs(&rep, 3);
        for rel in CommRel::ALL {
            let r = rel.residual(&rep, c(0.21, 0.03), c(-0.12, 0.05), &fs).unwrap();
            assert!(r < 1e-8, "{}: {r}", rel.name());
        }
    }

    #[test]
    fn swapped_spectral_labels_of_a1b2_fail() {
        // With A₁(u₂) and A₁(u₁) on the B₂ words the relation breaks.
        let p = ModularParams::default();
        let rep = chain(&default_sites(2), p).unwrap();
        let (u1, u2) = (c(0.21, 0.03), c(-0.12, 0.05));
        let u21 = u2 - u1;
        let (x, y) = (lax_to_dynops(&rep, u1), lax_to_dynops(&rep, u2));
        let eta = p.eta;
        let inner = y
            .b2()
            .mul(y.a1())
            .unwrap()
            .scale(p.g(u21).unwrap())
            .add(&x.a1().scalar_like(move |q| p.gamma(eta, -q, u21)).mul(&x.b1().mul(y.b1()).unwrap()).unwrap())
            .unwrap()
            .sub(&x.a1().scalar_like(move |q| p.delta(-q, u21)).mul(&x.b2().mul(x.a1()).unwrap()).unwrap())
            .unwrap();
        let rhs = x.a1().scalar_like(move |q| Ok(1.0 / p.gamma(q, -q, u21)?)).mul(&inner).unwrap();
        let lhs = x.a1().mul(y.b2()).unwrap();
        let f = &inputs(&rep, 1)[0];
        let r = lhs.sub(&rhs).unwrap().apply(f).unwrap().sup_norm() / f.sup_norm();
        assert!(r > 1e-3, "{r}");
    }
}
