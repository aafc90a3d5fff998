//! Transfer matrices `t(u) = A₁(u) + A₂(u) + A₃(u)` and their action on the
//! zero-weight sector.

use num_complex::Complex64;
use rand::Rng;

use crate::dynalg::{DynOp, LatticeFn};
use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::repspace::{lax_to_dynops, weight_basis, Rep};

#[derive(Clone, Debug)]
pub struct TransferOp {
    pub u: Complex64,
    pub op: DynOp,
}

impl TransferOp {
    pub fn apply(&self, f: &LatticeFn) -> Result<LatticeFn> {
        Ok(self.op.apply(f)?.with_weight(f.weight))
    }
}

pub fn transfer_op(rep: &Rep, u: Complex64) -> Result<TransferOp> {
    let l = lax_to_dynops(rep, u);
    let op = l.a1().add(l.a2())?.add(l.a3())?;
    Ok(TransferOp { u, op })
}

/// Standard basis vectors spanning the weight-zero subspace of `W`.
pub fn zero_weight_basis(rep: &Rep) -> Result<Vec<CVec>> {
    let idx = weight_basis(rep, 0);
    if idx.is_empty() {
        return Err(Error::EmptyWeightSpace(0));
    }
    Ok(idx
        .into_iter()
        .map(|i| {
            let mut v = CVec::zeros(rep.dim());
            v[i] = crate::linalg::ONE;
            v
        })
        .collect())
}

/// Largest `‖[t(u), t(v)] f‖ / ‖f‖` over the inputs.
pub fn commutator_residual(rep: &Rep, u: Complex64, v: Complex64, inputs: &[LatticeFn]) -> Result<f64> {
    if u == v {
        return Ok(0.0);
    }
    let tu = transfer_op(rep, u)?.op;
    let tv = transfer_op(rep, v)?.op;
    let comm = tu.mul(&tv)?.sub(&tv.mul(&tu)?)?;
    let out = comm.apply_all(inputs)?;
    Ok(out.iter().zip(inputs).fold(0.0_f64, |acc, (o, f)| acc.max(o.sup_norm() / f.sup_norm())))
}

/// Random lattice functions valued in the weight-`m` subspace.
pub fn random_inputs<R: Rng + ?Sized>(
    rng: &mut R,
    rep: &Rep,
    m: i32,
    q0: Complex64,
    half_width: i32,
    count: usize,
) -> Result<Vec<LatticeFn>> {
    if weight_basis(rep, m).is_empty() {
        return Err(Error::EmptyWeightSpace(m));
    }
    Ok((0..count)
        .map(|_| LatticeFn::random(rng, rep.weights(), Some(m), q0, rep.params().step(), half_width))
        .collect())
}

/// Largest component of `t(u) f` outside the weight space of `f`, relative
/// to `‖f‖`.
pub fn weight_leakage(rep: &Rep, u: Complex64, f: &LatticeFn, m: i32) -> Result<f64> {
    let out = transfer_op(rep, u)?.op.apply(f)?;
    Ok(out.weight_leakage(rep.weights(), m) / f.sup_norm())
}
