//! Operators on `W`-valued functions of the dynamical parameter: finite sums
//! `Σ_k C_k(q) S^k` with `S = exp(-2η ∂_q)`, i.e. `(S f)(q) = f(q − 2η)`.
//!
//! Functions are sampled on the lattice `q₀ + 2ηℤ` ([`LatticeFn`]). Every
//! operator built from Lax matrix entries maps lattice functions to lattice
//! functions, so identities between such operators can be tested exactly on
//! a finite window of the lattice.
//!
//! Composition follows `(F S^a)(G S^b) = F(q) G(q − 2ηa) S^{a+b}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_vec, CMat, CVec, ONE, ZERO};

/// Coefficient of a single shift: `q ↦ C(q) ∈ End(W)`.
pub type CoeffFn = Arc<dyn Fn(Complex64) -> Result<CMat> + Send + Sync>;

/// Default bound on `|k|` for shift powers.
pub const DEFAULT_N_MAX: i32 = 8;

/// Points at which coefficients are sampled to determine operator weights.
const WEIGHT_PROBES: [Complex64; 3] =
    [Complex64::new(0.1234, 0.0567), Complex64::new(-0.2345, 0.0789), Complex64::new(0.3456, -0.0432)];

/// A finite sum of shift operators with `End(W)`-valued coefficients.
#[derive(Clone)]
pub struct DynOp {
    grading: Arc<[i32]>,
    step: Complex64,
    n_max: i32,
    terms: BTreeMap<i32, CoeffFn>,
}

impl fmt::Debug for DynOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DynOp")
            .field("dim", &self.dim())
            .field("shifts", &self.terms.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Result of [`DynOp::weight`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpWeight {
    /// `[h, op] = Δ op`.
    Definite(i32),
    /// Coefficients connect weight spaces with different differences.
    Mixed,
    /// Every sampled coefficient vanishes.
    Zero,
}

impl DynOp {
    /// The zero operator on functions valued in a space with the given
    /// weight grading.
    pub fn zero(grading: Arc<[i32]>, step: Complex64) -> Self {
        Self { grading, step, n_max: DEFAULT_N_MAX, terms: BTreeMap::new() }
    }

    /// Single term `C(q) S^shift`.
    pub fn term(grading: Arc<[i32]>, step: Complex64, shift: i32, coeff: CoeffFn) -> Self {
        let mut op = Self::zero(grading, step);
        op.terms.insert(shift, coeff);
        op
    }

    pub fn identity(grading: Arc<[i32]>, step: Complex64) -> Self {
        let dim = grading.len();
        Self::term(grading, step, 0, Arc::new(move |_| Ok(CMat::identity(dim, dim))))
    }

    /// Multiplication by a scalar function of `q`.
    pub fn scalar<F>(grading: Arc<[i32]>, step: Complex64, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        let dim = grading.len();
        Self::term(grading, step, 0, Arc::new(move |q| Ok(CMat::identity(dim, dim) * f(q)?)))
    }

    /// Operator with the same grading and step as `self`, multiplying by `f`.
    pub fn scalar_like<F>(&self, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self::scalar(self.grading.clone(), self.step, f).with_n_max(self.n_max)
    }

    pub fn with_n_max(mut self, n_max: i32) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn dim(&self) -> usize {
        self.grading.len()
    }

    pub fn grading(&self) -> &Arc<[i32]> {
        &self.grading
    }

    pub fn step(&self) -> Complex64 {
        self.step
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn shifts(&self) -> impl Iterator<Item = i32> + '_ {
        self.terms.keys().copied()
    }

    /// Smallest and largest shift present.
    pub fn shift_range(&self) -> Option<(i32, i32)> {
        let lo = *self.terms.keys().next()?;
        let hi = *self.terms.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `S^shift` at `q`; the zero matrix if the shift is absent.
    pub fn coeff(&self, shift: i32, q: Complex64) -> Result<CMat> {
        match self.terms.get(&shift) {
            Some(c) => c(q),
            None => Ok(CMat::zeros(self.dim(), self.dim())),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.grading != other.grading {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (&k, g) in &other.terms {
            let merged: CoeffFn = match terms.remove(&k) {
                Some(f) => {
                    let g = g.clone();
                    Arc::new(move |q| Ok(f(q)? + g(q)?))
                }
                None => g.clone(),
            };
            terms.insert(k, merged);
        }
        Ok(Self { terms, ..self.clone() })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&k, f)| {
                let f = f.clone();
                let g: CoeffFn = Arc::new(move |q| Ok(f(q)? * c));
                (k, g)
            })
            .collect();
        Self { terms, ..self.clone() }
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let step = self.step;
        let mut out = Self::zero(self.grading.clone(), step).with_n_max(self.n_max.max(other.n_max));
        for (&a, f) in &self.terms {
            for (&b, g) in &other.terms {
                let shift = a + b;
                if shift.abs() > out.n_max {
                    return Err(Error::ShiftOverflow { shift, bound: out.n_max });
                }
                let (f, g) = (f.clone(), g.clone());
                let offset = step * f64::from(a);
                let prod: CoeffFn = Arc::new(move |q| Ok(f(q)? * g(q - offset)?));
                out = out.add(&Self::term(self.grading.clone(), step, shift, prod))?;
            }
        }
        Ok(out)
    }

    /// Product of a sequence of operators, left to right.
    pub fn product<'a>(ops: impl IntoIterator<Item = &'a DynOp>) -> Result<Option<Self>> {
        let mut acc: Option<Self> = None;
        for op in ops {
            acc = Some(match acc {
                None => op.clone(),
                Some(a) => a.mul(op)?,
            });
        }
        Ok(acc)
    }

    /// `(op f)(q) = Σ_k C_k(q) f(q − 2ηk)` on the shrunk window.
    pub fn apply(&self, f: &LatticeFn) -> Result<LatticeFn> {
        let mut out = self.apply_all(std::slice::from_ref(f))?;
        Ok(out.pop().expect("one input, one output"))
    }

    /// Applies the operator to several functions sharing one lattice,
    /// evaluating every coefficient only once per lattice point.
    pub fn apply_all(&self, fs: &[LatticeFn]) -> Result<Vec<LatticeFn>> {
        let Some(first) = fs.first() else { return Ok(Vec::new()) };
        for f in fs {
            if f.dim() != self.dim() {
                return Err(Error::DimensionMismatch { left: self.dim(), right: f.dim() });
            }
            if f.lo != first.lo || f.hi() != first.hi() || f.q0 != first.q0 || f.step != first.step {
                return Err(Error::InvalidParams("lattice functions live on different windows".into()));
            }
        }
        if (first.step - self.step).norm() > 1e-15 * self.step.norm() {
            return Err(Error::InvalidParams("operator and function use different lattice steps".into()));
        }
        let (min_s, max_s) = self.shift_range().unwrap_or((0, 0));
        let lo = first.lo + max_s;
        let hi = first.hi() + min_s;
        if lo > hi {
            return Err(Error::WindowUnderflow { lo: first.lo, hi: first.hi(), min_shift: min_s, max_shift: max_s });
        }
        let mut outputs: Vec<Vec<CVec>> = vec![Vec::with_capacity((hi - lo + 1) as usize); fs.len()];
        for k in lo..=hi {
            let q = first.q_at(k);
            let mut acc = vec![CVec::zeros(self.dim()); fs.len()];
            for (&s, c) in &self.terms {
                let m = c(q)?;
                for (a, f) in acc.iter_mut().zip(fs) {
                    *a += &m * f.value(k - s).expect("index inside window");
                }
            }
            for (o, a) in outputs.iter_mut().zip(acc) {
                o.push(a);
            }
        }
        Ok(outputs
            .into_iter()
            .map(|values| LatticeFn { q0: first.q0, step: first.step, lo, values, weight: None })
            .collect())
    }

    /// The `Δ` with `[h_W, op] = Δ·op`, judged from the sparsity of the
    /// coefficients at a few probe points.
    pub fn weight(&self) -> OpWeight {
        let mut found: Option<i32> = None;
        for &q in &WEIGHT_PROBES {
            for c in self.terms.values() {
                let Ok(m) = c(q) else { continue };
                let scale = m.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
                if scale == 0.0 {
                    continue;
                }
                for r in 0..m.nrows() {
                    for col in 0..m.ncols() {
                        if m[(r, col)].norm() <= 1e-13 * scale {
                            continue;
                        }
                        let d = self.grading[r] - self.grading[col];
                        match found {
                            None => found = Some(d),
                            Some(prev) if prev != d => return OpWeight::Mixed,
                            Some(_) => {}
                        }
                    }
                }
            }
        }
        found.map_or(OpWeight::Zero, OpWeight::Definite)
    }
}

/// A `W`-valued function sampled at `q₀ + 2ηk`, `k ∈ [lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFn {
    pub q0: Complex64,
    pub step: Complex64,
    lo: i32,
    values: Vec<CVec>,
    /// Declared weight, if every value lies in one weight space.
    pub weight: Option<i32>,
}

impl LatticeFn {
    /// Sample `f(k, q)` for `k ∈ [-half_width, half_width]`.
    pub fn from_fn<F>(q0: Complex64, step: Complex64, half_width: i32, mut f: F) -> Result<Self>
    where
        F: FnMut(i32, Complex64) -> Result<CVec>,
    {
        let lo = -half_width;
        let values = (lo..=half_width).map(|k| f(k, q0 + step * f64::from(k))).collect::<Result<Vec<_>>>()?;
        Ok(Self { q0, step, lo, values, weight: None })
    }

    pub fn from_values(q0: Complex64, step: Complex64, lo: i32, values: Vec<CVec>) -> Self {
        Self { q0, step, lo, values, weight: None }
    }

    /// Random function with independent standard complex Gaussian-like
    /// entries (uniform in the unit square), supported on weight space `m`
    /// when `weight` is given.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        grading: &[i32],
        weight: Option<i32>,
        q0: Complex64,
        step: Complex64,
        half_width: i32,
    ) -> Self {
        let dim = grading.len();
        let values = (-half_width..=half_width)
            .map(|_| {
                CVec::from_fn(dim, |i, _| match weight {
                    Some(m) if grading[i] != m => ZERO,
                    _ => Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                })
            })
            .collect();
        Self { q0, step, lo: -half_width, values, weight }
    }

    pub fn with_weight(mut self, weight: Option<i32>) -> Self {
        self.weight = weight;
        self
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, |v| v.len())
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.values.len() as i32 - 1
    }

    pub fn window(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi()
    }

    pub fn q_at(&self, k: i32) -> Complex64 {
        self.q0 + self.step * f64::from(k)
    }

    pub fn value(&self, k: i32) -> Option<&CVec> {
        if k < self.lo {
            return None;
        }
        self.values.get((k - self.lo) as usize)
    }

    pub fn values(&self) -> impl Iterator<Item = (i32, &CVec)> {
        self.values.iter().enumerate().map(move |(i, v)| (self.lo + i as i32, v))
    }

    /// Pointwise map of the values.
    pub fn map<F: FnMut(i32, &CVec) -> CVec>(&self, mut f: F) -> Self {
        let values = self.values().map(|(k, v)| f(k, v)).collect();
        Self { values, ..self.clone() }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    /// Restriction to `[lo, hi]`, which must lie inside the window.
    pub fn restrict(&self, lo: i32, hi: i32) -> Option<Self> {
        if lo < self.lo || hi > self.hi() || lo > hi {
            return None;
        }
        let start = (lo - self.lo) as usize;
        let values = self.values[start..=start + (hi - lo) as usize].to_vec();
        Some(Self { lo, values, ..self.clone() })
    }

    /// Largest entry modulus over the window.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(max_abs_vec).fold(0.0, f64::max)
    }

    /// Largest pointwise entry difference on the common window; `None` when
    /// the windows do not overlap.
    pub fn sup_diff(&self, other: &Self) -> Option<f64> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        if lo > hi {
            return None;
        }
        Some((lo..=hi).map(|k| max_abs_vec(&(self.value(k).unwrap() - other.value(k).unwrap()))).fold(0.0, f64::max))
    }

    /// Pointwise linear combination `self + c·other` on the common window.
    pub fn axpy(&self, c: Complex64, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        if lo > hi {
            return None;
        }
        let values = (lo..=hi).map(|k| self.value(k).unwrap() + other.value(k).unwrap() * c).collect();
        Some(Self { lo, values, weight: None, ..self.clone() })
    }

    /// Largest modulus of any component outside weight space `m`.
    pub fn weight_leakage(&self, grading: &[i32], m: i32) -> f64 {
        self.values
            .iter()
            .flat_map(|v| v.iter().zip(grading).filter(|(_, &w)| w != m).map(|(z, _)| z.norm()))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grading() -> Arc<[i32]> {
        Arc::from(vec![1, 0, -1])
    }

    const STEP: Complex64 = Complex64::new(0.62, 0.0);

    /// Single-term operator with a polynomial matrix coefficient.
    fn poly_op(shift: i32, seed: f64) -> DynOp {
        DynOp::term(
            grading(),
            STEP,
            shift,
            Arc::new(move |q| {
                Ok(CMat::from_fn(3, 3, |i, j| {
                    c(seed + i as f64, 0.3 * j as f64) + q * c(0.1 * (i + j) as f64, seed) + q * q * 0.05
                }))
            }),
        )
    }

    fn random_fn(seed: u64) -> LatticeFn {
        let mut rng = stream(seed, "dynalg-test");
        LatticeFn::random(&mut rng, &grading(), None, c(0.137, 0.043), STEP, 8)
    }

    #[test]
    fn adding_zero_is_identity() {
        let a = poly_op(1, 0.4);
        let z = DynOp::zero(grading(), STEP);
        let f = random_fn(1);
        let s = a.add(&z).unwrap();
        assert_eq!(s.shifts().collect::<Vec<_>>(), vec![1]);
        assert_eq!(s.apply(&f).unwrap(), a.apply(&f).unwrap());
    }

    #[test]
    fn equal_shifts_merge() {
        let a = poly_op(1, 0.4);
        let b = poly_op(1, -0.7);
        let s = a.add(&b).unwrap();
        assert_eq!(s.shifts().count(), 1);
        let q = c(0.2, 0.1);
        let expect = a.coeff(1, q).unwrap() + b.coeff(1, q).unwrap();
        assert_eq!(s.coeff(1, q).unwrap(), expect);
    }

    #[test]
    fn product_uses_shifted_argument() {
        let a = poly_op(1, 0.4);
        let b = poly_op(-1, -0.7);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.shifts().collect::<Vec<_>>(), vec![0]);
        let q = c(0.2, 0.1);
        let expect = a.coeff(1, q).unwrap() * b.coeff(-1, q - STEP).unwrap();
        assert!((p.coeff(0, q).unwrap() - expect).norm() < 1e-14);
    }

    #[test]
    fn identity_is_two_sided_unit() {
        let a = poly_op(2, 0.4).add(&poly_op(-1, 0.2)).unwrap();
        let id = DynOp::identity(grading(), STEP);
        let f = random_fn(3);
        let base = a.apply(&f).unwrap();
        assert_eq!(id.mul(&a).unwrap().apply(&f).unwrap().sup_diff(&base), Some(0.0));
        assert_eq!(a.mul(&id).unwrap().apply(&f).unwrap().sup_diff(&base), Some(0.0));
        assert_eq!(id.apply(&f).unwrap(), f);
    }

    #[test]
    fn associativity_on_grid() {
        let (a, b, d) = (poly_op(1, 0.4), poly_op(-2, 0.9), poly_op(1, -0.3));
        let left = a.mul(&b).unwrap().mul(&d).unwrap();
        let right = a.mul(&b.mul(&d).unwrap()).unwrap();
        for k in -5..=5 {
            let q = c(0.137, 0.043) + STEP * f64::from(k);
            let diff = left.coeff(0, q).unwrap() - right.coeff(0, q).unwrap();
            let scale = left.coeff(0, q).unwrap().norm().max(1.0);
            assert!(diff.norm() / scale < 1e-12);
        }
    }

    #[test]
    fn apply_matches_definition_and_shrinks_window() {
        let a = poly_op(2, 0.4).add(&poly_op(-1, 0.2)).unwrap();
        let f = random_fn(4);
        let g = a.apply(&f).unwrap();
        assert_eq!(g.window(), -6..=7);
        for k in g.window() {
            let q = f.q_at(k);
            let expect =
                a.coeff(2, q).unwrap() * f.value(k - 2).unwrap() + a.coeff(-1, q).unwrap() * f.value(k + 1).unwrap();
            assert!((g.value(k).unwrap() - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn sequential_application_equals_product() {
        let (a, b) = (poly_op(1, 0.4).add(&poly_op(-1, 0.1)).unwrap(), poly_op(-2, 0.9));
        let f = random_fn(5);
        let seq = a.apply(&b.apply(&f).unwrap()).unwrap();
        let prod = a.mul(&b).unwrap().apply(&f).unwrap();
        assert!(seq.sup_diff(&prod).unwrap() < 1e-12 * seq.sup_norm().max(1.0));
    }

    #[test]
    fn window_underflow() {
        let a = poly_op(5, 0.4).add(&poly_op(-5, 0.1)).unwrap();
        let mut rng = stream(9, "dynalg-test");
        let f = LatticeFn::random(&mut rng, &grading(), None, c(0.1, 0.0), STEP, 4);
        assert!(matches!(a.apply(&f), Err(Error::WindowUnderflow { .. })));
    }

    #[test]
    fn shift_overflow() {
        let a = poly_op(5, 0.4);
        assert!(matches!(a.mul(&a), Err(Error::ShiftOverflow { shift: 10, .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let a = poly_op(0, 0.4);
        let b = DynOp::identity(Arc::from(vec![0]), STEP);
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn weight_of_raising_and_lowering_coefficients() {
        let lower: CoeffFn = Arc::new(|q| {
            let mut m = CMat::zeros(3, 3);
            m[(1, 0)] = q + 1.0;
            m[(2, 1)] = q * 2.0;
            Ok(m)
        });
        let op = DynOp::term(grading(), STEP, 0, lower);
        assert_eq!(op.weight(), OpWeight::Definite(-1));
        assert_eq!(DynOp::identity(grading(), STEP).weight(), OpWeight::Definite(0));
        assert_eq!(poly_op(0, 0.3).weight(), OpWeight::Mixed);
        assert_eq!(DynOp::zero(grading(), STEP).weight(), OpWeight::Zero);
    }
}
