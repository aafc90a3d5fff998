//! Bethe creation operators `Φₙ`, the gauge function of the pseudovacuum,
//! root finding for one and two magnons and the eigenvector check.
//!
//! `Φₙ` is kept as a list of words in `A₁(u_j)`, `B₁(u_j)`, `B₂(u_j)`, each
//! with a scalar coefficient acting from the left. Coefficients are signed
//! monomials in `ω`, `1/y` and `z`, so they can be inspected before any
//! representation is chosen.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynalg::{DynOp, LatticeFn};
use crate::elliptic::ModularParams;
use crate::error::{Error, Result};
use crate::linalg::{CVec, ONE};
use crate::repspace::{lax_to_dynops, pseudovacuum, Gauge, LaxOps, Rep, Vacuum};
use crate::transfer::transfer_op;

/// Generators appearing in `Φₙ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    A1,
    B1,
    B2,
}

impl Gen {
    /// Power of `S` carried by the generator.
    pub fn shift(self) -> i32 {
        match self {
            Gen::A1 => 1,
            Gen::B1 => 0,
            Gen::B2 => -1,
        }
    }

    pub fn weight(self) -> i32 {
        match self {
            Gen::A1 => 0,
            Gen::B1 => -1,
            Gen::B2 => -2,
        }
    }

    fn pick(self, l: &LaxOps) -> &DynOp {
        match self {
            Gen::A1 => l.a1(),
            Gen::B1 => l.b1(),
            Gen::B2 => l.b2(),
        }
    }
}

/// Generator evaluated at the spectral point with the given index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub point: usize,
}

/// Scalar factor of a word coefficient. Indices refer to spectral points;
/// `shift` means the argument `q + 2η·shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// `ω(u_a − u_b)`
    Omega { a: usize, b: usize },
    /// `1 / y(q + 2η·shift, u_a − u_b)`
    InvY { a: usize, b: usize, shift: i32 },
    /// `z(q + 2η·shift, u_a − u_b)`
    Z { a: usize, b: usize, shift: i32 },
}

impl Factor {
    fn shifted(self, by: i32) -> Self {
        match self {
            Factor::InvY { a, b, shift } => Factor::InvY { a, b, shift: shift + by },
            Factor::Z { a, b, shift } => Factor::Z { a, b, shift: shift + by },
            f => f,
        }
    }

    pub fn eval(self, p: &ModularParams, us: &[Complex64], q: Complex64) -> Result<Complex64> {
        let at = |s: i32| q + p.step() * f64::from(s);
        match self {
            Factor::Omega { a, b } => p.omega(us[a] - us[b]),
            Factor::InvY { a, b, shift } => Ok(1.0 / p.y(at(shift), us[a] - us[b])?),
            Factor::Z { a, b, shift } => p.z(at(shift), us[a] - us[b]),
        }
    }
}

fn shift_label(s: i32) -> String {
    match s {
        0 => "q".into(),
        1 => "q+2η".into(),
        -1 => "q-2η".into(),
        s if s > 0 => format!("q+{}η", 2 * s),
        s => format!("q-{}η", -2 * s),
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Factor::Omega { a, b } => write!(f, "ω{}{}", a + 1, b + 1),
            Factor::InvY { a, b, shift } => write!(f, "/y{}{}({})", a + 1, b + 1, shift_label(shift)),
            Factor::Z { a, b, shift } => write!(f, "z{}{}({})", a + 1, b + 1, shift_label(shift)),
        }
    }
}

/// `±∏ factors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub negative: bool,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn one() -> Self {
        Self { negative: false, factors: Vec::new() }
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.factors.is_empty()
    }

    fn shifted(&self, by: i32) -> Self {
        Self { negative: self.negative, factors: self.factors.iter().map(|f| f.shifted(by)).collect() }
    }

    fn times(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        factors.sort_unstable();
        Self { negative: self.negative != other.negative, factors }
    }

    pub fn eval(&self, p: &ModularParams, us: &[Complex64], q: Complex64) -> Result<Complex64> {
        let mut acc = if self.negative { -ONE } else { ONE };
        for f in &self.factors {
            acc *= f.eval(p, us, q)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.factors.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub coeff: Monomial,
}

impl Word {
    pub fn weight(&self) -> i32 {
        self.letters.iter().map(|l| l.gen.weight()).sum()
    }

    pub fn shift(&self) -> i32 {
        self.letters.iter().map(|l| l.gen.shift()).sum()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coeff)?;
        for l in &self.letters {
            write!(f, " {:?}(u{})", l.gen, l.point + 1)?;
        }
        Ok(())
    }
}

/// `Φₙ(u₁, …, uₙ)` as a sum of words.
#[derive(Clone, Debug)]
pub struct BethePoly {
    pub n: usize,
    pub points: Vec<Complex64>,
    pub words: Vec<Word>,
}

impl BethePoly {
    /// Coefficient of the word `B₁(u₁)⋯B₁(uₙ)`.
    pub fn leading_coefficient(&self) -> Option<&Monomial> {
        self.words
            .iter()
            .find(|w| {
                w.letters.len() == self.n && w.letters.iter().enumerate().all(|(i, l)| l.gen == Gen::B1 && l.point == i)
            })
            .map(|w| &w.coeff)
    }
}

fn expand(idx: &[usize]) -> Vec<Word> {
    match idx {
        [] => vec![Word { letters: Vec::new(), coeff: Monomial::one() }],
        [only] => vec![Word { letters: vec![Letter { gen: Gen::B1, point: *only }], coeff: Monomial::one() }],
        [first, rest @ ..] => {
            let mut out: Vec<Word> = expand(rest)
                .into_iter()
                .map(|mut w| {
                    w.letters.insert(0, Letter { gen: Gen::B1, point: *first });
                    w
                })
                .collect();
            for (pos, &j) in rest.iter().enumerate() {
                let mut factors: Vec<Factor> = rest[..pos].iter().map(|&k| Factor::Omega { a: j, b: k }).collect();
                factors.push(Factor::InvY { a: *first, b: j, shift: 0 });
                let others: Vec<usize> = rest.iter().copied().filter(|&k| k != j).collect();
                factors.extend(others.iter().map(|&k| Factor::Z { a: k, b: j, shift: 1 }));
                let head = Monomial { negative: true, factors };
                for w in expand(&others) {
                    let mut letters = vec![Letter { gen: Gen::B2, point: *first }];
                    letters.extend(w.letters);
                    letters.push(Letter { gen: Gen::A1, point: j });
                    out.push(Word { letters, coeff: head.times(&w.coeff.shifted(1)) });
                }
            }
            out
        }
    }
}

/// Expand the recurrence for `Φₙ`.
pub fn phi_build(points: &[Complex64]) -> Result<BethePoly> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i] - points[j]).norm() < 1e-12 {
                return Err(Error::CoincidentPoints(i, j));
            }
        }
    }
    let idx: Vec<usize> = (0..points.len()).collect();
    Ok(BethePoly { n: points.len(), points: points.to_vec(), words: expand(&idx) })
}

/// `Φₙ` as an operator on functions valued in the representation space.
pub fn phi_eval(poly: &BethePoly, rep: &Rep) -> Result<DynOp> {
    let p = *rep.params();
    let laxes: Vec<LaxOps> = poly.points.iter().map(|&u| lax_to_dynops(rep, u)).collect();
    let mut total = DynOp::zero(rep.weights().clone(), p.step());
    for w in &poly.words {
        let (coeff, us) = (w.coeff.clone(), poly.points.clone());
        let mut op = DynOp::scalar(rep.weights().clone(), p.step(), move |q| coeff.eval(&p, &us, q));
        for l in &w.letters {
            op = op.mul(l.gen.pick(&laxes[l.point]))?;
        }
        total = total.add(&op)?;
    }
    Ok(total)
}

/// `sup_f ‖(Φₙ(…u_i, u_{i+1}…) − ω(u_{i+1} − u_i)Φₙ(…u_{i+1}, u_i…)) f‖ / ‖f‖`,
/// `i` counted from 1.
pub fn phi_symmetry_residual(points: &[Complex64], i: usize, rep: &Rep, inputs: &[LatticeFn]) -> Result<f64> {
    if i == 0 || i >= points.len() {
        return Err(Error::InvalidParams(format!("transposition index {i} outside 1..{}", points.len())));
    }
    let mut swapped = points.to_vec();
    swapped.swap(i - 1, i);
    let w = rep.params().omega(points[i] - points[i - 1])?;
    let lhs = phi_eval(&phi_build(points)?, rep)?;
    let rhs = phi_eval(&phi_build(&swapped)?, rep)?.scale(w);
    let out = lhs.sub(&rhs)?.apply_all(inputs)?;
    Ok(out.iter().zip(inputs).fold(0.0_f64, |acc, (o, f)| acc.max(o.sup_norm() / f.sup_norm())))
}

/// Which of the two scalar identities behind the symmetry of `Φₙ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofIdentity {
    /// Three spectral points.
    First,
    /// Four spectral points.
    Second,
}

impl ProofIdentity {
    pub fn points(self) -> usize {
        match self {
            ProofIdentity::First => 3,
            ProofIdentity::Second => 4,
        }
    }
}

/// `|LHS − RHS|` of the chosen identity; `us` is 1-indexed in the formulas.
pub fn proof_identity_residual(which: ProofIdentity, p: &ModularParams, q: Complex64, us: &[Complex64]) -> Result<f64> {
    if us.len() != which.points() {
        return Err(Error::InvalidParams(format!("identity needs {} points, got {}", which.points(), us.len())));
    }
    let eta = p.eta;
    let u = |i: usize, j: usize| us[i - 1] - us[j - 1];
    let om = |i, j| p.omega(u(i, j));
    let y = |i, j, q| p.y(q, u(i, j));
    let z = |i, j, q| p.z(q, u(i, j));
    let q2 = q + p.step();
    match which {
        ProofIdentity::First => {
            let b = p.beta(eta, -q, u(2, 1))?;
            let lhs = -om(1, 2)? * p.g(u(2, 1))? / (y(2, 3, q)? * b) + p.alpha(eta, -q, u(2, 1))? / (b * y(1, 3, q)?);
            let rhs = -om(3, 1)? * z(1, 3, q2)? / y(2, 3, q)?
                - p.alpha(eta, q2, u(3, 1))? / (p.beta(q2, eta, u(3, 1))? * y(2, 1, q)?);
            Ok((lhs - rhs).norm())
        }
        ProofIdentity::Second => {
            let t1 = om(1, 2)?
                * (om(4, 2)? * z(2, 4, q2)? * z(3, 4, q2)? / (y(1, 4, q)? * y(2, 3, q2)?)
                    + om(3, 4)? * om(3, 2)? * z(2, 3, q2)? * z(4, 3, q2)? / (y(1, 3, q)? * y(2, 4, q2)?));
            let t2 = -(om(4, 1)? * z(1, 4, q2)? * z(3, 4, q2)? / (y(2, 4, q)? * y(1, 3, q2)?)
                + om(3, 4)? * om(3, 1)? * z(1, 3, q2)? * z(4, 3, q2)? / (y(2, 3, q)? * y(1, 4, q2)?));
            let tail = |a: usize| -> Result<Complex64> {
                Ok(p.delta(-q2, u(4, a))? / (p.gamma(q2, -q2, u(4, a))? * y(4, 3, q)?)
                    + z(4, a, q2)? * p.alpha(eta, q2, u(3, a))? * om(a, 4)?
                        / (p.beta(q2, eta, u(3, a))? * y(a, 4, q2)?))
            };
            let t3 = om(1, 2)? / y(1, 2, q)? * tail(2)?;
            let t4 = -tail(1)? / y(2, 1, q)?;
            Ok((t1 + t2 + t3 + t4).norm())
        }
    }
}

/// Propagate `f(q₀) = 1`, `f(q)/f(q − 2η) = rhs(q)` along `q₀ + 2ηk`,
/// `|k| ≤ half_width`.
pub fn solve_f_lattice<F>(rhs: F, q0: Complex64, step: Complex64, half_width: i32) -> Result<LatticeFn>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let q_at = |k: i32| q0 + step * f64::from(k);
    let ratio = |k: i32| -> Result<Complex64> {
        let r = rhs(q_at(k))?;
        if !r.is_finite() || r.norm() < 1e-300 {
            return Err(Error::PoleProximity {
                factor: format!("gauge ratio at lattice index {k}"),
                modulus: r.norm(),
            });
        }
        Ok(r)
    };
    let width = (2 * half_width + 1) as usize;
    let mut f = vec![ONE; width];
    let mid = half_width as usize;
    for k in 1..=half_width {
        f[mid + k as usize] = f[mid + k as usize - 1] * ratio(k)?;
    }
    for k in (1 - half_width..=0).rev() {
        let i = (mid as i32 + k) as usize;
        f[i - 1] = f[i] / ratio(k)?;
    }
    let values = f.into_iter().map(|v| CVec::from_element(1, v)).collect();
    Ok(LatticeFn::from_values(q0, step, -half_width, values))
}

/// Reference spectral point used to normalise the gauge.
pub const U_REF: Complex64 = Complex64::new(0.123, 0.045);

/// The `q`-dependent factor of the two-magnon equation,
/// `ϑ(q−3η)² / (ϑ(q−η)ϑ(q−5η))`; `1` for fewer magnons.
pub fn magnon_factor(p: &ModularParams, n: usize, q: Complex64) -> Result<Complex64> {
    let eta = p.eta;
    match n {
        0 | 1 => Ok(ONE),
        2 => {
            let t = |x: Complex64| p.theta(x);
            let den = t(q - eta)? * t(q - 5.0 * eta)?;
            if den.norm() < p.guard_eps {
                return Err(Error::PoleProximity { factor: "ϑ(q-η)ϑ(q-5η)".into(), modulus: den.norm() });
            }
            Ok(t(q - 3.0 * eta)?.powi(2) / den)
        }
        _ => Err(Error::InvalidParams(format!("no magnon factor for n = {n}"))),
    }
}

/// Gauge function for `n` magnons: `f(q)/f(q−2η) = κ(q)/κ(q₀)` with
/// `κ(q) = 1/(a₂(U_REF, q)·T_n(q))`, so the vacuum eigenvalue ratios lose
/// their `q`-dependence.
pub fn magnon_gauge(rep: &Rep, n: usize, q0: Complex64, half_width: i32) -> Result<LatticeFn> {
    let p = *rep.params();
    let unit = pseudovacuum(rep, Gauge::Unit, q0, 0)?;
    let kappa = |q| -> Result<Complex64> { Ok(1.0 / (unit.a(1, q, U_REF)? * magnon_factor(&p, n, q)?)) };
    let k0 = kappa(q0)?;
    solve_f_lattice(|q| Ok(kappa(q)? / k0), q0, p.step(), half_width)
}

/// Pseudovacuum dressed with [`magnon_gauge`].
pub fn magnon_vacuum(rep: &Rep, n: usize, q0: Complex64, half_width: i32) -> Result<Vacuum> {
    pseudovacuum(rep, Gauge::Lattice(magnon_gauge(rep, n, q0, half_width)?), q0, half_width)
}

/// `r_i = a₁(u_i)/a₂(u_i,q) − ϑ(u_ij−η)/ϑ(u_ij+η) · T₂(q) · f(q)/f(q−2η)` at
/// `q = q₀ + 2ηk`.
pub fn bethe_residual_n2(u1: Complex64, u2: Complex64, k: i32, vac: &Vacuum) -> Result<[Complex64; 2]> {
    let p = *vac.rep.params();
    let q = vac.f.q_at(k);
    let ratio =
        vac.f_ratio(k).ok_or(Error::WindowUnderflow { lo: vac.f.lo(), hi: vac.f.hi(), min_shift: 0, max_shift: 1 })?;
    let t2 = magnon_factor(&p, 2, q)?;
    let us = [u1, u2];
    let mut r = [Complex64::default(); 2];
    for i in 0..2 {
        let uij = us[i] - us[1 - i];
        let a2 = vac.a(1, q, us[i])?;
        if a2.norm() < p.guard_eps {
            return Err(Error::PoleProximity { factor: "a2(u,q)".into(), modulus: a2.norm() });
        }
        let den = p.theta(uij + p.eta)?;
        if den.norm() < p.guard_eps {
            return Err(Error::PoleProximity { factor: "ϑ(u_ij+η)".into(), modulus: den.norm() });
        }
        r[i] = vac.a(0, q, us[i])? / a2 - p.theta(uij - p.eta)? / den * t2 * ratio;
    }
    Ok(r)
}

/// Bethe roots with the residual reached by the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheRoots {
    pub n: usize,
    #[serde(with = "pairs")]
    pub roots: Vec<Complex64>,
    pub residual: f64,
}

mod pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Target on `max |r_i|` for two magnons.
    pub tol: f64,
    /// Target on the eigencheck residual for one magnon.
    pub eigen_tol: f64,
    pub fd_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-10, eigen_tol: 1e-6, fd_step: 1e-6 }
    }
}

/// Spectral samples used by default for eigenvector checks.
pub const U_SAMPLES: [Complex64; 5] = [
    Complex64::new(0.05, 0.02),
    Complex64::new(-0.2, 0.1),
    Complex64::new(0.3, 0.0),
    Complex64::new(0.41, -0.13),
    Complex64::new(-0.37, -0.21),
];

fn sup(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0_f64, |a, z| a.max(z.norm()))
}

/// Damped Gauss–Newton with a central-difference Jacobian for a residual
/// that is holomorphic in each unknown. Square systems reduce to Newton.
fn gauss_newton<F>(f: F, x0: &[Complex64], opts: &SolveOptions, tol: f64) -> Result<(Vec<Complex64>, f64)>
where
    F: Fn(&[Complex64]) -> Result<Vec<Complex64>>,
{
    let mut x = x0.to_vec();
    let mut r = f(&x)?;
    let mut norm = sup(&r);
    for _ in 0..opts.max_iter {
        if norm < tol {
            return Ok((x, norm));
        }
        let h = Complex64::new(opts.fd_step, 0.0);
        let mut jac = DMatrix::<Complex64>::zeros(r.len(), x.len());
        for b in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[b] += h;
            xm[b] -= h;
            let (rp, rm) = (f(&xp)?, f(&xm)?);
            for a in 0..r.len() {
                jac[(a, b)] = (rp[a] - rm[a]) / (2.0 * h);
            }
        }
        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-14 * smax) || !smax.is_finite() {
            return Err(Error::SingularJacobian);
        }
        let rhs = -DMatrix::from_column_slice(r.len(), 1, &r);
        let dx = svd.solve(&rhs, 0.0).map_err(|_| Error::SingularJacobian)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<Complex64> = x.iter().zip(dx.iter()).map(|(a, d)| a + d * lambda).collect();
            if let Ok(rt) = f(&trial) {
                let nt = sup(&rt);
                if nt.is_finite() && nt < norm {
                    x = trial;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm < tol {
        Ok((x, norm))
    } else {
        Err(Error::NoConvergence { iterations: opts.max_iter, residual: norm })
    }
}

/// Grid over one period cell: real parts in `[-1/2, 1/2)`, imaginary parts
/// within `±Im τ / 2`.
fn cell_grid(p: &ModularParams, per_axis: usize) -> Vec<Complex64> {
    let h = p.tau.im / 2.0;
    let mut out = Vec::with_capacity(per_axis * per_axis);
    for a in 0..per_axis {
        for b in 0..per_axis {
            let re = -0.5 + (a as f64 + 0.5) / per_axis as f64;
            let im = -h + 2.0 * h * (b as f64 + 0.5) / per_axis as f64;
            out.push(Complex64::new(re, im));
        }
    }
    out
}

/// Pointwise `t(u)Ψ / Ψ` ratios across the window, differenced against the
/// base point, for every sample.
fn ratio_spread(vac: &Vacuum, roots: &[Complex64], samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let psi = bethe_state(vac, roots)?;
    let mut out = Vec::new();
    for &u in samples {
        let tpsi = transfer_op(&vac.rep, u)?.op.apply(&psi)?;
        let lam = |k: i32| -> Complex64 {
            let (v, w) = (psi.value(k).expect("inside"), tpsi.value(k).expect("inside"));
            v.dotc(w) / v.dotc(v)
        };
        let base = lam(0);
        out.extend(tpsi.window().filter(|&k| k != 0).map(|k| lam(k) - base));
    }
    Ok(out)
}

const N1_SAMPLES: [Complex64; 2] = [Complex64::new(0.05, 0.02), Complex64::new(-0.2, 0.1)];

/// Solve for `n ∈ {1, 2}` magnons on the representation carried by `vac`.
/// Without a guess, starting points come from a scan of one period cell.
pub fn solve_bethe(n: usize, vac: &Vacuum, guess: Option<&[Complex64]>, opts: &SolveOptions) -> Result<BetheRoots> {
    let p = *vac.rep.params();
    if let Some(g) = guess {
        if g.len() != n {
            return Err(Error::InvalidParams(format!("expected {n} guesses, got {}", g.len())));
        }
    }
    match n {
        1 => {
            let f = |x: &[Complex64]| ratio_spread(vac, x, &N1_SAMPLES);
            let starts: Vec<Vec<Complex64>> = match guess {
                Some(g) => vec![g.to_vec()],
                None => {
                    let mut scored: Vec<(f64, Complex64)> = cell_grid(&p, 12)
                        .into_iter()
                        .filter_map(|u| Some((sup(&f(&[u]).ok()?), u)))
                        .filter(|(s, _)| s.is_finite())
                        .collect();
                    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
                    scored.into_iter().take(12).map(|(_, u)| vec![u]).collect()
                }
            };
            let mut last = Error::NoConvergence { iterations: 0, residual: f64::INFINITY };
            for s in starts {
                match gauss_newton(f, &s, opts, 1e-10).and_then(|(x, _)| {
                    let check = eigencheck(vac, &x, &U_SAMPLES)?;
                    Ok((x, check.residual))
                }) {
                    Ok((x, res)) if res < opts.eigen_tol => return Ok(BetheRoots { n, roots: x, residual: res }),
                    Ok((_, res)) => last = Error::NoConvergence { iterations: opts.max_iter, residual: res },
                    Err(e) => last = e,
                }
            }
            Err(last)
        }
        2 => {
            let f = |x: &[Complex64]| -> Result<Vec<Complex64>> {
                if (x[0] - x[1]).norm() < 1e-6 {
                    return Err(Error::CoincidentPoints(0, 1));
                }
                Ok(bethe_residual_n2(x[0], x[1], 0, vac)?.to_vec())
            };
            let starts: Vec<Vec<Complex64>> = match guess {
                Some(g) => vec![g.to_vec()],
                None => {
                    let grid = cell_grid(&p, 8);
                    let mut scored = Vec::new();
                    for (i, &a) in grid.iter().enumerate() {
                        for &b in &grid[i + 1..] {
                            if let Ok(r) = f(&[a, b]) {
                                let s = r[0].norm() + r[1].norm();
                                if s.is_finite() {
                                    scored.push((s, a, b));
                                }
                            }
                        }
                    }
                    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
                    scored.into_iter().take(24).map(|(_, a, b)| vec![a, b]).collect()
                }
            };
            let mut last = Error::NoConvergence { iterations: 0, residual: f64::INFINITY };
            for s in starts {
                match gauss_newton(f, &s, opts, opts.tol) {
                    Ok((x, res)) => {
                        // Discard roots whose state vanishes.
                        match bethe_state(vac, &x) {
                            Ok(_) => return Ok(BetheRoots { n, roots: x, residual: res }),
                            Err(e) => last = e,
                        }
                    }
                    Err(e) => last = e,
                }
            }
            Err(last)
        }
        _ => Err(Error::InvalidParams(format!("Bethe equations are available for n = 1, 2, not {n}"))),
    }
}

/// `Ψ = Φₙ(roots) f(q)|0⟩`.
pub fn bethe_state(vac: &Vacuum, roots: &[Complex64]) -> Result<LatticeFn> {
    let weight = vac.weight() - roots.len() as i32;
    let phi = phi_eval(&phi_build(roots)?, &vac.rep)?;
    let psi = phi.apply(&vac.state())?.with_weight(Some(weight));
    let norm = psi.sup_norm();
    if !(norm >= 1e-12) {
        return Err(Error::DegenerateState(norm));
    }
    Ok(psi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenCheck {
    /// Rayleigh quotient at the base lattice point for every sample.
    pub lambdas: Vec<Complex64>,
    /// `sup_{u,k} ‖t(u)Ψ(q_k) − Λ(u)Ψ(q_k)‖ / ‖Ψ(q_k)‖`.
    pub residual: f64,
    /// `sup_{u,k} |Λ_k(u) − Λ(u)|` for the pointwise Rayleigh quotients `Λ_k`.
    pub spread: f64,
}

/// Apply `t(u)` to the Bethe state and measure how far it is from an
/// eigenvector with a `q`-independent eigenvalue.
pub fn eigencheck(vac: &Vacuum, roots: &[Complex64], samples: &[Complex64]) -> Result<EigenCheck> {
    let psi = bethe_state(vac, roots)?;
    if psi.weight != Some(0) {
        return Err(Error::InvalidParams(format!(
            "Bethe state has weight {:?}; transfer matrices commute on weight 0 only",
            psi.weight
        )));
    }
    let mut out = EigenCheck { lambdas: Vec::new(), residual: 0.0, spread: 0.0 };
    for &u in samples {
        let tpsi = transfer_op(&vac.rep, u)?.op.apply(&psi)?;
        let at = |k: i32| (psi.value(k).expect("inside"), tpsi.value(k).expect("inside"));
        let (v0, w0) = at(0);
        let lam = v0.dotc(w0) / v0.dotc(v0);
        for k in tpsi.window() {
            let (v, w) = at(k);
            let vn = v.norm();
            if !(vn >= 1e-12) {
                return Err(Error::DegenerateState(vn));
            }
            out.residual = out.residual.max((w - v * lam).norm() / vn);
            out.spread = out.spread.max((v.dotc(w) / v.dotc(v) - lam).norm());
        }
        out.lambdas.push(lam);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repspace::{chain, default_sites};
    use crate::sampling::{complex_in_box, resample, stream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const US: [Complex64; 4] = [
        Complex64::new(0.21, 0.03),
        Complex64::new(-0.12, 0.05),
        Complex64::new(0.05, -0.04),
        Complex64::new(0.33, 0.02),
    ];
    const Q0: Complex64 = Complex64::new(0.137, 0.043);

    fn words(poly: &BethePoly) -> Vec<String> {
        poly.words.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn small_expansions() {
        assert_eq!(words(&phi_build(&[]).unwrap()), vec!["+1"]);
        assert_eq!(words(&phi_build(&US[..1]).unwrap()), vec!["+1 B1(u1)"]);
        assert_eq!(words(&phi_build(&US[..2]).unwrap()), vec!["+1 B1(u1) B1(u2)", "-/y12(q) B2(u1) A1(u2)"]);
        assert_eq!(
            words(&phi_build(&US[..3]).unwrap()),
            vec![
                "+1 B1(u1) B1(u2) B1(u3)",
                "-/y23(q) B1(u1) B2(u2) A1(u3)",
                "-/y12(q) z32(q+2η) B2(u1) B1(u3) A1(u2)",
                "-ω32 /y13(q) z23(q+2η) B2(u1) B1(u2) A1(u3)",
            ]
        );
    }

    #[test]
    fn words_have_weight_minus_n_and_no_net_shift() {
        for n in 0..=5 {
            let poly = phi_build(&[US.as_slice(), &[c(-0.4, 0.1)]].concat()[..n]).unwrap();
            assert!(poly.words.iter().all(|w| w.weight() == -(n as i32) && w.shift() == 0));
            assert!(poly.leading_coefficient().unwrap().is_one());
        }
        assert_eq!(phi_build(&US).unwrap().words.len(), 10);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(phi_build(&[US[0], US[1], US[0]]), Err(Error::CoincidentPoints(0, 2))));
    }

    #[test]
    fn phi_one_is_b1() {
        let rep = chain(&default_sites(2), ModularParams::default()).unwrap();
        let phi = phi_eval(&phi_build(&US[..1]).unwrap(), &rep).unwrap();
        let b1 = lax_to_dynops(&rep, US[0]).b1().clone();
        let mut rng = stream(1, "phi");
        let f = LatticeFn::random(&mut rng, rep.weights(), None, Q0, rep.params().step(), 4);
        assert!(phi.apply(&f).unwrap().sup_diff(&b1.apply(&f).unwrap()).unwrap() < 1e-14);
        assert_eq!(phi.weight(), crate::dynalg::OpWeight::Definite(-1));
    }

    #[test]
    fn phi_two_on_vacuum() {
        let p = ModularParams::default();
        let rep = chain(&default_sites(2), p).unwrap();
        let vac = pseudovacuum(&rep, Gauge::Unit, Q0, 4).unwrap();
        let psi = phi_eval(&phi_build(&US[..2]).unwrap(), &rep).unwrap().apply(&vac.state()).unwrap();
        let (x, y) = (lax_to_dynops(&rep, US[0]), lax_to_dynops(&rep, US[1]));
        let bb = x.b1().mul(y.b1()).unwrap().apply(&vac.state()).unwrap();
        let b2 = x.b2().apply(&vac.state()).unwrap();
        let a1 = vac.a(0, Q0, US[1]).unwrap();
        for k in -3..=3 {
            let q = psi.q_at(k);
            let expected = bb.value(k).unwrap() - b2.value(k).unwrap() * (a1 / p.y(q, US[0] - US[1]).unwrap());
            assert!((psi.value(k).unwrap() - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn symmetry_two_and_three_magnons() {
        let rep = chain(&default_sites(2), ModularParams::default()).unwrap();
        let mut rng = stream(2, "phi");
        let fs: Vec<_> =
            (0..3).map(|_| LatticeFn::random(&mut rng, rep.weights(), None, Q0, rep.params().step(), 5)).collect();
        assert!(phi_symmetry_residual(&US[..2], 1, &rep, &fs).unwrap() < 1e-8);
        for i in 1..=2 {
            assert!(phi_symmetry_residual(&US[..3], i, &rep, &fs).unwrap() < 1e-8);
        }
        assert!(phi_symmetry_residual(&US[..3], 3, &rep, &fs).is_err());
    }

    #[test]
    fn proof_identities_hold() {
        let p = ModularParams::default();
        let mut rng = stream(5, "identities");
        for which in [ProofIdentity::First, ProofIdentity::Second] {
            for _ in 0..20 {
                let r = resample(&mut rng, |rng| {
                    let q = complex_in_box(rng, 0.5, 0.3);
                    let us: Vec<_> = (0..which.points()).map(|_| complex_in_box(rng, 0.4, 0.3)).collect();
                    proof_identity_residual(which, &p, q, &us)
                })
                .unwrap();
                assert!(r < 1e-9, "{which:?}: {r}");
            }
        }
    }

    #[test]
    fn four_magnon_double_b2_sector() {
        // The two B₂(u₁)B₂(u₂) words of Φ₄ differ only in the order of the commuting
        // A₁ factors; their summed coefficient is the bracket of the
        // twice-expanded recurrence with no extra theta factor.
        let p = ModularParams::default();
        let poly = phi_build(&US).unwrap();
        let b2b2: Vec<&Word> = poly
            .words
            .iter()
            .filter(|w| w.letters[..2] == [Letter { gen: Gen::B2, point: 0 }, Letter { gen: Gen::B2, point: 1 }])
            .collect();
        assert_eq!(b2b2.len(), 2);
        let q = c(0.19, 0.07);
        let recurrence: Complex64 = b2b2.iter().map(|w| w.coeff.eval(&p, &US, q).unwrap()).sum();
        let u = |i: usize, j: usize| US[i - 1] - US[j - 1];
        let (om, y, z) =
            (|i, j| p.omega(u(i, j)).unwrap(), |i, j, q| p.y(q, u(i, j)).unwrap(), |i, j, q| p.z(q, u(i, j)).unwrap());
        let q2 = q + p.step();
        let bracket = om(4, 2) * z(2, 4, q2) * z(3, 4, q2) / (y(1, 4, q) * y(2, 3, q2))
            + om(3, 4) * om(3, 2) * z(2, 3, q2) * z(4, 3, q2) / (y(1, 3, q) * y(2, 4, q2));
        let outside = om(4, 3);
        assert!((recurrence - bracket * outside).norm() < 1e-12 * recurrence.norm());
        let t = |x| p.theta(x).unwrap();
        let theta_factor = t(q + p.eta).powi(2) / (t(q - p.eta) * t(q + 3.0 * p.eta));
        assert!((theta_factor - 1.0).norm() > 1e-2);

        let rep = chain(&default_sites(3), p).unwrap();
        let (l3, l4) = (lax_to_dynops(&rep, US[2]), lax_to_dynops(&rep, US[3]));
        let comm = l3.a1().mul(l4.a1()).unwrap().sub(&l4.a1().mul(l3.a1()).unwrap()).unwrap();
        let mut rng = stream(6, "phi");
        let f = LatticeFn::random(&mut rng, rep.weights(), None, Q0, p.step(), 4);
        assert!(comm.apply(&f).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn lattice_gauge_propagation() {
        let p = ModularParams::default();
        let one = solve_f_lattice(|_| Ok(ONE), Q0, p.step(), 5).unwrap();
        assert!(one.values().all(|(_, v)| v[0] == ONE));
        let t = |x| p.theta(x);
        let rhs = |q: Complex64| Ok(t(q - p.eta)? * t(q - 5.0 * p.eta)? / t(q - 3.0 * p.eta)?.powi(2));
        let f = solve_f_lattice(rhs, Q0, p.step(), 8).unwrap();
        assert_eq!(f.value(0).unwrap()[0], ONE);
        for k in -7..=8 {
            let r = f.value(k).unwrap()[0] / f.value(k - 1).unwrap()[0];
            assert!((r - rhs(f.q_at(k)).unwrap()).norm() < 1e-12 * r.norm());
        }
    }

    #[test]
    fn residual_with_unit_gauge_varies_with_q() {
        let p = ModularParams::default();
        let rep = chain(&default_sites(2), p).unwrap();
        let vac = pseudovacuum(&rep, Gauge::Unit, Q0, 4).unwrap();
        let r0 = bethe_residual_n2(US[0], US[1], 0, &vac).unwrap();
        let r1 = bethe_residual_n2(US[0], US[1], 2, &vac).unwrap();
        assert!((r0[0] - r1[0]).norm() > 1e-3);
        let s = bethe_residual_n2(US[1], US[0], 0, &vac).unwrap();
        assert!((s[0] - r0[1]).norm() < 1e-14 && (s[1] - r0[0]).norm() < 1e-14);
    }

    #[test]
    fn one_magnon_eigenvector() {
        let rep = chain(&default_sites(1), ModularParams::default()).unwrap();
        let vac = magnon_vacuum(&rep, 1, Q0, 8).unwrap();
        let roots = solve_bethe(1, &vac, None, &SolveOptions::default()).unwrap();
        let check = eigencheck(&vac, &roots.roots, &U_SAMPLES).unwrap();
        assert!(check.residual < 1e-6 && check.spread < 1e-6, "{check:?}");
        let off = eigencheck(&vac, &[roots.roots[0] + 0.1], &U_SAMPLES).unwrap();
        assert!(off.residual > 1e-6 || off.spread > 1e-6);
    }

    #[test]
    fn two_magnon_eigenvector() {
        let rep = chain(&default_sites(2), ModularParams::default()).unwrap();
        let vac = magnon_vacuum(&rep, 2, Q0, 8).unwrap();
        let roots = solve_bethe(2, &vac, None, &SolveOptions::default()).unwrap();
        let r = bethe_residual_n2(roots.roots[0], roots.roots[1], 0, &vac).unwrap();
        assert!(r[0].norm() < 1e-10 && r[1].norm() < 1e-10);
        let check = eigencheck(&vac, &roots.roots, &U_SAMPLES).unwrap();
        assert!(check.residual < 1e-6 && check.spread < 1e-6, "{check:?}");
        let bumped = bethe_residual_n2(roots.roots[0] + 0.1, roots.roots[1], 0, &vac).unwrap();
        assert!(bumped[0].norm() > 1e-10);
    }

    #[test]
    fn roots_json_shape() {
        let roots = BetheRoots { n: 2, roots: vec![c(0.1, -0.2), c(0.3, 0.4)], residual: 1e-12 };
        let s = serde_json::to_string(&roots).unwrap();
        assert_eq!(s, r#"{"n":2,"roots":[[0.1,-0.2],[0.3,0.4]],"residual":1e-12}"#);
        assert_eq!(serde_json::from_str::<BetheRoots>(&s).unwrap(), roots);
    }
}
