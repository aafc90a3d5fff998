//! The dynamical R-matrix on `V ⊗ V`, `V = C³`, its weight-shifted variants
//! and the three-leg operators entering the dynamical Yang–Baxter equation.
//!
//! Basis of `V ⊗ V` is ordered `(1,1), (1,2), (1,3), (2,1), …, (3,3)`; with
//! zero-based indices the pair `(i, k)` sits at `3 i + k`. Rows are outgoing
//! pairs, so `E_ab ⊗ E_cd` contributes at row `(a, c)`, column `(b, d)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::ModularParams;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, ZERO};

/// Weights of `e₁, e₂, e₃` under `h = E₁₁ − E₃₃`.
pub const WEIGHTS: [i32; 3] = [1, 0, -1];

/// Number of structurally nonzero entries of the R-matrix.
pub const NONZERO_ENTRIES: usize = 19;

/// Index of the basis pair `(i, k)` of `V ⊗ V` (zero-based).
pub const fn pair(i: usize, k: usize) -> usize {
    3 * i + k
}

/// `R(q, u)` as a 9×9 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    pub q: Complex64,
    pub u: Complex64,
    pub matrix: CMat,
}

impl RMatrix {
    /// Entry `⟨e_i ⊗ e_k | R | e_j ⊗ e_l⟩`.
    pub fn entry(&self, (i, k): (usize, usize), (j, l): (usize, usize)) -> Complex64 {
        self.matrix[(pair(i, k), pair(j, l))]
    }

    /// Row-major `[re, im]` pairs, the debug dump format.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..9).map(|r| (0..9).map(|c| [self.matrix[(r, c)].re, self.matrix[(r, c)].im]).collect()).collect()
    }

    pub fn from_rows(q: Complex64, u: Complex64, rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        if rows.len() != 9 || rows.iter().any(|r| r.len() != 9) {
            return Err(Error::DimensionMismatch { left: 9, right: rows.len() });
        }
        let matrix = CMat::from_fn(9, 9, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1]));
        Ok(Self { q, u, matrix })
    }
}

/// JSON document written by the `rmatrix` CLI command.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RMatrixDump {
    pub q: [f64; 2],
    pub u: [f64; 2],
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl From<&RMatrix> for RMatrixDump {
    fn from(r: &RMatrix) -> Self {
        Self { q: [r.q.re, r.q.im], u: [r.u.re, r.u.im], rows: r.to_rows() }
    }
}

fn labelled<T>(entry: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::PoleProximity { factor, modulus } => {
            Error::PoleProximity { factor: format!("R entry {entry}: {factor}"), modulus }
        }
        other => other,
    })
}

/// One term `coeff · E_ab ⊗ E_cd`, stored zero-based as `(a, b, c, d)`.
struct Term {
    label: &'static str,
    units: (usize, usize, usize, usize),
    value: Complex64,
}

fn terms(q: Complex64, u: Complex64, p: &ModularParams) -> Result<Vec<Term>> {
    let eta = p.eta;
    let g = labelled("E11⊗E11", p.g(u))?;
    let mut out = Vec::with_capacity(NONZERO_ENTRIES);
    let mut push = |label: &'static str, (a, b, c, d): (usize, usize, usize, usize), value: Result<Complex64>| {
        let value = labelled(label, value)?;
        out.push(Term { label, units: (a - 1, b - 1, c - 1, d - 1), value });
        Ok::<(), Error>(())
    };
    push("E11⊗E11", (1, 1, 1, 1), Ok(g))?;
    push("E33⊗E33", (3, 3, 3, 3), Ok(g))?;
    push("E22⊗E22", (2, 2, 2, 2), p.epsilon(q, u))?;

    push("E12⊗E21", (1, 2, 2, 1), p.alpha(eta, q, u))?;
    push("E21⊗E12", (2, 1, 1, 2), p.alpha(q, eta, u))?;
    push("E23⊗E32", (2, 3, 3, 2), p.alpha(-q, eta, u))?;
    push("E32⊗E23", (3, 2, 2, 3), p.alpha(eta, -q, u))?;

    push("E11⊗E22", (1, 1, 2, 2), p.beta(eta, q, u))?;
    push("E22⊗E11", (2, 2, 1, 1), p.beta(q, eta, u))?;
    push("E22⊗E33", (2, 2, 3, 3), p.beta(-q, eta, u))?;
    push("E33⊗E22", (3, 3, 2, 2), p.beta(eta, -q, u))?;

    push("E11⊗E33", (1, 1, 3, 3), p.gamma(-q, q, u))?;
    push("E12⊗E32", (1, 2, 3, 2), p.gamma(-q, eta, u))?;
    push("E21⊗E23", (2, 1, 2, 3), p.gamma(eta, q, u).map(|x| -x))?;
    push("E33⊗E11", (3, 3, 1, 1), p.gamma(q, -q, u))?;
    push("E32⊗E12", (3, 2, 1, 2), p.gamma(q, eta, u))?;
    push("E23⊗E21", (2, 3, 2, 1), p.gamma(eta, -q, u).map(|x| -x))?;

    push("E31⊗E13", (3, 1, 1, 3), p.delta(q, u))?;
    push("E13⊗E31", (1, 3, 3, 1), p.delta(-q, u))?;
    Ok(out)
}

/// Assemble `R(q, u)`.
pub fn r_build(q: Complex64, u: Complex64, p: &ModularParams) -> Result<RMatrix> {
    let mut matrix = CMat::from_element(9, 9, ZERO);
    for t in terms(q, u, p)? {
        let (a, b, c, d) = t.units;
        debug_assert!(matrix[(pair(a, c), pair(b, d))] == ZERO, "{} placed twice", t.label);
        matrix[(pair(a, c), pair(b, d))] = t.value;
    }
    Ok(RMatrix { q, u, matrix })
}

/// `R(q − 2η λ, u)` where `λ` is the weight of the spectator factor.
pub fn r_shifted(q: Complex64, u: Complex64, weight_of_spectator: i32, p: &ModularParams) -> Result<RMatrix> {
    r_build(q - p.step() * f64::from(weight_of_spectator), u, p)
}

/// Whether entry `((i,k),(j,l))` is allowed by weight conservation.
pub fn weight_allowed(out: (usize, usize), inp: (usize, usize)) -> bool {
    WEIGHTS[out.0] + WEIGHTS[out.1] == WEIGHTS[inp.0] + WEIGHTS[inp.1]
}

/// Count of entries that are nonzero although weight conservation forbids
/// them. Exact comparison with zero: the sparsity pattern is structural.
pub fn zero_weight_violations(r: &RMatrix) -> usize {
    let mut count = 0;
    for (i, k, j, l) in quad() {
        if !weight_allowed((i, k), (j, l)) && r.entry((i, k), (j, l)) != ZERO {
            count += 1;
        }
    }
    count
}

/// Number of entries that are exactly nonzero.
pub fn nonzero_count(r: &RMatrix) -> usize {
    r.matrix.iter().filter(|z| **z != ZERO).count()
}

fn quad() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..81).map(|n| (n / 27, (n / 9) % 3, (n / 3) % 3, n % 3))
}

/// The flip `P(v ⊗ w) = w ⊗ v` on `V ⊗ V`.
pub fn permutation() -> CMat {
    let mut p = CMat::from_element(9, 9, ZERO);
    for i in 0..3 {
        for k in 0..3 {
            p[(pair(k, i), pair(i, k))] = Complex64::new(1.0, 0.0);
        }
    }
    p
}

/// Max-entry residual of `R₁₂(q,u) R₂₁(q,−u) − g(u) g(−u)·1`, divided by
/// `|g(u) g(−u)|`.
pub fn unitarity_residual(q: Complex64, u: Complex64, p: &ModularParams) -> Result<f64> {
    let flip = permutation();
    let r12 = r_build(q, u, p)?.matrix;
    let r21 = &flip * r_build(q, -u, p)?.matrix * &flip;
    let scale = p.g(u)? * p.g(-u)?;
    let diff = r12 * r21 - CMat::identity(9, 9) * scale;
    Ok(max_abs(&diff) / scale.norm())
}

/// Operator on `V ⊗ V ⊗ V` acting as an R-matrix on the two factors `legs`
/// and trivially on the remaining one. With `shift_leg = Some(s)` the
/// dynamical argument becomes `q − 2η h_s`, assembled block by block over the
/// weight of factor `s`.
pub fn three_leg(
    legs: (usize, usize),
    shift_leg: Option<usize>,
    q: Complex64,
    u: Complex64,
    p: &ModularParams,
) -> Result<CMat> {
    let (x, y) = legs;
    assert!(x < 3 && y < 3 && x != y, "invalid legs {legs:?}");
    let spectator = 3 - x - y;
    if let Some(s) = shift_leg {
        assert!(s != x && s != y, "shift leg must be the spectator");
    }
    let blocks: Vec<CMat> = WEIGHTS
        .iter()
        .map(|&w| {
            let lam = if shift_leg.is_some() { w } else { 0 };
            r_shifted(q, u, lam, p).map(|r| r.matrix)
        })
        .collect::<Result<_>>()?;
    let mut out = CMat::from_element(27, 27, ZERO);
    for row in 0..27 {
        let ri = [row / 9, (row / 3) % 3, row % 3];
        for col in 0..27 {
            let ci = [col / 9, (col / 3) % 3, col % 3];
            if ri[spectator] != ci[spectator] {
                continue;
            }
            let block = &blocks[ri[spectator]];
            out[(row, col)] = block[(pair(ri[x], ri[y]), pair(ci[x], ci[y]))];
        }
    }
    Ok(out)
}

/// Max entry modulus of the difference of the two sides of the dynamical
/// Yang–Baxter equation
/// `R₁₂(q−2ηh₃,u₁₂) R₁₃(q,u₁) R₂₃(q−2ηh₁,u₂) = R₂₃(q,u₂) R₁₃(q−2ηh₂,u₁) R₁₂(q,u₁₂)`.
pub fn dybe_residual(q: Complex64, u1: Complex64, u2: Complex64, p: &ModularParams) -> Result<f64> {
    let u12 = u1 - u2;
    let lhs = three_leg((0, 1), Some(2), q, u12, p)?
        * three_leg((0, 2), None, q, u1, p)?
        * three_leg((1, 2), Some(0), q, u2, p)?;
    let rhs = three_leg((1, 2), None, q, u2, p)?
        * three_leg((0, 2), Some(1), q, u1, p)?
        * three_leg((0, 1), None, q, u12, p)?;
    Ok(max_abs(&(lhs - rhs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, CVec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_at_zero_is_flip() {
        let p = ModularParams::default();
        let r = r_build(c(0.27, 0.09), c(0.0, 0.0), &p).unwrap();
        assert!(max_abs(&(r.matrix - permutation())) < 1e-12);
    }

    #[test]
    fn sparsity_is_structural() {
        let p = ModularParams::default();
        let r = r_build(c(0.27, 0.09), c(0.13, -0.04), &p).unwrap();
        assert_eq!(zero_weight_violations(&r), 0);
        assert_eq!(nonzero_count(&r), NONZERO_ENTRIES);
        // Every weight-allowed entry is populated.
        let allowed = quad().filter(|&(i, k, j, l)| weight_allowed((i, k), (j, l))).count();
        assert_eq!(allowed, NONZERO_ENTRIES);
    }

    #[test]
    fn signed_gamma_entries() {
        let p = ModularParams::default();
        let (q, u) = (c(0.27, 0.09), c(0.13, -0.04));
        let r = r_build(q, u, &p).unwrap();
        let eta = p.eta;
        // E21⊗E23: row (2,2), column (1,3).
        assert_eq!(r.entry((1, 1), (0, 2)), -p.gamma(eta, q, u).unwrap());
        // E23⊗E21: row (2,2), column (3,1).
        assert_eq!(r.entry((1, 1), (2, 0)), -p.gamma(eta, -q, u).unwrap());
        // E31⊗E13: row (3,1), column (1,3).
        assert_eq!(r.entry((2, 0), (0, 2)), p.delta(q, u).unwrap());
    }

    #[test]
    fn zero_shift_is_identity() {
        let p = ModularParams::default();
        let (q, u) = (c(0.27, 0.09), c(0.13, -0.04));
        assert_eq!(r_shifted(q, u, 0, &p).unwrap(), r_build(q, u, &p).unwrap());
    }

    #[test]
    fn shift_on_lowest_weight_spectator() {
        // R₁₂(q − 2ηh₃) on v₁⊗v₂⊗e₃ is R(q+2η) on v₁⊗v₂, since h e₃ = −e₃.
        let p = ModularParams::default();
        let (q, u) = (c(0.27, 0.09), c(0.13, -0.04));
        let op = three_leg((0, 1), Some(2), q, u, &p).unwrap();
        let r = r_build(q + p.step(), u, &p).unwrap().matrix;
        let v12 = CVec::from_fn(9, |i, _| c(0.3 * i as f64 - 1.0, 0.1 * (i * i) as f64));
        let mut v = CVec::from_element(27, ZERO);
        for a in 0..9 {
            v[3 * a + 2] = v12[a];
        }
        let out = &op * &v;
        let expected = &r * &v12;
        for a in 0..9 {
            assert!((out[3 * a + 2] - expected[a]).norm() < 1e-13);
            assert_eq!(out[3 * a], ZERO);
            assert_eq!(out[3 * a + 1], ZERO);
        }
    }

    #[test]
    fn unitarity_and_dybe_at_a_point() {
        let p = ModularParams::default();
        let q = c(0.23, 0.07);
        assert!(unitarity_residual(q, c(0.17, -0.06), &p).unwrap() < 1e-9);
        assert!(dybe_residual(q, c(0.19, 0.05), c(-0.11, 0.02), &p).unwrap() < 1e-8);
    }

    #[test]
    fn dybe_at_coincident_spectral_points() {
        let p = ModularParams::default();
        let u = c(0.19, 0.05);
        assert!(dybe_residual(c(0.23, 0.07), u, u, &p).unwrap() < 1e-10);
    }

    #[test]
    fn pole_names_entry() {
        let p = ModularParams::default();
        // q = 0 puts theta(q) in the delta denominator.
        match r_build(c(0.0, 0.0), c(0.1, 0.0), &p) {
            Err(Error::PoleProximity { factor, .. }) => assert!(factor.starts_with("R entry")),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn dump_roundtrip() {
        let p = ModularParams::default();
        let r = r_build(c(0.27, 0.09), c(0.13, -0.04), &p).unwrap();
        let dump = RMatrixDump::from(&r);
        let text = serde_json::to_string(&dump).unwrap();
        let back: RMatrixDump = serde_json::from_str(&text).unwrap();
        let r2 = RMatrix::from_rows(r.q, r.u, &back.rows).unwrap();
        assert_eq!(r, r2);
    }
}
