//! Representations: the fundamental evaluation representation, tensor
//! products, the operator-valued Lax matrix and the pseudovacuum.
//!
//! A representation is a graded space `W` with a Lax operator
//! `𝓛(q, u) ∈ End(V ⊗ W)`. The Lax operator is handled as its nine `W`-blocks
//! `𝓛_ij(q, u) ∈ End(W)`, `i, j ∈ {0, 1, 2}` indexing the auxiliary space.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::dynalg::{DynOp, LatticeFn};
use crate::elliptic::ModularParams;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, ONE, ZERO};
use crate::rmatrix::{pair, r_build, WEIGHTS};

/// The nine `W`-blocks of a Lax operator, indexed `[i][j]`.
pub type LaxBlocks = [[CMat; 3]; 3];

/// A module over the elliptic quantum group.
pub trait Representation: Send + Sync + fmt::Debug {
    fn params(&self) -> &ModularParams;

    /// Weight of each basis vector of `W`.
    fn weights(&self) -> &Arc<[i32]>;

    /// All nine blocks of `𝓛(q, u)`.
    fn lax_blocks(&self, q: Complex64, u: Complex64) -> Result<LaxBlocks>;

    /// Evaluation points of the fundamental factors, left to right.
    fn sites(&self) -> Vec<Complex64>;

    fn dim(&self) -> usize {
        self.weights().len()
    }

    /// `𝓛(q, u)` as a `3·dim × 3·dim` matrix, auxiliary index major.
    fn lax(&self, q: Complex64, u: Complex64) -> Result<CMat> {
        let blocks = self.lax_blocks(q, u)?;
        let d = self.dim();
        let mut m = CMat::zeros(3 * d, 3 * d);
        for (i, row) in blocks.iter().enumerate() {
            for (j, b) in row.iter().enumerate() {
                m.view_mut((i * d, j * d), (d, d)).copy_from(b);
            }
        }
        Ok(m)
    }
}

pub type Rep = Arc<dyn Representation>;

/// `W = V`, `𝓛(q, u) = R(q, u − z)`.
#[derive(Debug)]
pub struct Fundamental {
    z: Complex64,
    params: ModularParams,
    weights: Arc<[i32]>,
}

impl Representation for Fundamental {
    fn params(&self) -> &ModularParams {
        &self.params
    }

    fn weights(&self) -> &Arc<[i32]> {
        &self.weights
    }

    fn lax_blocks(&self, q: Complex64, u: Complex64) -> Result<LaxBlocks> {
        let r = r_build(q, u - self.z, &self.params)?;
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| CMat::from_fn(3, 3, |x, y| r.matrix[(pair(i, x), pair(j, y))]))
        }))
    }

    fn sites(&self) -> Vec<Complex64> {
        vec![self.z]
    }
}

/// `X ⊗ Y` with `𝓛 = 𝓛_{1X}(q − 2η h_Y, u) 𝓛_{1Y}(q, u)`; basis index
/// `x·dim(Y) + y`.
#[derive(Debug)]
pub struct Tensor {
    left: Rep,
    right: Rep,
    weights: Arc<[i32]>,
    /// Distinct weights of the right factor.
    right_weights: Vec<i32>,
}

impl Representation for Tensor {
    fn params(&self) -> &ModularParams {
        self.left.params()
    }

    fn weights(&self) -> &Arc<[i32]> {
        &self.weights
    }

    fn lax_blocks(&self, q: Complex64, u: Complex64) -> Result<LaxBlocks> {
        let step = self.params().step();
        let dx = self.left.dim();
        let dy = self.right.dim();
        let yb = self.right.lax_blocks(q, u)?;
        let xb: Vec<(i32, LaxBlocks)> = self
            .right_weights
            .iter()
            .map(|&lam| Ok((lam, self.left.lax_blocks(q - step * f64::from(lam), u)?)))
            .collect::<Result<_>>()?;
        let rw = self.right.weights();
        let x_at = |lam: i32| &xb.iter().find(|(l, _)| *l == lam).expect("weight present").1;
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let mut block = CMat::zeros(dx * dy, dx * dy);
                for m in 0..3 {
                    let ymj = &yb[m][j];
                    for y in 0..dy {
                        let xim = &x_at(rw[y])[i][m];
                        for y2 in 0..dy {
                            let c = ymj[(y, y2)];
                            if c == ZERO {
                                continue;
                            }
                            for x in 0..dx {
                                for x2 in 0..dx {
                                    let a = xim[(x, x2)];
                                    if a != ZERO {
                                        block[(x * dy + y, x2 * dy + y2)] += a * c;
                                    }
                                }
                            }
                        }
                    }
                }
                block
            })
        }))
    }

    fn sites(&self) -> Vec<Complex64> {
        let mut s = self.left.sites();
        s.extend(self.right.sites());
        s
    }
}

pub fn fundamental_rep(z: Complex64, params: ModularParams) -> Rep {
    Arc::new(Fundamental { z, params, weights: Arc::from(WEIGHTS.to_vec()) })
}

pub fn tensor_rep(left: Rep, right: Rep) -> Result<Rep> {
    if left.params() != right.params() {
        return Err(Error::InvalidParams("tensor factors use different modular parameters".into()));
    }
    let weights: Vec<i32> = left.weights().iter().flat_map(|&a| right.weights().iter().map(move |&b| a + b)).collect();
    let mut right_weights: Vec<i32> = right.weights().to_vec();
    right_weights.sort_unstable();
    right_weights.dedup();
    Ok(Arc::new(Tensor { left, right, weights: Arc::from(weights), right_weights }))
}

/// `V(z₁) ⊗ … ⊗ V(z_N)`, nested from the left.
pub fn chain(sites: &[Complex64], params: ModularParams) -> Result<Rep> {
    let (&first, rest) =
        sites.split_first().ok_or_else(|| Error::InvalidParams("a chain needs at least one site".into()))?;
    rest.iter().try_fold(fundamental_rep(first, params), |acc, &z| tensor_rep(acc, fundamental_rep(z, params)))
}

/// Default evaluation points: small distinct reals.
pub fn default_sites(n: usize) -> Vec<Complex64> {
    const Z: [f64; 6] = [0.0, 0.17, 0.29, 0.41, 0.53, 0.07];
    (0..n).map(|k| Complex64::new(Z[k % Z.len()] + 0.61 * (k / Z.len()) as f64, 0.0)).collect()
}

/// The Lax matrix as a 3×3 matrix of shift operators:
/// `L(u) = 𝓛(q, u) e^{-2η h ∂_q}`, entry `(i, j)` carrying `S^{w_j}`.
#[derive(Clone, Debug)]
pub struct LaxOps {
    pub u: Complex64,
    pub entries: [[DynOp; 3]; 3],
}

impl LaxOps {
    pub fn get(&self, i: usize, j: usize) -> &DynOp {
        &self.entries[i][j]
    }
    pub fn a1(&self) -> &DynOp {
        &self.entries[0][0]
    }
    pub fn b1(&self) -> &DynOp {
        &self.entries[0][1]
    }
    pub fn b2(&self) -> &DynOp {
        &self.entries[0][2]
    }
    pub fn c1(&self) -> &DynOp {
        &self.entries[1][0]
    }
    pub fn a2(&self) -> &DynOp {
        &self.entries[1][1]
    }
    pub fn b3(&self) -> &DynOp {
        &self.entries[1][2]
    }
    pub fn c2(&self) -> &DynOp {
        &self.entries[2][0]
    }
    pub fn c3(&self) -> &DynOp {
        &self.entries[2][1]
    }
    pub fn a3(&self) -> &DynOp {
        &self.entries[2][2]
    }
}

/// Blocks of `𝓛(q, u)` at fixed `u`, memoised on `q`.
struct LaxMemo {
    rep: Rep,
    u: Complex64,
    seen: Mutex<HashMap<(u64, u64), Arc<LaxBlocks>>>,
}

impl LaxMemo {
    const CAPACITY: usize = 4096;

    fn blocks(&self, q: Complex64) -> Result<Arc<LaxBlocks>> {
        let key = (q.re.to_bits(), q.im.to_bits());
        if let Some(b) = self.seen.lock().expect("memo poisoned").get(&key) {
            return Ok(b.clone());
        }
        let b = Arc::new(self.rep.lax_blocks(q, self.u)?);
        let mut seen = self.seen.lock().expect("memo poisoned");
        if seen.len() >= Self::CAPACITY {
            seen.clear();
        }
        seen.insert(key, b.clone());
        Ok(b)
    }
}

pub fn lax_to_dynops(rep: &Rep, u: Complex64) -> LaxOps {
    let step = rep.params().step();
    let memo = Arc::new(LaxMemo { rep: rep.clone(), u, seen: Mutex::new(HashMap::new()) });
    let entries = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let memo = memo.clone();
            DynOp::term(rep.weights().clone(), step, WEIGHTS[j], Arc::new(move |q| Ok(memo.blocks(q)?[i][j].clone())))
        })
    });
    LaxOps { u, entries }
}

/// Choice of the gauge function `f(q)` in `|Ω⟩ = f(q)|0⟩`.
#[derive(Clone, Debug)]
pub enum Gauge {
    /// `f ≡ 1`.
    Unit,
    /// Scalar lattice function supplied by the caller (dimension 1).
    Lattice(LatticeFn),
}

/// Highest-weight vector `|0⟩` of a representation, dressed with `f(q)`.
#[derive(Clone, Debug)]
pub struct Vacuum {
    pub rep: Rep,
    /// Basis index of `|0⟩`.
    pub index: usize,
    pub vector: CVec,
    /// Scalar gauge function sampled on the lattice.
    pub f: LatticeFn,
}

impl Vacuum {
    /// `a_i(q, u) = ⟨0|𝓛_ii(q, u)|0⟩`, `i` zero-based.
    pub fn a(&self, i: usize, q: Complex64, u: Complex64) -> Result<Complex64> {
        Ok(self.rep.lax_blocks(q, u)?[i][i][(self.index, self.index)])
    }

    pub fn weight(&self) -> i32 {
        self.rep.weights()[self.index]
    }

    /// `f(q_k)`.
    pub fn f_at(&self, k: i32) -> Option<Complex64> {
        self.f.value(k).map(|v| v[0])
    }

    /// `f(q_k) / f(q_{k-1})`.
    pub fn f_ratio(&self, k: i32) -> Option<Complex64> {
        Some(self.f_at(k)? / self.f_at(k - 1)?)
    }

    /// The lattice function `q ↦ f(q)|0⟩`.
    pub fn state(&self) -> LatticeFn {
        let v = self.vector.clone();
        self.f.map(|_, s| &v * s[0]).with_weight(Some(self.weight()))
    }
}

/// Locate the highest-weight vector and attach the gauge function. For
/// [`Gauge::Unit`] the function is sampled on `[-half_width, half_width]`
/// around `q0`.
pub fn pseudovacuum(rep: &Rep, gauge: Gauge, q0: Complex64, half_width: i32) -> Result<Vacuum> {
    let w = rep.weights();
    let top = *w.iter().max().ok_or(Error::NoHighestWeight)?;
    let mut tops = w.iter().enumerate().filter(|(_, &x)| x == top);
    let (index, _) = tops.next().ok_or(Error::NoHighestWeight)?;
    if tops.next().is_some() {
        return Err(Error::NoHighestWeight);
    }
    let mut vector = CVec::zeros(rep.dim());
    vector[index] = ONE;
    let step = rep.params().step();
    let f = match gauge {
        Gauge::Unit => LatticeFn::from_fn(q0, step, half_width, |_, _| Ok(CVec::from_element(1, ONE)))?,
        Gauge::Lattice(f) => {
            if f.dim() != 1 {
                return Err(Error::DimensionMismatch { left: 1, right: f.dim() });
            }
            f
        }
    };
    Ok(Vacuum { rep: rep.clone(), index, vector, f })
}

/// Basis indices of the weight-`m` subspace.
pub fn weight_basis(rep: &Rep, m: i32) -> Vec<usize> {
    rep.weights().iter().enumerate().filter(|(_, &w)| w == m).map(|(i, _)| i).collect()
}

/// Max residual of the exchange relation
/// `R₁₂(q−2ηh₃,u₁₂) 𝓛₁₃(q,u₁) 𝓛₂₃(q−2ηh₁,u₂) = 𝓛₂₃(q,u₂) 𝓛₁₃(q−2ηh₂,u₁) R₁₂(q,u₁₂)`
/// on `V ⊗ V ⊗ W`.
pub fn rll_residual(rep: &Rep, q: Complex64, u1: Complex64, u2: Complex64) -> Result<f64> {
    let p = *rep.params();
    let step = p.step();
    let d = rep.dim();
    let w = rep.weights().clone();
    let n = 9 * d;
    // Index (a, b, x) ↦ (3a + b)·d + x.
    let idx = |a: usize, b: usize, x: usize| (3 * a + b) * d + x;
    let u12 = u1 - u2;

    // R₁₂ with optional shift by the weight of W.
    let r12 = |shift_by_w: bool, q: Complex64| -> Result<CMat> {
        let mut out = CMat::zeros(n, n);
        let mut cache: Vec<(i32, CMat)> = Vec::new();
        for x in 0..d {
            let lam = if shift_by_w { w[x] } else { 0 };
            if !cache.iter().any(|(l, _)| *l == lam) {
                cache.push((lam, r_build(q - step * f64::from(lam), u12, &p)?.matrix));
            }
            let r = &cache.iter().find(|(l, _)| *l == lam).unwrap().1;
            for a in 0..3 {
                for b in 0..3 {
                    for a2 in 0..3 {
                        for b2 in 0..3 {
                            out[(idx(a, b, x), idx(a2, b2, x))] = r[(pair(a, b), pair(a2, b2))];
                        }
                    }
                }
            }
        }
        Ok(out)
    };
    // 𝓛 on auxiliary leg `leg` (0 or 1) and W; the other auxiliary leg is a
    // spectator whose weight optionally shifts q.
    let lax = |leg: usize, shift_by_spectator: bool, u: Complex64| -> Result<CMat> {
        let mut out = CMat::zeros(n, n);
        for s in 0..3 {
            let lam = if shift_by_spectator { WEIGHTS[s] } else { 0 };
            let blocks = rep.lax_blocks(q - step * f64::from(lam), u)?;
            for i in 0..3 {
                for j in 0..3 {
                    let b = &blocks[i][j];
                    for x in 0..d {
                        for x2 in 0..d {
                            let (r, c) =
                                if leg == 0 { (idx(i, s, x), idx(j, s, x2)) } else { (idx(s, i, x), idx(s, j, x2)) };
                            out[(r, c)] = b[(x, x2)];
                        }
                    }
                }
            }
        }
        Ok(out)
    };
    let lhs = r12(true, q)? * lax(0, false, u1)? * lax(1, true, u2)?;
    let rhs = lax(1, false, u2)? * lax(0, true, u1)? * r12(false, q)?;
    Ok(crate::linalg::max_abs(&(lhs - rhs)))
}

/// Number of exactly nonzero entries of `𝓛(q,u)` that violate weight
/// conservation `w_i + w(x) = w_j + w(x')`.
pub fn lax_weight_violations(rep: &Rep, q: Complex64, u: Complex64) -> Result<usize> {
    let blocks = rep.lax_blocks(q, u)?;
    let w = rep.weights();
    let mut count = 0;
    for i in 0..3 {
        for j in 0..3 {
            let b = &blocks[i][j];
            for x in 0..rep.dim() {
                for x2 in 0..rep.dim() {
                    if b[(x, x2)] != ZERO && WEIGHTS[i] + w[x] != WEIGHTS[j] + w[x2] {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynalg::OpWeight;
    use crate::linalg::max_abs;
    use crate::rmatrix::permutation;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fundamental_at_evaluation_point_is_flip() {
        let p = ModularParams::default();
        let z = c(0.17, 0.0);
        let rep = fundamental_rep(z, p);
        let l = rep.lax(c(0.23, 0.05), z).unwrap();
        assert!(max_abs(&(l - permutation())) < 1e-12);
        assert_eq!(&rep.weights()[..], &[1, 0, -1]);
    }

    #[test]
    fn two_site_lax_matches_explicit_product() {
        // 𝓛(q,u) = R₀₁(q − 2ηh₂, u − z₁) R₀₂(q, u − z₂) on V₀ ⊗ V₁ ⊗ V₂.
        let p = ModularParams::default();
        let (z1, z2) = (c(0.0, 0.0), c(0.17, 0.0));
        let rep = chain(&[z1, z2], p).unwrap();
        let (q, u) = (c(0.23, 0.05), c(0.11, -0.03));
        let step = p.step();
        let mut first = CMat::zeros(27, 27);
        let mut second = CMat::zeros(27, 27);
        for s in 0..3 {
            let r = r_build(q - step * f64::from(WEIGHTS[s]), u - z1, &p).unwrap().matrix;
            let r2 = r_build(q, u - z2, &p).unwrap().matrix;
            for a in 0..9 {
                for b in 0..9 {
                    first[(3 * a + s, 3 * b + s)] = r[(a, b)];
                    let (i, x) = (a / 3, a % 3);
                    let (j, y) = (b / 3, b % 3);
                    second[(9 * i + 3 * s + x, 9 * j + 3 * s + y)] = r2[(a, b)];
                }
            }
        }
        let expected = first * second;
        assert!(max_abs(&(rep.lax(q, u).unwrap() - expected)) < 1e-12);
    }

    #[test]
    fn tensor_product_is_associative() {
        let p = ModularParams::default();
        let zs = default_sites(3);
        let f = |z| fundamental_rep(z, p);
        let left = tensor_rep(tensor_rep(f(zs[0]), f(zs[1])).unwrap(), f(zs[2])).unwrap();
        let right = tensor_rep(f(zs[0]), tensor_rep(f(zs[1]), f(zs[2])).unwrap()).unwrap();
        let (q, u) = (c(0.23, 0.05), c(0.11, -0.03));
        let d = max_abs(&(left.lax(q, u).unwrap() - right.lax(q, u).unwrap()));
        assert!(d < 1e-10, "{d}");
        assert_eq!(left.weights(), right.weights());
    }

    #[test]
    fn lax_is_zero_weight() {
        let p = ModularParams::default();
        let rep = chain(&default_sites(3), p).unwrap();
        assert_eq!(lax_weight_violations(&rep, c(0.23, 0.05), c(0.11, -0.03)).unwrap(), 0);
    }

    #[test]
    fn rll_one_and_two_sites() {
        let p = ModularParams::default();
        for n in 1..=2 {
            let rep = chain(&default_sites(n), p).unwrap();
            let r = rll_residual(&rep, c(0.23, 0.05), c(0.21, 0.03), c(-0.12, 0.05)).unwrap();
            assert!(r < 1e-8, "N={n}: {r}");
        }
    }

    #[test]
    fn generator_weights_and_shifts() {
        let p = ModularParams::default();
        let rep = chain(&default_sites(2), p).unwrap();
        let l = lax_to_dynops(&rep, c(0.11, -0.03));
        assert_eq!(l.b1().weight(), OpWeight::Definite(-1));
        assert_eq!(l.b2().weight(), OpWeight::Definite(-2));
        assert_eq!(l.b3().weight(), OpWeight::Definite(-1));
        assert_eq!(l.c1().weight(), OpWeight::Definite(1));
        assert_eq!(l.c2().weight(), OpWeight::Definite(2));
        for a in [l.a1(), l.a2(), l.a3()] {
            assert_eq!(a.weight(), OpWeight::Definite(0));
        }
        assert_eq!(l.a2().shifts().collect::<Vec<_>>(), vec![0]);
        assert_eq!(l.a1().shifts().collect::<Vec<_>>(), vec![1]);
        assert_eq!(l.a3().shifts().collect::<Vec<_>>(), vec![-1]);
    }

    #[test]
    fn diagonal_sum_has_three_shifts() {
        let p = ModularParams::default();
        let rep = fundamental_rep(c(0.0, 0.0), p);
        let l = lax_to_dynops(&rep, c(0.11, -0.03));
        let t = l.a1().add(l.a2()).unwrap().add(l.a3()).unwrap();
        assert_eq!(t.shifts().collect::<Vec<_>>(), vec![-1, 0, 1]);
    }

    #[test]
    fn vacuum_eigenvalues_one_site() {
        let p = ModularParams::default();
        let z = c(0.17, 0.0);
        let rep = fundamental_rep(z, p);
        let vac = pseudovacuum(&rep, Gauge::Unit, c(0.137, 0.043), 6).unwrap();
        assert_eq!(vac.index, 0);
        let u = c(0.31, -0.07);
        let a1 = vac.a(0, c(0.2, 0.1), u).unwrap();
        assert!((a1 - p.g(u - z).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn vacuum_eigenvalues_two_sites() {
        let p = ModularParams::default();
        let zs = default_sites(2);
        let rep = chain(&zs, p).unwrap();
        let vac = pseudovacuum(&rep, Gauge::Unit, c(0.137, 0.043), 6).unwrap();
        let u = c(0.31, -0.07);
        let expected = p.g(u - zs[0]).unwrap() * p.g(u - zs[1]).unwrap();
        for q in [c(0.2, 0.1), c(-0.35, 0.02), c(0.41, -0.08)] {
            assert!((vac.a(0, q, u).unwrap() - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn raising_operators_annihilate_vacuum() {
        let p = ModularParams::default();
        let rep = chain(&default_sites(2), p).unwrap();
        let vac = pseudovacuum(&rep, Gauge::Unit, c(0.137, 0.043), 6).unwrap();
        let l = lax_to_dynops(&rep, c(0.31, -0.07));
        let psi = vac.state();
        for op in [l.c1(), l.c2(), l.c3()] {
            assert!(op.apply(&psi).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn no_highest_weight_for_degenerate_grading() {
        #[derive(Debug)]
        struct Flat(ModularParams, Arc<[i32]>);
        impl Representation for Flat {
            fn params(&self) -> &ModularParams {
                &self.0
            }
            fn weights(&self) -> &Arc<[i32]> {
                &self.1
            }
            fn lax_blocks(&self, _: Complex64, _: Complex64) -> Result<LaxBlocks> {
                Ok(std::array::from_fn(|_| std::array::from_fn(|_| CMat::identity(2, 2))))
            }
            fn sites(&self) -> Vec<Complex64> {
                Vec::new()
            }
        }
        let rep: Rep = Arc::new(Flat(ModularParams::default(), Arc::from(vec![0, 0])));
        assert!(matches!(pseudovacuum(&rep, Gauge::Unit, c(0.1, 0.0), 3), Err(Error::NoHighestWeight)));
    }

    #[test]
    fn zero_weight_bases() {
        let p = ModularParams::default();
        assert_eq!(weight_basis(&chain(&default_sites(1), p).unwrap(), 0), vec![1]);
        assert_eq!(weight_basis(&chain(&default_sites(2), p).unwrap(), 0), vec![2, 4, 6]);
        assert_eq!(weight_basis(&chain(&default_sites(3), p).unwrap(), 0).len(), 7);
    }
}
