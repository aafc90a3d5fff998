//! Jacobi's odd theta function and the scalar coefficient functions built
//! from it.
//!
//! The theta function is
//!
//! ```text
//! θ(u) = -Σ_{j∈ℤ} exp(πi (j+½)² τ + 2πi (j+½)(u+½))
//! ```
//!
//! It is odd, satisfies `θ(u+1) = -θ(u)` and
//! `θ(u+τ) = -exp(-πiτ - 2πiu) θ(u)`. Every matrix entry of the R-matrix and
//! every coefficient in the creation operators is a ratio of products of
//! `θ` at shifted arguments. Denominators are guarded: if a denominator is
//! closer to zero than [`ModularParams::guard_eps`] the evaluation fails with
//! [`Error::PoleProximity`] instead of returning a huge number.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Global evaluation context: modular parameter `tau`, step `eta`, theta
/// series tolerance and pole guard.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularParams {
    pub tau: Complex64,
    pub eta: Complex64,
    pub theta_tol: f64,
    pub guard_eps: f64,
}

impl Default for ModularParams {
    /// Desk-scale defaults: `tau = 1.1i`, `eta = 0.31`.
    fn default() -> Self {
        Self { tau: Complex64::new(0.0, 1.1), eta: Complex64::new(0.31, 0.0), theta_tol: 1e-14, guard_eps: 1e-8 }
    }
}

impl ModularParams {
    /// Validated constructor.
    pub fn new(tau: Complex64, eta: Complex64, theta_tol: f64, guard_eps: f64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::InvalidParams(format!("Im(tau) must be positive, got tau = {tau}")));
        }
        if !(theta_tol > 0.0) || !(guard_eps > 0.0) {
            return Err(Error::InvalidParams("theta_tol and guard_eps must be positive".into()));
        }
        let params = Self { tau, eta, theta_tol, guard_eps };
        for (label, x) in [("theta(eta)", eta), ("theta(2 eta)", 2.0 * eta)] {
            let t = params.theta(x)?;
            if t.norm() < guard_eps {
                return Err(Error::InvalidParams(format!(
                    "{label} vanishes (|.| = {:e}); eta is too close to a lattice point",
                    t.norm()
                )));
            }
        }
        Ok(params)
    }

    pub fn with_tau_eta(tau: Complex64, eta: Complex64) -> Result<Self> {
        let d = Self::default();
        Self::new(tau, eta, d.theta_tol, d.guard_eps)
    }

    /// Lattice step `2η` of every dynamical shift.
    pub fn step(&self) -> Complex64 {
        2.0 * self.eta
    }

    /// Number of terms on each side of the truncated theta series at `u`.
    pub fn theta_cutoff(&self, u: Complex64) -> i64 {
        let num = (1.0 / self.theta_tol).ln() + 2.0 * PI * u.im.abs();
        let x = (num / (PI * self.tau.im)).max(0.0);
        x.sqrt().ceil() as i64 + 2
    }

    /// Jacobi's odd theta function, summed over `j ∈ [-J-1, J]`.
    pub fn theta(&self, u: Complex64) -> Result<Complex64> {
        let cutoff = self.theta_cutoff(u);
        let shifted = u + 0.5;
        let exponent = |j: i64| {
            let a = j as f64 + 0.5;
            I * PI * a * a * self.tau + 2.0 * I * PI * a * shifted
        };
        let mut sum = Complex64::new(0.0, 0.0);
        let mut max_log = f64::NEG_INFINITY;
        for j in -cutoff - 1..=cutoff {
            let e = exponent(j);
            max_log = max_log.max(e.re);
            sum += e.exp();
        }
        // First omitted terms on either side relative to the largest kept.
        let omitted = exponent(cutoff + 1).re.max(exponent(-cutoff - 2).re);
        let ratio = (omitted - max_log).exp();
        if !(ratio < self.theta_tol) {
            return Err(Error::ThetaTruncation { u: u.to_string(), ratio });
        }
        Ok(-sum)
    }

    fn guarded(&self, label: &str, value: Complex64) -> Result<Complex64> {
        let modulus = value.norm();
        if modulus < self.guard_eps || !modulus.is_finite() {
            Err(Error::PoleProximity { factor: label.to_string(), modulus })
        } else {
            Ok(value)
        }
    }

    /// Product of thetas in `num` divided by product of thetas in `den`, each
    /// denominator factor guarded individually.
    fn theta_ratio(&self, name: &str, num: &[Complex64], den: &[Complex64]) -> Result<Complex64> {
        let mut acc = Complex64::new(1.0, 0.0);
        for &x in num {
            acc *= self.theta(x)?;
        }
        for (k, &x) in den.iter().enumerate() {
            let t = self.theta(x)?;
            acc /= self.guarded(&format!("{name}: denominator factor {k} theta({x})"), t)?;
        }
        Ok(acc)
    }

    pub fn g(&self, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        self.theta_ratio("g", &[u - eta, u - 2.0 * eta], &[eta, 2.0 * eta])
    }

    pub fn alpha(&self, q1: Complex64, q2: Complex64, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        let q12 = q1 - q2;
        self.theta_ratio("alpha", &[eta - u, q12 - u], &[eta, q12])
    }

    pub fn beta(&self, q1: Complex64, q2: Complex64, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        let q12 = q1 - q2;
        self.theta_ratio("beta", &[eta - u, u, q12 - 2.0 * eta], &[-2.0 * eta, eta, q12])
    }

    pub fn epsilon(&self, q: Complex64, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        let first = self.theta_ratio("epsilon", &[eta + u, 2.0 * eta - u], &[eta, 2.0 * eta])?;
        let prefactor = self.theta_ratio("epsilon", &[u, eta - u], &[eta, 2.0 * eta])?;
        let bracket = self.theta_ratio("epsilon", &[q + eta, q - 2.0 * eta], &[q - eta, q])?
            + self.theta_ratio("epsilon", &[q - eta, q + 2.0 * eta], &[q + eta, q])?;
        Ok(first - prefactor * bracket)
    }

    pub fn gamma(&self, q1: Complex64, q2: Complex64, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        self.theta_ratio(
            "gamma",
            &[u, q1 + q2 - eta - u, q1 - 2.0 * eta, q2 + eta],
            &[eta, q1 + q2 - 2.0 * eta, q1 + eta, q2],
        )
    }

    pub fn delta(&self, q: Complex64, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        self.theta_ratio("delta", &[u - q, u - q + eta], &[q, q - eta])
    }

    /// Closed form of the exchange factor of two `B₁` generators; independent
    /// of the dynamical parameter.
    pub fn omega(&self, u: Complex64) -> Result<Complex64> {
        let eta = self.eta;
        self.theta_ratio("omega", &[u + eta, u - 2.0 * eta], &[u - eta, u + 2.0 * eta])
    }

    /// The exchange factor in its original q-dependent form. Only used as an
    /// independent check on [`Self::omega`].
    pub fn omega_dynamical(&self, q: Complex64, u: Complex64) -> Result<Complex64> {
        let gqq = self.gamma(q, -q, -u)?;
        let num = self.epsilon(q, -u)? * gqq + self.gamma(q, self.eta, -u)? * self.gamma(self.eta, -q, -u)?;
        let den = self.guarded("omega_dynamical: g(-u)", self.g(-u)?)?
            * self.guarded("omega_dynamical: gamma(q,-q,-u)", gqq)?;
        Ok(num / den)
    }

    pub fn y(&self, q: Complex64, u: Complex64) -> Result<Complex64> {
        let den = self.guarded("y: gamma(q,eta,u)", self.gamma(q, self.eta, u)?)?;
        Ok(self.gamma(q, -q, u)? / den)
    }

    pub fn z(&self, q: Complex64, u: Complex64) -> Result<Complex64> {
        let den = self.guarded("z: beta(q,eta,u)", self.beta(q, self.eta, u)?)?;
        Ok(self.g(u)? / den)
    }

    /// Evaluate a coefficient function by name. `args` holds the dynamical
    /// arguments: none for `g` and `omega`, one for `epsilon`, `delta`, `y`,
    /// `z`, two for `alpha`, `beta`, `gamma`.
    pub fn coeff(&self, name: CoeffName, args: &[Complex64], u: Complex64) -> Result<Complex64> {
        if args.len() != name.arity() {
            return Err(Error::InvalidParams(format!(
                "{name} takes {} dynamical arguments, got {}",
                name.arity(),
                args.len()
            )));
        }
        match name {
            CoeffName::G => self.g(u),
            CoeffName::Alpha => self.alpha(args[0], args[1], u),
            CoeffName::Beta => self.beta(args[0], args[1], u),
            CoeffName::Epsilon => self.epsilon(args[0], u),
            CoeffName::Gamma => self.gamma(args[0], args[1], u),
            CoeffName::Delta => self.delta(args[0], u),
            CoeffName::Omega => self.omega(u),
            CoeffName::Y => self.y(args[0], u),
            CoeffName::Z => self.z(args[0], u),
        }
    }
}

/// Quasiperiods of the theta function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Period {
    /// `θ(u+1) = -θ(u)`
    One,
    /// `θ(u+τ) = -exp(-πiτ - 2πiu) θ(u)`
    Tau,
}

impl ModularParams {
    /// Relative defect of the quasiperiodicity relation at `u`.
    pub fn quasi_period_residual(&self, period: Period, u: Complex64) -> Result<f64> {
        let t = self.theta(u)?;
        let (shifted, expected) = match period {
            Period::One => (self.theta(u + 1.0)?, -t),
            Period::Tau => (self.theta(u + self.tau)?, -(-I * PI * (self.tau + 2.0 * u)).exp() * t),
        };
        Ok((shifted - expected).norm() / shifted.norm().max(expected.norm()).max(f64::MIN_POSITIVE))
    }

    /// Relative defect of
    /// `θ(u+x)θ(u-x)θ(v+y)θ(v-y) = θ(u+y)θ(u-y)θ(v+x)θ(v-x) + θ(u+v)θ(u-v)θ(x+y)θ(x-y)`,
    /// measured against the largest of the three products.
    pub fn four_term_residual(&self, u: Complex64, v: Complex64, x: Complex64, y: Complex64) -> Result<f64> {
        let t = |a: Complex64| self.theta(a);
        let lhs = t(u + x)? * t(u - x)? * t(v + y)? * t(v - y)?;
        let r1 = t(u + y)? * t(u - y)? * t(v + x)? * t(v - x)?;
        let r2 = t(u + v)? * t(u - v)? * t(x + y)? * t(x - y)?;
        let scale = lhs.norm().max(r1.norm()).max(r2.norm()).max(f64::MIN_POSITIVE);
        Ok((lhs - r1 - r2).norm() / scale)
    }
}

/// Names of the scalar coefficient functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffName {
    G,
    Alpha,
    Beta,
    Epsilon,
    Gamma,
    Delta,
    Omega,
    Y,
    Z,
}

impl CoeffName {
    pub const ALL: [CoeffName; 9] = [
        CoeffName::G,
        CoeffName::Alpha,
        CoeffName::Beta,
        CoeffName::Epsilon,
        CoeffName::Gamma,
        CoeffName::Delta,
        CoeffName::Omega,
        CoeffName::Y,
        CoeffName::Z,
    ];

    pub fn arity(self) -> usize {
        match self {
            CoeffName::G | CoeffName::Omega => 0,
            CoeffName::Epsilon | CoeffName::Delta | CoeffName::Y | CoeffName::Z => 1,
            CoeffName::Alpha | CoeffName::Beta | CoeffName::Gamma => 2,
        }
    }
}

impl fmt::Display for CoeffName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoeffName::G => "g",
            CoeffName::Alpha => "alpha",
            CoeffName::Beta => "beta",
            CoeffName::Epsilon => "epsilon",
            CoeffName::Gamma => "gamma",
            CoeffName::Delta => "delta",
            CoeffName::Omega => "omega",
            CoeffName::Y => "y",
            CoeffName::Z => "z",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta_vanishes_at_origin() {
        let p = ModularParams::default();
        assert!(p.theta(c(0.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn theta_is_odd() {
        let p = ModularParams::default();
        let u = c(0.3, 0.1);
        let r = p.theta(u).unwrap() + p.theta(-u).unwrap();
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn theta_matches_product_formula() {
        // Jacobi triple product for the odd theta function in this normalisation:
        // θ(u) = 2 p^{1/8} sin(πu) Π (1-p^n)(1-p^n e^{2πiu})(1-p^n e^{-2πiu}), p = e^{2πiτ}.
        let p = ModularParams::default();
        let nome = (2.0 * I * PI * p.tau).exp();
        for u in [c(0.13, 0.02), c(-0.41, 0.2), c(0.7, -0.3)] {
            let mut prod = 2.0 * (I * PI * p.tau / 4.0).exp() * (PI * u).sin();
            let e = (2.0 * I * PI * u).exp();
            let mut pn = nome;
            for _ in 0..60 {
                prod *= (1.0 - pn) * (1.0 - pn * e) * (1.0 - pn / e);
                pn *= nome;
            }
            let t = p.theta(u).unwrap();
            assert!((t - prod).norm() < 1e-12 * prod.norm().max(1.0), "{t} vs {prod}");
        }
    }

    #[test]
    fn truncation_failure_is_reported() {
        let p = ModularParams::default();
        let err = p.theta(c(0.1, 40.0)).unwrap_err();
        assert!(matches!(err, Error::ThetaTruncation { .. }), "{err}");
    }

    #[test]
    fn rejects_real_tau() {
        assert!(ModularParams::with_tau_eta(c(0.5, 0.0), c(0.31, 0.0)).is_err());
        assert!(ModularParams::with_tau_eta(c(0.2, -1.0), c(0.31, 0.0)).is_err());
    }

    #[test]
    fn rejects_lattice_eta() {
        assert!(ModularParams::with_tau_eta(c(0.0, 1.1), c(0.5, 0.0)).is_err());
        assert!(ModularParams::with_tau_eta(c(0.0, 1.1), c(1.0, 0.0)).is_err());
        assert!(ModularParams::new(c(0.0, 1.1), c(0.31, 0.0), 0.0, 1e-8).is_err());
    }

    #[test]
    fn values_at_zero_spectral_parameter() {
        let p = ModularParams::default();
        let (q1, q2, q) = (c(0.21, 0.07), c(-0.13, 0.04), c(0.37, -0.05));
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert!((p.g(zero).unwrap() - one).norm() < 1e-13);
        assert!((p.alpha(q1, q2, zero).unwrap() - one).norm() < 1e-13);
        assert!(p.beta(q1, q2, zero).unwrap().norm() < 1e-13);
        assert!(p.gamma(q1, q2, zero).unwrap().norm() < 1e-13);
        assert!((p.delta(q, zero).unwrap() - one).norm() < 1e-13);
        assert!((p.epsilon(q, zero).unwrap() - one).norm() < 1e-13);
    }

    #[test]
    fn delta_vanishes_on_diagonal() {
        let p = ModularParams::default();
        let q = c(0.23, 0.11);
        assert!(p.delta(q, q).unwrap().norm() < 1e-13);
    }

    #[test]
    fn z_has_a_pole_at_zero() {
        let p = ModularParams::default();
        let err = p.z(c(0.2, 0.1), c(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::PoleProximity { .. }));
        assert!(p.z(c(0.2, 0.1), c(0.1, 0.0)).is_ok());
    }

    #[test]
    fn pole_reports_factor() {
        let p = ModularParams::default();
        match p.alpha(c(0.3, 0.0), c(0.3, 0.0), c(0.1, 0.0)) {
            Err(Error::PoleProximity { factor, .. }) => assert!(factor.contains("alpha")),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn coeff_dispatch_checks_arity() {
        let p = ModularParams::default();
        let u = c(0.1, 0.02);
        assert!(p.coeff(CoeffName::Alpha, &[u], u).is_err());
        for name in CoeffName::ALL {
            let args: Vec<_> = [c(0.21, 0.03), c(-0.12, 0.05)][..name.arity()].to_vec();
            let via_name = p.coeff(name, &args, u).unwrap();
            assert!(via_name.is_finite(), "{name}");
        }
        assert_eq!(p.coeff(CoeffName::G, &[], u).unwrap(), p.g(u).unwrap());
    }

    #[test]
    fn omega_closed_form_agrees_with_quotient() {
        let p = ModularParams::default();
        for q in [c(0.31, 0.07), c(-0.17, 0.12)] {
            for u in [c(0.11, -0.03), c(-0.27, 0.05)] {
                let d = p.omega_dynamical(q, u).unwrap() - p.omega(u).unwrap();
                assert!(d.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn quasiperiodicity() {
        let p = ModularParams::default();
        for u in [c(0.3, 0.1), c(-0.41, -0.27), c(0.05, 0.5)] {
            assert!(p.quasi_period_residual(Period::One, u).unwrap() < 1e-12);
            assert!(p.quasi_period_residual(Period::Tau, u).unwrap() < 1e-12);
        }
        // Without the factors of π the relation fails.
        let u = c(0.3, 0.1);
        let no_pi = -(-I * (p.tau + 2.0 * u)).exp() * p.theta(u).unwrap();
        assert!((p.theta(u + p.tau).unwrap() - no_pi).norm() > 1e-2);
    }

    #[test]
    fn four_term_identity() {
        let p = ModularParams::default();
        let r = p.four_term_residual(c(0.13, 0.02), c(-0.31, 0.2), c(0.27, -0.11), c(0.05, 0.4)).unwrap();
        assert!(r < 1e-12, "{r}");
    }
}
