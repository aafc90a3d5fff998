//! Seeded verification suites, configuration and reports.
//!
//! Each suite sweeps one family of identities with its own random stream,
//! derived from the seed and the suite name, so suites can run in any order
//! or concurrently without changing their results.

pub mod config;
pub mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;

use crate::bethe::{
    bethe_residual_n2, eigencheck, magnon_vacuum, phi_build, phi_symmetry_residual, proof_identity_residual,
    solve_bethe, BetheRoots, EigenCheck, ProofIdentity, SolveOptions, U_SAMPLES,
};
use crate::dynalg::LatticeFn;
use crate::elliptic::Period;
use crate::error::{Error, Result};
use crate::exchange::{rllti_residual, CommRel};
use crate::linalg::{max_abs, CVec};
use crate::repspace::{chain, lax_weight_violations, pseudovacuum, rll_residual, Gauge, Rep, Vacuum};
use crate::rmatrix::{dybe_residual, permutation, r_build, unitarity_residual, zero_weight_violations};
use crate::sampling::{complex_in_box, resample, stream, SampleRng};
use crate::transfer::{commutator_residual, random_inputs, weight_leakage};

pub use config::{Config, GaugeChoice};
pub use report::{emit_report, Case, Report, SuiteReport};

/// Suite names in declaration order.
pub const SUITES: [&str; 10] =
    ["theta", "omega", "rmatrix", "ybe", "rll", "commrels", "symmetry", "transfer", "bethe-n1", "bethe-n2"];

/// Half widths of the sampling boxes for `q` and `u`.
const Q_BOX: (f64, f64) = (0.5, 0.3);
const U_BOX: (f64, f64) = (0.5, 0.3);

fn draw_q(rng: &mut SampleRng) -> Complex64 {
    complex_in_box(rng, Q_BOX.0, Q_BOX.1)
}

fn draw_u(rng: &mut SampleRng) -> Complex64 {
    complex_in_box(rng, U_BOX.0, U_BOX.1)
}

/// Run one suite.
pub fn run_suite(name: &str, cfg: &Config) -> Result<SuiteReport> {
    let mut rng = stream(cfg.seed, name);
    let cases = match name {
        "theta" => theta_suite(cfg, &mut rng),
        "omega" => omega_suite(cfg, &mut rng),
        "rmatrix" => rmatrix_suite(cfg, &mut rng),
        "ybe" => ybe_suite(cfg, &mut rng),
        "rll" => rll_suite(cfg, &mut rng),
        "commrels" => commrels_suite(cfg, &mut rng),
        "symmetry" => symmetry_suite(cfg, &mut rng),
        "transfer" => transfer_suite(cfg, &mut rng),
        "bethe-n1" => bethe_suite(cfg, 1),
        "bethe-n2" => bethe_suite(cfg, 2),
        _ => return Err(Error::UnknownSuite(name.to_string())),
    };
    Ok(SuiteReport::new(name, cases))
}

/// Run the named suites concurrently and collect them, in the given order,
/// into a report.
pub fn run_suites(names: &[String], cfg: &Config) -> Result<Report> {
    for n in names {
        if !SUITES.contains(&n.as_str()) {
            return Err(Error::UnknownSuite(n.clone()));
        }
    }
    let results: Vec<(SuiteReport, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = names
            .iter()
            .map(|n| {
                s.spawn(move || {
                    let start = Instant::now();
                    let r = run_suite(n, cfg).expect("suite name checked above");
                    (r, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
    });
    let timings: BTreeMap<String, f64> = results.iter().map(|(r, t)| (r.name.clone(), *t)).collect();
    Ok(Report::new(cfg.echo(), results.into_iter().map(|(r, _)| r).collect(), timings))
}

/// Draw until the evaluation clears every pole guard, then grade it.
fn sampled<F>(rng: &mut SampleRng, name: &str, tol: f64, mut f: F) -> Case
where
    F: FnMut(&mut SampleRng) -> Result<(f64, Vec<(&'static str, Complex64)>)>,
{
    match resample(rng, |r| f(r)) {
        Ok((res, params)) => params.into_iter().fold(Case::checked(name, Ok(res), tol), |c, (k, v)| c.with(k, v)),
        Err(e) => Case::checked(name, Err(e), tol),
    }
}

fn theta_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let p = cfg.params;
    let tol = cfg.tolerance("theta", 1e-9);
    let mut cases = Vec::new();
    for (label, period) in [("period-1", Period::One), ("period-tau", Period::Tau)] {
        for _ in 0..100 {
            cases.push(sampled(rng, label, tol, |r| {
                let u = complex_in_box(r, 0.5, 0.5);
                Ok((p.quasi_period_residual(period, u)?, vec![("u", u)]))
            }));
        }
    }
    for _ in 0..100 {
        cases.push(sampled(rng, "four-term", tol, |r| {
            let [u, v, x, y] = [0; 4].map(|_| complex_in_box(r, 0.5, 0.4));
            Ok((p.four_term_residual(u, v, x, y)?, vec![("u", u), ("v", v), ("x", x), ("y", y)]))
        }));
    }
    cases
}

fn omega_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let p = cfg.params;
    let tol = cfg.tolerance("omega", 1e-10);
    let mut cases = Vec::new();
    let axis = |k: usize, im: f64| Complex64::new(-0.45 + 0.9 * k as f64 / 19.0, im);
    for a in 0..20 {
        for b in 0..20 {
            let (q, u) = (axis(a, 0.07), axis(b, 0.03));
            let r = p.omega_dynamical(q, u).and_then(|d| Ok((d - p.omega(u)?).norm()));
            cases.push(Case::checked("q-independence", r, tol).with("q", q).with("u", u));
        }
    }
    for _ in 0..50 {
        cases.push(sampled(rng, "inversion", tol, |r| {
            let u = draw_u(r);
            Ok(((p.omega(u)? * p.omega(-u)? - 1.0).norm(), vec![("u", u)]))
        }));
    }
    cases
}

fn rmatrix_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let p = cfg.params;
    let over = |d| cfg.tolerance("rmatrix", d);
    let mut cases = Vec::new();
    let flip = permutation();
    for _ in 0..10 {
        cases.push(sampled(rng, "flip-at-zero", over(1e-12), |r| {
            let q = draw_q(r);
            Ok((max_abs(&(r_build(q, Complex64::default(), &p)?.matrix - &flip)), vec![("q", q)]))
        }));
    }
    for _ in 0..100 {
        cases.push(sampled(rng, "unitarity", over(1e-9), |r| {
            let (q, u) = (draw_q(r), draw_u(r));
            Ok((unitarity_residual(q, u, &p)?, vec![("q", q), ("u", u)]))
        }));
    }
    for _ in 0..10 {
        // Structural: the count of forbidden nonzero entries must be zero.
        cases.push(sampled(rng, "zero-weight", 0.0, |r| {
            let (q, u) = (draw_q(r), draw_u(r));
            Ok((zero_weight_violations(&r_build(q, u, &p)?) as f64, vec![("q", q), ("u", u)]))
        }));
    }
    cases
}

fn ybe_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let p = cfg.params;
    let tol = cfg.tolerance("ybe", 1e-8);
    let mut cases: Vec<Case> = (0..100)
        .map(|_| {
            sampled(rng, "dybe", tol, |r| {
                let (q, u1, u2) = (draw_q(r), draw_u(r), draw_u(r));
                Ok((dybe_residual(q, u1, u2, &p)?, vec![("q", q), ("u1", u1), ("u2", u2)]))
            })
        })
        .collect();
    cases.push(sampled(rng, "dybe-coincident", cfg.tolerance("ybe", 1e-10), |r| {
        let (q, u) = (draw_q(r), draw_u(r));
        Ok((dybe_residual(q, u, u, &p)?, vec![("q", q), ("u1", u), ("u2", u)]))
    }));
    cases
}

fn rll_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let p = cfg.params;
    let tol = cfg.tolerance("rll", 1e-8);
    let mut cases = Vec::new();
    for n in 1..=2 {
        let rep = match chain(&cfg.sites_for(n), p) {
            Ok(r) => r,
            Err(e) => return vec![Case::checked(format!("chain-{n}"), Err(e), tol)],
        };
        for _ in 0..50 {
            cases.push(
                sampled(rng, "rll", tol, |r| {
                    let (q, u1, u2) = (draw_q(r), draw_u(r), draw_u(r));
                    Ok((rll_residual(&rep, q, u1, u2)?, vec![("q", q), ("u1", u1), ("u2", u2)]))
                })
                .with("sites", n),
            );
        }
        cases.push(
            sampled(rng, "zero-weight", 0.0, |r| {
                let (q, u) = (draw_q(r), draw_u(r));
                Ok((lax_weight_violations(&rep, q, u)? as f64, vec![("q", q), ("u", u)]))
            })
            .with("sites", n),
        );
        cases.push(
            sampled(rng, "rll-operator", tol, |r| {
                let (u1, u2) = (draw_u(r), draw_u(r));
                let qs: Vec<Complex64> = (0..20).map(|_| draw_q(r)).collect();
                Ok((rllti_residual(&rep, u1, u2, &qs)?, vec![("u1", u1), ("u2", u2)]))
            })
            .with("sites", n)
            .with("q_samples", 20usize),
        );
    }
    cases
}

fn lattice_inputs(rng: &mut SampleRng, rep: &Rep, cfg: &Config, count: usize) -> Vec<LatticeFn> {
    (0..count)
        .map(|_| LatticeFn::random(rng, rep.weights(), None, cfg.q0, rep.params().step(), cfg.half_width))
        .collect()
}

fn commrels_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let tol = cfg.tolerance("commrels", 1e-8);
    let rep = match chain(&cfg.sites_for(2), cfg.params) {
        Ok(r) => r,
        Err(e) => return vec![Case::checked("chain-2", Err(e), tol)],
    };
    let inputs = lattice_inputs(rng, &rep, cfg, 10);
    let mut cases = Vec::new();
    for rel in CommRel::ALL {
        let drawn = resample(rng, |r| {
            let (u1, u2) = (draw_u(r), draw_u(r));
            Ok((u1, u2, rel.residuals(&rep, u1, u2, &inputs)?))
        });
        match drawn {
            Ok((u1, u2, rs)) => cases.extend(
                rs.into_iter()
                    .enumerate()
                    .map(|(i, r)| Case::checked(rel.name(), Ok(r), tol).with("u1", u1).with("u2", u2).with("input", i)),
            ),
            Err(e) => cases.push(Case::checked(rel.name(), Err(e), tol)),
        }
    }
    cases
}

fn symmetry_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let p = cfg.params;
    let over = |d| cfg.tolerance("symmetry", d);
    let mut cases = Vec::new();
    for n in 0..=4 {
        let draw: Vec<Complex64> = (0..n).map(|_| draw_u(rng)).collect();
        let r = phi_build(&draw).map(|poly| match poly.leading_coefficient() {
            Some(c) if c.is_one() => 0.0,
            _ => 1.0,
        });
        cases.push(Case::checked("leading-coefficient", r, 0.0).with("n", n));
    }
    // Two and three magnons on two sites, four magnons on three sites.
    for (n, sites, tol) in [(2, 2, over(1e-8)), (3, 2, over(1e-8)), (4, 3, over(1e-7))] {
        let rep = match chain(&cfg.sites_for(sites), p) {
            Ok(r) => r,
            Err(e) => return vec![Case::checked("chain", Err(e), tol)],
        };
        let inputs = lattice_inputs(rng, &rep, cfg, 10);
        for i in 1..n {
            let drawn = resample(rng, |r| {
                let us: Vec<Complex64> = (0..n).map(|_| draw_u(r)).collect();
                Ok((phi_symmetry_residual(&us, i, &rep, &inputs)?, us))
            });
            let case = match drawn {
                Ok((res, us)) => Case::checked("exchange", Ok(res), tol).with("u", us.as_slice()),
                Err(e) => Case::checked("exchange", Err(e), tol),
            };
            cases.push(case.with("n", n).with("i", i).with("sites", sites));
        }
    }
    for (label, which) in [("identity-1", ProofIdentity::First), ("identity-2", ProofIdentity::Second)] {
        for _ in 0..100 {
            let drawn = resample(rng, |r| {
                let q = draw_q(r);
                let us: Vec<Complex64> = (0..which.points()).map(|_| draw_u(r)).collect();
                Ok((proof_identity_residual(which, &p, q, &us)?, q, us))
            });
            cases.push(match drawn {
                Ok((res, q, us)) => Case::checked(label, Ok(res), over(1e-9)).with("q", q).with("u", us.as_slice()),
                Err(e) => Case::checked(label, Err(e), over(1e-9)),
            });
        }
    }
    cases
}

fn transfer_suite(cfg: &Config, rng: &mut SampleRng) -> Vec<Case> {
    let over = |d| cfg.tolerance("transfer", d);
    let mut cases = Vec::new();
    for &n in &cfg.transfer_sites {
        let rep = match chain(&cfg.sites_for(n), cfg.params) {
            Ok(r) => r,
            Err(e) => {
                cases.push(Case::checked("chain", Err(e), over(1e-8)).with("sites", n));
                continue;
            }
        };
        let zero = match random_inputs(rng, &rep, 0, cfg.q0, cfg.half_width, 10) {
            Ok(z) => z,
            Err(e) => {
                cases.push(Case::checked("commutator", Err(e), over(1e-8)).with("sites", n));
                continue;
            }
        };
        for _ in 0..20 {
            let case = sampled(rng, "commutator", over(1e-8), |r| {
                let (u, v) = (draw_u(r), draw_u(r));
                Ok((commutator_residual(&rep, u, v, &zero)?, vec![("u", u), ("v", v)]))
            });
            cases.push(case.with("sites", n));
        }
        let top = n as i32;
        for m in -top..=top {
            let f = random_inputs(rng, &rep, m, cfg.q0, cfg.half_width, 1).map(|mut v| v.remove(0));
            let case = match f {
                Ok(f) => sampled(rng, "weight-preservation", over(1e-12), |r| {
                    let u = draw_u(r);
                    Ok((weight_leakage(&rep, u, &f, m)?, vec![("u", u)]))
                }),
                Err(e) => Case::checked("weight-preservation", Err(e), over(1e-12)),
            };
            cases.push(case.with("sites", n).with("weight", m));
        }
        // Off the zero-weight sector no commutativity is claimed.
        if let Ok(f) = random_inputs(rng, &rep, 1, cfg.q0, cfg.half_width, 1) {
            let (u, v) = (draw_u(rng), draw_u(rng));
            cases.push(
                Case::info("commutator-weight-1", commutator_residual(&rep, u, v, &f))
                    .with("sites", n)
                    .with("u", u)
                    .with("v", v),
            );
        }
    }
    cases
}

/// Pseudovacuum for `n` magnons with the configured gauge.
pub fn bethe_vacuum(cfg: &Config, rep: &Rep, n: usize) -> Result<Vacuum> {
    match &cfg.gauge {
        GaugeChoice::FunctionalEquation => magnon_vacuum(rep, n, cfg.q0, cfg.half_width),
        GaugeChoice::Unit => pseudovacuum(rep, Gauge::Unit, cfg.q0, cfg.half_width),
        GaugeChoice::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)?;
            let expected = (2 * cfg.half_width + 1) as usize;
            if pairs.len() != expected {
                return Err(Error::ConfigValue {
                    key: "gauge".into(),
                    message: format!("gauge file has {} values, lattice needs {expected}", pairs.len()),
                });
            }
            let values = pairs.into_iter().map(|[re, im]| CVec::from_element(1, Complex64::new(re, im))).collect();
            let f = LatticeFn::from_values(cfg.q0, rep.params().step(), -cfg.half_width, values);
            pseudovacuum(rep, Gauge::Lattice(f), cfg.q0, cfg.half_width)
        }
    }
}

/// Chain of `n` sites and its gauged vacuum.
pub fn bethe_setup(cfg: &Config, n: usize, sites: Option<&[Complex64]>) -> Result<(Rep, Vacuum)> {
    let sites = sites.map_or_else(|| cfg.sites_for(n), <[Complex64]>::to_vec);
    let rep = chain(&sites, cfg.params)?;
    let vac = bethe_vacuum(cfg, &rep, n)?;
    Ok((rep, vac))
}

fn eigen_cases(check: Result<EigenCheck>, roots: &BetheRoots, tol: f64) -> Vec<Case> {
    match check {
        Ok(c) => vec![
            Case::checked("eigen-residual", Ok(c.residual), tol).with("u_samples", c.lambdas.len()),
            Case::checked("eigenvalue-spread", Ok(c.spread), tol).with("lambda", c.lambdas.as_slice()),
        ],
        Err(e) => vec![Case::checked("eigen-residual", Err(e), tol).with("roots", roots.roots.as_slice())],
    }
}

fn bethe_suite(cfg: &Config, n: usize) -> Vec<Case> {
    let name = if n == 1 { "bethe-n1" } else { "bethe-n2" };
    let eig_tol = cfg.tolerance(name, 1e-6);
    let (_, vac) = match bethe_setup(cfg, n, None) {
        Ok(s) => s,
        Err(e) => return vec![Case::checked("setup", Err(e), eig_tol)],
    };
    let opts = SolveOptions { eigen_tol: eig_tol, ..SolveOptions::default() };
    let roots = match solve_bethe(n, &vac, None, &opts) {
        Ok(r) => r,
        Err(e) => return vec![Case::checked("solve", Err(e), if n == 1 { eig_tol } else { opts.tol })],
    };
    let mut cases = Vec::new();
    if n == 2 {
        let r = bethe_residual_n2(roots.roots[0], roots.roots[1], 0, &vac).map(|r| r[0].norm().max(r[1].norm()));
        cases.push(Case::checked("bethe-equations", r, opts.tol).with("roots", roots.roots.as_slice()));
        // The equations across the window, for information.
        let across = (vac.f.lo() + 1..=vac.f.hi()).try_fold(0.0_f64, |acc, k| {
            let r = bethe_residual_n2(roots.roots[0], roots.roots[1], k, &vac)?;
            Ok(acc.max(r[0].norm()).max(r[1].norm()))
        });
        cases.push(Case::info("bethe-equations-window", across));
    } else {
        cases.push(Case::checked("solve", Ok(roots.residual), eig_tol).with("roots", roots.roots.as_slice()));
    }
    cases.extend(eigen_cases(eigencheck(&vac, &roots.roots, &U_SAMPLES), &roots, eig_tol));
    cases
}
