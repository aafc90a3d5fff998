use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use elliptika::bethe::{eigencheck, solve_bethe, BetheRoots, SolveOptions, U_SAMPLES};
use elliptika::harness::config::parse_complex;
use elliptika::harness::{bethe_setup, emit_report, run_suites, Config, SUITES};
use elliptika::rmatrix::{r_build, RMatrixDump};
use elliptika::{Error, Result};

#[derive(Parser)]
#[command(name = "elliptika", version, about = "Dynamical R-matrix and Bethe ansatz checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites; all suites when none are named.
    Verify {
        suites: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Chain length for the transfer suite.
        #[arg(long)]
        sites: Option<usize>,
    },
    /// Solve Bethe equations or check a solution.
    Bethe {
        #[command(subcommand)]
        action: BetheCommand,
    },
    /// Print R(q, u) as JSON.
    Rmatrix {
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BetheCommand {
    Solve {
        #[arg(long)]
        n: usize,
        /// Comma separated evaluation points.
        #[arg(long, allow_hyphen_values = true)]
        sites: Option<String>,
        /// Comma separated initial roots.
        #[arg(long, allow_hyphen_values = true)]
        guess: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Eigencheck {
        #[arg(long)]
        roots_file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sites: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn complex_list(text: &str) -> Result<Vec<Complex64>> {
    text.split(',').map(parse_complex).collect()
}

fn write_or_print(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io { path: p.clone(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(
    suites: Vec<String>,
    config: Option<PathBuf>,
    seed: Option<u64>,
    report: Option<PathBuf>,
    sites: Option<usize>,
) -> Result<bool> {
    let mut cfg = Config::resolve(config.as_deref())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = sites {
        cfg.transfer_sites = vec![n];
    }
    let names = if suites.is_empty() { cfg.suites.clone() } else { suites };
    let rep = run_suites(&names, &cfg)?;
    for s in &rep.suites {
        let worst = s.max_residual().map_or("error".to_string(), |r| format!("{r:.3e}"));
        let secs = rep.timings.get(&s.name).copied().unwrap_or(0.0);
        println!(
            "{:<10} {}  {}/{} cases  max residual {worst}  {secs:.2}s",
            s.name,
            if s.pass { "PASS" } else { "FAIL" },
            s.passed,
            s.passed + s.failed,
        );
    }
    if let Some(path) = report {
        emit_report(&rep, &path)?;
    }
    let failing = rep.failing_suites();
    if !failing.is_empty() {
        eprintln!("failing suites: {}", failing.join(" "));
    }
    Ok(failing.is_empty())
}

fn bethe_solve(
    n: usize,
    sites: Option<String>,
    guess: Option<String>,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<bool> {
    let cfg = Config::resolve(config.as_deref())?;
    let sites = sites.as_deref().map(complex_list).transpose()?;
    let guess = guess.as_deref().map(complex_list).transpose()?;
    if let Some(g) = &guess {
        if g.len() != n {
            return Err(Error::ConfigValue {
                key: "guess".into(),
                message: format!("expected {n} roots, got {}", g.len()),
            });
        }
    }
    let (_, vac) = bethe_setup(&cfg, n, sites.as_deref())?;
    let roots = solve_bethe(n, &vac, guess.as_deref(), &SolveOptions::default())?;
    let text = serde_json::to_string_pretty(&roots)? + "\n";
    write_or_print(out.as_ref(), &text)?;
    Ok(true)
}

fn bethe_eigencheck(roots_file: PathBuf, sites: Option<String>, config: Option<PathBuf>) -> Result<bool> {
    let cfg = Config::resolve(config.as_deref())?;
    let text = std::fs::read_to_string(&roots_file).map_err(|source| Error::Io { path: roots_file.clone(), source })?;
    let roots: BetheRoots = serde_json::from_str(&text)?;
    if roots.roots.len() != roots.n {
        return Err(Error::ConfigValue {
            key: "roots".into(),
            message: format!("n = {} but {} roots", roots.n, roots.roots.len()),
        });
    }
    let sites = sites.as_deref().map(complex_list).transpose()?;
    let (_, vac) = bethe_setup(&cfg, roots.n, sites.as_deref())?;
    let check = eigencheck(&vac, &roots.roots, &U_SAMPLES)?;
    let tol = SolveOptions::default().eigen_tol;
    for (u, l) in U_SAMPLES.iter().zip(&check.lambdas) {
        println!("u = {u:.4}  lambda = {l:.12e}");
    }
    println!("residual {:.3e}  spread {:.3e}", check.residual, check.spread);
    let ok = check.residual < tol && check.spread < tol;
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(ok)
}

fn rmatrix(q: String, u: String, config: Option<PathBuf>) -> Result<bool> {
    let cfg = Config::resolve(config.as_deref())?;
    let r = r_build(parse_complex(&q)?, parse_complex(&u)?, &cfg.params)?;
    println!("{}", serde_json::to_string(&RMatrixDump::from(&r))?);
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { suites, config, seed, report, sites } => {
            if let Some(bad) = suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
                eprintln!("unknown suite `{bad}`; known: {}", SUITES.join(" "));
                return ExitCode::from(2);
            }
            verify(suites, config, seed, report, sites)
        }
        Command::Bethe { action: BetheCommand::Solve { n, sites, guess, config, out } } => {
            bethe_solve(n, sites, guess, config, out)
        }
        Command::Bethe { action: BetheCommand::Eigencheck { roots_file, sites, config } } => {
            bethe_eigencheck(roots_file, sites, config)
        }
        Command::Rmatrix { q, u, config } => rmatrix(q, u, config),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
