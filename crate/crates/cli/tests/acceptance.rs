//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs under `cargo test` (custom harness) or alone with
//! `cargo test -p optquad-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use optquad_core::convergence_lab::{
    default_doubling_grid, fit_order, run_sweep, synthetic_power_law,
};
use optquad_core::discrete_operator::{reconstruct_c1, verify_d1_identities};
use optquad_core::error_norm::{
    em_norm_sq, norm_sq_bruteforce, norm_sq_closed, norm_sq_series, perturbation_study,
    w21_seminorm,
};
use optquad_core::rules::{
    builtin, builtin_integrands, optimal_rule, quadrature_error, Grid, RuleKind,
};
use optquad_core::system_oracle::solve_oracle;
use optquad_core::verify::STANDARD_NS;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn at_most(what: &str, value: f64, limit: f64) -> Check {
    if value <= limit {
        Ok(format!("{what} = {value:.3e} <= {limit:.0e}"))
    } else {
        Err(format!("{what} = {value:.3e} > {limit:.0e}"))
    }
}

fn coefficient_agreement() -> Check {
    let mut worst_c1: f64 = 0.0;
    let mut worst_d: f64 = 0.0;
    for n in STANDARD_NS {
        let grid = Grid::new(n).map_err(|e| e.to_string())?;
        let sol = solve_oracle(grid).map_err(|e| e.to_string())?;
        worst_c1 = worst_c1.max(max_diff(&sol.c1, optimal_rule(grid).c1()));
        worst_d = worst_d.max(sol.d.abs());
    }
    at_most("max |oracle c1 - analytic c1|", worst_c1, 1e-10)?;
    at_most("max |d|", worst_d, 1e-10).map(|d| format!("c1 diff {worst_c1:.3e}, {d}"))
}

fn convolution_reconstruction() -> Check {
    let mut worst: f64 = 0.0;
    for n in STANDARD_NS {
        let grid = Grid::new(n).map_err(|e| e.to_string())?;
        worst = worst.max(max_diff(&reconstruct_c1(grid), optimal_rule(grid).c1()));
    }
    at_most("max |reconstructed - analytic|", worst, 1e-11)
}

fn discrete_identities() -> Check {
    let mut worst: f64 = 0.0;
    let mut worst_abs_small_h: f64 = 0.0;
    for h in [1.0, 0.1, 0.01] {
        let r = verify_d1_identities(h, 50).map_err(|e| e.to_string())?;
        worst = worst.max(r.max_scaled()).max((r.delta_at_zero - 1.0).abs());
        if h < 1.0 {
            worst_abs_small_h =
                worst_abs_small_h.max(r.delta_abs.max(r.exp_plus_abs).max(r.exp_minus_abs));
        }
    }
    at_most("max residual / max(1, e^{h|beta|})", worst, 1e-11)?;
    at_most(
        "max unscaled residual (h = 0.1, 0.01)",
        worst_abs_small_h,
        1e-11,
    )
    .map(|s| format!("scaled {worst:.3e}; {s}"))
}

fn exactness() -> Check {
    let fs: Vec<_> = ["one", "x", "exp", "expm"]
        .iter()
        .map(|n| builtin(n).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for n in 1..=1000 {
        let rule = optimal_rule(Grid::new(n).map_err(|e| e.to_string())?);
        for f in &fs {
            let exact = f.exact_integral().unwrap_or(0.0);
            let err = quadrature_error(&rule, f).map_err(|e| e.to_string())?;
            worst = worst.max(err.abs() / (1.0 + exact.abs()));
        }
    }
    at_most(
        "max |(l, phi)| / (1 + |int phi|), n = 1..1000",
        worst,
        1e-13,
    )
}

fn triple_agreement() -> Check {
    let mut notes = Vec::new();
    for n in [1usize, 2, 3, 5, 10, 50, 100] {
        let h = 1.0 / n as f64;
        let brute = norm_sq_bruteforce(&optimal_rule(Grid::new(n).unwrap()))
            .map_err(|e| e.to_string())?
            .total;
        let closed = norm_sq_closed(h).map_err(|e| e.to_string())?;
        let series = norm_sq_series(h, 1e-16).map_err(|e| e.to_string())?;
        let d = rel(brute, closed)
            .max(rel(brute, series))
            .max(rel(closed, series));
        let tol = if n <= 10 { 1e-12 } else { 1e-8 };
        if d > tol {
            return Err(format!(
                "n = {n}: pairwise relative difference {d:.3e} > {tol:.0e}"
            ));
        }
        notes.push(format!("{n}:{d:.1e}"));
    }
    let spot = norm_sq_closed(1.0).map_err(|e| e.to_string())?;
    at_most(
        "|norm^2(h=1) - 1.356626e-3|",
        (spot - 1.356_626e-3).abs(),
        1e-9,
    )
    .map(|s| format!("rel diffs {}; {s}", notes.join(" ")))
}

fn leading_constant() -> Check {
    let mut out = Vec::new();
    for (n, tol) in [(10usize, 3e-3), (100, 3e-5)] {
        let h = 1.0 / n as f64;
        let total = norm_sq_bruteforce(&optimal_rule(Grid::new(n).unwrap()))
            .map_err(|e| e.to_string())?
            .total;
        out.push(at_most(
            &format!("n={n} |720 norm^2/h^4 - 1|"),
            (total * 720.0 / h.powi(4) - 1.0).abs(),
            tol,
        )?);
    }
    Ok(out.join("; "))
}

fn em_dominance() -> Check {
    let mut out = Vec::new();
    for h in [1.0, 0.5, 0.1, 0.01] {
        let closed = norm_sq_closed(h).map_err(|e| e.to_string())?;
        let ratio = closed / em_norm_sq(h);
        if !(closed < em_norm_sq(h) && ratio > 0.9 && ratio < 1.0) {
            return Err(format!("h = {h}: ratio {ratio}"));
        }
        out.push(format!("{h}:{ratio:.6}"));
    }
    Ok(format!("ratios {}", out.join(" ")))
}

fn optimality() -> Check {
    let mut worst = f64::INFINITY;
    for n in [1usize, 5, 20] {
        let r = perturbation_study(
            &optimal_rule(Grid::new(n).unwrap()),
            100,
            1e-3,
            0xacce + n as u64,
        )
        .map_err(|e| e.to_string())?;
        if r.trials != 100 {
            return Err(format!("n = {n}: only {} trials", r.trials));
        }
        worst = worst.min(r.min_increase);
    }
    at_most(
        "largest decrease of brute-force norm^2",
        (-worst).max(0.0),
        1e-12,
    )
    .map(|s| format!("{s} (smallest increase {worst:.3e})"))
}

fn error_bound() -> Check {
    let mut slack = f64::INFINITY;
    let mut count = 0;
    for f in builtin_integrands()
        .iter()
        .filter(|f| f.has_second_derivative())
    {
        let semi = w21_seminorm(f).map_err(|e| e.to_string())?;
        for n in [2usize, 10, 50] {
            let rule = optimal_rule(Grid::new(n).unwrap());
            let err = quadrature_error(&rule, f).map_err(|e| e.to_string())?.abs();
            let bound = norm_sq_closed(1.0 / n as f64)
                .map_err(|e| e.to_string())?
                .sqrt()
                * semi;
            if err > bound + 1e-12 {
                return Err(format!(
                    "{} n = {n}: |error| {err:.3e} > bound {bound:.3e}",
                    f.name()
                ));
            }
            slack = slack.min(bound + 1e-12 - err);
            count += 1;
        }
    }
    Ok(format!("{count} cases, smallest slack {slack:.3e}"))
}

fn empirical_order() -> Check {
    let f = builtin("recip1p").map_err(|e| e.to_string())?;
    let rows = run_sweep(
        &RuleKind::ALL,
        std::slice::from_ref(&f),
        &default_doubling_grid(),
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (kind, lo, hi) in [
        (RuleKind::Optimal, 3.7, 4.3),
        (RuleKind::EulerMaclaurin, 3.7, 4.3),
        (RuleKind::Trapezoid, 1.8, 2.2),
    ] {
        let slope = fit_order(&rows, kind.name(), "recip1p")
            .map_err(|e| e.to_string())?
            .slope;
        if !(lo..=hi).contains(&slope) {
            return Err(format!(
                "{} slope {slope:.4} outside [{lo}, {hi}]",
                kind.name()
            ));
        }
        out.push(format!("{}={slope:.4}", kind.name()));
    }
    let synth = fit_order(
        &synthetic_power_law(4.0, &default_doubling_grid()),
        "synthetic",
        "h^4",
    )
    .map_err(|e| e.to_string())?
    .slope;
    at_most("|self-test slope - 4|", (synth - 4.0).abs(), 1e-6)
        .map(|s| format!("{}; {s}", out.join(" ")))
}

fn verify_command() -> Check {
    let bin = env!("CARGO_BIN_EXE_optquad");
    let code = |args: &[&str]| -> Result<i32, String> {
        let out = Command::new(bin)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        out.status
            .code()
            .ok_or_else(|| "terminated by signal".to_string())
    };
    let clean = code(&["verify"])?;
    if clean != 0 {
        return Err(format!("clean build exited {clean}"));
    }
    // one tamper per weight family and position
    let tampers = [
        ("c1", "0"),
        ("c1", "100"),
        ("c1", "1"),
        ("c0", "0"),
        ("c0", "1"),
        ("c0", "50"),
    ];
    for (w, i) in tampers {
        let c = code(&[
            "verify",
            "--tamper-weight",
            w,
            "--tamper-index",
            i,
            "--tamper-delta",
            "1e-6",
        ])?;
        if c != 1 {
            return Err(format!("tampered {w}[{i}] exited {c}"));
        }
    }
    Ok(format!(
        "clean exit 0; {} single-weight tampers exit 1",
        tampers.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "coefficient agreement",
            Duration::from_secs(5),
            coefficient_agreement,
        ),
        (
            "convolution reconstruction",
            Duration::from_secs(1),
            convolution_reconstruction,
        ),
        (
            "discrete-operator identities",
            Duration::from_secs(1),
            discrete_identities,
        ),
        ("exactness set", Duration::from_secs(5), exactness),
        (
            "norm triple agreement",
            Duration::from_secs(10),
            triple_agreement,
        ),
        ("leading constant", Duration::MAX, leading_constant),
        ("euler-maclaurin dominance", Duration::MAX, em_dominance),
        ("optimality by perturbation", Duration::MAX, optimality),
        ("error bound", Duration::MAX, error_bound),
        ("empirical order", Duration::from_secs(2), empirical_order),
        ("verify command", Duration::MAX, verify_command),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let result = match result {
            Ok(msg) if took > *budget => {
                Err(format!("{msg}; took {took:.2?}, budget {budget:.0?}"))
            }
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS {:>2} {name} [{took:.2?}]: {msg}", i + 1),
            Err(msg) => {
                failures += 1;
                println!("FAIL {:>2} {name} [{took:.2?}]: {msg}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
