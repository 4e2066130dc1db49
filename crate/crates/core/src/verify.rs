//! The full invariant suite behind `optquad verify`.

use crate::convergence_lab::{
    check_against_bound, default_doubling_grid, fit_order, run_sweep, synthetic_power_law,
};
use crate::discrete_operator::{
    build_u_profile, reconstruct_c1, rhs_f_closed, rhs_g_closed, verify_d1_identities,
};
use crate::error::Result;
use crate::error_norm::{
    em_norm_sq, norm_sq_bruteforce, norm_sq_closed, norm_sq_series, perturbation_study,
    w21_seminorm,
};
use crate::rules::{
    builtin, builtin_integrands, optimal_rule, quadrature_error, Grid, QuadratureRule, RuleKind,
    WeightKind,
};
use crate::system_oracle::{rhs_f_direct, rhs_g_direct, solve_oracle};

/// Grid sizes used by the coefficient and norm checks.
pub const STANDARD_NS: [usize; 8] = [1, 2, 3, 5, 10, 25, 50, 100];

/// Deliberate damage to the optimal rule, to confirm the suite notices it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tamper {
    pub weight: WeightKind,
    pub index: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub tamper: Option<Tamper>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 100,
            tamper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured quantity, compared against `threshold`.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

struct Suite {
    config: VerifyConfig,
}

impl Suite {
    fn rule(&self, grid: Grid) -> Result<QuadratureRule> {
        let rule = optimal_rule(grid);
        match self.config.tamper {
            Some(t) if t.index <= grid.n() => rule.perturbed(t.weight, t.index, t.delta),
            _ => Ok(rule),
        }
    }

    fn ns(&self) -> Vec<usize> {
        STANDARD_NS
            .iter()
            .copied()
            .filter(|&n| n <= self.config.n_max.max(1))
            .collect()
    }
}

fn outcome(name: &'static str, worst: f64, threshold: f64, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= threshold,
        worst,
        threshold,
        detail,
    }
}

fn failed(name: &'static str, threshold: f64, err: crate::error::Error) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: false,
        worst: f64::INFINITY,
        threshold,
        detail: err.to_string(),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

type CheckFn = fn(&Suite) -> Result<(f64, String)>;

/// Runs every check and returns one outcome per check, in a fixed order.
pub fn run(config: VerifyConfig) -> Vec<CheckOutcome> {
    let suite = Suite { config };
    let checks: [(&'static str, f64, CheckFn); 11] = [
        ("d1-identities", 1e-11, d1_identities),
        ("convolution-reconstruction", 1e-11, reconstruction),
        ("oracle-agreement", 1e-10, oracle_agreement),
        ("rhs-agreement", 1e-13, rhs_agreement),
        ("exactness", 1e-13, exactness),
        ("norm-triple-agreement", 1.0, triple_agreement),
        ("leading-constant", 1.0, leading_constant),
        ("em-dominance", 1.0, em_dominance),
        ("optimality-perturbation", 1e-12, optimality),
        ("error-bound", 0.0, error_bound),
        ("empirical-order", 1.0, empirical_order),
    ];
    checks
        .iter()
        .map(|&(name, threshold, f)| match f(&suite) {
            Ok((worst, detail)) => outcome(name, worst, threshold, detail),
            Err(e) => failed(name, threshold, e),
        })
        .collect()
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.passed)
}

fn d1_identities(_: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for h in [1.0, 0.1, 0.01] {
        let r = verify_d1_identities(h, 50)?;
        worst = worst.max(r.max_scaled()).max((r.delta_at_zero - 1.0).abs());
    }
    Ok((
        worst,
        "h in {1, 0.1, 0.01}, |beta| <= 50, residual / max(1, e^{h|beta|})".into(),
    ))
}

fn reconstruction(s: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in s.ns() {
        let grid = Grid::new(n)?;
        let rule = s.rule(grid)?;
        worst = worst.max(max_abs_diff(&reconstruct_c1(grid), rule.c1()));
        let (a, b) = build_u_profile(grid).branch_consistency();
        // branch consistency has its own, tighter tolerance
        if a.max(b) > 1e-12 {
            worst = worst.max(f64::INFINITY);
        }
    }
    Ok((worst, format!("n in {:?}", s.ns())))
}

fn oracle_agreement(s: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in s.ns() {
        let grid = Grid::new(n)?;
        let sol = solve_oracle(grid)?;
        let rule = s.rule(grid)?;
        worst = worst
            .max(max_abs_diff(&sol.c1, rule.c1()))
            .max(sol.d.abs())
            .max(sol.residual_norm);
    }
    Ok((
        worst,
        format!(
            "max |oracle - analytic|, |d|, residual over n in {:?}",
            s.ns()
        ),
    ))
}

fn rhs_agreement(s: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in s.ns() {
        let grid = Grid::new(n)?;
        for b in 0..=n {
            worst = worst.max((rhs_f_direct(grid, b)? - rhs_f_closed(grid, b as i64)).abs());
        }
        worst = worst.max((rhs_g_direct(grid) - rhs_g_closed(grid)).abs());
    }
    Ok((worst, "direct sums vs closed forms of F and g".into()))
}

fn exactness(s: &Suite) -> Result<(f64, String)> {
    let fs = ["one", "x", "exp", "expm"]
        .iter()
        .map(|n| builtin(n))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for n in 1..=s.config.n_max.max(1) {
        let rule = s.rule(Grid::new(n)?)?;
        for f in &fs {
            let exact = f.exact_integral().unwrap_or(0.0);
            worst = worst.max(quadrature_error(&rule, f)?.abs() / (1.0 + exact.abs()));
        }
    }
    Ok((
        worst,
        format!("{{1, x, e^x, e^-x}}, n = 1..={}", s.config.n_max.max(1)),
    ))
}

// Reported as the worst ratio of measured disagreement to its tolerance.
fn triple_agreement(s: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in s.ns() {
        let grid = Grid::new(n)?;
        let brute = norm_sq_bruteforce(&s.rule(grid)?)?.total;
        let closed = norm_sq_closed(grid.h())?;
        let series = norm_sq_series(grid.h(), 1e-16)?;
        let tol = if n <= 10 { 1e-12 } else { 1e-8 };
        let d = rel_diff(brute, closed)
            .max(rel_diff(brute, series))
            .max(rel_diff(closed, series));
        worst = worst.max(d / tol);
    }
    Ok((worst, "pairwise relative difference / tolerance".into()))
}

fn leading_constant(s: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for (n, tol) in [(10usize, 3e-3), (100, 3e-5)] {
        if n > s.config.n_max {
            continue;
        }
        let h = 1.0 / n as f64;
        let dev =
            (norm_sq_bruteforce(&s.rule(Grid::new(n)?)?)?.total * 720.0 / h.powi(4) - 1.0).abs();
        worst = worst.max(dev / tol);
    }
    Ok((
        worst,
        "|720 norm^2 / h^4 - 1| / tolerance at n = 10, 100".into(),
    ))
}

fn em_dominance(_: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for h in [1.0, 0.5, 0.1, 0.01] {
        let ratio = norm_sq_closed(h)? / em_norm_sq(h);
        // inside (0.9, 1) maps to a score below 1
        let score = if ratio > 0.9 && ratio < 1.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(score);
    }
    Ok((
        worst,
        "norm^2 / (h^4/720) in (0.9, 1) for h in {1, 0.5, 0.1, 0.01}".into(),
    ))
}

fn optimality(s: &Suite) -> Result<(f64, String)> {
    let mut worst: f64 = 0.0;
    for n in [1usize, 5, 20]
        .into_iter()
        .filter(|&n| n <= s.config.n_max.max(1))
    {
        let report = perturbation_study(&s.rule(Grid::new(n)?)?, 100, 1e-3, 0x5eed + n as u64)?;
        worst = worst.max(-report.min_increase);
    }
    Ok((
        worst,
        "largest decrease of the norm under 100 constrained perturbations".into(),
    ))
}

// worst = max(|error| − bound − 1e-12), must not be positive
fn error_bound(s: &Suite) -> Result<(f64, String)> {
    let fs = builtin_integrands();
    let seminorms = fs
        .iter()
        .map(|f| Ok((f.name().to_string(), w21_seminorm(f)?)))
        .collect::<Result<_>>()?;
    let ns: Vec<usize> = [2usize, 10, 50]
        .into_iter()
        .filter(|&n| n <= s.config.n_max.max(2))
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for &n in &ns {
        let rule = s.rule(Grid::new(n)?)?;
        for f in &fs {
            let err = quadrature_error(&rule, f)?;
            let row = crate::convergence_lab::ConvergenceRow {
                rule_name: RuleKind::Optimal.name().into(),
                n,
                h: 1.0 / n as f64,
                integrand_name: f.name().into(),
                approx: f.exact_integral().unwrap_or(0.0) - err,
                exact: f.exact_integral().unwrap_or(0.0),
                abs_error: err.abs(),
            };
            let check = &check_against_bound(std::slice::from_ref(&row), &seminorms)?[0];
            worst = worst.max(row.abs_error - check.bound - 1e-12);
        }
    }
    Ok((
        worst,
        format!("|error| - bound - 1e-12 over built-ins, n in {ns:?}"),
    ))
}

fn empirical_order(_: &Suite) -> Result<(f64, String)> {
    let f = builtin("recip1p")?;
    let rows = run_sweep(
        &RuleKind::ALL,
        std::slice::from_ref(&f),
        &default_doubling_grid(),
    )?;
    let mut worst: f64 = 0.0;
    let mut slopes = Vec::new();
    for (kind, lo, hi) in [
        (RuleKind::Optimal, 3.7, 4.3),
        (RuleKind::EulerMaclaurin, 3.7, 4.3),
        (RuleKind::Trapezoid, 1.8, 2.2),
    ] {
        let fit = fit_order(&rows, kind.name(), f.name())?;
        if !(fit.slope >= lo && fit.slope <= hi) {
            worst = f64::INFINITY;
        }
        slopes.push(format!("{}={:.4}", kind.name(), fit.slope));
    }
    let synth = synthetic_power_law(4.0, &default_doubling_grid());
    let fit = fit_order(&synth, "synthetic", "h^4")?;
    if (fit.slope - 4.0).abs() > 1e-6 {
        worst = f64::INFINITY;
    }
    Ok((worst, format!("slopes on 1/(1+x): {}", slopes.join(" "))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let out = run(VerifyConfig {
            n_max: 5,
            tamper: None,
        });
        assert_eq!(out.len(), 11);
        for o in &out {
            assert!(o.passed, "{o:?}");
        }
    }

    #[test]
    fn tampered_rule_fails() {
        let out = run(VerifyConfig {
            n_max: 5,
            tamper: Some(Tamper {
                weight: WeightKind::Derivative,
                index: 0,
                delta: 1e-6,
            }),
        });
        assert!(!all_passed(&out));
        let by = |n: &str| out.iter().find(|o| o.name == n).unwrap().passed;
        assert!(!by("oracle-agreement"));
        assert!(!by("optimality-perturbation"));
    }
}
