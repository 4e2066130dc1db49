//! Error sweeps over grids, rules and integrands, with log-log order fits
//! and checks against the worst-case bound `‖ℓ‖ · ‖φ‖`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::error_norm::norm_sq_closed;
use crate::exec::Execution;
use crate::rules::{apply_rule, Grid, IntegrandSpec, RuleKind};

/// `n = 4, 8, …, 256`.
pub fn default_doubling_grid() -> Vec<usize> {
    (2..=8).map(|k| 1usize << k).collect()
}

/// Errors at or below this are treated as roundoff and left out of fits.
pub fn noise_floor(exact: f64) -> f64 {
    1e2 * f64::EPSILON * exact.abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub rule_name: String,
    pub n: usize,
    pub h: f64,
    pub integrand_name: String,
    pub approx: f64,
    pub exact: f64,
    pub abs_error: f64,
}

pub fn run_sweep(
    rules: &[RuleKind],
    integrands: &[IntegrandSpec],
    n_values: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    run_sweep_with(rules, integrands, n_values, Execution::default())
}

/// One row per `(rule, integrand, n)`, in that nesting order.
pub fn run_sweep_with(
    rules: &[RuleKind],
    integrands: &[IntegrandSpec],
    n_values: &[usize],
    exec: Execution,
) -> Result<Vec<ConvergenceRow>> {
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedGrid);
    }
    let grids = n_values
        .iter()
        .map(|&n| Grid::new(n))
        .collect::<Result<Vec<_>>>()?;
    for f in integrands {
        if f.exact_integral().is_none() {
            return Err(Error::MissingExactIntegral(f.name().to_string()));
        }
    }

    let (ni, ng) = (integrands.len(), grids.len());
    let cells = rules.len() * ni * ng;
    Ok(exec.map_indexed(cells, |idx| {
        let kind = rules[idx / (ni * ng)];
        let integrand = &integrands[(idx / ng) % ni];
        let grid = grids[idx % ng];
        let rule = kind.build(grid);
        let approx = apply_rule(&rule, integrand);
        let exact = integrand.exact_integral().unwrap_or(f64::NAN);
        ConvergenceRow {
            rule_name: kind.name().to_string(),
            n: grid.n(),
            h: grid.h(),
            integrand_name: integrand.name().to_string(),
            approx,
            exact,
            abs_error: (exact - approx).abs(),
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub rule_name: String,
    pub integrand_name: String,
    /// Empirical order: slope of `log|error|` against `log h`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_range: (usize, usize),
}

/// Least-squares line through `(log h, log abs_error)` for the selected rows
/// that lie above the noise floor.
pub fn fit_order(rows: &[ConvergenceRow], rule: &str, integrand: &str) -> Result<FitResult> {
    let pts: Vec<(usize, f64, f64)> = rows
        .iter()
        .filter(|r| r.rule_name == rule && r.integrand_name == integrand)
        .filter(|r| r.abs_error > noise_floor(r.exact))
        .map(|r| (r.n, r.h.ln(), r.abs_error.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            rule: rule.to_string(),
            integrand: integrand.to_string(),
            surviving: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.2).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.2 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let n_min = pts.iter().map(|p| p.0).min().unwrap_or(0);
    let n_max = pts.iter().map(|p| p.0).max().unwrap_or(0);
    Ok(FitResult {
        rule_name: rule.to_string(),
        integrand_name: integrand.to_string(),
        slope,
        intercept,
        r_squared,
        n_range: (n_min, n_max),
    })
}

/// Fits every `(rule, integrand)` pair present in `rows`, in first-seen
/// order. Pairs with too few rows above the noise floor come back as errors.
pub fn fit_all(rows: &[ConvergenceRow]) -> Vec<Result<FitResult>> {
    let mut seen: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        let key = (r.rule_name.as_str(), r.integrand_name.as_str());
        if !seen.contains(&key) {
            seen.push(key);
        }
    }
    seen.into_iter()
        .map(|(r, f)| fit_order(rows, r, f))
        .collect()
}

/// Rows with `abs_error = h^order` exactly, against `exact = 1`.
pub fn synthetic_power_law(order: f64, n_values: &[usize]) -> Vec<ConvergenceRow> {
    n_values
        .iter()
        .map(|&n| {
            let h = 1.0 / n as f64;
            let e = h.powf(order);
            ConvergenceRow {
                rule_name: "synthetic".into(),
                n,
                h,
                integrand_name: format!("h^{order}"),
                approx: 1.0 - e,
                exact: 1.0,
                abs_error: e,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub row: ConvergenceRow,
    pub bound: f64,
    pub satisfied: bool,
}

/// Compares each row of the optimal rule with `‖ℓ‖ · ‖φ‖`, where `‖ℓ‖²` is
/// the closed-form squared norm and `‖φ‖` comes from `seminorms`.
pub fn check_against_bound(
    rows: &[ConvergenceRow],
    seminorms: &BTreeMap<String, f64>,
) -> Result<Vec<BoundCheck>> {
    rows.iter()
        .map(|row| {
            if row.rule_name != RuleKind::Optimal.name() {
                return Err(Error::NotOptimalRule(row.rule_name.clone()));
            }
            let semi = *seminorms
                .get(&row.integrand_name)
                .ok_or_else(|| Error::MissingSeminorm(row.integrand_name.clone()))?;
            let bound = norm_sq_closed(row.h)?.sqrt() * semi;
            Ok(BoundCheck {
                row: row.clone(),
                bound,
                satisfied: row.abs_error <= bound + 1e-12,
            })
        })
        .collect()
}

/// Side-by-side error of two rules on the same `(integrand, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleComparison {
    pub integrand_name: String,
    pub n: usize,
    pub candidate_error: f64,
    pub baseline_error: f64,
    /// `candidate_error > factor · baseline_error`.
    pub violated: bool,
}

pub fn compare_rules(
    rows: &[ConvergenceRow],
    candidate: &str,
    baseline: &str,
    factor: f64,
) -> Vec<RuleComparison> {
    rows.iter()
        .filter(|r| r.rule_name == candidate)
        .filter_map(|c| {
            rows.iter()
                .find(|b| {
                    b.rule_name == baseline && b.integrand_name == c.integrand_name && b.n == c.n
                })
                .map(|b| RuleComparison {
                    integrand_name: c.integrand_name.clone(),
                    n: c.n,
                    candidate_error: c.abs_error,
                    baseline_error: b.abs_error,
                    violated: c.abs_error > factor * b.abs_error,
                })
        })
        .collect()
}

/// Consecutive pairs `(n_i, n_{i+1})` for which the error grew by more than
/// `slack` for the given rule and integrand.
pub fn monotonicity_violations(
    rows: &[ConvergenceRow],
    rule: &str,
    integrand: &str,
    slack: f64,
) -> Vec<(usize, usize)> {
    let mut sel: Vec<&ConvergenceRow> = rows
        .iter()
        .filter(|r| r.rule_name == rule && r.integrand_name == integrand)
        .collect();
    sel.sort_by_key(|r| r.n);
    sel.windows(2)
        .filter(|w| w[1].abs_error > w[0].abs_error + slack)
        .map(|w| (w[0].n, w[1].n))
        .collect()
}
