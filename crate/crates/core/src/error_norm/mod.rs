//! Squared norm of the error functional in W₂^(2,1)*.
//!
//! Three independent routes are provided: the brute-force double-sum
//! expansion over the kernel `G₂` (for any admissible rule), the simplified
//! closed form for the optimal rule, and its Bernoulli series.

mod bernoulli;

pub use bernoulli::BernoulliTable;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gauss_legendre;
use crate::kernels::{self, extended, ratio_dd};
use crate::rules::{trapezoid_weights, IntegrandSpec, QuadratureRule};

/// Below this step the closed form is evaluated through its series.
pub const CLOSED_FORM_SERIES_THRESHOLD: f64 = 0.3;

/// Tolerance on `|(ℓ,1)|` and `|(ℓ,e^{-x})|` for the norm expansion to apply.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

/// `‖ℓ‖² = a1 + a2 − 2·a3 + a4`.
///
/// * `a1 = 2 Σ c1[β] F(hβ) − Σ Σ c1[β] c1[γ] G₂''(hβ − hγ)`, which reduces to
///   `Σ c1[β] F(hβ)` at the optimum,
/// * `a2 = Σ Σ c0[β] c0[γ] G₂(hβ − hγ)`,
/// * `a3 = Σ c0[β] ∫₀¹ G₂(x − hβ) dx`,
/// * `a4 = ∫₀¹∫₀¹ G₂(x − y) dx dy`.
///
/// `total` is assembled in double-double arithmetic before rounding, so it
/// can differ from `a1 + a2 - 2*a3 + a4` evaluated on the rounded parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormBreakdown {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub total: f64,
}

pub fn norm_sq_bruteforce(rule: &QuadratureRule) -> Result<NormBreakdown> {
    norm_sq_bruteforce_with(rule, Execution::default())
}

/// Brute-force evaluation of the norm expansion for `rule`.
///
/// The rule must carry trapezoid value weights (the setting in which the
/// derivative weights are optimised). Node positions and value weights are
/// regenerated from the grid in double-double precision; derivative weights
/// are taken from the rule as given.
pub fn norm_sq_bruteforce_with(rule: &QuadratureRule, exec: Execution) -> Result<NormBreakdown> {
    let (constant_residual, exp_residual) = rule.constraint_residuals();
    if !(constant_residual <= CONSTRAINT_TOLERANCE && exp_residual <= CONSTRAINT_TOLERANCE) {
        return Err(Error::ConstraintViolation {
            rule: rule.name().to_string(),
            constant_residual,
            exp_residual,
        });
    }
    let grid = rule.grid();
    if rule.c0() != trapezoid_weights(grid).as_slice() {
        return Err(Error::NonTrapezoidValueWeights(rule.name().to_string()));
    }

    let n = grid.n();
    let h = ratio_dd(1, n);
    let c0: Vec<TwoFloat> = (0..=n)
        .map(|b| if b == 0 || b == n { h * 0.5 } else { h })
        .collect();
    let c1: Vec<TwoFloat> = rule.c1().iter().map(|&v| TwoFloat::from(v)).collect();

    // Kernels depend on β − γ only; tabulate them at k/n, k = 0..=N.
    let g2_tab: Vec<TwoFloat> = exec.map_indexed(n + 1, |k| extended::g2(ratio_dd(k as i64, n)));
    let g2p_tab: Vec<TwoFloat> =
        exec.map_indexed(n + 1, |k| extended::g2_prime(ratio_dd(k as i64, n)));
    let g2pp_tab: Vec<TwoFloat> =
        exec.map_indexed(n + 1, |k| extended::g2_second(ratio_dd(k as i64, n)));
    let h_tab: Vec<TwoFloat> = exec.map_indexed(n + 1, |k| {
        extended::g2_antiderivative(ratio_dd(k as i64, n))
    });

    let zero = TwoFloat::from(0.0);
    let rows = exec.map_indexed(n + 1, |b| {
        let mut a2 = zero;
        for g in 0..=n {
            a2 += c0[g] * g2_tab[b.abs_diff(g)];
        }
        a2 *= c0[b];

        // ∫₀¹ G₂(x − hβ) dx = H(1 − hβ) + H(hβ)
        let a3 = c0[b] * (h_tab[n - b] + h_tab[b]);

        let mut a1 = zero;
        if c1[b].hi() != 0.0 {
            // F(hβ) = G₂(1 − hβ) − G₂(hβ) + Σ_γ c0[γ] G₂'(hβ − hγ)
            let mut f = g2_tab[n - b] - g2_tab[b];
            let mut quad = zero;
            for g in 0..=n {
                let k = b.abs_diff(g);
                if b >= g {
                    f += c0[g] * g2p_tab[k];
                } else {
                    f -= c0[g] * g2p_tab[k];
                }
                if c1[g].hi() != 0.0 {
                    quad += c1[g] * g2pp_tab[k];
                }
            }
            a1 = c1[b] * (f * 2.0 - quad);
        }
        (a1, a2, a3)
    });

    let (mut a1, mut a2, mut a3) = (zero, zero, zero);
    for (r1, r2, r3) in rows {
        a1 += r1;
        a2 += r2;
        a3 += r3;
    }
    let a4 = extended::g2_double_antiderivative(TwoFloat::from(1.0)) * 2.0;
    let total = a1 + a2 - a3 * 2.0 + a4;
    Ok(NormBreakdown {
        a1: a1.hi(),
        a2: a2.hi(),
        a3: a3.hi(),
        a4: a4.hi(),
        total: f64::from(total),
    })
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "grid step",
            value: h,
            domain: "0 < h <= 1",
        })
    }
}

/// `1 − h/2 + h²/12 − h/(e^h − 1)`, the squared norm for the optimal rule.
pub fn norm_sq_closed(h: f64) -> Result<f64> {
    check_step(h)?;
    if h < CLOSED_FORM_SERIES_THRESHOLD {
        norm_sq_series(h, 1e-30)
    } else {
        Ok(norm_sq_direct_extended(h))
    }
}

// Same expression in double-double; the O(1) terms still cancel to O(h⁴) but
// about 32 digits are carried, so the rounded result keeps full precision.
fn norm_sq_direct_extended(h: f64) -> f64 {
    let x = TwoFloat::from(h);
    let v = TwoFloat::from(1.0) - x * 0.5 + x * x / 12.0 - extended::div(x, extended::expm1(x));
    v.hi() + v.lo()
}

/// The closed form evaluated as written in f64 (cancels down to O(h⁴); kept
/// to show the loss, not used by [`norm_sq_closed`]).
pub fn norm_sq_direct(h: f64) -> f64 {
    1.0 - 0.5 * h + h * h / 12.0 - h / h.exp_m1()
}

/// `−Σ_{n≥4} B_n hⁿ / n!`, stopping once the next nonzero term is below
/// `tol` relative to the partial sum, or the Bernoulli table is exhausted (the remaining tail is below
/// 1e-17 for `h ≤ 1`).
pub fn norm_sq_series(h: f64, tol: f64) -> Result<f64> {
    check_step(h)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain {
            what: "series tolerance",
            value: tol,
            domain: "tol > 0",
        });
    }
    let table = BernoulliTable::new();
    let mut power_over_fact = h.powi(4) / 24.0;
    let mut sum: f64 = 0.0;
    for m in (4..BernoulliTable::LEN).step_by(2) {
        let term = -table.get(m).unwrap_or(0.0) * power_over_fact;
        if term.abs() < tol * sum.abs() {
            break;
        }
        sum += term;
        power_over_fact *= h * h / ((m + 1) * (m + 2)) as f64;
    }
    Ok(sum)
}

/// Leading term `h⁴/720` alone.
pub fn norm_sq_leading_term(h: f64) -> f64 {
    h.powi(4) / 720.0
}

/// Squared error norm of the Euler–Maclaurin rule in L₂^(2): `h⁴/720`.
pub fn em_norm_sq(h: f64) -> f64 {
    norm_sq_leading_term(h)
}

fn require_constraints(rule: &QuadratureRule) -> Result<()> {
    let (constant_residual, exp_residual) = rule.constraint_residuals();
    if constant_residual <= CONSTRAINT_TOLERANCE && exp_residual <= CONSTRAINT_TOLERANCE {
        Ok(())
    } else {
        Err(Error::ConstraintViolation {
            rule: rule.name().to_string(),
            constant_residual,
            exp_residual,
        })
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "extremal function argument",
            value: x,
            domain: "0 <= x <= 1",
        })
    }
}

/// Extremal function `ψ = ℓ * G₂` with both free constants set to zero:
/// `ψ(x) = H(x) + H(1−x) − Σ c0[β] G₂(x − hβ) + Σ c1[β] G₂'(x − hβ)`.
pub fn eval_extremal_function(rule: &QuadratureRule, x: f64) -> Result<f64> {
    check_unit(x)?;
    require_constraints(rule)?;
    Ok(extremal_value(rule, x))
}

/// Derivative of [`eval_extremal_function`].
pub fn eval_extremal_derivative(rule: &QuadratureRule, x: f64) -> Result<f64> {
    check_unit(x)?;
    require_constraints(rule)?;
    Ok(extremal_derivative(rule, x))
}

fn extremal_value(rule: &QuadratureRule, x: f64) -> f64 {
    let grid = rule.grid();
    let mut v = kernels::g2_antiderivative_raw(x) + kernels::g2_antiderivative_raw(1.0 - x);
    for (b, node) in grid.nodes().enumerate() {
        v -= rule.c0()[b] * kernels::g2_raw(x - node);
        if rule.c1()[b] != 0.0 {
            v += rule.c1()[b] * kernels::g2_prime_raw(x - node);
        }
    }
    v
}

fn extremal_derivative(rule: &QuadratureRule, x: f64) -> f64 {
    let grid = rule.grid();
    let mut v = kernels::g2_raw(x) - kernels::g2_raw(1.0 - x);
    for (b, node) in grid.nodes().enumerate() {
        v -= rule.c0()[b] * kernels::g2_prime_raw(x - node);
        if rule.c1()[b] != 0.0 {
            v += rule.c1()[b] * kernels::g2_second_raw(x - node);
        }
    }
    v
}

/// `(ℓ, f) = ∫₀¹ f − Σ (c0[β] f(hβ) + c1[β] f'(hβ))` with the integral taken
/// by composite 8-point Gauss–Legendre on panels aligned with the grid, at
/// least `min_points` evaluation points in total.
pub fn functional_value<F, D>(rule: &QuadratureRule, f: F, f_prime: D, min_points: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    const ORDER: usize = 8;
    let grid = rule.grid();
    let n = grid.n();
    let per_cell = min_points.div_ceil(ORDER * n).max(1);
    let gl = gauss_legendre::nodes_weights(ORDER);
    let integral: f64 = (0..n)
        .map(|b| gauss_legendre::integrate_with(&gl, &f, grid.node(b), grid.node(b + 1), per_cell))
        .sum();
    let mut sum = 0.0;
    for (b, x) in grid.nodes().enumerate() {
        sum += rule.c0()[b] * f(x) + rule.c1()[b] * f_prime(x);
    }
    integral - sum
}

/// `(ℓ, ψ_ℓ)` by numeric quadrature of the extremal function; equals the
/// squared norm.
pub fn extremal_pairing(rule: &QuadratureRule, min_points: usize) -> Result<f64> {
    require_constraints(rule)?;
    Ok(functional_value(
        rule,
        |x| extremal_value(rule, x),
        |x| extremal_derivative(rule, x),
        min_points,
    ))
}

/// `max |ψ(x) − ψ(1 − x)|` over `samples + 1` equally spaced points.
pub fn extremal_asymmetry(rule: &QuadratureRule, samples: usize) -> Result<f64> {
    require_constraints(rule)?;
    Ok((0..=samples)
        .map(|i| {
            let x = i as f64 / samples as f64;
            (extremal_value(rule, x) - extremal_value(rule, 1.0 - x)).abs()
        })
        .fold(0.0, f64::max))
}

/// `[∫₀¹ (f'' + f')² dx]^{1/2}` by 64 panels of 8-point Gauss–Legendre.
pub fn w21_seminorm(integrand: &IntegrandSpec) -> Result<f64> {
    if !integrand.has_second_derivative() {
        return Err(Error::MissingSecondDerivative(integrand.name().to_string()));
    }
    let sq = gauss_legendre::integrate(
        |x| {
            let v = integrand.eval_second(x).unwrap_or(f64::NAN) + integrand.eval_prime(x);
            v * v
        },
        0.0,
        1.0,
        64,
        8,
    );
    Ok(sq.sqrt())
}

/// Outcome of perturbing the derivative weights within the constraint
/// `Σ δ[β] e^{−hβ} = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    pub trials: usize,
    pub baseline: f64,
    /// Smallest `perturbed − baseline` observed; negative means some
    /// perturbation lowered the norm.
    pub min_increase: f64,
}

/// Perturbs `rule.c1` by `trials` random vectors projected onto the
/// constraint and scaled to `‖δ‖∞ = amplitude`, recording the change in the
/// brute-force squared norm.
pub fn perturbation_study(
    rule: &QuadratureRule,
    trials: usize,
    amplitude: f64,
    seed: u64,
) -> Result<PerturbationReport> {
    let baseline = norm_sq_bruteforce(rule)?.total;
    let grid = rule.grid();
    let weights: Vec<f64> = grid.nodes().map(|x| (-x).exp()).collect();
    let ww: f64 = weights.iter().map(|w| w * w).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut deltas = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut delta: Vec<f64> = (0..=grid.n())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let proj: f64 = delta.iter().zip(&weights).map(|(d, w)| d * w).sum::<f64>() / ww;
        for (d, w) in delta.iter_mut().zip(&weights) {
            *d -= proj * w;
        }
        let sup = delta.iter().fold(0.0, |m: f64, d| m.max(d.abs()));
        for d in &mut delta {
            *d *= amplitude / sup;
        }
        deltas.push(delta);
    }

    let totals = Execution::default().map_slice(&deltas, |delta| {
        let c1: Vec<f64> = rule.c1().iter().zip(delta).map(|(c, d)| c + d).collect();
        let perturbed = rule.with_derivative_weights(c1)?;
        norm_sq_bruteforce_with(&perturbed, Execution::Sequential).map(|b| b.total)
    });
    let mut min_increase = f64::INFINITY;
    for t in totals {
        min_increase = min_increase.min(t? - baseline);
    }
    Ok(PerturbationReport {
        trials,
        baseline,
        min_increase,
    })
}
