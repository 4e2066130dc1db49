//! Quadrature rules of the form
//! `∫₀¹ φ ≈ Σ_β (c0[β] φ(hβ) + c1[β] φ'(hβ))` on a uniform grid.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::discrete_operator::{endpoint_factor, endpoint_factor_closed, endpoint_factor_series};
use crate::error::{Error, Result};

/// Uniform grid on `[0, 1]` with `n` subintervals of width `h = 1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid(n));
        }
        Ok(Grid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Node `hβ`, computed as `β / n` so that the last node is exactly 1.
    pub fn node(&self, beta: usize) -> f64 {
        beta as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |b| self.node(b))
    }
}

/// The three rule families built by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Optimal,
    EulerMaclaurin,
    Trapezoid,
}

impl RuleKind {
    pub const ALL: [RuleKind; 3] = [
        RuleKind::Optimal,
        RuleKind::EulerMaclaurin,
        RuleKind::Trapezoid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleKind::Optimal => "optimal",
            RuleKind::EulerMaclaurin => "euler-maclaurin",
            RuleKind::Trapezoid => "trapezoid",
        }
    }

    pub fn build(self, grid: Grid) -> QuadratureRule {
        match self {
            RuleKind::Optimal => optimal_rule(grid),
            RuleKind::EulerMaclaurin => euler_maclaurin_rule(grid),
            RuleKind::Trapezoid => trapezoid_rule(grid),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownRule(s.to_string()))
    }
}

/// Value weights `c0` and first-derivative weights `c1` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    name: String,
    grid: Grid,
    c0: Vec<f64>,
    c1: Vec<f64>,
}

impl QuadratureRule {
    /// Builds a rule from explicit weights. Only lengths and finiteness are
    /// checked; see [`QuadratureRule::invariant_report`] for the rest.
    pub fn new(name: impl Into<String>, grid: Grid, c0: Vec<f64>, c1: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let expected = grid.n() + 1;
        if c0.len() != expected || c1.len() != expected {
            return Err(Error::WeightLength {
                c0: c0.len(),
                c1: c1.len(),
                expected,
            });
        }
        if c0.iter().chain(&c1).any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteWeight(name));
        }
        Ok(QuadratureRule { name, grid, c0, c1 })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn c0(&self) -> &[f64] {
        &self.c0
    }

    pub fn c1(&self) -> &[f64] {
        &self.c1
    }

    /// Copy of this rule with one weight shifted; used to check that the
    /// verification suite notices a damaged rule.
    pub fn perturbed(&self, which: WeightKind, index: usize, delta: f64) -> Result<Self> {
        let n = self.grid.n();
        if index > n {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut c0 = self.c0.clone();
        let mut c1 = self.c1.clone();
        match which {
            WeightKind::Value => c0[index] += delta,
            WeightKind::Derivative => c1[index] += delta,
        }
        QuadratureRule::new(self.name.clone(), self.grid, c0, c1)
    }

    pub fn with_derivative_weights(&self, c1: Vec<f64>) -> Result<Self> {
        QuadratureRule::new(self.name.clone(), self.grid, self.c0.clone(), c1)
    }

    pub fn invariant_report(&self) -> RuleInvariants {
        let n = self.grid.n();
        let sum_c0: f64 = self.c0.iter().sum();
        let c0_asymmetry = (0..=n)
            .map(|b| (self.c0[b] - self.c0[n - b]).abs())
            .fold(0.0, f64::max);
        let c1_symmetric_part = (0..=n)
            .map(|b| (self.c1[b] + self.c1[n - b]).abs())
            .fold(0.0, f64::max);
        RuleInvariants {
            constant_residual: (1.0 - sum_c0).abs(),
            c0_asymmetry,
            c1_symmetric_part,
        }
    }

    /// `|(ℓ, 1)|` and `|(ℓ, e^{-x})|`, the two conditions under which the
    /// error functional is bounded on W₂^(2,1).
    pub fn constraint_residuals(&self) -> (f64, f64) {
        let mut sum_c0 = 0.0;
        let mut exp_sum = 0.0;
        for (b, x) in self.grid.nodes().enumerate() {
            sum_c0 += self.c0[b];
            exp_sum += (self.c0[b] - self.c1[b]) * (-x).exp();
        }
        let exp_integral = -(-1.0f64).exp_m1();
        ((1.0 - sum_c0).abs(), (exp_integral - exp_sum).abs())
    }
}

/// Which of the two weight vectors to touch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Value,
    Derivative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleInvariants {
    pub constant_residual: f64,
    pub c0_asymmetry: f64,
    pub c1_symmetric_part: f64,
}

/// Trapezoid weights `h·[1/2, 1, …, 1, 1/2]`.
pub fn trapezoid_weights(grid: Grid) -> Vec<f64> {
    let h = grid.h();
    let n = grid.n();
    (0..=n)
        .map(|b| if b == 0 || b == n { 0.5 * h } else { h })
        .collect()
}

/// Derivative weights of the optimal rule: nonzero only at the end points,
/// `c1[0] = h(e^h+1)/(2(e^h−1)) − 1 = −c1[N]`.
pub fn optimal_derivative_weights(grid: Grid) -> Vec<f64> {
    endpoint_weights(grid, optimal_endpoint_weight(grid.h()))
}

/// `h(e^h+1)/(2(e^h−1)) − 1`, switching to its Bernoulli series for `h < 0.1`.
pub fn optimal_endpoint_weight(h: f64) -> f64 {
    0.5 * endpoint_factor(h)
}

/// Direct evaluation of [`optimal_endpoint_weight`].
pub fn optimal_endpoint_weight_closed(h: f64) -> f64 {
    0.5 * endpoint_factor_closed(h)
}

/// Series evaluation `h²/12 − h⁴/720 + h⁶/30240 − …` of [`optimal_endpoint_weight`].
pub fn optimal_endpoint_weight_series(h: f64) -> f64 {
    0.5 * endpoint_factor_series(h)
}

fn endpoint_weights(grid: Grid, w: f64) -> Vec<f64> {
    let mut c1 = vec![0.0; grid.n() + 1];
    c1[0] = w;
    c1[grid.n()] = -w;
    c1
}

pub fn optimal_rule(grid: Grid) -> QuadratureRule {
    build(RuleKind::Optimal, grid, optimal_derivative_weights(grid))
}

/// Trapezoid rule plus `h²/12 (φ'(0) − φ'(1))`.
pub fn euler_maclaurin_rule(grid: Grid) -> QuadratureRule {
    let h = grid.h();
    build(
        RuleKind::EulerMaclaurin,
        grid,
        endpoint_weights(grid, h * h / 12.0),
    )
}

pub fn trapezoid_rule(grid: Grid) -> QuadratureRule {
    build(RuleKind::Trapezoid, grid, vec![0.0; grid.n() + 1])
}

fn build(kind: RuleKind, grid: Grid, c1: Vec<f64>) -> QuadratureRule {
    let rule = QuadratureRule {
        name: kind.name().to_string(),
        grid,
        c0: trapezoid_weights(grid),
        c1,
    };
    debug_assert!({
        let inv = rule.invariant_report();
        inv.c0_asymmetry == 0.0 && inv.c1_symmetric_part == 0.0 && inv.constant_residual < 1e-12
    });
    rule
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const PROBE_COUNT: usize = 11;
const PROBE_STEP: f64 = 1e-5;

/// A test integrand on `[0, 1]` with its derivative and, optionally, its
/// second derivative and exact integral.
#[derive(Clone)]
pub struct IntegrandSpec {
    name: String,
    f: RealFn,
    f_prime: RealFn,
    f_second: Option<RealFn>,
    exact_integral: Option<f64>,
}

impl fmt::Debug for IntegrandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegrandSpec")
            .field("name", &self.name)
            .field("has_second_derivative", &self.f_second.is_some())
            .field("exact_integral", &self.exact_integral)
            .finish()
    }
}

fn fd_probe(name: &str, f: &RealFn, df: &RealFn, tol: f64) -> Result<()> {
    for k in 1..=PROBE_COUNT {
        let x = k as f64 / (PROBE_COUNT + 1) as f64;
        let fd = (f(x + PROBE_STEP) - f(x - PROBE_STEP)) / (2.0 * PROBE_STEP);
        let residual = (fd - df(x)).abs();
        if residual.is_nan() || residual > tol {
            return Err(Error::DerivativeMismatch {
                name: name.to_string(),
                x,
                residual,
                tol,
            });
        }
    }
    Ok(())
}

impl IntegrandSpec {
    /// Registers an integrand, checking `f_prime` against central differences
    /// of `f` at 11 interior points.
    pub fn new<F, D>(name: impl Into<String>, f: F, f_prime: D) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let f: RealFn = Arc::new(f);
        let f_prime: RealFn = Arc::new(f_prime);
        fd_probe(&name, &f, &f_prime, 1e-6)?;
        Ok(IntegrandSpec {
            name,
            f,
            f_prime,
            f_second: None,
            exact_integral: None,
        })
    }

    pub fn with_exact_integral(mut self, value: f64) -> Self {
        self.exact_integral = Some(value);
        self
    }

    /// Attaches `φ''`, checked against differences of `φ'` (tolerance 1e-5).
    pub fn with_second_derivative<S>(mut self, f_second: S) -> Result<Self>
    where
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f_second: RealFn = Arc::new(f_second);
        fd_probe(&self.name, &self.f_prime, &f_second, 1e-5)?;
        self.f_second = Some(f_second);
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn eval_prime(&self, x: f64) -> f64 {
        (self.f_prime)(x)
    }

    pub fn eval_second(&self, x: f64) -> Option<f64> {
        self.f_second.as_ref().map(|f| f(x))
    }

    pub fn has_second_derivative(&self) -> bool {
        self.f_second.is_some()
    }

    pub fn exact_integral(&self) -> Option<f64> {
        self.exact_integral
    }
}

/// `Σ_β (c0[β] φ(hβ) + c1[β] φ'(hβ))`.
pub fn apply_rule(rule: &QuadratureRule, integrand: &IntegrandSpec) -> f64 {
    let grid = rule.grid();
    let mut sum = 0.0;
    for (b, x) in grid.nodes().enumerate() {
        sum += rule.c0[b] * integrand.eval(x);
        if rule.c1[b] != 0.0 {
            sum += rule.c1[b] * integrand.eval_prime(x);
        }
    }
    sum
}

/// The value `(ℓ, φ) = ∫₀¹ φ − apply_rule(φ)`.
pub fn quadrature_error(rule: &QuadratureRule, integrand: &IntegrandSpec) -> Result<f64> {
    let exact = integrand
        .exact_integral()
        .ok_or_else(|| Error::MissingExactIntegral(integrand.name().to_string()))?;
    Ok(exact - apply_rule(rule, integrand))
}

/// Registry names, in a fixed order.
pub const BUILTIN_NAMES: [&str; 9] = [
    "one", "x", "xsq", "xcube", "exp", "expm", "sinpix", "recip1p", "coshx",
];

/// Looks up a built-in integrand by its registry name.
pub fn builtin(name: &str) -> Result<IntegrandSpec> {
    use std::f64::consts::{LN_2, PI};
    let spec = match name {
        "one" => IntegrandSpec::new(name, |_| 1.0, |_| 0.0)?
            .with_second_derivative(|_| 0.0)?
            .with_exact_integral(1.0),
        "x" => IntegrandSpec::new(name, |x| x, |_| 1.0)?
            .with_second_derivative(|_| 0.0)?
            .with_exact_integral(0.5),
        "xsq" => IntegrandSpec::new(name, |x| x * x, |x| 2.0 * x)?
            .with_second_derivative(|_| 2.0)?
            .with_exact_integral(1.0 / 3.0),
        "xcube" => IntegrandSpec::new(name, |x| x * x * x, |x| 3.0 * x * x)?
            .with_second_derivative(|x| 6.0 * x)?
            .with_exact_integral(0.25),
        "exp" => IntegrandSpec::new(name, f64::exp, f64::exp)?
            .with_second_derivative(f64::exp)?
            .with_exact_integral(1.0f64.exp_m1()),
        "expm" => IntegrandSpec::new(name, |x: f64| (-x).exp(), |x: f64| -(-x).exp())?
            .with_second_derivative(|x: f64| (-x).exp())?
            .with_exact_integral(-(-1.0f64).exp_m1()),
        "sinpix" => {
            IntegrandSpec::new(name, |x: f64| (PI * x).sin(), |x: f64| PI * (PI * x).cos())?
                .with_second_derivative(|x: f64| -PI * PI * (PI * x).sin())?
                .with_exact_integral(2.0 / PI)
        }
        "recip1p" => IntegrandSpec::new(
            name,
            |x: f64| 1.0 / (1.0 + x),
            |x: f64| -1.0 / ((1.0 + x) * (1.0 + x)),
        )?
        .with_second_derivative(|x: f64| 2.0 / ((1.0 + x) * (1.0 + x) * (1.0 + x)))?
        .with_exact_integral(LN_2),
        "coshx" => IntegrandSpec::new(name, f64::cosh, f64::sinh)?
            .with_second_derivative(f64::cosh)?
            .with_exact_integral(1.0f64.sinh()),
        _ => return Err(Error::UnknownIntegrand(name.to_string())),
    };
    Ok(spec)
}

/// All built-in integrands in registry order.
pub fn builtin_integrands() -> Vec<IntegrandSpec> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin(n).expect("built-in integrands pass their derivative probes"))
        .collect()
}
