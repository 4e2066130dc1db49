//! The three-point discrete analog `D₁` of `d²/dx² − 1` and the convolution
//! route to the optimal derivative weights: `c1 = D₁ * u`, where `u` is the
//! left-hand side of the Lagrange system extended to all integers.

use crate::error::{Error, Result};
use crate::error_norm::BernoulliTable;
use crate::kernels;
use crate::rules::Grid;

use twofloat::TwoFloat;

/// Below this step the endpoint factor is summed as a series.
pub const SERIES_THRESHOLD: f64 = 0.1;

/// `h(e^h+1)/(e^h−1) − 2 = h·coth(h/2) − 2`, an O(h²) quantity shared by the
/// right-hand sides, the `u` constants and the endpoint weight.
pub fn endpoint_factor(h: f64) -> f64 {
    if h < SERIES_THRESHOLD {
        endpoint_factor_series(h)
    } else {
        endpoint_factor_closed(h)
    }
}

/// The closed form, carried in double-double up to `h = 2`: in f64 the final
/// subtraction of 2 leaves only about `6ε/h²` relative accuracy.
pub fn endpoint_factor_closed(h: f64) -> f64 {
    if h > 0.0 && h <= 2.0 {
        let x = TwoFloat::from(h);
        let em1 = kernels::extended::expm1(x);
        let v = kernels::extended::div(x * (em1 + 2.0), em1) - 2.0;
        v.hi() + v.lo()
    } else {
        let em1 = h.exp_m1();
        h * (em1 + 2.0) / em1 - 2.0
    }
}

/// `2 Σ_{k≥1} B_{2k} h^{2k} / (2k)!`.
pub fn endpoint_factor_series(h: f64) -> f64 {
    let table = BernoulliTable::new();
    let h2 = h * h;
    let mut power_over_fact = 1.0;
    let mut sum = 0.0;
    for k in 1..=10 {
        let m = 2 * k;
        power_over_fact *= h2 / ((m - 1) * m) as f64;
        let term = table.get(m).unwrap_or(0.0) * power_over_fact;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    2.0 * sum
}

/// `D₁(hβ)` on a step `h`; zero outside `|β| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteKernel {
    h: f64,
    center: f64,
    side: f64,
}

impl DiscreteKernel {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::Domain {
                what: "discrete operator step",
                value: h,
                domain: "0 < h <= 1",
            });
        }
        // 1/(1 − e^{2h}) = −1/expm1(2h)
        let scale = -1.0 / (2.0 * h).exp_m1();
        Ok(DiscreteKernel {
            h,
            center: scale * 2.0 * (1.0 + (2.0 * h).exp()),
            side: scale * -2.0 * h.exp(),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn value(&self, beta: i64) -> f64 {
        match beta.unsigned_abs() {
            0 => self.center,
            1 => self.side,
            _ => 0.0,
        }
    }

    /// `|D₁(0) + D₁(1)(e^h + e^{−h})| / |D₁(0)|`, zero in exact arithmetic.
    pub fn annihilation_residual(&self) -> f64 {
        let r = self.center + self.side * 2.0 * self.h.cosh();
        (r / self.center).abs()
    }

    /// `Σ_{|γ|≤1} D₁(hγ) f(β − γ)`; the sum is exact because of the support.
    pub fn convolve<F: Fn(i64) -> f64>(&self, beta: i64, f: F) -> f64 {
        self.side * f(beta + 1) + self.center * f(beta) + self.side * f(beta - 1)
    }
}

/// `D₁(hβ)`.
pub fn d1_at(h: f64, beta: i64) -> Result<f64> {
    Ok(DiscreteKernel::new(h)?.value(beta))
}

/// Largest residuals of `D₁ * G₁ = δ_d` and `D₁ * e^{±hβ} = 0` over
/// `|β| ≤ range`. The `*_scaled` fields divide each residual by
/// `max(1, e^{h|β|})`, the size of the terms being cancelled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub h: f64,
    pub range: i64,
    pub delta_abs: f64,
    pub delta_scaled: f64,
    pub exp_plus_abs: f64,
    pub exp_plus_scaled: f64,
    pub exp_minus_abs: f64,
    pub exp_minus_scaled: f64,
    /// `(D₁ * G₁)(0)`, which should be 1.
    pub delta_at_zero: f64,
}

impl IdentityReport {
    pub fn max_scaled(&self) -> f64 {
        self.delta_scaled
            .max(self.exp_plus_scaled)
            .max(self.exp_minus_scaled)
    }
}

pub fn verify_d1_identities(h: f64, range: i64) -> Result<IdentityReport> {
    if range < 2 {
        return Err(Error::Domain {
            what: "identity check range",
            value: range as f64,
            domain: "range >= 2",
        });
    }
    let d1 = DiscreteKernel::new(h)?;
    let g1 = |k: i64| kernels::g1(h * k as f64);
    // fail early if the widest argument is out of the kernel domain
    g1(range + 1)?;

    let mut report = IdentityReport {
        h,
        range,
        delta_abs: 0.0,
        delta_scaled: 0.0,
        exp_plus_abs: 0.0,
        exp_plus_scaled: 0.0,
        exp_minus_abs: 0.0,
        exp_minus_scaled: 0.0,
        delta_at_zero: f64::NAN,
    };
    for beta in -range..=range {
        let scale = (h * beta.unsigned_abs() as f64).exp().max(1.0);
        let conv = d1.convolve(beta, |k| kernels::g1_unchecked(h * k as f64));
        if beta == 0 {
            report.delta_at_zero = conv;
        }
        let delta = if beta == 0 { 1.0 } else { 0.0 };
        let r = (conv - delta).abs();
        report.delta_abs = report.delta_abs.max(r);
        report.delta_scaled = report.delta_scaled.max(r / scale);

        let r = d1.convolve(beta, |k| (h * k as f64).exp()).abs();
        report.exp_plus_abs = report.exp_plus_abs.max(r);
        report.exp_plus_scaled = report.exp_plus_scaled.max(r / scale);

        let r = d1.convolve(beta, |k| (-h * k as f64).exp()).abs();
        report.exp_minus_abs = report.exp_minus_abs.max(r);
        report.exp_minus_scaled = report.exp_minus_scaled.max(r / scale);
    }
    Ok(report)
}

/// Closed form of the right-hand side `F(hβ)`, valid for any integer `β`.
pub fn rhs_f_closed(grid: Grid, beta: i64) -> f64 {
    let h = grid.h();
    let x = beta as f64 / grid.n() as f64;
    let e = std::f64::consts::E;
    ((x.exp() * ((-1.0f64).exp() + 1.0) - (-x).exp() * (e + 1.0)) / 8.0) * endpoint_factor(h)
}

/// Closed form of the right-hand side `g` of the exactness constraint.
pub fn rhs_g_closed(grid: Grid) -> f64 {
    -0.5 * (-1.0f64).exp_m1() * endpoint_factor(grid.h())
}

/// `u(hβ)` on all integers: exponential tails outside `[0, N]`, `F` inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UProfile {
    grid: Grid,
    g: f64,
    d: f64,
    big_d: f64,
}

impl UProfile {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// The Lagrange multiplier, zero for this problem.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// `D = ¼ Σ_γ c1[γ] e^{hγ}`.
    pub fn big_d(&self) -> f64 {
        self.big_d
    }

    pub fn left_branch(&self, beta: i64) -> f64 {
        let x = self.x(beta);
        -0.25 * x.exp() * self.g + (self.d + self.big_d) * (-x).exp()
    }

    pub fn right_branch(&self, beta: i64) -> f64 {
        let x = self.x(beta);
        0.25 * x.exp() * self.g + (self.d - self.big_d) * (-x).exp()
    }

    pub fn middle_branch(&self, beta: i64) -> f64 {
        rhs_f_closed(self.grid, beta)
    }

    pub fn eval(&self, beta: i64) -> f64 {
        let n = self.grid.n() as i64;
        if beta < 0 {
            self.left_branch(beta)
        } else if beta > n {
            self.right_branch(beta)
        } else {
            self.middle_branch(beta)
        }
    }

    /// Disagreement of the outer and middle branches at `β = 0` and `β = N`.
    pub fn branch_consistency(&self) -> (f64, f64) {
        let n = self.grid.n() as i64;
        (
            (self.left_branch(0) - self.middle_branch(0)).abs(),
            (self.right_branch(n) - self.middle_branch(n)).abs(),
        )
    }

    fn x(&self, beta: i64) -> f64 {
        beta as f64 / self.grid.n() as f64
    }
}

pub fn build_u_profile(grid: Grid) -> UProfile {
    let factor = endpoint_factor(grid.h());
    let e = std::f64::consts::E;
    UProfile {
        grid,
        g: rhs_g_closed(grid),
        d: 0.0,
        big_d: factor * (1.0 - e) / 8.0,
    }
}

/// `c1[β] = (D₁ * u)(hβ)` for `β = 0..=N`.
pub fn reconstruct_c1(grid: Grid) -> Vec<f64> {
    let d1 = DiscreteKernel::new(grid.h()).expect("grid step lies in (0, 1]");
    let u = build_u_profile(grid);
    (0..=grid.n() as i64)
        .map(|b| d1.convolve(b, |k| u.eval(k)))
        .collect()
}
