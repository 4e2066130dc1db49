//! The kernel family `G_m`, the derivatives of `G_2`, and the primitives of
//! `G_2` used to integrate it in closed form.
//!
//! Every function here is a signed tail of the exponential series,
//! `Σ_{j ≥ p, j ≡ p (mod 2)} |x|^j / j!`, times `1/2` and possibly `sgn x`.
//! For `|x| < 2` the tail is summed term by term, which avoids the
//! cancellation in expressions such as `sinh x - x` near the origin; larger
//! arguments use the closed forms directly.

use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Largest admissible `|x|`. Arguments of at most `N + 1` steps of size
/// `h ≤ 1` appear in the identity checks, so this sits a little above 50.
pub const MAX_ABS_ARG: f64 = 64.0;

const SERIES_CUTOFF: f64 = 2.0;

/// Abscissa on the real line at which a kernel is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KernelPoint(f64);

impl KernelPoint {
    pub fn new(x: f64) -> Result<Self> {
        if x.is_finite() && x.abs() <= MAX_ABS_ARG {
            Ok(KernelPoint(x))
        } else {
            Err(Error::Domain {
                what: "kernel argument",
                value: x,
                domain: "|x| <= 64",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `Σ_{j = first, first+2, ...} ax^j / j!` for `ax ≥ 0`.
fn series_tail(ax: f64, first: u32) -> f64 {
    if ax == 0.0 {
        return if first == 0 { 1.0 } else { 0.0 };
    }
    let mut term = 1.0;
    for j in 1..=first {
        term *= ax / j as f64;
    }
    let mut sum = term;
    let sq = ax * ax;
    let mut j = first as f64;
    for _ in 0..2000 {
        term *= sq / ((j + 1.0) * (j + 2.0));
        j += 2.0;
        sum += term;
        if term <= sum * 1e-18 {
            break;
        }
    }
    sum
}

/// Same tail, selecting the closed form for large arguments.
fn tail(ax: f64, first: u32) -> f64 {
    if ax < SERIES_CUTOFF {
        return series_tail(ax, first);
    }
    let x2 = ax * ax;
    match first {
        0 => ax.cosh(),
        1 => ax.sinh(),
        2 => ax.cosh() - 1.0,
        3 => ax.sinh() - ax,
        4 => ax.cosh() - 1.0 - 0.5 * x2,
        5 => ax.sinh() - ax - ax * x2 / 6.0,
        _ => series_tail(ax, first),
    }
}

fn check(x: f64) -> Result<f64> {
    KernelPoint::new(x).map(KernelPoint::value)
}

/// `G_m(x) = sgn(x)/2 · (sinh x − Σ_{k=1}^{m−1} x^{2k−1}/(2k−1)!)`.
pub fn g_m(m: u32, x: f64) -> Result<f64> {
    if m < 1 {
        return Err(Error::Domain {
            what: "kernel order m",
            value: m as f64,
            domain: "m >= 1",
        });
    }
    let x = check(x)?;
    Ok(g_m_raw(m, x))
}

// The bracket is odd in x, so sgn(x) times it is the tail evaluated at |x|.
pub(crate) fn g_m_raw(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    0.5 * tail(x.abs(), 2 * m - 1)
}

/// `G_1(x) = sgn(x)/2 · sinh x`, identical to [`g2_second`].
pub fn g1(x: f64) -> Result<f64> {
    g_m(1, x)
}

/// `G_2(x) = sgn(x)/2 · (sinh x − x)`.
pub fn g2(x: f64) -> Result<f64> {
    g_m(2, x)
}

/// `G_2'(x) = sgn(x)/2 · (cosh x − 1)`.
pub fn g2_prime(x: f64) -> Result<f64> {
    check(x).map(g2_prime_raw)
}

/// `G_2''(x) = sgn(x)/2 · sinh x`.
pub fn g2_second(x: f64) -> Result<f64> {
    g_m(1, x)
}

/// Odd primitive `H` of `G_2` with `H(0) = 0`:
/// `H(x) = sgn(x)/2 · (cosh x − 1 − x²/2)`.
pub fn g2_antiderivative(x: f64) -> Result<f64> {
    check(x).map(g2_antiderivative_raw)
}

/// Even primitive `K` of `H` with `K(0) = 0`:
/// `K(x) = (sinh|x| − |x| − |x|³/6)/2`.
pub fn g2_double_antiderivative(x: f64) -> Result<f64> {
    check(x).map(g2_double_antiderivative_raw)
}

pub(crate) fn g2_raw(x: f64) -> f64 {
    g_m_raw(2, x)
}

pub(crate) fn g2_prime_raw(x: f64) -> f64 {
    0.5 * sgn(x) * tail(x.abs(), 2)
}

pub(crate) fn g2_second_raw(x: f64) -> f64 {
    g_m_raw(1, x)
}

pub(crate) fn g1_unchecked(x: f64) -> f64 {
    g_m_raw(1, x)
}

pub(crate) fn g2_antiderivative_raw(x: f64) -> f64 {
    0.5 * sgn(x) * tail(x.abs(), 4)
}

pub(crate) fn g2_double_antiderivative_raw(x: f64) -> f64 {
    0.5 * tail(x.abs(), 5)
}

/// `∫₀¹ G_2(x − a) dx = H(1 − a) + H(a)`.
pub fn integral_g2_shifted(a: f64) -> Result<f64> {
    Ok(g2_antiderivative(1.0 - a)? + g2_antiderivative(a)?)
}

/// `∫₀¹ G_2'(x − a) dx = G_2(1 − a) − G_2(a)`.
pub fn integral_g2_prime_shifted(a: f64) -> Result<f64> {
    Ok(g2(1.0 - a)? - g2(a)?)
}

/// `∫₀¹∫₀¹ G_2(x − y) dx dy = 2 K(1)`.
pub fn double_integral_g2() -> f64 {
    2.0 * g2_double_antiderivative_raw(1.0)
}

/// Double-double versions of the kernels for the brute-force norm, where
/// the result is a cancellation of O(1) terms down to O(h⁴).
///
/// Arguments are restricted to `|x| ≤ 2`; only differences of nodes in
/// `[0, 1]` are ever passed.
pub(crate) mod extended {
    use twofloat::TwoFloat;

    fn tail(x: TwoFloat, first: u32) -> TwoFloat {
        let ax = x.abs();
        debug_assert!(ax.hi() <= 2.0);
        if ax.hi() == 0.0 {
            return TwoFloat::from(0.0);
        }
        let mut term = TwoFloat::from(1.0);
        for j in 1..=first {
            term = term * ax / j as f64;
        }
        let mut sum = term;
        let sq = ax * ax;
        let mut j = first as f64;
        for _ in 0..200 {
            term = term * sq / ((j + 1.0) * (j + 2.0));
            j += 2.0;
            sum += term;
            if term.hi() <= sum.hi() * 1e-34 {
                break;
            }
        }
        sum
    }

    /// `e^x − 1` for `0 ≤ x ≤ 2`, as `(sinh x) + (cosh x − 1)`.
    pub fn expm1(x: TwoFloat) -> TwoFloat {
        debug_assert!(x.hi() >= 0.0);
        tail(x, 1) + tail(x, 2)
    }

    /// `a / b` to double-double accuracy. The crate's own `TwoFloat / TwoFloat`
    /// is only good to about 1 ulp of f64, so one Newton step follows it.
    pub fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
        let q = a / b;
        let r = a - q * b;
        q + r.hi() / b.hi()
    }

    fn sgn(x: TwoFloat) -> f64 {
        super::sgn(x.hi())
    }

    pub fn g2(x: TwoFloat) -> TwoFloat {
        tail(x, 3) * 0.5
    }

    pub fn g2_prime(x: TwoFloat) -> TwoFloat {
        tail(x, 2) * (0.5 * sgn(x))
    }

    pub fn g2_second(x: TwoFloat) -> TwoFloat {
        tail(x, 1) * 0.5
    }

    pub fn g2_antiderivative(x: TwoFloat) -> TwoFloat {
        tail(x, 4) * (0.5 * sgn(x))
    }

    pub fn g2_double_antiderivative(x: TwoFloat) -> TwoFloat {
        tail(x, 5) * 0.5
    }
}

/// `k / n` rounded once in double-double arithmetic.
pub(crate) fn ratio_dd(k: i64, n: usize) -> TwoFloat {
    TwoFloat::from(k as f64) / n as f64
}
