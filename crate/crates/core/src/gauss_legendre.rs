//! Gauss–Legendre nodes and a composite integrator.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point rule on `[-1, 1]`, by Newton's
/// method on the Legendre recurrence.
pub fn nodes_weights(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1);
    let n = order as f64;
    let mut out = Vec::with_capacity(order);
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out.reverse();
    out
}

fn legendre(order: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Composite rule on `[a, b]` with `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let rule = nodes_weights(order);
    integrate_with(&rule, f, a, b, panels)
}

pub(crate) fn integrate_with<F: Fn(f64) -> f64>(
    rule: &[(f64, f64)],
    f: F,
    a: f64,
    b: f64,
    panels: usize,
) -> f64 {
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let s: f64 = rule
            .iter()
            .map(|&(x, w)| w * f(mid + 0.5 * width * x))
            .sum();
        total += 0.5 * width * s;
    }
    total
}
