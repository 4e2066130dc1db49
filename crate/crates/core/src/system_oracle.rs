//! Numerical solution of the bordered Lagrange system for the derivative
//! weights and the multiplier `d`. This path never uses the closed-form
//! weights; it is the independent check on them.

use crate::discrete_operator::{rhs_f_closed, rhs_g_closed};
use crate::error::{Error, Result};
use crate::kernels;
use crate::rules::{trapezoid_weights, Grid};

/// Where the right-hand side of the system comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsSource {
    /// The simplified closed forms shared with the convolution route.
    #[default]
    Closed,
    /// The defining sums over trapezoid weights and kernel integrals.
    Direct,
}

/// Dense `(N+2) × (N+2)` system, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    dimension: usize,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.dimension + col]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖A x − b‖∞`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        let n = self.dimension;
        (0..n)
            .map(|i| {
                let row = &self.matrix[i * n..(i + 1) * n];
                let ax: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
                (ax - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub c1: Vec<f64>,
    pub d: f64,
    pub residual_norm: f64,
    pub pivot_growth: f64,
}

fn check_index(grid: Grid, beta: usize) -> Result<()> {
    if beta > grid.n() {
        Err(Error::IndexOutOfRange {
            index: beta,
            n: grid.n(),
        })
    } else {
        Ok(())
    }
}

/// `F(hβ) = ∫₀¹ G₂'(x − hβ) dx + Σ_γ c0[γ] G₂'(hβ − hγ)`.
pub fn rhs_f_direct(grid: Grid, beta: usize) -> Result<f64> {
    check_index(grid, beta)?;
    let x = grid.node(beta);
    let integral = kernels::integral_g2_prime_shifted(x)?;
    let c0 = trapezoid_weights(grid);
    let n = grid.n() as i64;
    let sum: f64 = (0..=n)
        .map(|g| c0[g as usize] * kernels::g2_prime_raw((beta as i64 - g) as f64 / n as f64))
        .sum();
    Ok(integral + sum)
}

/// `g = e^{−1} − 1 + Σ_γ c0[γ] e^{−hγ}`.
pub fn rhs_g_direct(grid: Grid) -> f64 {
    let c0 = trapezoid_weights(grid);
    let sum: f64 = grid.nodes().zip(&c0).map(|(x, c)| c * (-x).exp()).sum();
    (-1.0f64).exp_m1() + sum
}

pub fn assemble_system(grid: Grid) -> LinearSystem {
    assemble_system_with(grid, RhsSource::Closed)
}

pub fn assemble_system_with(grid: Grid, source: RhsSource) -> LinearSystem {
    let n = grid.n();
    let dim = n + 2;
    let mut matrix = vec![0.0; dim * dim];
    for b in 0..=n {
        for g in 0..=n {
            let k = b as f64 - g as f64;
            matrix[b * dim + g] = kernels::g2_second_raw(k / n as f64);
        }
        let e = (-grid.node(b)).exp();
        matrix[b * dim + n + 1] = e;
        matrix[(n + 1) * dim + b] = e;
    }
    let mut rhs: Vec<f64> = match source {
        RhsSource::Closed => (0..=n).map(|b| rhs_f_closed(grid, b as i64)).collect(),
        RhsSource::Direct => (0..=n)
            .map(|b| rhs_f_direct(grid, b).expect("node index in range"))
            .collect(),
    };
    rhs.push(match source {
        RhsSource::Closed => rhs_g_closed(grid),
        RhsSource::Direct => rhs_g_direct(grid),
    });
    LinearSystem {
        dimension: dim,
        matrix,
        rhs,
    }
}

/// Solution of a dense system with its pivot growth factor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    pub pivot_growth: f64,
}

/// Gaussian elimination with partial pivoting.
///
/// A pivot smaller than `1e-13` times the largest magnitude in its column of
/// the original matrix is reported as singular.
pub fn solve_dense(system: &LinearSystem) -> Result<DenseSolution> {
    let n = system.dimension;
    let mut a = system.matrix.clone();
    let mut b = system.rhs.clone();
    let col_scale: Vec<f64> = (0..n)
        .map(|j| (0..n).fold(0.0, |m: f64, i| m.max(a[i * n + j].abs())))
        .collect();
    let initial_max = system.max_abs_entry();
    let mut running_max = initial_max;

    for k in 0..n {
        let (p, pivot_abs) =
            (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        let threshold = 1e-13 * col_scale[k];
        if pivot_abs.is_nan() || pivot_abs < threshold || pivot_abs == 0.0 {
            return Err(Error::Singular {
                column: k,
                pivot: pivot_abs,
                threshold,
            });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[i * n + k] = 0.0;
            for j in k + 1..n {
                let v = a[i * n + j] - factor * a[k * n + j];
                a[i * n + j] = v;
                running_max = running_max.max(v.abs());
            }
            b[i] -= factor * b[k];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Ok(DenseSolution {
        x,
        pivot_growth: if initial_max > 0.0 {
            running_max / initial_max
        } else {
            1.0
        },
    })
}

pub fn solve_oracle(grid: Grid) -> Result<OracleSolution> {
    solve_oracle_with(grid, RhsSource::Closed)
}

pub fn solve_oracle_with(grid: Grid, source: RhsSource) -> Result<OracleSolution> {
    let system = assemble_system_with(grid, source);
    let sol = solve_dense(&system)?;
    let residual_norm = system.residual_norm(&sol.x);
    let mut c1 = sol.x;
    let d = c1.pop().expect("system has N + 2 unknowns");
    Ok(OracleSolution {
        c1,
        d,
        residual_norm,
        pivot_growth: sol.pivot_growth,
    })
}
