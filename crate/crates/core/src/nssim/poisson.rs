//! Pure-Neumann pressure Poisson problem on the polar cell grid.
//!
//! The area-weighted operator `A p = sum_nb c (p_c - p_nb)` is symmetric
//! positive semidefinite with the constants as null space. Solved by
//! Jacobi-preconditioned conjugate gradients on the zero-sum part of the
//! right-hand side; the returned pressure has zero mean.

use super::grid::{Array2, PolarGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PoissonSolver {
    n_s: usize,
    n_r: usize,
    /// Coupling across the angular face between `(i, j)` and `(i + 1, j)`, per row.
    c_theta: Vec<f64>,
    /// Coupling across radial face `j` (between rows `j - 1` and `j`).
    c_rho: Vec<f64>,
    diag: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

impl PoissonSolver {
    pub fn new(grid: &PolarGrid, tolerance: f64) -> Self {
        let (dt, dr) = (grid.dtheta(), grid.drho());
        let c_theta: Vec<f64> = (0..grid.n_r).map(|j| dr / (grid.rho_c(j) * dt)).collect();
        let c_rho: Vec<f64> = (0..=grid.n_r).map(|j| grid.rho_f(j) * dt / dr).collect();
        let mut diag = vec![0.0; grid.cells()];
        for i in 0..grid.n_s {
            for j in 0..grid.n_r {
                let mut d = 0.0;
                if i > 0 {
                    d += c_theta[j];
                }
                if i + 1 < grid.n_s {
                    d += c_theta[j];
                }
                if j > 0 {
                    d += c_rho[j];
                }
                if j + 1 < grid.n_r {
                    d += c_rho[j + 1];
                }
                diag[i * grid.n_r + j] = d;
            }
        }
        PoissonSolver {
            n_s: grid.n_s,
            n_r: grid.n_r,
            c_theta,
            c_rho,
            diag,
            tolerance,
        }
    }

    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        let n_r = self.n_r;
        for i in 0..self.n_s {
            for j in 0..n_r {
                let k = i * n_r + j;
                let pc = p[k];
                let mut v = 0.0;
                if i > 0 {
                    v += self.c_theta[j] * (pc - p[k - n_r]);
                }
                if i + 1 < self.n_s {
                    v += self.c_theta[j] * (pc - p[k + n_r]);
                }
                if j > 0 {
                    v += self.c_rho[j] * (pc - p[k - 1]);
                }
                if j + 1 < n_r {
                    v += self.c_rho[j + 1] * (pc - p[k + 1]);
                }
                out[k] = v;
            }
        }
    }

    /// Solves `A p = b` in the least-squares sense (the mean of `b` is
    /// discarded) and returns a zero-mean `p`.
    pub fn solve(&self, rhs: &Array2) -> Result<(Array2, SolveStats)> {
        let n = self.n_s * self.n_r;
        let mean = rhs.as_slice().iter().sum::<f64>() / n as f64;
        let b: Vec<f64> = rhs.as_slice().iter().map(|v| v - mean).collect();
        let bnorm = norm(&b);
        let mut x = vec![0.0; n];
        let mut out = Array2::zeros(self.n_s, self.n_r);
        if bnorm == 0.0 {
            return Ok((
                out,
                SolveStats {
                    iterations: 0,
                    relative_residual: 0.0,
                },
            ));
        }
        let mut r = b;
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut d = z.clone();
        let mut rz = dot(&r, &z);
        let mut ad = vec![0.0; n];
        let max_iter = 20 * n;
        let mut rel = 1.0;
        let mut it = 0;
        while it < max_iter {
            self.apply(&d, &mut ad);
            let alpha = rz / dot(&d, &ad);
            for k in 0..n {
                x[k] += alpha * d[k];
                r[k] -= alpha * ad[k];
            }
            it += 1;
            rel = norm(&r) / bnorm;
            if rel <= self.tolerance {
                break;
            }
            for k in 0..n {
                z[k] = r[k] / self.diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                d[k] = z[k] + beta * d[k];
            }
        }
        if rel > self.tolerance {
            return Err(Error::SolverFailed {
                residual: rel,
                iterations: it,
            });
        }
        let xm = x.iter().sum::<f64>() / n as f64;
        for (o, v) in out.as_mut_slice().iter_mut().zip(&x) {
            *o = v - xm;
        }
        Ok((
            out,
            SolveStats {
                iterations: it,
                relative_residual: rel,
            },
        ))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
