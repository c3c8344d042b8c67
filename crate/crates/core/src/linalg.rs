//! Complex linear solves for the coupled-dipole system.
//!
//! Small systems are factorised densely (partial-pivot LU); larger ones go
//! through BiCGSTAB with a matrix-free operator. All reductions are done in
//! a fixed order so results do not depend on the rayon thread count.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("linear system is singular")]
    Singular,
    #[error("BiCGSTAB did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("BiCGSTAB breakdown at iteration {0}")]
    Breakdown(usize),
    #[error("dimension mismatch: operator {op}, rhs {rhs}")]
    Dimension { op: usize, rhs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target `||r|| / ||b||` for the iterative path.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Systems with at most this many unknowns are solved by dense LU.
    pub dense_max_unknowns: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 10_000,
            dense_max_unknowns: 1500,
        }
    }
}

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IterationStats {
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unpreconditioned BiCGSTAB (van der Vorst) for complex non-Hermitian systems.
pub fn bicgstab(
    op: &dyn LinearOperator,
    b: &[Complex64],
    opts: &SolverOptions,
) -> Result<(Vec<Complex64>, IterationStats), SolveError> {
    let n = op.dim();
    if b.len() != n {
        return Err(SolveError::Dimension { op: n, rhs: b.len() });
    }
    let zero = Complex64::new(0.0, 0.0);
    let b_norm = norm(b);
    let mut x = vec![zero; n];
    if b_norm == 0.0 {
        return Ok((x, IterationStats::default()));
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut p = vec![zero; n];
    let mut v = vec![zero; n];
    let mut s = vec![zero; n];
    let mut t = vec![zero; n];
    let mut rho_prev = Complex64::new(1.0, 0.0);
    let mut alpha = Complex64::new(1.0, 0.0);
    let mut omega = Complex64::new(1.0, 0.0);

    for iter in 1..=opts.max_iter {
        let rho = dot(&r_hat, &r);
        if rho.norm() <= f64::MIN_POSITIVE {
            return Err(SolveError::Breakdown(iter));
        }
        let beta = (rho / rho_prev) * (alpha / omega);
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        op.apply(&p, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.norm() <= f64::MIN_POSITIVE {
            return Err(SolveError::Breakdown(iter));
        }
        alpha = rho / denom;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        let s_norm = norm(&s);
        if s_norm <= opts.rel_tol * b_norm {
            for k in 0..n {
                x[k] += alpha * p[k];
            }
            return Ok((
                x,
                IterationStats {
                    iterations: iter,
                    residual: s_norm / b_norm,
                },
            ));
        }
        op.apply(&s, &mut t);
        let tt = dot(&t, &t);
        if tt.norm() <= f64::MIN_POSITIVE {
            return Err(SolveError::Breakdown(iter));
        }
        omega = dot(&t, &s) / tt;
        for k in 0..n {
            x[k] += alpha * p[k] + omega * s[k];
            r[k] = s[k] - omega * t[k];
        }
        let res = norm(&r) / b_norm;
        if res <= opts.rel_tol {
            return Ok((
                x,
                IterationStats {
                    iterations: iter,
                    residual: res,
                },
            ));
        }
        if omega.norm() <= f64::MIN_POSITIVE {
            return Err(SolveError::Breakdown(iter));
        }
        rho_prev = rho;
    }
    let mut ax = vec![zero; n];
    op.apply(&x, &mut ax);
    let residual = norm(&b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<_>>()) / b_norm;
    Err(SolveError::NotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

/// LU factorisation of a dense complex matrix, reusable across right-hand sides.
pub struct DenseLu {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    dim: usize,
}

impl DenseLu {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self, SolveError> {
        let dim = matrix.nrows();
        let lu = matrix.lu();
        if dim > 0 && !lu.is_invertible() {
            return Err(SolveError::Singular);
        }
        Ok(Self { lu, dim })
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, SolveError> {
        if b.len() != self.dim {
            return Err(SolveError::Dimension { op: self.dim, rhs: b.len() });
        }
        if self.dim == 0 {
            return Ok(Vec::new());
        }
        let rhs = DVector::from_column_slice(b);
        let x = self.lu.solve(&rhs).ok_or(SolveError::Singular)?;
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(SolveError::Singular);
        }
        Ok(x.iter().copied().collect())
    }
}
