//! Linear solves and condition-number estimates for the Galerkin systems.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::assembly::MatrixFreeSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

impl LinearOperator for MatrixFreeSystem {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        MatrixFreeSystem::apply(self, x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Gmres,
    Cg,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub coeffs: Vec<f64>,
    pub method: Method,
    pub iterations: Option<usize>,
    /// Relative residual `‖b − Ax‖ / ‖b‖`.
    pub residual: f64,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residual(op: &dyn LinearOperator, x: &[f64], b: &[f64]) -> f64 {
    let mut r = vec![0.0; b.len()];
    op.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Sparse Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    factor: Llt<usize, f64>,
    n: usize,
}

impl Cholesky {
    pub fn new(matrix: &CsrMatrix) -> Result<Self> {
        if matrix.nrows != matrix.ncols {
            return Err(Error::Dimension {
                expected: matrix.nrows,
                got: matrix.ncols,
            });
        }
        let factor = matrix
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|_| Error::NotSpd)?;
        Ok(Self {
            factor,
            n: matrix.nrows,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.factor.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }
}

pub const DIRECT_TOLERANCE: f64 = 1e-10;

pub fn solve_direct(matrix: &CsrMatrix, rhs: &[f64]) -> Result<SolveReport> {
    if rhs.len() != matrix.nrows {
        return Err(Error::Dimension {
            expected: matrix.nrows,
            got: rhs.len(),
        });
    }
    let chol = Cholesky::new(matrix)?;
    let mut x = chol.solve(rhs);
    let mut residual = relative_residual(matrix, &x, rhs);
    // a couple of refinement sweeps for badly scaled systems
    for _ in 0..3 {
        if residual <= DIRECT_TOLERANCE {
            break;
        }
        let mut r = vec![0.0; rhs.len()];
        matrix.matvec(&x, &mut r);
        for (ri, bi) in r.iter_mut().zip(rhs) {
            *ri = bi - *ri;
        }
        for (xi, di) in x.iter_mut().zip(chol.solve(&r)) {
            *xi += di;
        }
        residual = relative_residual(matrix, &x, rhs);
    }
    if !residual.is_finite() {
        return Err(Error::NotSpd);
    }
    Ok(SolveReport {
        coeffs: x,
        method: Method::Direct,
        iterations: None,
        residual,
        converged: residual <= DIRECT_TOLERANCE,
    })
}

/// Full GMRES from the zero vector, no preconditioner, stopping on the
/// relative residual.
pub fn solve_gmres(
    op: &dyn LinearOperator,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol} must be positive")));
    }
    let n = op.dim();
    if rhs.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: rhs.len(),
        });
    }
    let beta = norm(rhs);
    if beta == 0.0 {
        return Ok(SolveReport {
            coeffs: vec![0.0; n],
            method: Method::Gmres,
            iterations: Some(0),
            residual: 0.0,
            converged: true,
        });
    }
    let mut basis: Vec<Vec<f64>> = vec![rhs.iter().map(|v| v / beta).collect()];
    // columns of the Hessenberg matrix after rotation
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = 1.0;
    while iterations < max_iter.min(n) {
        let k = iterations;
        op.apply(&basis[k], &mut w);
        let mut col = vec![0.0; k + 2];
        for (i, v) in basis.iter().enumerate() {
            let c = dot(&w, v);
            col[i] = c;
            for (wj, vj) in w.iter_mut().zip(v) {
                *wj -= c * vj;
            }
        }
        let hn = norm(&w);
        col[k + 1] = hn;
        for i in 0..k {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        let r = col[k].hypot(col[k + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (col[k] / r, col[k + 1] / r)
        };
        cs.push(c);
        sn.push(s);
        col[k] = r;
        col[k + 1] = 0.0;
        g.push(-s * g[k]);
        g[k] *= c;
        h.push(col);
        iterations += 1;
        residual = g[k + 1].abs() / beta;
        if residual <= tol || hn == 0.0 {
            break;
        }
        basis.push(w.iter().map(|v| v / hn).collect());
    }
    // back substitution for the least-squares coefficients
    let m = iterations;
    let mut y = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = g[i];
        for j in i + 1..m {
            s -= h[j][i] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut x = vec![0.0; n];
    for (yi, v) in y.iter().zip(&basis) {
        for (xj, vj) in x.iter_mut().zip(v) {
            *xj += yi * vj;
        }
    }
    let true_residual = relative_residual(op, &x, rhs);
    Ok(SolveReport {
        coeffs: x,
        method: Method::Gmres,
        iterations: Some(iterations),
        residual: true_residual,
        converged: residual <= tol,
    })
}

/// Conjugate gradients with diagonal scaling.
pub fn solve_cg(
    op: &dyn LinearOperator,
    rhs: &[f64],
    diagonal: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let n = op.dim();
    if rhs.len() != n || diagonal.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: rhs.len().min(diagonal.len()),
        });
    }
    let beta = norm(rhs);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let inv: Vec<f64> = diagonal
        .iter()
        .map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    let mut residual = if beta == 0.0 { 0.0 } else { 1.0 };
    while residual > tol && iterations < max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        residual = norm(&r) / beta;
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let b = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + b * p[i];
        }
        if iterations % 100 == 0 {
            log::debug!("cg iteration {iterations}: residual {residual:.3e}");
        }
    }
    Ok(SolveReport {
        coeffs: x,
        method: Method::Cg,
        iterations: Some(iterations),
        residual,
        converged: residual <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    pub kappa: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// False when an iterative estimate stopped before converging.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionMode {
    Dense,
    Iterative,
}

pub const DENSE_LIMIT: usize = 6000;

/// Extreme singular values of a symmetric positive definite matrix, which
/// are its extreme eigenvalues.
pub fn condition_number(matrix: &CsrMatrix, mode: ConditionMode) -> Result<Conditioning> {
    match mode {
        ConditionMode::Dense => condition_dense(matrix, DENSE_LIMIT),
        ConditionMode::Iterative => condition_iterative(matrix, 1e-6, 10_000),
    }
}

pub fn condition_dense(matrix: &CsrMatrix, limit: usize) -> Result<Conditioning> {
    let n = matrix.nrows;
    if n > limit {
        return Err(Error::TooLargeForDense { n, limit });
    }
    let eig = matrix
        .to_dense()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let (lo, hi) = (eig[0], eig[n - 1]);
    if !(lo > 0.0) {
        return Err(Error::NotSpd);
    }
    Ok(Conditioning {
        kappa: hi / lo,
        sigma_min: lo,
        sigma_max: hi,
        converged: true,
    })
}

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization.
fn lanczos_max(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    n: usize,
    tol: f64,
    max_steps: usize,
) -> Result<(f64, bool)> {
    // deterministic start vector with all components active
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 7919) % 104729) as f64 / 104729.0)
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut basis = vec![v];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; n];
    let mut last = 0.0;
    for k in 0..max_steps.min(n) {
        apply(&basis[k], &mut w);
        let a = dot(&w, &basis[k]);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        let ritz = tridiagonal_max(&alpha, &beta)?;
        if (k > 2 && (ritz - last).abs() <= tol * ritz.abs()) || b <= 1e-14 * ritz.abs() {
            return Ok((ritz, true));
        }
        last = ritz;
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Ok((last, n <= max_steps))
}

fn tridiagonal_max(alpha: &[f64], beta: &[f64]) -> Result<f64> {
    let k = alpha.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let e = t
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(e[k - 1])
}

/// Lanczos for the largest eigenvalue and shift-invert Lanczos, through the
/// sparse Cholesky factor, for the smallest.
pub fn condition_iterative(matrix: &CsrMatrix, tol: f64, max_steps: usize) -> Result<Conditioning> {
    let n = matrix.nrows;
    let (hi, ok_hi) = lanczos_max(&mut |x, y| matrix.matvec(x, y), n, tol, max_steps)?;
    let chol = Cholesky::new(matrix)?;
    let (inv, ok_lo) = lanczos_max(
        &mut |x, y| y.copy_from_slice(&chol.solve(x)),
        n,
        tol,
        max_steps,
    )?;
    let lo = 1.0 / inv;
    Ok(Conditioning {
        kappa: hi / lo,
        sigma_min: lo,
        sigma_max: hi,
        converged: ok_hi && ok_lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> CsrMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut s: f64 = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum();
                if i == j {
                    s += 1.0;
                }
                t.push((i, j, s));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    fn diag(values: &[f64]) -> CsrMatrix {
        let t: Vec<_> = values.iter().enumerate().map(|(i, v)| (i, i, *v)).collect();
        CsrMatrix::from_triplets(values.len(), values.len(), &t)
    }

    #[test]
    fn one_by_one() {
        let r = solve_direct(&diag(&[2.0]), &[4.0]).unwrap();
        assert!((r.coeffs[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_spd_direct() {
        let a = random_spd(50, 7);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let r = solve_direct(&a, &b).unwrap();
        assert!(r.converged && r.residual <= 1e-10);
    }

    #[test]
    fn indefinite_is_rejected() {
        assert!(matches!(
            solve_direct(&diag(&[1.0, -1.0]), &[1.0, 1.0]),
            Err(Error::NotSpd)
        ));
    }

    #[test]
    fn gmres_identity_and_spd() {
        let r = solve_gmres(
            &CsrMatrix::identity(5),
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            1e-8,
            100,
        )
        .unwrap();
        assert_eq!(r.iterations, Some(1));
        assert!(r.converged);
        let a = random_spd(40, 3);
        let b: Vec<f64> = (0..40).map(|i| 1.0 + i as f64).collect();
        let r = solve_gmres(&a, &b, 1e-10, 100).unwrap();
        assert!(r.converged && r.residual < 1e-9, "{}", r.residual);
        let d = solve_direct(&a, &b).unwrap();
        let err = r
            .coeffs
            .iter()
            .zip(&d.coeffs)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
        let capped = solve_gmres(&a, &b, 1e-14, 3).unwrap();
        assert!(!capped.converged && capped.iterations == Some(3));
    }

    #[test]
    fn cg_matches_direct() {
        let a = random_spd(30, 11);
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).cos()).collect();
        let r = solve_cg(&a, &b, &a.diagonal(), 1e-12, 1000).unwrap();
        assert!(r.converged);
        let d = solve_direct(&a, &b).unwrap();
        for (x, y) in r.coeffs.iter().zip(&d.coeffs) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn condition_numbers() {
        let c = condition_number(&CsrMatrix::identity(4), ConditionMode::Dense).unwrap();
        assert!((c.kappa - 1.0).abs() < 1e-14);
        let c = condition_number(&diag(&[1.0, 10.0]), ConditionMode::Dense).unwrap();
        assert!((c.kappa - 10.0).abs() < 1e-12);
        let a = random_spd(120, 5);
        let d = condition_number(&a, ConditionMode::Dense).unwrap();
        let i = condition_number(&a, ConditionMode::Iterative).unwrap();
        assert!(i.converged);
        assert!(
            (d.kappa - i.kappa).abs() < 1e-3 * d.kappa,
            "{} {}",
            d.kappa,
            i.kappa
        );
        assert!(matches!(
            condition_dense(&a, 100),
            Err(Error::TooLargeForDense { .. })
        ));
    }
}
