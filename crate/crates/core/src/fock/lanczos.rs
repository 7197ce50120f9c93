use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Hermitian operator applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    /// Krylov basis size per cycle.
    pub krylov: usize,
    /// Ritz vectors kept across a restart.
    pub keep: usize,
    pub max_restarts: usize,
    /// Residual tolerance relative to the largest Ritz value magnitude.
    pub rel_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { krylov: 48, keep: 16, max_restarts: 200, rel_tol: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    /// `‖A v − λ v‖`.
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.par_iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.par_iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.par_iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Lowest eigenpair by thick-restart Lanczos with full reorthogonalization.
///
/// The projected matrix `H = V†AV` is accumulated from the Gram–Schmidt
/// coefficients; at a restart the `keep` lowest Ritz vectors and the last
/// residual direction are retained. Small operators are diagonalized densely.
pub fn lowest_eigenpair<A: LinearOperator + ?Sized>(
    op: &A,
    start: &[Complex64],
    opts: LanczosOptions,
) -> Result<Eigenpair> {
    let n = op.dim();
    if start.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: start.len() });
    }
    let m = opts.krylov.max(4);
    if n <= m {
        return dense_lowest(op);
    }
    let keep = opts.keep.clamp(1, m - 2);
    let zero = Complex64::new(0.0, 0.0);

    let nv = norm(start);
    if !(nv > 0.0) {
        return Err(Error::InvalidParameter("Lanczos start vector is zero".into()));
    }
    let mut basis: Vec<Vec<Complex64>> = vec![start.iter().map(|z| z / nv).collect()];
    let mut h = DMatrix::<Complex64>::zeros(m, m);
    let mut matvecs = 0;
    let mut last_residual = f64::INFINITY;
    let mut w = vec![zero; n];

    for _cycle in 0..opts.max_restarts {
        let next: Option<(Vec<Complex64>, f64)>;
        let mut j = basis.len() - 1;
        loop {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let mut coeff = vec![zero; basis.len()];
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    axpy(-c, b, &mut w);
                    coeff[i] += c;
                }
            }
            for (i, c) in coeff.iter().enumerate() {
                h[(i, j)] = if i == j { Complex64::new(c.re, 0.0) } else { *c };
                h[(j, i)] = h[(i, j)].conj();
            }
            let beta = norm(&w);
            if j + 1 == m || beta <= 1e-14 * h[(j, j)].norm().max(1e-300) {
                next = if beta > 0.0 { Some((w.iter().map(|z| z / beta).collect(), beta)) } else { None };
                break;
            }
            basis.push(w.iter().map(|z| z / beta).collect());
            j += 1;
            h[(j, j - 1)] = Complex64::new(beta, 0.0);
            h[(j - 1, j)] = Complex64::new(beta, 0.0);
        }
        let k = basis.len();
        let proj = h.view((0, 0), (k, k)).clone_owned();
        let eig = SymmetricEigen::new(proj);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let scale = eig.eigenvalues.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
        let beta = next.as_ref().map_or(0.0, |x| x.1);
        let ritz = |col: usize| -> Vec<Complex64> {
            let y = eig.eigenvectors.column(col);
            let mut x = vec![zero; n];
            for (i, b) in basis.iter().enumerate() {
                axpy(y[i], b, &mut x);
            }
            x
        };
        let lowest = order[0];
        let estimate = beta * eig.eigenvectors[(k - 1, lowest)].norm();
        last_residual = estimate;
        if estimate <= opts.rel_tol * scale || next.is_none() {
            let mut x = ritz(lowest);
            let nx = norm(&x);
            x.iter_mut().for_each(|z| *z /= nx);
            op.apply(&x, &mut w);
            matvecs += 1;
            let value = dot(&x, &w).re;
            axpy(Complex64::new(-value, 0.0), &x, &mut w);
            let residual = norm(&w);
            last_residual = residual;
            if residual <= 10.0 * opts.rel_tol * scale || next.is_none() {
                return Ok(Eigenpair { value, vector: x, residual, matvecs });
            }
        }
        let Some((v_next, beta)) = next else { break };
        let kept: Vec<usize> = order.iter().copied().take(keep).collect();
        let mut fresh: Vec<Vec<Complex64>> = kept.iter().map(|&c| ritz(c)).collect();
        h.fill(zero);
        for (i, &c) in kept.iter().enumerate() {
            h[(i, i)] = Complex64::new(eig.eigenvalues[c], 0.0);
            let s = eig.eigenvectors[(k - 1, c)].conj() * beta;
            h[(keep, i)] = s;
            h[(i, keep)] = s.conj();
        }
        fresh.push(v_next);
        basis = fresh;
    }
    Err(Error::NoConvergence { iterations: matvecs, residual: last_residual })
}

fn dense_lowest<A: LinearOperator + ?Sized>(op: &A) -> Result<Eigenpair> {
    let n = op.dim();
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = Complex64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for r in 0..n {
            mat[(r, c)] = col[r];
        }
        e[c] = Complex64::new(0.0, 0.0);
    }
    let herm = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let (imin, value) =
        eig.eigenvalues.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty operator");
    let vector: Vec<Complex64> = eig.eigenvectors.column(imin).iter().copied().collect();
    op.apply(&vector, &mut col);
    let residual = col.iter().zip(&vector).map(|(a, v)| (a - v * value).norm_sqr()).sum::<f64>().sqrt();
    Ok(Eigenpair { value, vector, residual, matvecs: n + 1 })
}
