//! Sparse symmetric linear algebra: CSR storage, preconditioned conjugate
//! gradients, and a deflated Lanczos solver for the lowest eigenvalue.
//!
//! The matrices that arise here (lattice Hessians, P1 stiffness operators)
//! are symmetric with a known small kernel (rigid translations), so every
//! routine takes an explicit deflation space instead of guessing.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Symmetric sparse matrix in compressed-sparse-row form.
///
/// Both triangles are stored; assembly sums duplicate `(i, j)` entries.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<u32>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from `(row, col, value)` triplets, summing
    /// duplicates. Entries must satisfy `row, col < n`.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut val: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for &(i, j, v) in triplets.iter() {
            debug_assert!((i as usize) < n && (j as usize) < n);
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i as usize + 1] += 1;
                last = Some((i, j));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k] as usize];
            }
            y[i] = acc;
        }
    }

    /// Main diagonal (zero where no entry is stored).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[k] as usize == i {
                    d[i] += self.val[k];
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col[k] as usize)] += self.val[k];
            }
        }
        m
    }

    /// Maximum absolute asymmetry `|A - A^T|_max`, for assembly checks.
    pub fn asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((d[(i, j)] - d[(j, i)]).abs());
            }
        }
        worst
    }
}

/// A symmetric linear operator on `R^n`.
pub trait LinOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinOp for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }
}

/// The identity operator (no preconditioning).
pub struct Identity(pub usize);

impl LinOp for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Diagonal (Jacobi) preconditioner: `y = x / d` entrywise.
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    /// Inverts the positive part of a diagonal; non-positive entries are
    /// mapped to 1 so the operator stays positive definite.
    pub fn new(diag: &[f64]) -> Self {
        let inv_diag = diag
            .iter()
            .map(|&d| if d > 1e-300 { 1.0 / d } else { 1.0 })
            .collect();
        Jacobi { inv_diag }
    }
}

impl LinOp for Jacobi {
    fn dim(&self) -> usize {
        self.inv_diag.len()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..x.len() {
            y[i] = x[i] * self.inv_diag[i];
        }
    }
}

/// Exact dense Cholesky solve, used as a strong preconditioner for
/// moderate problem sizes.
pub struct DenseCholesky {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    n: usize,
}

impl DenseCholesky {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        let chol = nalgebra::Cholesky::new(m)
            .ok_or_else(|| Error::LinearSolve("matrix is not positive definite".into()))?;
        Ok(DenseCholesky { chol, n })
    }
}

impl LinOp for DenseCholesky {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = DVector::from_column_slice(x);
        let s = self.chol.solve(&v);
        y.copy_from_slice(s.as_slice());
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}

/// Orthonormal deflation space; `project` removes its span from a vector.
#[derive(Debug, Clone, Default)]
pub struct Deflation {
    basis: Vec<Vec<f64>>,
}

impl Deflation {
    pub fn empty() -> Self {
        Deflation { basis: Vec::new() }
    }

    /// Gram–Schmidt orthonormalization of the given spanning vectors;
    /// near-dependent vectors are dropped.
    pub fn new(span: &[Vec<f64>]) -> Self {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in span {
            let mut w = v.clone();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(-c, q, &mut w);
                }
            }
            let n = norm(&w);
            if n > 1e-10 * norm(v).max(1.0) {
                w.iter_mut().for_each(|x| *x /= n);
                basis.push(w);
            }
        }
        Deflation { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn project(&self, x: &mut [f64]) {
        for q in &self.basis {
            let c = dot(q, x);
            axpy(-c, q, x);
        }
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned conjugate gradients for `A x = b` with symmetric positive
/// (semi-)definite `A`; `x` carries the initial guess in and the solution
/// out. Converges when `|r| <= tol * max(|b|, 1e-300)`.
///
/// If a `deflation` space is given, right-hand side and iterates are kept
/// orthogonal to it, which solves the singular-but-consistent systems that
/// periodic stiffness operators produce.
pub fn conjugate_gradient(
    a: &dyn LinOp,
    m: &dyn LinOp,
    b: &[f64],
    x: &mut [f64],
    deflation: &Deflation,
    tol: f64,
    max_iter: usize,
) -> Result<CgStats> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];

    deflation.project(x);
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    deflation.project(&mut r);
    let b_norm = norm(b).max(1e-300);

    m.apply(&r, &mut z);
    deflation.project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = norm(&r);
    if res <= tol * b_norm {
        return Ok(CgStats { iterations: 0, residual: res });
    }

    for it in 1..=max_iter {
        a.apply(&p, &mut q);
        deflation.project(&mut q);
        let pq = dot(&p, &q);
        if pq <= 0.0 {
            return Err(Error::LinearSolve(format!(
                "conjugate gradients hit a non-positive curvature direction (p·Ap = {pq:.3e})"
            )));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        res = norm(&r);
        if res <= tol * b_norm {
            return Ok(CgStats { iterations: it, residual: res });
        }
        m.apply(&r, &mut z);
        deflation.project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve(format!(
        "conjugate gradients did not reach tolerance {tol:.1e} in {max_iter} iterations \
         (residual {:.3e})",
        res / b_norm
    )))
}

/// Lowest eigenpair of a symmetric operator restricted to the orthogonal
/// complement of `deflation`.
///
/// Plain Lanczos with full reorthogonalization; the extreme Ritz value at
/// the lower end converges to the smallest eigenvalue. Residual target:
/// `|A v - lambda v| <= tol * (1 + |lambda|)`.
pub fn lowest_eigenpair_lanczos(
    a: &dyn LinOp,
    deflation: &Deflation,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    use rand::{Rng, SeedableRng};
    let n = a.dim();
    if n == 0 || n <= deflation.dim() {
        return Err(Error::Eigensolve("operator has no deflated directions left".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflation.project(&mut v);
    let nv = norm(&v);
    if nv < 1e-14 {
        return Err(Error::Eigensolve("start vector vanished under deflation".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];

    let kmax = max_iter.min(n - deflation.dim());
    for k in 0..kmax {
        a.apply(&basis[k], &mut w);
        deflation.project(&mut w);
        let alpha = dot(&basis[k], &w);
        alphas.push(alpha);
        // Full reorthogonalization, twice for stability.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let beta = norm(&w);

        let check_now = beta < 1e-13 || (k + 1) % 10 == 0 || k + 1 == kmax;
        if check_now {
            let (theta, y) = tridiag_lowest(&alphas, &betas);
            let resid = if beta < 1e-13 { 0.0 } else { beta * y[k].abs() };
            if resid <= tol * (1.0 + theta.abs()) {
                let mut vec = vec![0.0; n];
                for (j, q) in basis.iter().enumerate() {
                    axpy(y[j], q, &mut vec);
                }
                let nv = norm(&vec);
                vec.iter_mut().for_each(|x| *x /= nv);
                return Ok((theta, vec));
            }
            if beta < 1e-13 {
                return Err(Error::Eigensolve(
                    "Krylov space became invariant before reaching the residual target".into(),
                ));
            }
        }
        betas.push(beta);
        let next: Vec<f64> = w.iter().map(|x| x / beta).collect();
        basis.push(next);
    }
    Err(Error::Eigensolve(format!(
        "Lanczos did not converge within {kmax} iterations"
    )))
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas` (returns the eigenvector too).
fn tridiag_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).iter().copied().collect())
}

/// Lowest eigenpair by dense reduction onto the orthogonal complement of the
/// deflation space. Exact and robust; O(n^3), so keep `n` moderate.
pub fn lowest_eigenpair_dense(
    a: &DMatrix<f64>,
    deflation: &Deflation,
) -> Result<(f64, Vec<f64>)> {
    let n = a.nrows();
    let k = deflation.dim();
    if n == 0 || n <= k {
        return Err(Error::Eigensolve("operator has no deflated directions left".into()));
    }
    // Orthonormalize the coordinate basis against the deflation space to
    // span its complement.
    let mut comp: Vec<Vec<f64>> = Vec::with_capacity(n - k);
    let mut all: Vec<Vec<f64>> = deflation.basis().to_vec();
    for i in 0..n {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        for _ in 0..2 {
            for q in &all {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }
        let nv = norm(&w);
        if nv > 1e-8 {
            w.iter_mut().for_each(|x| *x /= nv);
            all.push(w.clone());
            comp.push(w);
            if comp.len() == n - k {
                break;
            }
        }
    }
    if comp.len() != n - k {
        return Err(Error::Eigensolve("failed to span the deflation complement".into()));
    }
    let m = comp.len();
    let mut qmat = DMatrix::zeros(n, m);
    for (j, w) in comp.iter().enumerate() {
        for i in 0..n {
            qmat[(i, j)] = w[i];
        }
    }
    let reduced = qmat.transpose() * a * &qmat;
    let sym = (reduced.clone() + reduced.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut best = 0;
    for i in 1..m {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let y = eig.eigenvectors.column(best);
    let vfull = &qmat * y;
    Ok((eig.eigenvalues[best], vfull.iter().copied().collect()))
}
