//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Orthonormal basis of the column space of `a`, keeping singular directions
/// above `Real::rank_tolerance() * sigma_max`. Returns the basis and the rank.
pub fn column_basis<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, usize) {
    let rows = a.nrows();
    if a.ncols() == 0 || rows == 0 {
        return (CMatrix::zeros(rows, 0), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma
        .iter()
        .copied()
        .fold(T::zero(), |m, s| if s > m { s } else { m });
    if smax <= T::zero() {
        return (CMatrix::zeros(rows, 0), 0);
    }
    let tol = T::rank_tolerance() * smax;
    let mut keep: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > tol).collect();
    keep.sort_by(|&i, &j| {
        sigma[j]
            .partial_cmp(&sigma[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let cols: Vec<_> = keep.iter().map(|&i| u.column(i).into_owned()).collect();
    let rank = cols.len();
    (CMatrix::from_columns(&cols), rank)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<_> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, CMatrix::from_columns(&cols))
}

/// Orthonormal basis of the null space of `m` (r×c): the orthogonal
/// complement of its numerical row space.
pub fn null_space<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let c = m.ncols();
    if c == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (rows, rank) = column_basis(&m.adjoint());
    if rank == c {
        return CMatrix::zeros(c, 0);
    }
    let projector = CMatrix::identity(c, c) - &rows * rows.adjoint();
    // Eigenvalues of an orthogonal projector are 0 or 1.
    let (values, vectors) = hermitian_eigen(&projector);
    let half = T::lit(0.5);
    let cols: Vec<_> = (0..c)
        .filter(|&i| values[i] > half)
        .map(|i| vectors.column(i).into_owned())
        .collect();
    CMatrix::from_columns(&cols)
}

/// Solves `a x = b` for Hermitian positive-definite `a`.
pub fn solve_hpd<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    if a.nrows() == 0 {
        return Ok(CMatrix::zeros(0, b.ncols()));
    }
    match Cholesky::new(a.clone()) {
        Some(ch) => Ok(ch.solve(b)),
        None => a
            .clone()
            .lu()
            .solve(b)
            .ok_or_else(|| Error::Domain("singular system".into())),
    }
}

/// Sines of the principal angles between the column spaces of two matrices
/// with orthonormal columns, largest first.
pub fn principal_angle_sines<T: Real>(u: &CMatrix<T>, v: &CMatrix<T>) -> Vec<T> {
    let residual = v - u * (u.adjoint() * v);
    if residual.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = residual
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Ratio of extreme eigenvalues of a Hermitian positive-definite matrix.
pub fn condition_number<T: Real>(a: &CMatrix<T>) -> T {
    let (values, _) = hermitian_eigen(a);
    match (values.first(), values.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        (Some(_), Some(_)) => T::max_value().unwrap_or_else(|| T::lit(f64::MAX)),
        _ => T::one(),
    }
}

/// Frobenius norm of a complex matrix.
pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Largest element-wise deviation from Hermitian symmetry.
pub fn hermitian_defect<T: Real>(a: &CMatrix<T>) -> T {
    let mut worst = T::zero();
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm_sqr().sqrt();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}
