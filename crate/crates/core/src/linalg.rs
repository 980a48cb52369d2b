//! Dense complex linear algebra shared by the operator and cohomology layers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Tolerance policy for operator identities and numerical ranks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Max-absolute-entry tolerance for operator identities, per unit dimension.
    pub operator: f64,
    /// Relative singular-value cutoff for ranks.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { operator: 1e-10, rank: 1e-9 }
    }
}

impl Tolerances {
    /// Operator tolerance scaled by matrix dimension.
    pub fn operator_for(&self, dim: usize) -> f64 {
        self.operator * dim.max(1) as f64
    }
}

/// Max-absolute-entry norm; zero for empty matrices.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Threshold below which a singular value counts as zero:
/// `tol * max(largest singular value, 1)`.
pub fn rank_threshold(sv: &[f64], tol: f64) -> f64 {
    tol * sv.first().copied().unwrap_or(0.0).max(1.0)
}

pub fn rank(a: &CMatrix, tol: f64) -> usize {
    let sv = singular_values(a);
    let thr = rank_threshold(&sv, tol);
    sv.iter().filter(|&&s| s > thr).count()
}

/// Orthonormal basis (as columns) of the kernel of `a`.
pub fn null_space(a: &CMatrix, tol: f64) -> CMatrix {
    let n = a.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return CMatrix::identity(n, n);
    }
    // pad to at least n rows so the SVD returns a full right basis
    let padded = if a.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let thr = tol * largest.max(1.0);
    let cols: Vec<CVector> = (0..v_t.nrows())
        .filter(|&k| sv[k] <= thr)
        .map(|k| v_t.row(k).adjoint().into_owned())
        .collect();
    if cols.is_empty() {
        CMatrix::zeros(n, 0)
    } else {
        CMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space.
pub fn column_space(a: &CMatrix, tol: f64) -> CMatrix {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let thr = tol * largest.max(1.0);
    let keep: Vec<CVector> = (0..sv.len())
        .filter(|&k| sv[k] > thr)
        .map(|k| u.column(k).into_owned())
        .collect();
    if keep.is_empty() {
        CMatrix::zeros(rows, 0)
    } else {
        CMatrix::from_columns(&keep)
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `A B - B A`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn is_hermitian_wrt(a: &CMatrix, inner: &CMatrix) -> f64 {
    // <x|A y> = <A x|y>  <=>  H A = A^dagger H
    max_abs_diff(&(inner * a), &(a.adjoint() * inner))
}

/// Eigenvalues of a Hermitian matrix in ascending order (only the lower
/// triangle is read).
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_hermitian_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(f64::INFINITY)
}
