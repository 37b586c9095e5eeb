//! Dense complex matrix helpers on top of `nalgebra`. Spectral routines go
//! through `faer`, whose eigen and SVD solvers stay stable on the nearly
//! block-diagonal matrices produced here.

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diagonal(entries: &[f64]) -> CMatrix {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(entries[i], 0.0) } else { ZERO })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `a^⊗t`.
pub fn kron_power(a: &CMatrix, t: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..t {
        out = out.kronecker(a);
    }
    out
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.trace()
}

/// `Tr(a·b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn to_faer(a: &CMatrix) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn to_faer_real(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Singular values, descending.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv = to_faer(a).singular_values().expect("SVD converges");
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Singular values of a real matrix, descending.
pub fn singular_values_real(a: &DMatrix<f64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv = to_faer_real(a).singular_values().expect("SVD converges");
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Thin SVD of a real matrix: left singular vectors as columns and the
/// singular values, both ordered by decreasing singular value.
pub fn left_singular_vectors_real(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let svd = to_faer_real(a).thin_svd().expect("SVD converges");
    let s = svd.S().column_vector();
    let u = svd.U();
    let mut order: Vec<usize> = (0..s.nrows()).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
    let vectors = DMatrix::from_fn(u.nrows(), order.len(), |r, k| u[(r, order[k])]);
    (vectors, order.iter().map(|&k| s[k]).collect())
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    let scale = max_abs(a);
    if a.is_empty() || scale == 0.0 {
        return 0.0;
    }
    singular_values(&a.unscale(scale)).first().copied().unwrap_or(0.0) * scale
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// Eigenvalues of the Hermitian part of `a`, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let h = (a + a.adjoint()).scale(0.5);
    let mut ev = to_faer(&h).self_adjoint_eigenvalues(Side::Lower).expect("eigensolver converges");
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(0.0)
}

/// Inverse principal square root of a real symmetric positive-definite matrix,
/// together with its smallest eigenvalue.
pub fn inverse_sqrt_spd(g: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let eig = to_faer_real(g).self_adjoint_eigen(Side::Lower).expect("eigensolver converges");
    let values = eig.S().column_vector();
    let u = eig.U();
    let n = g.nrows();
    let min = (0..n).map(|k| values[k]).fold(f64::INFINITY, f64::min);
    let v = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    let scaled = DMatrix::from_fn(n, n, |i, j| {
        if i == j { 1.0 / values[i].max(f64::MIN_POSITIVE).sqrt() } else { 0.0 }
    });
    (&v * scaled * v.transpose(), min)
}

/// Matrix with every entry finite.
pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_power_dimensions_and_values() {
        let a = diagonal(&[1.0, 0.5]);
        let p = kron_power(&a, 3);
        assert_eq!(p.nrows(), 8);
        // |011⟩ → 0.25
        assert!((p[(3, 3)].re - 0.25).abs() < 1e-15);
        assert_eq!(kron_power(&a, 0).nrows(), 1);
    }

    #[test]
    fn op_norm_of_diagonal() {
        let a = diagonal(&[0.3, -2.0, 1.0]);
        assert!((op_norm(&a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_squares_to_inverse() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let (s, min) = inverse_sqrt_spd(&g);
        assert!(min > 0.0);
        let back = &s * &g * &s;
        assert!((back - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn trace_product_matches_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 0.5));
        assert!((trace_product(&a, &b) - (&a * &b).trace()).norm() < 1e-12);
    }
}
