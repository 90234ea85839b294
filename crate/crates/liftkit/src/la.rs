//! Dense linear-algebra helpers over LAPACK.
//!
//! Everything here works on `Array2<C64>`; real matrices go through the
//! complex path since all sizes involved are small.

use ndarray::{s, Array1, Array2, Axis, ShapeBuilder};
use ndarray_linalg::{Eig, Eigh, Inverse, SVD, UPLO};
use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub type Mat = Array2<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> Mat {
    Array2::from_diag_elem(n, ONE)
}

pub fn zeros(n: usize, m: usize) -> Mat {
    Array2::zeros((n, m))
}

pub fn adjoint(a: &Mat) -> Mat {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &Mat) -> C64 {
    a.diag().sum()
}

pub fn fro(a: &Mat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn hermitize(a: &Mat) -> Mat {
    (a + &adjoint(a)).mapv(|z| z * 0.5)
}

pub fn is_finite(a: &Mat) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a.dot(b) - b.dot(a)
}

pub fn from_real(a: &Array2<f64>) -> Mat {
    a.mapv(c)
}

pub fn diag(v: &[f64]) -> Mat {
    let n = v.len();
    let mut m = zeros(n, n);
    for (i, x) in v.iter().enumerate() {
        m[[i, i]] = c(*x);
    }
    m
}

/// Column-stacking vectorization: `vec(X)[i + j d] = X[i, j]`.
pub fn vec(x: &Mat) -> Array1<C64> {
    let (n, m) = x.dim();
    let mut v = Array1::zeros(n * m);
    for j in 0..m {
        for i in 0..n {
            v[i + j * n] = x[[i, j]];
        }
    }
    v
}

pub fn unvec(v: &Array1<C64>, d: usize) -> Mat {
    Array2::from_shape_fn((d, d), |(i, j)| v[i + j * d])
}

/// Column-major copy; the LAPACK wrappers mishandle row-major complex
/// Hermitian input (they decompose the conjugate).
fn fortran(a: &Mat) -> Mat {
    let mut f = Array2::zeros(a.dim().f());
    f.assign(a);
    f
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(a: &Mat) -> Result<(Array1<f64>, Mat)> {
    fortran(&hermitize(a))
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("eigh: {e}")))
}

pub fn eigvalsh(a: &Mat) -> Result<Array1<f64>> {
    Ok(eigh(a)?.0)
}

pub fn min_eigh(a: &Mat) -> Result<f64> {
    let ev = eigvalsh(a)?;
    Ok(ev.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// General (right) eigendecomposition.
pub fn eig(a: &Mat) -> Result<(Array1<C64>, Mat)> {
    fortran(a).eig().map_err(|e| Error::Linalg(format!("eig: {e}")))
}

pub fn eigvals(a: &Mat) -> Result<Array1<C64>> {
    Ok(eig(a)?.0)
}

/// SVD (full factors): returns `(U, s, V)` with `A = U diag(s) V†`, `s` descending.
pub fn svd(a: &Mat) -> Result<(Mat, Array1<f64>, Mat)> {
    let (u, s, vt) = fortran(a).svd(true, true).map_err(|e| Error::Linalg(format!("svd: {e}")))?;
    let u = u.ok_or_else(|| Error::Linalg("svd: missing U".into()))?;
    let vt = vt.ok_or_else(|| Error::Linalg("svd: missing V".into()))?;
    Ok((u, s, adjoint(&vt)))
}

pub fn singular_values(a: &Mat) -> Result<Array1<f64>> {
    let (_, s, _) = fortran(a).svd(false, false).map_err(|e| Error::Linalg(format!("svd: {e}")))?;
    Ok(s)
}

/// Spectral norm.
pub fn norm2(a: &Mat) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    Ok(singular_values(a)?.iter().cloned().fold(0.0, f64::max))
}

pub fn inv(a: &Mat) -> Result<Mat> {
    fortran(a).inv().map_err(|e| Error::Linalg(format!("inverse: {e}")))
}

/// f(A) for Hermitian A through its eigendecomposition.
pub fn herm_fn(a: &Mat, f: impl Fn(f64) -> f64) -> Result<Mat> {
    let (w, u) = eigh(a)?;
    Ok(herm_fn_from(&w, &u, f))
}

pub fn herm_fn_from(w: &Array1<f64>, u: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let mut scaled = u.clone();
    for (j, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
        let fj = f(w[j]);
        col.mapv_inplace(|z| z * fj);
    }
    scaled.dot(&adjoint(u))
}

/// Orthonormal basis (columns) of the range of `a`, using a relative rank
/// threshold on singular values.
pub fn range_basis(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let (u, s, _) = svd(a)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let r = s.iter().filter(|&&x| x > rel_tol * smax && x > 0.0).count();
    Ok(u.slice(s![.., ..r]).to_owned())
}

/// Orthonormal basis (columns) of the numerical null space of `a`.
pub fn null_basis(a: &Mat, rel_tol: f64) -> Result<Mat> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Ok(eye(n));
    }
    let (_, s, v) = svd(a)?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let r = s.iter().filter(|&&x| x > rel_tol * smax && x > 0.0).count();
    Ok(v.slice(s![.., r..]).to_owned())
}

/// Stack matrices vertically.
pub fn vstack(parts: &[&Mat]) -> Mat {
    let views: Vec<_> = parts.iter().map(|m| m.view()).collect();
    ndarray::concatenate(Axis(0), &views).expect("vstack: column mismatch")
}

/// Columns as matrix from a list of vectors.
pub fn columns(vs: &[Array1<C64>], n: usize) -> Mat {
    let mut m = zeros(n, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.column_mut(j).assign(v);
    }
    m
}

/// Spearman rank correlation.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let rx = ranks(x);
    let ry = ranks(y);
    pearson(&rx, &ry)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

/// Ordinary least squares fit `y ≈ a + b x`; returns `(a, b)`.
pub fn linfit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}
