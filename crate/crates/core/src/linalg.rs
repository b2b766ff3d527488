//! Dense complex matrix helpers shared by every module.
//!
//! Rank decisions use `tol * max(sigma_max, 1)`: relative to the largest
//! singular value, floored at unit scale so that pure round-off never counts
//! as rank.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rank_threshold(sigma_max: f64, tol: f64) -> f64 {
    tol * sigma_max.max(1.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn to_faer(m: &CMat) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        Complex64::new(z.re, z.im)
    })
}

/// Full singular value decomposition `m = u diag(s) v*` with `u`, `v`
/// square unitary and `s` (length `min(rows, cols)`) in decreasing order.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn svd(m: &CMat) -> Svd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Svd {
            u: identity(rows),
            s: Vec::new(),
            v: identity(cols),
        };
    }
    let dec = to_faer(m).svd().expect("SVD did not converge");
    let diag = dec.S().column_vector();
    let k = rows.min(cols);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        diag[b]
            .re
            .partial_cmp(&diag[a].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (u_raw, v_raw) = (from_faer(dec.U()), from_faer(dec.V()));
    let mut u = u_raw.clone();
    let mut v = v_raw.clone();
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &v_raw.column(src));
    }
    Svd {
        u,
        s: order.iter().map(|&j| diag[j].re).collect(),
        v,
    }
}

/// Right singular structure of an `m x n` matrix: all `n` singular values
/// (zero-padded when `m < n`) in decreasing order and a full `n x n` unitary
/// `v` whose columns are the matching right singular vectors.
pub struct RightSvd {
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn right_svd(m: &CMat) -> RightSvd {
    let cols = m.ncols();
    if cols == 0 {
        return RightSvd {
            s: Vec::new(),
            v: CMat::zeros(0, 0),
        };
    }
    let Svd { mut s, v, .. } = svd(m);
    s.resize(cols, 0.0);
    RightSvd { s, v }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_faer(m).singular_values().expect("SVD did not converge");
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Spectral norm; zero for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of the column space.
pub fn column_space(m: &CMat, tol: f64) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMat::zeros(rows, 0);
    }
    let dec = svd(m);
    let thr = rank_threshold(dec.s[0], tol);
    let rank = dec.s.iter().take_while(|&&x| x > thr).count();
    dec.u.columns(0, rank).into_owned()
}

/// Orthonormal basis of `{x : m x = 0}`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    let svd = right_svd(m);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let thr = rank_threshold(smax, tol);
    let idx: Vec<usize> = (0..cols).filter(|&j| svd.s[j] <= thr).collect();
    let vecs: Vec<CVec> = idx.iter().map(|&j| svd.v.column(j).into_owned()).collect();
    from_columns(cols, &vecs)
}

/// Smallest singular value over the column (domain) directions together with
/// its right singular vector. `None` when there are no columns.
pub fn smallest_singular(m: &CMat) -> Option<(f64, CVec)> {
    let cols = m.ncols();
    if cols == 0 {
        return None;
    }
    let svd = right_svd(m);
    let last = cols - 1;
    Some((svd.s[last], svd.v.column(last).into_owned()))
}

/// Moore-Penrose pseudo-inverse.
pub fn pinv(m: &CMat, tol: f64) -> CMat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return CMat::zeros(cols, rows);
    }
    let dec = svd(m);
    let thr = rank_threshold(dec.s[0], tol);
    let mut out = CMat::zeros(cols, rows);
    for (j, &sj) in dec.s.iter().enumerate().take_while(|(_, &x)| x > thr) {
        out += (dec.v.column(j) * dec.u.column(j).adjoint()) * Complex64::new(1.0 / sj, 0.0);
    }
    out
}

/// Inverse of a square matrix when its smallest singular value exceeds the
/// threshold; otherwise returns that singular value as the error.
pub fn checked_inverse(m: &CMat, tol: f64) -> Result<CMat, f64> {
    assert_eq!(
        m.nrows(),
        m.ncols(),
        "checked_inverse needs a square matrix"
    );
    if m.nrows() == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    let s = singular_values(m);
    let smin = *s.last().expect("nonempty");
    if smin <= rank_threshold(s[0], tol) {
        return Err(smin);
    }
    m.clone().try_inverse().ok_or(smin)
}

pub fn hermitian_part_deviation(m: &CMat) -> f64 {
    op_norm(&(m - m.adjoint()))
}

/// Real eigenvalues of a Hermitian matrix, sorted ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = to_faer(&sym)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("eigensolver did not converge");
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn hcat(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.nrows(), b.nrows(), "hcat row mismatch");
    let mut out = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out
}

pub fn vcat(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols(), "vcat column mismatch");
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    out
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

pub fn from_columns(rows: usize, cols: &[CVec]) -> CMat {
    let mut out = CMat::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        out.set_column(j, col);
    }
    out
}

pub fn scaled(m: &CMat, s: Complex64) -> CMat {
    m * s
}

/// Normalizes a vector and rotates its phase so that the first coordinate
/// of non-negligible magnitude is real and positive.
pub fn normalize_phase(v: &CVec) -> CVec {
    let n = v.norm();
    if n == 0.0 {
        return v.clone();
    }
    let mut out = v / Complex64::new(n, 0.0);
    if let Some(first) = out.iter().copied().find(|x| x.norm() > 1e-8) {
        let phase = first.conj() / first.norm();
        out *= phase;
    }
    out
}

pub fn diag(entries: &[Complex64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn basis_vector(n: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[k] = ONE;
    v
}
