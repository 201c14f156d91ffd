//! Finite windows of banded operators and the deterministic linear algebra
//! performed on them.
//!
//! A [`BandedWindow`] stores the rows `offset .. offset + n` of a (semi-)infinite
//! banded operator restricted to the same column range. Each window carries
//! exactness margins: the number of rows at the top and bottom edge whose
//! entries may differ from the corresponding entries of the infinite operator
//! because a computation needed data outside the window. Every operation
//! widens the margins by its reach, so checks can restrict themselves to rows
//! that are provably free of truncation effects.

mod factor;
mod io;
mod jacobi;
mod lu;
mod ops;
mod spectrum;

pub use factor::{cholesky_upper, similarity_forward};
pub use io::WindowDoc;
pub use jacobi::JacobiCoeffs;
pub use lu::{resolvent_entry, BandedLu};
pub use ops::{band_add, band_mul, interleave, poly_eval};
pub use spectrum::{cyclic_moments, eigenvalues, interior_eigenvalues, spectral_weights};

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entry type of a window: `f64` for Jacobi-type operators, `Complex64` for
/// CMV windows and resolvent work.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Send + Sync {
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.real(), self.imaginary())
    }
}

impl<T: ComplexField<RealField = f64> + Copy + Send + Sync> Scalar for T {}

/// Whether the window's top edge is the boundary of a half-line operator or
/// an artificial cut through a two-sided operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    HalfLine,
    WholeLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedWindow<T> {
    offset: i64,
    n: usize,
    w: usize,
    side: Side,
    /// Row-major `n × (2w+1)`; slot `d + w` of row `i` is `entry(i, i + d)`.
    data: Vec<T>,
    margin_top: usize,
    margin_bottom: usize,
}

impl<T: Scalar> BandedWindow<T> {
    pub fn zeros(offset: i64, n: usize, w: usize, side: Side) -> Self {
        let w = w.min(n.saturating_sub(1));
        Self {
            offset,
            n,
            w,
            side,
            data: vec![T::zero(); n * (2 * w + 1)],
            margin_top: 0,
            margin_bottom: 0,
        }
    }

    pub fn identity(offset: i64, n: usize, side: Side) -> Self {
        let mut out = Self::zeros(offset, n, 0, side);
        for i in 0..n {
            out.set(i, i, T::one());
        }
        out
    }

    pub fn from_diagonal(offset: i64, diag: &[T], side: Side) -> Self {
        let mut out = Self::zeros(offset, diag.len(), 0, side);
        for (i, &v) in diag.iter().enumerate() {
            out.set(i, i, v);
        }
        out
    }

    /// Window of `S^k` (ones on diagonal `k`), with `k` negative for powers of `S⁻¹`.
    pub fn shift_power(offset: i64, n: usize, k: i64, side: Side) -> Self {
        let mut out = Self::zeros(offset, n, k.unsigned_abs() as usize, side);
        for i in 0..n {
            let j = i as i64 + k;
            if j >= 0 && (j as usize) < n {
                out.set(i, j as usize, T::one());
            }
        }
        out
    }

    /// Builds a window from a dense matrix, keeping the diagonals `|i−j| ≤ w`.
    /// Entries outside that band must be exactly zero.
    pub fn from_dense(offset: i64, m: &DMatrix<T>, w: usize, side: Side) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape(format!(
                "dense matrix is {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut out = Self::zeros(offset, n, w, side);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if i.abs_diff(j) <= out.w {
                    out.set(i, j, v);
                } else if v != T::zero() {
                    return Err(Error::Shape(format!(
                        "entry ({i},{j}) lies outside bandwidth {w}"
                    )));
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in self.col_range(i) {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn bandwidth(&self) -> usize {
        self.w
    }
    pub fn side(&self) -> Side {
        self.side
    }
    pub fn margin_top(&self) -> usize {
        self.margin_top
    }
    pub fn margin_bottom(&self) -> usize {
        self.margin_bottom
    }

    /// Local row indices whose entries are guaranteed to agree with the
    /// infinite operator.
    pub fn exact_rows(&self) -> std::ops::Range<usize> {
        let lo = self.margin_top.min(self.n);
        let hi = self.n.saturating_sub(self.margin_bottom).max(lo);
        lo..hi
    }

    pub fn with_margins(mut self, top: usize, bottom: usize) -> Self {
        self.margin_top = top.min(self.n);
        self.margin_bottom = bottom.min(self.n);
        self
    }

    pub(crate) fn set_margins(&mut self, top: usize, bottom: usize) {
        self.margin_top = top.min(self.n);
        self.margin_bottom = bottom.min(self.n);
    }

    /// Column indices of the stored band in row `i`.
    #[inline]
    pub fn col_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.w)..(i + self.w + 1).min(self.n)
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.w + 1) + (j + self.w - i)
    }

    /// Entry `(i, j)` in local indices; zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if i >= self.n || j >= self.n || i.abs_diff(j) > self.w {
            T::zero()
        } else {
            self.data[self.slot(i, j)]
        }
    }

    /// Sets entry `(i, j)`; panics when it lies outside the stored band.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(
            i < self.n && j < self.n && i.abs_diff(j) <= self.w,
            "entry ({i},{j}) outside window n={} w={}",
            self.n,
            self.w
        );
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    /// Entry addressed by global indices.
    pub fn get_global(&self, i: i64, j: i64) -> T {
        let (li, lj) = (i - self.offset, j - self.offset);
        if li < 0 || lj < 0 {
            return T::zero();
        }
        self.get(li as usize, lj as usize)
    }

    pub fn contains_global(&self, i: i64) -> bool {
        i >= self.offset && i < self.offset + self.n as i64
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    /// Largest `|a(i,j) − conj a(j,i)|` over the window.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in self.col_range(i) {
                if j > i {
                    worst = worst.max((self.get(i, j) - self.get(j, i).conjugate()).modulus());
                }
            }
        }
        worst
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.asymmetry() == 0.0
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.offset, self.n, self.w, self.side);
        for i in 0..self.n {
            for j in self.col_range(i) {
                out.set(j, i, self.get(i, j).conjugate());
            }
        }
        out.margin_top = self.margin_top;
        out.margin_bottom = self.margin_bottom;
        out
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s·I`.
    pub fn shifted(&self, s: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let k = out.slot(i, i);
            out.data[k] += s;
        }
        out
    }

    /// Drops outer diagonals that are identically zero.
    pub fn trimmed(mut self) -> Self {
        let mut w = self.w;
        while w > 0 {
            let zero = (0..self.n).all(|i| {
                (i + w >= self.n || self.get(i, i + w) == T::zero())
                    && (i < w || self.get(i, i - w) == T::zero())
            });
            if !zero {
                break;
            }
            w -= 1;
        }
        if w != self.w {
            self = self.with_bandwidth(w);
        }
        self
    }

    /// Re-stores the window with bandwidth `w`, dropping diagonals beyond it.
    pub fn with_bandwidth(&self, w: usize) -> Self {
        let mut out = Self::zeros(self.offset, self.n, w, self.side);
        for i in 0..self.n {
            for j in out.col_range(i) {
                out.set(i, j, self.get(i, j));
            }
        }
        out.margin_top = self.margin_top;
        out.margin_bottom = self.margin_bottom;
        out
    }

    /// The sub-window on local rows and columns `start .. start + len`.
    /// Rows of the sub-window touching a cut edge inherit the edge's reach.
    pub fn sub_window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n {
            return Err(Error::Shape(format!(
                "sub-window {start}+{len} exceeds n={}",
                self.n
            )));
        }
        let side = if start == 0 { self.side } else { Side::WholeLine };
        let mut out = Self::zeros(self.offset + start as i64, len, self.w, side);
        for i in 0..len {
            for j in out.col_range(i) {
                out.set(i, j, self.get(start + i, start + j));
            }
        }
        let top = self.margin_top.saturating_sub(start);
        let bottom = self
            .margin_bottom
            .saturating_sub(self.n - (start + len));
        out.set_margins(top, bottom);
        Ok(out)
    }

    /// Leading `len × len` block, the truncation used by iterated transforms.
    pub fn leading(&self, len: usize) -> Result<Self> {
        self.sub_window(0, len)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> BandedWindow<U> {
        BandedWindow {
            offset: self.offset,
            n: self.n,
            w: self.w,
            side: self.side,
            data: self.data.iter().map(|&v| f(v)).collect(),
            margin_top: self.margin_top,
            margin_bottom: self.margin_bottom,
        }
    }

    /// Max-norm of `self − other` over the common global index range, restricted
    /// to rows `rows` (global indices).
    pub fn max_diff_on(&self, other: &Self, rows: std::ops::Range<i64>) -> f64 {
        let w = self.w.max(other.w) as i64;
        let mut worst = 0.0f64;
        for i in rows {
            for j in (i - w)..=(i + w) {
                let d = (self.get_global(i, j) - other.get_global(i, j)).modulus();
                worst = worst.max(d);
            }
        }
        worst
    }
}

impl BandedWindow<f64> {
    pub fn to_complex(&self) -> BandedWindow<Complex64> {
        self.map(|v| Complex64::new(v, 0.0))
    }

    /// Symmetric tridiagonal window from diagonal `q` and couplings `p`, where
    /// `p[k]` joins local rows `k` and `k+1`.
    pub fn tridiagonal(offset: i64, q: &[f64], p: &[f64], side: Side) -> Result<Self> {
        if q.is_empty() || p.len() + 1 != q.len() {
            return Err(Error::Shape(format!(
                "tridiagonal needs len(p) = len(q) - 1, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        let mut out = Self::zeros(offset, q.len(), 1, side);
        for (i, &v) in q.iter().enumerate() {
            out.set(i, i, v);
        }
        for (k, &v) in p.iter().enumerate() {
            out.set(k, k + 1, v);
            out.set(k + 1, k, v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_outside_band_is_zero() {
        let a = BandedWindow::<f64>::tridiagonal(0, &[1.0, 2.0, 3.0], &[0.5, 0.25], Side::HalfLine)
            .unwrap();
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.get(1, 0), 0.5);
        assert_eq!(a.get(5, 0), 0.0);
    }

    #[test]
    fn dense_round_trip() {
        let a = BandedWindow::<f64>::tridiagonal(3, &[1.0, -2.0, 0.5, 4.0], &[1.0, 2.0, 3.0], Side::WholeLine)
            .unwrap();
        let b = BandedWindow::from_dense(3, &a.to_dense(), 1, Side::WholeLine).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn from_dense_rejects_out_of_band() {
        let mut m = DMatrix::<f64>::zeros(3, 3);
        m[(0, 2)] = 1.0;
        assert!(BandedWindow::from_dense(0, &m, 1, Side::HalfLine).is_err());
    }

    #[test]
    fn trimming_removes_zero_diagonals() {
        let a = BandedWindow::<f64>::identity(0, 4, Side::HalfLine).with_bandwidth(3);
        assert_eq!(a.bandwidth(), 3);
        assert_eq!(a.trimmed().bandwidth(), 0);
    }

    #[test]
    fn sub_window_tracks_margins() {
        let a = BandedWindow::<f64>::identity(0, 10, Side::HalfLine).with_margins(0, 3);
        let s = a.sub_window(2, 6).unwrap();
        assert_eq!(s.offset(), 2);
        assert_eq!(s.side(), Side::WholeLine);
        assert_eq!(s.margin_bottom(), 1);
        assert_eq!(s.exact_rows(), 0..5);
    }

    #[test]
    fn global_indexing() {
        let a = BandedWindow::<f64>::tridiagonal(-2, &[1.0, 2.0, 3.0], &[7.0, 8.0], Side::WholeLine)
            .unwrap();
        assert_eq!(a.get_global(-1, 0), 8.0);
        assert_eq!(a.get_global(-3, -2), 0.0);
        assert!(a.contains_global(0) && !a.contains_global(1));
    }
}
