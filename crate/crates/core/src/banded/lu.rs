use num_complex::Complex64;

use super::{BandedWindow, Scalar};
use crate::error::{Error, Result};

/// LU factorization of `a − z` without pivoting, stored in band form.
///
/// For self-adjoint `a` and `Im z ≠ 0` every leading principal block of `a − z`
/// is invertible, so the elimination never meets a zero pivot. The same holds
/// for real `z` outside the convex hull of the spectrum.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    w: usize,
    data: Vec<Complex64>,
}

impl BandedLu {
    pub fn factor<T: Scalar>(a: &BandedWindow<T>, z: Complex64) -> Result<Self> {
        let (n, w) = (a.n(), a.bandwidth());
        let stride = 2 * w + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n * stride];
        for i in 0..n {
            for j in a.col_range(i) {
                data[i * stride + (j + w - i)] = a.get(i, j).to_c64();
            }
            data[i * stride + w] -= z;
        }
        let idx = |i: usize, j: usize| i * stride + (j + w - i);
        for k in 0..n {
            let piv = data[idx(k, k)];
            if piv.norm() == 0.0 || !piv.is_finite() {
                return Err(Error::Singular { row: k });
            }
            let jhi = (k + w + 1).min(n);
            for i in (k + 1)..jhi {
                let l = data[idx(i, k)] / piv;
                data[idx(i, k)] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..jhi {
                    let u = data[idx(k, j)];
                    data[idx(i, j)] -= l * u;
                }
            }
        }
        Ok(Self { n, w, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Overwrites `rhs` with the solution of `(a − z) x = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        assert_eq!(rhs.len(), self.n);
        let (n, w) = (self.n, self.w);
        let stride = 2 * w + 1;
        for i in 0..n {
            let mut s = rhs[i];
            for k in i.saturating_sub(w)..i {
                s -= self.data[i * stride + (k + w - i)] * rhs[k];
            }
            rhs[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in (i + 1)..(i + w + 1).min(n) {
                s -= self.data[i * stride + (j + w - i)] * rhs[j];
            }
            rhs[i] = s / self.data[i * stride + w];
        }
    }

    /// Column `j` of `(a − z)⁻¹`, local indices.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        let mut e = vec![Complex64::new(0.0, 0.0); self.n];
        e[j] = Complex64::new(1.0, 0.0);
        self.solve_in_place(&mut e);
        e
    }
}

/// `⟨i|(a − z)⁻¹|j⟩` in local indices of the window.
pub fn resolvent_entry<T: Scalar>(a: &BandedWindow<T>, z: Complex64, i: usize, j: usize) -> Result<Complex64> {
    if i >= a.n() || j >= a.n() {
        return Err(Error::Shape(format!("index ({i},{j}) outside window of size {}", a.n())));
    }
    let lu = BandedLu::factor(a, z)?;
    Ok(lu.column(j)[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banded::Side;

    #[test]
    fn one_by_one_zero() {
        let a = BandedWindow::<f64>::zeros(0, 1, 0, Side::HalfLine);
        let z = Complex64::new(0.3, 1.7);
        let r = resolvent_entry(&a, z, 0, 0).unwrap();
        assert!((r + 1.0 / z).norm() < 1e-16);
    }

    #[test]
    fn free_half_line_at_two() {
        let n = 2000;
        let a = BandedWindow::tridiagonal(0, &vec![0.0; n], &vec![0.5; n - 1], Side::HalfLine).unwrap();
        let r = resolvent_entry(&a, Complex64::new(2.0, 0.0), 0, 0).unwrap();
        let expect = -4.0 + 2.0 * 3f64.sqrt();
        assert!((r.re - expect).abs() < 1e-12 && r.im.abs() < 1e-15, "{r}");
    }

    #[test]
    fn symmetric_entries() {
        let q = [0.3, -0.1, 0.7, 0.2, -0.5];
        let p = [0.9, 0.4, 1.1, 0.6];
        let a = BandedWindow::tridiagonal(0, &q, &p, Side::HalfLine).unwrap();
        let z = Complex64::new(0.1, 0.4);
        let lu = BandedLu::factor(&a, z).unwrap();
        for i in 0..5 {
            let ci = lu.column(i);
            for j in 0..5 {
                let cj = lu.column(j);
                assert!((ci[j] - cj[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn matches_dense_inverse() {
        let q = [0.3, -0.1, 0.7, 0.2, -0.5, 1.0];
        let p = [0.9, 0.4, 1.1, 0.6, 0.2];
        let a = BandedWindow::tridiagonal(0, &q, &p, Side::HalfLine).unwrap().to_complex();
        let z = Complex64::new(-0.2, 0.9);
        let dense = (a.to_dense() - nalgebra::DMatrix::<Complex64>::identity(6, 6) * z)
            .try_inverse()
            .unwrap();
        let lu = BandedLu::factor(&a, z).unwrap();
        for j in 0..6 {
            let col = lu.column(j);
            for i in 0..6 {
                assert!((col[i] - dense[(i, j)]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_pivot_is_singular() {
        let a = BandedWindow::from_diagonal(0, &[1.0, 2.0], Side::HalfLine);
        let err = resolvent_entry(&a, Complex64::new(1.0, 0.0), 0, 0).unwrap_err();
        assert_eq!(err, Error::Singular { row: 0 });
    }
}
