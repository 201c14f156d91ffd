use super::{BandedWindow, Scalar, Side};
use crate::error::{Error, Result};

fn check_compatible<T: Scalar>(a: &BandedWindow<T>, b: &BandedWindow<T>) -> Result<()> {
    if a.offset != b.offset {
        return Err(Error::OffsetMismatch {
            left: a.offset,
            right: b.offset,
        });
    }
    if a.n != b.n {
        return Err(Error::Shape(format!("window sizes {} and {}", a.n, b.n)));
    }
    Ok(())
}

/// Product of two windows over the same index range.
///
/// Row `i` of the product is exact when row `i` of `a` is exact and every row
/// of `b` reached by the band of `a` is exact and inside the window.
pub fn band_mul<T: Scalar>(a: &BandedWindow<T>, b: &BandedWindow<T>) -> Result<BandedWindow<T>> {
    check_compatible(a, b)?;
    let n = a.n;
    let mut out = BandedWindow::zeros(a.offset, n, a.w + b.w, a.side);
    let (wa, wb, wc) = (a.w, b.w, out.w);
    let (sa, sb, sc) = (2 * wa + 1, 2 * wb + 1, 2 * wc + 1);
    for i in 0..n {
        let crow = i * sc;
        for k in a.col_range(i) {
            let aik = a.data[i * sa + (k + wa - i)];
            if aik == T::zero() {
                continue;
            }
            let brow = k * sb;
            // columns j of row k in b, clipped to the output band of row i
            let jlo = k.saturating_sub(wb).max(i.saturating_sub(wc));
            let jhi = (k + wb + 1).min(n).min(i + wc + 1);
            for j in jlo..jhi {
                out.data[crow + (j + wc - i)] += aik * b.data[brow + (j + wb - k)];
            }
        }
    }
    let top = match a.side {
        Side::WholeLine => a.margin_top.max(b.margin_top + wa),
        Side::HalfLine if b.margin_top == 0 => a.margin_top,
        Side::HalfLine => a.margin_top.max(b.margin_top + wa),
    };
    let bottom = a.margin_bottom.max(b.margin_bottom + wa);
    out.set_margins(top, bottom);
    Ok(out)
}

/// `a + beta·b`.
pub fn band_add<T: Scalar>(a: &BandedWindow<T>, b: &BandedWindow<T>, beta: T) -> Result<BandedWindow<T>> {
    check_compatible(a, b)?;
    let mut out = BandedWindow::zeros(a.offset, a.n, a.w.max(b.w), a.side);
    for i in 0..a.n {
        for j in out.col_range(i) {
            out.set(i, j, a.get(i, j) + beta * b.get(i, j));
        }
    }
    out.set_margins(
        a.margin_top.max(b.margin_top),
        a.margin_bottom.max(b.margin_bottom),
    );
    Ok(out)
}

/// Evaluates `Σ c_k a^k` by Horner's rule; `coeffs` are in ascending order.
pub fn poly_eval<T: Scalar>(coeffs: &[T], a: &BandedWindow<T>) -> Result<BandedWindow<T>> {
    let Some((&lead, rest)) = coeffs.split_last() else {
        return Ok(BandedWindow::zeros(a.offset, a.n, 0, a.side));
    };
    let mut acc = BandedWindow::identity(a.offset, a.n, a.side).scaled(lead);
    for &c in rest.iter().rev() {
        acc = band_mul(&acc, a)?.shifted(c);
    }
    Ok(acc)
}

/// Assembles the `2N × 2N` window with `entry(2i+r, 2j+s) = scale·block[r][s](i,j)`.
///
/// This is conjugation of a 2×2 operator block matrix by the unitary sending
/// `|k⟩⊕0` to `|2k⟩` and `0⊕|k⟩` to `|2k+1⟩`.
pub fn interleave<T: Scalar>(block: [[&BandedWindow<T>; 2]; 2], scale: T) -> Result<BandedWindow<T>> {
    let base = block[0][0];
    for row in &block {
        for b in row {
            if b.n != base.n {
                return Err(Error::Shape(format!(
                    "interleave blocks of sizes {} and {}",
                    base.n, b.n
                )));
            }
            if b.offset != base.offset {
                return Err(Error::OffsetMismatch {
                    left: base.offset,
                    right: b.offset,
                });
            }
        }
    }
    let wmax = block.iter().flatten().map(|b| b.w).max().unwrap_or(0);
    let n = base.n;
    let mut out = BandedWindow::zeros(2 * base.offset, 2 * n, 2 * wmax + 1, base.side);
    for (r, row) in block.iter().enumerate() {
        for (s, b) in row.iter().enumerate() {
            for i in 0..n {
                for j in b.col_range(i) {
                    out.set(2 * i + r, 2 * j + s, scale * b.get(i, j));
                }
            }
        }
    }
    let top = block.iter().flatten().map(|b| b.margin_top).max().unwrap_or(0);
    let bottom = block.iter().flatten().map(|b| b.margin_bottom).max().unwrap_or(0);
    out.set_margins(2 * top, 2 * bottom);
    Ok(out.trimmed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn free_jacobi(n: usize, p: f64, side: Side) -> BandedWindow<f64> {
        BandedWindow::tridiagonal(0, &vec![0.0; n], &vec![p; n - 1], side).unwrap()
    }

    #[test]
    fn shift_times_inverse_shift_is_identity_inside() {
        let s = BandedWindow::<f64>::shift_power(0, 8, 1, Side::WholeLine);
        let si = BandedWindow::<f64>::shift_power(0, 8, -1, Side::WholeLine);
        let prod = band_mul(&s, &si).unwrap();
        for i in 0..7 {
            for j in 0..8 {
                assert_eq!(prod.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        // the last row needs a column past the window
        assert_eq!(prod.get(7, 7), 0.0);
        assert!(prod.exact_rows().end <= 7);
    }

    #[test]
    fn free_jacobi_square_matches_dense() {
        let j = free_jacobi(12, 1.0, Side::WholeLine);
        let sq = band_mul(&j, &j).unwrap();
        let dense = j.to_dense() * j.to_dense();
        assert_eq!(sq.to_dense(), dense);
        for i in sq.exact_rows() {
            assert_eq!(sq.get(i, i), 2.0);
            if i + 2 < 12 {
                assert_eq!(sq.get(i, i + 2), 1.0);
            }
        }
        assert_eq!(sq.exact_rows(), 1..11);
    }

    #[test]
    fn diagonal_times_shift_square() {
        let d: Vec<f64> = (0..6).map(|k| k as f64 + 1.0).collect();
        let lam = BandedWindow::from_diagonal(0, &d, Side::HalfLine);
        let s2 = BandedWindow::shift_power(0, 6, 2, Side::HalfLine);
        let prod = band_mul(&lam, &s2).unwrap();
        for i in 0..4 {
            assert_eq!(prod.get(i, i + 2), d[i]);
        }
    }

    #[test]
    fn offset_mismatch_is_reported() {
        let a = BandedWindow::<f64>::identity(0, 4, Side::WholeLine);
        let b = BandedWindow::<f64>::identity(1, 4, Side::WholeLine);
        assert!(matches!(band_mul(&a, &b), Err(Error::OffsetMismatch { .. })));
    }

    #[test]
    fn clipped_product_matches_dense_when_band_saturates() {
        let n = 7;
        let m = DMatrix::<f64>::from_fn(n, n, |i, j| 1.0 + (i * 3 + j * 5) as f64 % 7.0);
        let a = BandedWindow::from_dense(0, &m, n - 1, Side::HalfLine).unwrap();
        let p = band_mul(&a, &a).unwrap();
        assert_eq!(p.bandwidth(), n - 1);
        let diff = (p.to_dense() - &m * &m).abs().max();
        assert!(diff < 1e-12);
    }

    #[test]
    fn interleave_zero_blocks() {
        let z = BandedWindow::<f64>::zeros(0, 3, 1, Side::HalfLine);
        let out = interleave([[&z, &z], [&z, &z]], 1.0).unwrap();
        assert_eq!(out.n(), 6);
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn interleave_swap_block_couples_neighbours() {
        let z = BandedWindow::<f64>::zeros(0, 3, 0, Side::HalfLine);
        let id = BandedWindow::<f64>::identity(0, 3, Side::HalfLine);
        let out = interleave([[&z, &id], [&id, &z]], 1.0).unwrap();
        let d = out.to_dense();
        for r in 0..6 {
            for c in 0..6 {
                let expect = if r / 2 == c / 2 && r != c { 1.0 } else { 0.0 };
                assert_eq!(d[(r, c)], expect, "({r},{c})");
            }
        }
        assert_eq!(out.bandwidth(), 1);
    }

    #[test]
    fn interleave_two_by_two_table() {
        // Distinct labels for every block entry; the 4x4 result must place
        // block[r][s](i,j) at (2i+r, 2j+s).
        let mk = |base: f64| {
            let m = DMatrix::from_fn(2, 2, |i, j| base + (2 * i + j) as f64);
            BandedWindow::from_dense(0, &m, 1, Side::HalfLine).unwrap()
        };
        let (a, b, c, d) = (mk(10.0), mk(20.0), mk(30.0), mk(40.0));
        let out = interleave([[&a, &b], [&c, &d]], 1.0).unwrap().to_dense();
        #[rustfmt::skip]
        let expect = [
            [10.0, 20.0, 11.0, 21.0],
            [30.0, 40.0, 31.0, 41.0],
            [12.0, 22.0, 13.0, 23.0],
            [32.0, 42.0, 33.0, 43.0],
        ];
        for r in 0..4 {
            for s in 0..4 {
                assert_eq!(out[(r, s)], expect[r][s]);
            }
        }
    }

    #[test]
    fn horner_matches_dense_polynomial() {
        let j = free_jacobi(10, 0.7, Side::WholeLine);
        let coeffs = [2.0, -1.0, 0.5, 1.0];
        let p = poly_eval(&coeffs, &j).unwrap();
        let jd = j.to_dense();
        let dense = DMatrix::<f64>::identity(10, 10) * 2.0 - &jd + &jd * &jd * 0.5 + &jd * &jd * &jd;
        assert!((p.to_dense() - dense).abs().max() < 1e-13);
        assert_eq!(p.bandwidth(), 3);
    }
}
