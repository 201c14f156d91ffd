use super::{BandedWindow, Scalar, Side};
use crate::error::{Error, Result};

/// Upper-triangular `Φ` with positive diagonal and `Φ*Φ = a`.
///
/// The recursion runs strictly forward in the row index, so on a half-line
/// window the factor coincides with the factor of the infinite operator on
/// every row whose inputs are exact. A cut top edge makes the factor a purely
/// finite-dimensional object, and the margins say so.
pub fn cholesky_upper<T: Scalar>(a: &BandedWindow<T>) -> Result<BandedWindow<T>> {
    let n = a.n;
    let w = a.w;
    let mut phi: BandedWindow<T> = BandedWindow::zeros(a.offset, n, w, a.side);
    for i in 0..n {
        let mut d = a.get(i, i).real();
        for k in i.saturating_sub(w)..i {
            d -= phi.get(k, i).modulus_squared();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { row: i });
        }
        let piv = d.sqrt();
        phi.set(i, i, T::from_real(piv));
        for j in (i + 1)..(i + w + 1).min(n) {
            let mut s = a.get(i, j);
            for k in j.saturating_sub(w)..i {
                s -= phi.get(k, i).conjugate() * phi.get(k, j);
            }
            phi.set(i, j, s / T::from_real(piv));
        }
    }
    let poisoned_top = a.side == Side::WholeLine || a.margin_top > 0;
    if poisoned_top {
        phi.set_margins(n, 0);
    } else {
        phi.set_margins(0, a.margin_bottom);
    }
    Ok(phi)
}

/// `A* = Φ A Φ⁻¹`, computed one row at a time from `A* Φ = Φ A`.
///
/// Row `i` of `A*` is supported on columns `i−w ..= i+w` (`w` the bandwidth of
/// `a`); it is obtained by forward substitution against the columns of `Φ`,
/// never forming `Φ⁻¹`.
pub fn similarity_forward<T: Scalar>(
    phi: &BandedWindow<T>,
    a: &BandedWindow<T>,
) -> Result<BandedWindow<T>> {
    if phi.offset != a.offset {
        return Err(Error::OffsetMismatch {
            left: phi.offset,
            right: a.offset,
        });
    }
    if phi.n != a.n {
        return Err(Error::Shape(format!(
            "phi is {}x{}, a is {}x{}",
            phi.n, phi.n, a.n, a.n
        )));
    }
    let n = a.n;
    for i in 0..n {
        for j in phi.col_range(i) {
            if j < i && phi.get(i, j) != T::zero() {
                return Err(Error::InvalidInput(format!(
                    "phi is not upper triangular at ({i},{j})"
                )));
            }
        }
        if phi.get(i, i) == T::zero() {
            return Err(Error::Singular { row: i });
        }
    }
    let (wp, wa) = (phi.w, a.w);
    let mut out = BandedWindow::zeros(a.offset, n, wa, a.side);
    let mut b = vec![T::zero(); 2 * wa + 1];
    let mut x = vec![T::zero(); 2 * wa + 1];
    for i in 0..n {
        let jlo = i.saturating_sub(wa);
        let jhi = (i + wa + 1).min(n);
        // b_j = (Φ A)(i, j) for the columns needed
        for j in jlo..jhi {
            let mut s = T::zero();
            for k in i..(i + wp + 1).min(n) {
                s += phi.get(i, k) * a.get(k, j);
            }
            b[j - jlo] = s;
        }
        for j in jlo..jhi {
            let mut s = b[j - jlo];
            for k in jlo.max(j.saturating_sub(wp))..j {
                s -= x[k - jlo] * phi.get(k, j);
            }
            x[j - jlo] = s / phi.get(j, j);
        }
        for j in jlo..jhi {
            out.set(i, j, x[j - jlo]);
        }
    }
    out.set_margins(
        phi.margin_top.max(a.margin_top),
        phi.margin_bottom.max(a.margin_bottom + wp),
    );
    Ok(out)
}
