use crate::banded::JacobiCoeffs;
use crate::error::{Error, Result};

/// Period-two Jacobi data with `J² − λ = (ξ₁/2)(S² + S⁻²)`.
///
/// The couplings multiply to `ξ₁/2`, the diagonal alternates `±t` with
/// `t = √(λ − p₀² − p₁²)`.
pub fn period_two_polynomial(xi1: f64, lam: f64, p0: f64) -> Result<JacobiCoeffs> {
    if !(xi1 > 0.0) || !(p0 > 0.0) {
        return Err(Error::InvalidInput(format!("need xi1 > 0 and p0 > 0, got {xi1}, {p0}")));
    }
    let p1 = xi1 / (2.0 * p0);
    let t2 = lam - p0 * p0 - p1 * p1;
    if t2 < 0.0 {
        return Err(Error::NoRealSolution(format!(
            "lambda = {lam} is below p0^2 + p1^2 = {}",
            p0 * p0 + p1 * p1
        )));
    }
    let t = t2.sqrt();
    JacobiCoeffs::periodic(vec![p0, p1], vec![t, -t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banded::{band_mul, BandedWindow, Side};

    #[test]
    fn symmetric_couplings() {
        let xi = 1.5;
        let p0 = (xi / 2.0f64).sqrt();
        let j = period_two_polynomial(xi, 4.0, p0).unwrap();
        assert!((j.q()[0].powi(2) - (4.0 - xi)).abs() < 1e-14);
        let j = period_two_polynomial(xi, xi, p0).unwrap();
        assert!(j.q()[0].abs() < 1e-7);
    }

    #[test]
    fn square_is_shift_pair() {
        let (xi, lam) = (1.2, 3.0);
        let j = period_two_polynomial(xi, lam, 0.9).unwrap();
        let w = j.window(-20, 40, Side::WholeLine).unwrap();
        let sq = band_mul(&w, &w).unwrap().shifted(-lam);
        let s2: BandedWindow<f64> = BandedWindow::shift_power(-20, 40, 2, Side::WholeLine);
        let s2m: BandedWindow<f64> = BandedWindow::shift_power(-20, 40, -2, Side::WholeLine);
        for i in 2..38 {
            for c in sq.col_range(i) {
                let expect = (xi / 2.0) * (s2.get(i, c) + s2m.get(i, c));
                assert!((sq.get(i, c) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn infeasible_lambda() {
        assert!(matches!(period_two_polynomial(1.0, 0.1, 1.0), Err(Error::NoRealSolution(_))));
    }
}
