use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use super::branch::assemble_renormalized;
use super::{ExpandingPolynomial, SignVector};
use crate::banded::{band_mul, cholesky_upper, BandedWindow, JacobiCoeffs, Side};
use crate::error::{Error, Result};

/// Darboux transform for `T(z) = ρ(z²−1)+1`: factor `(J − T(0))/ρ = Φ*Φ` and
/// return `ρΦΦ* + T(0)`, where `T(0) = 1 − ρ`.
pub fn darboux(j: &BandedWindow<f64>, rho: f64) -> Result<BandedWindow<f64>> {
    if !(rho > 2.0) {
        return Err(Error::InvalidInput(format!("Darboux transform needs rho > 2, got {rho}")));
    }
    let t0 = 1.0 - rho;
    let m = j.shifted(-t0).scaled(1.0 / rho);
    let phi = cholesky_upper(&m)?;
    let out = band_mul(&phi, &phi.adjoint())?.scaled(rho).shifted(t0);
    Ok(out.trimmed())
}

/// The off-diagonal block of a zero-diagonal Jacobi window under the even/odd
/// reordering, and the size of the diagonal blocks (which must vanish).
#[derive(Debug, Clone)]
pub struct QuadraticSplit {
    /// `Φ(i, j) = J(2i+1, 2j)` in window-relative pairs; upper bidiagonal.
    pub phi: BandedWindow<f64>,
    pub residual: f64,
}

pub fn quadratic_split(j: &BandedWindow<f64>) -> Result<QuadraticSplit> {
    let n = j.n();
    if n % 2 != 0 || j.offset() % 2 != 0 {
        return Err(Error::Shape("quadratic split needs an even offset and even size".into()));
    }
    let scale = j.max_abs().max(1.0);
    if let Some(i) = (0..n).find(|&i| j.get(i, i).abs() > 1e-13 * scale) {
        return Err(Error::InvalidInput(format!("nonzero diagonal entry at local row {i}")));
    }
    let half = n / 2;
    let mut phi = BandedWindow::zeros(j.offset() / 2, half, 1, j.side());
    let mut residual = 0.0f64;
    for i in 0..n {
        for c in j.col_range(i) {
            let v = j.get(i, c);
            match (i % 2, c % 2) {
                (1, 0) => {
                    let (r, s) = (i / 2, c / 2);
                    if s < r || s > r + 1 {
                        if v != 0.0 {
                            return Err(Error::Shape("input is not tridiagonal".into()));
                        }
                    } else {
                        phi.set(r, s, v);
                    }
                }
                (0, 1) => {}
                _ => residual = residual.max(v.abs()),
            }
        }
    }
    Ok(QuadraticSplit { phi, residual })
}

/// Largest singular value of a symmetric dense block.
fn symmetric_norm(m: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn interior_norm(a: &BandedWindow<f64>, b: &BandedWindow<f64>) -> f64 {
    let n = a.n();
    let (lo, len) = (n / 4, n / 2);
    let m = DMatrix::from_fn(len, len, |i, j| a.get(lo + i, lo + j) - b.get(lo + i, lo + j));
    symmetric_norm(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub max_ratio: f64,
    pub per_pair: Vec<f64>,
}

fn summarize(per_pair: Vec<f64>) -> LipschitzReport {
    let max_ratio = per_pair.iter().copied().fold(0.0, f64::max);
    LipschitzReport { max_ratio, per_pair }
}

fn ratio(num: f64, den: f64) -> Result<f64> {
    if num == 0.0 {
        Ok(0.0)
    } else if den == 0.0 {
        Err(Error::InvalidInput("distinct outputs from identical inputs".into()))
    } else {
        Ok(num / den)
    }
}

/// `‖J(δ,J̃₁) − J(δ,J̃₂)‖ / ‖J̃₁ − J̃₂‖` for each pair, with both norms taken on
/// the middle half of windows covering the blocks `s_range`.
pub fn empirical_lipschitz(
    t: &ExpandingPolynomial,
    pairs: &[(JacobiCoeffs, JacobiCoeffs)],
    delta: &SignVector,
    s_range: std::ops::Range<i64>,
) -> Result<LipschitzReport> {
    let d = t.degree();
    let per_pair = pairs
        .par_iter()
        .map(|(a, b)| {
            let ja = assemble_renormalized(a, t, delta, s_range.clone())?;
            let jb = assemble_renormalized(b, t, delta, s_range.clone())?;
            let len = (s_range.end - s_range.start) as usize;
            let ta = a.window(s_range.start, len, Side::WholeLine)?;
            let tb = b.window(s_range.start, len, Side::WholeLine)?;
            debug_assert_eq!(ja.n(), d * len);
            ratio(interior_norm(&ja, &jb), interior_norm(&ta, &tb))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(per_pair))
}

/// Lipschitz ratios of the Darboux transform on windows of `n` sites starting
/// at the half-line edge; the norm is taken on the middle half, away from the
/// transient of the forward factorization.
pub fn darboux_lipschitz(rho: f64, pairs: &[(JacobiCoeffs, JacobiCoeffs)], n: usize) -> Result<LipschitzReport> {
    let per_pair = pairs
        .par_iter()
        .map(|(a, b)| {
            let wa = a.window(0, n, Side::HalfLine)?;
            let wb = b.window(0, n, Side::HalfLine)?;
            let da = darboux(&wa, rho)?;
            let db = darboux(&wb, rho)?;
            ratio(interior_norm(&da, &db), interior_norm(&wa, &wb))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(per_pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banded::eigenvalues;

    #[test]
    fn constant_input_is_fixed() {
        let j = BandedWindow::from_diagonal(0, &[0.7; 6], Side::HalfLine);
        let out = darboux(&j, 3.0).unwrap();
        for i in 0..6 {
            assert!((out.get(i, i) - 0.7).abs() < 1e-15);
        }
        assert_eq!(out.bandwidth(), 0);
    }

    #[test]
    fn free_input_is_isospectral() {
        let n = 60;
        let j = BandedWindow::tridiagonal(0, &vec![0.0; n], &vec![0.5; n - 1], Side::HalfLine).unwrap();
        let out = darboux(&j, 3.0).unwrap();
        let (a, b) = (eigenvalues(&j), eigenvalues(&out));
        let drift = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-11, "{drift}");
        assert_eq!(out.bandwidth(), 1);
    }

    #[test]
    fn factor_has_two_diagonals() {
        let n = 10;
        let j = BandedWindow::tridiagonal(0, &vec![0.1; n], &vec![0.5; n - 1], Side::HalfLine).unwrap();
        let phi = cholesky_upper(&j.shifted(2.0).scaled(1.0 / 3.0)).unwrap();
        for i in 0..n {
            for c in phi.col_range(i) {
                if c != i && c != i + 1 {
                    assert_eq!(phi.get(i, c), 0.0);
                }
            }
            assert!(phi.get(i, i) > 0.0);
        }
    }

    #[test]
    fn rho_must_exceed_two() {
        let j = BandedWindow::from_diagonal(0, &[0.0; 3], Side::HalfLine);
        assert!(darboux(&j, 2.0).is_err());
    }

    #[test]
    fn split_of_zero() {
        let j = BandedWindow::<f64>::zeros(0, 6, 1, Side::WholeLine);
        let s = quadratic_split(&j).unwrap();
        assert_eq!(s.residual, 0.0);
        assert_eq!(s.phi.max_abs(), 0.0);
    }

    #[test]
    fn split_rejects_diagonal() {
        let j = BandedWindow::from_diagonal(0, &[0.0, 1.0], Side::WholeLine);
        assert!(quadratic_split(&j).is_err());
    }

    #[test]
    fn identical_pair_has_zero_ratio() {
        let t = ExpandingPolynomial::quadratic(12.0, 1.0).unwrap();
        let a = JacobiCoeffs::periodic(vec![0.3, 0.4], vec![0.05, -0.05]).unwrap();
        let r = empirical_lipschitz(&t, &[(a.clone(), a)], &SignVector::all_minus(1), -20..20).unwrap();
        assert_eq!(r.max_ratio, 0.0);
    }
}
