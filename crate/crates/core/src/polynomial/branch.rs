use rayon::prelude::*;
use serde::Serialize;

use super::resolvent::{half_line_resolvent, ResolventSide};
use super::{ExpandingPolynomial, SignVector};
use crate::banded::{BandedWindow, JacobiCoeffs, Side};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// A `d × d` Jacobi block: diagonal `q` and couplings `p` (`p[k]` joins `k`, `k+1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobiBlock {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl JacobiBlock {
    pub fn size(&self) -> usize {
        self.q.len()
    }

    pub fn coupling_product(&self) -> f64 {
        self.p.iter().product()
    }
}

fn branch_err(s: i64, critical: Option<usize>, e: impl std::fmt::Display) -> Error {
    Error::BranchInvalid { s, critical, reason: e.to_string() }
}

/// The monic degree-`d` polynomial `T^{(s)}` fixed by its values at the
/// critical points of `T`: `−1/r̃₋(T(c),s)` where `δ_c = −1` and
/// `−p̃²_{s+1} r̃₊(T(c),s+1)` where `δ_c = +1`, interpolated as
/// `(z−q)T′(z)/d + Σ_c T′(z)/((z−c)T″(c))·T^{(s)}(c)`.
pub fn branch_targets(jt: &JacobiCoeffs, t: &ExpandingPolynomial, delta: &SignVector, s: i64) -> Result<Poly> {
    let d = t.degree();
    if delta.len() != d - 1 {
        return Err(Error::InvalidInput(format!(
            "sign vector of length {} for {} critical points",
            delta.len(),
            d - 1
        )));
    }
    let dt = t.derivative();
    let mut out = Poly::linear_root(t.q()).mul(dt).scale(1.0 / d as f64);
    for (i, ((&c, &t2), &sign)) in t
        .critical_points()
        .iter()
        .zip(t.second_derivatives())
        .zip(delta.signs())
        .enumerate()
    {
        let tc = t.eval(c);
        let value = if sign < 0 {
            let r = half_line_resolvent(jt, tc, s, ResolventSide::Minus).map_err(|e| branch_err(s, Some(i), e))?;
            -1.0 / r
        } else {
            let p = jt.p_at(s + 1).ok_or_else(|| branch_err(s, Some(i), "coupling p̃_{s+1} unavailable"))?;
            let r = half_line_resolvent(jt, tc, s + 1, ResolventSide::Plus).map_err(|e| branch_err(s, Some(i), e))?;
            -p * p * r
        };
        if !value.is_finite() {
            return Err(branch_err(s, Some(i), "non-finite interpolation value"));
        }
        out = out.add(&dt.deflate(c).scale(value / t2));
    }
    Ok(out)
}

/// The Jacobi block whose spectral measure at its first site is
/// `Σ w_j δ_{x_j}`, where `x_j` are the roots of `T^{(s)}` and
/// `w_j = (T′(x_j)/d)/T^{(s)′}(x_j)` the residues of `(T′/d)/T^{(s)}`.
///
/// Errors carry `s = 0`; [`block_at`] fills in the block index.
pub fn block_from_resolvent(ts: &Poly, t: &ExpandingPolynomial) -> Result<JacobiBlock> {
    let d = t.degree();
    if ts.degree() != d || (ts.leading() - 1.0).abs() > 1e-12 {
        return Err(branch_err(0, None, format!("T^(s) must be monic of degree {d}")));
    }
    let x = ts.real_roots(1e-9).map_err(|e| branch_err(0, None, e))?;
    let dts = ts.derivative();
    let dt = t.derivative();
    let mut w = Vec::with_capacity(d);
    for (k, &xk) in x.iter().enumerate() {
        if k > 0 && xk - x[k - 1] <= 1e-12 * xk.abs().max(1.0) {
            return Err(branch_err(0, None, format!("repeated root near {xk}")));
        }
        let wk = dt.eval(xk) / d as f64 / dts.eval(xk);
        if !(wk > 0.0) {
            return Err(branch_err(0, None, format!("non-positive weight {wk} at root {xk}")));
        }
        w.push(wk);
    }
    Ok(lanczos(&x, &w))
}

/// Lanczos on `diag(x)` from the start vector `√w`, with full
/// reorthogonalization (the blocks are small).
fn lanczos(x: &[f64], w: &[f64]) -> JacobiBlock {
    let d = x.len();
    let norm = w.iter().sum::<f64>().sqrt();
    let mut basis: Vec<Vec<f64>> = vec![w.iter().map(|v| v.sqrt() / norm).collect()];
    let mut q = Vec::with_capacity(d);
    let mut p = Vec::with_capacity(d.saturating_sub(1));
    for k in 0..d {
        let v = &basis[k];
        let a: f64 = (0..d).map(|m| x[m] * v[m] * v[m]).sum();
        q.push(a);
        if k + 1 == d {
            break;
        }
        let mut r: Vec<f64> = (0..d).map(|m| x[m] * v[m]).collect();
        for _ in 0..2 {
            for u in &basis {
                let c: f64 = r.iter().zip(u).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
        }
        let b = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        p.push(b);
        basis.push(r.into_iter().map(|v| v / b).collect());
    }
    JacobiBlock { q, p }
}

/// Block `J^{(s)}` of the renormalized operator for sign vector `delta`.
pub fn block_at(jt: &JacobiCoeffs, t: &ExpandingPolynomial, delta: &SignVector, s: i64) -> Result<JacobiBlock> {
    let ts = branch_targets(jt, t, delta, s)?;
    block_from_resolvent(&ts, t).map_err(|e| match e {
        Error::BranchInvalid { critical, reason, .. } => Error::BranchInvalid { s, critical, reason },
        other => other,
    })
}

/// Two-sided window of the renormalized operator on the sites
/// `s_range.start·d .. s_range.end·d`.
///
/// Block `s` sits on sites `sd .. sd+d`; consecutive blocks are joined by
/// `p_{sd+d} = p̃_{s+1}/(p_{sd+1}⋯p_{sd+d−1})`. Every entry is an entry of the
/// infinite operator, so the window has zero margins.
pub fn assemble_renormalized(
    jt: &JacobiCoeffs,
    t: &ExpandingPolynomial,
    delta: &SignVector,
    s_range: std::ops::Range<i64>,
) -> Result<BandedWindow<f64>> {
    if s_range.is_empty() {
        return Err(Error::InvalidInput("empty block range".into()));
    }
    let d = t.degree();
    let blocks: Vec<JacobiBlock> = s_range
        .clone()
        .map(|s| block_at(jt, t, delta, s))
        .collect::<Result<_>>()?;
    let mut q = Vec::with_capacity(blocks.len() * d);
    let mut p = Vec::with_capacity(blocks.len() * d);
    for (idx, (s, b)) in s_range.clone().zip(&blocks).enumerate() {
        q.extend_from_slice(&b.q);
        p.extend_from_slice(&b.p);
        if idx + 1 < blocks.len() {
            let pt = jt.p_at(s + 1).ok_or_else(|| branch_err(s, None, "coupling p̃_{s+1} unavailable"))?;
            p.push(pt / b.coupling_product());
        }
    }
    BandedWindow::tridiagonal(s_range.start * d as i64, &q, &p, Side::WholeLine)
}

/// The renormalized operator of periodic `jt` as periodic data of period
/// `d·P`.
pub fn renormalize_periodic(jt: &JacobiCoeffs, t: &ExpandingPolynomial, delta: &SignVector) -> Result<JacobiCoeffs> {
    let per = jt
        .period()
        .ok_or_else(|| Error::InvalidInput("periodic input required".into()))? as i64;
    let d = t.degree();
    let mut q = vec![0.0; d * per as usize];
    let mut p = vec![0.0; d * per as usize];
    for s in 0..per {
        let b = block_at(jt, t, delta, s)?;
        let base = s as usize * d;
        q[base..base + d].copy_from_slice(&b.q);
        for (k, &v) in b.p.iter().enumerate() {
            p[base + k + 1] = v;
        }
        let next = (base + d) % (d * per as usize);
        p[next] = jt.p_at(s + 1).unwrap() / b.coupling_product();
    }
    JacobiCoeffs::periodic(p, q)
}

/// One entry of [`enumerate_branches`].
#[derive(Debug, Clone)]
pub struct Branch {
    pub delta: SignVector,
    pub window: Result<BandedWindow<f64>>,
}

/// Runs the construction for all `2^{d−1}` sign vectors, in parallel.
pub fn enumerate_branches(jt: &JacobiCoeffs, t: &ExpandingPolynomial, s_range: std::ops::Range<i64>) -> Vec<Branch> {
    SignVector::enumerate(t.degree() - 1)
        .into_par_iter()
        .map(|delta| {
            let window = assemble_renormalized(jt, t, &delta, s_range.clone());
            Branch { delta, window }
        })
        .collect()
}

/// Closeness of two valid branches: the smallest max-norm distance of their
/// coefficients over the middle half of the common window, minimized over
/// translations by `0 .. max_shift` sites.
#[derive(Debug, Clone, Serialize)]
pub struct BranchOverlap {
    pub first: usize,
    pub second: usize,
    pub distance: f64,
    pub best_shift: usize,
    pub distance_unshifted: f64,
}

impl BranchOverlap {
    pub fn identical(&self, tol: f64) -> bool {
        self.distance_unshifted <= tol
    }

    pub fn translates(&self, tol: f64) -> bool {
        self.distance <= tol
    }
}

pub fn branch_overlaps(branches: &[Branch], max_shift: usize) -> Vec<BranchOverlap> {
    let mut out = Vec::new();
    for a in 0..branches.len() {
        for b in (a + 1)..branches.len() {
            let (Ok(wa), Ok(wb)) = (&branches[a].window, &branches[b].window) else {
                continue;
            };
            let n = wa.n().min(wb.n());
            let (lo, hi) = (n / 4, 3 * n / 4);
            let dist = |shift: usize| {
                (lo..hi.min(n - 1 - shift))
                    .map(|i| {
                        (wa.get(i, i) - wb.get(i + shift, i + shift))
                            .abs()
                            .max((wa.get(i, i + 1) - wb.get(i + shift, i + shift + 1)).abs())
                    })
                    .fold(0.0, f64::max)
            };
            let unshifted = dist(0);
            let (best_shift, distance) = (0..max_shift.max(1))
                .map(|k| (k, dist(k)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            out.push(BranchOverlap {
                first: a,
                second: b,
                distance,
                best_shift,
                distance_unshifted: unshifted,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn quadratic_targets_have_expected_shape() {
        let t = ExpandingPolynomial::quadratic(2.0, 1.0).unwrap();
        let jt = JacobiCoeffs::free(0.5).unwrap();
        let ts = branch_targets(&jt, &t, &SignVector::all_minus(1), 0).unwrap();
        assert_eq!(ts.degree(), 2);
        assert_eq!(ts.leading(), 1.0);
        assert!(ts.coeff(1).abs() < 1e-15);
        assert!((ts.coeff(0) + (2.0 + 3f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn linear_block() {
        let t = ExpandingPolynomial::new(Poly::new(vec![0.0, 1.0]), 1.0).unwrap();
        let b = block_from_resolvent(&Poly::linear_root(0.7), &t).unwrap();
        assert_eq!(b.q, vec![0.7]);
        assert!(b.p.is_empty());
    }

    #[test]
    fn quadratic_block() {
        let t = ExpandingPolynomial::quadratic(5.0, 1.0).unwrap();
        let b = block_from_resolvent(&Poly::new(vec![-3.0, 0.0, 1.0]), &t).unwrap();
        assert!(b.q.iter().all(|q| q.abs() < 1e-15));
        assert!((b.p[0] - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn block_resolvent_matches_rational_function() {
        let t = ExpandingPolynomial::from_descending(&[1.0, 0.2, -6.0, 0.5], 1.0).unwrap();
        let jt = JacobiCoeffs::periodic(vec![0.3, 0.4], vec![0.1, -0.2]).unwrap();
        let delta = SignVector::new(vec![-1, 1]).unwrap();
        let ts = branch_targets(&jt, &t, &delta, 0).unwrap();
        let b = block_from_resolvent(&ts, &t).unwrap();
        let w = BandedWindow::tridiagonal(0, &b.q, &b.p, Side::HalfLine).unwrap();
        for k in 0..20 {
            let z = Complex64::new(-3.0 + 0.3 * k as f64, 0.2 + 0.05 * k as f64);
            let lu = crate::banded::resolvent_entry(&w, z, 0, 0).unwrap();
            // ⟨0|(z−J)⁻¹|0⟩ = (T′(z)/d)/T^{(s)}(z)
            let expect = t.derivative().eval_c(z) / 3.0 / ts.eval_c(z);
            assert!((-lu - expect).norm() < 1e-11);
        }
    }

    #[test]
    fn free_quadratic_couplings() {
        let t = ExpandingPolynomial::quadratic(2.0, 1.0).unwrap();
        let jt = JacobiCoeffs::free(0.5).unwrap();
        let w = assemble_renormalized(&jt, &t, &SignVector::all_minus(1), 0..4).unwrap();
        let p1 = ((2.0 + 3f64.sqrt()) / 2.0).sqrt();
        assert!((w.get(0, 1) - p1).abs() < 1e-14);
        assert!((w.get(1, 2) - 0.5 / p1).abs() < 1e-14);
        assert!((w.get(2, 3) - p1).abs() < 1e-14);
    }

    #[test]
    fn periodic_output_matches_window() {
        let t = ExpandingPolynomial::quadratic(10.0, 1.0).unwrap();
        let jt = JacobiCoeffs::periodic(vec![0.3, 0.4], vec![0.1, -0.2]).unwrap();
        let delta = SignVector::all_minus(1);
        let per = renormalize_periodic(&jt, &t, &delta).unwrap();
        assert_eq!(per.period(), Some(4));
        let w = assemble_renormalized(&jt, &t, &delta, -3..5).unwrap();
        let v = per.window(-6, 16, Side::WholeLine).unwrap();
        assert!(w.max_diff_on(&v, -6..10) < 1e-15);
    }

    #[test]
    fn mismatched_sign_vector() {
        let t = ExpandingPolynomial::quadratic(10.0, 1.0).unwrap();
        let jt = JacobiCoeffs::free(0.5).unwrap();
        assert!(branch_targets(&jt, &t, &SignVector::all_minus(2), 0).is_err());
    }
}
