//! The rational double covering `π(v) = τv − c/v` and its action on
//! self-adjoint operators.
//!
//! For a half-line operator `A` with cyclic vector `|0⟩`, the transform
//! `π*(A)` is the operator on the doubled space whose spectral measure at
//! `|0⟩` is the preimage measure `𝓛*ν`, with `ν` the spectral measure of `A`.
//! It is assembled from the upper Cholesky factor `Φ` of `A² + 4τc` and the
//! forward similarity `A* = ΦAΦ⁻¹`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::{
    band_mul, cholesky_upper, cyclic_moments, interleave, resolvent_entry, similarity_forward,
    spectral_weights, BandedWindow, Side,
};
use crate::error::{Error, Result};
use crate::transfer::{self, CoveringMap, MomentVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalCovering {
    pub tau: f64,
    pub c: f64,
}

impl RationalCovering {
    pub fn new(tau: f64, c: f64) -> Result<Self> {
        let cov = Self { tau, c };
        cov.validate()?;
        Ok(cov)
    }

    /// `c = τ − 1`, so that `v = 1` is a fixed point.
    pub fn normalized(tau: f64) -> Result<Self> {
        Self::new(tau, tau - 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 1.0) || !self.tau.is_finite() {
            return Err(Error::InvalidInput(format!("tau must exceed 1, got {}", self.tau)));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidInput(format!("c must be positive, got {}", self.c)));
        }
        Ok(())
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.tau * v - self.c / v
    }

    pub fn eval_c(&self, v: Complex64) -> Complex64 {
        self.tau * v - self.c / v
    }

    /// The shift in `Φ*Φ = A² + 4τc`.
    pub fn shift(&self) -> f64 {
        4.0 * self.tau * self.c
    }

    /// The positive fixed point `√(c/(τ−1))`.
    pub fn fixed_point(&self) -> f64 {
        (self.c / (self.tau - 1.0)).sqrt()
    }

    /// Both roots of `τv² − xv − c = 0`, smaller real part first.
    pub fn preimages(&self, x: Complex64) -> [Complex64; 2] {
        let disc = (x * x + self.shift()).sqrt();
        // avoid cancellation: compute the larger root first
        let big = if (x + disc).norm() >= (x - disc).norm() { x + disc } else { x - disc };
        let r1 = big / (2.0 * self.tau);
        let r2 = -self.c / (self.tau * r1);
        if r1.re <= r2.re {
            [r1, r2]
        } else {
            [r2, r1]
        }
    }

    /// Real preimages of a real point: `(x ∓ √(x² + 4τc))/(2τ)`.
    pub fn real_preimages(&self, x: f64) -> [f64; 2] {
        let [a, b] = self.preimages(Complex64::new(x, 0.0));
        [a.re, b.re]
    }
}

/// `π*(A) = (1/2τ)·U*[[A, Φ*], [Φ, A*]]U` with `U` the even/odd interleaving.
pub fn pi_star(a: &BandedWindow<f64>, cov: &RationalCovering) -> Result<BandedWindow<f64>> {
    cov.validate()?;
    let scale = a.max_abs().max(1.0);
    if a.asymmetry() > 1e-14 * scale {
        return Err(Error::InvalidInput("pi_star needs a self-adjoint window".into()));
    }
    let shifted = band_mul(a, a)?.shifted(cov.shift());
    let phi = cholesky_upper(&shifted)?;
    let a_star = similarity_forward(&phi, a)?;
    let phi_adj = phi.adjoint();
    let mut out = interleave([[a, &phi_adj], [&phi, &a_star]], 1.0 / (2.0 * cov.tau))?;
    symmetrize(&mut out);
    Ok(out)
}

/// Averages mirrored entries; the forward similarity is symmetric only up to
/// rounding.
fn symmetrize(a: &mut BandedWindow<f64>) {
    let n = a.n();
    for i in 0..n {
        for j in a.col_range(i).filter(|&j| j > i) {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
}

/// Diagonal of the Cholesky factor of `A² + 4τc` for a zero-diagonal Jacobi
/// `A`, by the closed recursion
/// `λ_n² = 4τc + p²_{n+1} + p²_n − p²_n p²_{n−1}/λ²_{n−2}`.
///
/// `p[k−1]` holds the coupling `p_k` between sites `k−1` and `k`; the output
/// has the same length, `λ_0 .. λ_{N−1}`.
pub fn lambda_sequence(p: &[f64], cov: &RationalCovering) -> Result<Vec<f64>> {
    cov.validate()?;
    if let Some(bad) = p.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("coupling {bad} is not positive")));
    }
    let pk = |k: usize| if k == 0 || k > p.len() { 0.0 } else { p[k - 1] };
    let mut lam2: Vec<f64> = Vec::with_capacity(p.len());
    for n in 0..p.len() {
        let mut v = cov.shift() + pk(n + 1).powi(2) + pk(n).powi(2);
        if n >= 2 {
            v -= pk(n).powi(2) * pk(n - 1).powi(2) / lam2[n - 2];
        }
        if !(v > 0.0) {
            return Err(Error::InvalidInput(format!("recursion lost positivity at n = {n}")));
        }
        lam2.push(v);
    }
    Ok(lam2.into_iter().map(f64::sqrt).collect())
}

/// Repeated `A ↦ π*(A)`, keeping the leading `window × window` block after
/// each step. Returns `steps + 1` snapshots starting with `a0`.
pub fn iterate_renorm(
    a0: &BandedWindow<f64>,
    cov: &RationalCovering,
    steps: usize,
    window: usize,
) -> Result<Vec<BandedWindow<f64>>> {
    let mut out = vec![a0.clone()];
    iterate_with(a0, cov, steps, window, |a| {
        out.push(a.clone());
    })?;
    Ok(out)
}

/// Cyclic moments `⟨0|A_n^k|0⟩, k ≤ kmax` of every iterate, without keeping the
/// windows.
pub fn iterate_moments(
    a0: &BandedWindow<f64>,
    cov: &RationalCovering,
    steps: usize,
    window: usize,
    kmax: usize,
) -> Result<Vec<MomentVector>> {
    let mut out = vec![MomentVector::new(cyclic_moments(a0, 0, kmax))?];
    let mut err = None;
    iterate_with(a0, cov, steps, window, |a| {
        match MomentVector::new(cyclic_moments(a, 0, kmax)) {
            Ok(m) => out.push(m),
            Err(e) => err = Some(e),
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

fn iterate_with(
    a0: &BandedWindow<f64>,
    cov: &RationalCovering,
    steps: usize,
    window: usize,
    mut visit: impl FnMut(&BandedWindow<f64>),
) -> Result<()> {
    if window < 16 {
        return Err(Error::InvalidInput(format!("window must be at least 16, got {window}")));
    }
    if a0.side() != Side::HalfLine {
        return Err(Error::InvalidInput("iteration starts from a half-line window".into()));
    }
    let mut a = a0.clone();
    for _ in 0..steps {
        let next = pi_star(&a, cov)?;
        a = next.leading(window.min(next.n()))?;
        visit(&a);
    }
    Ok(())
}

/// Moments of `𝓛*ν` from the moments of `ν`.
pub fn moment_pushforward(m: &MomentVector, cov: &RationalCovering) -> Result<MomentVector> {
    transfer::moment_pushforward(m, &CoveringMap::Rational(*cov))
}

/// `|⟨0|(π*(A) − z)⁻¹|0⟩ − ∫(x − 2τz)dν(x) / (2(τz² − xz − c))|` with `ν` the
/// spectral measure of `A` at `|0⟩`.
pub fn resolvent_identity_residual(a: &BandedWindow<f64>, cov: &RationalCovering, z: Complex64) -> Result<f64> {
    if z.im == 0.0 {
        return Err(Error::InvalidInput("z must be off the real axis".into()));
    }
    let lhs = resolvent_entry(&pi_star(a, cov)?, z, 0, 0)?;
    let (nodes, weights) = spectral_weights(a, 0);
    let tau = cov.tau;
    let rhs: Complex64 = nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * (x - 2.0 * tau * z) / (2.0 * (tau * z * z - x * z - cov.c)))
        .sum();
    Ok((lhs - rhs).norm())
}

/// Checks that the rational functions `f_j(v) = (τv + c/v)·e_j(π(v))`, with
/// `e_j` the orthonormal polynomials of `A`, have Gram matrix `Φ*Φ` in the
/// spectral measure of `π*(A)`: the upper Cholesky factor `R` of the Gram
/// matrix is compared with `Φ` through `‖Φ·R⁻¹ − I‖_max`. Equivalently, the
/// coefficients expressing the orthonormalized `f_j` in terms of the original
/// ones form `Φ⁻¹`.
pub fn coefficient_duality_residual(a: &BandedWindow<f64>, cov: &RationalCovering) -> Result<f64> {
    let n = a.n();
    if a.bandwidth() > 1 {
        return Err(Error::InvalidInput("a Jacobi (tridiagonal) window is required".into()));
    }
    for k in 0..n.saturating_sub(1) {
        if !(a.get(k, k + 1) > 0.0) {
            return Err(Error::InvalidInput(format!("coupling {k} is not positive")));
        }
    }
    let b = pi_star(a, cov)?;
    let (atoms, weights) = spectral_weights(&b, 0);
    // orthonormal polynomials of A at the points π(v_m)
    let values = |x: f64| {
        let mut e = vec![1.0; n];
        for j in 0..n - 1 {
            let prev = if j == 0 { 0.0 } else { a.get(j - 1, j) * e[j - 1] };
            e[j + 1] = ((x - a.get(j, j)) * e[j] - prev) / a.get(j, j + 1);
        }
        e
    };
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for (&v, &w) in atoms.iter().zip(&weights) {
        let e = values(cov.eval(v));
        let amp = cov.tau * v + cov.c / v;
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += w * amp * amp * e[i] * e[j];
            }
        }
    }
    let r = gram
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { row: 0 })?
        .l()
        .transpose();
    let r_inv = r
        .try_inverse()
        .ok_or(Error::Singular { row: 0 })?;
    let phi = cholesky_upper(&band_mul(a, a)?.shifted(cov.shift()))?.to_dense();
    let prod = phi * r_inv;
    Ok((prod - DMatrix::<f64>::identity(n, n)).amax())
}

/// Period-two five-diagonal operator `V` with `V(i,i) = λ⁽⁰⁾_{i mod 2}`,
/// `V(i,i+1) = λ⁽¹⁾_{(i+1) mod 2}`, `V(i,i+2) = λ⁽²⁾_{i mod 2}`.
///
/// `λ⁽²⁾ = (ξ₂/2τ, 0)` and `λ⁽⁰⁾ = (u, −u)` with `u = free_param`; the pair
/// `λ⁽¹⁾` solves `x² + y² = c/τ − u²`, `τxy = −(ξ₂/2)u`.
pub fn period_two_rational(
    xi2: f64,
    cov: &RationalCovering,
    free_param: f64,
    offset: i64,
    n: usize,
) -> Result<BandedWindow<f64>> {
    cov.validate()?;
    if !(xi2 > 0.0) {
        return Err(Error::InvalidInput(format!("xi2 must be positive, got {xi2}")));
    }
    let tau = cov.tau;
    let u = free_param;
    let prod = -xi2 * u / (2.0 * tau);
    let sum_sq = cov.c / tau - u * u;
    if sum_sq < 2.0 * prod.abs() {
        return Err(Error::NoRealSolution(format!(
            "free parameter {u} leaves no real off-diagonal pair"
        )));
    }
    let (s, d) = ((sum_sq + 2.0 * prod).sqrt(), (sum_sq - 2.0 * prod).max(0.0).sqrt());
    let lam1 = [(s + d) / 2.0, (s - d) / 2.0];
    let lam0 = [u, -u];
    let lam2 = [xi2 / (2.0 * tau), 0.0];
    let mut out = BandedWindow::zeros(offset, n, 2, Side::WholeLine);
    let idx = |i: usize| (offset + i as i64).rem_euclid(2) as usize;
    for i in 0..n {
        out.set(i, i, lam0[idx(i)]);
        if i + 1 < n {
            let v = lam1[idx(i + 1)];
            out.set(i, i + 1, v);
            out.set(i + 1, i, v);
        }
        if i + 2 < n {
            let v = lam2[idx(i)];
            out.set(i, i + 2, v);
            out.set(i + 2, i, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banded::eigenvalues;

    fn cov2() -> RationalCovering {
        RationalCovering::normalized(2.0).unwrap()
    }

    #[test]
    fn zero_input_gives_two_by_two_blocks() {
        let a = BandedWindow::<f64>::zeros(0, 4, 0, Side::HalfLine);
        let b = pi_star(&a, &cov2()).unwrap();
        let h = 0.5f64.sqrt();
        for k in 0..4 {
            assert!((b.get(2 * k, 2 * k + 1) - h).abs() < 1e-15);
            assert_eq!(b.get(2 * k, 2 * k), 0.0);
        }
        assert_eq!(b.get(1, 2), 0.0);
    }

    #[test]
    fn one_by_one_input() {
        let x0 = 0.7;
        let a = BandedWindow::from_diagonal(0, &[x0], Side::HalfLine);
        let ev = eigenvalues(&pi_star(&a, &cov2()).unwrap());
        let r = cov2().real_preimages(x0);
        assert!((ev[0] - r[0]).abs() < 1e-14 && (ev[1] - r[1]).abs() < 1e-14);
    }

    #[test]
    fn free_input_first_entry() {
        let n = 10;
        let a = BandedWindow::tridiagonal(0, &vec![0.0; n], &vec![1.0; n - 1], Side::HalfLine).unwrap();
        let b = pi_star(&a, &cov2()).unwrap();
        assert!((b.get(1, 0) - 0.75).abs() < 1e-15);
        assert!(b.is_self_adjoint());
    }

    #[test]
    fn lambda_initial_values() {
        let l = lambda_sequence(&[1.0; 5], &cov2()).unwrap();
        assert!((l[0] - 3.0).abs() < 1e-15);
        assert!((l[1] - 10f64.sqrt()).abs() < 1e-15);
        assert!((l[2] - (89.0f64 / 9.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lambda_with_vanishing_couplings() {
        let l = lambda_sequence(&[1e-200; 6], &cov2()).unwrap();
        assert!(l.iter().all(|v| (v - 8f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn resolvent_identity_for_zero() {
        let a = BandedWindow::<f64>::zeros(0, 1, 0, Side::HalfLine);
        let z = Complex64::new(1.0, 1.0);
        assert!(resolvent_identity_residual(&a, &cov2(), z).unwrap() < 1e-15);
        let lhs = resolvent_entry(&pi_star(&a, &cov2()).unwrap(), z, 0, 0).unwrap();
        assert!((lhs + z / (z * z - 0.5)).norm() < 1e-15);
    }

    #[test]
    fn preimages_are_roots() {
        let cov = RationalCovering::new(3.0, 0.4).unwrap();
        for x in [Complex64::new(0.3, -1.2), Complex64::new(-5.0, 0.0)] {
            for v in cov.preimages(x) {
                assert!((cov.eval_c(v) - x).norm() < 1e-14);
            }
        }
        assert!((cov2().fixed_point() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn duality_small_window() {
        let a = BandedWindow::tridiagonal(0, &[0.1, -0.2, 0.3, 0.0, 0.05], &[0.9, 0.6, 1.1, 0.7], Side::HalfLine)
            .unwrap();
        let r = coefficient_duality_residual(&a, &cov2()).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn period_two_symmetric_case() {
        let w = period_two_rational(1.0, &cov2(), 0.0, 0, 10).unwrap();
        assert!((w.get(0, 2) - 0.25).abs() < 1e-15);
        assert_eq!(w.get(1, 3), 0.0);
        // λ⁽⁰⁾ = 0 forces one of the two off-diagonal values to vanish
        assert!((w.get(0, 1) * w.get(1, 2)).abs() < 1e-15);
    }

    #[test]
    fn period_two_infeasible() {
        assert!(matches!(
            period_two_rational(1.0, &cov2(), 2.0, 0, 10),
            Err(Error::NoRealSolution(_))
        ));
    }
}
