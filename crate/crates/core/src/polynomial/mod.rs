//! Renormalization of Jacobi matrices under an expanding polynomial `T`.
//!
//! Given a periodic (or finite) Jacobi matrix `J̃` and a sign `δ_c = ±1` for
//! every critical point `c` of `T`, the algorithm produces a Jacobi matrix `J`
//! built from `d × d` blocks such that `V*(z − J)⁻¹V = (T′(z)/d)(T(z) − J̃)⁻¹`
//! with `V|k⟩ = |kd⟩`.

mod branch;
mod darboux;
mod period_two;
mod residuals;
mod resolvent;
mod scan;

pub use branch::{
    assemble_renormalized, block_at, block_from_resolvent, branch_overlaps, branch_targets,
    enumerate_branches, renormalize_periodic, Branch, BranchOverlap, JacobiBlock,
};
pub use darboux::{darboux, darboux_lipschitz, empirical_lipschitz, quadratic_split, LipschitzReport, QuadraticSplit};
pub use period_two::period_two_polynomial;
pub use residuals::{dual_delta_check, magic_formula_residual, renorm_residuals, Residuals};
pub use resolvent::{half_line_resolvent, ResolventSide};
pub use scan::{completeness_scan_quadratic, ScanReport, ScanSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;

/// A real monic polynomial with real, simple critical points.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandingPolynomial {
    t: Poly,
    dt: Poly,
    critical: Vec<f64>,
    critical_values: Vec<f64>,
    second: Vec<f64>,
    xi: f64,
}

impl ExpandingPolynomial {
    /// `coeffs` in ascending order; `xi > 0` bounds the spectrum of the
    /// operators the polynomial is applied to.
    pub fn new(t: Poly, xi: f64) -> Result<Self> {
        let d = t.degree();
        if d == 0 {
            return Err(Error::InvalidInput("polynomial must have positive degree".into()));
        }
        if (t.leading() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput(format!(
                "polynomial must be monic, leading coefficient is {}",
                t.leading()
            )));
        }
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::InvalidInput(format!("xi must be positive, got {xi}")));
        }
        let dt = t.derivative();
        let critical = if d >= 2 {
            dt.real_roots(1e-9).map_err(|_| {
                Error::InvalidInput("complex critical points: polynomial is not expanding".into())
            })?
        } else {
            Vec::new()
        };
        let ddt = dt.derivative();
        let scale = critical.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let mut second = Vec::with_capacity(critical.len());
        for (i, &c) in critical.iter().enumerate() {
            let s = ddt.eval(c);
            if s.abs() <= 1e-10 * (d * d) as f64 * scale.powi(d as i32 - 2) {
                return Err(Error::Unsupported(format!(
                    "degenerate critical point #{i} at {c} (T''(c) = 0)"
                )));
            }
            second.push(s);
        }
        let critical_values = critical.iter().map(|&c| t.eval(c)).collect();
        Ok(Self { t, dt, critical, critical_values, second, xi })
    }

    /// From coefficients listed highest degree first, as in configuration files.
    pub fn from_descending(coeffs: &[f64], xi: f64) -> Result<Self> {
        Self::new(Poly::from_descending(coeffs), xi)
    }

    /// `z² − λ`.
    pub fn quadratic(lambda: f64, xi: f64) -> Result<Self> {
        Self::new(Poly::new(vec![-lambda, 0.0, 1.0]), xi)
    }

    pub fn degree(&self) -> usize {
        self.t.degree()
    }
    pub fn poly(&self) -> &Poly {
        &self.t
    }
    pub fn derivative(&self) -> &Poly {
        &self.dt
    }
    pub fn critical_points(&self) -> &[f64] {
        &self.critical
    }
    pub fn critical_values(&self) -> &[f64] {
        &self.critical_values
    }
    /// `T″(c)` at each critical point.
    pub fn second_derivatives(&self) -> &[f64] {
        &self.second
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.t.eval(x)
    }

    /// Mean of the critical points, `−coef_{d−1}/d`.
    pub fn q(&self) -> f64 {
        -self.t.coeff(self.degree() - 1) / self.degree() as f64
    }

    /// `min |T(c)| − ξ`; positive in the expanding regime.
    pub fn regime_margin(&self) -> f64 {
        self.critical_values
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min)
            - self.xi
    }

    pub fn is_expanding(&self) -> bool {
        self.regime_margin() > 0.0
    }

    /// Smallest interval `[α, β]` containing the Julia set: `β` is the largest
    /// fixed point and `α` the leftmost point mapped into `{α, β}`.
    pub fn julia_hull(&self) -> Result<(f64, f64)> {
        let fixed = self.t.add(&Poly::new(vec![0.0, -1.0]));
        let beta = real_root_extreme(&fixed, true)?;
        let alpha = if self.degree() % 2 == 0 {
            real_root_extreme(&self.t.add(&Poly::constant(-beta)), false)?
        } else {
            real_root_extreme(&fixed, false)?
        };
        Ok((alpha, beta))
    }

    /// The preimage of `x` on the `i`-th monotone lap of `T` (laps ordered left
    /// to right and separated by the critical points).
    pub fn inverse_branch(&self, i: usize, x: f64) -> Result<f64> {
        let d = self.degree();
        if i >= d {
            return Err(Error::InvalidInput(format!("lap {i} of a degree-{d} polynomial")));
        }
        let f = |y: f64| self.t.eval(y) - x;
        let (mut lo, mut hi) = lap_bounds(&self.critical, i);
        if d == 1 {
            return Ok(x - self.t.coeff(0));
        }
        // Walk outwards from the finite end until the sign changes.
        if lo == f64::NEG_INFINITY {
            let fa = f(hi);
            let mut step = 1.0 + x.abs() + hi.abs();
            lo = hi - step;
            while fa != 0.0 && f(lo).signum() == fa.signum() {
                step *= 2.0;
                lo = hi - step;
                if step > 1e300 {
                    return Err(Error::NonRealBranch { x });
                }
            }
        }
        if hi == f64::INFINITY {
            let fa = f(lo);
            let mut step = 1.0 + x.abs() + lo.abs();
            hi = lo + step;
            while fa != 0.0 && f(hi).signum() == fa.signum() {
                step *= 2.0;
                hi = lo + step;
                if step > 1e300 {
                    return Err(Error::NonRealBranch { x });
                }
            }
        }
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() == fhi.signum() {
            return Err(Error::NonRealBranch { x });
        }
        Ok(safeguarded_newton(&f, |y| self.dt.eval(y), lo, hi, flo))
    }

    /// All `d` real preimages of `x`, ordered by lap.
    pub fn real_preimages(&self, x: f64) -> Result<Vec<f64>> {
        (0..self.degree()).map(|i| self.inverse_branch(i, x)).collect()
    }
}

fn lap_bounds(critical: &[f64], i: usize) -> (f64, f64) {
    let lo = if i == 0 { f64::NEG_INFINITY } else { critical[i - 1] };
    let hi = if i == critical.len() { f64::INFINITY } else { critical[i] };
    (lo, hi)
}

fn real_root_extreme(p: &Poly, largest: bool) -> Result<f64> {
    let roots = p.roots()?;
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let real = roots.iter().filter(|z| z.im.abs() <= 1e-9 * scale).map(|z| z.re);
    let pick = if largest {
        real.fold(f64::NEG_INFINITY, f64::max)
    } else {
        real.fold(f64::INFINITY, f64::min)
    };
    if pick.is_finite() {
        Ok(pick)
    } else {
        Err(Error::NoRealSolution("polynomial has no real root".into()))
    }
}

/// Root of `f` in `[lo, hi]` with `f(lo)` and `f(hi)` of opposite signs.
fn safeguarded_newton(
    f: &impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    flo: f64,
) -> f64 {
    let lo_neg = flo < 0.0;
    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fy = f(y);
        if fy == 0.0 {
            return y;
        }
        if (fy < 0.0) == lo_neg {
            lo = y;
        } else {
            hi = y;
        }
        let dy = df(y);
        let newton = y - fy / dy;
        let next = if dy != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - y).abs() <= 2.0 * f64::EPSILON * y.abs().max(1e-300) || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return next;
        }
        y = next;
    }
    y
}

/// One sign `δ_c ∈ {−1, +1}` per critical point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!("signs must be ±1, got {signs:?}")));
        }
        Ok(Self(signs))
    }

    /// `δ₋ = (−1, …, −1)`.
    pub fn all_minus(len: usize) -> Self {
        Self(vec![-1; len])
    }

    /// All `2^len` sign vectors, starting from `δ₋`, in binary order.
    pub fn enumerate(len: usize) -> Vec<Self> {
        (0..1usize << len)
            .map(|mask| Self((0..len).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect()))
            .collect()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<i8>> for SignVector {
    type Error = Error;
    fn try_from(v: Vec<i8>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SignVector> for Vec<i8> {
    fn from(s: SignVector) -> Self {
        s.0
    }
}

impl std::fmt::Display for SignVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<&str> = self.0.iter().map(|&s| if s > 0 { "+" } else { "-" }).collect();
        write!(f, "({})", parts.join(","))
    }
}
