use num_complex::Complex64;
use serde::Serialize;

use super::branch::assemble_renormalized;
use super::{ExpandingPolynomial, SignVector};
use crate::banded::{poly_eval, BandedLu, BandedWindow, JacobiCoeffs, Side};
use crate::error::{Error, Result};

/// Max-norm residuals of the three equivalent forms of the renormalization
/// equation, measured on interior sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    /// `V*(z−J)⁻¹V − (T′(z)/d)(T(z)−J̃)⁻¹`.
    pub eq_t01: f64,
    /// `V*T(J) − J̃V*`.
    pub eq_re1: f64,
    /// `V*[(T(z)−T(J))/(z−J)]V − (T′(z)/d)·I`.
    pub eq_re2: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.eq_t01.max(self.eq_re1).max(self.eq_re2)
    }
}

/// Residuals of `V|k⟩ = |kd⟩` intertwining `J` (a two-sided window) with `J̃`.
///
/// Only sites in the middle half of the window enter: resolvent entries there
/// are insensitive to the cut edges (exponential off-diagonal decay for
/// `Im z ≠ 0`), and polynomial entries are exact.
pub fn renorm_residuals(
    j: &BandedWindow<f64>,
    jt: &JacobiCoeffs,
    t: &ExpandingPolynomial,
    z: Complex64,
) -> Result<Residuals> {
    if z.im == 0.0 {
        return Err(Error::InvalidInput("z must be off the real axis".into()));
    }
    let d = t.degree() as i64;
    let (o, n) = (j.offset(), j.n() as i64);
    let k_lo = o.div_euclid(d) + i64::from(o.rem_euclid(d) != 0);
    let k_hi = (o + n - 1).div_euclid(d);
    if k_hi - k_lo < 8 {
        return Err(Error::InvalidInput("window too small for interior residuals".into()));
    }
    let jtw = jt.window(k_lo, (k_hi - k_lo + 1) as usize, Side::WholeLine)?;
    let interior: Vec<i64> = (k_lo..=k_hi)
        .filter(|k| {
            let site = k * d - o;
            site >= n / 4 && site < n - n / 4
        })
        .collect();
    if interior.is_empty() {
        return Err(Error::InvalidInput("no interior sites".into()));
    }
    let loc = |k: i64| (k * d - o) as usize;
    let tloc = |k: i64| (k - k_lo) as usize;

    let tz = t.poly().eval_c(z);
    let factor = t.derivative().eval_c(z) / d as f64;

    // (t01) with (J − z)⁻¹ on both sides: R(kd, ld) = (T′(z)/d)·R̃(k, l)
    let lu = BandedLu::factor(j, z)?;
    let lut = BandedLu::factor(&jtw, tz)?;
    let mut eq_t01 = 0.0f64;
    for &l in &interior {
        let col = lu.column(loc(l));
        let colt = lut.column(tloc(l));
        for &k in &interior {
            eq_t01 = eq_t01.max((col[loc(k)] - factor * colt[tloc(k)]).norm());
        }
    }

    // (re.1): row kd of T(J) equals row k of J̃ spread onto the sites md
    let tj = poly_eval(t.poly().coeffs(), j)?;
    let mut eq_re1 = 0.0f64;
    for &k in &interior {
        let row = loc(k);
        for col in tj.col_range(row) {
            let g = o + col as i64;
            let expect = if g.rem_euclid(d) == 0 { jtw.get_global(k, g / d) } else { 0.0 };
            eq_re1 = eq_re1.max((tj.get(row, col) - expect).abs());
        }
    }

    // (re.2): Q_z(w) = Σ_{k<d} w^k Σ_{i>k} t_i z^{i−1−k}
    let coeffs = t.poly().coeffs();
    let qz: Vec<Complex64> = (0..d as usize)
        .map(|k| {
            ((k + 1)..coeffs.len())
                .map(|i| coeffs[i] * z.powu((i - 1 - k) as u32))
                .sum()
        })
        .collect();
    let qj = poly_eval(&qz, &j.to_complex())?;
    let mut eq_re2 = 0.0f64;
    for &k in &interior {
        for &l in &interior {
            let expect = if k == l { factor } else { Complex64::new(0.0, 0.0) };
            eq_re2 = eq_re2.max((qj.get(loc(k), loc(l)) - expect).norm());
        }
    }
    Ok(Residuals { eq_t01, eq_re1, eq_re2 })
}

/// Interior max-norm of `T(J) − (S^d + S^{−d})`.
pub fn magic_formula_residual(j: &BandedWindow<f64>, t: &ExpandingPolynomial) -> Result<f64> {
    let d = t.degree();
    let tj = poly_eval(t.poly().coeffs(), j)?;
    let mut worst = 0.0f64;
    for i in tj.exact_rows() {
        for c in tj.col_range(i) {
            let expect = if c.abs_diff(i) == d { 1.0 } else { 0.0 };
            worst = worst.max((tj.get(i, c) - expect).abs());
        }
    }
    Ok(worst)
}

/// Residual of the reflection duality
/// `J(δ, J̃)(d−i, d−j) = J(−δ, J̃_τ)(i, j)`, with `J̃_τ` the conjugate of `J̃` by
/// `|l⟩ ↦ |1−l⟩`, over the middle half of the block range `s_range`.
pub fn dual_delta_check(
    jt: &JacobiCoeffs,
    t: &ExpandingPolynomial,
    delta: &SignVector,
    s_range: std::ops::Range<i64>,
) -> Result<f64> {
    let d = t.degree() as i64;
    let reflected = jt.reflected();
    let right = assemble_renormalized(&reflected, t, &delta.negated(), s_range.clone())?;
    let (s0, s1) = (s_range.start, s_range.end);
    let left = assemble_renormalized(jt, t, delta, (1 - s1)..(2 - s0))?;
    let n = right.n() as i64;
    let o = right.offset();
    let mut worst = 0.0f64;
    for i in (o + n / 4)..(o + n - n / 4) {
        for jj in i..=i + 1 {
            let a = right.get_global(i, jj);
            let b = left.get_global(d - i, d - jj);
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
