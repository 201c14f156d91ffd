use crate::banded::JacobiCoeffs;
use crate::error::{Error, Result};

/// Which half-line the resolvent function refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolventSide {
    /// Sites `≤ s`: `r₋(z,s) = (q_s − z − p_s² r₋(z,s−1))⁻¹`.
    Minus,
    /// Sites `≥ s`: `r₊(z,s) = (q_s − z − p_{s+1}² r₊(z,s+1))⁻¹`.
    Plus,
}

/// 2×2 matrix acting on `(N, D)` with `r = N/D`.
type Mobius = [[f64; 2]; 2];

fn compose(a: &Mobius, b: &Mobius) -> Mobius {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Step `r ↦ 1/(q − z − p² r)` as a Möbius matrix.
fn step(p: f64, q: f64, z: f64) -> Mobius {
    [[0.0, 1.0], [-p * p, q - z]]
}

/// The attracting fixed point of `r ↦ (a r + b)/(c r + e)`.
fn attracting_fixed_point(m: &Mobius, z: f64) -> Result<f64> {
    let [[a, b], [c, e]] = *m;
    let det = a * e - b * c;
    let derivative = |r: f64| det / (c * r + e).powi(2);
    let candidates: Vec<f64> = if c == 0.0 {
        if e == a {
            return Err(Error::NonConvergent(format!("degenerate period map at z = {z}")));
        }
        vec![b / (e - a)]
    } else {
        let (qa, qb, qc) = (c, e - a, -b);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Err(Error::NonConvergent(format!("z = {z} lies in the spectrum")));
        }
        let sq = disc.sqrt();
        // numerically stable pair of roots
        let sgn = if qb >= 0.0 { 1.0 } else { -1.0 };
        let t = -0.5 * (qb + sgn * sq);
        if t == 0.0 {
            vec![0.0]
        } else {
            vec![t / qa, qc / t]
        }
    };
    candidates
        .into_iter()
        .filter(|r| r.is_finite())
        .map(|r| (r, derivative(r).abs()))
        .filter(|(_, g)| *g < 1.0 - 1e-12)
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(r, _)| r)
        .ok_or_else(|| Error::NonConvergent(format!("no attracting fixed point at z = {z} (spectral edge)")))
}

/// Resolvent function `⟨s|(J_∓ − z)⁻¹|s⟩` of the half-line restriction of `j`
/// to the sites `≤ s` (minus side) or `≥ s` (plus side), for real `z` off the
/// spectrum.
///
/// Periodic data is solved exactly through the fixed point of one period of the
/// continued-fraction recursion; the attracting fixed point is the one reached
/// by truncated continued fractions, hence the Herglotz branch. Finite data is
/// treated as the operator itself: the recursion starts at the end of the data.
pub fn half_line_resolvent(j: &JacobiCoeffs, z: f64, s: i64, side: ResolventSide) -> Result<f64> {
    match j.period() {
        Some(per) => {
            let per = per as i64;
            let mut m: Mobius = [[1.0, 0.0], [0.0, 1.0]];
            match side {
                ResolventSide::Minus => {
                    // r₋(s) = f_s ∘ f_{s−1} ∘ … ∘ f_{s−P+1}(r₋(s−P))
                    for k in (s - per + 1)..=s {
                        let f = step(j.p_at(k).unwrap(), j.q_at(k).unwrap(), z);
                        m = compose(&f, &m);
                    }
                }
                ResolventSide::Plus => {
                    for k in (s..s + per).rev() {
                        let g = step(j.p_at(k + 1).unwrap(), j.q_at(k).unwrap(), z);
                        m = compose(&g, &m);
                    }
                }
            }
            attracting_fixed_point(&m, z)
        }
        None => {
            let sites = j.sites();
            if !sites.contains(&s) {
                return Err(Error::InvalidInput(format!("site {s} outside the stored data {sites:?}")));
            }
            let mut r = 0.0;
            let run: Box<dyn Iterator<Item = i64>> = match side {
                ResolventSide::Minus => Box::new(sites.start..=s),
                ResolventSide::Plus => Box::new((s..sites.end).rev()),
            };
            for k in run {
                let p = match side {
                    ResolventSide::Minus => j.p_at(k),
                    ResolventSide::Plus => j.p_at(k + 1),
                }
                .unwrap_or(0.0);
                let den = j.q_at(k).unwrap() - z - p * p * r;
                if den == 0.0 {
                    return Err(Error::Singular { row: (k - sites.start) as usize });
                }
                r = 1.0 / den;
            }
            Ok(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banded::{resolvent_entry, Side};
    use num_complex::Complex64;

    #[test]
    fn zero_couplings_give_diagonal_inverse() {
        let j = JacobiCoeffs::finite(0, vec![1e-300, 1e-300], vec![0.5, -1.0, 2.0]).unwrap();
        let r = half_line_resolvent(&j, 3.0, 1, ResolventSide::Minus).unwrap();
        assert!((r - 1.0 / (-1.0 - 3.0)).abs() < 1e-15);
    }

    #[test]
    fn free_resolvent_at_minus_two() {
        let j = JacobiCoeffs::free(0.5).unwrap();
        let r = half_line_resolvent(&j, -2.0, 0, ResolventSide::Minus).unwrap();
        assert!((r - (4.0 - 2.0 * 3f64.sqrt())).abs() < 1e-15);
        let rp = half_line_resolvent(&j, -2.0, 7, ResolventSide::Plus).unwrap();
        assert!((rp - r).abs() < 1e-15);
    }

    #[test]
    fn inside_spectrum_fails() {
        let j = JacobiCoeffs::free(0.5).unwrap();
        assert!(half_line_resolvent(&j, 0.3, 0, ResolventSide::Minus).is_err());
    }

    #[test]
    fn periodic_matches_long_truncation() {
        let j = JacobiCoeffs::periodic(vec![0.3, 0.4], vec![0.1, -0.2]).unwrap();
        let n = 400usize;
        for &z in &[-10.0, 4.5, 1.3] {
            for s in 0..2i64 {
                // minus side: sites s−n+1 ..= s, entry at the last site
                let w = j.window(s - n as i64 + 1, n, Side::WholeLine).unwrap();
                let exact = resolvent_entry(&w, Complex64::new(z, 0.0), n - 1, n - 1).unwrap().re;
                let r = half_line_resolvent(&j, z, s, ResolventSide::Minus).unwrap();
                assert!((r - exact).abs() < 1e-10, "minus z={z} s={s}: {r} vs {exact}");
                let w = j.window(s, n, Side::WholeLine).unwrap();
                let exact = resolvent_entry(&w, Complex64::new(z, 0.0), 0, 0).unwrap().re;
                let r = half_line_resolvent(&j, z, s, ResolventSide::Plus).unwrap();
                assert!((r - exact).abs() < 1e-10, "plus z={z} s={s}: {r} vs {exact}");
            }
        }
    }

    #[test]
    fn finite_data_matches_banded_solve() {
        let j = JacobiCoeffs::finite(3, vec![0.5, 0.9, 0.2], vec![0.1, 0.3, -0.4, 0.8]).unwrap();
        let w = j.window(3, 4, Side::HalfLine).unwrap();
        let r = half_line_resolvent(&j, 2.5, 6, ResolventSide::Minus).unwrap();
        let exact = resolvent_entry(&w, Complex64::new(2.5, 0.0), 3, 3).unwrap().re;
        assert!((r - exact).abs() < 1e-14);
        let r = half_line_resolvent(&j, 2.5, 3, ResolventSide::Plus).unwrap();
        let exact = resolvent_entry(&w, Complex64::new(2.5, 0.0), 0, 0).unwrap().re;
        assert!((r - exact).abs() < 1e-14);
    }
}
