//! Brute-force search for solutions of the renormalization equation among
//! period-two operators, used to check that the algorithmic branches are the
//! only ones.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::branch::enumerate_branches;
use super::ExpandingPolynomial;
use crate::banded::JacobiCoeffs;
use crate::error::{Error, Result};

type CMobius = [[Complex64; 2]; 2];

fn compose(a: &CMobius, b: &CMobius) -> CMobius {
    let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn step(p: f64, q: f64, z: Complex64) -> CMobius {
    let one = Complex64::new(1.0, 0.0);
    [[Complex64::new(0.0, 0.0), one], [Complex64::new(-p * p, 0.0), q - z]]
}

fn attracting(m: &CMobius) -> Result<Complex64> {
    let [[a, b], [c, e]] = *m;
    let det = a * e - b * c;
    let roots = if c.norm() == 0.0 {
        vec![b / (e - a)]
    } else {
        let qb = e - a;
        let sq = (qb * qb + 4.0 * c * b).sqrt();
        vec![(-qb + sq) / (2.0 * c), (-qb - sq) / (2.0 * c)]
    };
    roots
        .into_iter()
        .filter(|r| r.is_finite())
        .map(|r| (r, (det / (c * r + e).powu(2)).norm()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .filter(|(_, g)| *g < 1.0)
        .map(|(r, _)| r)
        .ok_or_else(|| Error::NonConvergent("no attracting fixed point".into()))
}

/// `⟨0|(J − z)⁻¹|j⟩` for `j = 0 ..= reach` of periodic `J`, Im z ≠ 0.
fn periodic_green_row(j: &JacobiCoeffs, z: Complex64, reach: usize) -> Result<Vec<Complex64>> {
    let per = j.period().ok_or_else(|| Error::InvalidInput("periodic data required".into()))? as i64;
    let p = |k: i64| j.p_at(k).unwrap();
    let q = |k: i64| j.q_at(k).unwrap();
    let id = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];

    // r₊(k) for sites ≥ k, starting from the fixed point at k = reach + 1
    let top = reach as i64 + 1;
    let mut m = id;
    for k in top..top + per {
        m = compose(&m, &step(p(k + 1), q(k), z));
    }
    let mut r_plus = vec![Complex64::new(0.0, 0.0); reach + 2];
    r_plus[reach + 1] = attracting(&m)?;
    for k in (1..=reach).rev() {
        r_plus[k] = 1.0 / (q(k as i64) - z - p(k as i64 + 1).powi(2) * r_plus[k + 1]);
    }

    let mut m = id;
    for k in (-per..0).rev() {
        m = compose(&m, &step(p(k), q(k), z));
    }
    let r_minus = attracting(&m)?;

    let g00 = 1.0 / (q(0) - z - p(0).powi(2) * r_minus - p(1).powi(2) * r_plus[1]);
    let mut row = vec![g00];
    for k in 1..=reach {
        let prev = row[k - 1];
        row.push(-p(k as i64) * r_plus[k] * prev);
    }
    Ok(row)
}

/// Period-two operator of the scan: block `[[q₀, p₁], [p₁, −q₀]]` joined by
/// `p̃/p₁`.
fn candidate(p1: f64, q0: f64, p_tilde: f64) -> Result<JacobiCoeffs> {
    JacobiCoeffs::periodic(vec![p_tilde / p1, p1], vec![q0, -q0])
}

/// Residual of the renormalization equation restricted to the entries
/// `(0,0)` and `(0,2)` of the compressed resolvent, maximized over `zs`.
fn equation_residual(
    p1: f64,
    q0: f64,
    p_tilde: f64,
    t: &ExpandingPolynomial,
    zs: &[Complex64],
) -> f64 {
    if !(p1 > 0.0) || !p1.is_finite() || !q0.is_finite() {
        return f64::INFINITY;
    }
    let Ok(j) = candidate(p1, q0, p_tilde) else {
        return f64::INFINITY;
    };
    let jt = JacobiCoeffs::free(p_tilde).unwrap();
    let mut worst = 0.0f64;
    for &z in zs {
        let (Ok(g), Ok(gt)) = (periodic_green_row(&j, z, 2), periodic_green_row(&jt, t.poly().eval_c(z), 1)) else {
            return f64::INFINITY;
        };
        let f = t.derivative().eval_c(z) / 2.0;
        worst = worst.max((g[0] - f * gt[0]).norm()).max((g[2] - f * gt[1]).norm());
    }
    worst
}

/// Plain Nelder–Mead in two variables.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64, max_iter: usize) -> ([f64; 2], f64) {
    let mut simplex = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut vals = simplex.map(&f);
    for _ in 0..max_iter {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        let size = (simplex[1][0] - simplex[0][0]).abs().max((simplex[1][1] - simplex[0][1]).abs())
            .max((simplex[2][0] - simplex[0][0]).abs().max((simplex[2][1] - simplex[0][1]).abs()));
        if size < 1e-14 {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along = |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                vals[2] = fe;
            } else {
                simplex[2] = xr;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = xr;
            vals[2] = fr;
        } else {
            let xc = if fr < vals[2] { along(-0.5) } else { along(0.5) };
            let fc = f(xc);
            if fc < vals[2].min(fr) {
                simplex[2] = xc;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        (simplex[0][0] + simplex[k][0]) / 2.0,
                        (simplex[0][1] + simplex[k][1]) / 2.0,
                    ];
                    vals[k] = f(simplex[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best], vals[best])
}

/// A point of the `(p₁, q₀)` plane together with its equation residual.
#[derive(Debug, Clone, Serialize)]
pub struct ScanSolution {
    pub p1: f64,
    pub q0: f64,
    pub residual: f64,
    /// Sign vector of the constructed branch at this point, if any.
    pub branch: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub grid: usize,
    pub evaluations: usize,
    pub local_minima: usize,
    pub threshold: f64,
    pub constructed: Vec<ScanSolution>,
    pub found: Vec<ScanSolution>,
    /// Solutions below the threshold that match no constructed branch.
    pub extra: usize,
    /// Constructed branches the scan failed to locate.
    pub missed: usize,
}

/// Scans `T(z) = z² − λ` over period-two candidates `J` for the free `J̃`
/// with coupling `p̃`.
///
/// The grid covers `p₁ ∈ [p̃/√λ, √λ]`, `q₀ ∈ [−√λ, √λ]`; these bounds follow
/// from the diagonal of `T(J) = J̃` on block sites. Every grid-local minimum
/// seeds a Nelder–Mead refinement, and refined points below `threshold` are
/// compared with the constructed branches.
pub fn completeness_scan_quadratic(
    lambda: f64,
    p_tilde: f64,
    grid: usize,
    z_probes: &[Complex64],
    threshold: f64,
) -> Result<ScanReport> {
    if grid < 3 || z_probes.is_empty() || z_probes.iter().any(|z| z.im == 0.0) {
        return Err(Error::InvalidInput("scan needs grid >= 3 and non-real probes".into()));
    }
    let t = ExpandingPolynomial::quadratic(lambda, 2.0 * p_tilde)?;
    let jt = JacobiCoeffs::free(p_tilde)?;

    let constructed: Vec<ScanSolution> = enumerate_branches(&jt, &t, -4..4)
        .into_iter()
        .map(|b| {
            let w = b.window?;
            let site = (-w.offset()) as usize;
            let (p1, q0) = (w.get(site, site + 1), w.get(site, site));
            Ok(ScanSolution {
                p1,
                q0,
                residual: equation_residual(p1, q0, p_tilde, &t, z_probes),
                branch: Some(b.delta.to_string()),
            })
        })
        .collect::<Result<_>>()?;

    let root = lambda.sqrt();
    let (plo, phi) = (p_tilde / root, root);
    let h = [(phi - plo) / (grid - 1) as f64, 2.0 * root / (grid - 1) as f64];
    let point = |i: usize, k: usize| [plo + i as f64 * h[0], -root + k as f64 * h[1]];
    let values: Vec<f64> = (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let [p1, q0] = point(idx / grid, idx % grid);
            equation_residual(p1, q0, p_tilde, &t, z_probes)
        })
        .collect();
    let at = |i: usize, k: usize| values[i * grid + k];

    let mut seeds = Vec::new();
    for i in 0..grid {
        for k in 0..grid {
            let v = at(i, k);
            let is_min = (i.saturating_sub(1)..(i + 2).min(grid))
                .flat_map(|a| (k.saturating_sub(1)..(k + 2).min(grid)).map(move |b| (a, b)))
                .all(|(a, b)| at(a, b) >= v);
            if is_min && v.is_finite() {
                seeds.push((i, k, v));
            }
        }
    }
    seeds.sort_by(|x, y| x.2.total_cmp(&y.2));
    let local_minima = seeds.len();

    let refined: Vec<([f64; 2], f64)> = seeds
        .par_iter()
        .map(|&(i, k, _)| {
            nelder_mead(
                |x| equation_residual(x[0], x[1], p_tilde, &t, z_probes),
                point(i, k),
                0.5 * h[0].min(h[1]),
                4000,
            )
        })
        .collect();

    let mut found: Vec<ScanSolution> = Vec::new();
    for (x, r) in refined {
        if r >= threshold || found.iter().any(|s| (s.p1 - x[0]).abs() + (s.q0 - x[1]).abs() < 1e-5) {
            continue;
        }
        let branch = constructed
            .iter()
            .find(|c| (c.p1 - x[0]).abs() + (c.q0 - x[1]).abs() < 1e-5)
            .and_then(|c| c.branch.clone());
        found.push(ScanSolution { p1: x[0], q0: x[1], residual: r, branch });
    }
    let extra = found.iter().filter(|s| s.branch.is_none()).count();
    let missed = constructed
        .iter()
        .filter(|c| !found.iter().any(|s| s.branch == c.branch))
        .count();
    Ok(ScanReport {
        grid,
        evaluations: values.len(),
        local_minima,
        threshold,
        constructed,
        found,
        extra,
        missed,
    })
}
