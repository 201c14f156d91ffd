//! Transfer operators of covering maps.
//!
//! For a degree-`d` covering `f`, the Ruelle operator averages a function over
//! preimages, `(𝓛g)(x) = (1/d) Σ_{f(y)=x} g(y)`, and its adjoint `𝓛*` splits
//! every atom of a measure into its preimages. The fixed point of `𝓛*` is the
//! balanced measure on the Julia set.

use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::polynomial::ExpandingPolynomial;
use crate::rational::RationalCovering;

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A finitely supported probability measure on the real line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let m = Self { support, weights };
        m.validate()?;
        Ok(m)
    }

    pub fn dirac(x: f64) -> Self {
        Self { support: vec![x], weights: vec![1.0] }
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        let n = points.len();
        Self::new(points, vec![w; n])
    }

    /// Normalizes nonnegative masses to total one.
    pub fn from_masses(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let total = compensated_sum(masses.iter().copied());
        if !(total > 0.0) {
            return Err(Error::InvalidInput("measure has no mass".into()));
        }
        Self::new(support, masses.into_iter().map(|m| m / total).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.len() != self.weights.len() {
            return Err(Error::Shape("support and weights differ in length".into()));
        }
        if self.support.is_empty() {
            return Err(Error::InvalidInput("empty measure".into()));
        }
        if self.support.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite support point".into()));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        let total = compensated_sum(self.weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(self.support.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    pub fn moments(&self, kmax: usize) -> MomentVector {
        let mut m = vec![0.0; kmax + 1];
        for (k, mk) in m.iter_mut().enumerate() {
            *mk = self.integrate(|x| x.powi(k as i32));
        }
        MomentVector(m)
    }

    /// Masses in `bins` equal bins over `[lo, hi]`; mass outside is dropped.
    pub fn histogram(&self, bins: usize, lo: f64, hi: f64) -> Vec<f64> {
        histogram(self.support.iter().copied().zip(self.weights.iter().copied()), bins, lo, hi)
    }

    /// Sorted by support point, with coincident points merged.
    pub fn canonical(&self) -> Self {
        let mut pairs: Vec<(f64, f64)> = self.support.iter().copied().zip(self.weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            if support.last() == Some(&x) {
                *weights.last_mut().unwrap() += w;
            } else {
                support.push(x);
                weights.push(w);
            }
        }
        Self { support, weights }
    }

    /// Writes `support,weight` rows with a header line.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_measure_csv(out, self.support.iter().copied().zip(self.weights.iter().copied()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let (mut support, mut weights) = (Vec::new(), Vec::new());
        for rec in rd.deserialize::<(f64, f64)>() {
            let (x, w) = rec.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
            support.push(x);
            weights.push(w);
        }
        Self::new(support, weights)
    }
}

/// Header-only output for an empty iterator.
pub fn write_measure_csv<W: Write>(out: W, rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    wr.write_record(["support", "weight"]).map_err(io)?;
    for (x, w) in rows {
        wr.write_record([format!("{x:?}"), format!("{w:?}")]).map_err(io)?;
    }
    wr.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

pub fn histogram(points: impl IntoIterator<Item = (f64, f64)>, bins: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut h = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for (x, w) in points {
        if x < lo || x > hi {
            continue;
        }
        let b = (((x - lo) / width) as usize).min(bins - 1);
        h[b] += w;
    }
    h
}

/// Moments `m_0 .. m_K` of a probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentVector(Vec<f64>);

impl MomentVector {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        match m.first() {
            Some(m0) if (m0 - 1.0).abs() <= 1e-12 => Ok(Self(m)),
            Some(m0) => Err(Error::InvalidInput(format!("m_0 = {m0}, expected 1"))),
            None => Err(Error::InvalidInput("empty moment vector".into())),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// Highest stored order `K`.
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hankel matrix `[m_{i+j}]`, `i, j ≤ K/2`.
    pub fn hankel_min_eigenvalue(&self) -> f64 {
        let r = self.order() / 2 + 1;
        let h = DMatrix::from_fn(r, r, |i, j| self.0[i + j]);
        SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Hankel positivity up to `tol` relative to the largest moment used.
    pub fn hankel_psd(&self, tol: f64) -> bool {
        let scale = self.0.iter().map(|v| v.abs()).fold(1.0, f64::max);
        self.hankel_min_eigenvalue() >= -tol * scale
    }
}

/// A covering map of the line whose transfer operators are studied.
#[derive(Debug, Clone)]
pub enum CoveringMap {
    Rational(RationalCovering),
    Polynomial(ExpandingPolynomial),
}

impl CoveringMap {
    pub fn degree(&self) -> usize {
        match self {
            Self::Rational(_) => 2,
            Self::Polynomial(t) => t.degree(),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Rational(r) => r.eval(y),
            Self::Polynomial(t) => t.eval(y),
        }
    }

    /// The real inverse branch with index `i`, branches ordered left to right.
    pub fn inverse_branch(&self, i: usize, x: f64) -> Result<f64> {
        match self {
            Self::Rational(r) => Ok(r.real_preimages(x)[i]),
            Self::Polynomial(t) => t.inverse_branch(i, x),
        }
    }

    /// A repelling fixed point in the Julia set: the positive fixed point of
    /// the rational map, the largest fixed point of the polynomial.
    pub fn seed_point(&self) -> Result<f64> {
        match self {
            Self::Rational(r) => Ok(r.fixed_point()),
            Self::Polynomial(t) => Ok(t.julia_hull()?.1),
        }
    }
}

/// All `d` solutions of `f(y) = x`, with multiplicity, ordered by real part.
pub fn preimages(cov: &CoveringMap, x: Complex64) -> Result<Vec<Complex64>> {
    match cov {
        CoveringMap::Rational(r) => Ok(r.preimages(x).to_vec()),
        CoveringMap::Polynomial(t) => {
            let p = t.poly();
            let d = p.degree();
            let lead = p.leading();
            if lead == 0.0 || !lead.is_finite() {
                return Err(Error::InvalidInput("degenerate leading coefficient".into()));
            }
            // companion matrix of T(y) − x over ℂ
            let mut comp = DMatrix::<Complex64>::zeros(d, d);
            for i in 1..d {
                comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..d {
                let ci = Complex64::new(p.coeff(i), 0.0) - if i == 0 { x } else { Complex64::new(0.0, 0.0) };
                comp[(i, d - 1)] = -ci / lead;
            }
            let mut roots: Vec<Complex64> = if d == 1 {
                vec![comp[(0, 0)]]
            } else {
                nalgebra::linalg::Schur::try_new(comp, 1e-15, 100_000)
                    .ok_or_else(|| Error::NonConvergent("preimage eigenvalue iteration stalled".into()))?
                    .eigenvalues()
                    .ok_or_else(|| Error::NonConvergent("preimage eigenvalues unavailable".into()))?
                    .iter()
                    .copied()
                    .collect()
            };
            let dp = t.derivative();
            for z in roots.iter_mut() {
                for _ in 0..3 {
                    let dz = dp.eval_c(*z);
                    let step = (p.eval_c(*z) - x) / dz;
                    if dz.norm() == 0.0 || !step.is_finite() {
                        break;
                    }
                    *z -= step;
                }
            }
            roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            Ok(roots)
        }
    }
}

/// `𝓛*ν`: every atom is replaced by its real preimages, each carrying `1/d`
/// of its weight.
pub fn pushforward(nu: &DiscreteMeasure, cov: &CoveringMap) -> Result<DiscreteMeasure> {
    let d = cov.degree();
    let mut support = Vec::with_capacity(nu.len() * d);
    let mut weights = Vec::with_capacity(nu.len() * d);
    for (&x, &w) in nu.support.iter().zip(&nu.weights) {
        for i in 0..d {
            support.push(cov.inverse_branch(i, x)?);
            weights.push(w / d as f64);
        }
    }
    Ok(DiscreteMeasure { support, weights })
}

/// Power sums `s_k(x) = Σ_{f(y)=x} y^k` for `k = 0 ..= kmax`, as polynomials
/// in `x`.
pub fn preimage_power_sums(cov: &CoveringMap, kmax: usize) -> Vec<Poly> {
    let mut s: Vec<Poly> = Vec::with_capacity(kmax + 1);
    match cov {
        CoveringMap::Rational(r) => {
            // preimages solve v² = (x/τ)v + c/τ
            let lin = Poly::new(vec![0.0, 1.0 / r.tau]);
            for k in 0..=kmax {
                let next = match k {
                    0 => Poly::constant(2.0),
                    1 => lin.clone(),
                    _ => lin.mul(&s[k - 1]).add(&s[k - 2].scale(r.c / r.tau)),
                };
                s.push(next);
            }
        }
        CoveringMap::Polynomial(t) => {
            // Newton's identities for the roots of T(y) − x; only e_d moves
            // with x
            let p = t.poly();
            let d = p.degree();
            let e: Vec<Poly> = (0..=d)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    if j == 0 {
                        Poly::constant(1.0)
                    } else if j < d {
                        Poly::constant(sign * p.coeff(d - j))
                    } else {
                        Poly::new(vec![sign * p.coeff(0), -sign])
                    }
                })
                .collect();
            for k in 0..=kmax {
                if k == 0 {
                    s.push(Poly::constant(d as f64));
                    continue;
                }
                let mut acc = Poly::constant(0.0);
                for j in 1..=k.min(d) {
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    let term = if j == k { e[j].scale(k as f64) } else { e[j].mul(&s[k - j]) };
                    acc = acc.add(&term.scale(sign));
                }
                s.push(acc);
            }
        }
    }
    s
}

/// `𝓛g` for a polynomial `g`: `(1/d) Σ_k g_k s_k`.
pub fn ruelle_apply(cov: &CoveringMap, g: &Poly) -> Poly {
    let s = preimage_power_sums(cov, g.degree());
    let mut acc = Poly::constant(0.0);
    for (k, sk) in s.iter().enumerate() {
        acc = acc.add(&sk.scale(g.coeff(k)));
    }
    acc.scale(1.0 / cov.degree() as f64)
}

/// Moments of `𝓛*ν` from those of `ν`: `m_k(𝓛*ν) = (1/d)∫ s_k dν`.
pub fn moment_pushforward(m: &MomentVector, cov: &CoveringMap) -> Result<MomentVector> {
    let kmax = m.order();
    let d = cov.degree() as f64;
    let s = preimage_power_sums(cov, kmax);
    let out = s
        .iter()
        .map(|sk| compensated_sum(sk.coeffs().iter().enumerate().map(|(j, a)| a * m.get(j))) / d)
        .collect();
    MomentVector::new(out)
}

/// Moments of the invariant measure `𝓛*μ = μ`, degree by degree: the
/// coefficient of `m_k` in its own equation is `a_kk/d < 1`, so each moment is
/// determined by the lower ones.
pub fn invariant_moments(cov: &CoveringMap, kmax: usize) -> Result<MomentVector> {
    let d = cov.degree() as f64;
    let s = preimage_power_sums(cov, kmax);
    let mut m = vec![1.0];
    for k in 1..=kmax {
        let sk = &s[k];
        let lower = compensated_sum((0..k).map(|j| sk.coeff(j) * m[j])) / d;
        let selfc = sk.coeff(k) / d;
        if (1.0 - selfc).abs() < 1e-14 {
            return Err(Error::NonConvergent(format!("moment {k} is not determined")));
        }
        m.push(lower / (1.0 - selfc));
    }
    MomentVector::new(m)
}

/// Number of independent random streams; fixed so that the output does not
/// depend on the thread count.
const SHARDS: usize = 64;

/// Random backward orbits from the seed fixed point: each sample applies
/// `n_steps` inverse branches chosen uniformly. Deterministic given `seed`.
pub fn backward_orbit_sample(cov: &CoveringMap, n_steps: usize, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    let x0 = cov.seed_point()?;
    let d = cov.degree();
    let per = n_samples.div_ceil(SHARDS);
    let shards: Vec<Vec<f64>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = per.min(n_samples.saturating_sub(shard * per));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let mut x = x0;
                for _ in 0..n_steps {
                    x = cov.inverse_branch(rng.gen_range(0..d), x)?;
                }
                out.push(x);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(shards.into_iter().flatten().collect())
}

/// Sample moments and their standard errors.
pub fn sample_moments(samples: &[f64], kmax: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len() as f64;
    (0..=kmax)
        .map(|k| {
            let mean = compensated_sum(samples.iter().map(|x| x.powi(k as i32))) / n;
            let var = compensated_sum(samples.iter().map(|x| (x.powi(k as i32) - mean).powi(2))) / (n - 1.0).max(1.0);
            (mean, (var / n).sqrt())
        })
        .unzip()
}

/// Moments of `(𝓛_A*)^n δ_{x₀}` normalized to mass one, estimated from uniform
/// random backward orbits weighted by `Π 1/A(y_k)²` along the orbit.
///
/// Self-normalized importance sampling: the `d^n` factor between uniform
/// branch choice and the full preimage sum cancels in the ratio. Returns
/// `(moments, effective_sample_size)`.
pub fn weighted_orbit_moments(
    cov: &CoveringMap,
    weight: &(dyn Fn(f64) -> f64 + Sync),
    n_steps: usize,
    n_samples: usize,
    seed: u64,
    kmax: usize,
) -> Result<(Vec<f64>, f64)> {
    let x0 = cov.seed_point()?;
    let d = cov.degree();
    let per = n_samples.div_ceil(SHARDS);
    let shards: Vec<Vec<(f64, f64)>> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = per.min(n_samples.saturating_sub(shard * per));
            let mut rng = seeded_rng(seed, shard as u64);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                let (mut x, mut log_w) = (x0, 0.0);
                for _ in 0..n_steps {
                    x = cov.inverse_branch(rng.gen_range(0..d), x)?;
                    log_w += weight(x).ln();
                }
                out.push((x, log_w));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = shards.into_iter().flatten().collect();
    let top = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = pts.iter().map(|p| (p.1 - top).exp()).collect();
    let total = compensated_sum(w.iter().copied());
    let ess = total * total / compensated_sum(w.iter().map(|v| v * v));
    let moments = (0..=kmax)
        .map(|k| compensated_sum(pts.iter().zip(&w).map(|(p, wi)| wi * p.0.powi(k as i32))) / total)
        .collect();
    Ok((moments, ess))
}

/// Eigen-pair of one weighted transfer operator on the preimage tree.
#[derive(Debug, Clone, Serialize)]
pub struct RuelleEigen {
    pub rho: f64,
    pub sigma: DiscreteMeasure,
    pub iterations: usize,
    pub tv_change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedRuelle {
    pub rho_1: f64,
    pub rho_2: f64,
    pub sigma_1: DiscreteMeasure,
    pub sigma_2: DiscreteMeasure,
    pub iterations: [usize; 2],
}

/// Upper bound on tree cells, `d^depth`.
const MAX_CELLS: usize = 1 << 22;
const MAX_ITER: usize = 10_000;

/// Eigen-measures of `(𝓛_A g)(x) = Σ_{T(y)=x} g(y)/A(y)²` for
/// `A₁ = Π_{c∈S}(z−c)` and `A₂ = d·Π_{c∉S}(z−c)`, so that `A₁A₂ = T′`.
///
/// `split[i]` puts critical point `i` into `S`. Measures are discretized on
/// the `d^depth` cells of the preimage tree of the Julia hull; the adjoint
/// moves the mass of a cell to its `d` preimage cells (the deepest symbol is
/// dropped), weighted at the cell's representative point. Power iteration
/// stops when successive normalized iterates differ by at most `tol` in total
/// variation.
pub fn weighted_ruelle_eigen(t: &ExpandingPolynomial, split: &[bool], depth: usize, tol: f64) -> Result<WeightedRuelle> {
    let crit = t.critical_points();
    if split.len() != crit.len() {
        return Err(Error::InvalidInput(format!(
            "split has {} entries for {} critical points",
            split.len(),
            crit.len()
        )));
    }
    let d = t.degree();
    let cells = d
        .checked_pow(depth as u32)
        .filter(|c| *c <= MAX_CELLS)
        .ok_or_else(|| Error::Unsupported(format!("depth {depth} exceeds the cell budget")))?;
    let cov = CoveringMap::Polynomial(t.clone());
    let x0 = cov.seed_point()?;

    // digit k of a cell index (base d, least significant first) is the k-th
    // inverse branch applied to the seed, so the most significant digit is
    // the outermost branch
    let reps: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|idx| {
            let mut x = x0;
            let mut rest = idx;
            let mut word = Vec::with_capacity(depth);
            for _ in 0..depth {
                word.push(rest % d);
                rest /= d;
            }
            for &i in &word {
                x = cov.inverse_branch(i, x)?;
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let a1 = |y: f64| crit.iter().zip(split).filter(|(_, s)| **s).map(|(c, _)| y - c).product::<f64>();
    let a2 = |y: f64| d as f64 * crit.iter().zip(split).filter(|(_, s)| !**s).map(|(c, _)| y - c).product::<f64>();

    let run = |weight: &(dyn Fn(f64) -> f64 + Sync)| -> Result<RuelleEigen> {
        // prepend branch i as the outermost digit and drop the innermost one
        let stride = cells / d;
        let child = |i: usize, w: usize| i * stride + w / d;
        let child_weight: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|c| weight(reps[c]))
            .collect();
        let mut sigma = vec![1.0 / cells as f64; cells];
        let mut rho = 0.0;
        let mut tv = f64::INFINITY;
        let mut iterations = 0;
        while iterations < MAX_ITER {
            iterations += 1;
            let mut next = vec![0.0; cells];
            for (w, &mass) in sigma.iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                for i in 0..d {
                    let c = child(i, w);
                    next[c] += child_weight[c] * mass;
                }
            }
            rho = compensated_sum(next.iter().copied());
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(Error::NonConvergent("transfer operator lost its mass".into()));
            }
            next.iter_mut().for_each(|v| *v /= rho);
            tv = 0.5 * compensated_sum(next.iter().zip(&sigma).map(|(a, b)| (a - b).abs()));
            sigma = next;
            if tv <= tol {
                break;
            }
        }
        if tv > tol {
            return Err(Error::NonConvergent(format!(
                "weighted transfer operator: TV change {tv} after {MAX_ITER} iterations"
            )));
        }
        let measure = DiscreteMeasure::from_masses(reps.clone(), sigma)?.canonical();
        Ok(RuelleEigen { rho, sigma: measure, iterations, tv_change: tv })
    };
    let w1 = |y: f64| 1.0 / a1(y).powi(2);
    let w2 = |y: f64| 1.0 / a2(y).powi(2);
    let e1 = run(&w1)?;
    let e2 = run(&w2)?;
    Ok(WeightedRuelle {
        rho_1: e1.rho,
        rho_2: e2.rho,
        sigma_1: e1.sigma,
        sigma_2: e2.sigma,
        iterations: [e1.iterations, e2.iterations],
    })
}

/// The generator for stream `stream` of an experiment seeded with `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
