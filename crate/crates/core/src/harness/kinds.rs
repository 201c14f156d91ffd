use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{measure_csv, parse_params, table_csv, Comparison, Context, ExperimentKind, HarnessError};
use crate::banded::{
    band_mul, cholesky_upper, cyclic_moments, eigenvalues, interior_eigenvalues, BandedWindow, JacobiCoeffs, Side,
};
use crate::cmv::{build_cmv, five_diagonal_check, schur_flow, LaxProjection, VerblunskySeq};
use crate::covering::{equivalent, sigma_infinity, validate, BranchingData};
use crate::error::{Error, Result};
use crate::polynomial::{
    assemble_renormalized, branch_overlaps, completeness_scan_quadratic, darboux, darboux_lipschitz,
    dual_delta_check, empirical_lipschitz, enumerate_branches, magic_formula_residual, period_two_polynomial,
    quadratic_split, renorm_residuals, renormalize_periodic, ExpandingPolynomial, SignVector,
};
use crate::rational::{
    coefficient_duality_residual, iterate_moments, lambda_sequence, period_two_rational, pi_star,
    resolvent_identity_residual, RationalCovering,
};
use crate::transfer::{
    backward_orbit_sample, invariant_moments, moment_pushforward, pushforward, ruelle_apply, sample_moments,
    seeded_rng, weighted_orbit_moments, weighted_ruelle_eigen, CoveringMap, DiscreteMeasure, MomentVector,
};

type HResult<T> = std::result::Result<T, HarnessError>;

/// Runs `kind` and returns its parameters with defaults filled in.
pub(crate) fn run(kind: ExperimentKind, params: &Value, seed: u64, ctx: &mut Context) -> HResult<Value> {
    fn go<P: Serialize + for<'de> Deserialize<'de>>(
        params: &Value,
        seed: u64,
        ctx: &mut Context,
        f: fn(&P, u64, &mut Context) -> HResult<()>,
    ) -> HResult<Value> {
        let p: P = parse_params(params)?;
        f(&p, seed, ctx)?;
        Ok(serde_json::to_value(&p).expect("parameters serialize"))
    }
    match kind {
        ExperimentKind::ValidateCovering => go(params, seed, ctx, covering),
        ExperimentKind::RenormIterate => go(params, seed, ctx, renorm_iterate),
        ExperimentKind::RenormPoly => go(params, seed, ctx, renorm_poly),
        ExperimentKind::VerifyIdentities => go(params, seed, ctx, verify_identities),
        ExperimentKind::Cmv => go(params, seed, ctx, cmv),
        ExperimentKind::Measure => go(params, seed, ctx, measure),
        ExperimentKind::Lipschitz => go(params, seed, ctx, lipschitz),
    }
}

impl Context {
    /// Records a check whose value may be unavailable; an error becomes a
    /// failing NaN check and its message is kept under `errors`.
    fn at_most_or_err(&mut self, name: &str, value: Result<f64>, tol: f64) -> bool {
        match value {
            Ok(v) => self.at_most(name, v, tol),
            Err(e) => {
                self.result(&format!("errors.{name}"), e.to_string());
                self.at_most(name, f64::NAN, tol)
            }
        }
    }
}

fn cplx(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn schema<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> HarnessError + '_ {
    HarnessError::schema(what)
}

/// Period-two Jacobi data with `p ∈ p_range`, `q ∈ q_range`, entrywise
/// uniform.
fn random_period_two(rng: &mut ChaCha8Rng, p_range: [f64; 2], q_range: [f64; 2]) -> JacobiCoeffs {
    let mut draw = |r: [f64; 2]| r[0] + (r[1] - r[0]) * rng.gen::<f64>();
    let p = vec![draw(p_range), draw(p_range)];
    let q = vec![draw(q_range), draw(q_range)];
    JacobiCoeffs::periodic(p, q).expect("positive couplings")
}

/// Half-line tridiagonal window of `n` sites with `q ∈ [−1, 1]`,
/// `p ∈ [0.2, 1.2]`.
fn random_tridiagonal(rng: &mut ChaCha8Rng, n: usize) -> BandedWindow<f64> {
    let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0.2..1.2)).collect();
    BandedWindow::tridiagonal(0, &q, &p, Side::HalfLine).expect("consistent lengths")
}

fn sign_label(delta: &SignVector) -> String {
    delta.signs().iter().map(|s| if *s < 0 { '-' } else { '+' }).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// validate_covering

fn default_branching() -> Value {
    serde_json::json!({ "d": 2, "points": [[-1.0, 0.0], [1.0, 0.0]], "sigmas": [[2, 1], [2, 1]] })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoveringParams {
    #[serde(default = "default_branching")]
    branching: Value,
    #[serde(default)]
    compare_with: Option<Value>,
    #[serde(default)]
    expect_genus: Option<i64>,
    #[serde(default)]
    expect_infinity_orbits: Option<Vec<usize>>,
    #[serde(default)]
    expect_equivalent: Option<bool>,
}

impl Default for CoveringParams {
    fn default() -> Self {
        Self {
            branching: default_branching(),
            compare_with: None,
            expect_genus: None,
            expect_infinity_orbits: None,
            expect_equivalent: None,
        }
    }
}

fn covering(p: &CoveringParams, _seed: u64, ctx: &mut Context) -> HResult<()> {
    let b = BranchingData::from_json(&p.branching.to_string()).map_err(schema("branching"))?;
    let v = validate(&b);
    ctx.check("connected", f64::from(u8::from(v.connected)), 1.0, Comparison::AtLeast);
    let genus = v.genus.map_or(f64::NAN, |g| g as f64);
    match p.expect_genus {
        Some(g) => {
            ctx.at_most("genus_error", (genus - g as f64).abs(), 0.0);
        }
        None => ctx.report("genus", genus),
    }
    let mut orbits = v.infinity_orbits.clone();
    orbits.sort_unstable();
    match &p.expect_infinity_orbits {
        Some(expect) => {
            let mut e = expect.clone();
            e.sort_unstable();
            ctx.at_most("infinity_orbits_mismatch", f64::from(u8::from(e != orbits)), 0.0);
        }
        None => ctx.report("infinity_points", orbits.len() as f64),
    }
    if let Some(other) = &p.compare_with {
        let b2 = BranchingData::from_json(&other.to_string()).map_err(schema("compare_with"))?;
        let eq = equivalent(&b, &b2).map_err(schema("compare_with"))?;
        let eqf = f64::from(u8::from(eq));
        match p.expect_equivalent {
            Some(want) => {
                ctx.at_most("equivalence_mismatch", (eqf - f64::from(u8::from(want))).abs(), 0.0);
            }
            None => ctx.report("equivalent", eqf),
        }
    }
    ctx.result("validation", &v);
    ctx.result("sigma_infinity", sigma_infinity(&b).to_one_based());
    Ok(())
}

// ---------------------------------------------------------------------------
// renorm_iterate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RenormIterateParams {
    tau: f64,
    /// Defaults to `tau − 1`, the normalization with fixed point 1.
    c: Option<f64>,
    window: usize,
    steps: usize,
    moments_k: usize,
    z_grid: Vec<[f64; 2]>,
    random_inputs: usize,
    random_max_n: usize,
    random_taus: Vec<f64>,
    lambda_n: usize,
    /// Also run with this window and compare the leading 32×32 blocks after
    /// ten steps.
    consistency_window: Option<usize>,
}

impl Default for RenormIterateParams {
    fn default() -> Self {
        Self {
            tau: 2.0,
            c: None,
            window: 256,
            steps: 60,
            moments_k: 6,
            z_grid: vec![
                [-1.5, 0.5],
                [-1.0, 1.0],
                [-0.5, 0.25],
                [0.0, 1.0],
                [0.3, 0.1],
                [0.5, 2.0],
                [1.0, 0.5],
                [1.5, 1.0],
                [2.0, 0.3],
                [0.0, 3.0],
            ],
            random_inputs: 50,
            random_max_n: 12,
            random_taus: vec![1.5, 2.0, 5.0],
            lambda_n: 200,
            consistency_window: None,
        }
    }
}

/// Median of `e_{n+1}/e_n` over steps whose error is well above `floor`.
fn convergence_ratio(errors: &[f64], floor: f64) -> f64 {
    let mut r: Vec<f64> = errors
        .windows(2)
        .filter(|w| w[1] > floor && w[0] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    if r.is_empty() {
        return f64::NAN;
    }
    r.sort_by(f64::total_cmp);
    r[r.len() / 2]
}

fn renorm_iterate(p: &RenormIterateParams, seed: u64, ctx: &mut Context) -> HResult<()> {
    let cov = RationalCovering::new(p.tau, p.c.unwrap_or(p.tau - 1.0)).map_err(schema("tau/c"))?;
    if p.window < 16 || p.moments_k < 2 || p.z_grid.iter().any(|z| z[1] == 0.0) {
        return Err(HarnessError::Schema("need window >= 16, moments_k >= 2 and non-real z_grid".into()));
    }
    let map = CoveringMap::Rational(cov);

    let a0 = BandedWindow::<f64>::zeros(0, p.window, 1, Side::HalfLine);
    let moments = iterate_moments(&a0, &cov, p.steps, p.window, p.moments_k)
        .map_err(HarnessError::numeric("iterate_renorm"))?;
    let inv = invariant_moments(&map, p.moments_k).map_err(HarnessError::numeric("invariant_moments"))?;
    let errors: Vec<f64> = moments.iter().map(|m| (m.get(2) - inv.get(2)).abs()).collect();
    let last = moments.last().expect("at least the initial snapshot");
    ctx.at_most("m2_final_error", *errors.last().unwrap(), 1e-8);
    ctx.at_most(
        "m1_max",
        moments.iter().map(|m| (m.get(1) - inv.get(1)).abs()).fold(0.0, f64::max),
        1e-14,
    );
    ctx.at_most("moments_final_error", last.max_diff(&inv), 1e-8);
    let ratio = convergence_ratio(&errors, 1e-7);
    ctx.report("convergence_ratio", ratio);
    ctx.at_most("convergence_ratio_offset", (ratio - 1.0 / (2.0 * p.tau * p.tau)).abs(), 0.05);
    ctx.check(
        "hankel_min_eigenvalue",
        moments.iter().map(MomentVector::hankel_min_eigenvalue).fold(f64::INFINITY, f64::min),
        -1e-12,
        Comparison::AtLeast,
    );
    let rows: Vec<Vec<f64>> = moments
        .iter()
        .enumerate()
        .map(|(n, m)| std::iter::once(n as f64).chain(m.as_slice().iter().copied()).collect())
        .collect();
    let mut header = vec!["step".to_string()];
    header.extend((0..=p.moments_k).map(|k| format!("m{k}")));
    ctx.plot("moments", table_csv(&header, &rows));
    ctx.result("moments_per_step", moments.iter().map(MomentVector::as_slice).collect::<Vec<_>>());
    ctx.result("invariant_moments", inv.as_slice());

    // corrected resolvent identity on random finite inputs
    let mut rng = seeded_rng(seed, 1);
    let zs: Vec<Complex64> = p.z_grid.iter().copied().map(cplx).collect();
    let mut residuals = Vec::with_capacity(p.random_inputs);
    for i in 0..p.random_inputs {
        let n = rng.gen_range(1..=p.random_max_n.max(1));
        let a = random_tridiagonal(&mut rng, n);
        let tau = p.random_taus[i % p.random_taus.len().max(1)];
        let c = RationalCovering::normalized(tau).map_err(schema("random_taus"))?;
        let worst = zs
            .iter()
            .map(|&z| resolvent_identity_residual(&a, &c, z))
            .try_fold(0.0f64, |acc, r| r.map(|v| acc.max(v)));
        residuals.push(worst.map_err(HarnessError::numeric("resolvent_identity_max"))?);
    }
    ctx.at_most("resolvent_identity_max", residuals.iter().copied().fold(0.0, f64::max), 1e-11);
    ctx.result("residuals", &residuals);

    // λ-recursion against the Cholesky factor, p ≡ 1
    let n = p.lambda_n;
    let ones = vec![1.0; n];
    let lam = lambda_sequence(&ones, &cov).map_err(HarnessError::numeric("lambda_vs_cholesky"))?;
    let j = BandedWindow::tridiagonal(0, &vec![0.0; n + 1], &ones, Side::HalfLine).expect("lengths");
    let chol = band_mul(&j, &j)
        .and_then(|sq| cholesky_upper(&sq.shifted(cov.shift())))
        .map_err(HarnessError::numeric("lambda_vs_cholesky"))?;
    let diag: Vec<f64> = (0..n).map(|i| chol.get(i, i)).collect();
    ctx.at_most("lambda_vs_cholesky", max_abs_diff(&lam, &diag), 1e-12);
    ctx.result("lambda_head", &lam[..lam.len().min(5)]);

    if let Some(w2) = p.consistency_window {
        let steps = 10.min(p.steps);
        let first = crate::rational::iterate_renorm(&a0, &cov, steps, p.window);
        let a0b = BandedWindow::<f64>::zeros(0, w2, 1, Side::HalfLine);
        let second = crate::rational::iterate_renorm(&a0b, &cov, steps, w2);
        let diff = first.and_then(|f| {
            second.map(|s| {
                let (a, b) = (f.last().unwrap(), s.last().unwrap());
                (0..32)
                    .flat_map(|i| (0..32).map(move |j| (i, j)))
                    .map(|(i, j)| (a.get(i, j) - b.get(i, j)).abs())
                    .fold(0.0, f64::max)
            })
        });
        ctx.at_most_or_err("window_consistency", diff, 1e-10);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// renorm_poly

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JtSpec {
    p: Vec<f64>,
    q: Vec<f64>,
    #[serde(default)]
    period: Option<usize>,
}

impl JtSpec {
    fn build(&self) -> HResult<JacobiCoeffs> {
        if self.period.is_some_and(|per| per != self.p.len()) {
            return Err(HarnessError::Schema("jt.period differs from len(jt.p)".into()));
        }
        JacobiCoeffs::periodic(self.p.clone(), self.q.clone()).map_err(schema("jt"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RenormPolyParams {
    #[serde(rename = "T_coeffs")]
    t_coeffs: Vec<f64>,
    xi: f64,
    delta: Option<Vec<i8>>,
    /// Random period-two data (seeded) when absent.
    jt: Option<JtSpec>,
    window: usize,
    z_probes: Vec<[f64; 2]>,
    perturbation: f64,
    perturbation_probe: [f64; 2],
}

impl Default for RenormPolyParams {
    fn default() -> Self {
        Self {
            t_coeffs: vec![1.0, 0.0, -10.0],
            xi: 1.0,
            delta: None,
            jt: None,
            window: 400,
            z_probes: vec![[0.0, 3.0], [1.0, 1.0], [-2.0, 0.5]],
            perturbation: 1e-3,
            perturbation_probe: [3.1, 0.3],
        }
    }
}

const P_RANGE: [f64; 2] = [0.1, 0.4];
const Q_RANGE: [f64; 2] = [-0.2, 0.2];

fn block_range(window: usize, d: usize) -> std::ops::Range<i64> {
    let blocks = (window / d) as i64;
    -(blocks / 2)..blocks - blocks / 2
}

fn renorm_poly(p: &RenormPolyParams, seed: u64, ctx: &mut Context) -> HResult<()> {
    let t = ExpandingPolynomial::from_descending(&p.t_coeffs, p.xi).map_err(schema("T_coeffs"))?;
    let d = t.degree();
    if d < 2 || p.z_probes.is_empty() || p.z_probes.iter().any(|z| z[1] == 0.0) {
        return Err(HarnessError::Schema("need degree >= 2 and non-real z_probes".into()));
    }
    let jt = match &p.jt {
        Some(spec) => spec.build()?,
        None => random_period_two(&mut seeded_rng(seed, 2), P_RANGE, Q_RANGE),
    };
    let deltas = match &p.delta {
        Some(s) => {
            let delta = SignVector::new(s.clone()).map_err(schema("delta"))?;
            if delta.len() != d - 1 {
                return Err(HarnessError::Schema(format!("delta needs {} signs", d - 1)));
            }
            vec![delta]
        }
        None => SignVector::enumerate(d - 1),
    };
    ctx.report("regime_margin", t.regime_margin());
    ctx.result("jt", &jt);
    let s_range = block_range(p.window, d);
    let zs: Vec<Complex64> = p.z_probes.iter().copied().map(cplx).collect();
    let mut tables = serde_json::Map::new();
    for delta in &deltas {
        let label = sign_label(delta);
        let is_minus = delta.signs().iter().all(|s| *s < 0);
        let built = assemble_renormalized(&jt, &t, delta, s_range.clone());
        ctx.scoped(&format!("branch[{label}]"), |ctx| -> HResult<()> {
            let valid = f64::from(u8::from(built.is_ok()));
            if is_minus {
                ctx.check("valid", valid, 1.0, Comparison::AtLeast);
            } else {
                ctx.report("valid", valid);
            }
            let j = match &built {
                Ok(j) => j,
                Err(e) => {
                    ctx.result("error", e.to_string());
                    return Ok(());
                }
            };
            let mut rows = Vec::new();
            let mut worst = [0.0f64; 3];
            for &z in &zs {
                let r = renorm_residuals(j, &jt, &t, z).map_err(HarnessError::numeric("renorm_residuals"))?;
                worst = [worst[0].max(r.eq_t01), worst[1].max(r.eq_re1), worst[2].max(r.eq_re2)];
                rows.push(serde_json::json!({ "z": [z.re, z.im], "eq_t01": r.eq_t01, "eq_re1": r.eq_re1, "eq_re2": r.eq_re2 }));
            }
            ctx.at_most("eq_t01", worst[0], 1e-8);
            ctx.at_most("eq_re1", worst[1], 1e-8);
            ctx.at_most("eq_re2", worst[2], 1e-8);
            tables.insert(label.clone(), Value::Array(rows));

            let periodic = renormalize_periodic(&jt, &t, delta).and_then(|per| {
                let w = per.window(j.offset(), j.n(), Side::WholeLine)?;
                let expect_period = d * jt.period().unwrap_or(1);
                Ok((j.max_diff_on(&w, j.offset()..j.offset() + j.n() as i64), per.period(), expect_period))
            });
            match periodic {
                Ok((diff, period, expect)) => {
                    ctx.at_most("period_check", diff, 1e-14);
                    let period = period.map_or(f64::NAN, |v| v as f64);
                    ctx.at_most("output_period_error", (period - expect as f64).abs(), 0.0);
                }
                Err(e) => {
                    ctx.at_most_or_err("period_check", Err(e), 1e-14);
                }
            }

            let sites: Vec<Vec<f64>> = (0..j.n())
                .map(|i| {
                    let next = if i + 1 < j.n() { j.get(i, i + 1) } else { f64::NAN };
                    vec![(j.offset() + i as i64) as f64, j.get(i, i), next]
                })
                .collect();
            ctx.plot("coefficients", table_csv(&["site".into(), "q".into(), "p_next".into()], &sites));

            if is_minus {
                // a diagonal entry on a block site, probed near the spectrum
                let mut jp = j.clone();
                let mid = (j.n() / d / 2) * d;
                jp.set(mid, mid, jp.get(mid, mid) + p.perturbation);
                let r = renorm_residuals(&jp, &jt, &t, cplx(p.perturbation_probe))
                    .map_err(HarnessError::numeric("perturbation"))?;
                ctx.check("perturbation.eq_t01", r.eq_t01, 1e-4, Comparison::AtLeast);
            }
            if deltas.len() > 1 {
                ctx.at_most_or_err("dual_delta", dual_delta_check(&jt, &t, delta, s_range.clone()), 1e-8);
            }
            Ok(())
        })?;
    }
    ctx.result("residual_tables", Value::Object(tables));
    if deltas.len() > 1 {
        let branches = enumerate_branches(&jt, &t, s_range);
        let overlaps = branch_overlaps(&branches, 2 * d);
        if let Some(min) = overlaps.iter().map(|o| o.distance_unshifted).reduce(f64::min) {
            ctx.report("min_branch_distance", min);
        }
        ctx.result("branch_overlaps", overlaps);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// cmv

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CmvParams {
    n: usize,
    max_modulus: f64,
    /// Explicit coefficients `[re, im]`; random (seeded) when absent.
    verblunsky: Option<Vec<[f64; 2]>>,
    real: bool,
    dt: f64,
    t_final: f64,
    record_every: usize,
    projection: LaxProjection,
    compare_projections: bool,
}

impl Default for CmvParams {
    fn default() -> Self {
        Self {
            n: 64,
            max_modulus: 0.7,
            verblunsky: None,
            real: false,
            dt: 1e-3,
            t_final: 1.0,
            record_every: 100,
            projection: LaxProjection::Skew,
            compare_projections: false,
        }
    }
}

fn random_verblunsky(rng: &mut ChaCha8Rng, n: usize, max_modulus: f64, real: bool) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            if real {
                [rng.gen_range(-max_modulus..max_modulus), 0.0]
            } else {
                let r = max_modulus * rng.gen::<f64>().sqrt();
                let th = std::f64::consts::TAU * rng.gen::<f64>();
                [r * th.cos(), r * th.sin()]
            }
        })
        .collect()
}

fn cmv(p: &CmvParams, seed: u64, ctx: &mut Context) -> HResult<()> {
    if !(p.max_modulus > 0.0 && p.max_modulus < 1.0) {
        return Err(HarnessError::Schema("max_modulus must lie in (0, 1)".into()));
    }
    let pairs = match &p.verblunsky {
        Some(v) => v.clone(),
        None => random_verblunsky(&mut seeded_rng(seed, 3), p.n, p.max_modulus, p.real),
    };
    let a = VerblunskySeq::from_pairs(0, &pairs).map_err(schema("verblunsky"))?;
    let c = build_cmv(&a).map_err(schema("verblunsky"))?;
    ctx.at_most("unitarity_defect", c.unitarity_defect, 1e-13);
    let rep = five_diagonal_check(&c, &a).map_err(HarnessError::numeric("five_diagonal"))?;
    ctx.at_most("five_diagonal.max_residual", rep.max_residual(), 1e-12);
    ctx.at_most("five_diagonal.outside_band", rep.outside_band, 1e-13);
    ctx.at_most("five_diagonal.superdiagonals", rep.superdiagonals as f64, 2.0);
    ctx.result("five_diagonal", rep);
    ctx.result("verblunsky", &pairs);

    if !(p.t_final > 0.0) || !(p.dt > 0.0) {
        return Err(HarnessError::Schema("dt and t_final must be positive".into()));
    }
    let steps = (p.t_final / p.dt).round() as usize;
    let mut projections = vec![p.projection];
    if p.compare_projections {
        projections.push(match p.projection {
            LaxProjection::Skew => LaxProjection::UpperHalfDiagonal,
            LaxProjection::UpperHalfDiagonal => LaxProjection::Skew,
        });
    }
    for (idx, proj) in projections.into_iter().enumerate() {
        let scope = if idx == 0 { "flow".to_string() } else { "flow_alternative".to_string() };
        let traj = schur_flow(&a, p.dt, steps, p.record_every, proj).map_err(|e| match e {
            Error::InvalidInput(_) => HarnessError::Schema(e.to_string()),
            other => HarnessError::Numeric { check: format!("{scope}.spectral_drift"), source: other },
        })?;
        ctx.scoped(&scope, |ctx| {
            ctx.at_most("spectral_drift", traj.max_drift(), 1e-6);
            ctx.at_most("unitarity_defect", traj.max_unitarity_defect(), 1e-8);
            let mut buf = Vec::new();
            traj.write_csv(&mut buf).expect("in-memory csv");
            ctx.plot("trajectory", buf);
            ctx.result("trajectory", &traj);
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// measure

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum MapSpec {
    Rational {
        tau: f64,
        #[serde(default)]
        c: Option<f64>,
    },
    Polynomial {
        #[serde(rename = "T_coeffs")]
        t_coeffs: Vec<f64>,
        #[serde(default = "one")]
        xi: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl MapSpec {
    fn build(&self) -> HResult<CoveringMap> {
        Ok(match self {
            Self::Rational { tau, c } => CoveringMap::Rational(
                RationalCovering::new(*tau, c.unwrap_or(tau - 1.0)).map_err(schema("map"))?,
            ),
            Self::Polynomial { t_coeffs, xi } => {
                CoveringMap::Polynomial(ExpandingPolynomial::from_descending(t_coeffs, *xi).map_err(schema("map"))?)
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MeasureParams {
    map: MapSpec,
    n_samples: usize,
    n_steps: usize,
    moments_k: usize,
    sigma_bound: f64,
    bins: usize,
    /// Histogram range; the invariant hull `E₀` when absent.
    range: Option<[f64; 2]>,
    duality_degree: usize,
    duality_atoms: usize,
    pushforward_levels: usize,
    tree_depth: usize,
    tree_tol: f64,
    orbit_samples: usize,
    orbit_steps: usize,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self {
            map: MapSpec::Rational { tau: 2.0, c: None },
            n_samples: 1_000_000,
            n_steps: 40,
            moments_k: 4,
            sigma_bound: 3.0,
            bins: 64,
            range: None,
            duality_degree: 12,
            duality_atoms: 16,
            pushforward_levels: 12,
            tree_depth: 14,
            tree_tol: 1e-12,
            orbit_samples: 400_000,
            orbit_steps: 16,
        }
    }
}

/// The hull `[α, β]` of the Julia set, which is `E₀`.
fn invariant_hull(map: &CoveringMap) -> Result<(f64, f64)> {
    match map {
        CoveringMap::Rational(c) => {
            let b = c.fixed_point();
            Ok((-b, b))
        }
        CoveringMap::Polynomial(t) => t.julia_hull(),
    }
}

fn measure(p: &MeasureParams, seed: u64, ctx: &mut Context) -> HResult<()> {
    let map = p.map.build()?;
    if p.n_samples < 2 || p.n_steps == 0 || p.bins == 0 {
        return Err(HarnessError::Schema("need n_samples >= 2, n_steps >= 1, bins >= 1".into()));
    }
    let (lo, hi) = invariant_hull(&map).map_err(HarnessError::numeric("hull"))?;
    let scale = lo.abs().max(hi.abs()).max(1.0);
    ctx.result("hull", [lo, hi]);

    // exact duality ∫(𝓛f)dν = ∫f d(𝓛*ν) on random atoms in the hull
    let mut rng = seeded_rng(seed, 4);
    let atoms: Vec<f64> = (0..p.duality_atoms.max(1)).map(|_| rng.gen_range(lo..hi)).collect();
    let masses: Vec<f64> = (0..atoms.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let nu = DiscreteMeasure::from_masses(atoms, masses).map_err(HarnessError::numeric("duality"))?;
    let mu = pushforward(&nu, &map).map_err(HarnessError::numeric("duality"))?;
    let mut worst = 0.0f64;
    for k in 0..=p.duality_degree {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        let lf = ruelle_apply(&map, &crate::poly::Poly::new(coeffs));
        let lhs = nu.integrate(|x| lf.eval(x));
        let rhs = mu.integrate(|x| x.powi(k as i32));
        worst = worst.max((lhs - rhs).abs() / scale.powi(k as i32));
    }
    ctx.at_most("duality", worst, 1e-12);
    let via_moments = moment_pushforward(&nu.moments(p.duality_degree), &map)
        .map(|m| {
            m.as_slice()
                .iter()
                .zip(mu.moments(p.duality_degree).as_slice())
                .enumerate()
                .map(|(k, (a, b))| (a - b).abs() / scale.powi(k as i32))
                .fold(0.0, f64::max)
        });
    ctx.at_most_or_err("pushforward_moments", via_moments, 1e-12);

    // balanced-measure sampling
    let samples = backward_orbit_sample(&map, p.n_steps, p.n_samples, seed)
        .map_err(HarnessError::numeric("samples_outside_e1"))?;
    let slack = 1e-12 * scale;
    let inside = |x: f64| x >= lo - slack && x <= hi + slack;
    let (e1_lo, e1_hi) = (lo, hi);
    let outside = samples
        .iter()
        .filter(|&&x| !(inside(x) && (e1_lo - slack..=e1_hi + slack).contains(&map.eval(x))))
        .count();
    ctx.at_most("samples_outside_e1", outside as f64, 0.0);
    let inv = invariant_moments(&map, p.moments_k).map_err(HarnessError::numeric("invariant_moments"))?;
    let (means, errs) = sample_moments(&samples, p.moments_k);
    for k in 1..=p.moments_k {
        let z = (means[k] - inv.get(k)).abs() / errs[k];
        ctx.at_most(&format!("sample_m{k}_zscore"), z, p.sigma_bound);
    }
    ctx.check("invariant_hankel_min_eigenvalue", inv.hankel_min_eigenvalue(), -1e-12, Comparison::AtLeast);
    ctx.result("invariant_moments", inv.as_slice());
    ctx.result("sample_moments", &means);
    ctx.result("sample_std_errors", &errs);

    let (hlo, hhi) = p.range.map_or((lo, hi), |r| (r[0], r[1]));
    let width = (hhi - hlo) / p.bins as f64;
    let hist = crate::transfer::histogram(samples.iter().map(|&x| (x, 1.0 / samples.len() as f64)), p.bins, hlo, hhi);
    ctx.plot(
        "sample_histogram",
        measure_csv(hist.iter().enumerate().map(|(b, &w)| (hlo + (b as f64 + 0.5) * width, w))),
    );

    // 𝓛*ⁿ δ_{x₀}: the measure that the renormalized operators see
    let x0 = map.seed_point().map_err(HarnessError::numeric("pushforward_levels"))?;
    let mut level = DiscreteMeasure::dirac(x0);
    for _ in 0..p.pushforward_levels {
        level = pushforward(&level, &map).map_err(HarnessError::numeric("pushforward_levels"))?;
    }
    let level = level.canonical();
    ctx.plot("preimage_tree", measure_csv(level.support().iter().copied().zip(level.weights().iter().copied())));

    if let CoveringMap::Polynomial(t) = &map {
        let ncrit = t.critical_points().len();
        let balanced = weighted_ruelle_eigen(t, &vec![false; ncrit], p.tree_depth, p.tree_tol)
            .map_err(HarnessError::numeric("tree.balanced_moments"))?;
        ctx.at_most("tree.balanced_moments", balanced.sigma_1.moments(p.moments_k).max_diff(&inv), 1e-3);
        ctx.at_most("tree.balanced_rho_error", (balanced.rho_1 - t.degree() as f64).abs(), 1e-10);
        ctx.plot(
            "balanced_tree",
            measure_csv(balanced.sigma_1.support().iter().copied().zip(balanced.sigma_1.weights().iter().copied())),
        );
        let full = weighted_ruelle_eigen(t, &vec![true; ncrit], p.tree_depth, p.tree_tol)
            .map_err(HarnessError::numeric("tree.bowen_ruelle_vs_orbits"))?;
        let dt = t.derivative().clone();
        let weight = move |y: f64| 1.0 / dt.eval(y).powi(2);
        let (orbit, ess) = weighted_orbit_moments(&map, &weight, p.orbit_steps, p.orbit_samples, seed ^ 0x5eed, p.moments_k)
            .map_err(HarnessError::numeric("tree.bowen_ruelle_vs_orbits"))?;
        let tree = full.sigma_1.moments(p.moments_k);
        let gap = (0..=p.moments_k)
            .map(|k| (tree.get(k) - orbit[k]).abs() / scale.powi(k as i32))
            .fold(0.0, f64::max);
        ctx.at_most("tree.bowen_ruelle_vs_orbits", gap, 1e-2);
        ctx.report("tree.bowen_ruelle_rho", full.rho_1);
        ctx.report("tree.orbit_effective_samples", ess);
        ctx.report("tree.rho_split_1", balanced.rho_1);
        ctx.plot(
            "bowen_ruelle_tree",
            measure_csv(full.sigma_1.support().iter().copied().zip(full.sigma_1.weights().iter().copied())),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// lipschitz

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LipschitzParams {
    #[serde(rename = "T_coeffs")]
    t_coeffs: Vec<f64>,
    xi: f64,
    delta: Option<Vec<i8>>,
    pairs: usize,
    window: usize,
    p_range: [f64; 2],
    q_range: [f64; 2],
    darboux_rho: f64,
    darboux_n: usize,
}

impl Default for LipschitzParams {
    fn default() -> Self {
        Self {
            t_coeffs: vec![1.0, 0.0, -12.0],
            xi: 1.0,
            delta: None,
            pairs: 20,
            window: 200,
            p_range: P_RANGE,
            q_range: Q_RANGE,
            darboux_rho: 3.0,
            darboux_n: 300,
        }
    }
}

fn lipschitz(p: &LipschitzParams, seed: u64, ctx: &mut Context) -> HResult<()> {
    let t = ExpandingPolynomial::from_descending(&p.t_coeffs, p.xi).map_err(schema("T_coeffs"))?;
    let d = t.degree();
    let delta = match &p.delta {
        Some(s) => SignVector::new(s.clone()).map_err(schema("delta"))?,
        None => SignVector::all_minus(d - 1),
    };
    if delta.len() + 1 != d || p.p_range[0] <= 0.0 || p.pairs == 0 {
        return Err(HarnessError::Schema("delta length, p_range or pairs out of range".into()));
    }
    let mut rng = seeded_rng(seed, 5);
    let pairs: Vec<(JacobiCoeffs, JacobiCoeffs)> = (0..p.pairs)
        .map(|_| (random_period_two(&mut rng, p.p_range, p.q_range), random_period_two(&mut rng, p.p_range, p.q_range)))
        .collect();
    let min_t = t.critical_values().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let in_regime = min_t >= 10.0 * p.xi;
    ctx.result("contraction_regime", in_regime);
    let rep = empirical_lipschitz(&t, &pairs, &delta, block_range(p.window, d))
        .map_err(HarnessError::numeric("renorm.max_ratio"))?;
    if in_regime {
        ctx.check("renorm.max_ratio", rep.max_ratio, 1.0, Comparison::Below);
    } else {
        ctx.report("renorm.max_ratio", rep.max_ratio);
    }
    ctx.result("renorm.per_pair", &rep.per_pair);

    // Darboux: isospectrality on one input, Lipschitz ratios on all pairs
    let rho = p.darboux_rho;
    if !(rho > 2.0) {
        return Err(HarnessError::Schema("darboux_rho must exceed 2".into()));
    }
    let w = pairs[0].0.window(0, p.darboux_n, Side::HalfLine).expect("periodic data");
    let drift = darboux(&w, rho).map(|out| {
        let (a, b) = (eigenvalues(&w), eigenvalues(&out));
        max_abs_diff(&a, &b)
    });
    ctx.at_most_or_err("darboux.spectral_drift", drift, 1e-10);
    let drep = darboux_lipschitz(rho, &pairs, p.darboux_n).map_err(HarnessError::numeric("darboux.max_ratio"))?;
    ctx.check("darboux.max_ratio", drep.max_ratio, 0.0, Comparison::Finite);
    // with ‖J − J'‖ ≤ C‖J̃ − J̃'‖ for C(ρ) = 2ρC/(ρ−2), the implied constant
    ctx.report("darboux.implied_c", drep.max_ratio * (rho - 2.0) / (2.0 * rho));
    ctx.result("darboux.per_pair", &drep.per_pair);
    let rows: Vec<Vec<f64>> = rep
        .per_pair
        .iter()
        .zip(&drep.per_pair)
        .enumerate()
        .map(|(i, (a, b))| vec![i as f64, *a, *b])
        .collect();
    ctx.plot("ratios", table_csv(&["pair".into(), "renorm".into(), "darboux".into()], &rows));
    Ok(())
}

// ---------------------------------------------------------------------------
// verify_identities

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VerifyParams {
    /// Kinds whose default instances run as part of the suite.
    include: Vec<ExperimentKind>,
    /// Run the cross-module identities beyond the kinds' defaults.
    identities: bool,
    scan_grid: usize,
    dual_inputs: usize,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            include: ExperimentKind::ALL.into_iter().filter(|k| *k != ExperimentKind::VerifyIdentities).collect(),
            identities: true,
            scan_grid: 40,
            dual_inputs: 10,
        }
    }
}

fn verify_identities(p: &VerifyParams, seed: u64, ctx: &mut Context) -> HResult<()> {
    for &kind in &p.include {
        if kind == ExperimentKind::VerifyIdentities {
            return Err(HarnessError::Schema("verify_identities cannot include itself".into()));
        }
        let params = if kind == ExperimentKind::ValidateCovering {
            serde_json::json!({ "expect_genus": 0, "expect_infinity_orbits": [1, 1] })
        } else {
            serde_json::json!({})
        };
        log::info!("verify: {kind}");
        ctx.scoped(kind.name(), |ctx| run(kind, &params, seed, ctx))?;
    }
    if p.identities {
        ctx.scoped("identities", |ctx| identities(p, seed, ctx));
    }
    Ok(())
}

/// Checks that do not belong to a single experiment kind.
fn identities(p: &VerifyParams, seed: u64, ctx: &mut Context) {
    let mut rng = seeded_rng(seed, 6);
    let cov = RationalCovering::normalized(2.0).expect("tau = 2");

    let a = random_tridiagonal(&mut rng, 8);
    let m = pi_star(&a, &cov).and_then(|out| {
        let lhs = cyclic_moments(&out, 0, 12);
        let pushed = crate::rational::moment_pushforward(&MomentVector::new(cyclic_moments(&a, 0, 12))?, &cov)?;
        Ok(max_abs_diff(&lhs, pushed.as_slice()))
    });
    ctx.at_most_or_err("rational.moment_identity", m, 1e-11);
    let a = random_tridiagonal(&mut rng, 6);
    ctx.at_most_or_err("rational.coefficient_duality", coefficient_duality_residual(&a, &cov), 1e-10);

    let a = random_tridiagonal(&mut rng, 128);
    let spec = pi_star(&a, &cov).map(|out| {
        let base = eigenvalues(&a);
        interior_eigenvalues(&out, 8)
            .into_iter()
            .map(|y| base.iter().map(|x| (cov.eval(y) - x).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    });
    ctx.at_most_or_err("rational.pi_star_spectrum", spec, 1e-6);

    let xi2 = 1.0;
    let spec = period_two_rational(xi2, &cov, 0.1, 0, 400).map(|v| {
        let mut ends = [cov.real_preimages(-xi2), cov.real_preimages(xi2)].concat();
        ends.sort_by(f64::total_cmp);
        interior_eigenvalues(&v, 8)
            .into_iter()
            .map(|x| {
                if (ends[0]..=ends[1]).contains(&x) || (ends[2]..=ends[3]).contains(&x) {
                    0.0
                } else {
                    ends.iter().map(|e| (x - e).abs()).fold(f64::INFINITY, f64::min)
                }
            })
            .fold(0.0, f64::max)
    });
    ctx.at_most_or_err("rational.period_two_spectrum", spec, 1e-8);

    let (xi1, lam) = (1.2, 3.0);
    let res = period_two_polynomial(xi1, lam, 0.9).and_then(|j| {
        let w = j.window(-20, 40, Side::WholeLine)?;
        let sq = band_mul(&w, &w)?.shifted(-lam);
        let mut worst = 0.0f64;
        for i in 2..38 {
            for c in sq.col_range(i) {
                let expect = if c.abs_diff(i) == 2 { xi1 / 2.0 } else { 0.0 };
                worst = worst.max((sq.get(i, c) - expect).abs());
            }
        }
        Ok(worst)
    });
    ctx.at_most_or_err("polynomial.period_two_square", res, 1e-12);

    let free = JacobiCoeffs::free(1.0).expect("free");
    for (label, coeffs) in [("d2", vec![1.0, 0.0, -5.0]), ("d3", vec![1.0, 0.0, -6.0, 0.0])] {
        let r = ExpandingPolynomial::from_descending(&coeffs, 2.0).and_then(|t| {
            let j = assemble_renormalized(&free, &t, &SignVector::all_minus(t.degree() - 1), -40..40)?;
            magic_formula_residual(&j, &t)
        });
        ctx.at_most_or_err(&format!("polynomial.magic_formula_{label}"), r, 1e-9);
    }

    let t10 = ExpandingPolynomial::quadratic(10.0, 1.0).expect("expanding");
    let dual = (0..p.dual_inputs).try_fold(0.0f64, |acc, _| {
        let jt = random_period_two(&mut rng, P_RANGE, Q_RANGE);
        dual_delta_check(&jt, &t10, &SignVector::all_minus(1), -100..100).map(|r| acc.max(r))
    });
    ctx.at_most_or_err("polynomial.dual_delta", dual, 1e-8);

    let split = ExpandingPolynomial::quadratic(5.0, 1.0).and_then(|t| {
        let j = assemble_renormalized(&JacobiCoeffs::free(0.5)?, &t, &SignVector::all_minus(1), -20..20)?;
        Ok(quadratic_split(&j)?.residual)
    });
    ctx.at_most_or_err("polynomial.quadratic_split", split, 1e-13);

    let probes = [Complex64::new(0.5, 1.0), Complex64::new(-1.0, 0.5), Complex64::new(2.0, 2.0)];
    match completeness_scan_quadratic(5.0, 0.5, p.scan_grid, &probes, 1e-6) {
        Ok(scan) => {
            ctx.at_most("polynomial.scan_extra_solutions", scan.extra as f64, 0.0);
            ctx.at_most("polynomial.scan_missed_branches", scan.missed as f64, 0.0);
        }
        Err(e) => {
            ctx.at_most_or_err("polynomial.scan_extra_solutions", Err(e), 0.0);
        }
    }

    let cubic = ExpandingPolynomial::from_descending(&[1.0, 0.0, -6.0, 0.0], 1.0).map(|t| {
        let jt = random_period_two(&mut rng, P_RANGE, Q_RANGE);
        let branches = enumerate_branches(&jt, &t, -60..60);
        let valid = branches.iter().filter(|b| b.window.is_ok()).count();
        let min_dist = branch_overlaps(&branches, 6)
            .iter()
            .map(|o| o.distance_unshifted)
            .fold(f64::INFINITY, f64::min);
        let z = Complex64::new(0.5, 1.0);
        let worst = branches
            .iter()
            .filter_map(|b| b.window.as_ref().ok())
            .map(|j| renorm_residuals(j, &jt, &t, z).map_or(f64::NAN, |r| r.max()))
            .fold(0.0, f64::max);
        (valid, min_dist, worst)
    });
    match cubic {
        Ok((valid, min_dist, worst)) => {
            ctx.check("polynomial.cubic_valid_branches", valid as f64, 4.0, Comparison::AtLeast);
            ctx.check("polynomial.cubic_min_distance", min_dist, 1e-6, Comparison::AtLeast);
            ctx.at_most("polynomial.cubic_max_residual", worst, 1e-8);
        }
        Err(e) => {
            ctx.at_most_or_err("polynomial.cubic_max_residual", Err(e), 1e-8);
        }
    }
}
