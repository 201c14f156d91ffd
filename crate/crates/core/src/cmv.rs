//! CMV operators built from Verblunsky coefficients, and the first flow of
//! the Schur hierarchy.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::{BandedWindow, Side};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Verblunsky coefficients `a_k` on the sites `offset .. offset + len`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySeq {
    offset: i64,
    a: Vec<Complex64>,
}

impl VerblunskySeq {
    pub fn new(offset: i64, a: Vec<Complex64>) -> Result<Self> {
        if let Some((k, v)) = a.iter().enumerate().find(|(_, v)| !(v.norm() < 1.0)) {
            return Err(Error::InvalidInput(format!(
                "Verblunsky coefficient {} has modulus {} (must be < 1)",
                offset + k as i64,
                v.norm()
            )));
        }
        Ok(Self { offset, a })
    }

    /// Pairs `[re, im]`, the JSON input form.
    pub fn from_pairs(offset: i64, pairs: &[[f64; 2]]) -> Result<Self> {
        Self::new(offset, pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.a.iter().map(|z| [z.re, z.im]).collect()
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.a
    }

    /// `a_k` by local index.
    pub fn a(&self, k: usize) -> Complex64 {
        self.a[k]
    }

    pub fn rho(&self, k: usize) -> f64 {
        (1.0 - self.a[k].norm_sqr()).sqrt()
    }
}

/// Five-diagonal unitary window `𝔄 = 𝔄₀𝔄₁`.
#[derive(Debug, Clone)]
pub struct CmvWindow {
    pub window: BandedWindow<Complex64>,
    pub unitarity_defect: f64,
}

impl CmvWindow {
    /// `𝔄 + 𝔄*`, the matrix of `z = v + 1/v`.
    pub fn z_matrix(&self) -> BandedWindow<Complex64> {
        let mut out = self.window.clone();
        let adj = self.window.adjoint();
        for i in 0..out.n() {
            for j in out.col_range(i) {
                out.set(i, j, self.window.get(i, j) + adj.get(i, j));
            }
        }
        out
    }
}

/// Factor with 2×2 blocks `A_k = [[ā_k, ρ_k], [ρ_k, −a_k]]` on the sites
/// `(k, k+1)` for every `k` of the given parity; uncovered edge sites get 1.
fn factor(a: &VerblunskySeq, parity: usize) -> DMatrix<Complex64> {
    let n = a.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    let mut k = 0;
    while k < n {
        if k % 2 == parity && k + 1 < n {
            let (ak, rk) = (a.a(k), a.rho(k));
            m[(k, k)] = ak.conj();
            m[(k, k + 1)] = Complex64::new(rk, 0.0);
            m[(k + 1, k)] = Complex64::new(rk, 0.0);
            m[(k + 1, k + 1)] = -ak;
            k += 2;
        } else {
            m[(k, k)] = ONE;
            k += 1;
        }
    }
    m
}

fn unitarity_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

fn check_layout(a: &VerblunskySeq) -> Result<()> {
    if a.len() < 6 || a.len() % 2 != 0 {
        return Err(Error::Shape(format!("CMV window needs an even length >= 6, got {}", a.len())));
    }
    if a.offset().rem_euclid(2) != 0 {
        return Err(Error::Shape("CMV window must start at an even site".into()));
    }
    Ok(())
}

/// `𝔄 = 𝔄₀𝔄₁` with `𝔄₀` carrying the even blocks and `𝔄₁` the odd ones. The
/// two edge rows at each end touch the unit boundary entries of `𝔄₁` and are
/// marked inexact.
pub fn build_cmv(a: &VerblunskySeq) -> Result<CmvWindow> {
    check_layout(a)?;
    let m = factor(a, 0) * factor(a, 1);
    let unitarity_defect = unitarity_defect(&m);
    let window = BandedWindow::from_dense(a.offset(), &m, 2, Side::WholeLine)?.with_margins(2, 2);
    Ok(CmvWindow { window, unitarity_defect })
}

/// Residuals of the closed-form entries of `𝔄 + 𝔄*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiveDiagonalReport {
    /// `−2 Re(a_j ā_{j−1})` on the diagonal.
    pub diagonal: f64,
    /// `ρ_j(a_{j+1} − a_{j−1})` (conjugated on even `j`) on the first
    /// off-diagonal.
    pub first: f64,
    /// `ρ_j ρ_{j+1}` on the second off-diagonal.
    pub second: f64,
    /// Largest entry of `𝔄` outside the five central diagonals.
    pub outside_band: f64,
    /// Number of nonvanishing superdiagonals of `𝔄`.
    pub superdiagonals: usize,
    pub unitarity_defect: f64,
}

impl FiveDiagonalReport {
    pub fn max_residual(&self) -> f64 {
        self.diagonal.max(self.first).max(self.second)
    }
}

pub fn five_diagonal_check(c: &CmvWindow, a: &VerblunskySeq) -> Result<FiveDiagonalReport> {
    let n = a.len();
    if c.window.n() != n || c.window.offset() != a.offset() {
        return Err(Error::Shape("window and coefficients cover different sites".into()));
    }
    let z = c.z_matrix();
    let rows = c.window.exact_rows();
    let (mut diagonal, mut first, mut second) = (0.0f64, 0.0f64, 0.0f64);
    for j in rows.clone() {
        if j == 0 || j + 2 >= n {
            continue;
        }
        let expect_d = -2.0 * (a.a(j) * a.a(j - 1).conj()).re;
        diagonal = diagonal.max((z.get(j, j) - expect_d).norm());
        let f = a.rho(j) * (a.a(j + 1) - a.a(j - 1));
        let global_odd = (a.offset() + j as i64).rem_euclid(2) == 1;
        let expect_f = if global_odd { f } else { f.conj() };
        first = first.max((z.get(j, j + 1) - expect_f).norm());
        let expect_s = a.rho(j) * a.rho(j + 1);
        second = second.max((z.get(j, j + 2) - expect_s).norm());
    }
    let dense = factor(a, 0) * factor(a, 1);
    let mut outside_band = 0.0f64;
    let mut nonzero = [false; 3];
    for i in 0..n {
        for j in 0..n {
            let v = dense[(i, j)].norm();
            if j > i + 2 || i > j + 2 {
                outside_band = outside_band.max(v);
            } else if j > i && v > 1e-14 {
                nonzero[j - i] = true;
            }
        }
    }
    Ok(FiveDiagonalReport {
        diagonal,
        first,
        second,
        outside_band,
        superdiagonals: nonzero.iter().filter(|b| **b).count(),
        unitarity_defect: c.unitarity_defect,
    })
}

/// The projection `( )₊` in the Lax equation `𝔄̇ = [(𝔄 + 𝔄*)₊, 𝔄]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaxProjection {
    /// Strictly upper part minus strictly lower part; anti-Hermitian.
    #[default]
    Skew,
    /// Strictly upper part plus half the diagonal.
    UpperHalfDiagonal,
}

fn project(m: &DMatrix<Complex64>, p: LaxProjection) -> DMatrix<Complex64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| match p {
        LaxProjection::Skew if j > i => m[(i, j)],
        LaxProjection::Skew if j < i => -m[(i, j)],
        LaxProjection::UpperHalfDiagonal if j > i => m[(i, j)],
        LaxProjection::UpperHalfDiagonal if j == i => 0.5 * m[(i, j)],
        _ => ZERO,
    })
}

fn lax_rhs(a: &DMatrix<Complex64>, p: LaxProjection) -> DMatrix<Complex64> {
    let b = project(&(a + a.adjoint()), p);
    &b * a - a * &b
}

fn unit_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let ev = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 100_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::NonConvergent("eigenvalues of the evolved window".into()))?;
    Ok(ev.iter().copied().collect())
}

/// Symmetric Hausdorff distance of two finite point sets in the plane.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Sampled Schur-flow trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct SchurTrajectory {
    pub projection: LaxProjection,
    pub times: Vec<f64>,
    /// Re-extracted coefficients at each recorded time.
    #[serde(skip)]
    pub coefficients: Vec<Vec<Complex64>>,
    pub unitarity_defect: Vec<f64>,
    /// Hausdorff distance of the current spectrum to the initial one.
    pub spectral_drift: Vec<f64>,
}

impl SchurTrajectory {
    pub fn max_drift(&self) -> f64 {
        self.spectral_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.unitarity_defect.iter().copied().fold(0.0, f64::max)
    }

    /// Columns `t, re_a0, im_a0, …, unitarity_defect, spectral_drift`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        let mut wr = csv::Writer::from_writer(out);
        let n = self.coefficients.first().map_or(0, Vec::len);
        let mut header = vec!["t".to_string()];
        for k in 0..n {
            header.push(format!("re_a{k}"));
            header.push(format!("im_a{k}"));
        }
        header.push("unitarity_defect".into());
        header.push("spectral_drift".into());
        wr.write_record(&header).map_err(io)?;
        for (idx, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:?}")];
            for z in &self.coefficients[idx] {
                row.push(format!("{:?}", z.re));
                row.push(format!("{:?}", z.im));
            }
            row.push(format!("{:?}", self.unitarity_defect[idx]));
            row.push(format!("{:?}", self.spectral_drift[idx]));
            wr.write_record(&row).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Reads the coefficients back from a CMV-structured matrix, starting at the
/// top edge: `a_0 = conj 𝔄(0,0)` and
/// `ā_k = ρ_{k−1}X_k − ā_{k−1}𝔄(k,k)`, where `X_k = 𝔄(k,k−1)` on even and
/// `𝔄(k−1,k)` on odd sites (both equal `ρ_{k−1}ā_k` for an exact product).
///
/// The last site of a window carries only the unit boundary entry of `𝔄₁`,
/// so an `n`-site window determines `a_0 .. a_{n−2}`.
pub fn extract_verblunsky(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    let mut a = Vec::with_capacity(n - 1);
    a.push(m[(0, 0)].conj());
    for k in 1..n - 1 {
        let prev: Complex64 = a[k - 1];
        let rho = (1.0 - prev.norm_sqr()).max(0.0).sqrt();
        let x = if k % 2 == 0 { m[(k, k - 1)] } else { m[(k - 1, k)] };
        let abar = rho * x - prev.conj() * m[(k, k)];
        a.push(abar.conj());
    }
    a
}

/// RK4 integration of `𝔄̇ = [(𝔄 + 𝔄*)₊, 𝔄]` on the window, recording every
/// `record_every` steps (and the final state).
pub fn schur_flow(
    a: &VerblunskySeq,
    dt: f64,
    n_steps: usize,
    record_every: usize,
    projection: LaxProjection,
) -> Result<SchurTrajectory> {
    if !(dt > 0.0) || dt > 1e-2 {
        return Err(Error::InvalidInput(format!("time step must lie in (0, 1e-2], got {dt}")));
    }
    check_layout(a)?;
    let record_every = record_every.max(1);
    let mut m = factor(a, 0) * factor(a, 1);
    let spec0 = unit_eigenvalues(&m)?;
    let mut traj = SchurTrajectory {
        projection,
        times: Vec::new(),
        coefficients: Vec::new(),
        unitarity_defect: Vec::new(),
        spectral_drift: Vec::new(),
    };
    let record = |step: usize, m: &DMatrix<Complex64>, traj: &mut SchurTrajectory| -> Result<()> {
        let coeffs = extract_verblunsky(m);
        if let Some((index, z)) = coeffs.iter().enumerate().find(|(_, z)| z.norm() >= 1.0 - 1e-8) {
            return Err(Error::FlowLeftDomain { step, index, modulus: z.norm() });
        }
        traj.times.push(step as f64 * dt);
        traj.coefficients.push(coeffs);
        traj.unitarity_defect.push(unitarity_defect(m));
        traj.spectral_drift.push(hausdorff(&spec0, &unit_eigenvalues(m)?));
        Ok(())
    };
    record(0, &m, &mut traj)?;
    for step in 1..=n_steps {
        let k1 = lax_rhs(&m, projection);
        let k2 = lax_rhs(&(&m + &k1 * Complex64::new(dt / 2.0, 0.0)), projection);
        let k3 = lax_rhs(&(&m + &k2 * Complex64::new(dt / 2.0, 0.0)), projection);
        let k4 = lax_rhs(&(&m + &k3 * Complex64::new(dt, 0.0)), projection);
        m += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(dt / 6.0, 0.0);
        if step % record_every == 0 || step == n_steps {
            record(step, &m, &mut traj)?;
        }
    }
    Ok(traj)
}
