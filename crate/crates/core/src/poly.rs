//! Dense real polynomials in ascending coefficient order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    /// `coeffs[k]` multiplies `x^k`.
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// From coefficients listed highest degree first.
    pub fn from_descending(c: &[f64]) -> Self {
        Self::new(c.iter().rev().copied().collect())
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `x − a`.
    pub fn linear_root(a: f64) -> Self {
        Self::new(vec![-a, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::constant(0.0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Quotient of division by `x − a` (the remainder is dropped).
    pub fn deflate(&self, a: f64) -> Self {
        let m = self.degree();
        if m == 0 {
            return Self::constant(0.0);
        }
        let mut q = vec![0.0; m];
        let mut acc = 0.0;
        for k in (1..=m).rev() {
            acc = acc * a + self.coeffs[k];
            q[k - 1] = acc;
        }
        Self::new(q)
    }

    /// All complex roots from the companion matrix, each refined by Newton
    /// steps, ordered by real part.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let m = self.degree();
        let lead = self.leading();
        if lead == 0.0 || !lead.is_finite() {
            return Err(Error::InvalidInput("degenerate leading coefficient".into()));
        }
        if m == 0 {
            return Ok(Vec::new());
        }
        // roots at the origin are split off exactly; the companion matrix of
        // a nilpotent remainder would stall the eigenvalue iteration
        let zeros = self.coeffs.iter().take_while(|c| **c == 0.0).count();
        if zeros > 0 {
            let mut rest = Poly::new(self.coeffs[zeros..].to_vec()).roots()?;
            rest.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(zeros));
            rest.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            return Ok(rest);
        }
        let mut comp = DMatrix::<f64>::zeros(m, m);
        for i in 1..m {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..m {
            comp[(i, m - 1)] = -self.coeffs[i] / lead;
        }
        let dp = self.derivative();
        let schur = nalgebra::linalg::Schur::try_new(comp, 1e-15, 100_000)
            .ok_or_else(|| Error::NonConvergent("companion eigenvalue iteration stalled".into()))?;
        let mut roots: Vec<Complex64> = schur
            .complex_eigenvalues()
            .iter()
            .map(|&z| {
                let mut z = z;
                for _ in 0..3 {
                    let dz = dp.eval_c(z);
                    if dz.norm() == 0.0 {
                        break;
                    }
                    let step = self.eval_c(z) / dz;
                    if !step.is_finite() {
                        break;
                    }
                    z -= step;
                }
                z
            })
            .collect();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(roots)
    }

    /// Roots, required to be real up to a relative imaginary tolerance.
    pub fn real_roots(&self, tol: f64) -> Result<Vec<f64>> {
        let roots = self.roots()?;
        let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if let Some(z) = roots.iter().find(|z| z.im.abs() > tol * scale) {
            return Err(Error::NoRealSolution(format!("complex root {z}")));
        }
        Ok(roots.iter().map(|z| z.re).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_derivative() {
        let p = Poly::from_descending(&[1.0, 0.0, -6.0, 0.0]);
        assert_eq!(p.eval(2.0), -4.0);
        assert_eq!(p.derivative(), Poly::new(vec![-6.0, 0.0, 3.0]));
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn roots_of_cubic() {
        let p = Poly::from_descending(&[1.0, 0.0, -6.0, 0.0]);
        let r = p.real_roots(1e-12).unwrap();
        let s6 = 6f64.sqrt();
        assert!((r[0] + s6).abs() < 1e-14 && r[1].abs() < 1e-14 && (r[2] - s6).abs() < 1e-14);
    }

    #[test]
    fn complex_roots_detected() {
        let p = Poly::from_descending(&[1.0, 0.0, 1.0]);
        assert!(p.real_roots(1e-9).is_err());
        assert_eq!(p.roots().unwrap().len(), 2);
    }

    #[test]
    fn deflation_divides_exactly() {
        let p = Poly::linear_root(2.0).mul(&Poly::linear_root(-1.0)).mul(&Poly::linear_root(0.5));
        let q = p.deflate(2.0);
        let back = q.mul(&Poly::linear_root(2.0));
        for (a, b) in back.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
