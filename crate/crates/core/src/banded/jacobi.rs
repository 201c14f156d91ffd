use serde::{Deserialize, Serialize};

use super::{BandedWindow, Side};
use crate::error::{Error, Result};

/// Coefficients of a Jacobi matrix `J|k⟩ = p_k|k−1⟩ + q_k|k⟩ + p_{k+1}|k+1⟩`.
///
/// `p_k > 0` couples sites `k−1` and `k`. Data is either periodic (indices
/// taken modulo the period) or a finite run of sites starting at `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiCoeffs {
    p: Vec<f64>,
    q: Vec<f64>,
    #[serde(default)]
    start: i64,
    #[serde(default)]
    period: Option<usize>,
}

impl JacobiCoeffs {
    /// Periodic data: `p[k]` is `p_k` for every index `≡ k` modulo the period.
    pub fn periodic(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::InvalidInput(format!(
                "periodic data needs len(p) = len(q) > 0, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        let period = p.len();
        let out = Self { p, q, start: 0, period: Some(period) };
        out.validate()?;
        Ok(out)
    }

    /// Finite run of sites `start .. start + q.len()`; `p[i]` couples sites
    /// `start + i` and `start + i + 1`.
    pub fn finite(start: i64, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if q.is_empty() || p.len() + 1 != q.len() {
            return Err(Error::InvalidInput(format!(
                "finite data needs len(p) = len(q) - 1, got {} and {}",
                p.len(),
                q.len()
            )));
        }
        let out = Self { p, q, start, period: None };
        out.validate()?;
        Ok(out)
    }

    /// The free operator `p ≡ p0`, `q ≡ 0`, as period-one data.
    pub fn free(p0: f64) -> Result<Self> {
        Self::periodic(vec![p0], vec![0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(per) = self.period {
            if self.p.len() != per || self.q.len() != per {
                return Err(Error::InvalidInput("periodic data length differs from period".into()));
            }
        }
        if let Some(bad) = self.p.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("coupling {bad} is not positive")));
        }
        if self.q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite diagonal entry".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    /// Index range of stored sites (finite data) or one period (periodic data).
    pub fn sites(&self) -> std::ops::Range<i64> {
        match self.period {
            Some(per) => 0..per as i64,
            None => self.start..self.start + self.q.len() as i64,
        }
    }

    pub fn q_at(&self, k: i64) -> Option<f64> {
        match self.period {
            Some(per) => Some(self.q[k.rem_euclid(per as i64) as usize]),
            None => {
                let i = k - self.start;
                (0..self.q.len() as i64).contains(&i).then(|| self.q[i as usize])
            }
        }
    }

    /// `p_k`, the coupling between `k−1` and `k`.
    pub fn p_at(&self, k: i64) -> Option<f64> {
        match self.period {
            Some(per) => Some(self.p[k.rem_euclid(per as i64) as usize]),
            None => {
                let i = k - self.start - 1;
                (0..self.p.len() as i64).contains(&i).then(|| self.p[i as usize])
            }
        }
    }

    /// Tridiagonal window on sites `lo .. lo + n`. All stored entries are the
    /// true entries, so the margins are zero.
    pub fn window(&self, lo: i64, n: usize, side: Side) -> Result<BandedWindow<f64>> {
        let mut q = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n.saturating_sub(1));
        for k in lo..lo + n as i64 {
            q.push(self.q_at(k).ok_or_else(|| {
                Error::InvalidInput(format!("site {k} outside the stored data"))
            })?);
            if k > lo {
                p.push(self.p_at(k).ok_or_else(|| {
                    Error::InvalidInput(format!("coupling {k} outside the stored data"))
                })?);
            }
        }
        BandedWindow::tridiagonal(lo, &q, &p, side)
    }

    /// Conjugation by the involution `|l⟩ ↦ |1−l⟩`: `q'_l = q_{1−l}` and
    /// `p'_l = p_{2−l}`.
    pub fn reflected(&self) -> Self {
        match self.period {
            Some(per) => {
                let ip = per as i64;
                let q = (0..ip).map(|l| self.q[(1 - l).rem_euclid(ip) as usize]).collect();
                let p = (0..ip).map(|l| self.p[(2 - l).rem_euclid(ip) as usize]).collect();
                Self { p, q, start: 0, period: Some(per) }
            }
            None => {
                let m = self.q.len() as i64;
                let end = self.start + m - 1;
                let new_start = 1 - end;
                let q = self.q.iter().rev().copied().collect();
                let p = self.p.iter().rev().copied().collect();
                Self { p, q, start: new_start, period: None }
            }
        }
    }

    /// Max-norm distance of the coefficient sequences over one common period.
    pub fn periodic_distance(&self, other: &Self) -> Option<f64> {
        let (a, b) = (self.period?, other.period?);
        let per = lcm(a, b) as i64;
        Some(
            (0..per)
                .map(|k| {
                    (self.p_at(k).unwrap() - other.p_at(k).unwrap())
                        .abs()
                        .max((self.q_at(k).unwrap() - other.q_at(k).unwrap()).abs())
                })
                .fold(0.0, f64::max),
        )
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }
    pub fn q(&self) -> &[f64] {
        &self.q
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
