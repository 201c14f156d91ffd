use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{BandedWindow, Scalar, Side};
use crate::error::{Error, Result};

/// JSON form of a window. `diags[d + w][i]` holds `entry(i, i + d)`, padded
/// with zeros where the diagonal leaves the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc<T> {
    pub offset: i64,
    pub n: usize,
    pub w: usize,
    pub side: Side,
    #[serde(default)]
    pub exact_margin_top: usize,
    #[serde(default)]
    pub exact_margin_bottom: usize,
    pub diags: Vec<Vec<T>>,
}

impl<T: Scalar> From<&BandedWindow<T>> for WindowDoc<T> {
    fn from(a: &BandedWindow<T>) -> Self {
        let w = a.bandwidth() as i64;
        let diags = (-w..=w)
            .map(|d| {
                (0..a.n() as i64)
                    .map(|i| {
                        let j = i + d;
                        if j < 0 { T::zero() } else { a.get(i as usize, j as usize) }
                    })
                    .collect()
            })
            .collect();
        Self {
            offset: a.offset(),
            n: a.n(),
            w: a.bandwidth(),
            side: a.side(),
            exact_margin_top: a.margin_top(),
            exact_margin_bottom: a.margin_bottom(),
            diags,
        }
    }
}

impl<T: Scalar> TryFrom<WindowDoc<T>> for BandedWindow<T> {
    type Error = Error;

    fn try_from(doc: WindowDoc<T>) -> Result<Self> {
        if doc.diags.len() != 2 * doc.w + 1 || doc.diags.iter().any(|d| d.len() != doc.n) {
            return Err(Error::Shape(format!(
                "expected {} diagonals of length {}",
                2 * doc.w + 1,
                doc.n
            )));
        }
        if doc.n > 0 && doc.w >= doc.n {
            return Err(Error::Shape(format!("bandwidth {} too large for n = {}", doc.w, doc.n)));
        }
        let mut out = BandedWindow::zeros(doc.offset, doc.n, doc.w, doc.side);
        let w = doc.w as i64;
        for (k, diag) in doc.diags.iter().enumerate() {
            let d = k as i64 - w;
            for (i, &v) in diag.iter().enumerate() {
                let j = i as i64 + d;
                if j >= 0 && (j as usize) < doc.n {
                    out.set(i, j as usize, v);
                } else if v != T::zero() {
                    return Err(Error::Shape(format!("nonzero padding at row {i}, diagonal {d}")));
                }
            }
        }
        out.set_margins(doc.exact_margin_top, doc.exact_margin_bottom);
        Ok(out)
    }
}

impl<T: Scalar + Serialize + DeserializeOwned> BandedWindow<T> {
    pub fn to_json(&self) -> Result<String> {
        if self.data.iter().any(|v| !v.to_c64().is_finite()) {
            return Err(Error::InvalidInput("window holds non-finite entries".into()));
        }
        serde_json::to_string(&WindowDoc::from(self)).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: WindowDoc<T> = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        doc.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn round_trip_is_bit_exact() {
        let q: Vec<f64> = (0..7).map(|k| (k as f64 * 0.37).sin() / 3.0).collect();
        let p: Vec<f64> = (0..6).map(|k| 1.0 / (k as f64 + 3.0)).collect();
        let a = BandedWindow::tridiagonal(-3, &q, &p, Side::WholeLine).unwrap().with_margins(1, 2);
        let back = BandedWindow::<f64>::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn complex_round_trip() {
        let mut a = BandedWindow::<Complex64>::zeros(0, 3, 1, Side::HalfLine);
        a.set(0, 1, Complex64::new(0.1, -1.0 / 3.0));
        a.set(2, 1, Complex64::new(std::f64::consts::PI, 1e-300));
        let back = BandedWindow::<Complex64>::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn rejects_nan() {
        let a = BandedWindow::from_diagonal(0, &[f64::NAN], Side::HalfLine);
        assert!(a.to_json().is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let s = r#"{"offset":0,"n":1,"w":0,"side":"half_line","diags":[[1.0]],"extra":1}"#;
        assert!(BandedWindow::<f64>::from_json(s).is_err());
    }
}
