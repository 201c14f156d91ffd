//! Closed-form period-two solutions for the quadratic polynomial and the
//! rational covering.
//!
//! ```bash
//! cargo run --release --example period_two_families
//! ```

use spectral_renorm::banded::{band_mul, interior_eigenvalues, Side};
use spectral_renorm::polynomial::period_two_polynomial;
use spectral_renorm::rational::{period_two_rational, RationalCovering};

fn main() -> spectral_renorm::Result<()> {
    let (xi, lam) = (1.2, 3.0);
    let j = period_two_polynomial(xi, lam, 0.9)?;
    println!("p = {:?}, q = {:?}", j.p(), j.q());
    let w = j.window(0, 12, Side::WholeLine)?;
    let sq = band_mul(&w, &w)?.shifted(-lam);
    println!("J² − λ row 5: {:?}", sq.col_range(5).map(|c| sq.get(5, c)).collect::<Vec<_>>());

    let cov = RationalCovering::normalized(2.0)?;
    let v = period_two_rational(1.0, &cov, 0.1, 0, 200)?;
    let ev = interior_eigenvalues(&v, 8);
    let image = ev.iter().map(|&x| cov.eval(x).abs()).fold(0.0, f64::max);
    println!("rational family: {} interior eigenvalues, max |π(x)| = {image:.10}", ev.len());
    Ok(())
}
