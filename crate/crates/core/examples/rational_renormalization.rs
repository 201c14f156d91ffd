//! Renormalization under the rational covering `π(v) = τv − c/v`.
//!
//! Starting from the zero operator, the iterates `A_{n+1} = π*(A_n)` have
//! cyclic moments that converge to those of the balanced measure of `π`.
//!
//! ```bash
//! cargo run --release --example rational_renormalization
//! ```

use num_complex::Complex64;
use spectral_renorm::banded::{BandedWindow, Side};
use spectral_renorm::rational::{
    iterate_moments, lambda_sequence, pi_star, resolvent_identity_residual, RationalCovering,
};
use spectral_renorm::transfer::{invariant_moments, CoveringMap};

fn main() -> spectral_renorm::Result<()> {
    let cov = RationalCovering::normalized(2.0)?;

    // π*(0) is the direct sum of 2×2 blocks with eigenvalues ±1/√2 = π⁻¹(0)
    let zero = BandedWindow::<f64>::zeros(0, 3, 1, Side::HalfLine);
    let once = pi_star(&zero, &cov)?;
    println!("π*(0) entry (0,1) = {:.12}, 1/√2 = {:.12}", once.get(0, 1), 0.5f64.sqrt());

    let window = 256;
    let a0 = BandedWindow::<f64>::zeros(0, window, 1, Side::HalfLine);
    let moments = iterate_moments(&a0, &cov, 60, window, 4)?;
    let target = invariant_moments(&CoveringMap::Rational(cov), 4)?;
    println!("target m₂ = {:.15} (4/7 = {:.15})", target.get(2), 4.0 / 7.0);
    for (n, m) in moments.iter().enumerate().filter(|(n, _)| n % 10 == 0 || *n < 4) {
        println!("step {n:2}: m₂ = {:.15}, |m₂ − 4/7| = {:.3e}", m.get(2), (m.get(2) - 4.0 / 7.0).abs());
    }

    // the Cholesky diagonal of J² + 4τc in closed form
    let lam = lambda_sequence(&[1.0; 6], &cov)?;
    println!("λ head for p ≡ 1: {:?}", &lam[..3]);

    // ⟨0|(π*(A)−z)⁻¹|0⟩ against the integral over the spectral measure of A
    let a = BandedWindow::tridiagonal(0, &[0.2, -0.4, 0.1, 0.0], &[0.8, 0.5, 1.1], Side::HalfLine)?;
    for z in [Complex64::new(0.5, 0.5), Complex64::new(-1.0, 0.1)] {
        println!("resolvent identity at {z}: residual {:.2e}", resolvent_identity_residual(&a, &cov, z)?);
    }
    Ok(())
}
