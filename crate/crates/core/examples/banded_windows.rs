//! Banded windows of infinite operators: products, the forward Cholesky
//! factor, the forward similarity and resolvent entries.
//!
//! ```bash
//! cargo run --release --example banded_windows
//! ```

use num_complex::Complex64;
use spectral_renorm::banded::{
    band_mul, cholesky_upper, eigenvalues, resolvent_entry, similarity_forward, BandedWindow, JacobiCoeffs, Side,
};

fn main() -> spectral_renorm::Result<()> {
    // the free Jacobi matrix p ≡ 1, q ≡ 0 on the half-line, first 12 sites
    let free = JacobiCoeffs::free(1.0)?;
    let a = free.window(0, 12, Side::HalfLine)?;
    println!("window: n = {}, bandwidth = {}, exact rows {:?}", a.n(), a.bandwidth(), a.exact_rows());

    // A² is five-diagonal; its last row misses the coupling that leaves the window
    let sq = band_mul(&a, &a)?;
    println!("A²: bandwidth {}, exact rows {:?}", sq.bandwidth(), sq.exact_rows());

    // Φ*Φ = A² + 8 with Φ upper triangular of bandwidth 2
    let phi = cholesky_upper(&sq.shifted(8.0))?;
    let diag: Vec<String> = (0..5).map(|i| format!("{:.6}", phi.get(i, i))).collect();
    println!("Φ diagonal: {}", diag.join(", "));

    // A* = ΦAΦ⁻¹ has the spectrum of A
    let a_star = similarity_forward(&phi, &a)?;
    let (ea, eb) = (eigenvalues(&a), eigenvalues(&a_star.leading(a.n())?));
    let drift = ea.iter().zip(&eb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    println!("A* asymmetry {:.2e}, spectral difference to A {:.2e}", a_star.asymmetry(), drift);

    // ⟨0|(A − z)⁻¹|0⟩ of the free half-line converges to (−z + √(z²−4))/2
    let z = Complex64::new(0.3, 1.0);
    let big = free.window(0, 400, Side::HalfLine)?;
    let g = resolvent_entry(&big, z, 0, 0)?;
    let exact = (-z + (z * z - 4.0).sqrt()) / 2.0;
    println!("m(z) = {g:.12}, closed form {exact:.12}");

    // windows serialize to JSON with their margins
    let json = a.to_json()?;
    let back = BandedWindow::<f64>::from_json(&json)?;
    assert_eq!(back, a);
    println!("JSON round trip: {} bytes", json.len());
    Ok(())
}
