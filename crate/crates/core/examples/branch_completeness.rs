//! Searches the plane of period-two candidates for solutions of the
//! renormalization equation and matches them with the constructed branches.
//!
//! ```bash
//! cargo run --release --example branch_completeness
//! ```

use num_complex::Complex64;
use spectral_renorm::polynomial::completeness_scan_quadratic;

fn main() -> spectral_renorm::Result<()> {
    let probes = [Complex64::new(0.5, 1.0), Complex64::new(-1.0, 0.5)];
    let rep = completeness_scan_quadratic(5.0, 0.5, 60, &probes, 1e-6)?;
    println!(
        "{} evaluations, {} local minima, {} solutions, {} unmatched, {} branches missed",
        rep.evaluations,
        rep.local_minima,
        rep.found.len(),
        rep.extra,
        rep.missed
    );
    for s in &rep.found {
        println!("  p₁ = {:.10}, q₀ = {:+.10}, residual {:.1e}, branch {:?}", s.p1, s.q0, s.residual, s.branch);
    }
    Ok(())
}
