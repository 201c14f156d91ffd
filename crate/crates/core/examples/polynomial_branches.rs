//! Renormalization of a periodic Jacobi matrix under an expanding
//! polynomial: all sign branches, their equation residuals and the
//! reflection duality between them.
//!
//! ```bash
//! cargo run --release --example polynomial_branches
//! ```

use num_complex::Complex64;
use spectral_renorm::banded::JacobiCoeffs;
use spectral_renorm::polynomial::{
    assemble_renormalized, block_at, branch_overlaps, dual_delta_check, enumerate_branches, magic_formula_residual,
    renorm_residuals, ExpandingPolynomial, SignVector,
};

fn main() -> spectral_renorm::Result<()> {
    let t = ExpandingPolynomial::from_descending(&[1.0, 0.0, -10.0], 1.0)?;
    println!("T = z² − 10: critical values {:?}, regime margin {}", t.critical_values(), t.regime_margin());

    let jt = JacobiCoeffs::periodic(vec![0.3, 0.25], vec![0.1, -0.15])?;
    let minus = SignVector::all_minus(1);
    let block = block_at(&jt, &t, &minus, 0)?;
    println!("block J⁽⁰⁾: q = {:?}, p = {:?}", block.q, block.p);

    let branches = enumerate_branches(&jt, &t, -100..100);
    for b in &branches {
        let label: String = b.delta.signs().iter().map(|s| if *s < 0 { '-' } else { '+' }).collect();
        match &b.window {
            Ok(j) => {
                let r = renorm_residuals(j, &jt, &t, Complex64::new(0.0, 3.0))?;
                println!("δ = {label}: eq_t01 {:.1e}, eq_re1 {:.1e}, eq_re2 {:.1e}", r.eq_t01, r.eq_re1, r.eq_re2);
            }
            Err(e) => println!("δ = {label}: {e}"),
        }
    }
    for o in branch_overlaps(&branches, 4) {
        println!("branches {} and {}: distance {:.3}, best translate {:.3}", o.first, o.second, o.distance_unshifted, o.distance);
    }
    println!("reflection duality residual: {:.2e}", dual_delta_check(&jt, &t, &minus, -50..50)?);

    // the free operator with spectrum [−2, 2] gives T(J₀) = S² + S⁻²
    let free = JacobiCoeffs::free(1.0)?;
    let t2 = ExpandingPolynomial::from_descending(&[1.0, 0.0, -5.0], 2.0)?;
    let j0 = assemble_renormalized(&free, &t2, &minus, -30..30)?;
    println!("T(J₀) − (S² + S⁻²) on the interior: {:.2e}", magic_formula_residual(&j0, &t2)?);
    Ok(())
}
