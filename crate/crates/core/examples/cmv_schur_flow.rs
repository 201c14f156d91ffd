//! CMV matrices from Verblunsky coefficients and the Schur flow on them.
//!
//! ```bash
//! cargo run --release --example cmv_schur_flow
//! ```

use num_complex::Complex64;
use spectral_renorm::cmv::{build_cmv, five_diagonal_check, schur_flow, LaxProjection, VerblunskySeq};

fn main() -> spectral_renorm::Result<()> {
    let a: Vec<Complex64> = (0..32)
        .map(|k| Complex64::from_polar(0.4 + 0.2 * (k as f64 * 0.7).sin(), 1.3 * k as f64))
        .collect();
    let seq = VerblunskySeq::new(0, a)?;
    let c = build_cmv(&seq)?;
    println!("unitarity defect {:.2e}", c.unitarity_defect);
    let rep = five_diagonal_check(&c, &seq)?;
    println!(
        "entry formulas: diagonal {:.1e}, first {:.1e}, second {:.1e}; {} superdiagonals",
        rep.diagonal, rep.first, rep.second, rep.superdiagonals
    );

    for proj in [LaxProjection::Skew, LaxProjection::UpperHalfDiagonal] {
        let traj = schur_flow(&seq, 1e-3, 1000, 250, proj)?;
        println!("{proj:?}: spectral drift {:.2e}, unitarity {:.2e}", traj.max_drift(), traj.max_unitarity_defect());
        let last = traj.coefficients.last().expect("final state");
        println!("  a₀(t=1) = {:.6}", last[0]);
    }
    Ok(())
}
