//! Darboux transforms and measured Lipschitz ratios of renormalization.
//!
//! ```bash
//! cargo run --release --example darboux_and_contraction
//! ```

use rand::Rng;
use spectral_renorm::banded::{eigenvalues, JacobiCoeffs, Side};
use spectral_renorm::polynomial::{darboux, darboux_lipschitz, empirical_lipschitz, ExpandingPolynomial, SignVector};
use spectral_renorm::transfer::seeded_rng;

fn random_pair(rng: &mut impl Rng) -> spectral_renorm::Result<JacobiCoeffs> {
    JacobiCoeffs::periodic(
        vec![rng.gen_range(0.1..0.4), rng.gen_range(0.1..0.4)],
        vec![rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)],
    )
}

fn main() -> spectral_renorm::Result<()> {
    let j = JacobiCoeffs::free(0.5)?.window(0, 200, Side::HalfLine)?;
    let rho = 3.0;
    let out = darboux(&j, rho)?;
    let drift = eigenvalues(&j)
        .iter()
        .zip(eigenvalues(&out))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("Darboux ρ = {rho}: spectral drift {drift:.2e}");

    let mut rng = seeded_rng(11, 0);
    let pairs: Vec<_> = (0..10)
        .map(|_| Ok((random_pair(&mut rng)?, random_pair(&mut rng)?)))
        .collect::<spectral_renorm::Result<_>>()?;

    for lambda in [12.0, 3.0] {
        let t = ExpandingPolynomial::quadratic(lambda, 1.0)?;
        let rep = empirical_lipschitz(&t, &pairs, &SignVector::all_minus(1), -50..50)?;
        println!("T = z² − {lambda}: max ratio {:.4}", rep.max_ratio);
    }
    let rep = darboux_lipschitz(rho, &pairs, 300)?;
    println!("Darboux ratios: max {:.4}, implied constant {:.4}", rep.max_ratio, rep.max_ratio * (rho - 2.0) / (2.0 * rho));
    Ok(())
}
