//! Transfer operators of covering maps: exact pushforward of measures,
//! invariant moments, balanced-measure sampling and weighted eigen-measures.
//!
//! Writes `measure.csv` (the 10-fold pushforward of the fixed point) to the
//! directory given as the first argument, default the system temp dir.
//!
//! ```bash
//! cargo run --release --example transfer_measures -- /tmp
//! ```

use std::fs::File;
use std::path::PathBuf;

use spectral_renorm::polynomial::ExpandingPolynomial;
use spectral_renorm::rational::RationalCovering;
use spectral_renorm::transfer::{
    backward_orbit_sample, invariant_moments, pushforward, sample_moments, weighted_ruelle_eigen, CoveringMap,
    DiscreteMeasure,
};

fn main() -> spectral_renorm::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(std::env::temp_dir, PathBuf::from);
    let rational = CoveringMap::Rational(RationalCovering::normalized(2.0)?);

    let mut nu = DiscreteMeasure::dirac(1.0);
    for _ in 0..10 {
        nu = pushforward(&nu, &rational)?;
    }
    let nu = nu.canonical();
    std::fs::create_dir_all(&dir).map_err(|e| spectral_renorm::Error::InvalidInput(e.to_string()))?;
    let path = dir.join("measure.csv");
    nu.write_csv(File::create(&path).map_err(|e| spectral_renorm::Error::InvalidInput(e.to_string()))?)?;
    println!("{} atoms written to {}", nu.len(), path.display());

    let inv = invariant_moments(&rational, 6)?;
    println!("invariant moments: {:?}", inv.as_slice());
    println!("moments after 10 levels: {:?}", nu.moments(6).as_slice());

    let samples = backward_orbit_sample(&rational, 40, 200_000, 1)?;
    let (mean, err) = sample_moments(&samples, 2);
    println!("sampled m₂ = {:.5} ± {:.5}", mean[2], err[2]);

    // balanced and Bowen–Ruelle measures of z² − 6 on the preimage tree
    let t = ExpandingPolynomial::quadratic(6.0, 1.0)?;
    let w = weighted_ruelle_eigen(&t, &[true], 12, 1e-12)?;
    println!("weight 1/y²: ρ = {:.6}, m₂ = {:.6}", w.rho_1, w.sigma_1.moments(2).get(2));
    println!("weight 1/4:  ρ = {:.6}, m₂ = {:.6}", w.rho_2, w.sigma_2.moments(2).get(2));
    let balanced = invariant_moments(&CoveringMap::Polynomial(t), 2)?;
    println!("balanced m₂ = {:.6}", balanced.get(2));
    Ok(())
}
