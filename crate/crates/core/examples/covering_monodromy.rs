//! Monodromy data of ramified coverings of the sphere: connectivity, genus
//! and the points over infinity.
//!
//! ```bash
//! cargo run --example covering_monodromy
//! ```

use num_complex::Complex64;
use spectral_renorm::covering::{equivalent, sigma_infinity, validate, BranchingData, Permutation};

fn main() -> spectral_renorm::Result<()> {
    // two sheets glued along a cut between two branch points: the sphere
    let sphere = BranchingData::from_json(r#"{"d": 2, "points": [[-1, 0], [1, 0]], "sigmas": [[2, 1], [2, 1]]}"#)?;
    let v = validate(&sphere);
    println!("two sheets, two branch points: {v:?}");

    // four branch points on two sheets give a torus
    let torus = BranchingData::from_json(
        r#"{"d": 2, "points": [[-2, 0], [-1, 0], [1, 0], [2, 0]], "sigmas": [[2, 1], [2, 1], [2, 1], [2, 1]]}"#,
    )?;
    println!("two sheets, four branch points: genus {:?}", validate(&torus).genus);

    // three sheets with a simple branch point at infinity
    let pts = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let s1 = Permutation::from_one_based(&[2, 3, 1])?;
    let s2 = Permutation::from_one_based(&[2, 1, 3])?;
    let b = BranchingData::new(3, pts, vec![s1, s2])?;
    println!(
        "three sheets: σ∞ = {:?}, {:?}",
        sigma_infinity(&b).to_one_based(),
        validate(&b)
    );

    // relabelling the sheets gives an equivalent covering
    let rho = Permutation::from_one_based(&[3, 1, 2])?;
    println!("equivalent after relabelling: {}", equivalent(&b, &b.relabelled(&rho))?);
    Ok(())
}
