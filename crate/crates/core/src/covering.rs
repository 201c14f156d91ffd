//! Branching data of a `d`-sheeted covering of the sphere: finite branch
//! points with their monodromy permutations, the derived monodromy at
//! infinity, connectivity, the Riemann–Hurwitz genus and equivalence under
//! relabelling of the sheets.
//!
//! Permutations are stored 0-based as image lists. Products apply the left
//! factor first, so `σ₁·σ₂` sends `x` to `σ₂(σ₁(x))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `{0, …, d−1}` given by its images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let d = images.len();
        let mut seen = vec![false; d];
        for &x in &images {
            if x >= d || std::mem::replace(&mut seen[x], true) {
                return Err(Error::MalformedPermutation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Self(images))
    }

    /// From 1-based images, the form used in JSON documents.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::MalformedPermutation(format!("{images:?} contains 0")));
        }
        Self::new(images.iter().map(|&x| x - 1).collect())
    }

    /// The transposition swapping `a` and `b` (0-based).
    pub fn transposition(d: usize, a: usize, b: usize) -> Result<Self> {
        if a >= d || b >= d {
            return Err(Error::MalformedPermutation(format!("({a} {b}) outside degree {d}")));
        }
        let mut v: Vec<usize> = (0..d).collect();
        v.swap(a, b);
        Ok(Self(v))
    }

    pub fn identity(d: usize) -> Self {
        Self((0..d).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|x| x + 1).collect()
    }

    /// `self` first, then `other`.
    pub fn then(&self, other: &Self) -> Self {
        Self(self.0.iter().map(|&x| other.0[x]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Cycle lengths, longest first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let d = self.0.len();
        let mut seen = vec![false; d];
        let mut out = Vec::new();
        for s in 0..d {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut x = s;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
                len += 1;
            }
            out.push(len);
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// `ρ σ ρ⁻¹` as relabelling: the result sends `ρ(x)` to `ρ(σ(x))`.
    pub fn conjugated_by(&self, rho: &Self) -> Self {
        let mut out = vec![0; self.0.len()];
        for x in 0..self.0.len() {
            out[rho.0[x]] = rho.0[self.0[x]];
        }
        Self(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchingData {
    degree: usize,
    points: Vec<Complex64>,
    sigmas: Vec<Permutation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchingDoc {
    d: usize,
    points: Vec<[f64; 2]>,
    sigmas: Vec<Vec<usize>>,
}

/// Summary returned by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Validation {
    pub connected: bool,
    /// Cycle lengths of the monodromy at infinity: one entry per point over
    /// infinity, giving its pole order.
    pub infinity_orbits: Vec<usize>,
    /// Genus of the covering surface; `None` when the surface is disconnected.
    pub genus: Option<i64>,
}

impl BranchingData {
    pub fn new(degree: usize, points: Vec<Complex64>, sigmas: Vec<Permutation>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidInput("degree must be positive".into()));
        }
        if points.len() != sigmas.len() {
            return Err(Error::InvalidInput(format!(
                "{} branch points but {} permutations",
                points.len(),
                sigmas.len()
            )));
        }
        if let Some(s) = sigmas.iter().find(|s| s.degree() != degree) {
            return Err(Error::MalformedPermutation(format!(
                "permutation of degree {} in degree-{degree} data",
                s.degree()
            )));
        }
        Ok(Self { degree, points, sigmas })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: BranchingDoc =
            serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let sigmas = doc
            .sigmas
            .iter()
            .map(|s| Permutation::from_one_based(s))
            .collect::<Result<Vec<_>>>()?;
        let points = doc.points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Self::new(doc.d, points, sigmas)
    }

    pub fn to_json(&self) -> String {
        let doc = BranchingDoc {
            d: self.degree,
            points: self.points.iter().map(|z| [z.re, z.im]).collect(),
            sigmas: self.sigmas.iter().map(Permutation::to_one_based).collect(),
        };
        serde_json::to_string(&doc).expect("branching data serializes")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }
    pub fn sigmas(&self) -> &[Permutation] {
        &self.sigmas
    }

    /// The same branch points with every permutation conjugated by `rho`.
    pub fn relabelled(&self, rho: &Permutation) -> Self {
        Self {
            degree: self.degree,
            points: self.points.clone(),
            sigmas: self.sigmas.iter().map(|s| s.conjugated_by(rho)).collect(),
        }
    }
}

/// `(σ₁·…·σ_N)⁻¹`, so that `σ₁·…·σ_N·σ_∞ = id`.
pub fn sigma_infinity(b: &BranchingData) -> Permutation {
    b.sigmas
        .iter()
        .fold(Permutation::identity(b.degree), |acc, s| acc.then(s))
        .inverse()
}

pub fn validate(b: &BranchingData) -> Validation {
    let d = b.degree;
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for s in &b.sigmas {
        for x in 0..d {
            let (ra, rb) = (find(&mut parent, x), find(&mut parent, s.apply(x)));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    let root = find(&mut parent, 0);
    let connected = (0..d).all(|x| find(&mut parent, x) == root);

    let inf = sigma_infinity(b);
    let ramification: usize = b
        .sigmas
        .iter()
        .chain(std::iter::once(&inf))
        .map(|s| d - s.cycle_type().len())
        .sum();
    let genus = connected.then(|| 1 - d as i64 + (ramification / 2) as i64);
    Validation {
        connected,
        infinity_orbits: inf.cycle_type(),
        genus,
    }
}

/// Lexicographic successor of a permutation of `0..n`; `false` after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Whether some relabelling `ρ` of the sheets carries every `σ_i` of `b1` to
/// the corresponding `σ_i` of `b2`. Exhaustive over all `d!` relabellings.
pub fn equivalent(b1: &BranchingData, b2: &BranchingData) -> Result<bool> {
    if b1.degree != b2.degree {
        return Err(Error::DegreeMismatch(b1.degree, b2.degree));
    }
    if b1.points != b2.points {
        return Err(Error::InvalidInput(
            "equivalence is only decided for identical branch points".into(),
        ));
    }
    let d = b1.degree;
    if d > 8 {
        return Err(Error::Unsupported(format!("exhaustive equivalence for degree {d} > 8")));
    }
    let mut rho: Vec<usize> = (0..d).collect();
    loop {
        let ok = b1.sigmas.iter().zip(&b2.sigmas).all(|(s1, s2)| {
            (0..d).all(|x| s2.apply(rho[x]) == rho[s1.apply(x)])
        });
        if ok {
            return Ok(true);
        }
        if !next_permutation(&mut rho) {
            return Ok(false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::new(k as f64, 0.0)).collect()
    }

    fn swap(d: usize, a: usize, b: usize) -> Permutation {
        Permutation::transposition(d, a, b).unwrap()
    }

    #[test]
    fn two_transpositions_give_trivial_infinity() {
        let b = BranchingData::new(2, pts(2), vec![swap(2, 0, 1), swap(2, 0, 1)]).unwrap();
        assert!(sigma_infinity(&b).is_identity());
        let v = validate(&b);
        assert!(v.connected);
        assert_eq!(v.infinity_orbits, vec![1, 1]);
        assert_eq!(v.genus, Some(0));
    }

    #[test]
    fn single_transposition_gives_double_pole() {
        let b = BranchingData::new(2, pts(1), vec![swap(2, 0, 1)]).unwrap();
        assert_eq!(sigma_infinity(&b), swap(2, 0, 1));
        assert_eq!(validate(&b).infinity_orbits, vec![2]);
        assert_eq!(validate(&b).genus, Some(0));
    }

    #[test]
    fn no_branch_points() {
        let b = BranchingData::new(3, vec![], vec![]).unwrap();
        assert!(sigma_infinity(&b).is_identity());
        assert!(!validate(&b).connected);
    }

    #[test]
    fn identity_monodromy_is_disconnected() {
        let b = BranchingData::new(2, pts(1), vec![Permutation::identity(2)]).unwrap();
        let v = validate(&b);
        assert!(!v.connected);
        assert_eq!(v.genus, None);
    }

    #[test]
    fn malformed_permutations_rejected() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::from_one_based(&[0, 1]).is_err());
        assert!(BranchingData::from_json(r#"{"d":2,"points":[[0,0]],"sigmas":[[1,3]]}"#).is_err());
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let s = r#"{"d":3,"points":[[0.0,0.0],[1.0,0.5]],"sigmas":[[2,1,3],[1,3,2]]}"#;
        let b = BranchingData::from_json(s).unwrap();
        assert_eq!(b.sigmas()[0], swap(3, 0, 1));
        assert_eq!(BranchingData::from_json(&b.to_json()).unwrap(), b);
    }

    #[test]
    fn relabelled_copy_is_equivalent() {
        let b = BranchingData::new(
            4,
            pts(3),
            vec![swap(4, 0, 1), swap(4, 1, 2), swap(4, 2, 3)],
        )
        .unwrap();
        let rho = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        assert!(equivalent(&b, &b).unwrap());
        assert!(equivalent(&b, &b.relabelled(&rho)).unwrap());
        assert_eq!(validate(&b), validate(&b.relabelled(&rho)));
    }

    #[test]
    fn incompatible_data_are_not_equivalent() {
        // (12),(12) against (13),(23): first entries can be matched by a
        // relabelling, but not both simultaneously.
        let b1 = BranchingData::new(3, pts(2), vec![swap(3, 0, 1), swap(3, 0, 1)]).unwrap();
        let b2 = BranchingData::new(3, pts(2), vec![swap(3, 0, 2), swap(3, 1, 2)]).unwrap();
        assert!(!equivalent(&b1, &b2).unwrap());
    }

    #[test]
    fn degree_limits() {
        let b = BranchingData::new(9, vec![], vec![]).unwrap();
        assert!(matches!(equivalent(&b, &b), Err(Error::Unsupported(_))));
        let c = BranchingData::new(2, vec![], vec![]).unwrap();
        assert!(matches!(equivalent(&b, &c), Err(Error::DegreeMismatch(9, 2))));
    }

    #[test]
    fn product_relation_holds() {
        let b = BranchingData::new(
            3,
            pts(4),
            vec![swap(3, 0, 1), swap(3, 1, 2), swap(3, 0, 2), swap(3, 0, 1)],
        )
        .unwrap();
        let prod = b
            .sigmas()
            .iter()
            .chain(std::iter::once(&sigma_infinity(&b)))
            .fold(Permutation::identity(3), |acc, s| acc.then(s));
        assert!(prod.is_identity());
    }
}
