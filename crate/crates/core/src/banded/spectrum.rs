use nalgebra::SymmetricEigen;

use super::{BandedWindow, Scalar};

/// All eigenvalues of a self-adjoint window, ascending.
pub fn eigenvalues<T: Scalar>(a: &BandedWindow<T>) -> Vec<f64> {
    if a.n() == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(a.to_dense());
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues together with the spectral weights `|⟨k|u⟩|²` of the local
/// basis vector `k`, sorted by eigenvalue.
pub fn spectral_weights<T: Scalar>(a: &BandedWindow<T>, k: usize) -> (Vec<f64>, Vec<f64>) {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut pairs: Vec<(f64, f64)> = (0..a.n())
        .map(|m| (eig.eigenvalues[m], eig.eigenvectors[(k, m)].modulus_squared()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Eigenvalues whose eigenvectors keep less than half of their mass on the
/// `edge` outermost rows at either end. Truncating an infinite operator to a
/// window creates states localized at the cut; this filters them out.
pub fn interior_eigenvalues<T: Scalar>(a: &BandedWindow<T>, edge: usize) -> Vec<f64> {
    let n = a.n();
    let eig = SymmetricEigen::new(a.to_dense());
    let mut out: Vec<f64> = (0..n)
        .filter(|&m| {
            let col = eig.eigenvectors.column(m);
            let outer: f64 = (0..n)
                .filter(|&i| i < edge || i + edge >= n)
                .map(|i| col[i].modulus_squared())
                .sum();
            outer < 0.5
        })
        .map(|m| eig.eigenvalues[m])
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// `⟨k|A^m|k⟩` for `m = 0 ..= kmax` (real parts), by repeated banded
/// products with the basis vector; `m_{2r} = ‖A^r e_k‖²` and
/// `m_{2r+1} = ⟨A^r e_k, A^{r+1} e_k⟩`.
pub fn cyclic_moments<T: Scalar>(a: &BandedWindow<T>, k: usize, kmax: usize) -> Vec<f64> {
    let n = a.n();
    let mut powers: Vec<Vec<T>> = Vec::with_capacity(kmax / 2 + 2);
    let mut v = vec![T::zero(); n];
    v[k] = T::one();
    powers.push(v);
    while powers.len() < kmax / 2 + 2 {
        let prev = powers.last().unwrap();
        let next: Vec<T> = (0..n)
            .map(|i| a.col_range(i).fold(T::zero(), |acc, j| acc + a.get(i, j) * prev[j]))
            .collect();
        powers.push(next);
    }
    let dot = |x: &[T], y: &[T]| x.iter().zip(y).fold(T::zero(), |acc, (&u, &w)| acc + u.conjugate() * w);
    (0..=kmax)
        .map(|m| dot(&powers[m / 2], &powers[m - m / 2]).to_c64().re)
        .collect()
}
