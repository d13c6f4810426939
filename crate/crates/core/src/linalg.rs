//! Small dense helpers on top of nalgebra.

use nalgebra::SymmetricEigen;

use crate::{CMat, RMat, RVec, C64};

/// `(M + Mᴴ) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `(M + Mᵀ) / 2`.
pub fn symmetric_part(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

/// Hermitian eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (RVec, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    sort_eig(eig.eigenvalues, eig.eigenvectors)
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn eigh_real(m: &RMat) -> (RVec, RMat) {
    let eig = SymmetricEigen::new(symmetric_part(m));
    sort_eig(eig.eigenvalues, eig.eigenvectors)
}

fn sort_eig<T: nalgebra::Scalar + Copy>(
    vals: RVec,
    vecs: nalgebra::DMatrix<T>,
) -> (RVec, nalgebra::DMatrix<T>) {
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = RVec::from_iterator(n, idx.iter().map(|&i| vals[i]));
    let sorted_vecs = nalgebra::DMatrix::from_fn(vecs.nrows(), n, |r, c| vecs[(r, idx[c])]);
    (sorted_vals, sorted_vecs)
}

/// Apply a scalar function to the spectrum of a Hermitian matrix given its eigenpairs.
pub fn spectral_map(vals: &RVec, vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let mut out = CMat::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let w = f(lam);
        let col = vecs.column(k);
        for c in 0..n {
            let vc = col[c].conj() * w;
            for r in 0..n {
                out[(r, c)] += col[r] * vc;
            }
        }
    }
    out
}

/// Real-symmetric analogue of [`spectral_map`].
pub fn spectral_map_real(vals: &RVec, vecs: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let d = RVec::from_iterator(vals.len(), vals.iter().map(|&v| f(v)));
    vecs * RMat::from_diagonal(&d) * vecs.transpose()
}

/// Inverse of a real symmetric matrix through its eigendecomposition.
///
/// Returns `None` when the smallest eigenvalue magnitude falls below
/// `cutoff * max|λ|`.
pub fn sym_inverse(m: &RMat, cutoff: f64) -> Option<RMat> {
    let (vals, vecs) = eigh_real(m);
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 || vals.iter().any(|v| v.abs() <= cutoff * max) {
        return None;
    }
    Some(spectral_map_real(&vals, &vecs, |v| 1.0 / v))
}

/// `tr(A B)` without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Column-major `vec(·)`.
pub fn vec_col(m: &CMat) -> Vec<C64> {
    m.iter().copied().collect()
}

/// Sum of `xs` by recursive halving; independent of how the slice was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖`.
pub fn rel_frobenius(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_reconstructs_hermitian() {
        let m = CMat::from_fn(4, 4, |r, c| {
            C64::new((r + 2 * c) as f64 * 0.3, r as f64 - c as f64)
        });
        let h = &m * m.adjoint();
        let (vals, vecs) = eigh(&h);
        let back = spectral_map(&vals, &vecs, |v| v);
        assert!(rel_frobenius(&back, &h) < 1e-12);
        assert!(vals.iter().zip(vals.iter().skip(1)).all(|(a, b)| a <= b));
    }

    #[test]
    fn pairwise_matches_naive_on_small_ints() {
        let xs: Vec<f64> = (1..=1000).map(|x| x as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }

    #[test]
    fn sym_inverse_rejects_singular() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(sym_inverse(&m, 1e-12).is_none());
        let m = RMat::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let inv = sym_inverse(&m, 1e-12).unwrap();
        assert!(((&m * inv) - RMat::identity(2, 2)).norm() < 1e-12);
    }
}
