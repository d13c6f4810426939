//! Compressed cost `f_c`, the full phase-dependent cost `f`, and the
//! distribution-free cost `g(Θ, z)`.

use std::f64::consts::PI;

use crate::array::{wrap_angle, ArrayGeometry};
use crate::covariance::{build_t, build_tprime, InvSquareBlocks, Psi};
use crate::sources::AngularDistribution;
use crate::{CVec, Error, RMat, Result, C64};

/// The two traces `z1 = tr{Φ A Φᴴ R1}` and `z2 = tr{Φ B Φᵀ R2*}`.
pub fn trace_pair(a: &CVec, amat: &RMat, bmat: &RMat, blocks: &InvSquareBlocks) -> (C64, C64) {
    let l = a.len();
    let mut z1 = C64::new(0.0, 0.0);
    let mut z2 = C64::new(0.0, 0.0);
    for p in 0..l {
        for q in 0..l {
            z1 += a[p] * a[q].conj() * blocks.r1[(q, p)] * amat[(p, q)];
            z2 += a[p] * a[q] * blocks.r2[(q, p)].conj() * bmat[(p, q)];
        }
    }
    (z1, z2)
}

/// `A = T² + T'²`, `B = TT' + T'T`.
pub fn a_b_matrices(t: &RMat, tp: &RMat) -> (RMat, RMat) {
    let tt = t * t;
    let tptp = tp * tp;
    let ttp = t * tp;
    let tpt = tp * t;
    (tt + tptp, ttp + tpt)
}

pub fn z_terms(psi: Psi, dist: AngularDistribution, blocks: &InvSquareBlocks, geom: &ArrayGeometry) -> (C64, C64) {
    let t = build_t(dist, psi, geom);
    let tp = build_tprime(dist, psi, geom);
    let (am, bm) = a_b_matrices(&t, &tp);
    trace_pair(&geom.steering_vector(psi.doa), &am, &bm, blocks)
}

/// `f_c(ψ) = Re z1 − |z2|`.
pub fn cost_fc(psi: Psi, dist: AngularDistribution, blocks: &InvSquareBlocks, geom: &ArrayGeometry) -> f64 {
    let (z1, z2) = z_terms(psi, dist, blocks, geom);
    z1.re - z2.norm()
}

/// Phase-dependent cost `f(ψ, φ) = 2·Re{z1 + e^{jφ} z2}`.
pub fn cost_full(
    psi: Psi,
    phi: f64,
    dist: AngularDistribution,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
) -> f64 {
    let (z1, z2) = z_terms(psi, dist, blocks, geom);
    2.0 * (z1 + C64::from_polar(1.0, phi) * z2).re
}

/// Minimizer of `f(ψ, ·)`: `π − ∠z2`, wrapped to `(−π, π]`.
pub fn phase_estimate(
    psi: Psi,
    dist: AngularDistribution,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
) -> Result<f64> {
    let (_, z2) = z_terms(psi, dist, blocks, geom);
    let scale = blocks.r2.norm();
    if z2.norm() < 1e-14 * scale || z2.norm() == 0.0 {
        return Err(Error::UndefinedPhase { magnitude: z2.norm() });
    }
    Ok(wrap_angle(PI - z2.arg()))
}

/// Auxiliary vector `z` of length `2L − 2`, constrained to
/// `1 ≥ z₁ ≥ z₂ ≥ … ≥ z_{2L−2} ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryVector(Vec<f64>);

impl AuxiliaryVector {
    pub fn new(z: Vec<f64>, tol: f64) -> Result<Self> {
        let v = monotone_violation(&z);
        if v > tol {
            return Err(Error::InfeasibleZ { violation: v });
        }
        Ok(Self(z))
    }

    pub(crate) fn new_unchecked(z: Vec<f64>) -> Self {
        Self(z)
    }

    /// The structured columns of `T`/`T'` for a given distribution:
    /// `z_m = ∫ρ cos(2π m g (θ − Θ)) dθ`.
    pub fn from_distribution(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry) -> Result<Self> {
        let g = geom.phase_rate(psi.doa).ok_or(Error::NonSeparableGeometry)?;
        let n = 2 * geom.sensors() - 2;
        Ok(Self(
            (1..=n)
                .map(|m| dist.cos_moment(2.0 * PI * m as f64 * g, psi.spread))
                .collect(),
        ))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `h = [1, z₁, …, z_{2L−2}]`.
    pub fn with_leading_one(&self) -> Vec<f64> {
        std::iter::once(1.0).chain(self.0.iter().copied()).collect()
    }
}

/// Largest violation of the monotone box constraints.
pub fn monotone_violation(z: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut prev = 1.0;
    for &v in z {
        worst = worst.max(v - prev);
        prev = v;
    }
    if let Some(&last) = z.last() {
        worst = worst.max(-last);
    }
    worst
}

/// `Z = Toeplitz([1, z(1:L−1)])`, `Z' = Hankel([1, z(1:L−1)], z(L−1:2L−2))`.
pub fn structured_matrices(z: &AuxiliaryVector, l: usize) -> (RMat, RMat) {
    assert_eq!(z.len(), 2 * l - 2, "auxiliary vector must have 2L-2 entries");
    let h = z.with_leading_one();
    let zt = RMat::from_fn(l, l, |p, q| h[p.abs_diff(q)]);
    let zh = RMat::from_fn(l, l, |p, q| h[p + q]);
    (zt, zh)
}

/// `g(Θ, z) = Re tr{Φ(Z²+Z'²)Φᴴ R1} − |tr{Φ(ZZ'+Z'Z)Φᵀ R2*}|`.
pub fn cost_g(
    theta: f64,
    z: &AuxiliaryVector,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
    feasibility_tol: f64,
) -> Result<f64> {
    let v = monotone_violation(z.as_slice());
    if v > feasibility_tol {
        return Err(Error::InfeasibleZ { violation: v });
    }
    let (zt, zh) = structured_matrices(z, geom.sensors());
    let (am, bm) = a_b_matrices(&zt, &zh);
    let (z1, z2) = trace_pair(&geom.steering_vector(theta), &am, &bm, blocks);
    Ok(z1.re - z2.norm())
}
