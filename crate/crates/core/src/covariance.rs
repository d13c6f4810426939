//! Spread factor matrices, model/sample extended covariances and the
//! inverse-square blocks consumed by the estimators.

use std::f64::consts::PI;

use crate::array::ArrayGeometry;
use crate::linalg::{eigh, hermitian_part, spectral_map};
use crate::sources::{AngularDistribution, Scenario};
use crate::{CMat, Error, RMat, Result, C64};

/// Central DOA and angular spread, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi {
    pub doa: f64,
    pub spread: f64,
}

impl Psi {
    pub fn new(doa: f64, spread: f64) -> Self {
        Self { doa, spread }
    }
}

/// Which spread factor: `T` pairs `f'_p − f'_l`, `T'` pairs `f'_p + f'_l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Conjugated,
    Unconjugated,
}

impl Factor {
    fn sign(self) -> f64 {
        match self {
            Factor::Conjugated => -1.0,
            Factor::Unconjugated => 1.0,
        }
    }
}

/// A spread factor and its partials in (Θ, σ).
#[derive(Debug, Clone)]
pub struct FactorDerivs {
    pub value: RMat,
    pub d_doa: RMat,
    pub d_spread: RMat,
    pub d_doa_doa: RMat,
    pub d_doa_spread: RMat,
    pub d_spread_spread: RMat,
}

pub fn build_factor(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry, which: Factor) -> RMat {
    let l = geom.sensors();
    let slopes: Vec<f64> = (0..l).map(|i| geom.phase_slope(i, psi.doa)).collect();
    let sg = which.sign();
    RMat::from_fn(l, l, |p, q| {
        dist.cos_moment(2.0 * PI * (slopes[p] + sg * slopes[q]), psi.spread)
    })
}

/// `T(ψ)`: real symmetric, Toeplitz for an equally spaced line.
pub fn build_t(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry) -> RMat {
    build_factor(dist, psi, geom, Factor::Conjugated)
}

/// `T'(ψ)`: real symmetric, Hankel for an equally spaced line.
pub fn build_tprime(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry) -> RMat {
    build_factor(dist, psi, geom, Factor::Unconjugated)
}

pub fn factor_derivs(
    dist: AngularDistribution,
    psi: Psi,
    geom: &ArrayGeometry,
    which: Factor,
) -> FactorDerivs {
    let l = geom.sensors();
    let d: Vec<[f64; 4]> = (0..l).map(|i| geom.phase_derivs(i, psi.doa)).collect();
    let sg = which.sign();
    let mut out = FactorDerivs {
        value: RMat::zeros(l, l),
        d_doa: RMat::zeros(l, l),
        d_spread: RMat::zeros(l, l),
        d_doa_doa: RMat::zeros(l, l),
        d_doa_spread: RMat::zeros(l, l),
        d_spread_spread: RMat::zeros(l, l),
    };
    for p in 0..l {
        for q in 0..l {
            let a = 2.0 * PI * (d[p][1] + sg * d[q][1]);
            let a1 = 2.0 * PI * (d[p][2] + sg * d[q][2]);
            let a2 = 2.0 * PI * (d[p][3] + sg * d[q][3]);
            let m = dist.cos_moment_derivs(a, psi.spread);
            out.value[(p, q)] = m.value;
            out.d_doa[(p, q)] = m.d_a * a1;
            out.d_spread[(p, q)] = m.d_s;
            out.d_doa_doa[(p, q)] = m.d_aa * a1 * a1 + m.d_a * a2;
            out.d_doa_spread[(p, q)] = m.d_as * a1;
            out.d_spread_spread[(p, q)] = m.d_ss;
        }
    }
    out
}

fn phase_weighted(geom: &ArrayGeometry, theta: f64, t: &RMat, which: Factor) -> CMat {
    let a = geom.steering_vector(theta);
    let l = geom.sensors();
    CMat::from_fn(l, l, |p, q| {
        let w = match which {
            Factor::Conjugated => a[p] * a[q].conj(),
            Factor::Unconjugated => a[p] * a[q],
        };
        w * t[(p, q)]
    })
}

/// `R_ss(ψ) = Φ T Φᴴ` with `Φ = diag(a(Θ))`.
pub fn build_rss(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry) -> CMat {
    phase_weighted(geom, psi.doa, &build_t(dist, psi, geom), Factor::Conjugated)
}

/// `R'_ss(ψ) = Φ T' Φᵀ`.
pub fn build_rss_prime(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry) -> CMat {
    phase_weighted(geom, psi.doa, &build_tprime(dist, psi, geom), Factor::Unconjugated)
}

/// Assemble `[[A, B], [conj(B), conj(A)]]`.
pub fn augment(top_left: &CMat, top_right: &CMat) -> CMat {
    let l = top_left.nrows();
    CMat::from_fn(2 * l, 2 * l, |r, c| match (r < l, c < l) {
        (true, true) => top_left[(r, c)],
        (true, false) => top_right[(r, c - l)],
        (false, true) => top_right[(r - l, c)].conj(),
        (false, false) => top_left[(r - l, c - l)].conj(),
    })
}

/// `R̃_ss(ψ, φ) = Φ̃ T̃ Φ̃ᴴ`.
pub fn build_extended_rss(dist: AngularDistribution, psi: Psi, phi: f64, geom: &ArrayGeometry) -> CMat {
    let rss = build_rss(dist, psi, geom);
    let rp = build_rss_prime(dist, psi, geom) * C64::from_polar(1.0, phi);
    augment(&rss, &rp)
}

/// `R̃_ss` and its first/second partials with respect to `α = (Θ, σ, φ)`.
#[derive(Debug, Clone)]
pub struct ExtendedRssDerivs {
    pub value: CMat,
    pub first: [CMat; 3],
    pub second: [[CMat; 3]; 3],
}

pub fn extended_rss_derivs(
    dist: AngularDistribution,
    psi: Psi,
    phi: f64,
    geom: &ArrayGeometry,
) -> ExtendedRssDerivs {
    let l = geom.sensors();
    let n = 2 * l;
    let tf = factor_derivs(dist, psi, geom, Factor::Conjugated);
    let tpf = factor_derivs(dist, psi, geom, Factor::Unconjugated);
    let d: Vec<[f64; 4]> = (0..l).map(|i| geom.phase_derivs(i, psi.doa)).collect();
    let zero = || CMat::zeros(n, n);
    let mut out = ExtendedRssDerivs {
        value: zero(),
        first: [zero(), zero(), zero()],
        second: [[zero(), zero(), zero()], [zero(), zero(), zero()], [zero(), zero(), zero()]],
    };
    let j = C64::new(0.0, 1.0);
    for r in 0..n {
        for c in 0..n {
            let (p, q) = (r % l, c % l);
            // phase sign pattern and φ coefficient for each block
            let (sp, sq, cphi, f) = match (r < l, c < l) {
                (true, true) => (1.0, -1.0, 0.0, &tf),
                (true, false) => (1.0, 1.0, 1.0, &tpf),
                (false, true) => (-1.0, -1.0, -1.0, &tpf),
                (false, false) => (-1.0, 1.0, 0.0, &tf),
            };
            let psi0 = 2.0 * PI * (sp * d[p][0] + sq * d[q][0]) + cphi * phi;
            let psi_t = 2.0 * PI * (sp * d[p][1] + sq * d[q][1]);
            let psi_tt = 2.0 * PI * (sp * d[p][2] + sq * d[q][2]);
            let e = C64::from_polar(1.0, psi0);
            // derivatives of the phase term w.r.t. (Θ, σ, φ)
            let grad_psi = [psi_t, 0.0, cphi];
            let e1: [C64; 3] = std::array::from_fn(|i| j * grad_psi[i] * e);
            let e2 = |a: usize, b: usize| {
                let hess = if a == 0 && b == 0 { psi_tt } else { 0.0 };
                (j * hess - grad_psi[a] * grad_psi[b]) * e
            };
            let m = f.value[(p, q)];
            let m1 = [f.d_doa[(p, q)], f.d_spread[(p, q)], 0.0];
            let m2 = |a: usize, b: usize| match (a.min(b), a.max(b)) {
                (0, 0) => f.d_doa_doa[(p, q)],
                (0, 1) => f.d_doa_spread[(p, q)],
                (1, 1) => f.d_spread_spread[(p, q)],
                _ => 0.0,
            };
            out.value[(r, c)] = e * m;
            for a in 0..3 {
                out.first[a][(r, c)] = e1[a] * m + e * m1[a];
                for b in 0..3 {
                    out.second[a][b][(r, c)] =
                        e2(a, b) * m + e1[a] * m1[b] + e1[b] * m1[a] + e * m2(a, b);
                }
            }
        }
    }
    out
}

/// Conjugated, unconjugated and extended covariance of the array output.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub rxx: CMat,
    pub rpxx: CMat,
    pub rext: CMat,
}

/// Model covariances under the small-spread factorization.
pub fn theoretical_cov(scenario: &Scenario) -> CovarianceSet {
    let geom = &scenario.geometry;
    let l = geom.sensors();
    let mut rxx = CMat::identity(l, l) * C64::from(scenario.noise_variance);
    let mut rpxx = CMat::zeros(l, l);
    for s in &scenario.sources {
        let psi = Psi::new(s.central_doa, s.spread);
        rxx += build_rss(s.dist, psi, geom) * C64::from(s.power);
        if s.nc_rate > 0.0 {
            rpxx += build_rss_prime(s.dist, psi, geom)
                * C64::from_polar(s.power * s.nc_rate, s.nc_phase);
        }
    }
    let rext = augment(&rxx, &rpxx);
    CovarianceSet { rxx, rpxx, rext }
}

/// `(1/N) Σ x̃ x̃ᴴ` with `x̃ = [x; conj(x)]`.
pub fn sample_extended_cov(x: &CMat) -> CMat {
    let n = x.ncols() as f64;
    let r = x * x.adjoint() / C64::from(n);
    let rp = x * x.transpose() / C64::from(n);
    augment(&r, &rp)
}

/// Blocks of `R̂⁻²`: `R1` top-left, `R2` top-right.
#[derive(Debug, Clone)]
pub struct InvSquareBlocks {
    pub r1: CMat,
    pub r2: CMat,
}

/// `R⁻²` through the Hermitian eigendecomposition.
pub fn inverse_square(rext: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(&hermitian_part(rext));
    let max = vals[vals.len() - 1];
    let min = vals[0];
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::SingularCovariance {
            ratio: if max > 0.0 { min / max } else { 0.0 },
        });
    }
    Ok(spectral_map(&vals, &vecs, |v| 1.0 / (v * v)))
}

pub fn inv_square_blocks(rext: &CMat) -> Result<InvSquareBlocks> {
    let m = inverse_square(rext)?;
    let l = rext.nrows() / 2;
    Ok(InvSquareBlocks {
        r1: m.view((0, 0), (l, l)).into_owned(),
        r2: m.view((0, l), (l, l)).into_owned(),
    })
}

impl InvSquareBlocks {
    /// Reassemble the full `2L × 2L` matrix from the block pattern.
    pub fn full(&self) -> CMat {
        augment(&self.r1, &self.r2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deg;
    use crate::sources::SourceSpec;

    fn geom() -> ArrayGeometry {
        ArrayGeometry::ula(6, 0.5)
    }

    #[test]
    fn zero_spread_gives_ones() {
        for dist in [AngularDistribution::Gaussian, AngularDistribution::Uniform] {
            let psi = Psi::new(deg(10.0), 0.0);
            let t = build_t(dist, psi, &geom());
            let tp = build_tprime(dist, psi, &geom());
            assert!(t.iter().chain(tp.iter()).all(|&v| v == 1.0));
        }
    }

    #[test]
    fn point_source_rss_is_rank_one() {
        let g = geom();
        let th = deg(25.0);
        let rss = build_rss(AngularDistribution::Gaussian, Psi::new(th, 0.0), &g);
        let a = g.steering_vector(th);
        assert!((rss - &a * a.adjoint()).norm() < 1e-13);
    }

    #[test]
    fn rss_has_unit_diagonal() {
        let rss = build_rss(AngularDistribution::Uniform, Psi::new(deg(30.0), deg(4.0)), &geom());
        for i in 0..6 {
            assert!((rss[(i, i)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn extended_rss_block_structure() {
        let g = geom();
        let psi = Psi::new(deg(12.0), deg(2.0));
        let ext = build_extended_rss(AngularDistribution::Gaussian, psi, 0.9, &g);
        assert!((&ext - ext.adjoint()).norm() < 1e-14);
        let tl = ext.view((0, 0), (6, 6)).into_owned();
        assert!((tl - build_rss(AngularDistribution::Gaussian, psi, &g)).norm() < 1e-15);
    }

    #[test]
    fn extended_rss_derivs_value_matches_builder() {
        let g = geom();
        let psi = Psi::new(deg(12.0), deg(2.0));
        let d = extended_rss_derivs(AngularDistribution::Uniform, psi, 0.4, &g);
        let ext = build_extended_rss(AngularDistribution::Uniform, psi, 0.4, &g);
        assert!((d.value - ext).norm() < 1e-13);
        // φ only enters the off-diagonal blocks
        assert!(d.first[2].view((0, 0), (6, 6)).norm() == 0.0);
    }

    #[test]
    fn no_sources_gives_white_noise() {
        let sc = Scenario {
            geometry: geom(),
            sources: vec![],
            noise_variance: 0.3,
            snapshots: 10,
        };
        let cs = theoretical_cov(&sc);
        assert!((cs.rxx - CMat::identity(6, 6) * C64::from(0.3)).norm() < 1e-15);
        assert_eq!(cs.rpxx.norm(), 0.0);
    }

    #[test]
    fn rectilinear_point_source_extended_rank_one() {
        let sc = Scenario {
            geometry: geom(),
            sources: vec![SourceSpec {
                dist: AngularDistribution::Gaussian,
                central_doa: deg(10.0),
                spread: 0.0,
                power: 3.0,
                nc_rate: 1.0,
                nc_phase: 0.3,
            }],
            noise_variance: 1e-9,
            snapshots: 10,
        };
        let cs = theoretical_cov(&sc);
        let (vals, _) = eigh(&cs.rext);
        assert!((vals[11] - 1e-9 - 2.0 * 3.0 * 6.0).abs() < 1e-9);
        assert!(vals.iter().take(11).all(|v| (v - 1e-9).abs() < 1e-9));
    }

    #[test]
    fn sample_cov_single_unit_snapshot() {
        let mut x = CMat::zeros(3, 1);
        x[(0, 0)] = C64::new(1.0, 0.0);
        let r = sample_extended_cov(&x);
        let ones = [(0, 0), (0, 3), (3, 0), (3, 3)];
        for rr in 0..6 {
            for cc in 0..6 {
                let want = if ones.contains(&(rr, cc)) { 1.0 } else { 0.0 };
                assert_eq!(r[(rr, cc)], C64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn inverse_square_of_scaled_identity() {
        let b = inv_square_blocks(&(CMat::identity(8, 8) * C64::from(4.0))).unwrap();
        assert!((b.r1 - CMat::identity(4, 4) / C64::from(16.0)).norm() < 1e-15);
        assert!(b.r2.norm() < 1e-15);
    }

    #[test]
    fn singular_input_is_rejected() {
        let x = CMat::from_element(3, 2, C64::new(1.0, 0.5));
        assert!(matches!(
            inv_square_blocks(&sample_extended_cov(&x)),
            Err(Error::SingularCovariance { .. })
        ));
    }
}
