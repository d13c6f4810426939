mod common;

use std::f64::consts::PI;

use common::cos_moment_quadrature;
use idnc::array::ArrayGeometry;
use idnc::covariance::{build_extended_rss, build_t, build_tprime, Psi};
use idnc::estimator::cost::a_b_matrices;
use idnc::sources::AngularDistribution;
use idnc::{deg, RMat};
use proptest::prelude::*;

const FAMILIES: [AngularDistribution; 2] = [AngularDistribution::Gaussian, AngularDistribution::Uniform];

fn quad_factor(dist: AngularDistribution, psi: Psi, geom: &ArrayGeometry, sign: f64) -> RMat {
    let l = geom.sensors();
    RMat::from_fn(l, l, |p, q| {
        let a = 2.0 * PI * (geom.phase_slope(p, psi.doa) + sign * geom.phase_slope(q, psi.doa));
        cos_moment_quadrature(dist, a, psi.spread)
    })
}

#[test]
fn factors_match_quadrature() {
    let geom = ArrayGeometry::ula(6, 0.5);
    for dist in FAMILIES {
        for doa in [10.0, 30.0, -45.0] {
            for spread in [0.5, 1.5, 3.0, 5.0, 8.0] {
                let psi = Psi::new(deg(doa), deg(spread));
                let t = build_t(dist, psi, &geom);
                let tp = build_tprime(dist, psi, &geom);
                let et = (t - quad_factor(dist, psi, &geom, -1.0)).amax();
                let etp = (tp - quad_factor(dist, psi, &geom, 1.0)).amax();
                assert!(et < 1e-9 && etp < 1e-9, "{dist:?} {doa} {spread}: {et:e} {etp:e}");
            }
        }
    }
}

#[test]
fn factors_are_toeplitz_and_hankel() {
    let geom = ArrayGeometry::ula(6, 0.5);
    for dist in FAMILIES {
        let psi = Psi::new(deg(20.0), deg(4.0));
        let t = build_t(dist, psi, &geom);
        let tp = build_tprime(dist, psi, &geom);
        for p in 0..6 {
            for q in 0..6 {
                assert_eq!(t[(p, q)], t[(q, p)]);
                assert_eq!(tp[(p, q)], tp[(q, p)]);
                if p > 0 && q > 0 {
                    assert!((t[(p, q)] - t[(p - 1, q - 1)]).abs() < 1e-14);
                }
                if p > 0 && q < 5 {
                    assert!((tp[(p, q)] - tp[(p - 1, q + 1)]).abs() < 1e-14);
                }
            }
            assert!((t[(p, 0)] - tp[(p, 0)]).abs() < 1e-15);
        }
        assert_eq!(t[(0, 0)], 1.0);
    }
}

#[test]
fn extended_model_is_hermitian_psd() {
    let geom = ArrayGeometry::ula(6, 0.5);
    for dist in FAMILIES {
        let r = build_extended_rss(dist, Psi::new(deg(-12.0), deg(2.5)), 0.7, &geom);
        assert!((&r - r.adjoint()).norm() < 1e-13);
        let (vals, _) = idnc::linalg::eigh(&r);
        assert!(vals[0] > -1e-12 * vals[vals.len() - 1]);
    }
}

proptest! {
    #[test]
    fn block_square_identity(doa in -60.0f64..60.0, spread in 0.1f64..8.0, uniform in any::<bool>()) {
        let dist = if uniform { AngularDistribution::Uniform } else { AngularDistribution::Gaussian };
        let geom = ArrayGeometry::ula(6, 0.5);
        let psi = Psi::new(deg(doa), deg(spread));
        let t = build_t(dist, psi, &geom);
        let tp = build_tprime(dist, psi, &geom);
        let mut big = RMat::zeros(12, 12);
        big.view_mut((0, 0), (6, 6)).copy_from(&t);
        big.view_mut((6, 6), (6, 6)).copy_from(&t);
        big.view_mut((0, 6), (6, 6)).copy_from(&tp);
        big.view_mut((6, 0), (6, 6)).copy_from(&tp);
        let sq = &big * &big;
        let (a, b) = a_b_matrices(&t, &tp);
        prop_assert!((sq.view((0, 0), (6, 6)) - &a).amax() < 1e-12);
        prop_assert!((sq.view((0, 6), (6, 6)) - &b).amax() < 1e-12);
        prop_assert!((sq.view((6, 6), (6, 6)) - &a).amax() < 1e-12);
    }

    #[test]
    fn first_column_decreases_under_spread_bound(doa in -60.0f64..60.0, frac in 0.01f64..1.0, uniform in any::<bool>()) {
        let dist = if uniform { AngularDistribution::Uniform } else { AngularDistribution::Gaussian };
        let geom = ArrayGeometry::ula(6, 0.5);
        // first zero of the Uniform moment sits at √3·a·σ = π for the largest lag
        let amax = 2.0 * PI * 5.0 * 0.5 * deg(doa).cos();
        let spread = frac * PI / (3f64.sqrt() * amax);
        let t = build_t(dist, Psi::new(deg(doa), spread), &geom);
        for p in 1..6 {
            prop_assert!(t[(p, 0)] <= t[(p - 1, 0)] + 1e-15);
            prop_assert!(t[(p, 0)] >= -1e-15);
        }
    }
}
