mod common;

use common::{fd, fd_mat, random_scenario, rel_err, rng};
use idnc::analysis::{cost_f, gradient_f, hessian_f, AlphaVector};
use idnc::array::ArrayGeometry;
use idnc::covariance::{extended_rss_derivs, factor_derivs, inverse_square, theoretical_cov, Factor, Psi};
use idnc::crlb::{d_r_dparam, Param, ParamLayout, Variant};
use idnc::sources::{AngularDistribution, Scenario};
use idnc::{deg, CMat};
use rand::Rng;

#[test]
fn factor_partials_match_differences() {
    let geom = ArrayGeometry::ula(6, 0.5);
    let h = 1e-6;
    for dist in [AngularDistribution::Gaussian, AngularDistribution::Uniform] {
        for which in [Factor::Conjugated, Factor::Unconjugated] {
            let psi = Psi::new(deg(17.0), deg(2.2));
            let d = factor_derivs(dist, psi, &geom, which);
            let at = |doa: f64, s: f64| factor_derivs(dist, Psi::new(doa, s), &geom, which);
            let dd = (at(psi.doa + h, psi.spread).value - at(psi.doa - h, psi.spread).value) / (2.0 * h);
            let ds = (at(psi.doa, psi.spread + h).value - at(psi.doa, psi.spread - h).value) / (2.0 * h);
            assert!((&dd - &d.d_doa).norm() <= 1e-7 * d.d_doa.norm().max(1.0));
            assert!((&ds - &d.d_spread).norm() <= 1e-7 * d.d_spread.norm().max(1.0));
            let ddd = (at(psi.doa + h, psi.spread).d_doa - at(psi.doa - h, psi.spread).d_doa) / (2.0 * h);
            let dds = (at(psi.doa, psi.spread + h).d_doa - at(psi.doa, psi.spread - h).d_doa) / (2.0 * h);
            let dss = (at(psi.doa, psi.spread + h).d_spread - at(psi.doa, psi.spread - h).d_spread) / (2.0 * h);
            assert!((&ddd - &d.d_doa_doa).norm() <= 1e-5 * d.d_doa_doa.norm().max(1.0));
            assert!((&dds - &d.d_doa_spread).norm() <= 1e-5 * d.d_doa_spread.norm().max(1.0));
            assert!((&dss - &d.d_spread_spread).norm() <= 1e-5 * d.d_spread_spread.norm().max(1.0));
        }
    }
}

#[test]
fn extended_partials_match_differences() {
    let geom = ArrayGeometry::ula(6, 0.5);
    let mut r = rng(3);
    for _ in 0..10 {
        let dist = if r.random::<bool>() { AngularDistribution::Uniform } else { AngularDistribution::Gaussian };
        let a0 = [deg(r.random_range(-50.0..50.0)), deg(r.random_range(0.5..6.0)), r.random_range(-3.0..3.0)];
        let d = extended_rss_derivs(dist, Psi::new(a0[0], a0[1]), a0[2], &geom);
        let eval = |v: [f64; 3]| extended_rss_derivs(dist, Psi::new(v[0], v[1]), v[2], &geom);
        for i in 0..3 {
            let shifted = |x: f64| {
                let mut v = a0;
                v[i] = x;
                v
            };
            let first = fd_mat(|x| eval(shifted(x)).value, a0[i], 1e-6);
            assert!(rel_err(&first, &d.first[i], 1.0) < 1e-7, "first {i}");
            for j in 0..3 {
                let second = fd_mat(|x| eval(shifted(x)).first[j].clone(), a0[i], 1e-5);
                assert!(rel_err(&second, &d.second[i][j], 1.0) < 1e-5, "second {i} {j}");
            }
        }
    }
}

#[test]
fn cost_gradient_and_hessian_match_differences() {
    let mut r = rng(5);
    for _ in 0..5 {
        let sc = random_scenario(&mut r);
        let rm2 = inverse_square(&theoretical_cov(&sc).rext).unwrap();
        let s = &sc.sources[0];
        let a0 = AlphaVector::new(s.central_doa + deg(0.7), s.spread * 1.2, s.nc_phase + 0.3);
        let g = gradient_f(a0, s.dist, &sc.geometry, &rm2);
        let hm = hessian_f(a0, s.dist, &sc.geometry, &rm2);
        for i in 0..3 {
            let at = |x: f64| {
                let mut v = a0.to_array();
                v[i] = x;
                AlphaVector::from_array(v)
            };
            let gi = fd(|x| cost_f(at(x), s.dist, &sc.geometry, &rm2), a0.to_array()[i], 1e-6);
            assert!((gi - g[i]).abs() <= 1e-6 * g[i].abs().max(1e-3), "grad {i}: {gi} vs {}", g[i]);
            for j in 0..3 {
                let hij = fd(|x| gradient_f(at(x), s.dist, &sc.geometry, &rm2)[j], a0.to_array()[i], 1e-6);
                assert!((hij - hm[(i, j)]).abs() <= 1e-4 * hm[(i, j)].abs().max(1e-2), "hess {i} {j}");
            }
        }
    }
}

fn perturb(sc: &Scenario, p: Param, h: f64) -> Scenario {
    let mut s = sc.clone();
    match p {
        Param::Doa(k) => s.sources[k].central_doa += h,
        Param::Spread(k) => s.sources[k].spread += h,
        Param::Power(k) => s.sources[k].power += h,
        Param::Phase(k) => s.sources[k].nc_phase += h,
        Param::Noise => s.noise_variance += h,
    }
    s
}

#[test]
fn fim_partials_match_model_differences() {
    let mut r = rng(9);
    for _ in 0..5 {
        let sc = random_scenario(&mut r);
        for variant in [Variant::Noncircular, Variant::Circular] {
            let layout = ParamLayout::new(&sc, variant);
            for &p in layout.params() {
                let model = |x: f64| -> CMat {
                    let rext = theoretical_cov(&perturb(&sc, p, x)).rext;
                    match variant {
                        Variant::Noncircular => rext,
                        Variant::Circular => rext.view((0, 0), (6, 6)).into_owned(),
                    }
                };
                let num = fd_mat(model, 0.0, 1e-6);
                let ana = d_r_dparam(&sc, p, variant).unwrap();
                assert!(rel_err(&num, &ana, 1e-3) < 1e-6, "{p:?} {variant:?}: {}", rel_err(&num, &ana, 1e-3));
            }
        }
    }
}
