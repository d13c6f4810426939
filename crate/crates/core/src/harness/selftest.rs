//! Quick numerical self-checks run by `idnc selftest`.

use std::f64::consts::PI;

use super::config::{ExperimentConfig, Outputs, ScenarioConfig, SearchSection, SourceConfig, Sweep};
use super::experiment::{results_records, run_experiment};
use crate::analysis::{cost_f, gradient_f, AlphaVector};
use crate::array::ArrayGeometry;
use crate::covariance::{build_t, build_tprime, inv_square_blocks, inverse_square, theoretical_cov, Psi};
use crate::crlb::{crlb_eta, Variant};
use crate::estimator::{cost_fc, cost_full, phase_estimate, Method};
use crate::sources::{AngularDistribution, Scenario, SourceSpec};
use crate::{deg, Result};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, err: f64, tol: f64) -> Check {
    Check {
        name,
        passed: err <= tol,
        detail: format!("error {err:.3e}, tolerance {tol:.0e}"),
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn fig1(gamma: f64, snr_db: f64) -> Scenario {
    let p = 10f64.powf(snr_db / 10.0);
    let mk = |d: f64, s: f64, ph: f64| SourceSpec {
        dist: AngularDistribution::Gaussian,
        central_doa: deg(d),
        spread: deg(s),
        power: p,
        nc_rate: gamma,
        nc_phase: ph,
    };
    Scenario {
        geometry: ArrayGeometry::ula(6, 0.5),
        sources: vec![mk(10.0, 1.5, PI / 3.0), mk(30.0, 3.0, PI / 4.0)],
        noise_variance: 1.0,
        snapshots: 1000,
    }
}

fn spread_factors() -> Check {
    let geom = ArrayGeometry::ula(6, 0.5);
    let mut worst = 0.0f64;
    for dist in [AngularDistribution::Gaussian, AngularDistribution::Uniform] {
        for (d, s) in [(10.0, 1.5), (30.0, 5.0)] {
            let psi = Psi::new(deg(d), deg(s));
            let t = build_t(dist, psi, &geom);
            let tp = build_tprime(dist, psi, &geom);
            let half = match dist {
                AngularDistribution::Gaussian => 12.0 * psi.spread,
                AngularDistribution::Uniform => 3f64.sqrt() * psi.spread,
            };
            for p in 0..6 {
                for q in 0..6 {
                    let sp = geom.phase_slope(p, psi.doa);
                    let sq = geom.phase_slope(q, psi.doa);
                    for (val, a) in [(t[(p, q)], sp - sq), (tp[(p, q)], sp + sq)] {
                        let rho = |u: f64| dist.density(0.0, psi.spread, u).unwrap();
                        let quad = simpson(|u| rho(u) * (2.0 * PI * a * u).cos(), -half, half, 4000);
                        worst = worst.max((val - quad).abs());
                    }
                }
            }
        }
    }
    check("spread factors vs quadrature", worst, 1e-8)
}

fn gradient_fd() -> Check {
    let sc = fig1(1.0, 5.0);
    let rm2 = inverse_square(&theoretical_cov(&sc).rext).unwrap();
    let geom = &sc.geometry;
    let dist = AngularDistribution::Gaussian;
    let a0 = AlphaVector::new(deg(11.0), deg(2.0), 1.0);
    let g = gradient_f(a0, dist, geom, &rm2);
    let mut worst = 0.0f64;
    for i in 0..3 {
        let h = 1e-5;
        let shift = |d: f64| {
            let mut v = a0.to_array();
            v[i] += d;
            cost_f(AlphaVector::from_array(v), dist, geom, &rm2)
        };
        let fd = (shift(h) - shift(-h)) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1e-12));
    }
    check("cost gradient vs finite differences", worst, 1e-5)
}

fn phase_profile() -> Check {
    let sc = fig1(1.0, 5.0);
    let blocks = inv_square_blocks(&theoretical_cov(&sc).rext).unwrap();
    let geom = &sc.geometry;
    let dist = AngularDistribution::Gaussian;
    let mut worst = 0.0f64;
    for (d, s) in [(10.0, 1.5), (22.0, 3.0), (-5.0, 0.5)] {
        let psi = Psi::new(deg(d), deg(s));
        let phi = phase_estimate(psi, dist, &blocks, geom).unwrap();
        let fmin = cost_full(psi, phi, dist, &blocks, geom);
        let fc = cost_fc(psi, dist, &blocks, geom);
        let dense = (0..3600)
            .map(|i| cost_full(psi, 2.0 * PI * i as f64 / 3600.0, dist, &blocks, geom))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((fmin - 2.0 * fc).abs() / fc.abs());
        if dense < fmin - 1e-10 * fmin.abs() {
            worst = f64::INFINITY;
        }
    }
    check("phase minimum equals compressed cost", worst, 1e-10)
}

fn circular_limit() -> Result<Check> {
    let sc = fig1(0.0, 5.0);
    let nc = crlb_eta(&sc, Variant::Noncircular)?;
    let ci = crlb_eta(&sc, Variant::Circular)?;
    let mut worst = 0.0f64;
    for k in 0..2 {
        worst = worst.max((nc.doa(k) / ci.doa(k) - 1.0).abs());
        worst = worst.max((nc.spread(k) / ci.spread(k) - 1.0).abs());
    }
    Ok(check("bounds agree for circular sources", worst, 1e-8))
}

fn determinism() -> Result<Check> {
    let src = |d: f64, s: f64, ph: f64| SourceConfig {
        dist: AngularDistribution::Gaussian,
        doa_deg: d,
        spread_deg: s,
        nc_rate: 1.0,
        nc_phase_deg: ph,
        power: None,
    };
    let cfg = ExperimentConfig {
        name: "selftest".into(),
        scenario: ScenarioConfig {
            array: Default::default(),
            sources: vec![src(10.0, 1.5, 60.0), src(30.0, 3.0, 45.0)],
            snr_db: 10.0,
            noise_variance: 1.0,
            snapshots: 200,
        },
        sweep: Sweep::Snr { values_db: vec![5.0, 10.0] },
        trials: 4,
        seed: 11,
        estimator: Method::Robust,
        dist_model_for_spread: AngularDistribution::Gaussian,
        synthesizer: Default::default(),
        rays_per_source: 100,
        analytical: false,
        search: SearchSection {
            theta_min_deg: 0.0,
            theta_max_deg: 40.0,
            theta_step_deg: 1.0,
            ..Default::default()
        },
        outputs: Outputs {
            csv: "selftest.csv".into(),
            plot: None,
        },
    };
    let a = results_records(&run_experiment(&cfg, 1)?);
    let b = results_records(&run_experiment(&cfg, 3)?);
    Ok(Check {
        name: "monte carlo independent of worker count",
        passed: a == b,
        detail: format!("{} rows compared", a.len()),
    })
}

pub fn run_selftest() -> Result<Vec<Check>> {
    Ok(vec![
        spread_factors(),
        gradient_fd(),
        phase_profile(),
        circular_limit()?,
        determinism()?,
    ])
}
