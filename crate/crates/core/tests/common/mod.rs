//! Independent numerical oracles and scenario builders shared by the
//! integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use idnc::array::ArrayGeometry;
use idnc::sources::{AngularDistribution, Scenario, SourceSpec};
use idnc::{deg, CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `∫ρ(u) cos(a·u) du` for the centred density by adaptive quadrature,
/// split into panels so the oscillation never fools the error estimate.
pub fn cos_moment_quadrature(dist: AngularDistribution, a: f64, spread: f64) -> f64 {
    let half = match dist {
        AngularDistribution::Gaussian => 14.0 * spread,
        AngularDistribution::Uniform => 3f64.sqrt() * spread,
    };
    let panels = 16;
    let w = 2.0 * half / panels as f64;
    let f = |u: f64| dist.density(0.0, spread, u).unwrap() * (a * u).cos();
    (0..panels)
        .map(|i| {
            let lo = -half + i as f64 * w;
            adaptive_simpson(&f, lo, lo + w, 1e-13)
        })
        .sum()
}

/// Central difference of a scalar function.
pub fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference of a matrix-valued function.
pub fn fd_mat(f: impl Fn(f64) -> CMat, x: f64, h: f64) -> CMat {
    (f(x + h) - f(x - h)) / C64::from(2.0 * h)
}

/// `‖a − b‖ / max(‖b‖, floor)`.
pub fn rel_err(a: &CMat, b: &CMat, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

pub fn src(dist: AngularDistribution, doa_deg: f64, spread_deg: f64, power: f64, gamma: f64, phase: f64) -> SourceSpec {
    SourceSpec {
        dist,
        central_doa: deg(doa_deg),
        spread: deg(spread_deg),
        power,
        nc_rate: gamma,
        nc_phase: phase,
    }
}

pub fn snr_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Two sources, ULA L=6, half-wavelength spacing, unit noise.
pub fn two_source(
    dists: [AngularDistribution; 2],
    doas: [f64; 2],
    spreads: [f64; 2],
    gamma: f64,
    snr_db: f64,
    snapshots: usize,
) -> Scenario {
    let p = snr_power(snr_db);
    Scenario {
        geometry: ArrayGeometry::ula(6, 0.5),
        sources: vec![
            src(dists[0], doas[0], spreads[0], p, gamma, PI / 3.0),
            src(dists[1], doas[1], spreads[1], p, gamma, PI / 4.0),
        ],
        noise_variance: 1.0,
        snapshots,
    }
}

/// GID(10°, 1.5°) + GID(30°, 3°), γ = 1, φ = (π/3, π/4).
pub fn fig1(snr_db: f64, snapshots: usize) -> Scenario {
    let g = AngularDistribution::Gaussian;
    two_source([g, g], [10.0, 30.0], [1.5, 3.0], 1.0, snr_db, snapshots)
}

/// A random two-source scenario with well separated, moderately spread sources.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let dist = |r: &mut ChaCha8Rng| {
        if r.random::<bool>() {
            AngularDistribution::Gaussian
        } else {
            AngularDistribution::Uniform
        }
    };
    let d1 = rng.random_range(-40.0..10.0);
    let d2 = d1 + rng.random_range(10.0..30.0);
    Scenario {
        geometry: ArrayGeometry::ula(6, 0.5),
        sources: vec![
            src(dist(rng), d1, rng.random_range(0.5..5.0), rng.random_range(0.5..5.0), rng.random_range(0.0..1.0), rng.random_range(-PI..PI)),
            src(dist(rng), d2, rng.random_range(0.5..5.0), rng.random_range(0.5..5.0), rng.random_range(0.0..1.0), rng.random_range(-PI..PI)),
        ],
        noise_variance: rng.random_range(0.5..2.0),
        snapshots: 1000,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
