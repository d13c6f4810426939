//! Angular power densities, ID-source descriptions and snapshot synthesis.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::linalg::{eigh_real, spectral_map_real};
use crate::{CMat, Error, RMat, Result, C64};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Family of the normalized angular power density. Both are symmetric about
/// the central DOA and parameterized by their standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngularDistribution {
    Gaussian,
    /// Flat on `[Θ − √3·σ, Θ + √3·σ]`.
    Uniform,
}

/// `C(a, σ) = ∫ρ(θ) cos(a·(θ − Θ)) dθ` and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosMoment {
    pub value: f64,
    pub d_a: f64,
    pub d_s: f64,
    pub d_aa: f64,
    pub d_as: f64,
    pub d_ss: f64,
}

impl AngularDistribution {
    pub fn density(self, center: f64, spread: f64, theta: f64) -> Result<f64> {
        if spread <= 0.0 {
            return Err(Error::DegenerateSpread);
        }
        let u = theta - center;
        Ok(match self {
            AngularDistribution::Gaussian => {
                (-0.5 * (u / spread).powi(2)).exp() / (spread * (2.0 * PI).sqrt())
            }
            AngularDistribution::Uniform => {
                let half = SQRT3 * spread;
                if u.abs() <= half {
                    1.0 / (2.0 * half)
                } else {
                    0.0
                }
            }
        })
    }

    /// Draw an angular offset from the centre.
    pub fn sample_offset<R: Rng + ?Sized>(self, spread: f64, rng: &mut R) -> f64 {
        match self {
            AngularDistribution::Gaussian => spread * rng.sample::<f64, _>(StandardNormal),
            AngularDistribution::Uniform => SQRT3 * spread * (2.0 * rng.random::<f64>() - 1.0),
        }
    }

    /// Closed form of the cosine moment.
    pub fn cos_moment(self, a: f64, spread: f64) -> f64 {
        self.cos_moment_derivs(a, spread).value
    }

    pub fn cos_moment_derivs(self, a: f64, s: f64) -> CosMoment {
        match self {
            AngularDistribution::Gaussian => {
                let c = (-0.5 * a * a * s * s).exp();
                let (a2, s2) = (a * a, s * s);
                CosMoment {
                    value: c,
                    d_a: -a * s2 * c,
                    d_s: -a2 * s * c,
                    d_aa: (a2 * s2 * s2 - s2) * c,
                    d_as: (a2 * a * s2 * s - 2.0 * a * s) * c,
                    d_ss: (a2 * a2 * s2 - a2) * c,
                }
            }
            AngularDistribution::Uniform => {
                let u = SQRT3 * a * s;
                let (f, f1, f2) = sinc_derivs(u);
                CosMoment {
                    value: f,
                    d_a: f1 * SQRT3 * s,
                    d_s: f1 * SQRT3 * a,
                    d_aa: f2 * 3.0 * s * s,
                    d_as: f2 * 3.0 * a * s + f1 * SQRT3,
                    d_ss: f2 * 3.0 * a * a,
                }
            }
        }
    }
}

/// `sin(u)/u` with first and second derivatives; series near zero.
fn sinc_derivs(u: f64) -> (f64, f64, f64) {
    if u.abs() < 1e-2 {
        let u2 = u * u;
        (
            1.0 - u2 / 6.0 + u2 * u2 / 120.0 - u2 * u2 * u2 / 5040.0,
            u * (-1.0 / 3.0 + u2 / 30.0 - u2 * u2 / 840.0),
            -1.0 / 3.0 + u2 / 10.0 - u2 * u2 / 168.0,
        )
    } else {
        let (s, c) = u.sin_cos();
        let f = s / u;
        let f1 = (u * c - s) / (u * u);
        let f2 = -s / u - 2.0 * c / (u * u) + 2.0 * s / (u * u * u);
        (f, f1, f2)
    }
}

/// One incoherently distributed source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub dist: AngularDistribution,
    /// Central DOA, radians.
    pub central_doa: f64,
    /// Angular standard deviation, radians.
    pub spread: f64,
    pub power: f64,
    /// Noncircularity rate γ ∈ [0, 1].
    pub nc_rate: f64,
    /// Noncircularity phase φ, radians.
    pub nc_phase: f64,
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.spread >= 0.0) {
            return Err(Error::InvalidSpec(format!("spread {} < 0", self.spread)));
        }
        if !(self.power > 0.0) {
            return Err(Error::InvalidSpec(format!("power {} <= 0", self.power)));
        }
        if !(0.0..=1.0).contains(&self.nc_rate) {
            return Err(Error::InvalidSpec(format!("nc_rate {} outside [0, 1]", self.nc_rate)));
        }
        if !(self.central_doa.abs() < PI / 2.0) {
            return Err(Error::InvalidSpec(format!(
                "central DOA {} rad outside (-π/2, π/2)",
                self.central_doa
            )));
        }
        Ok(())
    }
}

/// Array, sources and noise level for one experiment point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub sources: Vec<SourceSpec>,
    pub noise_variance: f64,
    pub snapshots: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        for s in &self.sources {
            s.validate()?;
        }
        if !(self.noise_variance > 0.0) {
            return Err(Error::InvalidSpec("noise variance must be positive".into()));
        }
        if self.snapshots == 0 {
            return Err(Error::InvalidSpec("at least one snapshot required".into()));
        }
        Ok(())
    }

    pub fn sensors(&self) -> usize {
        self.geometry.sensors()
    }
}

/// Complex gain of one ray with `E|c|² = var` and `E c² = γ·e^{jφ}·var`.
fn ray_gain<R: Rng + ?Sized>(src: &SourceSpec, var: f64, rng: &mut R) -> C64 {
    let u: f64 = rng.sample(StandardNormal);
    let rot = C64::from_polar(var.sqrt(), src.nc_phase / 2.0);
    if src.nc_rate >= 1.0 {
        return rot * u;
    }
    let v: f64 = rng.sample(StandardNormal);
    let mix = 0.5 * (1.0 + src.nc_rate);
    rot * C64::new(mix.sqrt() * u, (1.0 - mix).sqrt() * v)
}

/// Physical synthesis: every snapshot sums `rays_per_source` independent
/// scatterers per source, each with a fresh angle and gain.
pub fn synthesize_rays<R: Rng + ?Sized>(
    scenario: &Scenario,
    rays_per_source: usize,
    rng: &mut R,
) -> Result<CMat> {
    scenario.validate()?;
    if rays_per_source == 0 {
        return Err(Error::InvalidSpec("rays_per_source must be >= 1".into()));
    }
    let geom = &scenario.geometry;
    let l_count = geom.sensors();
    let n = scenario.snapshots;
    let noise_sd = (scenario.noise_variance / 2.0).sqrt();
    let mut x = CMat::zeros(l_count, n);
    for col in 0..n {
        for src in &scenario.sources {
            let var = src.power / rays_per_source as f64;
            for _ in 0..rays_per_source {
                let theta = src.central_doa + src.dist.sample_offset(src.spread, rng);
                let c = ray_gain(src, var, rng);
                for l in 0..l_count {
                    x[(l, col)] += c * C64::from_polar(1.0, 2.0 * PI * geom.phase(l, theta));
                }
            }
        }
        for l in 0..l_count {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            x[(l, col)] += C64::new(noise_sd * re, noise_sd * im);
        }
    }
    Ok(x)
}

/// Real `2L × 2L` covariance of `[Re x; Im x]` for given conjugated and
/// unconjugated covariances.
pub fn composite_real_covariance(rxx: &CMat, rpxx: &CMat) -> RMat {
    let l = rxx.nrows();
    let sum = rxx + rpxx;
    let diff = rxx - rpxx;
    RMat::from_fn(2 * l, 2 * l, |r, c| {
        0.5 * match (r < l, c < l) {
            (true, true) => sum[(r, c)].re,
            (true, false) => -diff[(r, c - l)].im,
            (false, true) => sum[(r - l, c)].im,
            (false, false) => diff[(r - l, c - l)].re,
        }
    })
}

/// Gaussian synthesis with prescribed `E{xxᴴ}` and `E{xxᵀ}`.
pub fn synthesize_gaussian<R: Rng + ?Sized>(
    rxx: &CMat,
    rpxx: &CMat,
    snapshots: usize,
    rng: &mut R,
) -> Result<CMat> {
    let l = rxx.nrows();
    let comp = composite_real_covariance(rxx, rpxx);
    let (vals, vecs) = eigh_real(&comp);
    let norm = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 * norm {
        return Err(Error::NotPsd { min_eig: min, norm });
    }
    let factor = spectral_map_real(&vals, &vecs, |v| v.max(0.0).sqrt());
    let mut x = CMat::zeros(l, snapshots);
    let mut w = crate::RVec::zeros(2 * l);
    for col in 0..snapshots {
        for v in w.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let y = &factor * &w;
        for r in 0..l {
            x[(r, col)] = C64::new(y[r], y[r + l]);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn gaussian_peak_and_normalization() {
        let s = deg(3.0);
        let d = AngularDistribution::Gaussian;
        let peak = d.density(0.2, s, 0.2).unwrap();
        assert!((peak - 1.0 / (s * (2.0 * PI).sqrt())).abs() < 1e-12);
        let mass = simpson(|t| d.density(0.2, s, t).unwrap(), 0.2 - 8.0 * s, 0.2 + 8.0 * s, 4000);
        assert!((mass - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_support_and_variance() {
        let s = deg(2.0);
        let d = AngularDistribution::Uniform;
        assert_eq!(d.density(0.0, s, 2.0 * s).unwrap(), 0.0);
        let half = SQRT3 * s;
        let var = simpson(|t| t * t * d.density(0.0, s, t).unwrap(), -half, half, 2000);
        assert!((var - s * s).abs() < 1e-12);
    }

    #[test]
    fn zero_spread_density_is_error() {
        assert!(matches!(
            AngularDistribution::Gaussian.density(0.0, 0.0, 0.0),
            Err(Error::DegenerateSpread)
        ));
    }

    #[test]
    fn cos_moment_derivatives_match_finite_differences() {
        for dist in [AngularDistribution::Gaussian, AngularDistribution::Uniform] {
            for &(a, s) in &[(3.0, 0.05), (12.0, 0.09), (0.001, 0.02), (7.5, 0.0)] {
                let m = dist.cos_moment_derivs(a, s);
                let h = 1e-5;
                let f = |a: f64, s: f64| dist.cos_moment(a, s);
                let da = (f(a + h, s) - f(a - h, s)) / (2.0 * h);
                let ds = (f(a, s + h) - f(a, s - h)) / (2.0 * h);
                assert!((m.d_a - da).abs() < 1e-7, "{dist:?} d_a");
                assert!((m.d_s - ds).abs() < 1e-7, "{dist:?} d_s");
                let g = |a: f64, s: f64| dist.cos_moment_derivs(a, s);
                let daa = (g(a + h, s).d_a - g(a - h, s).d_a) / (2.0 * h);
                let das = (g(a, s + h).d_a - g(a, s - h).d_a) / (2.0 * h);
                let dss = (g(a, s + h).d_s - g(a, s - h).d_s) / (2.0 * h);
                assert!((m.d_aa - daa).abs() < 1e-6, "{dist:?} d_aa");
                assert!((m.d_as - das).abs() < 1e-6, "{dist:?} d_as");
                assert!((m.d_ss - dss).abs() < 1e-5, "{dist:?} d_ss");
            }
        }
    }

    #[test]
    fn rectilinear_ray_gain_has_fixed_phase() {
        let src = SourceSpec {
            dist: AngularDistribution::Gaussian,
            central_doa: 0.1,
            spread: 0.02,
            power: 2.0,
            nc_rate: 1.0,
            nc_phase: PI / 3.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let c = ray_gain(&src, 0.5, &mut rng);
            let ratio = c * c / c.norm_sqr();
            assert!((ratio - C64::from_polar(1.0, PI / 3.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn point_source_without_noise_is_scaled_steering_vector() {
        let geom = ArrayGeometry::ula(6, 0.5);
        let phi = 0.7;
        let sc = Scenario {
            geometry: geom.clone(),
            sources: vec![SourceSpec {
                dist: AngularDistribution::Gaussian,
                central_doa: deg(20.0),
                spread: 0.0,
                power: 1.0,
                nc_rate: 1.0,
                nc_phase: phi,
            }],
            noise_variance: 1e-300,
            snapshots: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = synthesize_rays(&sc, 10, &mut rng).unwrap();
        let a = geom.steering_vector(deg(20.0));
        let scale = x[(0, 0)] / a[0] * C64::from_polar(1.0, -phi / 2.0);
        assert!(scale.im.abs() < 1e-12);
        for l in 0..6 {
            let want = a[l] * C64::from_polar(1.0, phi / 2.0) * scale.re;
            assert!((x[(l, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = SourceSpec {
            dist: AngularDistribution::Uniform,
            central_doa: 0.0,
            spread: 0.01,
            power: 1.0,
            nc_rate: 0.5,
            nc_phase: 0.0,
        };
        assert!(s.validate().is_ok());
        s.nc_rate = 1.5;
        assert!(s.validate().is_err());
        s.nc_rate = 1.0;
        s.power = 0.0;
        assert!(s.validate().is_err());
        s.power = 1.0;
        s.central_doa = 2.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn gaussian_synth_circular_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let l = 3;
        let x = synthesize_gaussian(&CMat::identity(l, l), &CMat::zeros(l, l), 20000, &mut rng)
            .unwrap();
        let n = x.ncols() as f64;
        let r = &x * x.adjoint() / C64::from(n);
        let rp = &x * x.transpose() / C64::from(n);
        assert!((r - CMat::identity(l, l)).norm() < 0.05);
        assert!(rp.norm() < 0.05);
    }

    #[test]
    fn gaussian_synth_rectilinear_is_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let one = CMat::identity(1, 1);
        let x = synthesize_gaussian(&one, &one, 1000, &mut rng).unwrap();
        assert!(x.iter().all(|v| v.im.abs() < 1e-12));
    }

    #[test]
    fn gaussian_synth_rejects_indefinite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = CMat::identity(2, 2);
        let rp = CMat::identity(2, 2) * C64::from(3.0);
        assert!(matches!(
            synthesize_gaussian(&r, &rp, 5, &mut rng),
            Err(Error::NotPsd { .. })
        ));
    }
}
