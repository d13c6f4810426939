//! Analytical bias, covariance and MSE of the estimator, obtained from a
//! first-order expansion of the gradient of the uncompressed cost
//! `f(α | R) = tr{R̃_ss(α) R R̃_ss(α)}` with `α = (Θ, σ, φ)`.

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::covariance::{extended_rss_derivs, inverse_square, theoretical_cov, ExtendedRssDerivs, Psi};
use crate::linalg::{eigh, hermitian_part, trace_prod};
use crate::sources::{AngularDistribution, Scenario};
use crate::{CMat, Error, RMat, RVec, Result, C64};

/// Per-source parameter triple `(Θ, σ, φ)`, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub doa: f64,
    pub spread: f64,
    pub phase: f64,
}

impl AlphaVector {
    pub fn new(doa: f64, spread: f64, phase: f64) -> Self {
        Self { doa, spread, phase }
    }

    pub fn psi(&self) -> Psi {
        Psi::new(self.doa, self.spread)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.doa, self.spread, self.phase]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// `R̃_ss` and its partials in `α`, each Hermitian-symmetrized.
pub fn drss_ext(alpha: AlphaVector, dist: AngularDistribution, geom: &ArrayGeometry) -> ExtendedRssDerivs {
    let d = extended_rss_derivs(dist, alpha.psi(), alpha.phase, geom);
    ExtendedRssDerivs {
        value: hermitian_part(&d.value),
        first: d.first.map(|m| hermitian_part(&m)),
        second: d.second.map(|row| row.map(|m| hermitian_part(&m))),
    }
}

/// `R̃^{[i]} = R̃ ∂ᵢR̃ + ∂ᵢR̃ R̃`.
fn r_first(d: &ExtendedRssDerivs, i: usize) -> CMat {
    &d.value * &d.first[i] + &d.first[i] * &d.value
}

/// `R̃^{[i,j]} = ∂ᵢR̃ ∂ⱼR̃ + R̃ ∂ᵢⱼR̃ + ∂ᵢⱼR̃ R̃ + ∂ⱼR̃ ∂ᵢR̃`.
fn r_second(d: &ExtendedRssDerivs, i: usize, j: usize) -> CMat {
    &d.first[i] * &d.first[j]
        + &d.value * &d.second[i][j]
        + &d.second[i][j] * &d.value
        + &d.first[j] * &d.first[i]
}

/// Uncompressed cost `tr{R̃_ss R R̃_ss}`.
pub fn cost_f(alpha: AlphaVector, dist: AngularDistribution, geom: &ArrayGeometry, rm2: &CMat) -> f64 {
    let v = crate::covariance::build_extended_rss(dist, alpha.psi(), alpha.phase, geom);
    trace_prod(&(&v * rm2), &v).re
}

pub fn gradient_f(alpha: AlphaVector, dist: AngularDistribution, geom: &ArrayGeometry, rm2: &CMat) -> [f64; 3] {
    let d = drss_ext(alpha, dist, geom);
    std::array::from_fn(|i| trace_prod(rm2, &r_first(&d, i)).re)
}

pub fn hessian_f(alpha: AlphaVector, dist: AngularDistribution, geom: &ArrayGeometry, rm2: &CMat) -> RMat {
    let d = drss_ext(alpha, dist, geom);
    hessian_from(&d, rm2)
}

fn hessian_from(d: &ExtendedRssDerivs, rm2: &CMat) -> RMat {
    let f = RMat::from_fn(3, 3, |i, j| trace_prod(rm2, &r_second(d, i, j)).re);
    (&f + f.transpose()) * 0.5
}

/// Fourth-order moment model for the sample extended covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FourthMoment {
    /// Circular complex Wishart moments, `E{ΔR_ij ΔR_pl} ∝ R_il R_pj`.
    Circular,
    /// Adds the term `(R̃J)_ip (R̃J)*_jl` carried by the conjugate half of
    /// the extended snapshot `x̃ = [x; x*]`.
    Augmented,
}

/// Where the expansion is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionPoint {
    /// Everything at the true parameters `α_k`; the asymptotic bias is the
    /// single Newton step `−F⁻¹f`.
    True,
    /// The large-sample limit `ᾰ_k` (stationary point of `f(·|R⁻²)` near
    /// `α_k`, by damped Newton iteration). The asymptotic bias is `ᾰ_k − α_k`
    /// and the finite-sample terms use `F` and `G_ss` at `ᾰ_k`.
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionOptions {
    pub fourth_moment: FourthMoment,
    pub expansion: ExpansionPoint,
}

impl Default for PredictionOptions {
    fn default() -> Self {
        Self {
            fourth_moment: FourthMoment::Augmented,
            expansion: ExpansionPoint::Asymptotic,
        }
    }
}

impl PredictionOptions {
    /// Circular moments and a single expansion at `α_k`.
    pub fn first_order_circular() -> Self {
        Self {
            fourth_moment: FourthMoment::Circular,
            expansion: ExpansionPoint::True,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsePrediction {
    pub asymptotic_bias: RVec,
    pub residual_bias: RVec,
    pub covariance: RMat,
    pub mse: RMat,
}

impl MsePrediction {
    pub fn rmse(&self, i: usize) -> f64 {
        self.mse[(i, i)].max(0.0).sqrt()
    }
}

/// `E{ΔR⁻²} ≈ (1/(N−2L)) Σ λₙ⁻² ẽₙẽₙᴴ`.
pub fn expected_inverse_square_error(rext: &CMat, n: usize) -> Result<CMat> {
    let dof = dof(rext, n)?;
    Ok(inverse_square(rext)? / C64::from(dof))
}

fn dof(rext: &CMat, n: usize) -> Result<f64> {
    let m = rext.nrows();
    if n <= m {
        return Err(Error::InvalidSpec(format!("need N > 2L (N = {n}, 2L = {m})")));
    }
    Ok((n - m) as f64)
}

struct Spectral {
    vals: RVec,
    vecs: CMat,
    /// `Eᴴ (R̃J) conj(E)`.
    pseudo: CMat,
}

fn spectral(rext: &CMat) -> Result<Spectral> {
    let (vals, vecs) = eigh(&hermitian_part(rext));
    let max = vals[vals.len() - 1];
    if !(max > 0.0) || vals[0] <= 1e-12 * max {
        return Err(Error::SingularCovariance {
            ratio: if max > 0.0 { vals[0] / max } else { 0.0 },
        });
    }
    let m = rext.nrows();
    let l = m / 2;
    let swap = CMat::from_fn(m, m, |r, c| {
        if (r + l) % m == c {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let pseudo = vecs.adjoint() * rext * swap * vecs.map(|v| v.conj());
    Ok(Spectral { vals, vecs, pseudo })
}

/// `c_{nn'} = λₙ⁻¹λₙ'⁻¹(λₙ⁻¹ + λₙ'⁻¹)`, the first-order sensitivity of `R⁻²`
/// in the eigenbasis.
fn sensitivity(vals: &RVec) -> RMat {
    let m = vals.len();
    RMat::from_fn(m, m, |a, b| {
        let (ia, ib) = (1.0 / vals[a], 1.0 / vals[b]);
        ia * ib * (ia + ib)
    })
}

/// `E{v_a v_b}` for `v_a = tr{M_a ΔR⁻²}` with Hermitian `M_a`.
fn quadratic_covariance(sp: &Spectral, mats: &[CMat], dof: f64, model: FourthMoment) -> CMat {
    let c = sensitivity(&sp.vals);
    let m = sp.vals.len();
    // W_a[n, n'] = c_{nn'} (Eᴴ M_a E)_{n'n}
    let w: Vec<CMat> = mats
        .iter()
        .map(|ma| {
            let u = sp.vecs.adjoint() * ma * &sp.vecs;
            CMat::from_fn(m, m, |a, b| u[(b, a)] * c[(a, b)])
        })
        .collect();
    let k = mats.len();
    let mut out = CMat::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            // circular part: Σ c² λλ' U_a[n',n] U_b[n,n']
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..m {
                for q in 0..m {
                    acc += w[a][(p, q)] * w[b][(q, p)] * (sp.vals[p] * sp.vals[q]);
                }
            }
            if model == FourthMoment::Augmented {
                let t = &sp.pseudo * &w[b] * sp.pseudo.adjoint();
                acc += w[a].component_mul(&t).sum();
            }
            out[(a, b)] = acc / C64::from(dof);
        }
    }
    out
}

/// Explicit `H = E{vec(ΔR⁻²) vec(ΔR⁻²)ᵀ}` (column-major vec), size `(2L)² × (2L)²`.
///
/// Built as `B K Bᵀ` with `B_{(i,j),(n,n')} = ẽₙ[i] ẽₙ'[j]*` and `K` the
/// second moments of `ẽₙᴴ ΔR ẽₙ'` scaled by the eigen-sensitivities.
pub fn h_matrix(rext: &CMat, n: usize, model: FourthMoment) -> Result<CMat> {
    let dof = dof(rext, n)?;
    let sp = spectral(rext)?;
    let m = rext.nrows();
    let e = &sp.vecs;
    let c = sensitivity(&sp.vals);
    let idx = |i: usize, j: usize| i + j * m;
    let b = CMat::from_fn(m * m, m * m, |r, q| {
        let (i, j) = (r % m, r / m);
        let (a, a2) = (q % m, q / m);
        e[(i, a)] * e[(j, a2)].conj()
    });
    let mut k = CMat::zeros(m * m, m * m);
    for a in 0..m {
        for a2 in 0..m {
            k[(idx(a, a2), idx(a2, a))] += C64::from(c[(a, a2)] * c[(a2, a)] * sp.vals[a] * sp.vals[a2]);
            if model == FourthMoment::Augmented {
                for g in 0..m {
                    for g2 in 0..m {
                        k[(idx(a, a2), idx(g, g2))] +=
                            sp.pseudo[(a, g)] * sp.pseudo[(a2, g2)].conj() * (c[(a, a2)] * c[(g, g2)]);
                    }
                }
            }
        }
    }
    Ok(&b * k * b.transpose() / C64::from(dof))
}

/// Stationary point of `f(·|R⁻²)` reached by Newton iteration from `start`.
pub fn asymptotic_estimate(
    start: AlphaVector,
    dist: AngularDistribution,
    geom: &ArrayGeometry,
    rm2: &CMat,
) -> Result<AlphaVector> {
    let mut a = start.to_array();
    for _ in 0..50 {
        let alpha = AlphaVector::from_array(a);
        let g = gradient_f(alpha, dist, geom, rm2);
        let h = hessian_f(alpha, dist, geom, rm2);
        let step = solve3(&h, &g)?;
        let mut t = 1.0;
        let f0 = cost_f(alpha, dist, geom, rm2);
        loop {
            let trial: [f64; 3] = std::array::from_fn(|i| a[i] - t * step[i]);
            if trial[1] > 0.0 && cost_f(AlphaVector::from_array(trial), dist, geom, rm2) <= f0 {
                a = trial;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Ok(alpha);
            }
        }
        if step.iter().map(|s| (t * s).abs()).fold(0.0, f64::max) < 1e-13 {
            break;
        }
    }
    Ok(AlphaVector::from_array(a))
}

fn check_conditioning(f: &RMat) -> Result<RMat> {
    let (vals, _) = crate::linalg::eigh_real(f);
    let amax = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let amin = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let cond = if amin > 0.0 { amax / amin } else { f64::INFINITY };
    if cond > 1e12 {
        return Err(Error::IllConditionedHessian { cond });
    }
    f.clone().try_inverse().ok_or(Error::IllConditionedHessian { cond })
}

fn solve3(h: &RMat, g: &[f64; 3]) -> Result<[f64; 3]> {
    let inv = check_conditioning(h)?;
    let s = inv * RVec::from_row_slice(g);
    Ok([s[0], s[1], s[2]])
}

/// Real part of `m`, rejecting imaginary parts above `1e−8` relative to
/// `scale` (the magnitude of the terms that were summed).
fn real_checked(m: &CMat, scale: f64) -> Result<RMat> {
    let re = m.map(|v| v.re);
    let im = m.map(|v| v.im).norm();
    let reference = re.norm().max(scale);
    if im > 1e-8 * reference {
        return Err(Error::ComplexResidue { ratio: im / reference });
    }
    Ok(re)
}

/// MSE prediction for source `k` of `scenario` from `n` snapshots, using
/// the default options.
pub fn predict_mse(scenario: &Scenario, k: usize, n: usize) -> Result<MsePrediction> {
    predict_mse_with(scenario, k, n, &PredictionOptions::default())
}

pub fn predict_mse_with(
    scenario: &Scenario,
    k: usize,
    n: usize,
    opts: &PredictionOptions,
) -> Result<MsePrediction> {
    scenario.validate()?;
    let src = scenario
        .sources
        .get(k)
        .ok_or_else(|| Error::InvalidSpec(format!("no source with index {k}")))?;
    if !(src.spread > 0.0) {
        return Err(Error::DegenerateSpread);
    }
    let geom = &scenario.geometry;
    let rext = theoretical_cov(scenario).rext;
    let dof = dof(&rext, n)?;
    let rm2 = inverse_square(&rext)?;
    let alpha = AlphaVector::new(src.central_doa, src.spread, src.nc_phase);

    // first-order asymptotic bias −F⁻¹f at the true parameters
    let d0 = drss_ext(alpha, src.dist, geom);
    let f0 = hessian_from(&d0, &rm2);
    let finv0 = check_conditioning(&f0)?;
    let grad = RVec::from_fn(3, |i, _| trace_prod(&rm2, &r_first(&d0, i)).re);

    let (asymptotic_bias, d1, finv1) = match opts.expansion {
        ExpansionPoint::True => (-(&finv0 * &grad), d0, finv0),
        ExpansionPoint::Asymptotic => {
            let at = asymptotic_estimate(alpha, src.dist, geom, &rm2)?;
            let d1 = drss_ext(at, src.dist, geom);
            let f1 = hessian_from(&d1, &rm2);
            let inv = check_conditioning(&f1)?;
            let bias = RVec::from_fn(3, |i, _| at.to_array()[i] - alpha.to_array()[i]);
            (bias, d1, inv)
        }
    };
    let mats: Vec<CMat> = (0..3).map(|i| r_first(&d1, i)).collect();

    // residual bias F⁻¹ Gᵀ vec(E{ΔR⁻²}) = F⁻¹ [tr{R̃^{[i]} E{ΔR⁻²}}]
    let mean = &rm2 / C64::from(dof);
    let v_mean = CMat::from_fn(3, 1, |i, _| trace_prod(&mats[i], &mean));
    let mean_scale = mats.iter().map(|m| m.norm()).fold(0.0, f64::max) * mean.norm();
    let residual_bias = &finv1 * real_checked(&v_mean, mean_scale)?.column(0);

    let sp = spectral(&rext)?;
    let ghg = quadratic_covariance(&sp, &mats, dof, opts.fourth_moment);
    let ghg = real_checked(&ghg, 0.0)?;
    let covariance = &finv1 * ghg * &finv1;
    let covariance = (&covariance + covariance.transpose()) * 0.5;

    let ab = &asymptotic_bias;
    let rb = &residual_bias;
    let mse = ab * ab.transpose() + ab * rb.transpose() + rb * ab.transpose() + &covariance;
    Ok(MsePrediction {
        asymptotic_bias,
        residual_bias,
        covariance,
        mse,
    })
}
