//! Stochastic Fisher information and Cramér–Rao bounds on the central DOAs
//! and spreads, with source powers, noncircularity phases and the noise
//! variance as nuisance parameters.

use serde::{Deserialize, Serialize};

use crate::covariance::{extended_rss_derivs, theoretical_cov, Psi};
use crate::linalg::{eigh, hermitian_part, spectral_map, sym_inverse, trace_prod};
use crate::sources::Scenario;
use crate::{CMat, Error, RMat, Result, C64};

/// Rates below this are treated as circular and carry no phase parameter.
pub const PHASE_RATE_FLOOR: f64 = 1e-12;

/// Inversion cutoff relative to the largest eigenvalue magnitude.
pub const INVERSION_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Extended covariance `[x; x*]`: uses both `R_xx` and `R'_xx`.
    Noncircular,
    /// `R_xx` only.
    Circular,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Noncircular => "noncircular",
            Variant::Circular => "circular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Doa(usize),
    Spread(usize),
    Power(usize),
    Phase(usize),
    Noise,
}

/// Parameter ordering `[Θ₁..Θ_K, σ₁..σ_K, β₁..β_K, φ.., σ²_w]`. Phases are
/// present only in the noncircular variant and only for sources with a
/// nonzero noncircularity rate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    params: Vec<Param>,
    sources: usize,
}

impl ParamLayout {
    pub fn new(scenario: &Scenario, variant: Variant) -> Self {
        let k = scenario.sources.len();
        let mut params: Vec<Param> = (0..k).map(Param::Doa).collect();
        params.extend((0..k).map(Param::Spread));
        params.extend((0..k).map(Param::Power));
        if variant == Variant::Noncircular {
            params.extend(
                (0..k)
                    .filter(|&i| scenario.sources[i].nc_rate >= PHASE_RATE_FLOOR)
                    .map(Param::Phase),
            );
        }
        params.push(Param::Noise);
        Self { params, sources: k }
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Number of parameters of interest, `2K`.
    pub fn eta_len(&self) -> usize {
        2 * self.sources
    }

    pub fn index_of(&self, p: Param) -> Option<usize> {
        self.params.iter().position(|&q| q == p)
    }
}

fn scale_off_diagonal(m: &CMat, gamma: f64) -> CMat {
    let l = m.nrows() / 2;
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| {
        if (r < l) != (c < l) {
            m[(r, c)] * gamma
        } else {
            m[(r, c)]
        }
    })
}

fn top_left(m: &CMat) -> CMat {
    let l = m.nrows() / 2;
    m.view((0, 0), (l, l)).into_owned()
}

/// `∂R/∂p`: the extended covariance for [`Variant::Noncircular`], the
/// conjugated covariance for [`Variant::Circular`].
pub fn d_r_dparam(scenario: &Scenario, param: Param, variant: Variant) -> Result<CMat> {
    let geom = &scenario.geometry;
    let l = geom.sensors();
    let ext = match param {
        Param::Noise => CMat::identity(2 * l, 2 * l),
        Param::Doa(k) | Param::Spread(k) | Param::Power(k) | Param::Phase(k) => {
            let s = scenario
                .sources
                .get(k)
                .ok_or_else(|| Error::InvalidSpec(format!("no source with index {k}")))?;
            let d = extended_rss_derivs(s.dist, Psi::new(s.central_doa, s.spread), s.nc_phase, geom);
            let (m, scale) = match param {
                Param::Doa(_) => (&d.first[0], s.power),
                Param::Spread(_) => (&d.first[1], s.power),
                Param::Power(_) => (&d.value, 1.0),
                _ => (&d.first[2], s.power),
            };
            scale_off_diagonal(m, s.nc_rate) * C64::from(scale)
        }
    };
    Ok(match variant {
        Variant::Noncircular => ext,
        Variant::Circular => top_left(&ext),
    })
}

fn model_inverse(r: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(&hermitian_part(r));
    let max = vals[vals.len() - 1];
    if !(max > 0.0) || vals[0] <= INVERSION_CUTOFF * max {
        return Err(Error::SingularModel);
    }
    Ok(spectral_map(&vals, &vecs, |v| 1.0 / v))
}

/// Fisher information for `scenario.snapshots` independent snapshots:
/// `N/2·tr{∂ᵢR̃ R̃⁻¹ ∂ⱼR̃ R̃⁻¹}` (noncircular) or `N·tr{∂ᵢR R⁻¹ ∂ⱼR R⁻¹}`
/// (circular). The two coincide when every noncircularity rate is zero.
pub fn fim(scenario: &Scenario, variant: Variant) -> Result<(ParamLayout, RMat)> {
    scenario.validate()?;
    let layout = ParamLayout::new(scenario, variant);
    let cov = theoretical_cov(scenario);
    let (r, factor) = match variant {
        Variant::Noncircular => (cov.rext, 0.5),
        Variant::Circular => (cov.rxx, 1.0),
    };
    let rinv = model_inverse(&r)?;
    let parts: Vec<CMat> = layout
        .params()
        .iter()
        .map(|&p| d_r_dparam(scenario, p, variant).map(|d| &d * &rinv))
        .collect::<Result<_>>()?;
    let n = layout.len();
    let scale = factor * scenario.snapshots as f64;
    let mut out = RMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = trace_prod(&parts[i], &parts[j]).re * scale;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok((layout, out))
}

/// Inverse through Jacobi scaling and the symmetric eigendecomposition.
fn scaled_inverse(m: &RMat) -> Option<RMat> {
    let d: Vec<f64> = m.diagonal().iter().map(|v| if *v > 0.0 { 1.0 / v.sqrt() } else { 1.0 }).collect();
    let scaled = RMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * d[r] * d[c]);
    let inv = sym_inverse(&scaled, INVERSION_CUTOFF)?;
    Some(RMat::from_fn(m.nrows(), m.ncols(), |r, c| inv[(r, c)] * d[r] * d[c]))
}

/// `(I_ηη − I_ξηᵀ I_ξξ⁻¹ I_ξη)⁻¹`.
pub fn schur_crlb(fim: &RMat, eta: usize) -> Result<RMat> {
    let n = fim.nrows();
    let i_ee = fim.view((0, 0), (eta, eta));
    let i_xe = fim.view((eta, 0), (n - eta, eta));
    let i_xx = fim.view((eta, eta), (n - eta, n - eta)).into_owned();
    let i_xx_inv = scaled_inverse(&i_xx).ok_or(Error::SingularNuisance)?;
    let schur = i_ee - i_xe.transpose() * i_xx_inv * i_xe;
    let schur = (&schur + schur.transpose()) * 0.5;
    let out = scaled_inverse(&schur).ok_or(Error::SingularModel)?;
    Ok((&out + out.transpose()) * 0.5)
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub variant: Variant,
    pub layout: ParamLayout,
    pub fim: RMat,
    /// `2K × 2K` bound on `[Θ₁..Θ_K, σ₁..σ_K]`, rad².
    pub crlb_eta: RMat,
}

impl BoundReport {
    pub fn doa(&self, k: usize) -> f64 {
        self.crlb_eta[(k, k)]
    }

    pub fn spread(&self, k: usize) -> f64 {
        let kk = self.layout.eta_len() / 2 + k;
        self.crlb_eta[(kk, kk)]
    }
}

pub fn crlb_eta(scenario: &Scenario, variant: Variant) -> Result<BoundReport> {
    let (layout, fim) = fim(scenario, variant)?;
    let crlb_eta = schur_crlb(&fim, layout.eta_len())?;
    Ok(BoundReport {
        variant,
        layout,
        fim,
        crlb_eta,
    })
}
