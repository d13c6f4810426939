//! Compressed-cost estimation of central DOAs, spreads and noncircularity
//! phases.
//!
//! Two variants share the same cost: [`estimate_2d`] searches the `(Θ, σ)`
//! plane under an assumed distribution family, while
//! [`estimate_doas_robust`] profiles out the spread structure through the
//! auxiliary vector `z` and only needs the family for the final spread step
//! ([`estimate_spread`]).

pub mod cost;
pub mod inner;
pub mod search;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::covariance::{InvSquareBlocks, Psi};
use crate::sources::AngularDistribution;
use crate::{deg, Error, Result};

pub use cost::{cost_fc, cost_full, cost_g, phase_estimate, structured_matrices, AuxiliaryVector};
pub use inner::{inner_minimize_z, project_monotone, InnerResult, InnerSolverConfig, QuadraticForms};
pub use search::{parabolic_offset, select_local_minima, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub theta_grid: Grid,
    pub sigma_grid: Grid,
    /// Number of sources `K`.
    pub sources: usize,
    pub min_separation: f64,
    pub inner_solver: InnerSolverConfig,
    /// Evaluate grid points on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            theta_grid: Grid::new(deg(-60.0), deg(60.0), deg(0.5)),
            sigma_grid: Grid::new(deg(0.1), deg(8.0), deg(0.1)),
            sources: 1,
            min_separation: deg(2.0),
            inner_solver: InnerSolverConfig::default(),
            parallel: true,
        }
    }
}

impl SearchConfig {
    pub fn with_sources(k: usize) -> Self {
        Self {
            sources: k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta_grid.validate()?;
        self.sigma_grid.validate()?;
        if self.sigma_grid.min < 0.0 {
            return Err(Error::InvalidSpec("spread grid must be non-negative".into()));
        }
        if self.sources == 0 {
            return Err(Error::InvalidSpec("at least one source required".into()));
        }
        if !(self.min_separation >= 0.0) {
            return Err(Error::InvalidSpec("min_separation must be non-negative".into()));
        }
        Ok(())
    }
}

fn eval_grid<F: Fn(f64) -> T + Sync + Send, T: Send>(points: &[f64], parallel: bool, f: F) -> Vec<T> {
    if parallel {
        points.par_iter().map(|&x| f(x)).collect()
    } else {
        points.iter().map(|&x| f(x)).collect()
    }
}

/// Output of the DOA stage of the robust estimator.
#[derive(Debug, Clone)]
pub struct DoaSearch {
    pub doas: Vec<f64>,
    pub grid: Vec<f64>,
    pub profile: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    pub inner_converged: Vec<bool>,
}

/// Profile `p(Θ) = min_z g(Θ, z)` and its `K` deepest separated minima.
pub fn estimate_doas_robust(blocks: &InvSquareBlocks, geom: &ArrayGeometry, cfg: &SearchConfig) -> Result<DoaSearch> {
    cfg.validate()?;
    if geom.uniform_spacing().is_none() {
        return Err(Error::NonSeparableGeometry);
    }
    let grid = cfg.theta_grid.points();
    let solved = eval_grid(&grid, cfg.parallel, |theta| {
        let init = AuxiliaryVector::from_distribution(AngularDistribution::Gaussian, Psi::new(theta, deg(1.0)), geom)
            .expect("equally spaced line");
        inner_minimize_z(theta, blocks, geom, &cfg.inner_solver, &init)
    });
    let profile: Vec<f64> = solved.iter().map(|r| r.cost).collect();
    let idx = select_local_minima(&grid, &profile, cfg.sources, cfg.min_separation)?;
    let doas = idx.iter().map(|&i| search::refine(&grid, &profile, i)).collect();
    Ok(DoaSearch {
        doas,
        inner_iterations: solved.iter().map(|r| r.iterations).collect(),
        inner_converged: solved.iter().map(|r| r.converged).collect(),
        grid,
        profile,
    })
}

#[derive(Debug, Clone)]
pub struct SpreadEstimate {
    pub spread: f64,
    /// The minimum sat on a grid endpoint, so the estimate is clamped.
    pub at_boundary: bool,
    pub profile: Vec<f64>,
}

/// `argmin_σ f_c(Θ̂, σ)` over the spread grid with parabolic refinement.
pub fn estimate_spread(
    doa: f64,
    dist: AngularDistribution,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
    cfg: &SearchConfig,
) -> SpreadEstimate {
    let grid = cfg.sigma_grid.points();
    let profile: Vec<f64> = grid
        .iter()
        .map(|&s| cost_fc(Psi::new(doa, s), dist, blocks, geom))
        .collect();
    let best = argmin(&profile);
    let at_boundary = best == 0 || best + 1 == grid.len();
    if at_boundary {
        log::warn!(
            "spread minimum at grid endpoint ({:.3} deg) for DOA {:.3} deg",
            grid[best].to_degrees(),
            doa.to_degrees()
        );
    }
    SpreadEstimate {
        spread: search::refine(&grid, &profile, best).max(0.0),
        at_boundary,
        profile,
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].total_cmp(&v[best]).is_lt() {
            best = i;
        }
    }
    best
}

/// Output of the 2-D search.
#[derive(Debug, Clone)]
pub struct TwoDSearch {
    pub estimates: Vec<(Psi, bool)>,
    pub grid: Vec<f64>,
    /// `min_σ f_c(Θ, σ)` on the DOA grid.
    pub profile: Vec<f64>,
}

/// `K` deepest minima of `f_c` over the `(Θ, σ)` grid, separated in `Θ`.
pub fn estimate_2d(
    dist: AngularDistribution,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
    cfg: &SearchConfig,
) -> Result<TwoDSearch> {
    cfg.validate()?;
    let grid = cfg.theta_grid.points();
    let sigmas = cfg.sigma_grid.points();
    let profile: Vec<f64> = eval_grid(&grid, cfg.parallel, |theta| {
        sigmas
            .iter()
            .map(|&s| cost_fc(Psi::new(theta, s), dist, blocks, geom))
            .fold(f64::INFINITY, f64::min)
    });
    let idx = select_local_minima(&grid, &profile, cfg.sources, cfg.min_separation)?;
    let estimates = idx
        .iter()
        .map(|&i| {
            let doa = search::refine(&grid, &profile, i);
            let s = estimate_spread(doa, dist, blocks, geom, cfg);
            (Psi::new(doa, s.spread), s.at_boundary)
        })
        .collect();
    Ok(TwoDSearch { estimates, grid, profile })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Distribution-free DOA stage followed by the spread stage.
    Robust,
    /// Joint `(Θ, σ)` grid search.
    #[serde(rename = "2d")]
    TwoD,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEstimate {
    pub doa: f64,
    pub spread: f64,
    /// `None` when the data carry no usable noncircularity.
    pub phase: Option<f64>,
    pub spread_at_boundary: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub theta_grid: Vec<f64>,
    pub profile: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    pub inner_converged: Vec<bool>,
}

impl Diagnostics {
    pub fn unconverged_points(&self) -> usize {
        self.inner_converged.iter().filter(|c| !**c).count()
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub sources: Vec<SourceEstimate>,
    pub diagnostics: Diagnostics,
}

/// Full estimate: DOAs, spreads under `dist_model`, and phases.
pub fn estimate(
    method: Method,
    dist_model: AngularDistribution,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
    cfg: &SearchConfig,
) -> Result<EstimationResult> {
    let (psis, diagnostics) = match method {
        Method::Robust => {
            let d = estimate_doas_robust(blocks, geom, cfg)?;
            let psis: Vec<_> = d
                .doas
                .iter()
                .map(|&doa| {
                    let s = estimate_spread(doa, dist_model, blocks, geom, cfg);
                    (Psi::new(doa, s.spread), s.at_boundary)
                })
                .collect();
            let diag = Diagnostics {
                theta_grid: d.grid,
                profile: d.profile,
                inner_iterations: d.inner_iterations,
                inner_converged: d.inner_converged,
            };
            (psis, diag)
        }
        Method::TwoD => {
            let d = estimate_2d(dist_model, blocks, geom, cfg)?;
            let diag = Diagnostics {
                theta_grid: d.grid,
                profile: d.profile,
                ..Default::default()
            };
            (d.estimates, diag)
        }
    };
    let sources = psis
        .into_iter()
        .map(|(psi, at_boundary)| SourceEstimate {
            doa: psi.doa,
            spread: psi.spread,
            phase: phase_estimate(psi, dist_model, blocks, geom).ok(),
            spread_at_boundary: at_boundary,
        })
        .collect();
    Ok(EstimationResult { sources, diagnostics })
}
