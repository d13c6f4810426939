//! Python bindings. Angles cross the boundary in degrees.

use std::path::PathBuf;

use ::idnc as core;
use core::array::ArrayGeometry;
use core::covariance::{inv_square_blocks, sample_extended_cov, theoretical_cov};
use core::crlb::{crlb_eta, Variant};
use core::estimator::{estimate, Method, SearchConfig};
use core::harness::{self as hs, ExperimentConfig};
use core::sources::{synthesize_gaussian, synthesize_rays, AngularDistribution};
use core::{CMat, Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidSpec(_) | Error::MalformedCsv(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_dist(s: &str) -> PyResult<AngularDistribution> {
    match s {
        "gaussian" => Ok(AngularDistribution::Gaussian),
        "uniform" => Ok(AngularDistribution::Uniform),
        _ => Err(PyValueError::new_err(format!("unknown distribution {s:?}"))),
    }
}

fn dist_name(d: AngularDistribution) -> &'static str {
    match d {
        AngularDistribution::Gaussian => "gaussian",
        AngularDistribution::Uniform => "uniform",
    }
}

fn parse_method(s: &str) -> PyResult<Method> {
    match s {
        "robust" => Ok(Method::Robust),
        "2d" | "two_d" => Ok(Method::TwoD),
        _ => Err(PyValueError::new_err(format!("unknown method {s:?}"))),
    }
}

fn parse_variant(s: &str) -> PyResult<Variant> {
    match s {
        "noncircular" => Ok(Variant::Noncircular),
        "circular" => Ok(Variant::Circular),
        _ => Err(PyValueError::new_err(format!("unknown variant {s:?}"))),
    }
}

fn to_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<C64>]) -> PyResult<CMat> {
    let n = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a non-empty rectangular matrix"));
    }
    Ok(CMat::from_fn(rows.len(), n, |r, c| rows[r][c]))
}

/// One incoherently distributed source.
#[pyclass(name = "SourceSpec", from_py_object)]
#[derive(Clone)]
struct PySourceSpec {
    inner: core::sources::SourceSpec,
}

#[pymethods]
impl PySourceSpec {
    #[new]
    #[pyo3(signature = (dist, doa_deg, spread_deg, power=1.0, nc_rate=1.0, nc_phase_deg=0.0))]
    fn new(dist: &str, doa_deg: f64, spread_deg: f64, power: f64, nc_rate: f64, nc_phase_deg: f64) -> PyResult<Self> {
        let inner = core::sources::SourceSpec {
            dist: parse_dist(dist)?,
            central_doa: doa_deg.to_radians(),
            spread: spread_deg.to_radians(),
            power,
            nc_rate,
            nc_phase: nc_phase_deg.to_radians(),
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dist(&self) -> &'static str {
        dist_name(self.inner.dist)
    }

    #[getter]
    fn doa_deg(&self) -> f64 {
        self.inner.central_doa.to_degrees()
    }

    #[getter]
    fn spread_deg(&self) -> f64 {
        self.inner.spread.to_degrees()
    }

    #[getter]
    fn power(&self) -> f64 {
        self.inner.power
    }

    #[getter]
    fn nc_rate(&self) -> f64 {
        self.inner.nc_rate
    }

    #[getter]
    fn nc_phase_deg(&self) -> f64 {
        self.inner.nc_phase.to_degrees()
    }

    fn __repr__(&self) -> String {
        format!(
            "SourceSpec({:?}, doa_deg={}, spread_deg={}, power={}, nc_rate={}, nc_phase_deg={})",
            self.dist(),
            self.doa_deg(),
            self.spread_deg(),
            self.inner.power,
            self.inner.nc_rate,
            self.nc_phase_deg()
        )
    }
}

/// Estimated parameters of one source.
#[pyclass(name = "SourceEstimate", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PySourceEstimate {
    doa_deg: f64,
    spread_deg: f64,
    phase_deg: Option<f64>,
    spread_at_boundary: bool,
}

#[pymethods]
impl PySourceEstimate {
    fn __repr__(&self) -> String {
        let phase = self.phase_deg.map_or("None".to_string(), |p| format!("{p:.4}"));
        format!(
            "SourceEstimate(doa_deg={:.4}, spread_deg={:.4}, phase_deg={phase})",
            self.doa_deg, self.spread_deg
        )
    }
}

fn run_estimate(
    x_or_r: &CMat,
    is_cov: bool,
    geom: &ArrayGeometry,
    sources: usize,
    method: Method,
    dist_model: AngularDistribution,
) -> core::Result<Vec<PySourceEstimate>> {
    let rext = if is_cov { x_or_r.clone() } else { sample_extended_cov(x_or_r) };
    let blocks = inv_square_blocks(&rext)?;
    let res = estimate(method, dist_model, &blocks, geom, &SearchConfig::with_sources(sources))?;
    Ok(res
        .sources
        .iter()
        .map(|s| PySourceEstimate {
            doa_deg: s.doa.to_degrees(),
            spread_deg: s.spread.to_degrees(),
            phase_deg: s.phase.map(f64::to_degrees),
            spread_at_boundary: s.spread_at_boundary,
        })
        .collect())
}

/// Array, sources and noise for one experiment point.
#[pyclass(name = "Scenario", skip_from_py_object)]
struct PyScenario {
    inner: core::sources::Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (sources, sensors=6, spacing=0.5, noise_variance=1.0, snapshots=1000))]
    fn new(sources: Vec<PySourceSpec>, sensors: usize, spacing: f64, noise_variance: f64, snapshots: usize) -> PyResult<Self> {
        if sensors < 2 || spacing.is_nan() || spacing <= 0.0 {
            return Err(PyValueError::new_err("need at least two sensors and a positive spacing"));
        }
        let inner = core::sources::Scenario {
            geometry: ArrayGeometry::ula(sensors, spacing),
            sources: sources.into_iter().map(|s| s.inner).collect(),
            noise_variance,
            snapshots,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn sources(&self) -> Vec<PySourceSpec> {
        self.inner.sources.iter().map(|&inner| PySourceSpec { inner }).collect()
    }

    #[getter]
    fn snapshots(&self) -> usize {
        self.inner.snapshots
    }

    /// Model extended covariance `E{[x; x*][x; x*]ᴴ}` as nested lists.
    fn theoretical_cov(&self) -> Vec<Vec<C64>> {
        to_rows(&theoretical_cov(&self.inner).rext)
    }

    /// Draw `L × N` snapshots.
    #[pyo3(signature = (seed, rays_per_source=None))]
    fn synthesize(&self, seed: u64, rays_per_source: Option<usize>) -> PyResult<Vec<Vec<C64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = match rays_per_source {
            Some(r) => synthesize_rays(&self.inner, r, &mut rng),
            None => {
                let cov = theoretical_cov(&self.inner);
                synthesize_gaussian(&cov.rxx, &cov.rpxx, self.inner.snapshots, &mut rng)
            }
        }
        .map_err(to_py)?;
        Ok(to_rows(&x))
    }

    /// Synthesize one record and estimate every source.
    #[pyo3(signature = (seed, method="robust", dist_model="gaussian"))]
    fn simulate(&self, py: Python<'_>, seed: u64, method: &str, dist_model: &str) -> PyResult<Vec<PySourceEstimate>> {
        let method = parse_method(method)?;
        let dist_model = parse_dist(dist_model)?;
        let sc = self.inner.clone();
        py.detach(move || {
            let cov = theoretical_cov(&sc);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = synthesize_gaussian(&cov.rxx, &cov.rpxx, sc.snapshots, &mut rng)?;
            run_estimate(&x, false, &sc.geometry, sc.sources.len(), method, dist_model)
        })
        .map_err(to_py)
    }

    /// `sqrt` of the CRLB diagonal per source as `(doa_deg, spread_deg)`.
    #[pyo3(signature = (variant="noncircular"))]
    fn crlb_std_deg(&self, variant: &str) -> PyResult<Vec<(f64, f64)>> {
        let b = crlb_eta(&self.inner, parse_variant(variant)?).map_err(to_py)?;
        Ok((0..self.inner.sources.len())
            .map(|k| (b.doa(k).sqrt().to_degrees(), b.spread(k).sqrt().to_degrees()))
            .collect())
    }

    /// Predicted RMSE of source `k` as `(doa_deg, spread_deg, phase_deg)`.
    fn predicted_rmse_deg(&self, k: usize) -> PyResult<(f64, f64, f64)> {
        let p = core::analysis::predict_mse(&self.inner, k, self.inner.snapshots).map_err(to_py)?;
        Ok((p.rmse(0).to_degrees(), p.rmse(1).to_degrees(), p.rmse(2).to_degrees()))
    }
}

/// Estimate `sources` sources from an `L × N` snapshot matrix, or from a
/// `2L × 2L` extended covariance when `is_covariance` is true.
#[pyfunction]
#[pyo3(signature = (data, sources, method="robust", dist_model="gaussian", spacing=0.5, is_covariance=false))]
fn estimate_sources(
    py: Python<'_>,
    data: Vec<Vec<C64>>,
    sources: usize,
    method: &str,
    dist_model: &str,
    spacing: f64,
    is_covariance: bool,
) -> PyResult<Vec<PySourceEstimate>> {
    let m = from_rows(&data)?;
    let method = parse_method(method)?;
    let dist_model = parse_dist(dist_model)?;
    let l = if is_covariance { m.nrows() / 2 } else { m.nrows() };
    if is_covariance && (m.nrows() != m.ncols() || m.nrows() % 2 != 0) {
        return Err(PyValueError::new_err("extended covariance must be 2L x 2L"));
    }
    let geom = ArrayGeometry::ula(l, spacing);
    py.detach(move || run_estimate(&m, is_covariance, &geom, sources, method, dist_model))
        .map_err(to_py)
}

/// `∫ρ(u)·cos(a·u) du` for a centred density with standard deviation `spread` (radians).
#[pyfunction]
fn cos_moment(dist: &str, a: f64, spread: f64) -> PyResult<f64> {
    Ok(parse_dist(dist)?.cos_moment(a, spread))
}

fn load_config(path: PathBuf, out_dir: Option<PathBuf>, seed: Option<u64>, trials: Option<usize>) -> core::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(match out_dir {
        Some(d) => cfg.with_out_dir(&d),
        None => cfg,
    })
}

/// Run a Monte Carlo config file; returns the CSV path.
#[pyfunction]
#[pyo3(signature = (config, workers=1, out_dir=None, seed=None, trials=None))]
fn simulate_config(
    py: Python<'_>,
    config: PathBuf,
    workers: usize,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    trials: Option<usize>,
) -> PyResult<String> {
    py.detach(move || {
        let cfg = load_config(config, out_dir, seed, trials)?;
        let rows = hs::run_experiment(&cfg, workers)?;
        hs::write_results_csv(&cfg.outputs.csv, &cfg, &rows)?;
        Ok(cfg.outputs.csv.display().to_string())
    })
    .map_err(to_py)
}

/// Run a bound sweep config file; returns the CSV path.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None))]
fn bounds_config(config: PathBuf, out_dir: Option<PathBuf>) -> PyResult<String> {
    let cfg = load_config(config, out_dir, None, None).map_err(to_py)?;
    let rows = hs::run_bound_sweep(&cfg).map_err(to_py)?;
    hs::write_bounds_csv(&cfg.outputs.csv, &cfg, &rows).map_err(to_py)?;
    Ok(cfg.outputs.csv.display().to_string())
}

/// Render a harness CSV as SVG.
#[pyfunction]
fn plot_csv(csv: PathBuf, kind: &str, out: PathBuf) -> PyResult<()> {
    let kind: hs::PlotKind = kind.parse().map_err(to_py)?;
    hs::emit_plot(&csv, kind, &out).map_err(to_py)
}

#[pymodule(name = "idnc")]
fn idnc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySourceSpec>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PySourceEstimate>()?;
    m.add_function(wrap_pyfunction!(estimate_sources, m)?)?;
    m.add_function(wrap_pyfunction!(cos_moment, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_config, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_config, m)?)?;
    m.add_function(wrap_pyfunction!(plot_csv, m)?)?;
    Ok(())
}
