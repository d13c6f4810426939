//! Minimization of `g(Θ, ·)` over the monotone box.
//!
//! For fixed `Θ`, `g` is `hᵀK₁h − |hᵀK₂h|` in `h = [1, z]`. Fixing the phase
//! `u` of `hᵀK₂h` gives the convex majorant `hᵀ(K₁ − Re(ū K₂))h`, which is
//! minimized by monotone FISTA with an exact isotonic projection. The phase
//! is then refreshed and the process repeats until the projected gradient
//! of `g` vanishes.

use serde::{Deserialize, Serialize};

use super::cost::AuxiliaryVector;
use crate::array::ArrayGeometry;
use crate::covariance::InvSquareBlocks;
use crate::linalg::eigh_real;
use crate::{CMat, RMat, RVec, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSolverConfig {
    pub max_iters: usize,
    pub stationarity_tol: f64,
    pub feasibility_tol: f64,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            stationarity_tol: 1e-7,
            feasibility_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult {
    pub z: AuxiliaryVector,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stationarity: f64,
}

/// Euclidean projection onto `{1 ≥ z₁ ≥ … ≥ z_n ≥ 0}`: decreasing isotonic
/// regression followed by clipping.
pub fn project_monotone(z: &mut [f64]) {
    // blocks of (mean, weight)
    let mut means: Vec<f64> = Vec::with_capacity(z.len());
    let mut sizes: Vec<usize> = Vec::with_capacity(z.len());
    for &v in z.iter() {
        means.push(v);
        sizes.push(1);
        while means.len() > 1 {
            let n = means.len();
            if means[n - 2] >= means[n - 1] {
                break;
            }
            let (w1, w2) = (sizes[n - 2] as f64, sizes[n - 1] as f64);
            means[n - 2] = (means[n - 2] * w1 + means[n - 1] * w2) / (w1 + w2);
            sizes[n - 2] += sizes[n - 1];
            means.pop();
            sizes.pop();
        }
    }
    let mut i = 0;
    for (m, s) in means.into_iter().zip(sizes) {
        for v in &mut z[i..i + s] {
            *v = m.clamp(0.0, 1.0);
        }
        i += s;
    }
}

/// Quadratic forms `K₁` (real part, symmetrized) and `K₂` (symmetrized)
/// such that `z1 = hᵀK₁h` and `z2 = hᵀK₂h`.
#[derive(Debug, Clone)]
pub struct QuadraticForms {
    pub k1: RMat,
    pub k2: CMat,
}

fn toeplitz_support(m: usize, l: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if m >= l {
        return out;
    }
    for i in 0..l {
        if i + m < l {
            out.push((i, i + m));
            if m > 0 {
                out.push((i + m, i));
            }
        }
    }
    out
}

fn hankel_support(m: usize, l: usize) -> Vec<(usize, usize)> {
    (0..l).filter(|&i| m >= i && m - i < l).map(|i| (i, m - i)).collect()
}

/// `tr(X Y M)` for 0/1 matrices `X`, `Y` given by their supports.
fn trace_xym(x: &[(usize, usize)], y_rows: &[Vec<usize>], m: &CMat) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &(i, k) in x {
        for &j in &y_rows[k] {
            acc += m[(j, i)];
        }
    }
    acc
}

fn rows_of(support: &[(usize, usize)], l: usize) -> Vec<Vec<usize>> {
    let mut rows = vec![Vec::new(); l];
    for &(i, j) in support {
        rows[i].push(j);
    }
    rows
}

impl QuadraticForms {
    pub fn new(theta: f64, blocks: &InvSquareBlocks, geom: &ArrayGeometry) -> Self {
        let l = geom.sensors();
        let nh = 2 * l - 1;
        let a = geom.steering_vector(theta);
        // P = Φᴴ R1 Φ, Q = Φᵀ R2* Φ
        let p = CMat::from_fn(l, l, |q, r| a[q].conj() * blocks.r1[(q, r)] * a[r]);
        let qm = CMat::from_fn(l, l, |q, r| a[q] * blocks.r2[(q, r)].conj() * a[r]);
        let s: Vec<_> = (0..nh).map(|m| toeplitz_support(m, l)).collect();
        let h: Vec<_> = (0..nh).map(|m| hankel_support(m, l)).collect();
        let s_rows: Vec<_> = s.iter().map(|v| rows_of(v, l)).collect();
        let h_rows: Vec<_> = h.iter().map(|v| rows_of(v, l)).collect();
        let mut k1 = CMat::zeros(nh, nh);
        let mut k2 = CMat::zeros(nh, nh);
        for m in 0..nh {
            for n in 0..nh {
                k1[(m, n)] = trace_xym(&s[m], &s_rows[n], &p) + trace_xym(&h[m], &h_rows[n], &p);
                k2[(m, n)] = trace_xym(&s[m], &h_rows[n], &qm) + trace_xym(&h[m], &s_rows[n], &qm);
            }
        }
        let k1 = (&k1 + k1.transpose()).map(|v| 0.5 * v.re);
        let k2 = (&k2 + k2.transpose()) * C64::new(0.5, 0.0);
        Self { k1, k2 }
    }

    fn h_of(z: &[f64]) -> RVec {
        RVec::from_iterator(z.len() + 1, std::iter::once(1.0).chain(z.iter().copied()))
    }

    /// `(hᵀK₁h, hᵀK₂h)`.
    pub fn terms(&self, z: &[f64]) -> (f64, C64) {
        let h = Self::h_of(z);
        let hc = h.map(C64::from);
        let z1 = h.dot(&(&self.k1 * &h));
        let z2 = hc.transpose() * (&self.k2 * &hc);
        (z1, z2[(0, 0)])
    }

    pub fn cost(&self, z: &[f64]) -> f64 {
        let (z1, z2) = self.terms(z);
        z1 - z2.norm()
    }

    /// Convex majorant matrix for phase `u`.
    fn majorant(&self, u: C64) -> RMat {
        let uc = u.conj();
        &self.k1 - self.k2.map(|v| (uc * v).re)
    }
}

struct Majorant {
    g: RMat,
    lip: f64,
}

impl Majorant {
    fn new(forms: &QuadraticForms, u: C64) -> Self {
        let g = forms.majorant(u);
        let n = g.nrows() - 1;
        let sub = g.view((1, 1), (n, n)).into_owned();
        let (vals, _) = eigh_real(&sub);
        let lip = 2.0 * vals[n - 1].max(0.0);
        Self { g, lip }
    }

    fn value(&self, z: &[f64]) -> f64 {
        let h = QuadraticForms::h_of(z);
        h.dot(&(&self.g * &h))
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let h = QuadraticForms::h_of(z);
        let gh = &self.g * &h;
        gh.iter().skip(1).map(|v| 2.0 * v).collect()
    }

    /// `‖z − P(z − ∇/Lip)‖∞`.
    fn stationarity(&self, z: &[f64]) -> f64 {
        if self.lip <= 0.0 {
            return 0.0;
        }
        let grad = self.gradient(z);
        let mut y: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| a - g / self.lip).collect();
        project_monotone(&mut y);
        z.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn phase_of(w: C64) -> C64 {
    let r = w.norm();
    if r > 0.0 {
        w / r
    } else {
        C64::new(1.0, 0.0)
    }
}

/// Monotone FISTA on a convex quadratic over the monotone box. Returns the
/// iterate and the number of iterations used.
fn fista(maj: &Majorant, start: &[f64], tol: f64, budget: usize) -> (Vec<f64>, usize) {
    if maj.lip <= 0.0 || budget == 0 {
        return (start.to_vec(), 0);
    }
    let mut x = start.to_vec();
    let mut fx = maj.value(&x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut used = 0;
    while used < budget {
        used += 1;
        let grad = maj.gradient(&y);
        let mut cand: Vec<f64> = y.iter().zip(&grad).map(|(a, g)| a - g / maj.lip).collect();
        project_monotone(&mut cand);
        let fc = maj.value(&cand);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let prev = x.clone();
        if fc <= fx {
            x = cand.clone();
            fx = fc;
        }
        for i in 0..y.len() {
            y[i] = x[i] + (t / t_next) * (cand[i] - x[i]) + ((t - 1.0) / t_next) * (x[i] - prev[i]);
        }
        t = t_next;
        if used % 8 == 0 && maj.stationarity(&x) <= tol {
            break;
        }
    }
    (x, used)
}

/// Minimizes `g(Θ, z)` over the feasible set starting from `z_init`.
pub fn inner_minimize_z(
    theta: f64,
    blocks: &InvSquareBlocks,
    geom: &ArrayGeometry,
    cfg: &InnerSolverConfig,
    z_init: &AuxiliaryVector,
) -> InnerResult {
    let forms = QuadraticForms::new(theta, blocks, geom);
    minimize_with_forms(&forms, cfg, z_init)
}

pub(crate) fn minimize_with_forms(
    forms: &QuadraticForms,
    cfg: &InnerSolverConfig,
    z_init: &AuxiliaryVector,
) -> InnerResult {
    let mut z = z_init.as_slice().to_vec();
    project_monotone(&mut z);
    let init_cost = forms.cost(&z);
    let mut cost = init_cost;
    let mut used = 0usize;
    let mut stationarity;
    loop {
        let (_, w) = forms.terms(&z);
        let maj = Majorant::new(forms, phase_of(w));
        stationarity = maj.stationarity(&z);
        if stationarity <= cfg.stationarity_tol || used >= cfg.max_iters {
            break;
        }
        let (next, n) = fista(&maj, &z, cfg.stationarity_tol, cfg.max_iters - used);
        used += n;
        let next_cost = forms.cost(&next);
        if next_cost > cost {
            // majorant step cannot increase g; guard against round-off
            break;
        }
        z = next;
        cost = next_cost;
    }
    let converged = stationarity <= cfg.stationarity_tol;
    InnerResult {
        z: AuxiliaryVector::new_unchecked(z),
        cost,
        iterations: used,
        converged,
        stationarity,
    }
}
