//! Array geometry and steering vectors.
//!
//! A sensor `l` responds to a unit plane wave from `θ` with
//! `exp(j·2π·f_l(θ))`. Angles are in radians and measured from broadside.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{CVec, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ArrayKind {
    /// Equally spaced line, first sensor at the origin.
    UniformLinear { spacing_over_wavelength: f64 },
    /// Arbitrary planar layout; positions `(x, y)` in wavelengths, `θ`
    /// measured from the y axis.
    Planar { positions: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    sensors: usize,
    kind: ArrayKind,
}

impl ArrayGeometry {
    pub fn ula(sensors: usize, spacing_over_wavelength: f64) -> Self {
        assert!(sensors >= 2, "an array needs at least two sensors");
        assert!(spacing_over_wavelength > 0.0, "spacing must be positive");
        Self {
            sensors,
            kind: ArrayKind::UniformLinear {
                spacing_over_wavelength,
            },
        }
    }

    pub fn planar(positions: Vec<(f64, f64)>) -> Self {
        assert!(positions.len() >= 2, "an array needs at least two sensors");
        Self {
            sensors: positions.len(),
            kind: ArrayKind::Planar { positions },
        }
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn kind(&self) -> &ArrayKind {
        &self.kind
    }

    /// Inter-sensor spacing when `f'_l(θ) = l·g(θ)` holds, i.e. the array is
    /// an equally spaced line.
    pub fn uniform_spacing(&self) -> Option<f64> {
        match &self.kind {
            ArrayKind::UniformLinear {
                spacing_over_wavelength,
            } => Some(*spacing_over_wavelength),
            ArrayKind::Planar { positions } => {
                let (x0, y0) = positions[0];
                let d = positions[1].0 - x0;
                let ok = d != 0.0
                    && positions.iter().enumerate().all(|(l, &(x, y))| {
                        (y - y0).abs() < 1e-12 && (x - x0 - l as f64 * d).abs() < 1e-12
                    });
                ok.then_some(d)
            }
        }
    }

    /// `f_l(θ)` and its first three derivatives.
    pub fn phase_derivs(&self, l: usize, theta: f64) -> [f64; 4] {
        let (s, c) = theta.sin_cos();
        let (x, y) = match &self.kind {
            ArrayKind::UniformLinear {
                spacing_over_wavelength,
            } => (l as f64 * spacing_over_wavelength, 0.0),
            ArrayKind::Planar { positions } => positions[l],
        };
        [x * s + y * c, x * c - y * s, -x * s - y * c, -x * c + y * s]
    }

    /// `f_l(θ)`.
    pub fn phase(&self, l: usize, theta: f64) -> f64 {
        self.phase_derivs(l, theta)[0]
    }

    /// `f'_l(θ)`.
    pub fn phase_slope(&self, l: usize, theta: f64) -> f64 {
        self.phase_derivs(l, theta)[1]
    }

    /// `g(θ)` with `f'_l(θ) = l·g(θ)`; `None` for non-separable layouts.
    pub fn phase_rate(&self, theta: f64) -> Option<f64> {
        self.uniform_spacing().map(|d| d * theta.cos())
    }

    pub fn steering_vector(&self, theta: f64) -> CVec {
        CVec::from_fn(self.sensors, |l, _| {
            C64::from_polar(1.0, 2.0 * PI * self.phase(l, theta))
        })
    }

    /// `[a(θ); e^{-jφ}·conj(a(θ))]`.
    pub fn extended_steering(&self, theta: f64, phi: f64) -> CVec {
        let a = self.steering_vector(theta);
        let rot = C64::from_polar(1.0, -phi);
        let n = self.sensors;
        CVec::from_fn(2 * n, |i, _| if i < n { a[i] } else { rot * a[i - n].conj() })
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}
