//! Periodic 1D grid, its conjugate wavenumber grid and the complex field
//! container shared by every other module.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[x_min, x_max)`.
///
/// Only the bounds and the point count are stored; spacing, sample positions
/// and wavenumbers are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count {n} must be a power of two and at least 8"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "bounds [{x_min}, {x_max}) must be finite with x_max > x_min"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Wavenumber of FFT bin `j` (non-negative frequencies first).
    #[inline]
    pub fn k(&self, j: usize) -> f64 {
        let n = self.n as i64;
        let j = j as i64;
        let m = if j <= n / 2 { j } else { j - n };
        2.0 * PI * m as f64 / self.length()
    }

    pub fn ks(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.k(j)).collect()
    }

    /// Largest representable |k| (the Nyquist wavenumber).
    pub fn k_max(&self) -> f64 {
        PI / self.dx()
    }

    /// Index of the node at `x`, if `x` lies on the grid to within a small
    /// fraction of the spacing.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx();
        let j = s.round();
        if j < 0.0 || j >= self.n as f64 || (s - j).abs() > 1e-9 {
            return None;
        }
        Some(j as usize)
    }
}

/// Sampled complex field ψ(x, t) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveFunction {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
            time: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

pub(crate) fn max_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Gaussian packet `A exp(-(x - center)^2 / width^2 + i carrier x)`.
///
/// The packet's intensity has standard deviation `width / 2`; six of those
/// must fit on each side of the centre inside the grid.
pub fn make_gaussian_packet(
    grid: SpatialGrid,
    center: f64,
    width: f64,
    carrier: f64,
    normalize: bool,
) -> Result<WaveFunction> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidPacket(format!(
            "width must be positive, got {width}"
        )));
    }
    if !center.is_finite() || !carrier.is_finite() {
        return Err(Error::InvalidPacket(
            "center and carrier must be finite".into(),
        ));
    }
    let half_support = 3.0 * width;
    if center - half_support < grid.x_min() || center + half_support > grid.x_max() {
        return Err(Error::InvalidPacket(format!(
            "support [{}, {}] exceeds the grid [{}, {}); enlarge the domain",
            center - half_support,
            center + half_support,
            grid.x_min(),
            grid.x_max()
        )));
    }
    let mut values: Vec<Complex64> = grid
        .xs()
        .into_iter()
        .map(|x| {
            let s = (x - center) / width;
            Complex64::from_polar((-s * s).exp(), carrier * x)
        })
        .collect();
    if normalize {
        let norm = norm_of(&values, grid.dx());
        let scale = 1.0 / norm.sqrt();
        values.iter_mut().for_each(|v| *v *= scale);
    }
    WaveFunction::new(grid, values, 0.0)
}

pub(crate) fn norm_of(values: &[Complex64], dx: f64) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx
}

/// N = Σ|ψ_j|² dx (rectangle rule, exact for the periodic trapezoid).
pub fn inner_norm(state: &WaveFunction) -> f64 {
    norm_of(&state.values, state.grid.dx())
}

/// Cached forward/inverse FFT pair for one grid size.
///
/// `forward` is unnormalized; `inverse` divides by `n` so that the pair
/// round-trips.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.n as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}
