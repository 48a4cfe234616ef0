//! Static bound potential V(x) and the averaged effective potential
//! V_eff(x) = (dV/dx)² ⟨g(t)²⟩.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Fourier, SpatialGrid};
use crate::modulation::{mean_square_antiderivative, ModulationSpec};

/// Relative level the sampled potential must decay below near the edges.
const EDGE_DECAY: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// V₀ exp(-β x²)
    Gaussian { v0: f64, beta: f64 },
    /// Real samples on a periodic grid; no interpolation off the nodes.
    Sampled { grid: SpatialGrid, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn gaussian(v0: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() || !v0.is_finite() {
            return Err(Error::InvalidPotential(format!(
                "gaussian needs finite v0 and beta > 0 (got v0={v0}, beta={beta})"
            )));
        }
        Ok(Self::Gaussian { v0, beta })
    }

    pub fn sampled(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidPotential(format!(
                "{} samples for a {}-point grid",
                values.len(),
                grid.n()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let edge = (grid.n() / 10).max(1);
        let outer = values[..edge].iter().chain(&values[grid.n() - edge..]);
        if outer.map(|v| v.abs()).fold(0.0, f64::max) >= EDGE_DECAY * peak && peak > 0.0 {
            return Err(Error::InvalidPotential(format!(
                "sampled potential must decay below {EDGE_DECAY:e} of its peak within the outer 10% of the grid"
            )));
        }
        Ok(Self::Sampled { grid, values })
    }

    /// Reads `x,value` rows (optional header) from a CSV file. The x column
    /// must be uniform with a power-of-two row count.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::InvalidPotential(format!("{}: {e}", path.display())))?;
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record =
                record.map_err(|e| Error::InvalidPotential(format!("{}: {e}", path.display())))?;
            if record.len() != 2 {
                return Err(Error::InvalidPotential(format!(
                    "{}: row {} has {} columns, expected 2",
                    path.display(),
                    row + 1,
                    record.len()
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                // header row
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::InvalidPotential(format!(
                        "{}: row {} is not numeric",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        if xs.len() < 2 {
            return Err(Error::InvalidPotential(format!(
                "{}: too few rows",
                path.display()
            )));
        }
        let dx = xs[1] - xs[0];
        let grid = SpatialGrid::new(xs[0], xs[0] + dx * xs.len() as f64, xs.len())?;
        for (j, x) in xs.iter().enumerate() {
            if (x - grid.x(j)).abs() > 1e-9 * dx.abs() * (j as f64 + 1.0) {
                return Err(Error::InvalidPotential(format!(
                    "{}: x column is not uniform at row {}",
                    path.display(),
                    j + 1
                )));
            }
        }
        Self::sampled(grid, vs)
    }

    /// Peak |V| (used for scaling tolerances).
    pub fn amplitude(&self) -> f64 {
        match self {
            Self::Gaussian { v0, .. } => v0.abs(),
            Self::Sampled { values, .. } => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }

    /// Half-width beyond which |V| < 1e-15 |V₀| (Gaussian) or the sample grid
    /// extent (sampled).
    pub fn support_half_width(&self) -> f64 {
        match self {
            // exp(-β L²) with L = 6/√β gives e^{-36} ≈ 2e-16
            Self::Gaussian { beta, .. } => 6.0 / beta.sqrt(),
            Self::Sampled { grid, .. } => grid.x_min().abs().max(grid.x_max().abs()),
        }
    }

    /// V sampled on arbitrary nodes; sampled potentials reject off-grid nodes.
    pub fn values_at(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| eval_potential(self, x)).collect()
    }

    /// V on every node of `grid`.
    pub fn values_on(&self, grid: &SpatialGrid) -> Result<Vec<f64>> {
        match self {
            Self::Sampled { grid: own, values } if own == grid => Ok(values.clone()),
            _ => self.values_at(&grid.xs()),
        }
    }

    /// dV/dx on every node: analytic for the Gaussian, spectral for samples.
    pub fn derivative_on(&self, grid: &SpatialGrid) -> Result<Vec<f64>> {
        match self {
            Self::Gaussian { v0, beta } => Ok(grid
                .xs()
                .into_iter()
                .map(|x| -2.0 * beta * x * v0 * (-beta * x * x).exp())
                .collect()),
            Self::Sampled { grid: own, values } => {
                if own != grid {
                    return Err(Error::GridMismatch(
                        "sampled potential differentiated on a foreign grid".into(),
                    ));
                }
                Ok(spectral_derivative(own, values))
            }
        }
    }
}

fn spectral_derivative(grid: &SpatialGrid, values: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let fourier = Fourier::new(n);
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fourier.forward(&mut data);
    for (j, c) in data.iter_mut().enumerate() {
        // the Nyquist mode has no well-defined derivative for real data
        *c = if j == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, grid.k(j))
        };
    }
    fourier.inverse(&mut data);
    data.into_iter().map(|c| c.re).collect()
}

pub fn eval_potential(spec: &PotentialSpec, x: f64) -> Result<f64> {
    match spec {
        PotentialSpec::Gaussian { v0, beta } => Ok(v0 * (-beta * x * x).exp()),
        PotentialSpec::Sampled { grid, values } => grid
            .node_index(x)
            .map(|j| values[j])
            .ok_or(Error::OffGrid { x }),
    }
}

/// V_eff sampled on a grid, together with the prefactor ⟨g²⟩ used.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveField {
    pub grid: SpatialGrid,
    pub values: Vec<Complex64>,
    pub scale: Complex64,
}

impl EffectiveField {
    pub fn zero(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
            scale: Complex64::new(0.0, 0.0),
        }
    }

    pub fn max_abs(&self) -> f64 {
        crate::grid::max_abs(&self.values)
    }
}

/// V_eff(x_j) = (dV/dx(x_j))² ⟨g²⟩.
pub fn effective_potential(
    spec: &PotentialSpec,
    grid: &SpatialGrid,
    modulation: &ModulationSpec,
) -> Result<EffectiveField> {
    let scale = mean_square_antiderivative(modulation);
    let slope = spec.derivative_on(grid)?;
    Ok(EffectiveField {
        grid: *grid,
        values: slope.into_iter().map(|d| scale * (d * d)).collect(),
        scale,
    })
}

/// Closed form for V₀ exp(-βx²) driven by cos(ωt):
/// (2V₀²β²/ω²) x² exp(-2βx²).
pub fn effective_potential_gaussian_analytic(v0: f64, beta: f64, omega: f64, x: f64) -> f64 {
    2.0 * v0 * v0 * beta * beta / (omega * omega) * x * x * (-2.0 * beta * x * x).exp()
}
