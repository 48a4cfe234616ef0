//! Independent reference integrator for the gauge-frame equation
//!
//! ```text
//! i φ_t = -(∂_x - i V'(x) g(t))² φ,
//! ```
//!
//! with g the zero-mean antiderivative of f. Classical RK4 in time, spectral
//! first derivatives in space. It shares no code path with the split-step
//! propagator beyond the FFT and is meant for small grids and short times.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Fourier, WaveFunction};
use crate::modulation::{antiderivative_zero_mean, eval_modulation, ModulationSpec};
use crate::potential::PotentialSpec;

struct CovariantLaplacian {
    fourier: Fourier,
    ik: Vec<Complex64>,
    slope: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl CovariantLaplacian {
    /// out = (∂ - i a g)(∂ - i a g) φ
    fn apply(&mut self, phi: &[Complex64], g: Complex64, out: &mut [Complex64]) {
        self.covariant_derivative(phi, g);
        let first = self.scratch.clone();
        self.covariant_derivative(&first, g);
        out.copy_from_slice(&self.scratch);
    }

    fn covariant_derivative(&mut self, phi: &[Complex64], g: Complex64) {
        self.scratch.copy_from_slice(phi);
        self.fourier.forward(&mut self.scratch);
        self.scratch
            .iter_mut()
            .zip(&self.ik)
            .for_each(|(s, k)| *s *= k);
        self.fourier.inverse(&mut self.scratch);
        let minus_i = Complex64::new(0.0, -1.0);
        for ((s, p), &a) in self.scratch.iter_mut().zip(phi).zip(&self.slope) {
            *s += minus_i * a * g * p;
        }
    }
}

/// Evolves the gauge-frame field `phi` to `t_end` with fixed RK4 steps of at
/// most `max_dt`.
pub fn integrate_gauge_frame(
    phi: &WaveFunction,
    pot: &PotentialSpec,
    modulation: &ModulationSpec,
    t_end: f64,
    max_dt: f64,
) -> Result<WaveFunction> {
    let grid = phi.grid;
    let n = grid.n();
    let g_spec = antiderivative_zero_mean(modulation);
    let ik = (0..n)
        .map(|j| {
            if j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, grid.k(j))
            }
        })
        .collect();
    let mut op = CovariantLaplacian {
        fourier: Fourier::new(n),
        ik,
        slope: pot.derivative_on(&grid)?,
        scratch: vec![Complex64::new(0.0, 0.0); n],
    };

    let span = t_end - phi.time;
    let steps = (span / max_dt).ceil().max(1.0) as usize;
    let dt = span / steps as f64;
    let i = Complex64::new(0.0, 1.0);

    // φ_t = i D² φ
    let mut rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| {
        let g = eval_modulation(&g_spec, t);
        op.apply(y, g, out);
        out.iter_mut().for_each(|o| *o *= i);
    };

    let mut y = phi.values.clone();
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for s in 0..steps {
        let t = phi.time + s as f64 * dt;
        rhs(t, &y, &mut k1);
        for j in 0..n {
            tmp[j] = y[j] + k1[j] * (dt / 2.0);
        }
        rhs(t + dt / 2.0, &tmp, &mut k2);
        for j in 0..n {
            tmp[j] = y[j] + k2[j] * (dt / 2.0);
        }
        rhs(t + dt / 2.0, &tmp, &mut k3);
        for j in 0..n {
            tmp[j] = y[j] + k3[j] * dt;
        }
        rhs(t + dt, &tmp, &mut k4);
        for j in 0..n {
            y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0);
        }
    }
    Ok(WaveFunction {
        grid,
        values: y,
        time: t_end,
    })
}
