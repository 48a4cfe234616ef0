//! Observables over wave functions and trajectories.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{inner_norm, WaveFunction};
use crate::propagator::{free_propagate, Trajectory};

/// w = √(∫ x² |ψ|² dx / ∫ |ψ|² dx), second moment about x = 0.
pub fn width(state: &WaveFunction) -> Result<f64> {
    let norm = inner_norm(state);
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm("width of a zero state"));
    }
    let grid = state.grid;
    let second: f64 = state
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| grid.x(j).powi(2) * v.norm_sqr())
        .sum::<f64>()
        * grid.dx();
    Ok((second / norm).sqrt())
}

/// Rows Ψ(x, t) = |ψ|² / max_x |ψ|², one per snapshot.
pub fn normalized_intensity(traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    traj.snapshots.iter().map(|s| normalized_row(s)).collect()
}

pub(crate) fn normalized_row(values: &[Complex64]) -> Result<Vec<f64>> {
    let row: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let peak = row.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::ZeroNorm(
            "normalized intensity of an all-zero snapshot",
        ));
    }
    Ok(row.into_iter().map(|v| v / peak).collect())
}

/// ‖ψ - ψ_ref‖₂ / ‖ψ_ref‖₂ over the full complex fields.
pub fn invisibility_error(state: &WaveFunction, reference: &WaveFunction) -> Result<f64> {
    if state.grid != reference.grid {
        return Err(Error::GridMismatch(
            "invisibility error across grids".into(),
        ));
    }
    if (state.time - reference.time).abs() > 1e-9 * state.time.abs().max(1.0) {
        return Err(Error::GridMismatch(format!(
            "comparing t={} against reference at t={}",
            state.time, reference.time
        )));
    }
    let den: f64 = reference.values.iter().map(|v| v.norm_sqr()).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroNorm(
            "invisibility error against a zero reference",
        ));
    }
    let num: f64 = state
        .values
        .iter()
        .zip(&reference.values)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((num / den).sqrt())
}

/// Fraction of the norm located at x < `x_split`.
pub fn reflected_fraction(state: &WaveFunction, x_split: f64) -> Result<f64> {
    let grid = state.grid;
    if x_split < grid.x_min() || x_split > grid.x_max() {
        return Err(Error::InvalidGrid(format!(
            "x_split = {x_split} outside the grid"
        )));
    }
    let norm = inner_norm(state);
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm("reflected fraction of a zero state"));
    }
    let left: f64 = state
        .values
        .iter()
        .enumerate()
        .filter(|(j, _)| grid.x(*j) < x_split)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * grid.dx();
    Ok(left / norm)
}

/// Mean of the piecewise-linear interpolant of `values(times)` over the last
/// `period` of the record, `[t_end - period, t_end]`. `None` when the record
/// is shorter than one period.
pub fn cycle_average(times: &[f64], values: &[f64], period: f64) -> Option<f64> {
    assert_eq!(times.len(), values.len());
    let (&t_end, &t_start) = (times.last()?, times.first()?);
    let from = t_end - period;
    if !(period > 0.0) || from < t_start - 1e-12 * period {
        return None;
    }
    let mut acc = 0.0;
    for w in 0..times.len() - 1 {
        let (t0, t1) = (times[w], times[w + 1]);
        if t1 <= from {
            continue;
        }
        let lerp = |t: f64| values[w] + (values[w + 1] - values[w]) * (t - t0) / (t1 - t0);
        let a = t0.max(from);
        acc += 0.5 * (lerp(a) + values[w + 1]) * (t1 - a);
    }
    Some(acc / period)
}

/// Per-time observables of one trajectory.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DiagnosticsRecord {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub width: Vec<f64>,
    /// Against free propagation of the first snapshot.
    pub invisibility_error: Vec<f64>,
    pub reflected_fraction: Option<Vec<f64>>,
    #[serde(skip)]
    pub intensity_map: Option<Vec<Vec<f64>>>,
}

impl DiagnosticsRecord {
    /// Evaluates every observable on every snapshot. `x_split` enables the
    /// reflected fraction; `with_map` keeps the normalized intensity map.
    pub fn from_trajectory(
        traj: &Trajectory,
        x_split: Option<f64>,
        with_map: bool,
    ) -> Result<Self> {
        let initial = traj.state(0);
        let mut rec = DiagnosticsRecord {
            times: traj.times.clone(),
            reflected_fraction: x_split.map(|_| Vec::with_capacity(traj.len())),
            ..Default::default()
        };
        for i in 0..traj.len() {
            let state = traj.state(i);
            rec.norm.push(inner_norm(&state));
            rec.width.push(width(&state)?);
            let reference = free_propagate(&initial, state.time - initial.time);
            rec.invisibility_error
                .push(invisibility_error(&state, &reference)?);
            if let (Some(x), Some(out)) = (x_split, rec.reflected_fraction.as_mut()) {
                out.push(reflected_fraction(&state, x)?);
            }
        }
        if with_map {
            rec.intensity_map = Some(normalized_intensity(traj)?);
        }
        Ok(rec)
    }
}
