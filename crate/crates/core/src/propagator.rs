//! Time integration of i ψ_t = -ψ_xx + f(t) V(x) ψ by Strang splitting.
//!
//! The potential sub-step uses the exact integral of f over the step, so a
//! rapidly oscillating drive is never point-sampled. When that integral has a
//! nonzero imaginary part the sub-step amplifies or attenuates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{max_abs, Fourier, SpatialGrid, WaveFunction};
use crate::modulation::{
    antiderivative_zero_mean, eval_modulation, integrate_modulation, ModulationSpec,
};
use crate::potential::{EffectiveField, PotentialSpec};

/// Snapshots whose peak exceeds this multiple of the initial peak are flagged.
pub const RUNAWAY_GAIN: f64 = 1e6;

/// Minimum time steps per period of the fastest tone.
pub const MIN_STEPS_PER_PERIOD: f64 = 32.0;

/// Default time steps per period of the fastest tone.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 128.0;

/// Cosine-ramp imaginary mask near both domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Absorber {
    pub ramp_width: f64,
    pub strength: f64,
}

impl Absorber {
    fn profile(&self, grid: &SpatialGrid, dt: f64) -> Vec<f64> {
        grid.xs()
            .into_iter()
            .map(|x| {
                let d = (x - grid.x_min()).min(grid.x_max() - x);
                let s = if d < self.ramp_width {
                    (0.5 * PI * d / self.ramp_width).cos().powi(2)
                } else {
                    0.0
                };
                (-self.strength * dt * s).exp()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationPlan {
    pub dt: f64,
    pub steps_per_record: usize,
    pub total_time: f64,
    pub absorber: Option<Absorber>,
}

impl PropagationPlan {
    pub fn new(dt: f64, steps_per_record: usize, total_time: f64) -> Result<Self> {
        let plan = Self {
            dt,
            steps_per_record,
            total_time,
            absorber: None,
        };
        plan.check()?;
        Ok(plan)
    }

    /// Plan whose step is the largest dt ≤ (2π/ω_max)/128 dividing
    /// `total_time` evenly. `fallback_dt` is used when there is no
    /// modulation.
    pub fn with_default_dt(
        total_time: f64,
        steps_per_record: usize,
        modulation: &ModulationSpec,
        fallback_dt: f64,
    ) -> Result<Self> {
        let omega = modulation.max_frequency();
        let target = if omega > 0.0 {
            2.0 * PI / omega / DEFAULT_STEPS_PER_PERIOD
        } else {
            fallback_dt
        };
        let steps = (total_time / target).ceil().max(1.0);
        Self::new(total_time / steps, steps_per_record, total_time)
    }

    pub fn with_absorber(mut self, absorber: Absorber) -> Result<Self> {
        if !(absorber.ramp_width > 0.0 && absorber.strength > 0.0) {
            return Err(Error::InvalidPlan(
                "absorber ramp_width and strength must be positive".into(),
            ));
        }
        self.absorber = Some(absorber);
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidPlan(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(Error::InvalidPlan(format!(
                "total_time must be positive, got {}",
                self.total_time
            )));
        }
        if self.steps_per_record == 0 {
            return Err(Error::InvalidPlan(
                "steps_per_record must be at least 1".into(),
            ));
        }
        let ratio = self.total_time / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidPlan(format!(
                "total_time / dt = {ratio} is not an integer"
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.total_time / self.dt).round() as usize
    }

    /// Times at which a run starting at `start` records a snapshot.
    pub fn record_times(&self, start: f64) -> Vec<f64> {
        let steps = self.steps();
        let mut times: Vec<f64> = (0..steps)
            .step_by(self.steps_per_record)
            .map(|s| start + s as f64 * self.dt)
            .collect();
        times.push(start + self.total_time);
        times
    }

    /// Checks that dt resolves the fastest tone of `modulation`.
    pub fn validate_for(&self, modulation: &ModulationSpec) -> Result<()> {
        self.check()?;
        let omega = modulation.max_frequency();
        if omega > 0.0 {
            let limit = 2.0 * PI / omega / MIN_STEPS_PER_PERIOD;
            if self.dt > limit * (1.0 + 1e-12) {
                return Err(Error::InvalidPlan(format!(
                    "dt = {} exceeds (2π/ω_max)/{MIN_STEPS_PER_PERIOD} = {limit} for ω_max = {omega}",
                    self.dt
                )));
            }
        }
        Ok(())
    }
}

/// Recorded evolution ψ(x, t).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: SpatialGrid,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<Complex64>>,
    /// Set when a snapshot exceeded `RUNAWAY_GAIN` × the initial peak or the
    /// field stopped being finite; integration stops at that point.
    pub runaway: bool,
    /// Largest snapshot peak relative to the initial peak.
    pub max_gain: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, index: usize) -> WaveFunction {
        WaveFunction {
            grid: self.grid,
            values: self.snapshots[index].clone(),
            time: self.times[index],
        }
    }

    pub fn final_state(&self) -> WaveFunction {
        self.state(self.len() - 1)
    }
}

/// Shared split-step driver. `potential_factor(t0, t1, out)` fills the
/// real-space multiplier for the step [t0, t1].
fn split_step(
    state: &WaveFunction,
    plan: &PropagationPlan,
    mut potential_factor: impl FnMut(f64, f64, &mut [Complex64]),
) -> Trajectory {
    let grid = state.grid;
    let n = grid.n();
    let fourier = Fourier::new(n);
    let dt = plan.dt;
    let steps = plan.steps();
    let half: Vec<Complex64> = grid
        .ks()
        .into_iter()
        .map(|k| Complex64::from_polar(1.0, -k * k * dt / 2.0))
        .collect();
    let full: Vec<Complex64> = half.iter().map(|h| h * h).collect();
    let absorber = plan.absorber.map(|a| a.profile(&grid, dt));

    let initial_peak = state.max_abs();
    let mut traj = Trajectory {
        grid,
        times: vec![state.time],
        snapshots: vec![state.values.clone()],
        runaway: false,
        max_gain: 1.0,
    };

    let mut psi = state.values.clone();
    let mut factor = vec![Complex64::new(0.0, 0.0); n];
    // A half kinetic step is owed while `owed` is true; consecutive steps
    // fuse their adjoining half steps into one full step.
    let mut owed = false;
    for s in 0..steps {
        let t0 = state.time + s as f64 * dt;
        let t1 = state.time + (s + 1) as f64 * dt;
        fourier.forward(&mut psi);
        let kinetic = if owed { &full } else { &half };
        psi.iter_mut().zip(kinetic).for_each(|(p, k)| *p *= k);
        fourier.inverse(&mut psi);

        potential_factor(t0, t1, &mut factor);
        psi.iter_mut().zip(&factor).for_each(|(p, f)| *p *= f);
        if let Some(mask) = &absorber {
            psi.iter_mut().zip(mask).for_each(|(p, m)| *p *= m);
        }
        owed = true;

        let last = s + 1 == steps;
        if last || (s + 1) % plan.steps_per_record == 0 {
            fourier.forward(&mut psi);
            psi.iter_mut().zip(&half).for_each(|(p, k)| *p *= k);
            fourier.inverse(&mut psi);
            owed = false;

            let peak = max_abs(&psi);
            if !peak.is_finite() {
                traj.runaway = true;
                traj.max_gain = f64::INFINITY;
                break;
            }
            let gain = if initial_peak > 0.0 {
                peak / initial_peak
            } else {
                1.0
            };
            traj.max_gain = traj.max_gain.max(gain);
            traj.times.push(if last {
                state.time + plan.total_time
            } else {
                t1
            });
            traj.snapshots.push(psi.clone());
            if gain > RUNAWAY_GAIN {
                traj.runaway = true;
                break;
            }
        }
    }
    traj
}

/// Integrates i ψ_t = -ψ_xx + f(t) V(x) ψ from `state.time` over the plan.
pub fn propagate(
    state: &WaveFunction,
    pot: &PotentialSpec,
    modulation: &ModulationSpec,
    plan: &PropagationPlan,
) -> Result<Trajectory> {
    plan.validate_for(modulation)?;
    let v = pot.values_on(&state.grid)?;
    Ok(split_step(state, plan, |t0, t1, out| {
        let integral = integrate_modulation(modulation, t0, t1);
        // exp(-i V I) = exp(V Im I) · exp(-i V Re I)
        for (o, &vj) in out.iter_mut().zip(&v) {
            *o = Complex64::from_polar((vj * integral.im).exp(), -vj * integral.re);
        }
    }))
}

/// Exact free evolution over `t`: ψ̂(k) ← ψ̂(k) exp(-i k² t).
pub fn free_propagate(state: &WaveFunction, t: f64) -> WaveFunction {
    let grid = state.grid;
    let fourier = Fourier::new(grid.n());
    let mut psi = state.values.clone();
    fourier.forward(&mut psi);
    for (j, p) in psi.iter_mut().enumerate() {
        let k = grid.k(j);
        *p *= Complex64::from_polar(1.0, -k * k * t);
    }
    fourier.inverse(&mut psi);
    WaveFunction {
        grid,
        values: psi,
        time: state.time + t,
    }
}

/// Integrates i φ_t = -φ_xx + V_eff(x) φ with a static (possibly complex)
/// effective potential.
pub fn effective_propagate(
    state: &WaveFunction,
    eff: &EffectiveField,
    plan: &PropagationPlan,
) -> Result<Trajectory> {
    plan.check()?;
    if eff.grid != state.grid {
        return Err(Error::GridMismatch(
            "effective field and state use different grids".into(),
        ));
    }
    let dt = plan.dt;
    let step: Vec<Complex64> = eff
        .values
        .iter()
        .map(|v| Complex64::from_polar((v.im * dt).exp(), -v.re * dt))
        .collect();
    Ok(split_step(state, plan, |_, _, out| {
        out.copy_from_slice(&step)
    }))
}

/// φ(x) = ψ(x) exp(+i V(x) g(t)), with g the zero-mean antiderivative of f
/// evaluated at `state.time`.
pub fn gauge_transform(
    state: &WaveFunction,
    pot: &PotentialSpec,
    modulation: &ModulationSpec,
) -> Result<WaveFunction> {
    apply_gauge(state, pot, modulation, 1.0)
}

/// Inverse of [`gauge_transform`]: ψ(x) = φ(x) exp(-i V(x) g(t)).
pub fn inverse_gauge_transform(
    state: &WaveFunction,
    pot: &PotentialSpec,
    modulation: &ModulationSpec,
) -> Result<WaveFunction> {
    apply_gauge(state, pot, modulation, -1.0)
}

fn apply_gauge(
    state: &WaveFunction,
    pot: &PotentialSpec,
    modulation: &ModulationSpec,
    sign: f64,
) -> Result<WaveFunction> {
    let g = eval_modulation(&antiderivative_zero_mean(modulation), state.time);
    let v = pot.values_on(&state.grid)?;
    let values = state
        .values
        .iter()
        .zip(&v)
        .map(|(p, &vj)| {
            // exp(i s V g) = exp(-s V Im g) · exp(i s V Re g)
            p * Complex64::from_polar((-sign * vj * g.im).exp(), sign * vj * g.re)
        })
        .collect();
    Ok(WaveFunction {
        grid: state.grid,
        values,
        time: state.time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_norm, make_gaussian_packet};
    use approx::assert_relative_eq;

    fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    fn small_grid() -> SpatialGrid {
        SpatialGrid::new(-64.0, 64.0, 512).unwrap()
    }

    #[test]
    fn plan_validation() {
        assert!(PropagationPlan::new(0.1, 1, 1.05).is_err());
        assert!(PropagationPlan::new(0.0, 1, 1.0).is_err());
        assert!(PropagationPlan::new(0.1, 0, 1.0).is_err());
        let cos = ModulationSpec::cosine(3.0, 1.0).unwrap();
        let coarse = PropagationPlan::new(0.1, 1, 1.0).unwrap();
        assert!(coarse.validate_for(&cos).is_err());
        let auto = PropagationPlan::with_default_dt(
            180.0,
            8,
            &ModulationSpec::cosine(0.9, 1.0).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(auto.dt <= 2.0 * PI / 0.9 / 128.0);
        assert_eq!(auto.steps(), 3301);
    }

    #[test]
    fn zero_potential_matches_free() {
        let g = small_grid();
        let psi = make_gaussian_packet(g, -10.0, 5.0, 0.7, true).unwrap();
        let cos = ModulationSpec::cosine(3.0, 1.0).unwrap();
        let plan = PropagationPlan::new(0.01, 50, 5.0).unwrap();
        let traj = propagate(
            &psi,
            &PotentialSpec::gaussian(0.0, 1.0 / 64.0).unwrap(),
            &cos,
            &plan,
        )
        .unwrap();
        let free = free_propagate(&psi, 5.0);
        assert_relative_eq!(traj.final_state().time, 5.0, epsilon = 1e-12);
        assert!(rel_l2(&traj.final_state().values, &free.values) < 1e-10);
        assert_eq!(traj.times.len(), 11);
    }

    #[test]
    fn plane_wave_picks_up_global_phase() {
        let g = SpatialGrid::new(0.0, 2.0 * PI * 8.0, 256).unwrap();
        // k0 = 0.5 is a grid wavenumber (m = 4)
        let k0 = 0.5;
        let values = g
            .xs()
            .into_iter()
            .map(|x| Complex64::from_polar(1.0, k0 * x))
            .collect();
        let psi = WaveFunction::new(g, values, 0.0).unwrap();
        let t = 3.7;
        let out = free_propagate(&psi, t);
        let phase = Complex64::from_polar(1.0, -k0 * k0 * t);
        for (a, b) in out.values.iter().zip(&psi.values) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn free_gaussian_spreading() {
        let g = small_grid();
        let psi = make_gaussian_packet(g, 0.0, 5.0, 0.0, true).unwrap();
        assert_eq!(free_propagate(&psi, 0.0).values, {
            let mut v = psi.values.clone();
            let f = Fourier::new(g.n());
            f.forward(&mut v);
            f.inverse(&mut v);
            v
        });
        let out = free_propagate(&psi, 6.25);
        let second: f64 = out
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| g.x(j).powi(2) * v.norm_sqr())
            .sum::<f64>()
            * g.dx();
        let w = (second / inner_norm(&out)).sqrt();
        assert_relative_eq!(w, 2.5 * 2f64.sqrt(), max_relative = 1e-10);

        let split = free_propagate(&free_propagate(&psi, 1.3), 2.4);
        let once = free_propagate(&psi, 3.7);
        assert!(rel_l2(&split.values, &once.values) < 1e-12);
    }

    #[test]
    fn zero_effective_field_matches_free_and_real_field_conserves_norm() {
        let g = small_grid();
        let psi = make_gaussian_packet(g, 0.0, 5.0, 0.2, true).unwrap();
        let plan = PropagationPlan::new(0.02, 100, 10.0).unwrap();
        let traj = effective_propagate(&psi, &EffectiveField::zero(g), &plan).unwrap();
        assert!(
            rel_l2(
                &traj.final_state().values,
                &free_propagate(&psi, 10.0).values
            ) < 1e-10
        );

        let v = PotentialSpec::gaussian(20.0, 1.0 / 64.0).unwrap();
        let eff = crate::potential::effective_potential(
            &v,
            &g,
            &ModulationSpec::cosine(3.0, 1.0).unwrap(),
        )
        .unwrap();
        let traj = effective_propagate(&psi, &eff, &plan).unwrap();
        for snap in &traj.snapshots {
            assert!((crate::grid::norm_of(snap, g.dx()) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gauge_identities() {
        let g = small_grid();
        let psi = make_gaussian_packet(g, 1.0, 5.0, 0.3, true).unwrap();
        let v = PotentialSpec::gaussian(7.0, 1.0 / 64.0).unwrap();
        let same = gauge_transform(&psi, &v, &ModulationSpec::empty()).unwrap();
        assert_eq!(same.values, psi.values);
        // cos: g(0) = sin(0)/ω = 0
        let at_zero =
            gauge_transform(&psi, &v, &ModulationSpec::cosine(0.9, 1.0).unwrap()).unwrap();
        assert!(rel_l2(&at_zero.values, &psi.values) < 1e-15);

        let later = WaveFunction {
            time: 2.3,
            ..psi.clone()
        };
        let one = ModulationSpec::one_sided(0.9, 0.5).unwrap();
        let there = gauge_transform(&later, &v, &one).unwrap();
        assert!(rel_l2(&there.values, &later.values) > 1e-2);
        let back = inverse_gauge_transform(&there, &v, &one).unwrap();
        assert!(rel_l2(&back.values, &later.values) < 1e-14);
    }

    #[test]
    fn runaway_gain_is_flagged() {
        let g = small_grid();
        let psi = make_gaussian_packet(g, 0.0, 5.0, 0.0, true).unwrap();
        // strong imaginary static field: growth e^{50 t}
        let mut eff = EffectiveField::zero(g);
        eff.values
            .iter_mut()
            .for_each(|v| *v = Complex64::new(0.0, 50.0));
        let plan = PropagationPlan::new(0.01, 10, 2.0).unwrap();
        let traj = effective_propagate(&psi, &eff, &plan).unwrap();
        assert!(traj.runaway);
        assert!(traj.max_gain > RUNAWAY_GAIN);
        assert!(*traj.times.last().unwrap() < 2.0);
    }

    #[test]
    fn absorber_removes_outgoing_flux() {
        let g = small_grid();
        let psi = make_gaussian_packet(g, 30.0, 4.0, 2.0, true).unwrap();
        let plan = PropagationPlan::new(0.01, 100, 20.0)
            .unwrap()
            .with_absorber(Absorber {
                ramp_width: 20.0,
                strength: 2.0,
            })
            .unwrap();
        let traj = effective_propagate(&psi, &EffectiveField::zero(g), &plan).unwrap();
        assert!(crate::grid::norm_of(traj.snapshots.last().unwrap(), g.dx()) < 1e-3);
    }
}
