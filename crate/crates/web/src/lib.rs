//! Bindings behind the static page in `www/`. Each export returns a JSON
//! string; the plain functions underneath are usable (and tested) natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use nhscatter::diagnostics::{invisibility_error, width};
use nhscatter::floquet::{
    build_channels, solve_floquet_scattering, verify_invisibility, Incidence, Window,
};
use nhscatter::grid::{inner_norm, make_gaussian_packet, SpatialGrid};
use nhscatter::modulation::ModulationSpec;
use nhscatter::potential::{effective_potential, PotentialSpec};
use nhscatter::propagator::{free_propagate, propagate, PropagationPlan};

const BETA: f64 = 1.0 / 64.0;
const MAP_ROWS: usize = 120;
const MAP_COLS: usize = 512;

/// `cos`, `one_sided`, `one_sided_negative` or `two_tone` at the usual
/// amplitudes (1, 1/2, 1/2, 1/4).
pub fn drive(name: &str, omega: f64) -> Result<ModulationSpec, String> {
    let spec = match name {
        "cos" => ModulationSpec::cosine(omega, 1.0),
        "one_sided" => ModulationSpec::one_sided(omega, 0.5),
        "one_sided_negative" => ModulationSpec::one_sided_negative(omega, 0.5),
        "two_tone" => ModulationSpec::two_tone(omega, 0.25),
        other => return Err(format!("unknown drive `{other}`")),
    };
    spec.map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct PacketRun {
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    /// MAP_ROWS × xs.len(), row-major, each row scaled to peak 1.
    pub intensity: Vec<f64>,
    pub width: Vec<f64>,
    pub free_width: Vec<f64>,
    pub norm: Vec<f64>,
    pub invisibility_error: f64,
    pub runaway: bool,
}

/// Gaussian packet launched at `center` with `carrier` through the driven
/// Gaussian well V₀ exp(-x²/64).
pub fn packet_run(
    drive_name: &str,
    omega: f64,
    v0: f64,
    center: f64,
    packet_width: f64,
    carrier: f64,
    total_time: f64,
) -> Result<PacketRun, String> {
    let modulation = drive(drive_name, omega)?;
    let pot = PotentialSpec::gaussian(v0, BETA).map_err(|e| e.to_string())?;
    let reach = center.abs() + 4.0 * packet_width + 2.0 * carrier.abs() * total_time + 60.0;
    let half = reach.max(64.0);
    let grid = SpatialGrid::new(-half, half, 2048).map_err(|e| e.to_string())?;
    let psi = make_gaussian_packet(grid, center, packet_width, carrier, true)
        .map_err(|e| e.to_string())?;
    let mut plan = PropagationPlan::with_default_dt(total_time, 1, &modulation, 0.05)
        .map_err(|e| e.to_string())?;
    plan.steps_per_record = (plan.steps() / MAP_ROWS).max(1);
    let traj = propagate(&psi, &pot, &modulation, &plan).map_err(|e| e.to_string())?;

    let stride = grid.n() / MAP_COLS;
    let xs: Vec<f64> = (0..grid.n()).step_by(stride).map(|j| grid.x(j)).collect();
    let mut run = PacketRun {
        xs,
        times: traj.times.clone(),
        intensity: Vec::with_capacity(traj.len() * MAP_COLS),
        width: Vec::with_capacity(traj.len()),
        free_width: Vec::with_capacity(traj.len()),
        norm: Vec::with_capacity(traj.len()),
        invisibility_error: 0.0,
        runaway: traj.runaway,
    };
    for i in 0..traj.len() {
        let state = traj.state(i);
        let peak = state
            .values
            .iter()
            .map(|v| v.norm_sqr())
            .fold(0.0, f64::max);
        run.intensity.extend(
            (0..grid.n())
                .step_by(stride)
                .map(|j| state.values[j].norm_sqr() / peak),
        );
        run.width.push(width(&state).map_err(|e| e.to_string())?);
        let free = free_propagate(&psi, state.time);
        run.free_width
            .push(width(&free).map_err(|e| e.to_string())?);
        run.norm.push(inner_norm(&state));
    }
    let last = traj.final_state();
    run.invisibility_error =
        invisibility_error(&last, &free_propagate(&psi, last.time)).map_err(|e| e.to_string())?;
    Ok(run)
}

#[derive(Debug, Serialize)]
pub struct ChannelRow {
    pub m: i32,
    pub omega: f64,
    pub propagating: bool,
    pub k: [f64; 2],
    pub r: [f64; 2],
    pub t: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct ChannelTable {
    pub rows: Vec<ChannelRow>,
    pub flux: f64,
    pub residual: f64,
    pub invisible: bool,
    pub truncation_warning: bool,
}

/// Sideband amplitudes for a unit plane wave at `omega0` hitting the driven
/// well, channels m in [-m_max, m_max].
pub fn channel_table(
    drive_name: &str,
    omega: f64,
    v0: f64,
    omega0: f64,
    m_max: i32,
    n_x: usize,
) -> Result<ChannelTable, String> {
    let modulation = drive(drive_name, omega)?;
    let pot = PotentialSpec::gaussian(v0, BETA).map_err(|e| e.to_string())?;
    let channels = build_channels(omega0, &modulation, -m_max, m_max).map_err(|e| e.to_string())?;
    let l = pot.support_half_width();
    let window = Window::new(-l, l, n_x).map_err(|e| e.to_string())?;
    let res = solve_floquet_scattering(&pot, &modulation, &channels, window, Incidence::FromLeft)
        .map_err(|e| e.to_string())?;
    let report = verify_invisibility(&res, 1e-6);
    let rows = channels
        .channels
        .iter()
        .enumerate()
        .map(|(p, ch)| ChannelRow {
            m: ch.m,
            omega: ch.omega,
            propagating: ch.is_propagating(),
            k: [ch.k.re, ch.k.im],
            r: [res.r[p].re, res.r[p].im],
            t: [res.t[p].re, res.t[p].im],
        })
        .collect();
    Ok(ChannelTable {
        rows,
        flux: res.flux,
        residual: res.residual,
        invisible: report.invisible(),
        truncation_warning: res.truncation_warning,
    })
}

#[derive(Debug, Serialize)]
pub struct EffectiveCurve {
    pub xs: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// ⟨g²⟩ as [re, im].
    pub scale: [f64; 2],
}

/// V_eff(x) on [-60, 60) for the driven well.
pub fn effective_curve(drive_name: &str, omega: f64, v0: f64) -> Result<EffectiveCurve, String> {
    let modulation = drive(drive_name, omega)?;
    let pot = PotentialSpec::gaussian(v0, BETA).map_err(|e| e.to_string())?;
    let grid = SpatialGrid::new(-60.0, 60.0, 512).map_err(|e| e.to_string())?;
    let eff = effective_potential(&pot, &grid, &modulation).map_err(|e| e.to_string())?;
    Ok(EffectiveCurve {
        xs: grid.xs(),
        re: eff.values.iter().map(|v| v.re).collect(),
        im: eff.values.iter().map(|v| v.im).collect(),
        scale: [eff.scale.re, eff.scale.im],
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = packetRun)]
pub fn packet_run_js(
    drive_name: &str,
    omega: f64,
    v0: f64,
    center: f64,
    packet_width: f64,
    carrier: f64,
    total_time: f64,
) -> Result<String, JsValue> {
    to_js(packet_run(
        drive_name,
        omega,
        v0,
        center,
        packet_width,
        carrier,
        total_time,
    ))
}

#[wasm_bindgen(js_name = channelTable)]
pub fn channel_table_js(
    drive_name: &str,
    omega: f64,
    v0: f64,
    omega0: f64,
    m_max: i32,
    n_x: usize,
) -> Result<String, JsValue> {
    to_js(channel_table(drive_name, omega, v0, omega0, m_max, n_x))
}

#[wasm_bindgen(js_name = effectiveCurve)]
pub fn effective_curve_js(drive_name: &str, omega: f64, v0: f64) -> Result<String, JsValue> {
    to_js(effective_curve(drive_name, omega, v0))
}
