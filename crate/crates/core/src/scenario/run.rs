use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::config::{Mode, Output, Resolved, ScenarioConfig};
use crate::diagnostics::{cycle_average, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::floquet::{
    solve_floquet_scattering, verify_invisibility, FloquetScatteringResult, InvisibilityReport,
};
use crate::grid::WaveFunction;
use crate::potential::effective_potential;
use crate::propagator::{effective_propagate, free_propagate, propagate, Trajectory};

#[derive(Debug, Clone, Default, Serialize)]
pub struct Flags {
    /// A snapshot exceeded the runaway gain; the trajectory was cut short.
    pub runaway: bool,
    /// Outermost Floquet channels carry more than the truncation level.
    pub truncation_warning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeDomainSummary {
    pub mode: Mode,
    pub dt: f64,
    pub steps: usize,
    pub records: usize,
    pub max_gain: f64,
    pub initial_norm: f64,
    pub final_time: f64,
    pub final_norm: f64,
    pub final_width: f64,
    pub final_invisibility_error: f64,
    pub final_reflected_fraction: Option<f64>,
    /// Width averaged over the last period of the slowest tone.
    pub cycle_averaged_width: Option<f64>,
    pub averaging_period: Option<f64>,
    /// ⟨g²⟩ for effective runs, as [re, im].
    pub effective_scale: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FloquetSummary {
    pub omega0: f64,
    pub base_frequency: f64,
    pub m_min: i32,
    pub m_max: i32,
    pub window: [f64; 2],
    pub n_x: usize,
    pub residual: f64,
    pub flux: f64,
    pub edge_channel_amplitude: f64,
    pub invisibility: InvisibilityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
    pub flags: Flags,
    pub time_domain: Option<TimeDomainSummary>,
    pub floquet: Option<FloquetSummary>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn numerical_flag(&self) -> bool {
        self.flags.runaway || self.flags.truncation_warning
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    preset: Option<&'a str>,
    config: &'a ScenarioConfig,
    #[serde(flatten)]
    report: &'a RunReport,
}

/// 17 significant digits, exponent form.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn csv(
        &mut self,
        name: &str,
        header: &[String],
        rows: impl Iterator<Item = Vec<String>>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(header).map_err(|e| csv_error(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// Runs a scenario, writing CSVs and `metadata.json` into
/// `config.outputs.directory`. Validation happens before any compute.
pub fn run_scenario(
    config: &ScenarioConfig,
    base_dir: &Path,
    preset: Option<&str>,
) -> Result<RunReport> {
    let resolved = config.resolve(base_dir)?;
    let started = Instant::now();
    let dir = config.outputs.directory.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut writer = Writer {
        dir: dir.clone(),
        files: Vec::new(),
    };
    let mut report = RunReport {
        directory: dir.clone(),
        files: Vec::new(),
        flags: Flags::default(),
        time_domain: None,
        floquet: None,
        wall_clock_seconds: 0.0,
    };

    match resolved {
        Resolved::TimeDomain {
            mode,
            initial,
            potential,
            modulation,
            plan,
        } => {
            let mut effective_scale = None;
            let traj = match mode {
                Mode::FreeReference => free_trajectory(&initial, &plan.record_times(initial.time)),
                Mode::Effective => {
                    let eff = effective_potential(&potential, &initial.grid, &modulation)?;
                    effective_scale = Some([eff.scale.re, eff.scale.im]);
                    effective_propagate(&initial, &eff, &plan)?
                }
                _ => propagate(&initial, &potential, &modulation, &plan)?,
            };
            report.flags.runaway = traj.runaway;
            let which = &config.outputs.which;
            let wants = |o: Output| which.contains(&o);
            let rec = DiagnosticsRecord::from_trajectory(
                &traj,
                config.outputs.x_split,
                wants(Output::Intensity),
            )?;
            write_time_domain(&mut writer, config, &traj, &rec)?;

            let last = traj.len() - 1;
            let period = ScenarioConfig::averaging_period(&modulation);
            report.time_domain = Some(TimeDomainSummary {
                mode,
                dt: plan.dt,
                steps: plan.steps(),
                records: traj.len(),
                max_gain: traj.max_gain,
                initial_norm: rec.norm[0],
                final_time: rec.times[last],
                final_norm: rec.norm[last],
                final_width: rec.width[last],
                final_invisibility_error: rec.invisibility_error[last],
                final_reflected_fraction: rec.reflected_fraction.as_ref().map(|r| r[last]),
                cycle_averaged_width: period.and_then(|p| cycle_average(&rec.times, &rec.width, p)),
                averaging_period: period,
                effective_scale,
            });
        }
        Resolved::Floquet {
            potential,
            modulation,
            channels,
            window,
            incidence,
            tolerance,
        } => {
            let result =
                solve_floquet_scattering(&potential, &modulation, &channels, window, incidence)?;
            write_channels(&mut writer, &result)?;
            report.flags.truncation_warning = result.truncation_warning;
            report.floquet = Some(FloquetSummary {
                omega0: channels.omega0,
                base_frequency: channels.base_frequency,
                m_min: channels.m_min,
                m_max: channels.m_max,
                window: [window.x_min, window.x_max],
                n_x: window.n_x,
                residual: result.residual,
                flux: result.flux,
                edge_channel_amplitude: result.edge_channel_amplitude,
                invisibility: verify_invisibility(&result, tolerance),
            });
        }
    }

    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    let meta_path = dir.join("metadata.json");
    writer.files.push(meta_path.clone());
    report.files = writer.files.clone();
    let meta = Metadata {
        preset,
        config,
        report: &report,
    };
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&meta_path, text).map_err(|e| Error::io(&meta_path, e))?;
    Ok(report)
}

fn free_trajectory(initial: &WaveFunction, times: &[f64]) -> Trajectory {
    Trajectory {
        grid: initial.grid,
        times: times.to_vec(),
        snapshots: times
            .iter()
            .map(|&t| free_propagate(initial, t - initial.time).values)
            .collect(),
        runaway: false,
        max_gain: 1.0,
    }
}

fn write_time_domain(
    writer: &mut Writer,
    config: &ScenarioConfig,
    traj: &Trajectory,
    rec: &DiagnosticsRecord,
) -> Result<()> {
    let which = &config.outputs.which;
    let mut columns: Vec<(&str, &[f64])> = Vec::new();
    if which.contains(&Output::Norm) {
        columns.push(("norm", &rec.norm));
    }
    if which.contains(&Output::Width) {
        columns.push(("width", &rec.width));
    }
    if which.contains(&Output::Invisibility) {
        columns.push(("invisibility_error", &rec.invisibility_error));
    }
    if let Some(r) = &rec.reflected_fraction {
        columns.push(("reflected_fraction", r));
    }
    if !columns.is_empty() {
        let header: Vec<String> = std::iter::once("time".to_string())
            .chain(columns.iter().map(|c| c.0.to_string()))
            .collect();
        let rows = (0..rec.times.len()).map(|i| {
            std::iter::once(num(rec.times[i]))
                .chain(columns.iter().map(|c| num(c.1[i])))
                .collect()
        });
        writer.csv("diagnostics.csv", &header, rows)?;
    }

    let grid = traj.grid;
    if let Some(map) = &rec.intensity_map {
        let stride = config.outputs.intensity_x_stride;
        let nodes: Vec<usize> = (0..grid.n()).step_by(stride).collect();
        let header: Vec<String> = std::iter::once("t\\x".to_string())
            .chain(nodes.iter().map(|&j| num(grid.x(j))))
            .collect();
        let rows = (0..map.len())
            .step_by(config.outputs.intensity_every)
            .map(|i| {
                std::iter::once(num(rec.times[i]))
                    .chain(nodes.iter().map(|&j| num(map[i][j])))
                    .collect()
            });
        writer.csv("intensity.csv", &header, rows)?;
    }

    if which.contains(&Output::FinalProfile) {
        let last = traj.final_state();
        let header = ["x", "re", "im", "intensity"].map(String::from);
        let rows = last
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| vec![num(grid.x(j)), num(v.re), num(v.im), num(v.norm_sqr())]);
        writer.csv("final_profile.csv", &header, rows)?;
    }
    Ok(())
}

fn write_channels(writer: &mut Writer, result: &FloquetScatteringResult) -> Result<()> {
    let header = [
        "m", "omega_m", "k_re", "k_im", "r_re", "r_im", "t_re", "t_im",
    ]
    .map(String::from);
    let rows = result.channels.channels.iter().enumerate().map(|(p, ch)| {
        vec![
            ch.m.to_string(),
            num(ch.omega),
            num(ch.k.re),
            num(ch.k.im),
            num(result.r[p].re),
            num(result.r[p].im),
            num(result.t[p].re),
            num(result.t[p].im),
        ]
    });
    writer.csv("channels.csv", &header, rows)
}
