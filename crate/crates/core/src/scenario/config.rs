//! Declarative scenario files and their validation into domain objects.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{build_channels, ChannelSet, Incidence, Window, DEFAULT_M_RANGE, DEFAULT_NX};
use crate::grid::{make_gaussian_packet, SpatialGrid, WaveFunction};
use crate::modulation::{ModulationSpec, Tone};
use crate::potential::PotentialSpec;
use crate::propagator::{Absorber, PropagationPlan};

/// Step used for runs without any modulation tone when `plan.dt` is unset.
pub const FREE_RUN_DT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TimeDomain,
    Effective,
    Floquet,
    FreeReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floquet: Option<FloquetConfig>,
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub carrier: f64,
    #[serde(default = "yes")]
    pub normalize: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Gaussian {
        v0: f64,
        beta: f64,
    },
    /// Two-column `x,value` CSV; relative paths resolve against the config file.
    Sampled {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulationPreset {
    /// A cos(ωt), default A = 1.
    Cos,
    /// A e^{iωt}, default A = 1/2.
    OneSided,
    /// A e^{-iωt}, default A = 1/2.
    OneSidedNegative,
    /// A (e^{iωt} + e^{i√2 ωt}), default A = 1/4.
    TwoTone,
    None,
}

impl ModulationPreset {
    fn default_amplitude(self) -> f64 {
        match self {
            Self::Cos => 1.0,
            Self::OneSided | Self::OneSidedNegative => 0.5,
            Self::TwoTone => 0.25,
            Self::None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneConfig {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub frequency: f64,
}

/// Either a named preset with `omega` (and optional `amplitude`) or an
/// explicit tone list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<ModulationPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tones: Option<Vec<ToneConfig>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub total_time: f64,
    #[serde(default = "one")]
    pub steps_per_record: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber: Option<Absorber>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetConfig {
    pub omega0: f64,
    #[serde(default = "default_m_min")]
    pub m_min: i32,
    #[serde(default = "default_m_max")]
    pub m_max: i32,
    #[serde(default = "default_nx")]
    pub n_x: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default = "default_incidence")]
    pub incidence: Incidence,
    #[serde(default = "default_tol")]
    pub invisibility_tol: f64,
}

fn default_m_min() -> i32 {
    DEFAULT_M_RANGE.0
}
fn default_m_max() -> i32 {
    DEFAULT_M_RANGE.1
}
fn default_nx() -> usize {
    DEFAULT_NX
}
fn default_incidence() -> Incidence {
    Incidence::FromLeft
}
fn default_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Norm,
    Width,
    Intensity,
    Invisibility,
    FinalProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub directory: PathBuf,
    #[serde(default = "all_outputs")]
    pub which: Vec<Output>,
    /// Adds a reflected-fraction column (norm share left of this point).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_split: Option<f64>,
    /// Keep every k-th record in the intensity map.
    #[serde(default = "one")]
    pub intensity_every: usize,
    /// Keep every k-th grid node in the intensity map.
    #[serde(default = "one")]
    pub intensity_x_stride: usize,
}

fn all_outputs() -> Vec<Output> {
    vec![
        Output::Norm,
        Output::Width,
        Output::Intensity,
        Output::Invisibility,
        Output::FinalProfile,
    ]
}

/// A scenario with every field turned into a validated domain object.
#[derive(Debug, Clone)]
pub enum Resolved {
    TimeDomain {
        mode: Mode,
        initial: WaveFunction,
        potential: PotentialSpec,
        modulation: ModulationSpec,
        plan: PropagationPlan,
    },
    Floquet {
        potential: PotentialSpec,
        modulation: ModulationSpec,
        channels: ChannelSet,
        window: Window,
        incidence: Incidence,
        tolerance: f64,
    },
}

fn cfg<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(path, other.to_string()),
    })
}

fn required<'a, T>(value: &'a Option<T>, path: &str, mode: Mode) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::config(path, format!("section is required in {mode:?} mode")))
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: toml::Table =
            toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
        Self::from_table(doc)
    }

    /// Deserializes with the dotted path of the offending field in errors.
    pub fn from_table(doc: toml::Table) -> Result<Self> {
        serde_path_to_error::deserialize(toml::Value::Table(doc)).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." {
                "config".to_string()
            } else {
                path
            };
            Error::config(path, e.into_inner().message().to_string())
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Validates every section against its target module. `base_dir` anchors
    /// relative file paths.
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved> {
        let mode = self.mode;
        let outputs = &self.outputs;
        if outputs.intensity_every == 0 || outputs.intensity_x_stride == 0 {
            return Err(Error::config(
                "outputs",
                "intensity strides must be at least 1",
            ));
        }
        match mode {
            Mode::Floquet => {
                let fl = required(&self.floquet, "floquet", mode)?;
                let potential = self.potential_spec(base_dir)?;
                let modulation = self.modulation_spec()?;
                let channels = cfg(
                    "floquet",
                    build_channels(fl.omega0, &modulation, fl.m_min, fl.m_max),
                )?;
                let window = match (fl.x_min, fl.x_max) {
                    (None, None) => {
                        let w = cfg("floquet", Window::default_for(&potential))?;
                        cfg("floquet.n_x", Window::new(w.x_min, w.x_max, fl.n_x))?
                    }
                    (Some(a), Some(b)) => cfg("floquet", Window::new(a, b, fl.n_x))?,
                    _ => {
                        return Err(Error::config(
                            "floquet",
                            "set both x_min and x_max or neither",
                        ))
                    }
                };
                if !(fl.invisibility_tol > 0.0) {
                    return Err(Error::config(
                        "floquet.invisibility_tol",
                        "must be positive",
                    ));
                }
                Ok(Resolved::Floquet {
                    potential,
                    modulation,
                    channels,
                    window,
                    incidence: fl.incidence,
                    tolerance: fl.invisibility_tol,
                })
            }
            Mode::TimeDomain | Mode::Effective | Mode::FreeReference => {
                let g = required(&self.grid, "grid", mode)?;
                let grid = cfg("grid", SpatialGrid::new(g.x_min, g.x_max, g.n))?;
                let p = required(&self.packet, "packet", mode)?;
                let initial = cfg(
                    "packet",
                    make_gaussian_packet(grid, p.center, p.width, p.carrier, p.normalize),
                )?;
                let (potential, modulation) = if mode == Mode::FreeReference {
                    (PotentialSpec::gaussian(0.0, 1.0)?, ModulationSpec::empty())
                } else {
                    (self.potential_spec(base_dir)?, self.modulation_spec()?)
                };
                if let PotentialSpec::Sampled { grid: sg, .. } = &potential {
                    if *sg != grid {
                        return Err(Error::config(
                            "potential.file",
                            "sampled potential grid differs from the simulation grid",
                        ));
                    }
                }
                let pc = required(&self.plan, "plan", mode)?;
                let mut plan = match pc.dt {
                    Some(dt) => cfg(
                        "plan",
                        PropagationPlan::new(dt, pc.steps_per_record, pc.total_time),
                    )?,
                    None => cfg(
                        "plan",
                        PropagationPlan::with_default_dt(
                            pc.total_time,
                            pc.steps_per_record,
                            &modulation,
                            FREE_RUN_DT,
                        ),
                    )?,
                };
                if mode == Mode::TimeDomain {
                    cfg("plan.dt", plan.validate_for(&modulation))?;
                }
                if let Some(a) = pc.absorber {
                    plan = cfg("plan.absorber", plan.with_absorber(a))?;
                }
                if let Some(x) = outputs.x_split {
                    if x < grid.x_min() || x > grid.x_max() {
                        return Err(Error::config(
                            "outputs.x_split",
                            format!("{x} lies outside the grid"),
                        ));
                    }
                }
                Ok(Resolved::TimeDomain {
                    mode,
                    initial,
                    potential,
                    modulation,
                    plan,
                })
            }
        }
    }

    fn potential_spec(&self, base_dir: &Path) -> Result<PotentialSpec> {
        match required(&self.potential, "potential", self.mode)? {
            PotentialConfig::Gaussian { v0, beta } => {
                cfg("potential", PotentialSpec::gaussian(*v0, *beta))
            }
            PotentialConfig::Sampled { file } => {
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    base_dir.join(file)
                };
                cfg("potential.file", PotentialSpec::from_csv(&path))
            }
        }
    }

    fn modulation_spec(&self) -> Result<ModulationSpec> {
        let m = required(&self.modulation, "modulation", self.mode)?;
        match (&m.preset, &m.tones) {
            (Some(_), Some(_)) => Err(Error::config(
                "modulation",
                "give either `preset` or `tones`, not both",
            )),
            (None, None) => Err(Error::config("modulation", "needs `preset` or `tones`")),
            (None, Some(tones)) => {
                if m.omega.is_some() || m.amplitude.is_some() {
                    return Err(Error::config(
                        "modulation",
                        "`omega`/`amplitude` only apply to presets",
                    ));
                }
                let tones = tones
                    .iter()
                    .map(|t| Tone {
                        amplitude: Complex64::new(t.re, t.im),
                        frequency: t.frequency,
                    })
                    .collect();
                cfg("modulation.tones", ModulationSpec::new(tones))
            }
            (Some(ModulationPreset::None), None) => Ok(ModulationSpec::empty()),
            (Some(preset), None) => {
                let omega = m
                    .omega
                    .ok_or_else(|| Error::config("modulation.omega", "required with a preset"))?;
                let a = m.amplitude.unwrap_or(preset.default_amplitude());
                let spec = match preset {
                    ModulationPreset::Cos => ModulationSpec::cosine(omega, a),
                    ModulationPreset::OneSided => ModulationSpec::one_sided(omega, a),
                    ModulationPreset::OneSidedNegative => {
                        ModulationSpec::one_sided_negative(omega, a)
                    }
                    ModulationPreset::TwoTone => ModulationSpec::two_tone(omega, a),
                    ModulationPreset::None => unreachable!(),
                };
                cfg("modulation", spec)
            }
        }
    }

    /// Period used for cycle averages: that of the slowest tone.
    pub fn averaging_period(modulation: &ModulationSpec) -> Option<f64> {
        modulation
            .tones()
            .iter()
            .map(|t| t.frequency.abs())
            .fold(None, |acc: Option<f64>, w| {
                Some(acc.map_or(w, |a| a.min(w)))
            })
            .map(|w| 2.0 * PI / w)
    }
}

/// Sets `dotted.key = value` in a TOML document. `value` is parsed as a TOML
/// value when possible and taken as a bare string otherwise.
pub fn apply_override(doc: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut table = doc;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(parts[..=i].join("."), "is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
