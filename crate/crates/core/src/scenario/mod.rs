//! Configuration-driven runs: TOML scenarios, compiled-in presets, CSV and
//! JSON outputs.

mod config;
mod presets;
mod run;

use std::fs;
use std::path::{Path, PathBuf};

pub use config::{
    apply_override, FloquetConfig, GridConfig, Mode, ModulationConfig, ModulationPreset, Output,
    OutputsConfig, PacketConfig, PlanConfig, PotentialConfig, Resolved, ScenarioConfig, ToneConfig,
    FREE_RUN_DT,
};
pub use presets::{Preset, PRESETS};
pub use run::{run_scenario, Flags, FloquetSummary, RunReport, TimeDomainSummary};

use crate::error::{Error, Result};

/// Preset names with their one-line descriptions.
pub fn list_presets() -> Vec<(&'static str, &'static str)> {
    PRESETS.iter().map(|p| (p.name, p.description)).collect()
}

/// A parsed scenario together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    /// Directory relative file references resolve against.
    pub base_dir: PathBuf,
    pub preset: Option<&'static str>,
}

impl LoadedScenario {
    pub fn run(&self) -> Result<RunReport> {
        run_scenario(&self.config, &self.base_dir, self.preset)
    }
}

/// Loads a preset by name, or else a TOML file, then applies `key=value`
/// overrides on dotted paths.
pub fn load_scenario(target: &str, overrides: &[String]) -> Result<LoadedScenario> {
    let (text, base_dir, preset) = match presets::find(target) {
        Some(p) => (p.toml.to_string(), PathBuf::from("."), Some(p.name)),
        None => {
            let path = Path::new(target);
            if !path.exists() {
                return Err(Error::config(
                    target,
                    "neither a preset name nor an existing file (see `list`)",
                ));
            }
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (text, base, None)
        }
    };
    let mut doc: toml::Table =
        toml::from_str(&text).map_err(|e| Error::config(target, e.message().to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let config = ScenarioConfig::from_table(doc)?;
    Ok(LoadedScenario {
        config,
        base_dir,
        preset,
    })
}

/// Runs presets concurrently, each in `out_root/<name>`.
pub fn run_batch(
    names: &[String],
    out_root: &Path,
    overrides: &[String],
) -> Vec<(String, Result<RunReport>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = names
            .iter()
            .map(|name| {
                scope.spawn(move || {
                    let result = match presets::find(name) {
                        None => Err(Error::config(name.as_str(), "unknown preset")),
                        Some(_) => load_scenario(name, overrides).and_then(|mut s| {
                            s.config.outputs.directory = out_root.join(name);
                            s.run()
                        }),
                    };
                    (name.clone(), result)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    })
}
