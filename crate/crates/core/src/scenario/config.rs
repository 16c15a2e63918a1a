//! Scenario description and its TOML file form.
//!
//! A file has one `[global]` table and one `[[loop]]` table per control loop.
//! See `configs/schema.toml` in the repository for every key.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::controller::PidGains;
use crate::error::{Error, Result};
use crate::plant::{TransferFunction, DEFAULT_SUBSTEP};
use crate::scheduler::{Beta, FsConfig, Mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Speed follows the workload, periods stay nominal.
    #[serde(rename = "opdvs")]
    OpDvs,
    #[serde(rename = "eeafs-exponential")]
    EeafsExponential,
    #[serde(rename = "eeafs-linear")]
    EeafsLinear,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::OpDvs, Scheme::EeafsExponential, Scheme::EeafsLinear];

    pub fn mode(self) -> Mode {
        match self {
            Scheme::OpDvs => Mode::FixedPeriod,
            Scheme::EeafsExponential => Mode::Exponential,
            Scheme::EeafsLinear => Mode::Linear,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::OpDvs => "opdvs",
            Scheme::EeafsExponential => "eeafs-exponential",
            Scheme::EeafsLinear => "eeafs-linear",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "opdvs" => Ok(Scheme::OpDvs),
            "eeafs-exponential" | "eeafs-1" | "eeafs-exp" | "exponential" => {
                Ok(Scheme::EeafsExponential)
            }
            "eeafs-linear" | "eeafs-2" | "linear" => Ok(Scheme::EeafsLinear),
            _ => Err(Error::InvalidArgument(format!(
                "unknown scheme `{s}` (expected opdvs, eeafs-exponential or eeafs-linear)"
            ))),
        }
    }
}

/// Reference steps as `(time, new reference)` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PerturbationSchedule(pub Vec<(f64, f64)>);

impl PerturbationSchedule {
    /// Unit square wave: the reference toggles 1, 0, 1, … at each instant.
    pub fn square_wave(times: impl IntoIterator<Item = f64>) -> Self {
        PerturbationSchedule(
            times
                .into_iter()
                .enumerate()
                .map(|(k, t)| (t, if k % 2 == 0 { 1.0 } else { 0.0 }))
                .collect(),
        )
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub plant: TransferFunction,
    pub gains: PidGains,
    pub c_nom: f64,
    pub h0: f64,
    pub h_max: f64,
    /// Instant the task starts and the plant leaves rest.
    pub activation: f64,
    pub perturbations: PerturbationSchedule,
    /// Event threshold; falls back to the global one.
    pub delta: Option<f64>,
    /// Externally imposed period switches `(time, h)`, outside feedback scheduling.
    pub period_changes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub loops: Vec<LoopConfig>,
    pub scheme: Scheme,
    pub fs: FsConfig,
    pub duration: f64,
    pub trace_stride: f64,
    pub plant_substep: f64,
    /// Pins the processor speed instead of scaling it.
    pub fixed_speed: Option<f64>,
}

impl ScenarioConfig {
    /// Feedback-scheduler settings with the mode implied by the scheme.
    pub fn fs_config(&self) -> FsConfig {
        FsConfig {
            mode: self.scheme.mode(),
            ..self.fs
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self.fs.mode = scheme.mode();
        self
    }

    pub fn loop_delta(&self, i: usize) -> f64 {
        self.loops[i].delta.unwrap_or(self.fs.delta)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        if self.loops.is_empty() {
            p.push("scenario has no loops".to_string());
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            p.push(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.trace_stride > 0.0) {
            p.push(format!(
                "trace_stride must be positive, got {}",
                self.trace_stride
            ));
        }
        if !(self.plant_substep > 0.0) {
            p.push(format!(
                "plant_substep must be positive, got {}",
                self.plant_substep
            ));
        }
        p.extend(self.fs.problems());

        for (i, l) in self.loops.iter().enumerate() {
            let n = i + 1;
            p.extend(
                l.plant
                    .problems()
                    .into_iter()
                    .map(|m| format!("loop {n}: {m}")),
            );
            p.extend(
                l.gains
                    .problems()
                    .into_iter()
                    .map(|m| format!("loop {n}: {m}")),
            );
            if !(l.c_nom > 0.0) {
                p.push(format!("loop {n}: c_nom must be positive, got {}", l.c_nom));
            }
            if !(l.h0 > 0.0) {
                p.push(format!("loop {n}: h0 must be positive, got {}", l.h0));
            }
            if l.c_nom > l.h0 {
                p.push(format!("loop {n}: c_nom {} exceeds h0 {}", l.c_nom, l.h0));
            }
            if !(l.h_max >= l.h0) {
                p.push(format!("loop {n}: h_max {} below h0 {}", l.h_max, l.h0));
            }
            if !(l.activation >= 0.0 && l.activation.is_finite()) {
                p.push(format!(
                    "loop {n}: activation must be a time >= 0, got {}",
                    l.activation
                ));
            }
            if let Some(d) = l.delta {
                if !(d > 0.0) {
                    p.push(format!("loop {n}: delta must be positive, got {d}"));
                }
            }
            let steps = l.perturbations.steps();
            if steps.iter().any(|(t, r)| !t.is_finite() || !r.is_finite()) {
                p.push(format!("loop {n}: perturbation entries must be finite"));
            }
            if steps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                p.push(format!(
                    "loop {n}: perturbation times must be strictly increasing"
                ));
            }
            if l.period_changes.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                p.push(format!(
                    "loop {n}: period change times must be strictly increasing"
                ));
            }
            if let Some((t, h)) = l.period_changes.iter().find(|(_, h)| !(*h >= l.c_nom)) {
                p.push(format!(
                    "loop {n}: period change at {t} to {h} is shorter than c_nom"
                ));
            }
        }

        let omega: f64 = self.loops.iter().map(|l| l.c_nom / l.h0).sum();
        if omega > 1.0 {
            p.push(format!("nominal workload {omega} exceeds 1"));
        }
        if let Some(a) = self.fixed_speed {
            if !(a >= self.fs.alpha_min && a <= 1.0) {
                p.push(format!("fixed_speed {a} outside [alpha_min, 1]"));
            } else if omega > a {
                p.push(format!("fixed_speed {a} below nominal workload {omega}"));
            }
        }

        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(p))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(vec![format!("cannot parse config: {e}")]))?;
        let cfg = file.into_config();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ConfigFile::from_config(self)).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    global: GlobalSection,
    #[serde(rename = "loop", default)]
    loops: Vec<LoopSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GlobalSection {
    #[serde(default = "default_name")]
    name: String,
    scheme: Scheme,
    duration: f64,
    #[serde(default = "defaults::t_fs")]
    t_fs: f64,
    #[serde(default = "defaults::lambda")]
    lambda: f64,
    #[serde(default = "defaults::e_min")]
    e_min: f64,
    #[serde(default = "defaults::e_max")]
    e_max: f64,
    #[serde(default = "defaults::beta")]
    beta: Beta,
    #[serde(default = "defaults::delta")]
    delta: f64,
    #[serde(default = "defaults::alpha_min")]
    alpha_min: f64,
    #[serde(default = "defaults::period_resolution")]
    period_resolution: f64,
    #[serde(default = "defaults::trace_stride")]
    trace_stride: f64,
    #[serde(default = "defaults::plant_substep")]
    plant_substep: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixed_speed: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopSection {
    num: Vec<f64>,
    den: Vec<f64>,
    kp: f64,
    #[serde(default)]
    ki: f64,
    #[serde(default)]
    kd: f64,
    c_nom: f64,
    h0: f64,
    h_max: f64,
    #[serde(default)]
    activation: f64,
    #[serde(default)]
    perturbations: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    period_changes: Vec<(f64, f64)>,
}

fn default_name() -> String {
    "custom".to_string()
}

mod defaults {
    use crate::scheduler::{Beta, FsConfig};

    pub fn t_fs() -> f64 {
        FsConfig::default().t_fs
    }
    pub fn lambda() -> f64 {
        FsConfig::default().lambda
    }
    pub fn e_min() -> f64 {
        FsConfig::default().e_min
    }
    pub fn e_max() -> f64 {
        FsConfig::default().e_max
    }
    pub fn beta() -> Beta {
        FsConfig::default().beta
    }
    pub fn delta() -> f64 {
        FsConfig::default().delta
    }
    pub fn alpha_min() -> f64 {
        FsConfig::default().alpha_min
    }
    pub fn period_resolution() -> f64 {
        FsConfig::default().period_resolution
    }
    pub fn trace_stride() -> f64 {
        1e-3
    }
    pub fn plant_substep() -> f64 {
        super::DEFAULT_SUBSTEP
    }
}

impl ConfigFile {
    fn into_config(self) -> ScenarioConfig {
        let g = self.global;
        ScenarioConfig {
            name: g.name,
            scheme: g.scheme,
            fs: FsConfig {
                t_fs: g.t_fs,
                lambda: g.lambda,
                e_min: g.e_min,
                e_max: g.e_max,
                beta: g.beta,
                delta: g.delta,
                mode: g.scheme.mode(),
                alpha_min: g.alpha_min,
                period_resolution: g.period_resolution,
            },
            duration: g.duration,
            trace_stride: g.trace_stride,
            plant_substep: g.plant_substep,
            fixed_speed: g.fixed_speed,
            loops: self
                .loops
                .into_iter()
                .map(|l| LoopConfig {
                    plant: TransferFunction {
                        num: l.num,
                        den: l.den,
                    },
                    gains: PidGains::new(l.kp, l.ki, l.kd),
                    c_nom: l.c_nom,
                    h0: l.h0,
                    h_max: l.h_max,
                    activation: l.activation,
                    perturbations: PerturbationSchedule(l.perturbations),
                    delta: l.delta,
                    period_changes: l.period_changes,
                })
                .collect(),
        }
    }

    fn from_config(c: &ScenarioConfig) -> Self {
        ConfigFile {
            global: GlobalSection {
                name: c.name.clone(),
                scheme: c.scheme,
                duration: c.duration,
                t_fs: c.fs.t_fs,
                lambda: c.fs.lambda,
                e_min: c.fs.e_min,
                e_max: c.fs.e_max,
                beta: c.fs.beta,
                delta: c.fs.delta,
                alpha_min: c.fs.alpha_min,
                period_resolution: c.fs.period_resolution,
                trace_stride: c.trace_stride,
                plant_substep: c.plant_substep,
                fixed_speed: c.fixed_speed,
            },
            loops: c
                .loops
                .iter()
                .map(|l| LoopSection {
                    num: l.plant.num.clone(),
                    den: l.plant.den.clone(),
                    kp: l.gains.kp,
                    ki: l.gains.ki,
                    kd: l.gains.kd,
                    c_nom: l.c_nom,
                    h0: l.h0,
                    h_max: l.h_max,
                    activation: l.activation,
                    perturbations: l.perturbations.0.clone(),
                    delta: l.delta,
                    period_changes: l.period_changes.clone(),
                })
                .collect(),
        }
    }
}
