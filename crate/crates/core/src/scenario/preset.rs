//! Built-in experiment configurations.

use crate::controller::PidGains;
use crate::error::{Error, Result};
use crate::metrics::energy_of_periods;
use crate::plant::{TransferFunction, DEFAULT_SUBSTEP};
use crate::scheduler::{Beta, FsConfig};

use super::config::{LoopConfig, PerturbationSchedule, ScenarioConfig, Scheme};

pub const PRESET_NAMES: [&str; 5] = [
    "example1-surface",
    "example2",
    "section-5a",
    "beta-sweep",
    "pi-sweep",
];

/// Betas compared on the three-phase scenario.
pub const BETA_SWEEP: [Beta; 7] = [
    Beta::Finite(1.0),
    Beta::Finite(10.0),
    Beta::Finite(20.0),
    Beta::Finite(40.0),
    Beta::Finite(60.0),
    Beta::Finite(80.0),
    Beta::Infinite,
];

/// Perturbation intervals, seconds.
pub const PI_SWEEP: [f64; 4] = [1.0, 2.0, 4.0, 6.0];

#[derive(Debug, Clone)]
pub enum Preset {
    Scenario(ScenarioConfig),
    Sweep(Sweep),
    Surface(SurfaceGrid),
}

/// Paired runs reported side by side: a baseline and a candidate per row.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub name: String,
    pub label_header: String,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub label: String,
    pub baseline: ScenarioConfig,
    pub candidate: ScenarioConfig,
}

/// Grid over two periods for the two-task energy surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub c: (f64, f64),
    pub h1: (f64, f64),
    pub h2: (f64, f64),
    pub step: f64,
}

impl SurfaceGrid {
    /// `(h1, h2, E)` triples, `h1` outermost.
    pub fn evaluate(&self) -> Result<Vec<(f64, f64, f64)>> {
        let axis = |(lo, hi): (f64, f64)| {
            let n = ((hi - lo) / self.step).round() as usize;
            (0..=n).map(move |k| lo + k as f64 * self.step)
        };
        let mut out = Vec::new();
        for h1 in axis(self.h1) {
            for h2 in axis(self.h2) {
                out.push((
                    h1,
                    h2,
                    energy_of_periods(&[(self.c.0, h1), (self.c.1, h2)])?,
                ));
            }
        }
        Ok(out)
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "example1-surface" => Preset::Surface(two_task_surface()),
        "example2" => Preset::Sweep(motor_sweep()),
        "section-5a" => Preset::Scenario(three_phase(Scheme::EeafsExponential)),
        "beta-sweep" => Preset::Sweep(beta_sweep()),
        "pi-sweep" => Preset::Sweep(pi_sweep()),
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

/// Comparison rows for `sweep <name>`. `section-5a` pits both adaptive
/// schemes against the fixed-period baseline.
pub fn sweep(name: &str) -> Result<Sweep> {
    match preset(name)? {
        Preset::Sweep(s) => Ok(s),
        Preset::Scenario(_) => Ok(scheme_comparison()),
        Preset::Surface(_) => Err(Error::InvalidArgument(format!(
            "`{name}` is not a sweep; use the `surface` subcommand"
        ))),
    }
}

/// Two-task surface over `h1 ∈ [10, 20]`, `h2 ∈ [10, 30]` with `c = (4, 5)`.
pub fn two_task_surface() -> SurfaceGrid {
    SurfaceGrid {
        c: (4.0, 5.0),
        h1: (10.0, 20.0),
        h2: (10.0, 30.0),
        step: 1.0,
    }
}

/// Four loops with periods and execution times in seconds.
pub fn benchmark_loops() -> Vec<LoopConfig> {
    let loop_cfg = |num: &[f64], den: &[f64], gains: PidGains, h0: f64, h_max: f64| LoopConfig {
        plant: TransferFunction {
            num: num.to_vec(),
            den: den.to_vec(),
        },
        gains,
        c_nom: 0.002,
        h0,
        h_max,
        activation: 0.0,
        perturbations: PerturbationSchedule::default(),
        delta: None,
        period_changes: Vec::new(),
    };
    vec![
        loop_cfg(
            &[1.0],
            &[1000.0, 50.0],
            PidGains::new(1e4, 400.0, 0.0),
            0.010,
            0.040,
        ),
        loop_cfg(
            &[1.0],
            &[1.0, 10.0, 20.0],
            PidGains::new(30.0, 70.0, 0.0),
            0.007,
            0.030,
        ),
        loop_cfg(
            &[1.0],
            &[0.5, 6.0, 10.0],
            PidGains::new(100.0, 200.0, 2.0),
            0.008,
            0.030,
        ),
        loop_cfg(
            &[1.0],
            &[1.0, 10.0, 20.0],
            PidGains::new(200.0, 350.0, 3.0),
            0.009,
            0.040,
        ),
    ]
}

fn base(name: &str, loops: Vec<LoopConfig>, duration: f64, scheme: Scheme) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        loops,
        scheme,
        fs: FsConfig::default(),
        duration,
        trace_stride: 1e-3,
        plant_substep: DEFAULT_SUBSTEP,
        fixed_speed: None,
    }
    .with_scheme(scheme)
}

/// Loops 1–2 from t=0 (loop 1 stepped at 0, loop 2 at 2 s), loops 3–4 switched
/// on and stepped at 4 s, every loop stepped again at 6 s, end at 8 s.
pub fn three_phase(scheme: Scheme) -> ScenarioConfig {
    let mut loops = benchmark_loops();
    let first_steps = [0.0, 2.0, 4.0, 4.0];
    for (l, &t) in loops.iter_mut().zip(&first_steps) {
        l.perturbations = PerturbationSchedule::square_wave([t, 6.0]);
    }
    loops[2].activation = 4.0;
    loops[3].activation = 4.0;
    base("section-5a", loops, 8.0, scheme)
}

/// All loops from t=0, stepped together every `interval` seconds for 12 s.
pub fn pi_scenario(interval: f64, scheme: Scheme) -> ScenarioConfig {
    let duration = 12.0;
    let count = (duration / interval).ceil() as usize;
    let times: Vec<f64> = (0..count).map(|k| k as f64 * interval).collect();
    let mut loops = benchmark_loops();
    for l in &mut loops {
        l.perturbations = PerturbationSchedule::square_wave(times.iter().copied());
    }
    base(&format!("pi-{interval}"), loops, duration, scheme)
}

pub fn pi_sweep() -> Sweep {
    Sweep {
        name: "pi-sweep".to_string(),
        label_header: "PI (s)".to_string(),
        points: PI_SWEEP
            .iter()
            .map(|&pi| SweepPoint {
                label: format!("{pi}"),
                baseline: pi_scenario(pi, Scheme::OpDvs),
                candidate: pi_scenario(pi, Scheme::EeafsExponential),
            })
            .collect(),
    }
}

pub fn beta_sweep() -> Sweep {
    Sweep {
        name: "beta-sweep".to_string(),
        label_header: "beta".to_string(),
        points: BETA_SWEEP
            .iter()
            .map(|&beta| {
                let mut candidate = three_phase(Scheme::EeafsExponential);
                candidate.fs.beta = beta;
                candidate.name = format!("section-5a-beta-{beta}");
                SweepPoint {
                    label: beta.to_string(),
                    baseline: three_phase(Scheme::OpDvs),
                    candidate,
                }
            })
            .collect(),
    }
}

pub fn scheme_comparison() -> Sweep {
    Sweep {
        name: "section-5a".to_string(),
        label_header: "scheme".to_string(),
        points: [Scheme::EeafsExponential, Scheme::EeafsLinear]
            .iter()
            .map(|&s| SweepPoint {
                label: s.to_string(),
                baseline: three_phase(Scheme::OpDvs),
                candidate: three_phase(s),
            })
            .collect(),
    }
}

/// Sampling period of the motor loop and the instant it is doubled.
pub const MOTOR_H: f64 = 0.006;
pub const MOTOR_SWITCH: f64 = 0.5;

/// Motor `1000/(s² + s)` on a dedicated full-speed processor. With
/// `switch_period` the period is doubled from 6 ms to 12 ms at 0.5 s.
pub fn motor_scenario(switch_period: bool) -> ScenarioConfig {
    let l = LoopConfig {
        plant: TransferFunction {
            num: vec![1000.0],
            den: vec![1.0, 1.0, 0.0],
        },
        gains: motor_gains(),
        c_nom: 0.002,
        h0: MOTOR_H,
        h_max: 2.0 * MOTOR_H,
        activation: 0.0,
        perturbations: PerturbationSchedule(vec![(0.0, 1.0)]),
        delta: None,
        period_changes: if switch_period {
            vec![(MOTOR_SWITCH, 2.0 * MOTOR_H)]
        } else {
            Vec::new()
        },
    };
    let name = if switch_period {
        "example2-case-ii"
    } else {
        "example2-case-i"
    };
    let mut cfg = base(name, vec![l], 1.0, Scheme::OpDvs);
    cfg.fixed_speed = Some(1.0);
    cfg
}

/// PID for the motor loop: `K = 0.96`, `Ti = 0.12 s`, `Td = 0.049 s` in
/// parallel form.
pub fn motor_gains() -> PidGains {
    let (k, ti, td) = (0.96, 0.12, 0.049);
    PidGains::new(k, k / ti, k * td)
}

pub fn motor_sweep() -> Sweep {
    Sweep {
        name: "example2".to_string(),
        label_header: "case".to_string(),
        points: vec![SweepPoint {
            label: "h 6ms -> 12ms at 0.5s".to_string(),
            baseline: motor_scenario(false),
            candidate: motor_scenario(true),
        }],
    }
}
