//! Energy-aware feedback scheduler.
//!
//! Each invocation samples the absolute control error of the addressed loops,
//! folds it into a forgetting-factor performance index, maps the index to a
//! period scaling factor `η ∈ [1, h_max/h0]`, sets `h = η·h0`, and finally
//! picks the lowest speed that keeps EDF feasible: `α = max(Σ c_nom/h, α_min)`.
//!
//! Invocations are time-triggered every `t_fs` seconds. Between them a loop
//! whose error moved by more than `δ` since its last observation triggers an
//! extra invocation that re-assigns only that loop's period.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Shape constant of the exponential period map. `Infinite` is the two-level
/// limit: `h_max` below `e_min`, `h0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    Infinite,
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Finite(b) => write!(f, "{b}"),
            Beta::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Beta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Beta::Infinite),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|b| *b > 0.0)
                .map(|b| {
                    if b.is_infinite() {
                        Beta::Infinite
                    } else {
                        Beta::Finite(b)
                    }
                })
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("beta must be > 0 or `inf`, got `{s}`"))
                }),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(b) => s.serialize_f64(*b),
            Beta::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Beta::from_str(&b.to_string()),
            Raw::Text(t) => Beta::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Period adaptation policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exponential,
    Linear,
    /// Periods pinned at `h0`; only the speed is adapted.
    FixedPeriod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsConfig {
    pub t_fs: f64,
    pub lambda: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub beta: Beta,
    /// Default event threshold; loops may override it.
    pub delta: f64,
    pub mode: Mode,
    pub alpha_min: f64,
    /// Timer granularity of assigned periods, seconds; zero keeps them exact.
    pub period_resolution: f64,
}

impl Default for FsConfig {
    fn default() -> Self {
        FsConfig {
            t_fs: 0.05,
            lambda: 0.3,
            e_min: 0.02,
            e_max: 0.2,
            beta: Beta::Finite(40.0),
            delta: 0.1,
            mode: Mode::Exponential,
            alpha_min: 0.1,
            period_resolution: 1e-6,
        }
    }
}

impl FsConfig {
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.t_fs > 0.0 && self.t_fs.is_finite()) {
            out.push(format!("t_fs must be positive, got {}", self.t_fs));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            out.push(format!("lambda must lie in [0, 1), got {}", self.lambda));
        }
        if !(self.e_min > 0.0) {
            out.push(format!("e_min must be positive, got {}", self.e_min));
        }
        if !(self.e_min < self.e_max) {
            out.push(format!(
                "e_min {} must be below e_max {}",
                self.e_min, self.e_max
            ));
        }
        if let Beta::Finite(b) = self.beta {
            if !(b > 0.0) {
                out.push(format!("beta must be positive, got {b}"));
            }
        }
        if !(self.delta > 0.0) {
            out.push(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.period_resolution >= 0.0 && self.period_resolution.is_finite()) {
            out.push(format!(
                "period_resolution must be non-negative, got {}",
                self.period_resolution
            ));
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            out.push(format!(
                "alpha_min must lie in (0, 1], got {}",
                self.alpha_min
            ));
        }
        out
    }
}

/// Per-loop state kept by the feedback scheduler.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPerfState {
    /// Forgetting-factor average of the absolute error.
    pub ind: f64,
    /// Absolute error seen at this loop's most recent invocation, if any.
    pub e_at_last_fs: Option<f64>,
    pub h_current: f64,
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub c_nom: f64,
    pub delta: f64,
    pub active: bool,
}

impl LoopPerfState {
    pub fn new(c_nom: f64, h0: f64, h_max: f64, delta: f64) -> Self {
        LoopPerfState {
            ind: 0.0,
            e_at_last_fs: None,
            h_current: h0,
            h0,
            h_min: h0,
            h_max,
            c_nom,
            delta,
            active: false,
        }
    }

    /// `h_max / h_min`
    pub fn ratio(&self) -> f64 {
        self.h_max / self.h_min
    }

    pub fn observed(&self) -> bool {
        self.e_at_last_fs.is_some()
    }
}

/// `ind' = λ·ind + (1 − λ)·e`
pub fn update_ind(state: &LoopPerfState, e_abs: f64, lambda: f64) -> Result<LoopPerfState> {
    if !(e_abs >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "absolute error must be non-negative, got {e_abs}"
        )));
    }
    Ok(LoopPerfState {
        ind: lambda * state.ind + (1.0 - lambda) * e_abs,
        ..state.clone()
    })
}

/// Exponential period map.
///
/// Inside `(e_min, e_max)` the factor is
/// `1 + (r − 1)·(e^{−β·ind} − e^{−β·e_max}) / (e^{−β·e_min} − e^{−β·e_max})`,
/// evaluated relative to `e_min` so that large `β` neither underflows nor
/// cancels.
pub fn eta_exponential(ind: f64, cfg: &FsConfig, r: f64) -> f64 {
    if ind <= cfg.e_min {
        return r;
    }
    if ind >= cfg.e_max {
        return 1.0;
    }
    let beta = match cfg.beta {
        Beta::Infinite => return 1.0,
        Beta::Finite(b) => b,
    };
    let span = cfg.e_max - cfg.e_min;
    let x = ind - cfg.e_min;
    // e^{-βx}·(1 − e^{-β(span−x)}) / (1 − e^{-β·span})
    let num = (-beta * x).exp() * -(-beta * (span - x)).exp_m1();
    let den = -(-beta * span).exp_m1();
    1.0 + (r - 1.0) * (num / den)
}

/// Linear period map through `(e_min, r)` and `(e_max, 1)`.
pub fn eta_linear(ind: f64, cfg: &FsConfig, r: f64) -> f64 {
    if ind <= cfg.e_min {
        r
    } else if ind >= cfg.e_max {
        1.0
    } else {
        r - (ind - cfg.e_min) / (cfg.e_max - cfg.e_min) * (r - 1.0)
    }
}

/// `h = η·h0` rounded to a multiple of `resolution` (when positive), clamped
/// to `[h_min, h_max]`.
pub fn assign_period(state: &LoopPerfState, eta: f64, resolution: f64) -> LoopPerfState {
    let r = state.ratio();
    if !(1.0..=r).contains(&eta) && (eta - 1.0).abs() > 1e-12 && (eta - r).abs() > 1e-12 {
        log::warn!("period scaling factor {eta} outside [1, {r}], clamping");
    }
    let mut h = eta * state.h0;
    if resolution > 0.0 {
        h = (h / resolution).round() * resolution;
        if h >= state.h_max - 0.5 * resolution {
            h = state.h_max;
        } else if h <= state.h_min + 0.5 * resolution {
            h = state.h_min;
        }
    }
    LoopPerfState {
        h_current: h.clamp(state.h_min, state.h_max),
        ..state.clone()
    }
}

/// Minimum-energy EDF-feasible speed for tasks given as `(c_nom, h)`.
pub fn opdvs_speed(tasks: &[(f64, f64)], alpha_min: f64) -> Result<f64> {
    if let Some(&(_, h)) = tasks.iter().find(|(_, h)| !(*h > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "period must be positive, got {h}"
        )));
    }
    let omega: f64 = tasks.iter().map(|(c, h)| c / h).sum();
    if omega > 1.0 {
        return Err(Error::Infeasible {
            workload: omega,
            time: f64::NAN,
        });
    }
    Ok(omega.max(alpha_min).min(1.0))
}

/// True when the error moved by strictly more than `delta` since the loop's
/// last observation. Loops never observed do not trigger.
pub fn event_trigger(e_now: f64, state: &LoopPerfState, delta: f64) -> bool {
    state
        .e_at_last_fs
        .is_some_and(|last| (e_now - last).abs() > delta)
}

/// Normalized energy range reachable under adaptation, for loops given as
/// `(c_nom, h0, h_max)`: `((Σ c/h_max)², (Σ c/h0)²)`.
pub fn energy_bounds(loops: &[(f64, f64, f64)]) -> (f64, f64) {
    let low: f64 = loops.iter().map(|(c, _, hmax)| c / hmax).sum();
    let high: f64 = loops.iter().map(|(c, h0, _)| c / h0).sum();
    (low * low, high * high)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    Timer,
    Event(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsDecision {
    pub trigger: Trigger,
    pub periods: Vec<f64>,
    pub alpha: f64,
    /// `Σ c_nom / h` over active loops after the update.
    pub workload: f64,
}

impl FsDecision {
    /// Requested utilization `workload / α` at the assigned speed.
    pub fn utilization(&self) -> f64 {
        self.workload / self.alpha
    }
}

#[derive(Debug, Clone)]
pub struct FeedbackScheduler {
    pub cfg: FsConfig,
    loops: Vec<LoopPerfState>,
}

impl FeedbackScheduler {
    pub fn new(cfg: FsConfig, loops: Vec<LoopPerfState>) -> Result<Self> {
        let mut problems = cfg.problems();
        for (i, l) in loops.iter().enumerate() {
            if !(l.h0 > 0.0 && l.h_max >= l.h0) {
                problems.push(format!(
                    "loop {i}: need 0 < h0 <= h_max, got h0={} h_max={}",
                    l.h0, l.h_max
                ));
            }
            if !(l.delta > 0.0) {
                problems.push(format!("loop {i}: delta must be positive, got {}", l.delta));
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }
        Ok(FeedbackScheduler { cfg, loops })
    }

    pub fn loops(&self) -> &[LoopPerfState] {
        &self.loops
    }

    pub fn loop_state(&self, i: usize) -> &LoopPerfState {
        &self.loops[i]
    }

    /// Marks a loop as running from nominal period with no error history.
    pub fn activate(&mut self, i: usize) {
        let l = &mut self.loops[i];
        l.active = true;
        l.h_current = l.h0;
        l.ind = 0.0;
        l.e_at_last_fs = None;
    }

    /// Pins a loop's period outside the adaptation pipeline.
    pub fn override_period(&mut self, i: usize, h: f64) {
        self.loops[i].h_current = h;
    }

    pub fn event_triggered(&self, i: usize, e_abs: f64) -> bool {
        let l = &self.loops[i];
        l.active && event_trigger(e_abs, l, l.delta)
    }

    fn eta(&self, ind: f64, r: f64) -> f64 {
        match self.cfg.mode {
            Mode::Exponential => eta_exponential(ind, &self.cfg, r),
            Mode::Linear => eta_linear(ind, &self.cfg, r),
            Mode::FixedPeriod => 1.0,
        }
    }

    fn observe(&mut self, i: usize, e_abs: f64) -> Result<()> {
        let l = &self.loops[i];
        let mut next = if l.observed() {
            update_ind(l, e_abs, self.cfg.lambda)?
        } else {
            LoopPerfState {
                ind: e_abs,
                ..l.clone()
            }
        };
        if self.cfg.mode != Mode::FixedPeriod {
            let eta = self.eta(next.ind, next.ratio());
            next = assign_period(&next, eta, self.cfg.period_resolution);
        }
        next.e_at_last_fs = Some(e_abs);
        self.loops[i] = next;
        Ok(())
    }

    /// Speed for the current assignment of periods to active loops.
    pub fn speed(&self) -> Result<(f64, f64)> {
        let tasks: Vec<(f64, f64)> = self
            .loops
            .iter()
            .filter(|l| l.active)
            .map(|l| (l.c_nom, l.h_current))
            .collect();
        let alpha = opdvs_speed(&tasks, self.cfg.alpha_min)?;
        Ok((alpha, tasks.iter().map(|(c, h)| c / h).sum()))
    }

    /// Runs one invocation. `abs_errors[i]` must be present for every active
    /// loop addressed by the trigger.
    pub fn invoke(&mut self, trigger: Trigger, abs_errors: &[Option<f64>]) -> Result<FsDecision> {
        let addressed: Vec<usize> = match trigger {
            Trigger::Timer => (0..self.loops.len())
                .filter(|&i| self.loops[i].active)
                .collect(),
            Trigger::Event(i) => vec![i],
        };
        for i in addressed {
            let e =
                abs_errors.get(i).copied().flatten().ok_or_else(|| {
                    Error::InvalidArgument(format!("no error sample for loop {i}"))
                })?;
            self.observe(i, e)?;
        }
        let (alpha, workload) = self.speed()?;
        Ok(FsDecision {
            trigger,
            periods: self.loops.iter().map(|l| l.h_current).collect(),
            alpha,
            workload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(mode: Mode, beta: Beta) -> FsConfig {
        FsConfig {
            mode,
            beta,
            ..FsConfig::default()
        }
    }

    /// Four-loop benchmark as (c_nom, h0, h_max) in seconds.
    const BENCHMARK: [(f64, f64, f64); 4] = [
        (0.002, 0.010, 0.040),
        (0.002, 0.007, 0.030),
        (0.002, 0.008, 0.030),
        (0.002, 0.009, 0.040),
    ];

    fn benchmark_scheduler(mode: Mode) -> FeedbackScheduler {
        let loops = BENCHMARK
            .iter()
            .map(|&(c, h0, hmax)| LoopPerfState::new(c, h0, hmax, 0.1))
            .collect();
        let mut fs = FeedbackScheduler::new(cfg(mode, Beta::Finite(40.0)), loops).unwrap();
        for i in 0..4 {
            fs.activate(i);
        }
        fs
    }

    #[test]
    fn ind_update() {
        let s = LoopPerfState::new(0.002, 0.01, 0.04, 0.1);
        assert!((update_ind(&s, 1.0, 0.3).unwrap().ind - 0.7).abs() < 1e-15);
        let half = LoopPerfState {
            ind: 0.5,
            ..s.clone()
        };
        for lambda in [0.0, 0.3, 0.9] {
            assert!((update_ind(&half, 0.5, lambda).unwrap().ind - 0.5).abs() < 1e-15);
        }
        assert!(update_ind(&s, -0.1, 0.3).is_err());
    }

    #[test]
    fn ind_converges_geometrically() {
        // Closed form from ind=0 under constant e=c: c·(1 − λ^k).
        let c = 0.8;
        let mut s = LoopPerfState::new(0.002, 0.01, 0.04, 0.1);
        for k in 1..=10 {
            s = update_ind(&s, c, 0.3).unwrap();
            let closed = c * (1.0 - 0.3f64.powi(k));
            assert!((s.ind - closed).abs() < 1e-14);
        }
        assert!((s.ind - c).abs() < 6e-6);
    }

    #[test]
    fn eta_exponential_examples() {
        let c = cfg(Mode::Exponential, Beta::Finite(40.0));
        assert_eq!(eta_exponential(0.01, &c, 4.0), 4.0);
        assert_eq!(eta_exponential(0.25, &c, 4.0), 1.0);
        assert_eq!(eta_exponential(0.25, &c, 40.0 / 7.0), 1.0);
        // Frozen from a 50-digit evaluation of the textbook form.
        assert!((eta_exponential(0.1, &c, 4.0) - 1.120_136_546_750_84).abs() < 1e-12);
    }

    #[test]
    fn eta_exponential_infinite_beta() {
        let c = cfg(Mode::Exponential, Beta::Infinite);
        assert_eq!(eta_exponential(0.02, &c, 4.0), 4.0);
        assert_eq!(eta_exponential(0.020001, &c, 4.0), 1.0);
        assert_eq!(eta_exponential(0.5, &c, 4.0), 1.0);
    }

    #[test]
    fn eta_linear_examples() {
        let c = cfg(Mode::Linear, Beta::Finite(40.0));
        assert!((eta_linear(0.11, &c, 4.0) - 2.5).abs() < 1e-15);
        assert_eq!(eta_linear(0.2, &c, 4.0), 1.0);
        assert_eq!(eta_linear(0.02, &c, 3.0), 3.0);
    }

    #[test]
    fn period_assignment() {
        let s = LoopPerfState::new(0.002, 0.010, 0.040, 0.1);
        assert!((assign_period(&s, 4.0, 0.0).h_current - 0.040).abs() < 1e-15);
        let s = LoopPerfState::new(0.002, 0.007, 0.030, 0.1);
        assert_eq!(assign_period(&s, 1.0, 0.0).h_current, 0.007);
        let s = LoopPerfState::new(0.002, 0.008, 0.030, 0.1);
        assert!((assign_period(&s, 3.75, 0.0).h_current - 0.030).abs() < 1e-15);
        // Out of range is clamped.
        assert_eq!(assign_period(&s, 10.0, 0.0).h_current, 0.030);
        assert_eq!(assign_period(&s, 0.5, 0.0).h_current, 0.008);
    }

    #[test]
    fn period_quantization() {
        let s = LoopPerfState::new(0.002, 0.009, 0.040, 0.1);
        let h = assign_period(&s, 1.234_567_89, 1e-6).h_current;
        assert!((h - 0.011_111e0).abs() < 1e-15, "{h}");
        // Near either end the period snaps to the exact bound.
        assert_eq!(assign_period(&s, 40.0 / 9.0 - 1e-9, 1e-6).h_current, 0.040);
        assert_eq!(assign_period(&s, 1.0 + 1e-9, 1e-6).h_current, 0.009);
        // A change far below the resolution leaves the period untouched.
        let a = assign_period(&s, 2.345_678, 1e-6).h_current;
        let b = assign_period(&s, 2.345_678 + 1e-12, 1e-6).h_current;
        assert_eq!(a, b);
    }

    #[test]
    fn opdvs_examples() {
        assert!((opdvs_speed(&[(4.0, 10.0), (5.0, 10.0)], 0.01).unwrap() - 0.9).abs() < 1e-15);
        let at_max = [(2.0, 40.0), (2.0, 30.0), (2.0, 30.0), (2.0, 40.0)];
        assert!((opdvs_speed(&at_max, 0.01).unwrap() - 7.0 / 30.0).abs() < 1e-15);
        assert_eq!(opdvs_speed(&[(2.0, 10.0)], 0.3).unwrap(), 0.3);
        assert!(matches!(
            opdvs_speed(&[(6.0, 10.0), (6.0, 10.0)], 0.1),
            Err(Error::Infeasible { .. })
        ));
        assert!(opdvs_speed(&[(1.0, 0.0)], 0.1).is_err());
    }

    #[test]
    fn event_trigger_examples() {
        let mut s = LoopPerfState::new(0.002, 0.01, 0.04, 0.1);
        assert!(!event_trigger(1.0, &s, 0.1), "unobserved loop");
        s.e_at_last_fs = Some(0.01);
        assert!(event_trigger(1.0, &s, 0.1));
        s.e_at_last_fs = Some(1.0);
        assert!(!event_trigger(1.0, &s, 0.1));
        // |0.15 − 0.05| rounds to 0.09999999999999999 in binary; either way
        // the boundary is not strictly above δ.
        s.e_at_last_fs = Some(0.05);
        assert!(!event_trigger(0.15, &s, 0.1));
        s.e_at_last_fs = Some(0.0);
        assert!(!event_trigger(0.1, &s, 0.1));
    }

    #[test]
    fn energy_bounds_examples() {
        let (lo, hi) = energy_bounds(&[(4.0, 10.0, 20.0), (5.0, 10.0, 30.0)]);
        assert!((lo - 121.0 / 900.0).abs() < 1e-15);
        assert!((hi - 0.81).abs() < 1e-15);
        let (lo, hi) = energy_bounds(&BENCHMARK);
        assert!((lo - 49.0 / 900.0).abs() < 1e-15);
        assert!((hi - (1207.0f64 / 1260.0).powi(2)).abs() < 1e-15);
        let (lo, hi) = energy_bounds(&[(1.0, 10.0, 10.0), (2.0, 7.0, 7.0)]);
        assert_eq!(lo, hi);
    }

    #[test]
    fn steady_loops_go_to_h_max() {
        let mut fs = benchmark_scheduler(Mode::Exponential);
        let d = fs.invoke(Trigger::Timer, &[Some(0.0); 4]).unwrap();
        let expected: Vec<f64> = BENCHMARK.iter().map(|l| l.2).collect();
        for (h, e) in d.periods.iter().zip(&expected) {
            assert!((h - e).abs() < 1e-15);
        }
        assert!((d.alpha - 7.0 / 30.0).abs() < 1e-15);
        assert!((d.alpha * d.alpha - 0.054444).abs() < 1e-6);
        assert!((d.utilization() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disturbed_loops_go_to_h0() {
        let mut fs = benchmark_scheduler(Mode::Linear);
        let d = fs.invoke(Trigger::Timer, &[Some(1.0); 4]).unwrap();
        assert_eq!(d.periods, vec![0.010, 0.007, 0.008, 0.009]);
        assert!((d.alpha - 1207.0 / 1260.0).abs() < 1e-15);
        assert!((d.alpha * d.alpha - 0.917643).abs() < 1e-6);
    }

    #[test]
    fn event_touches_only_its_loop() {
        let mut fs = benchmark_scheduler(Mode::Exponential);
        fs.invoke(Trigger::Timer, &[Some(0.0); 4]).unwrap();
        assert!(fs.event_triggered(1, 1.0));
        assert!(!fs.event_triggered(1, 0.05));
        let before: Vec<_> = fs.loops().to_vec();
        let d = fs
            .invoke(Trigger::Event(1), &[None, Some(1.0), None, None])
            .unwrap();
        for i in [0, 2, 3] {
            assert_eq!(fs.loop_state(i), &before[i]);
        }
        assert_eq!(d.periods[1], 0.007);
        assert_eq!(fs.loop_state(1).e_at_last_fs, Some(1.0));
        assert!((fs.loop_state(1).ind - 0.7).abs() < 1e-15);
        let expected = 0.002 / 0.040 + 0.002 / 0.007 + 0.002 / 0.030 + 0.002 / 0.040;
        assert!((d.alpha - expected).abs() < 1e-15);
    }

    #[test]
    fn first_observation_seeds_ind() {
        let mut fs = benchmark_scheduler(Mode::Exponential);
        fs.invoke(
            Trigger::Timer,
            &[Some(0.5), Some(0.1), Some(0.0), Some(0.01)],
        )
        .unwrap();
        let inds: Vec<f64> = fs.loops().iter().map(|l| l.ind).collect();
        assert_eq!(inds, vec![0.5, 0.1, 0.0, 0.01]);
    }

    #[test]
    fn fixed_period_mode_keeps_period() {
        let mut fs = benchmark_scheduler(Mode::FixedPeriod);
        let d = fs.invoke(Trigger::Timer, &[Some(0.0); 4]).unwrap();
        assert_eq!(d.periods, vec![0.010, 0.007, 0.008, 0.009]);
        fs.override_period(1, 0.014);
        let d = fs
            .invoke(Trigger::Event(1), &[None, Some(0.0), None, None])
            .unwrap();
        assert_eq!(d.periods[1], 0.014);
    }

    #[test]
    fn inactive_loops_are_ignored() {
        let loops = BENCHMARK
            .iter()
            .map(|&(c, h0, hmax)| LoopPerfState::new(c, h0, hmax, 0.1))
            .collect();
        let mut fs = FeedbackScheduler::new(FsConfig::default(), loops).unwrap();
        fs.activate(0);
        fs.activate(1);
        let d = fs
            .invoke(Trigger::Timer, &[Some(1.0), Some(1.0), None, None])
            .unwrap();
        assert!((d.workload - (0.2 + 2.0 / 7.0)).abs() < 1e-15);
        assert!(!fs.event_triggered(2, 5.0));
    }

    #[test]
    fn missing_error_sample_is_an_error() {
        let mut fs = benchmark_scheduler(Mode::Exponential);
        assert!(fs
            .invoke(Trigger::Timer, &[Some(0.0), None, Some(0.0), Some(0.0)])
            .is_err());
    }

    #[test]
    fn config_validation_lists_every_problem() {
        let bad = FsConfig {
            t_fs: 0.0,
            lambda: 1.0,
            e_min: 0.3,
            e_max: 0.2,
            delta: 0.0,
            ..FsConfig::default()
        };
        assert_eq!(bad.problems().len(), 4);
        assert!(FsConfig::default().problems().is_empty());
    }

    #[test]
    fn beta_parsing() {
        assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
        assert_eq!("40".parse::<Beta>().unwrap(), Beta::Finite(40.0));
        assert!("-1".parse::<Beta>().is_err());
        assert!("abc".parse::<Beta>().is_err());
    }
}
