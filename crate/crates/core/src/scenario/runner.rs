//! Closed-loop co-simulation of plants, control tasks and the feedback scheduler.
//!
//! Time advances from event to event: job releases and completions, feedback
//! scheduler timer ticks, reference steps, loop activations and trace instants.
//! Between events the processor speed and every actuator value are constant,
//! so plants are integrated with RK4 under ZOH and energy is integrated exactly.
//!
//! At each instant events are handled in a fixed order: completions (actuate),
//! reference steps, activations, imposed period switches, the timer-triggered
//! scheduler, then releases. A release samples the plant, may fire an
//! event-triggered invocation, enqueues the job with the period then in force
//! and computes the control output that the job applies when it completes.

use std::collections::VecDeque;

use crate::controller::{sample_error, PidController};
use crate::error::{Error, Result};
use crate::kernel::{DeadlineMiss, ExecSegment, Kernel, ProcessorState, TIME_EPS};
use crate::metrics::{accumulate, accumulate_iae, total_cost, EnergyAccumulator, LoopCost};
use crate::plant::Plant;
use crate::scheduler::{FeedbackScheduler, FsDecision, LoopPerfState, Trigger};

use super::config::{ScenarioConfig, Scheme};
use super::trace::{LoopSample, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedUpdate {
    Timer,
    Event(usize),
    /// Loop activation or an imposed period switch.
    Reconfigure,
}

/// Speed assignment made at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FsLogEntry {
    pub t: f64,
    pub kind: SpeedUpdate,
    /// Speed chosen from the assigned periods.
    pub alpha: f64,
    pub workload: f64,
    pub periods: Vec<f64>,
    /// Reachable energy range for the loops active at `t`.
    pub energy_bounds: (f64, f64),
}

impl FsLogEntry {
    pub fn utilization(&self) -> f64 {
        self.workload / self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub scheme: Scheme,
    pub duration: f64,
    /// Time-average of `α²`.
    pub avg_energy: f64,
    pub j_sum: f64,
    pub per_loop_j: Vec<f64>,
    pub deadline_misses: usize,
    pub timer_invocations: usize,
    pub event_invocations: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub summary: Summary,
    pub fs_log: Vec<FsLogEntry>,
    pub misses: Vec<DeadlineMiss>,
    pub exec_log: Option<Vec<ExecSegment>>,
    /// `(t, E)` at every speed change, for exact energy audits.
    pub speed_changes: Vec<(f64, f64)>,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    Simulation::new(cfg)?.run()
}

struct LoopRuntime {
    plant: Plant,
    pid: PidController,
    r: f64,
    active: bool,
    cost: LoopCost,
    outputs: VecDeque<f64>,
    next_step: usize,
    next_period_change: usize,
}

pub struct Simulation<'a> {
    cfg: &'a ScenarioConfig,
    kernel: Kernel,
    fs: FeedbackScheduler,
    loops: Vec<LoopRuntime>,
    assigned_alpha: f64,
    energy: EnergyAccumulator,
    next_fs: u64,
    next_stride: u64,
    trace: Vec<TraceRecord>,
    fs_log: Vec<FsLogEntry>,
    speed_changes: Vec<(f64, f64)>,
    timer_invocations: usize,
    event_invocations: usize,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let fs_cfg = cfg.fs_config();
        let mut kernel = Kernel::new(ProcessorState::new(fs_cfg.alpha_min)?);
        let mut perf = Vec::with_capacity(cfg.loops.len());
        let mut loops = Vec::with_capacity(cfg.loops.len());
        for (i, l) in cfg.loops.iter().enumerate() {
            let id = kernel.add_task(l.h0, l.c_nom)?;
            debug_assert_eq!(id, i);
            perf.push(LoopPerfState::new(
                l.c_nom,
                l.h0,
                l.h_max,
                cfg.loop_delta(i),
            ));
            loops.push(LoopRuntime {
                plant: Plant::from_tf(&l.plant, cfg.plant_substep)?,
                pid: PidController::new(l.gains),
                r: 0.0,
                active: false,
                cost: LoopCost::default(),
                outputs: VecDeque::new(),
                next_step: 0,
                next_period_change: 0,
            });
        }
        Ok(Simulation {
            cfg,
            kernel,
            fs: FeedbackScheduler::new(fs_cfg, perf)?,
            loops,
            assigned_alpha: fs_cfg.alpha_min,
            energy: EnergyAccumulator::default(),
            next_fs: 0,
            next_stride: 0,
            trace: Vec::new(),
            fs_log: Vec::new(),
            speed_changes: Vec::new(),
            timer_invocations: 0,
            event_invocations: 0,
        })
    }

    /// Keeps every kernel execution segment in the output.
    pub fn with_kernel_audit(mut self) -> Self {
        self.kernel = self.kernel.with_audit();
        self
    }

    pub fn run(mut self) -> Result<RunOutput> {
        let end = self.cfg.duration;
        let mut now = 0.0;
        self.process_instant(now)?;
        while now < end - TIME_EPS {
            let next = self.next_instant(now).min(end);
            self.advance(now, next)?;
            now = next;
            self.process_instant(now)?;
        }
        Ok(self.finish())
    }

    fn fs_time(&self, k: u64) -> f64 {
        k as f64 * self.cfg.fs.t_fs
    }

    fn stride_time(&self, k: u64) -> f64 {
        k as f64 * self.cfg.trace_stride
    }

    fn next_instant(&self, now: f64) -> f64 {
        let after = |t: f64| t > now + TIME_EPS;
        let mut next = self.cfg.duration;
        let mut consider = |t: f64| {
            if after(t) && t < next {
                next = t;
            }
        };
        if let Some(e) = self.kernel.next_event(now) {
            consider(e.time);
        }
        consider(self.fs_time(self.next_fs));
        consider(self.stride_time(self.next_stride));
        for (l, rt) in self.cfg.loops.iter().zip(&self.loops) {
            if !rt.active {
                consider(l.activation);
            }
            if let Some(&(t, _)) = l.perturbations.steps().get(rt.next_step) {
                consider(t);
            }
            if let Some(&(t, _)) = l.period_changes.get(rt.next_period_change) {
                consider(t);
            }
        }
        next
    }

    fn advance(&mut self, now: f64, next: f64) -> Result<()> {
        let dt = next - now;
        for (i, rt) in self
            .loops
            .iter_mut()
            .enumerate()
            .filter(|(_, rt)| rt.active)
        {
            let r = rt.r;
            let cost = &mut rt.cost;
            let mut prev = (r - rt.plant.y()).abs();
            rt.plant
                .integrate_with(dt, |y, step| {
                    let e = (r - y).abs();
                    accumulate_iae(cost, prev, e, step);
                    prev = e;
                })
                .map_err(|e| match e {
                    Error::NonFinite { .. } => Error::NonFinite {
                        loop_index: i,
                        time: next,
                    },
                    other => other,
                })?;
        }
        accumulate(&mut self.energy, self.kernel.processor().alpha(), dt);
        let adv = self.kernel.advance(now, next)?;
        for c in adv.completions {
            let rt = &mut self.loops[c.task];
            let u = rt
                .outputs
                .pop_front()
                .expect("every job carries a control output");
            rt.plant.actuate(u);
        }
        Ok(())
    }

    fn process_instant(&mut self, now: f64) -> Result<()> {
        let due = |t: f64| t <= now + TIME_EPS;
        let mut reconfigured = false;
        let mut fs_fired = false;

        for (l, rt) in self.cfg.loops.iter().zip(self.loops.iter_mut()) {
            while let Some(&(t, r)) = l.perturbations.steps().get(rt.next_step) {
                if !due(t) {
                    break;
                }
                rt.r = r;
                rt.next_step += 1;
            }
        }

        for i in 0..self.loops.len() {
            let l = &self.cfg.loops[i];
            if !self.loops[i].active && due(l.activation) {
                let rt = &mut self.loops[i];
                rt.active = true;
                rt.plant.reset();
                rt.pid.reset();
                rt.outputs.clear();
                self.kernel.activate(i, now);
                self.fs.activate(i);
                reconfigured = true;
            }
            while let Some(&(t, h)) = l.period_changes.get(self.loops[i].next_period_change) {
                if !due(t) {
                    break;
                }
                self.fs.override_period(i, h);
                self.kernel.set_period(i, h)?;
                self.loops[i].next_period_change += 1;
                reconfigured = true;
            }
        }

        if due(self.fs_time(self.next_fs)) {
            while due(self.fs_time(self.next_fs)) {
                self.next_fs += 1;
            }
            let errors = self.abs_errors();
            let decision = self
                .fs
                .invoke(Trigger::Timer, &errors)
                .map_err(|e| at(e, now))?;
            self.apply(now, SpeedUpdate::Timer, decision)?;
            self.timer_invocations += 1;
            fs_fired = true;
        } else if reconfigured {
            let (alpha, workload) = self.fs.speed().map_err(|e| at(e, now))?;
            let decision = FsDecision {
                trigger: Trigger::Timer,
                periods: self.fs.loops().iter().map(|l| l.h_current).collect(),
                alpha,
                workload,
            };
            self.apply(now, SpeedUpdate::Reconfigure, decision)?;
        }

        for i in self.kernel.due_tasks(now) {
            let e = sample_error(self.loops[i].r, self.loops[i].plant.y());
            if self.fs.event_triggered(i, e.abs()) {
                let mut errors = vec![None; self.loops.len()];
                errors[i] = Some(e.abs());
                let decision = self
                    .fs
                    .invoke(Trigger::Event(i), &errors)
                    .map_err(|e| at(e, now))?;
                self.apply(now, SpeedUpdate::Event(i), decision)?;
                self.event_invocations += 1;
                fs_fired = true;
            }
            self.kernel.release(i, now);
            let h = self.kernel.task(i).current_interval();
            let u = self.loops[i].pid.step(e, h)?;
            self.loops[i].outputs.push_back(u);
        }

        // Jobs released under a shorter period keep their deadlines, so the
        // speed never drops below their combined density.
        let alpha = self.assigned_alpha.max(self.kernel.job_density()).min(1.0);
        if alpha != self.kernel.processor().alpha() || self.speed_changes.is_empty() {
            self.kernel.set_alpha(alpha)?;
            self.speed_changes.push((now, alpha * alpha));
        }

        let stride_due = due(self.stride_time(self.next_stride));
        while due(self.stride_time(self.next_stride)) {
            self.next_stride += 1;
        }
        if stride_due || fs_fired {
            self.record(now);
        }
        Ok(())
    }

    fn abs_errors(&self) -> Vec<Option<f64>> {
        self.loops
            .iter()
            .map(|rt| rt.active.then(|| sample_error(rt.r, rt.plant.y()).abs()))
            .collect()
    }

    fn apply(&mut self, now: f64, kind: SpeedUpdate, decision: FsDecision) -> Result<()> {
        for (i, &h) in decision.periods.iter().enumerate() {
            if h != self.kernel.task(i).spec.period {
                self.kernel.set_period(i, h)?;
            }
        }
        self.assigned_alpha = match self.cfg.fixed_speed {
            Some(a) => a,
            None => decision.alpha,
        };
        let active: Vec<(f64, f64, f64)> = self
            .fs
            .loops()
            .iter()
            .filter(|l| l.active)
            .map(|l| (l.c_nom, l.h0, l.h_max))
            .collect();
        let floor = self.cfg.fs.alpha_min;
        let low: f64 = active.iter().map(|(c, _, h)| c / h).sum();
        let high: f64 = active.iter().map(|(c, h, _)| c / h).sum();
        self.fs_log.push(FsLogEntry {
            t: now,
            kind,
            alpha: self.assigned_alpha,
            workload: decision.workload,
            periods: decision.periods,
            energy_bounds: (low.max(floor).powi(2), high.max(floor).powi(2)),
        });
        Ok(())
    }

    fn record(&mut self, now: f64) {
        let alpha = self.kernel.processor().alpha();
        let loops = self
            .loops
            .iter()
            .zip(self.fs.loops())
            .map(|(rt, perf)| {
                let y = rt.plant.y();
                LoopSample {
                    h: perf.h_current,
                    y,
                    r: rt.r,
                    e: sample_error(rt.r, y),
                    ind: perf.ind,
                }
            })
            .collect();
        let costs: Vec<f64> = self.loops.iter().map(|rt| rt.cost.iae).collect();
        self.trace.push(TraceRecord {
            t: now,
            loops,
            alpha,
            energy: alpha * alpha,
            j_sum: costs.iter().sum(),
            costs,
            misses: self.kernel.misses().len(),
        });
    }

    fn finish(self) -> RunOutput {
        let costs: Vec<LoopCost> = self.loops.iter().map(|rt| rt.cost).collect();
        let summary = Summary {
            name: self.cfg.name.clone(),
            scheme: self.cfg.scheme,
            duration: self.cfg.duration,
            avg_energy: self.energy.average(),
            j_sum: total_cost(&costs),
            per_loop_j: costs.iter().map(|c| c.iae).collect(),
            deadline_misses: self.kernel.misses().len(),
            timer_invocations: self.timer_invocations,
            event_invocations: self.event_invocations,
        };
        RunOutput {
            trace: self.trace,
            summary,
            fs_log: self.fs_log,
            misses: self.kernel.misses().to_vec(),
            exec_log: self.kernel.audit_log().map(<[_]>::to_vec),
            speed_changes: self.speed_changes,
        }
    }
}

fn at(e: Error, now: f64) -> Error {
    match e {
        Error::Infeasible { workload, .. } => Error::Infeasible {
            workload,
            time: now,
        },
        other => other,
    }
}
