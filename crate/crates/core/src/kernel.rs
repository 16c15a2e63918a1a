//! Event-driven preemptive EDF kernel for periodic tasks on one speed-scalable
//! processor.
//!
//! Speed is piecewise constant between calls to [`Kernel::advance`], so job
//! completion instants are computed in closed form: a job with remaining
//! nominal work `w` running at normalized speed `α` finishes after `w / α`
//! seconds of wall time.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Two instants closer than this are treated as the same instant.
pub const TIME_EPS: f64 = 1e-12;

/// Completions later than the absolute deadline by more than this count as misses.
/// Work left over from rounding that would otherwise end a job just past a release.
const RESIDUE: f64 = 1e-13;

pub const MISS_TOLERANCE: f64 = 1e-9;

pub type TaskId = usize;

/// Timing attributes of a periodic control task. The period doubles as the
/// relative deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    pub id: TaskId,
    pub period: f64,
    /// Execution time at full speed.
    pub c_nom: f64,
}

impl TaskSpec {
    pub fn new(id: TaskId, period: f64, c_nom: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(period > 0.0 && period.is_finite()) {
            problems.push(format!("task {id}: period must be positive, got {period}"));
        }
        if !(c_nom > 0.0 && c_nom.is_finite()) {
            problems.push(format!("task {id}: c_nom must be positive, got {c_nom}"));
        }
        if c_nom > period {
            problems.push(format!("task {id}: c_nom {c_nom} exceeds period {period}"));
        }
        if problems.is_empty() {
            Ok(TaskSpec { id, period, c_nom })
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub release: f64,
    pub abs_deadline: f64,
    /// Seconds of full-speed execution still owed.
    pub remaining_nominal_work: f64,
}

#[derive(Debug, Clone)]
pub struct TaskState {
    pub spec: TaskSpec,
    pending_jobs: VecDeque<Job>,
    pub next_release: f64,
    active: bool,
    /// Period the most recent job was released with; zero before the first release.
    interval: f64,
}

impl TaskState {
    pub fn new(spec: TaskSpec) -> Self {
        TaskState {
            spec,
            pending_jobs: VecDeque::new(),
            next_release: f64::INFINITY,
            active: false,
            interval: 0.0,
        }
    }

    pub fn pending_jobs(&self) -> impl Iterator<Item = &Job> {
        self.pending_jobs.iter()
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Period of the job interval currently in progress.
    pub fn current_interval(&self) -> f64 {
        self.interval
    }

    fn head(&self) -> Option<&Job> {
        self.pending_jobs.front()
    }
}

/// Normalized processor speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessorState {
    alpha: f64,
    alpha_min: f64,
}

impl ProcessorState {
    pub fn new(alpha_min: f64) -> Result<Self> {
        if !(alpha_min > 0.0 && alpha_min <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha_min must lie in (0, 1], got {alpha_min}"
            )));
        }
        Ok(ProcessorState {
            alpha: 1.0,
            alpha_min,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha_min(&self) -> f64 {
        self.alpha_min
    }

    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        if !(alpha >= self.alpha_min && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "speed {alpha} outside [{}, 1]",
                self.alpha_min
            )));
        }
        self.alpha = alpha;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    JobCompletion(TaskId),
    JobRelease(TaskId),
    FsTimer,
    SimulationEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvent {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub task: TaskId,
    pub time: f64,
    pub release: f64,
    pub abs_deadline: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadlineMiss {
    pub task: TaskId,
    pub abs_deadline: f64,
    pub completion: f64,
}

/// One stretch of uninterrupted execution, kept only when auditing is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecSegment {
    pub start: f64,
    pub end: f64,
    pub task: TaskId,
    pub abs_deadline: f64,
    /// Smallest absolute deadline among all pending jobs when the segment began.
    pub min_pending_deadline: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advance {
    pub elapsed: f64,
    pub completions: Vec<Completion>,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    tasks: Vec<TaskState>,
    processor: ProcessorState,
    misses: Vec<DeadlineMiss>,
    busy_time: f64,
    retired_work: f64,
    audit: Option<Vec<ExecSegment>>,
}

impl Kernel {
    pub fn new(processor: ProcessorState) -> Self {
        Kernel {
            tasks: Vec::new(),
            processor,
            misses: Vec::new(),
            busy_time: 0.0,
            retired_work: 0.0,
            audit: None,
        }
    }

    /// Records every execution segment for later inspection.
    pub fn with_audit(mut self) -> Self {
        self.audit = Some(Vec::new());
        self
    }

    /// Adds an inactive task and returns its id.
    pub fn add_task(&mut self, period: f64, c_nom: f64) -> Result<TaskId> {
        let id = self.tasks.len();
        let spec = TaskSpec::new(id, period, c_nom)?;
        self.tasks.push(TaskState::new(spec));
        Ok(id)
    }

    /// Starts releasing jobs of `task`, the first at `at`.
    pub fn activate(&mut self, task: TaskId, at: f64) {
        let state = &mut self.tasks[task];
        state.active = true;
        state.next_release = at;
    }

    /// Requests a new period. The job in progress keeps its deadline; the
    /// change shows up at the task's next release.
    pub fn set_period(&mut self, task: TaskId, period: f64) -> Result<()> {
        let state = &mut self.tasks[task];
        state.spec = TaskSpec::new(task, period, state.spec.c_nom)?;
        Ok(())
    }

    pub fn tasks(&self) -> &[TaskState] {
        &self.tasks
    }

    pub fn task(&self, task: TaskId) -> &TaskState {
        &self.tasks[task]
    }

    pub fn processor(&self) -> &ProcessorState {
        &self.processor
    }

    pub fn set_alpha(&mut self, alpha: f64) -> Result<()> {
        self.processor.set_alpha(alpha)
    }

    pub fn misses(&self) -> &[DeadlineMiss] {
        &self.misses
    }

    pub fn busy_time(&self) -> f64 {
        self.busy_time
    }

    pub fn retired_work(&self) -> f64 {
        self.retired_work
    }

    pub fn audit_log(&self) -> Option<&[ExecSegment]> {
        self.audit.as_deref()
    }

    pub fn has_pending_work(&self) -> bool {
        self.tasks.iter().any(|t| !t.pending_jobs.is_empty())
    }

    /// Sum of `c_nom / interval` over active tasks, where `interval` is the
    /// period of each task's job in progress. Keeping the speed at or above
    /// this value guarantees EDF meets every deadline.
    pub fn job_density(&self) -> f64 {
        self.tasks
            .iter()
            .filter(|t| t.active && t.interval > 0.0)
            .map(|t| t.spec.c_nom / t.interval)
            .sum()
    }

    /// Earliest pending release strictly after `now`.
    pub fn next_release_after(&self, now: f64) -> Option<f64> {
        self.tasks
            .iter()
            .filter(|t| t.active && t.next_release > now + TIME_EPS)
            .map(|t| t.next_release)
            .min_by(f64::total_cmp)
    }

    /// Tasks whose next release is due at `now`.
    pub fn due_tasks(&self, now: f64) -> Vec<TaskId> {
        self.tasks
            .iter()
            .filter(|t| t.active && t.next_release <= now + TIME_EPS)
            .map(|t| t.spec.id)
            .collect()
    }

    /// Enqueues one job of `task` released at `now` with the task's current period.
    pub fn release(&mut self, task: TaskId, now: f64) -> Job {
        let state = &mut self.tasks[task];
        debug_assert!(state.active, "releasing inactive task {task}");
        let h = state.spec.period;
        let job = Job {
            release: now,
            abs_deadline: now + h,
            remaining_nominal_work: state.spec.c_nom,
        };
        state.pending_jobs.push_back(job);
        state.next_release = now + h;
        state.interval = h;
        job
    }

    /// Releases every due task at `now`.
    pub fn release_jobs(&mut self, now: f64) -> Vec<Job> {
        self.due_tasks(now)
            .into_iter()
            .map(|id| self.release(id, now))
            .collect()
    }

    /// The task EDF would run now: earliest absolute deadline, ties to lower id.
    pub fn edf_pick(&self) -> Option<TaskId> {
        self.tasks
            .iter()
            .filter_map(|t| t.head().map(|j| (j.abs_deadline, t.spec.id)))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }

    /// Completion instant of the job that runs at `now`, assuming no preemption.
    pub fn next_completion(&self, now: f64) -> Option<KernelEvent> {
        self.edf_pick().map(|id| {
            let job = self.tasks[id].head().expect("picked task has a job");
            KernelEvent {
                time: now + job.remaining_nominal_work / self.processor.alpha,
                kind: EventKind::JobCompletion(id),
            }
        })
    }

    /// Next release or completion after `now`, whichever is first.
    pub fn next_event(&self, now: f64) -> Option<KernelEvent> {
        let release = self
            .tasks
            .iter()
            .filter(|t| t.active && t.next_release > now + TIME_EPS)
            .map(|t| KernelEvent {
                time: t.next_release,
                kind: EventKind::JobRelease(t.spec.id),
            })
            .min_by(|a, b| a.time.total_cmp(&b.time));
        match (self.next_completion(now), release) {
            (Some(c), Some(r)) => Some(if c.time <= r.time { c } else { r }),
            (c, r) => c.or(r),
        }
    }

    /// Runs the EDF schedule from `now` up to the first of `horizon` and the
    /// next job release. Due releases must have been issued before calling.
    pub fn advance(&mut self, now: f64, horizon: f64) -> Result<Advance> {
        if !(horizon > now) {
            return Err(Error::InvalidArgument(format!(
                "advance horizon {horizon} not after now {now}"
            )));
        }
        debug_assert!(
            self.due_tasks(now).is_empty(),
            "advance called with unreleased jobs at {now}"
        );
        let limit = self
            .next_release_after(now)
            .map_or(horizon, |r| r.min(horizon));
        let alpha = self.processor.alpha;
        let mut t = now;
        let mut completions = Vec::new();

        while t < limit {
            let Some(id) = self.edf_pick() else {
                break;
            };
            let min_pending_deadline = self.tasks[id].head().unwrap().abs_deadline;
            let job = self.tasks[id].pending_jobs.front_mut().unwrap();
            let mut finish = t + job.remaining_nominal_work / alpha;
            if finish > limit && finish - limit < RESIDUE {
                finish = limit;
            }
            let end = finish.min(limit);
            if let Some(log) = self.audit.as_mut() {
                log.push(ExecSegment {
                    start: t,
                    end,
                    task: id,
                    abs_deadline: job.abs_deadline,
                    min_pending_deadline,
                    alpha,
                });
            }
            self.busy_time += end - t;
            if finish <= limit {
                self.retired_work += job.remaining_nominal_work;
                let done = self.tasks[id].pending_jobs.pop_front().unwrap();
                if finish > done.abs_deadline + MISS_TOLERANCE {
                    log::warn!(
                        "task {id} missed deadline {} (completed {finish})",
                        done.abs_deadline
                    );
                    self.misses.push(DeadlineMiss {
                        task: id,
                        abs_deadline: done.abs_deadline,
                        completion: finish,
                    });
                }
                completions.push(Completion {
                    task: id,
                    time: finish,
                    release: done.release,
                    abs_deadline: done.abs_deadline,
                });
                t = finish;
            } else {
                let work = alpha * (limit - t);
                job.remaining_nominal_work -= work;
                self.retired_work += work;
                t = limit;
            }
        }

        Ok(Advance {
            elapsed: limit - now,
            completions,
        })
    }
}

/// Total workload `Σ c_nom / h`.
pub fn workload(tasks: &[TaskSpec]) -> f64 {
    tasks.iter().map(|t| t.c_nom / t.period).sum()
}

/// EDF schedulability at normalized speed `alpha`: `Σ c_nom / h ≤ α`.
pub fn check_schedulability(tasks: &[TaskSpec], alpha: f64) -> Result<bool> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "speed must be positive, got {alpha}"
        )));
    }
    Ok(workload(tasks) <= alpha + TIME_EPS)
}

/// Wall-clock execution time of `c_nom` seconds of full-speed work at speed `alpha`.
pub fn scaled_execution_time(c_nom: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "speed must be positive, got {alpha}"
        )));
    }
    Ok(c_nom / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: TaskId, c_nom: f64, h: f64) -> TaskSpec {
        TaskSpec::new(id, h, c_nom).unwrap()
    }

    fn benchmark_tasks(ms: &[f64]) -> Vec<TaskSpec> {
        ms.iter()
            .enumerate()
            .map(|(i, h)| spec(i, 0.002, h / 1000.0))
            .collect()
    }

    /// Fixed-step EDF on integer tick counts; returns the number of jobs that
    /// finished more than one tick late.
    fn brute_force_edf(tasks: &[(u64, u64)], alpha: f64, dt: f64, ticks: u64) -> usize {
        // (deadline tick, task, remaining work)
        let mut jobs: Vec<(u64, usize, f64)> = Vec::new();
        let mut misses = 0;
        for k in 0..ticks {
            for (i, &(c_ticks, h_ticks)) in tasks.iter().enumerate() {
                if k % h_ticks == 0 {
                    jobs.push((k + h_ticks, i, c_ticks as f64 * dt));
                }
            }
            jobs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut budget = alpha * dt;
            while budget > 1e-15 {
                let Some(job) = jobs.first_mut() else { break };
                let used = budget.min(job.2);
                job.2 -= used;
                budget -= used;
                if job.2 <= 1e-15 {
                    let done = jobs.remove(0);
                    if k + 1 > done.0 + 1 {
                        misses += 1;
                    }
                }
            }
            misses += jobs.iter().filter(|j| k + 1 > j.0 + 1).count();
            jobs.retain(|j| k <= j.0);
        }
        misses
    }

    fn kernel_with(tasks: &[(f64, f64)], alpha: f64) -> Kernel {
        let mut proc = ProcessorState::new(0.01).unwrap();
        proc.set_alpha(alpha).unwrap();
        let mut k = Kernel::new(proc).with_audit();
        for &(c, h) in tasks {
            let id = k.add_task(h, c).unwrap();
            k.activate(id, 0.0);
        }
        k
    }

    fn run(k: &mut Kernel, end: f64) {
        let mut now = 0.0;
        k.release_jobs(now);
        while now < end - TIME_EPS {
            let next = k.next_event(now).map_or(end, |e| e.time.min(end));
            k.advance(now, next).unwrap();
            now = next;
            k.release_jobs(now);
        }
    }

    #[test]
    fn schedulability_examples() {
        let two = [spec(0, 4.0, 10.0), spec(1, 5.0, 10.0)];
        assert!(check_schedulability(&two, 0.9).unwrap());
        assert!(check_schedulability(&[spec(0, 1.0, 1.0)], 1.0).unwrap());
        let t1 = benchmark_tasks(&[10.0, 7.0, 8.0, 9.0]);
        // 2/10 + 2/7 + 2/8 + 2/9 = 1207/1260
        assert!((workload(&t1) - 1207.0 / 1260.0).abs() < 1e-15);
        assert!(!check_schedulability(&t1, 0.95).unwrap());
        assert!(check_schedulability(&t1, 0.0).is_err());
        assert!(check_schedulability(&t1, -1.0).is_err());
    }

    #[test]
    fn workload_examples() {
        assert!((workload(&[spec(0, 4.0, 10.0), spec(1, 5.0, 10.0)]) - 0.9).abs() < 1e-15);
        let w = workload(&[spec(0, 4.0, 20.0), spec(1, 5.0, 30.0)]);
        assert!((w - 11.0 / 30.0).abs() < 1e-15);
        assert_eq!(workload(&[]), 0.0);
    }

    #[test]
    fn scaled_execution_time_examples() {
        assert_eq!(scaled_execution_time(0.002, 1.0).unwrap(), 0.002);
        assert_eq!(scaled_execution_time(0.002, 0.5).unwrap(), 0.004);
        let c = scaled_execution_time(0.002, 0.233333).unwrap();
        assert!((c - 0.008_571_440_816_344_023).abs() < 1e-15);
        assert!(scaled_execution_time(0.002, 0.0).is_err());
    }

    #[test]
    fn task_spec_invariants() {
        assert!(TaskSpec::new(0, 0.0, 0.001).is_err());
        assert!(TaskSpec::new(0, 0.01, 0.0).is_err());
        assert!(TaskSpec::new(0, 0.01, 0.02).is_err());
        match TaskSpec::new(0, -1.0, -1.0) {
            Err(Error::InvalidConfig(p)) => assert_eq!(p.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hyperperiod_two_tasks_no_misses() {
        // Oracle: fixed-step EDF at 1e-4 s over [0, 6].
        let oracle = brute_force_edf(&[(10_000, 20_000), (10_000, 30_000)], 1.0, 1e-4, 60_000);
        assert_eq!(oracle, 0);
        let mut k = kernel_with(&[(1.0, 2.0), (1.0, 3.0)], 1.0);
        run(&mut k, 6.0);
        assert!(k.misses().is_empty());
        assert!((k.busy_time() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn uncontended_completion_time() {
        let mut k = kernel_with(&[(2.0, 10.0)], 0.5);
        k.release_jobs(0.0);
        let adv = k.advance(0.0, 10.0).unwrap();
        assert_eq!(adv.completions.len(), 1);
        assert_eq!(adv.completions[0].time, 4.0);
    }

    #[test]
    fn table_one_at_full_utilization() {
        let t1 = benchmark_tasks(&[10.0, 7.0, 8.0, 9.0]);
        let omega = workload(&t1);
        let oracle = brute_force_edf(
            &[(20, 100), (20, 70), (20, 80), (20, 90)],
            omega,
            1e-4,
            10_000,
        );
        assert_eq!(oracle, 0);

        let pairs: Vec<_> = t1.iter().map(|t| (t.c_nom, t.period)).collect();
        let mut k = kernel_with(&pairs, omega);
        run(&mut k, 1.0);
        assert!(k.misses().is_empty());
        // Never idle with work pending: at U = 1 the processor is busy throughout.
        let log = k.audit_log().unwrap();
        let mut cursor = 0.0;
        for seg in log {
            assert!(
                (seg.start - cursor).abs() < 1e-9,
                "idle gap before {}",
                seg.start
            );
            cursor = seg.end;
        }
        assert!((k.busy_time() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn release_sequence_and_period_change() {
        let mut k = kernel_with(&[(0.001, 0.010)], 1.0);
        let mut releases = vec![];
        for now in [0.0, 0.010, 0.020] {
            let jobs = k.release_jobs(now);
            releases.extend(jobs.iter().map(|j| j.release));
            k.advance(now, now + 0.010).unwrap();
        }
        assert_eq!(releases, vec![0.0, 0.010, 0.020]);

        // Change requested at 0.015 shows up at the 0.020 release.
        let mut k = kernel_with(&[(0.001, 0.010)], 1.0);
        let mut releases = vec![];
        let mut now = 0.0;
        while now < 0.1 {
            releases.extend(k.release_jobs(now).iter().map(|j| j.release));
            let mut next = k.next_event(now).unwrap().time;
            if now < 0.015 && next > 0.015 {
                next = 0.015;
            }
            k.advance(now, next).unwrap();
            now = next;
            if now == 0.015 {
                k.set_period(0, 0.040).unwrap();
                assert_eq!(k.task(0).next_release, 0.020);
            }
        }
        assert_eq!(releases[1..4], [0.010, 0.020, 0.060]);
        assert_eq!(k.task(0).current_interval(), 0.040);
    }

    #[test]
    fn tie_broken_by_lower_id() {
        let mut k = kernel_with(&[(0.001, 0.010), (0.001, 0.010)], 1.0);
        let jobs = k.release_jobs(0.0);
        assert_eq!(jobs.len(), 2);
        assert_eq!(k.edf_pick(), Some(0));
        let adv = k.advance(0.0, 0.005).unwrap();
        let order: Vec<_> = adv.completions.iter().map(|c| c.task).collect();
        assert_eq!(order, vec![0, 1]);
    }

    #[test]
    fn edf_audit_and_work_conservation() {
        let mut k = kernel_with(&[(0.002, 0.007), (0.003, 0.011), (0.001, 0.005)], 0.9);
        run(&mut k, 0.5);
        let log = k.audit_log().unwrap();
        for seg in log {
            assert!(seg.abs_deadline <= seg.min_pending_deadline);
        }
        let busy: f64 = log.iter().map(|s| s.end - s.start).sum();
        assert!((k.retired_work() - 0.9 * busy).abs() < 1e-12);
    }

    #[test]
    fn overload_records_miss_without_aborting() {
        let mut k = kernel_with(&[(0.008, 0.010), (0.008, 0.010)], 1.0);
        run(&mut k, 0.05);
        assert!(!k.misses().is_empty());
    }

    #[test]
    fn processor_speed_bounds() {
        assert!(ProcessorState::new(0.0).is_err());
        let mut p = ProcessorState::new(0.2).unwrap();
        assert!(p.set_alpha(0.1).is_err());
        assert!(p.set_alpha(1.1).is_err());
        p.set_alpha(0.5).unwrap();
        assert_eq!(p.alpha(), 0.5);
    }
}
