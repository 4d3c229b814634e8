//! Lock-step multi-worker search.
//!
//! `k` logical workers each own a full copy of the search state and their
//! own random stream. A coordinator drives them through barrier points; at
//! every barrier it picks a source worker and all other workers adopt the
//! source's state, so workers enter and leave every round identical.
//!
//! Three protocols are provided: [`ls_par_run`] (one probabilistic
//! local-search step per round, minimum-cost source), and [`alg1_run`] /
//! [`alg2_run`] (repeated trials until some worker finds a non-worsening
//! swap, with a gated uphill fallback and an alternating uphill bonus).
//!
//! Workers can run as a sequential simulation ([`Execution::Sequential`],
//! the reference) or on OS threads ([`Execution::Threads`]); both produce
//! identical results for the same seed.

mod coordinator;
mod script;
mod team;
mod trace;
mod worker;

use std::time::Duration;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

pub use coordinator::Engine;
pub use script::{select_source, RoundScript, SelectionScript, SyncDecision, TrialScript};
pub use trace::Recorder;

use crate::error::{BlmpError, Result};
use crate::placement::{Cost, Location, Placement};
use crate::probe::ProbeSet;

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "amount", rename_all = "kebab-case")]
pub enum RoundBudget {
    /// Wall-clock limit, checked once per round.
    WallClockSeconds(f64),
    /// Exact number of outer rounds; the reproducible mode.
    OuterRounds(u64),
}

impl RoundBudget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RoundBudget::WallClockSeconds(s) if !(s.is_finite() && s > 0.0) => Err(
                BlmpError::invalid(format!("time limit must be positive, got {s}")),
            ),
            RoundBudget::OuterRounds(0) => Err(BlmpError::invalid("round budget must be positive")),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RoundBudget::WallClockSeconds(_) => "seconds",
            RoundBudget::OuterRounds(_) => "rounds",
        }
    }

    pub fn amount(&self) -> f64 {
        match *self {
            RoundBudget::WallClockSeconds(s) => s,
            RoundBudget::OuterRounds(n) => n as f64,
        }
    }

    pub(crate) fn exhausted(&self, rounds_done: u64, elapsed: Duration) -> bool {
        match *self {
            RoundBudget::WallClockSeconds(s) => elapsed.as_secs_f64() > s,
            RoundBudget::OuterRounds(n) => rounds_done >= n,
        }
    }
}

/// Tuning knobs shared by the parallel searches. Defaults follow the
/// published experimental setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub workers: usize,
    pub budget: RoundBudget,
    /// Uphill acceptance probability (LS-Par only).
    pub pr: f64,
    pub max_trials1: u64,
    pub max_trials2: u64,
    /// Constant uphill gate (ALG2 only).
    pub max_cost: Cost,
    pub max_cost1: Cost,
    pub max_cost2: Cost,
    pub winlength1: u64,
    pub winlength2: u64,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            workers: 8,
            budget: RoundBudget::OuterRounds(100_000),
            pr: 0.001,
            max_trials1: 20,
            max_trials2: 40_000,
            max_cost: 160,
            max_cost1: 10,
            max_cost2: 10,
            winlength1: 1120,
            winlength2: 320,
            seed: 0,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if self.workers == 0 {
            return Err(BlmpError::invalid("worker count must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.pr) {
            return Err(BlmpError::invalid(format!(
                "pr must lie in [0, 1], got {}",
                self.pr
            )));
        }
        if self.max_trials1 == 0 || self.max_trials2 == 0 {
            return Err(BlmpError::invalid(
                "MaxTrials1 and MaxTrials2 must be positive",
            ));
        }
        if self.max_trials1 > self.max_trials2 {
            return Err(BlmpError::invalid(format!(
                "MaxTrials1 ({}) must not exceed MaxTrials2 ({})",
                self.max_trials1, self.max_trials2
            )));
        }
        if self.max_cost < 0 || self.max_cost1 < 0 || self.max_cost2 < 0 {
            return Err(BlmpError::invalid(
                "MaxCost, MaxCost1 and MaxCost2 must be non-negative",
            ));
        }
        if self.winlength1 == 0 || self.winlength2 == 0 {
            return Err(BlmpError::invalid(
                "winlength1 and winlength2 must be positive",
            ));
        }
        Ok(())
    }
}

/// Which uphill gate the trial protocol uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Gate `floor(8 * average) + myub`, with `average` the mean edge cost.
    Alg1,
    /// Gate `MaxCost + myub`.
    Alg2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Threads,
}

/// Which part of a trial a barrier closes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Non-worsening swaps (LS-Par: the whole step).
    Improve,
    /// Gated uphill swaps after `MaxTrials1` failed trials.
    Uphill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialEvent {
    pub round: u64,
    pub trial: u64,
    pub worker: usize,
    pub a: Location,
    pub b: Location,
    pub local_cost: Cost,
    pub new_local_cost: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncEvent {
    pub round: u64,
    pub trial: u64,
    pub phase: Phase,
    pub candidates: Vec<usize>,
    pub source: Option<usize>,
    /// Replicated cost after the barrier.
    pub cost: Cost,
    /// Best cost at the source before the barrier; used to audit the uphill bound.
    pub best_cost: Cost,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundEvent {
    pub round: u64,
    pub trials: u64,
    pub cost: Cost,
    pub best_cost: Cost,
    pub average: Option<Ratio<i64>>,
    pub sa: u64,
    pub myub: Cost,
    pub elapsed: Duration,
}

/// Hooks into a running search. All methods default to no-ops.
pub trait RunObserver {
    fn on_trial(&mut self, _event: &TrialEvent) {}
    fn on_sync(&mut self, _event: &SyncEvent) {}
    fn on_round(&mut self, _event: &RoundEvent) {}
}

impl RunObserver for () {}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub rounds: u64,
    /// Location pairs evaluated, summed over workers.
    pub trials: u64,
    /// Swaps adopted through the non-worsening branch.
    pub improving: u64,
    /// Swaps adopted through the uphill branch.
    pub uphill: u64,
    #[serde(with = "duration_ms")]
    pub elapsed: Duration,
}

mod duration_ms {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Placement,
    pub best_cost: Cost,
    pub final_cost: Cost,
    pub stats: RunStats,
}

pub fn ls_par_run(sp: &ProbeSet, params: &SearchParams) -> Result<RunOutcome> {
    Engine::new(sp, params.clone()).run_ls_par(&mut ())
}

pub fn alg1_run(
    sp: &ProbeSet,
    params: &SearchParams,
    script: Option<&SelectionScript>,
) -> Result<RunOutcome> {
    let mut engine = Engine::new(sp, params.clone());
    if let Some(s) = script {
        engine = engine.script(s.clone());
    }
    engine.run(Variant::Alg1, &mut ())
}

pub fn alg2_run(
    sp: &ProbeSet,
    params: &SearchParams,
    script: Option<&SelectionScript>,
) -> Result<RunOutcome> {
    let mut engine = Engine::new(sp, params.clone());
    if let Some(s) = script {
        engine = engine.script(s.clone());
    }
    engine.run(Variant::Alg2, &mut ())
}
