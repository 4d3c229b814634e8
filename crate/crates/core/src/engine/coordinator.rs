use std::time::Instant;

use super::script::{PairSource, SelectionScript, SourceSelector};
use super::team::{SequentialTeam, Team, ThreadTeam};
use super::worker::{
    cell_location, Adoption, Command, LsAdoption, LsReport, Reply, RoundSummary, TrialReport,
    Worker, WorkerSnapshot,
};
use super::{
    Execution, Phase, RoundEvent, RunObserver, RunOutcome, RunStats, SearchParams, SyncEvent,
    TrialEvent, Variant,
};
use crate::error::{BlmpError, Result};
use crate::placement::{random_placement, total_cost, Cost, Placement};
use crate::probe::ProbeSet;
use crate::rng::{stream, COORDINATOR_STREAM};

/// Configures and runs one lock-step search.
///
/// ```
/// use blmp::engine::{Engine, RoundBudget, SearchParams, Variant};
/// use blmp::oracle::generate_probeset;
///
/// let sp = generate_probeset(4, 10, 1).unwrap();
/// let params = SearchParams {
///     workers: 3,
///     budget: RoundBudget::OuterRounds(200),
///     max_cost: 30,
///     ..SearchParams::default()
/// };
/// let out = Engine::new(&sp, params).verify(true).run(Variant::Alg2, &mut ()).unwrap();
/// assert_eq!(out.best_cost, blmp::total_cost(&sp, &out.best));
/// ```
pub struct Engine<'a> {
    sp: &'a ProbeSet,
    params: SearchParams,
    execution: Execution,
    initial: Option<Placement>,
    script: Option<SelectionScript>,
    verify: bool,
    round_cap: Option<u64>,
}

impl<'a> Engine<'a> {
    pub fn new(sp: &'a ProbeSet, params: SearchParams) -> Self {
        Engine {
            sp,
            params,
            execution: Execution::Sequential,
            initial: None,
            script: None,
            verify: false,
            round_cap: None,
        }
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// Starts from `placement` instead of a random placement drawn by worker 1.
    pub fn initial_placement(mut self, placement: Placement) -> Self {
        self.initial = Some(placement);
        self
    }

    /// Replays scripted choices instead of drawing them (ALG1/ALG2 only).
    pub fn script(mut self, script: SelectionScript) -> Self {
        self.script = Some(script);
        self
    }

    /// Audits replication and cost bookkeeping at every barrier; violations
    /// abort the run with [`BlmpError::Invariant`].
    pub fn verify(mut self, on: bool) -> Self {
        self.verify = on;
        self
    }

    /// Also stops after `rounds` outer rounds, whichever of this and the
    /// budget comes first.
    pub fn round_cap(mut self, rounds: u64) -> Self {
        self.round_cap = Some(rounds);
        self
    }

    pub fn run(&self, variant: Variant, observer: &mut dyn RunObserver) -> Result<RunOutcome> {
        self.launch(Some(variant), observer)
    }

    pub fn run_ls_par(&self, observer: &mut dyn RunObserver) -> Result<RunOutcome> {
        if self.script.is_some() {
            return Err(BlmpError::invalid("LS-Par runs cannot be scripted"));
        }
        self.launch(None, observer)
    }

    fn launch(
        &self,
        variant: Option<Variant>,
        observer: &mut dyn RunObserver,
    ) -> Result<RunOutcome> {
        self.params.validate()?;
        let sp = self.sp;
        let dim = sp.dim();
        let params = &self.params;
        let k = params.workers;

        let mut initial = self.initial.clone();
        if let Some(script) = &self.script {
            if script.workers != k {
                return Err(BlmpError::invalid(format!(
                    "script is for {} workers, run has {k}",
                    script.workers
                )));
            }
            script.validate(dim)?;
            if initial.is_none() {
                initial = script.initial_placement(dim)?;
            }
        }
        if let Some(p) = &initial {
            p.check_matches(sp)?;
        }

        // Worker 1 draws the random start from its own stream and keeps
        // using that stream afterwards.
        let mut first_stream = stream(params.seed, 1);
        let initial = match initial {
            Some(p) => p,
            None => random_placement(sp, &mut first_stream),
        };
        let mut first_stream = Some(first_stream);
        let picks: Vec<PairSource> = (1..=k)
            .map(|id| match &self.script {
                Some(script) => PairSource::scripted(script, id),
                None if id == 1 => PairSource::Random(first_stream.take().expect("taken once")),
                None => PairSource::Random(stream(params.seed, id as u64)),
            })
            .collect();
        let cost = total_cost(sp, &initial);

        if sp.len() < 2 {
            return Ok(RunOutcome {
                best: initial,
                best_cost: cost,
                final_cost: cost,
                stats: RunStats::default(),
            });
        }

        // ALG2 shares worker state layout with ALG1; LS-Par ignores the variant.
        let worker_variant = variant.unwrap_or(Variant::Alg2);
        let workers: Vec<Worker<'_>> = picks
            .into_iter()
            .enumerate()
            .map(|(i, p)| Worker::new(i + 1, sp, params, worker_variant, p, initial.clone(), cost))
            .collect();
        let selector = match &self.script {
            Some(script) => SourceSelector::scripted(script),
            None => SourceSelector::Random(stream(params.seed, COORDINATOR_STREAM)),
        };
        let mut coord = Coordinator {
            sp,
            params,
            selector,
            observer,
            verify: self.verify,
            round_cap: self.round_cap.unwrap_or(u64::MAX),
            replies: Vec::with_capacity(k),
            stats: RunStats::default(),
            start: Instant::now(),
            cost,
        };

        match self.execution {
            Execution::Sequential => {
                let mut team = SequentialTeam::new(workers);
                coord.drive(&mut team, variant)
            }
            Execution::Threads => std::thread::scope(|scope| {
                let mut team = ThreadTeam::spawn(scope, workers);
                let result = coord.drive(&mut team, variant);
                team.shutdown();
                result
            }),
        }
    }
}

struct Coordinator<'r, 'o> {
    sp: &'r ProbeSet,
    params: &'r SearchParams,
    selector: SourceSelector,
    observer: &'o mut dyn RunObserver,
    verify: bool,
    round_cap: u64,
    replies: Vec<Reply>,
    stats: RunStats,
    start: Instant,
    cost: Cost,
}

impl Coordinator<'_, '_> {
    fn drive<T: Team>(&mut self, team: &mut T, variant: Option<Variant>) -> Result<RunOutcome> {
        let mut round = 0;
        while round < self.round_cap && !self.params.budget.exhausted(round, self.start.elapsed()) {
            round += 1;
            match variant {
                Some(_) => self.alg_round(team, round)?,
                None => self.ls_par_round(team, round)?,
            }
        }
        self.stats.rounds = round;
        self.stats.elapsed = self.start.elapsed();

        self.call(team, &Command::TakeBest)?;
        let (best, best_cost) = match self.replies.swap_remove(0) {
            Reply::Best(p, c) => (p, c),
            other => unreachable!("unexpected reply {other:?}"),
        };
        if self.verify && total_cost(self.sp, &best) != best_cost {
            return Err(BlmpError::Invariant(format!(
                "returned bestCOST {best_cost} differs from recomputed {}",
                total_cost(self.sp, &best)
            )));
        }
        Ok(RunOutcome {
            best,
            best_cost,
            final_cost: self.cost,
            stats: std::mem::take(&mut self.stats),
        })
    }

    fn call<T: Team>(&mut self, team: &mut T, cmd: &Command) -> Result<()> {
        team.broadcast(cmd, &mut self.replies);
        if let Some(i) = self
            .replies
            .iter()
            .position(|r| matches!(r, Reply::Failed(_)))
        {
            if let Reply::Failed(e) = self.replies.swap_remove(i) {
                return Err(e);
            }
        }
        Ok(())
    }

    fn trial_reports(&self) -> Vec<TrialReport> {
        self.replies
            .iter()
            .map(|r| match r {
                Reply::Trial(t) => *t,
                other => unreachable!("unexpected reply {other:?}"),
            })
            .collect()
    }

    fn emit_trial(&mut self, round: u64, trial: u64, t: &TrialReport) {
        let dim = self.sp.dim();
        self.observer.on_trial(&TrialEvent {
            round,
            trial,
            worker: t.worker,
            a: cell_location(dim, t.a),
            b: cell_location(dim, t.b),
            local_cost: t.local,
            new_local_cost: t.fresh,
        });
    }

    /// One outer round of ALG1/ALG2.
    fn alg_round<T: Team>(&mut self, team: &mut T, round: u64) -> Result<()> {
        let k = self.params.workers as u64;
        self.selector.begin_round(round);
        self.call(team, &Command::BeginRound { round })?;

        let mut trial = 0;
        loop {
            trial += 1;
            self.call(team, &Command::Trial { trial })?;
            self.stats.trials += k;
            let reports = self.trial_reports();
            for t in &reports {
                self.emit_trial(round, trial, t);
            }
            if self.barrier(team, round, trial, Phase::Improve, &reports)? {
                self.stats.improving += 1;
                break;
            }

            if trial >= self.params.max_trials1 {
                self.call(team, &Command::Uphill)?;
                let reports = self.trial_reports();
                if self.barrier(team, round, trial, Phase::Uphill, &reports)? {
                    self.stats.uphill += 1;
                    break;
                }
            }
            if trial >= self.params.max_trials2 {
                break;
            }
        }
        self.selector.end_round(round)?;

        self.call(team, &Command::EndRound)?;
        let summary = match &self.replies[0] {
            Reply::Round(s) => s.clone(),
            other => unreachable!("unexpected reply {other:?}"),
        };
        if self.verify {
            self.audit_round(&summary)?;
            self.audit_replicas(team, round, trial)?;
        }
        self.observer.on_round(&RoundEvent {
            round,
            trials: trial,
            cost: summary.cost,
            best_cost: summary.best_cost,
            average: summary.average,
            sa: summary.sa,
            myub: summary.myub,
            elapsed: self.start.elapsed(),
        });
        Ok(())
    }

    /// Selects a source among accepting workers and replicates it.
    /// Returns whether a swap was adopted.
    fn barrier<T: Team>(
        &mut self,
        team: &mut T,
        round: u64,
        trial: u64,
        phase: Phase,
        reports: &[TrialReport],
    ) -> Result<bool> {
        let candidates: Vec<usize> = reports
            .iter()
            .filter(|t| t.accepted)
            .map(|t| t.worker)
            .collect();
        let decision = self.selector.select(&candidates, round, trial)?;
        let mut best_cost = reports[0].best_cost;
        if let Some(source) = decision.source {
            let src = reports[source - 1];
            best_cost = src.best_cost;
            if self.verify
                && phase == Phase::Uphill
                && src.cost > src.best_cost + self.params.max_cost2
            {
                return Err(BlmpError::Invariant(format!(
                    "round {round}: uphill swap reached COST {} above bestCOST {} + MaxCost2 {}",
                    src.cost, src.best_cost, self.params.max_cost2
                )));
            }
            self.call(
                team,
                &Command::Adopt(Adoption {
                    source,
                    a: src.a,
                    b: src.b,
                    cost: src.cost,
                }),
            )?;
            self.cost = src.cost;
        }
        self.observer.on_sync(&SyncEvent {
            round,
            trial,
            phase,
            candidates,
            source: decision.source,
            cost: self.cost,
            best_cost,
        });
        if self.verify && decision.source.is_some() {
            self.audit_replicas(team, round, trial)?;
        }
        Ok(decision.source.is_some())
    }

    /// One LS-Par round: every worker takes a local-search step, then the
    /// minimum-cost worker is replicated.
    fn ls_par_round<T: Team>(&mut self, team: &mut T, round: u64) -> Result<()> {
        self.call(team, &Command::LsStep)?;
        self.stats.trials += self.params.workers as u64;
        let reports: Vec<LsReport> = self
            .replies
            .iter()
            .map(|r| match r {
                Reply::Ls(l) => *l,
                other => unreachable!("unexpected reply {other:?}"),
            })
            .collect();
        for r in &reports {
            self.emit_trial(round, 1, &r.trial);
        }
        let min = reports
            .iter()
            .map(|r| r.trial.cost)
            .min()
            .expect("at least one worker");
        let candidates: Vec<usize> = reports
            .iter()
            .filter(|r| r.trial.cost == min)
            .map(|r| r.trial.worker)
            .collect();
        let source = self
            .selector
            .select(&candidates, round, 1)?
            .source
            .expect("minimum-cost worker always exists");
        let src = reports[source - 1];
        if src.swapped {
            if src.improving {
                self.stats.improving += 1;
            } else {
                self.stats.uphill += 1;
            }
        }
        self.call(
            team,
            &Command::AdoptLs(LsAdoption {
                source,
                swap: src.swapped.then_some((src.trial.a, src.trial.b)),
                cost: src.trial.cost,
                best_cost: src.trial.best_cost,
                best_updated: src.best_updated,
            }),
        )?;
        self.cost = src.trial.cost;
        self.observer.on_sync(&SyncEvent {
            round,
            trial: 1,
            phase: Phase::Improve,
            candidates,
            source: Some(source),
            cost: self.cost,
            best_cost: src.trial.best_cost,
        });
        if self.verify {
            self.audit_replicas(team, round, 1)?;
        }
        self.observer.on_round(&RoundEvent {
            round,
            trials: 1,
            cost: self.cost,
            best_cost: src.trial.best_cost,
            average: None,
            sa: 0,
            myub: 0,
            elapsed: self.start.elapsed(),
        });
        Ok(())
    }

    fn audit_round(&self, s: &RoundSummary) -> Result<()> {
        let p = self.params;
        if s.myub != 0 && s.myub != p.max_cost1 {
            return Err(BlmpError::Invariant(format!(
                "myub {} not in {{0, MaxCost1}}",
                s.myub
            )));
        }
        if s.best_cost > s.cost {
            return Err(BlmpError::Invariant(format!(
                "bestCOST {} above COST {} after round epilogue",
                s.best_cost, s.cost
            )));
        }
        Ok(())
    }

    /// Checks that every worker holds the same state and that the shared
    /// COST matches a full recomputation.
    fn audit_replicas<T: Team>(&mut self, team: &mut T, round: u64, trial: u64) -> Result<()> {
        self.call(team, &Command::Snapshot)?;
        let snaps: Vec<&WorkerSnapshot> = self
            .replies
            .iter()
            .map(|r| match r {
                Reply::Snapshot(s) => &**s,
                other => unreachable!("unexpected reply {other:?}"),
            })
            .collect();
        let first = snaps[0];
        if let Some(i) = snaps.iter().position(|s| *s != first) {
            return Err(BlmpError::Invariant(format!(
                "round {round} trial {trial}: worker {} diverged from worker 1",
                i + 1
            )));
        }
        Placement::from_grid(first.placement.dim(), first.placement.cells().to_vec()).map_err(
            |e| BlmpError::Invariant(format!("placement is no longer a permutation: {e}")),
        )?;
        let actual = total_cost(self.sp, &first.placement);
        if actual != first.cost || first.cost != self.cost {
            return Err(BlmpError::Invariant(format!(
                "round {round} trial {trial}: COST {} but placement scores {actual}",
                first.cost
            )));
        }
        let best_actual = total_cost(self.sp, &first.best);
        if best_actual != first.best_cost {
            return Err(BlmpError::Invariant(format!(
                "round {round}: bestCOST {} but best placement scores {best_actual}",
                first.best_cost
            )));
        }
        Ok(())
    }
}
