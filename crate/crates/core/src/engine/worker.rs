use num_rational::Ratio;

use super::script::PairSource;
use super::{SearchParams, Variant};
use crate::error::{BlmpError, Result};
use crate::placement::{local_costs, neighbor_pair_count, Cost, Location, Placement};
use crate::probe::ProbeSet;

/// Coordinator-to-worker messages. Every command is answered with exactly
/// one [`Reply`]; a broadcast followed by collecting all replies is a barrier.
#[derive(Debug, Clone)]
pub(crate) enum Command {
    BeginRound {
        round: u64,
    },
    /// Evaluate one location pair; swap if it does not worsen the cost.
    Trial {
        trial: u64,
    },
    /// Retry the last pair under the uphill gate.
    Uphill,
    Adopt(Adoption),
    EndRound,
    /// One probabilistic local-search step (LS-Par).
    LsStep,
    AdoptLs(LsAdoption),
    Snapshot,
    TakeBest,
}

/// The source's swap and resulting cost. Workers enter every trial with
/// identical placements, so replaying the source's swap reproduces its
/// state exactly.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Adoption {
    pub source: usize,
    pub a: usize,
    pub b: usize,
    pub cost: Cost,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LsAdoption {
    pub source: usize,
    pub swap: Option<(usize, usize)>,
    pub cost: Cost,
    pub best_cost: Cost,
    pub best_updated: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TrialReport {
    pub worker: usize,
    pub a: usize,
    pub b: usize,
    pub local: Cost,
    pub fresh: Cost,
    pub accepted: bool,
    pub cost: Cost,
    pub best_cost: Cost,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LsReport {
    pub trial: TrialReport,
    pub swapped: bool,
    pub improving: bool,
    pub best_updated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RoundSummary {
    pub cost: Cost,
    pub best_cost: Cost,
    pub average: Option<Ratio<i64>>,
    pub sa: u64,
    pub myub: Cost,
}

/// Full worker state, for replication audits.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct WorkerSnapshot {
    pub placement: Placement,
    pub cost: Cost,
    pub best_cost: Cost,
    pub best: Placement,
    pub average: Option<Ratio<i64>>,
    pub sa: u64,
    pub myub: Cost,
    pub ok: bool,
    pub nrt: u64,
}

#[derive(Debug)]
pub(crate) enum Reply {
    Done,
    Trial(TrialReport),
    Ls(LsReport),
    Round(RoundSummary),
    Snapshot(Box<WorkerSnapshot>),
    Best(Placement, Cost),
    Failed(BlmpError),
}

#[derive(Debug, Clone, Copy)]
struct Proposal {
    a: usize,
    b: usize,
    local: Cost,
    fresh: Cost,
}

pub(crate) struct Worker<'a> {
    id: usize,
    sp: &'a ProbeSet,
    params: &'a SearchParams,
    variant: Variant,
    picks: PairSource,
    round: u64,

    placement: Placement,
    cost: Cost,
    best_cost: Cost,
    best: Placement,
    average: Option<Ratio<i64>>,
    sa: u64,
    myub: Cost,
    ok: bool,
    nrt: u64,

    last: Option<Proposal>,
    /// Own swap made since the last barrier, undone when adopting another source.
    pending: Option<(usize, usize)>,
    /// LS-Par: current placement became the new best this step; copied lazily.
    best_pending: bool,
}

impl<'a> Worker<'a> {
    pub(crate) fn new(
        id: usize,
        sp: &'a ProbeSet,
        params: &'a SearchParams,
        variant: Variant,
        picks: PairSource,
        placement: Placement,
        cost: Cost,
    ) -> Self {
        let average = match variant {
            Variant::Alg1 => edge_average(cost, sp.dim()),
            Variant::Alg2 => None,
        };
        Worker {
            id,
            sp,
            params,
            variant,
            picks,
            round: 0,
            best: placement.clone(),
            placement,
            cost,
            best_cost: cost,
            average,
            sa: 0,
            myub: 0,
            ok: false,
            nrt: 0,
            last: None,
            pending: None,
            best_pending: false,
        }
    }

    pub(crate) fn handle(&mut self, cmd: &Command) -> Reply {
        match self.try_handle(cmd) {
            Ok(reply) => reply,
            Err(e) => Reply::Failed(e),
        }
    }

    fn try_handle(&mut self, cmd: &Command) -> Result<Reply> {
        Ok(match *cmd {
            Command::BeginRound { round } => {
                self.round = round;
                self.ok = false;
                self.nrt = 0;
                self.picks.begin_round(round);
                Reply::Done
            }
            Command::Trial { trial } => Reply::Trial(self.trial(trial)?),
            Command::Uphill => Reply::Trial(self.uphill()),
            Command::Adopt(adoption) => {
                self.adopt(adoption);
                Reply::Done
            }
            Command::EndRound => Reply::Round(self.end_round()?),
            Command::LsStep => Reply::Ls(self.ls_step()?),
            Command::AdoptLs(adoption) => {
                self.adopt_ls(adoption);
                Reply::Done
            }
            Command::Snapshot => Reply::Snapshot(Box::new(self.snapshot())),
            Command::TakeBest => Reply::Best(self.best.clone(), self.best_cost),
        })
    }

    fn swap(&mut self, a: usize, b: usize, delta: Cost) {
        self.placement.swap_cells(a, b);
        self.cost += delta;
        self.pending = Some((a, b));
    }

    fn evaluate(&mut self, trial: u64) -> Result<Proposal> {
        let (a, b) = self.picks.next_pair(self.sp.dim(), self.round, trial)?;
        let (local, fresh) = local_costs(self.sp, &self.placement, a, b);
        let p = Proposal { a, b, local, fresh };
        self.last = Some(p);
        Ok(p)
    }

    fn report(&self, p: Proposal, accepted: bool) -> TrialReport {
        TrialReport {
            worker: self.id,
            a: p.a,
            b: p.b,
            local: p.local,
            fresh: p.fresh,
            accepted,
            cost: self.cost,
            best_cost: self.best_cost,
        }
    }

    fn trial(&mut self, trial: u64) -> Result<TrialReport> {
        self.nrt += 1;
        self.pending = None;
        let p = self.evaluate(trial)?;
        if p.fresh <= p.local {
            self.ok = true;
            self.swap(p.a, p.b, p.fresh - p.local);
        }
        Ok(self.report(p, self.ok))
    }

    fn uphill_gate(&self) -> Cost {
        let base = match self.variant {
            Variant::Alg1 => self.average.map_or(0, |avg| (avg * 8).floor().to_integer()),
            Variant::Alg2 => self.params.max_cost,
        };
        base + self.myub
    }

    fn uphill(&mut self) -> TrialReport {
        let p = self.last.expect("uphill follows a trial");
        if !self.ok && self.nrt >= self.params.max_trials1 {
            let delta = p.fresh - p.local;
            if p.fresh <= self.uphill_gate()
                && self.cost + delta <= self.best_cost + self.params.max_cost2
            {
                self.ok = true;
                self.swap(p.a, p.b, delta);
            }
        }
        self.report(p, self.ok)
    }

    fn adopt(&mut self, src: Adoption) {
        if self.id != src.source {
            if let Some((a, b)) = self.pending {
                self.placement.swap_cells(a, b);
            }
            self.placement.swap_cells(src.a, src.b);
            self.cost = src.cost;
        }
        self.pending = None;
        self.ok = true;
    }

    fn end_round(&mut self) -> Result<RoundSummary> {
        self.picks.end_round(self.round)?;
        if self.variant == Variant::Alg1 {
            self.average = edge_average(self.cost, self.sp.dim());
        }
        if self.cost < self.best_cost {
            self.best_cost = self.cost;
            self.best.clone_from(&self.placement);
        }
        self.sa += 1;
        if self.myub == 0 {
            if self.sa == self.params.winlength1 {
                self.sa = 0;
                self.myub = self.params.max_cost1;
            }
        } else if self.sa == self.params.winlength2 {
            self.sa = 0;
            self.myub = 0;
        }
        Ok(RoundSummary {
            cost: self.cost,
            best_cost: self.best_cost,
            average: self.average,
            sa: self.sa,
            myub: self.myub,
        })
    }

    fn ls_step(&mut self) -> Result<LsReport> {
        self.pending = None;
        self.best_pending = false;
        self.nrt += 1;
        let p = self.evaluate(self.nrt)?;
        let improving = p.fresh < p.local;
        let swapped = improving || self.picks.bernoulli(self.params.pr)?;
        if swapped {
            self.swap(p.a, p.b, p.fresh - p.local);
        }
        if improving && self.cost < self.best_cost {
            self.best_cost = self.cost;
            self.best_pending = true;
        }
        Ok(LsReport {
            trial: self.report(p, swapped),
            swapped,
            improving,
            best_updated: self.best_pending,
        })
    }

    fn adopt_ls(&mut self, src: LsAdoption) {
        if self.id == src.source {
            if self.best_pending {
                self.best.clone_from(&self.placement);
            }
        } else {
            if let Some((a, b)) = self.pending {
                self.placement.swap_cells(a, b);
            }
            if let Some((a, b)) = src.swap {
                self.placement.swap_cells(a, b);
            }
            self.cost = src.cost;
            self.best_cost = src.best_cost;
            if src.best_updated {
                self.best.clone_from(&self.placement);
            }
        }
        self.pending = None;
        self.best_pending = false;
    }

    fn snapshot(&self) -> WorkerSnapshot {
        WorkerSnapshot {
            placement: self.placement.clone(),
            cost: self.cost,
            best_cost: self.best_cost,
            best: self.best.clone(),
            average: self.average,
            sa: self.sa,
            myub: self.myub,
            ok: self.ok,
            nrt: self.nrt,
        }
    }
}

/// Mean Hamming distance per neighbor pair, kept as an exact fraction.
/// `None` on a 1x1 grid, which has no neighbor pairs.
pub(crate) fn edge_average(cost: Cost, dim: usize) -> Option<Ratio<i64>> {
    let pairs = neighbor_pair_count(dim) as i64;
    (pairs > 0).then(|| Ratio::new(cost, pairs))
}

pub(crate) fn cell_location(dim: usize, cell: usize) -> Location {
    Location::from_cell(dim, cell)
}
