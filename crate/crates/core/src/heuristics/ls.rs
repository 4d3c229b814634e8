use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{RoundBudget, RoundEvent, RunObserver, RunOutcome, RunStats};
use crate::error::{BlmpError, Result};
use crate::placement::{local_costs, random_cell_pair, random_placement, total_cost};
use crate::probe::ProbeSet;
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsParams {
    pub budget: RoundBudget,
    /// Probability of taking a non-improving swap.
    pub pr: f64,
    pub seed: u64,
}

impl LsParams {
    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        if !(0.0..=1.0).contains(&self.pr) {
            return Err(BlmpError::invalid(format!(
                "pr must lie in [0, 1], got {}",
                self.pr
            )));
        }
        Ok(())
    }
}

/// Probabilistic hill climbing over random pair swaps.
///
/// Improving swaps are always taken; any other swap (including
/// equal-cost ones) is taken with probability `pr`. The best placement seen
/// is returned. Uses stream 1 of `seed`.
pub fn ls_run(sp: &ProbeSet, params: &LsParams) -> Result<RunOutcome> {
    ls_run_observed(sp, params, &mut (), false)
}

/// [`ls_run`] with a per-iteration observer. With `verify`, the maintained
/// cost is checked against a full recomputation after every iteration.
pub fn ls_run_observed(
    sp: &ProbeSet,
    params: &LsParams,
    observer: &mut dyn RunObserver,
    verify: bool,
) -> Result<RunOutcome> {
    params.validate()?;
    let start = Instant::now();
    let mut rng = stream(params.seed, 1);
    let mut placement = random_placement(sp, &mut rng);
    let mut cost = total_cost(sp, &placement);
    let mut best = placement.clone();
    let mut best_cost = cost;
    let mut stats = RunStats::default();

    let cells = sp.len();
    let mut iter = 0;
    while cells >= 2 && !params.budget.exhausted(iter, start.elapsed()) {
        iter += 1;
        let (a, b) = random_cell_pair(&mut rng, cells);
        let (local, fresh) = local_costs(sp, &placement, a, b);
        if fresh < local {
            placement.swap_cells(a, b);
            cost -= local - fresh;
            stats.improving += 1;
            if cost < best_cost {
                best_cost = cost;
                best.clone_from(&placement);
            }
        } else if rng.random_bool(params.pr) {
            placement.swap_cells(a, b);
            cost += fresh - local;
            stats.uphill += 1;
        }
        if verify && cost != total_cost(sp, &placement) {
            return Err(BlmpError::Invariant(format!(
                "iteration {iter}: maintained COST {cost} != recomputed {}",
                total_cost(sp, &placement)
            )));
        }
        observer.on_round(&RoundEvent {
            round: iter,
            trials: 1,
            cost,
            best_cost,
            average: None,
            sa: 0,
            myub: 0,
            elapsed: start.elapsed(),
        });
    }
    stats.rounds = iter;
    stats.trials = iter;
    stats.elapsed = start.elapsed();
    Ok(RunOutcome {
        best,
        best_cost,
        final_cost: cost,
        stats,
    })
}
