//! Uniform entry point over every placement algorithm.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::engine::{Engine, Execution, RunObserver, RunOutcome, RunStats, SearchParams, Variant};
use crate::error::{BlmpError, Result};
use crate::heuristics::{epitaxial_place, ls_run_observed, LsParams};
use crate::placement::total_cost;
use crate::probe::ProbeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Epitaxial,
    Ls,
    LsPar,
    Alg1,
    Alg2,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Epitaxial,
        Algorithm::Ls,
        Algorithm::LsPar,
        Algorithm::Alg1,
        Algorithm::Alg2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Epitaxial => "epitaxial",
            Algorithm::Ls => "ls",
            Algorithm::LsPar => "ls-par",
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
        }
    }

    pub fn is_parallel(self) -> bool {
        matches!(self, Algorithm::LsPar | Algorithm::Alg1 | Algorithm::Alg2)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = BlmpError;

    fn from_str(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| BlmpError::invalid(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub execution: Execution,
    pub verify: bool,
}

/// Runs `algo` on `sp`. Sequential algorithms read `budget`, `pr` and `seed`
/// from `params`; the epitaxial construction reads only `seed`.
pub fn solve(
    sp: &ProbeSet,
    algo: Algorithm,
    params: &SearchParams,
    options: &SolveOptions,
    observer: &mut dyn RunObserver,
) -> Result<RunOutcome> {
    match algo {
        Algorithm::Epitaxial => {
            let start = Instant::now();
            let best = epitaxial_place(sp, params.seed);
            let cost = total_cost(sp, &best);
            Ok(RunOutcome {
                best,
                best_cost: cost,
                final_cost: cost,
                stats: RunStats {
                    rounds: sp.len() as u64,
                    elapsed: start.elapsed(),
                    ..RunStats::default()
                },
            })
        }
        Algorithm::Ls => {
            let ls = LsParams {
                budget: params.budget,
                pr: params.pr,
                seed: params.seed,
            };
            ls_run_observed(sp, &ls, observer, options.verify)
        }
        Algorithm::LsPar | Algorithm::Alg1 | Algorithm::Alg2 => {
            let engine = Engine::new(sp, params.clone())
                .execution(options.execution)
                .verify(options.verify);
            match algo {
                Algorithm::LsPar => engine.run_ls_par(observer),
                Algorithm::Alg1 => engine.run(Variant::Alg1, observer),
                _ => engine.run(Variant::Alg2, observer),
            }
        }
    }
}
