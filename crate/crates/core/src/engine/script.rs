//! Sources of the random choices a search makes, either drawn from seeded
//! streams or replayed from a [`SelectionScript`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BlmpError, Result};
use crate::placement::{random_cell_pair, Location, Placement};
use crate::probe::ProbeId;
use crate::rng::Stream;

/// Pre-recorded choices for an ALG1/ALG2 run: the location pair every worker
/// evaluates in every trial, and the coordinator's pick whenever more than
/// one worker qualifies as source. Replay fails if the run needs a choice
/// the script lacks or leaves scripted choices unused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionScript {
    pub workers: usize,
    /// Starting grid, row by row, as 1-based probe ids. Random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Vec<u32>>>,
    pub rounds: Vec<RoundScript>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundScript {
    pub trials: Vec<TrialScript>,
    /// 1-based worker ids, consumed in order at contested barriers.
    #[serde(default)]
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialScript {
    /// One location pair per worker, worker 1 first.
    pub pairs: Vec<(Location, Location)>,
}

impl SelectionScript {
    pub fn validate(&self, dim: usize) -> Result<()> {
        for (r, round) in self.rounds.iter().enumerate() {
            for (t, trial) in round.trials.iter().enumerate() {
                let at = || format!("round {} trial {}", r + 1, t + 1);
                if trial.pairs.len() != self.workers {
                    return Err(BlmpError::Replay {
                        at: at(),
                        message: format!(
                            "{} pairs scripted for {} workers",
                            trial.pairs.len(),
                            self.workers
                        ),
                    });
                }
                for (w, &(a, b)) in trial.pairs.iter().enumerate() {
                    if !a.in_bounds(dim) || !b.in_bounds(dim) || a == b {
                        return Err(BlmpError::Replay {
                            at: format!("{} worker {}", at(), w + 1),
                            message: format!("invalid location pair {a} {b}"),
                        });
                    }
                }
            }
            if let Some(&s) = round.sources.iter().find(|&&s| s == 0 || s > self.workers) {
                return Err(BlmpError::Replay {
                    at: format!("round {}", r + 1),
                    message: format!("source {s} is not a worker id"),
                });
            }
        }
        Ok(())
    }

    pub fn initial_placement(&self, dim: usize) -> Result<Option<Placement>> {
        let Some(rows) = &self.initial else {
            return Ok(None);
        };
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(BlmpError::invalid(format!(
                "scripted initial grid is not {dim}x{dim}"
            )));
        }
        let grid = rows
            .iter()
            .flatten()
            .map(|&id| {
                if id == 0 {
                    Err(BlmpError::invalid("probe ids are 1-based"))
                } else {
                    Ok(ProbeId::new(id))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Placement::from_grid(dim, grid).map(Some)
    }

    fn worker_pairs(&self, worker: usize) -> Vec<Vec<(Location, Location)>> {
        self.rounds
            .iter()
            .map(|r| r.trials.iter().map(|t| t.pairs[worker - 1]).collect())
            .collect()
    }

    fn sources(&self) -> Vec<Vec<usize>> {
        self.rounds.iter().map(|r| r.sources.clone()).collect()
    }
}

/// Cursor over per-round scripted entries.
#[derive(Debug)]
pub(crate) struct Cursor<T> {
    rounds: Vec<Vec<T>>,
    round: usize,
    pos: usize,
}

impl<T: Copy> Cursor<T> {
    fn new(rounds: Vec<Vec<T>>) -> Self {
        Cursor {
            rounds,
            round: 0,
            pos: 0,
        }
    }

    fn begin(&mut self, round: u64) {
        self.round = round as usize;
        self.pos = 0;
    }

    fn next(&mut self) -> Option<T> {
        let item = *self.current()?.get(self.pos)?;
        self.pos += 1;
        Some(item)
    }

    fn leftover(&self) -> usize {
        self.current()
            .map_or(0, |r| r.len().saturating_sub(self.pos))
    }

    fn current(&self) -> Option<&Vec<T>> {
        self.round.checked_sub(1).and_then(|i| self.rounds.get(i))
    }
}

#[derive(Debug)]
#[allow(clippy::large_enum_variant)]
pub(crate) enum PairSource {
    Random(Stream),
    Scripted {
        worker: usize,
        cursor: Cursor<(Location, Location)>,
    },
}

impl PairSource {
    pub(crate) fn scripted(script: &SelectionScript, worker: usize) -> Self {
        PairSource::Scripted {
            worker,
            cursor: Cursor::new(script.worker_pairs(worker)),
        }
    }

    pub(crate) fn begin_round(&mut self, round: u64) {
        if let PairSource::Scripted { cursor, .. } = self {
            cursor.begin(round);
        }
    }

    pub(crate) fn next_pair(
        &mut self,
        dim: usize,
        round: u64,
        trial: u64,
    ) -> Result<(usize, usize)> {
        match self {
            PairSource::Random(rng) => Ok(random_cell_pair(rng, dim * dim)),
            PairSource::Scripted { worker, cursor } => match cursor.next() {
                Some((a, b)) => Ok((a.cell(dim), b.cell(dim))),
                None => Err(BlmpError::Replay {
                    at: format!("round {round} trial {trial} worker {worker}"),
                    message: "no location pair scripted".into(),
                }),
            },
        }
    }

    pub(crate) fn end_round(&self, round: u64) -> Result<()> {
        match self {
            PairSource::Scripted { worker, cursor } if cursor.leftover() > 0 => {
                Err(BlmpError::Replay {
                    at: format!("round {round} worker {worker}"),
                    message: format!("{} scripted location pairs left unused", cursor.leftover()),
                })
            }
            _ => Ok(()),
        }
    }

    pub(crate) fn bernoulli(&mut self, p: f64) -> Result<bool> {
        match self {
            PairSource::Random(rng) => Ok(rng.random_bool(p)),
            PairSource::Scripted { worker, .. } => Err(BlmpError::Replay {
                at: format!("worker {worker}"),
                message: "probabilistic acceptance cannot be scripted".into(),
            }),
        }
    }
}

/// The outcome of a barrier: the worker whose state everyone adopts, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyncDecision {
    pub source: Option<usize>,
}

/// Picks the source uniformly among `candidates`. A lone candidate is
/// returned without consuming randomness.
pub fn select_source<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> SyncDecision {
    let source = match candidates {
        [] => None,
        [only] => Some(*only),
        _ => Some(candidates[rng.random_range(0..candidates.len())]),
    };
    SyncDecision { source }
}

#[derive(Debug)]
#[allow(clippy::large_enum_variant)]
pub(crate) enum SourceSelector {
    Random(Stream),
    Scripted(Cursor<usize>),
}

impl SourceSelector {
    pub(crate) fn scripted(script: &SelectionScript) -> Self {
        SourceSelector::Scripted(Cursor::new(script.sources()))
    }

    pub(crate) fn begin_round(&mut self, round: u64) {
        if let SourceSelector::Scripted(c) = self {
            c.begin(round);
        }
    }

    pub(crate) fn select(
        &mut self,
        candidates: &[usize],
        round: u64,
        trial: u64,
    ) -> Result<SyncDecision> {
        match self {
            SourceSelector::Random(rng) => Ok(select_source(candidates, rng)),
            SourceSelector::Scripted(cursor) => {
                if candidates.len() <= 1 {
                    return Ok(SyncDecision {
                        source: candidates.first().copied(),
                    });
                }
                let at = || format!("round {round} trial {trial} coordinator");
                let pick = cursor.next().ok_or_else(|| BlmpError::Replay {
                    at: at(),
                    message: format!("no source scripted for candidates {candidates:?}"),
                })?;
                if !candidates.contains(&pick) {
                    return Err(BlmpError::Replay {
                        at: at(),
                        message: format!(
                            "scripted source {pick} not among candidates {candidates:?}"
                        ),
                    });
                }
                Ok(SyncDecision { source: Some(pick) })
            }
        }
    }

    pub(crate) fn end_round(&self, round: u64) -> Result<()> {
        match self {
            SourceSelector::Scripted(c) if c.leftover() > 0 => Err(BlmpError::Replay {
                at: format!("round {round} coordinator"),
                message: format!("{} scripted source choices left unused", c.leftover()),
            }),
            _ => Ok(()),
        }
    }
}
