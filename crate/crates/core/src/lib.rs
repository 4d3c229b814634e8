//! Border length minimization for DNA probe placement.
//!
//! Given `dim²` equal-length probes, find a placement on a `dim x dim` grid
//! minimizing the sum of Hamming distances between orthogonally adjacent
//! probes. The crate provides the cost model with exact swap deltas, the
//! epitaxial greedy construction, sequential probabilistic local search, a
//! lock-step multi-worker search engine (LS-Par, ALG1, ALG2), exhaustive
//! optimality oracles for tiny grids, and the text file formats used by the
//! `blmp` command-line tool.

pub mod engine;
pub mod error;
pub mod fixtures;
pub mod heuristics;
pub mod io;
pub mod oracle;
pub mod placement;
pub mod probe;
pub mod report;
pub mod rng;
pub mod solve;

pub use engine::{alg1_run, alg2_run, ls_par_run, RoundBudget, RunOutcome, SearchParams};
pub use error::{BlmpError, Result};
pub use heuristics::{epitaxial_place, ls_run, LsParams};
pub use placement::{
    apply_swap, neighbor_locations, pair_local_cost, random_placement, swap_delta, total_cost,
    Cost, Location, Placement,
};
pub use probe::{hamming, Base, Probe, ProbeId, ProbeSet};
pub use solve::{solve, Algorithm, SolveOptions};
