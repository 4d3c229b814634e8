//! Ground truth for testing the heuristics: seeded random instances,
//! exhaustive optimal placement for tiny grids, and an incremental-cost fuzzer.

use rand::Rng;
use serde::Serialize;

use crate::error::{BlmpError, Result};
use crate::placement::{
    local_costs, random_cell_pair, random_placement, total_cost, Cost, Location, Placement,
};
use crate::probe::{Base, Probe, ProbeId, ProbeSet};
use crate::rng::{stream, COORDINATOR_STREAM};

/// Largest grid side accepted by [`brute_force_optimum`] (9! placements).
pub const MAX_BRUTE_FORCE_DIM: usize = 3;

/// `dim²` probes whose symbols are i.i.d. uniform over `{A, C, G, T}`,
/// drawn probe by probe from stream 0 of `seed`.
pub fn generate_probeset(dim: usize, probe_length: usize, seed: u64) -> Result<ProbeSet> {
    if dim == 0 || probe_length == 0 {
        return Err(BlmpError::invalid("dim and probe length must be positive"));
    }
    let mut rng = stream(seed, COORDINATOR_STREAM);
    let probes = (0..dim * dim)
        .map(|_| {
            let bases: Vec<Base> = (0..probe_length)
                .map(|_| Base::ALL[rng.random_range(0..4)])
                .collect();
            Probe::from_bases(&bases)
        })
        .collect();
    ProbeSet::new(dim, probes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum_cost: Cost,
    pub witness: Placement,
    pub enumerated_count: u64,
}

/// Exact minimum-cost placement by exhaustive enumeration, with probe 1
/// restricted to cells that are lexicographically smallest in their orbit
/// under the eight grid symmetries.
pub fn brute_force_optimum(sp: &ProbeSet) -> Result<OracleResult> {
    brute_force_optimum_with(sp, true)
}

/// As [`brute_force_optimum`]; `prune_symmetry = false` enumerates every
/// permutation, for cross-checking the pruning.
pub fn brute_force_optimum_with(sp: &ProbeSet, prune_symmetry: bool) -> Result<OracleResult> {
    let dim = sp.dim();
    if dim > MAX_BRUTE_FORCE_DIM {
        return Err(BlmpError::InstanceTooLarge {
            dim,
            max: MAX_BRUTE_FORCE_DIM,
        });
    }
    let n = sp.len();
    let ids: Vec<ProbeId> = sp.ids().collect();
    let dist: Vec<Vec<Cost>> = ids
        .iter()
        .map(|&a| ids.iter().map(|&b| sp.distance(a, b) as Cost).collect())
        .collect();
    let allowed_first: Vec<bool> = (0..n)
        .map(|cell| !prune_symmetry || is_canonical_cell(dim, cell))
        .collect();

    let mut search = Enumeration {
        dim,
        dist: &dist,
        allowed_first: &allowed_first,
        grid: vec![usize::MAX; n],
        used: vec![false; n],
        best_cost: Cost::MAX,
        best_grid: Vec::new(),
        leaves: 0,
    };
    search.descend(0, 0);

    let witness = Placement::from_grid(dim, search.best_grid.iter().map(|&i| ids[i]).collect())?;
    Ok(OracleResult {
        optimum_cost: search.best_cost,
        witness,
        enumerated_count: search.leaves,
    })
}

struct Enumeration<'a> {
    dim: usize,
    dist: &'a [Vec<Cost>],
    allowed_first: &'a [bool],
    grid: Vec<usize>,
    used: Vec<bool>,
    best_cost: Cost,
    best_grid: Vec<usize>,
    leaves: u64,
}

impl Enumeration<'_> {
    /// Fills cells in row-major order, charging each new probe against its
    /// already-filled left and upper neighbors.
    fn descend(&mut self, cell: usize, partial: Cost) {
        let n = self.grid.len();
        if cell == n {
            self.leaves += 1;
            if partial < self.best_cost {
                self.best_cost = partial;
                self.best_grid.clone_from(&self.grid);
            }
            return;
        }
        let (row, col) = (cell / self.dim, cell % self.dim);
        for p in 0..n {
            if self.used[p] || (p == 0 && !self.allowed_first[cell]) {
                continue;
            }
            let mut added = 0;
            if col > 0 {
                added += self.dist[p][self.grid[cell - 1]];
            }
            if row > 0 {
                added += self.dist[p][self.grid[cell - self.dim]];
            }
            self.used[p] = true;
            self.grid[cell] = p;
            self.descend(cell + 1, partial + added);
            self.used[p] = false;
        }
        self.grid[cell] = usize::MAX;
    }
}

/// Images of a 0-based `(row, col)` under the dihedral group of the square.
fn symmetric_images(dim: usize, row: usize, col: usize) -> [(usize, usize); 8] {
    let m = dim - 1;
    [
        (row, col),
        (col, m - row),
        (m - row, m - col),
        (m - col, row),
        (row, m - col),
        (m - row, col),
        (col, row),
        (m - col, m - row),
    ]
}

fn is_canonical_cell(dim: usize, cell: usize) -> bool {
    let here = (cell / dim, cell % dim);
    symmetric_images(dim, here.0, here.1)
        .iter()
        .all(|&img| here <= img)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Divergence {
    /// 1-based swap number after which the costs disagreed.
    pub step: usize,
    pub a: Location,
    pub b: Location,
    pub maintained: Cost,
    pub recomputed: Cost,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub swaps_checked: usize,
    pub adjacent_swaps: usize,
    pub first_divergence: Option<Divergence>,
}

/// Applies `swaps` random swaps to a random placement, maintaining the cost
/// through local deltas, and compares it with a full recomputation after
/// every swap. Uses stream 1 of `seed`.
pub fn verify_incremental(sp: &ProbeSet, seed: u64, swaps: usize) -> VerificationReport {
    let dim = sp.dim();
    let mut rng = stream(seed, 1);
    let mut pl = random_placement(sp, &mut rng);
    let mut cost = total_cost(sp, &pl);
    let mut report = VerificationReport {
        passed: true,
        swaps_checked: 0,
        adjacent_swaps: 0,
        first_divergence: None,
    };
    if sp.len() < 2 {
        return report;
    }
    for step in 1..=swaps {
        let (a, b) = random_cell_pair(&mut rng, sp.len());
        let (local, fresh) = local_costs(sp, &pl, a, b);
        pl.swap_cells(a, b);
        cost += fresh - local;
        let (la, lb) = (Location::from_cell(dim, a), Location::from_cell(dim, b));
        if la.row.abs_diff(lb.row) + la.col.abs_diff(lb.col) == 1 {
            report.adjacent_swaps += 1;
        }
        report.swaps_checked = step;
        let recomputed = total_cost(sp, &pl);
        if recomputed != cost {
            report.passed = false;
            report.first_divergence = Some(Divergence {
                step,
                a: la,
                b: lb,
                maintained: cost,
                recomputed,
            });
            break;
        }
    }
    report
}
