//! Grid locations, placements and the border-length cost model.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{BlmpError, Result};
use crate::probe::{ProbeId, ProbeSet};

/// Border-length costs are exact integers; `i64` leaves room for signed deltas.
pub type Cost = i64;

/// A 1-based `(row, col)` grid coordinate.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Location {
    pub row: usize,
    pub col: usize,
}

impl Location {
    pub const fn new(row: usize, col: usize) -> Location {
        Location { row, col }
    }

    pub fn in_bounds(self, dim: usize) -> bool {
        (1..=dim).contains(&self.row) && (1..=dim).contains(&self.col)
    }

    pub(crate) fn cell(self, dim: usize) -> usize {
        (self.row - 1) * dim + (self.col - 1)
    }

    pub(crate) fn from_cell(dim: usize, cell: usize) -> Location {
        Location::new(cell / dim + 1, cell % dim + 1)
    }

    fn checked_cell(self, dim: usize) -> Result<usize> {
        if self.in_bounds(dim) {
            Ok(self.cell(dim))
        } else {
            Err(BlmpError::invalid(format!(
                "location {self} outside {dim}x{dim} grid"
            )))
        }
    }
}

impl From<(usize, usize)> for Location {
    fn from((row, col): (usize, usize)) -> Location {
        Location::new(row, col)
    }
}

impl From<Location> for (usize, usize) {
    fn from(l: Location) -> (usize, usize) {
        (l.row, l.col)
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Orthogonal neighbors of a row-major cell index, in up, down, left, right order.
#[derive(Debug, Clone)]
pub(crate) struct NeighborCells {
    cells: [usize; 4],
    len: u8,
    next: u8,
}

impl Iterator for NeighborCells {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.next < self.len {
            self.next += 1;
            Some(self.cells[self.next as usize - 1])
        } else {
            None
        }
    }
}

#[inline]
pub(crate) fn neighbor_cells(dim: usize, cell: usize) -> NeighborCells {
    let (r, c) = (cell / dim, cell % dim);
    let mut out = NeighborCells {
        cells: [0; 4],
        len: 0,
        next: 0,
    };
    let mut push = |x: usize| {
        out.cells[out.len as usize] = x;
        out.len += 1;
    };
    if r > 0 {
        push(cell - dim);
    }
    if r + 1 < dim {
        push(cell + dim);
    }
    if c > 0 {
        push(cell - 1);
    }
    if c + 1 < dim {
        push(cell + 1);
    }
    out
}

/// In-bounds orthogonal neighbors of `loc` (up, down, left, right; out-of-bounds skipped).
pub fn neighbor_locations(dim: usize, loc: Location) -> Result<Vec<Location>> {
    let cell = loc.checked_cell(dim)?;
    Ok(neighbor_cells(dim, cell)
        .map(|n| Location::from_cell(dim, n))
        .collect())
}

/// Number of orthogonally adjacent site pairs on a `dim x dim` grid.
pub fn neighbor_pair_count(dim: usize) -> usize {
    2 * dim * dim.saturating_sub(1)
}

/// A `dim x dim` grid holding each probe id exactly once, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    dim: usize,
    grid: Vec<ProbeId>,
}

impl Placement {
    /// Validates that `grid` is a permutation of `1..=dim²`.
    pub fn from_grid(dim: usize, grid: Vec<ProbeId>) -> Result<Placement> {
        if dim == 0 {
            return Err(BlmpError::invalid("dim must be positive"));
        }
        let n = dim * dim;
        if grid.len() != n {
            return Err(BlmpError::invalid(format!(
                "placement has {} cells, expected {n}",
                grid.len()
            )));
        }
        let mut seen = vec![false; n];
        for (cell, id) in grid.iter().enumerate() {
            let loc = Location::from_cell(dim, cell);
            if id.get() as usize > n {
                return Err(BlmpError::invalid(format!(
                    "probe index {} at {loc} out of range 1..={n}",
                    id.get()
                )));
            }
            if std::mem::replace(&mut seen[id.index()], true) {
                return Err(BlmpError::invalid(format!(
                    "probe index {} placed twice (again at {loc})",
                    id.get()
                )));
            }
        }
        Ok(Placement { dim, grid })
    }

    /// Probe `i` at row-major cell `i`.
    pub fn row_major(dim: usize) -> Placement {
        Placement {
            dim,
            grid: (0..dim * dim).map(ProbeId::from_index).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, loc: Location) -> ProbeId {
        self.grid[loc.cell(self.dim)]
    }

    pub fn cells(&self) -> &[ProbeId] {
        &self.grid
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ProbeId]> {
        self.grid.chunks(self.dim)
    }

    /// Exchanges the probes at two distinct locations.
    pub fn swap(&mut self, a: Location, b: Location) -> Result<()> {
        let (ca, cb) = distinct_cells(self.dim, a, b)?;
        self.grid.swap(ca, cb);
        Ok(())
    }

    #[inline]
    pub(crate) fn swap_cells(&mut self, a: usize, b: usize) {
        self.grid.swap(a, b);
    }

    pub(crate) fn check_matches(&self, sp: &ProbeSet) -> Result<()> {
        if self.dim != sp.dim() {
            return Err(BlmpError::invalid(format!(
                "placement is {0}x{0} but probe set has dim={1}",
                self.dim,
                sp.dim()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<u32>> = self
            .rows()
            .map(|r| r.iter().map(|p| p.get()).collect())
            .collect();
        f.debug_struct("Placement").field("grid", &rows).finish()
    }
}

fn distinct_cells(dim: usize, a: Location, b: Location) -> Result<(usize, usize)> {
    let ca = a.checked_cell(dim)?;
    let cb = b.checked_cell(dim)?;
    if ca == cb {
        return Err(BlmpError::invalid(format!(
            "swap locations must differ (both {a})"
        )));
    }
    Ok((ca, cb))
}

/// Sum of Hamming distances over every orthogonally adjacent pair of sites.
pub fn total_cost(sp: &ProbeSet, pl: &Placement) -> Cost {
    let dim = pl.dim;
    let d = |a: usize, b: usize| sp.distance(pl.grid[a], pl.grid[b]) as Cost;
    let mut cost = 0;
    for r in 0..dim {
        for c in 0..dim {
            let cell = r * dim + c;
            if c + 1 < dim {
                cost += d(cell, cell + 1);
            }
            if r + 1 < dim {
                cost += d(cell, cell + dim);
            }
        }
    }
    cost
}

/// `(localcost, newlocalcost)` for a pair of distinct cells.
///
/// When the cells are adjacent, the new-cost side sees the other swapped
/// cell with its post-swap occupant, so the shared edge contributes
/// `2·d(pa, pb)` to both sums and `newlocalcost - localcost` is the exact
/// change in total cost.
#[inline]
pub(crate) fn local_costs(sp: &ProbeSet, pl: &Placement, a: usize, b: usize) -> (Cost, Cost) {
    let grid = &pl.grid[..];
    let (pa, pb) = (grid[a], grid[b]);
    let (la, fa) = side_costs(sp, grid, pl.dim, a, pa, pb, b);
    let (lb, fb) = side_costs(sp, grid, pl.dim, b, pb, pa, a);
    ((la + lb) as Cost, (fa + fb) as Cost)
}

/// Distances from `own` (currently at `cell`) and from `other` to the
/// neighbors of `cell`, where `partner` is treated as already holding `own`.
#[inline(always)]
fn side_costs(
    sp: &ProbeSet,
    grid: &[ProbeId],
    dim: usize,
    cell: usize,
    own: ProbeId,
    other: ProbeId,
    partner: usize,
) -> (u32, u32) {
    let (r, c) = (cell / dim, cell % dim);
    let mut local = 0;
    let mut fresh = 0;
    let mut visit = |n: usize| {
        let q = grid[n];
        local += sp.distance(own, q);
        fresh += sp.distance(other, if n == partner { own } else { q });
    };
    if r > 0 {
        visit(cell - dim);
    }
    if r + 1 < dim {
        visit(cell + dim);
    }
    if c > 0 {
        visit(cell - 1);
    }
    if c + 1 < dim {
        visit(cell + 1);
    }
    (local, fresh)
}

/// Local cost around two locations before and after exchanging their probes.
pub fn pair_local_cost(
    sp: &ProbeSet,
    pl: &Placement,
    a: Location,
    b: Location,
) -> Result<(Cost, Cost)> {
    pl.check_matches(sp)?;
    let (ca, cb) = distinct_cells(pl.dim, a, b)?;
    Ok(local_costs(sp, pl, ca, cb))
}

/// Exact change in [`total_cost`] if the probes at `a` and `b` were exchanged.
pub fn swap_delta(sp: &ProbeSet, pl: &Placement, a: Location, b: Location) -> Result<Cost> {
    let (local, fresh) = pair_local_cost(sp, pl, a, b)?;
    Ok(fresh - local)
}

/// Exchanges the probes at `a` and `b` in place.
pub fn apply_swap(pl: &mut Placement, a: Location, b: Location) -> Result<()> {
    pl.swap(a, b)
}

/// Uniformly random placement (Fisher-Yates over the probe ids, laid out row-major).
pub fn random_placement<R: Rng + ?Sized>(sp: &ProbeSet, rng: &mut R) -> Placement {
    let mut grid: Vec<ProbeId> = sp.ids().collect();
    grid.shuffle(rng);
    Placement {
        dim: sp.dim(),
        grid,
    }
}

/// Draws two distinct cells uniformly; `cells` must be at least 2.
#[inline]
pub(crate) fn random_cell_pair<R: Rng + ?Sized>(rng: &mut R, cells: usize) -> (usize, usize) {
    let a = rng.random_range(0..cells);
    let mut b = rng.random_range(0..cells - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}
