use rand::Rng;

use crate::placement::{neighbor_cells, Cost, Location, Placement};
use crate::probe::{ProbeId, ProbeSet};
use crate::rng::{stream, Stream, COORDINATOR_STREAM};

/// One greedy placement decision, reported by [`epitaxial_place_traced`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpitaxialStep {
    pub location: Location,
    pub probe: ProbeId,
    /// Filled neighbors of the chosen cell.
    pub filled_neighbors: usize,
    /// Largest filled-neighbor count over all empty cells at this step.
    pub max_filled_neighbors: usize,
    /// Hamming cost added by the placement.
    pub added_cost: Cost,
}

/// Greedy epitaxial construction.
///
/// A uniformly random probe goes to a uniformly random cell (drawn in that
/// order). Then, repeatedly, a cell is drawn uniformly among the empty cells
/// with the most filled neighbors (candidates in row-major order), and the
/// unplaced probe with the smallest Hamming sum to those neighbors is put
/// there, ties broken uniformly (candidates in id order). All draws come from
/// stream 0 of `seed`.
pub fn epitaxial_place(sp: &ProbeSet, seed: u64) -> Placement {
    epitaxial_place_traced(sp, seed, |_| {})
}

pub fn epitaxial_place_traced(
    sp: &ProbeSet,
    seed: u64,
    mut on_step: impl FnMut(&EpitaxialStep),
) -> Placement {
    let dim = sp.dim();
    let n = sp.len();
    let mut rng = stream(seed, COORDINATOR_STREAM);

    let mut grid: Vec<Option<ProbeId>> = vec![None; n];
    let mut filled = vec![0usize; n];
    let mut unplaced: Vec<ProbeId> = sp.ids().collect();

    let first = unplaced.remove(rng.random_range(0..n));
    let cell = rng.random_range(0..n);
    place(&mut grid, &mut filled, dim, cell, first);
    on_step(&EpitaxialStep {
        location: Location::from_cell(dim, cell),
        probe: first,
        filled_neighbors: 0,
        max_filled_neighbors: 0,
        added_cost: 0,
    });

    let mut cells = Vec::with_capacity(n);
    let mut ties = Vec::with_capacity(n);
    while !unplaced.is_empty() {
        let max = (0..n)
            .filter(|&c| grid[c].is_none())
            .map(|c| filled[c])
            .max()
            .expect("an empty cell remains");
        cells.clear();
        cells.extend((0..n).filter(|&c| grid[c].is_none() && filled[c] == max));
        let cell = pick(&mut rng, &cells);

        let neighbors: Vec<ProbeId> = neighbor_cells(dim, cell).filter_map(|c| grid[c]).collect();
        let mut best = u32::MAX;
        ties.clear();
        for (i, &p) in unplaced.iter().enumerate() {
            let cost: u32 = neighbors.iter().map(|&q| sp.distance(p, q)).sum();
            if cost < best {
                best = cost;
                ties.clear();
            }
            if cost == best {
                ties.push(i);
            }
        }
        let probe = unplaced.remove(pick(&mut rng, &ties));
        place(&mut grid, &mut filled, dim, cell, probe);
        on_step(&EpitaxialStep {
            location: Location::from_cell(dim, cell),
            probe,
            filled_neighbors: max,
            max_filled_neighbors: max,
            added_cost: best as Cost,
        });
    }

    let grid = grid
        .into_iter()
        .map(|p| p.expect("every cell filled"))
        .collect();
    Placement::from_grid(dim, grid).expect("each probe placed exactly once")
}

fn pick(rng: &mut Stream, items: &[usize]) -> usize {
    items[rng.random_range(0..items.len())]
}

fn place(
    grid: &mut [Option<ProbeId>],
    filled: &mut [usize],
    dim: usize,
    cell: usize,
    probe: ProbeId,
) {
    grid[cell] = Some(probe);
    for n in neighbor_cells(dim, cell) {
        filled[n] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_probes;
    use crate::oracle::generate_probeset;
    use crate::placement::total_cost;

    #[test]
    fn single_cell() {
        let sp = example_probes().prefix(1).unwrap();
        let pl = epitaxial_place(&sp, 3);
        assert_eq!(pl, Placement::row_major(1));
        assert_eq!(total_cost(&sp, &pl), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let sp = generate_probeset(8, 12, 5).unwrap();
        assert_eq!(epitaxial_place(&sp, 11), epitaxial_place(&sp, 11));
    }

    #[test]
    fn frontier_and_cost_bookkeeping() {
        let sp = generate_probeset(7, 10, 2).unwrap();
        let mut steps = Vec::new();
        let pl = epitaxial_place_traced(&sp, 4, |s| steps.push(s.clone()));
        assert_eq!(steps.len(), 49);

        // Replay the steps independently: the chosen cell must have the
        // maximum filled-neighbor count, and the added costs must sum to the total.
        let mut occupied = [false; 49];
        let mut added = 0;
        for s in &steps {
            let count_at = |c: usize| neighbor_cells(7, c).filter(|&n| occupied[n]).count();
            let cell = s.location.cell(7);
            assert!(!occupied[cell]);
            let max = (0..49)
                .filter(|&c| !occupied[c])
                .map(count_at)
                .max()
                .unwrap();
            assert_eq!(count_at(cell), max);
            assert_eq!(s.filled_neighbors, max);
            occupied[cell] = true;
            added += s.added_cost;
        }
        assert_eq!(added, total_cost(&sp, &pl));
    }
}
