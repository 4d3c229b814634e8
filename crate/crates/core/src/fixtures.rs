//! The 16-probe worked example: probes, starting placement and the scripted
//! choices that replay it with three workers.

use crate::engine::{RoundBudget, RoundScript, SearchParams, SelectionScript, TrialScript};
use crate::placement::Location;
use crate::probe::ProbeSet;

/// Probes `p1..p16`, each of length 5.
pub const EXAMPLE_PROBES: [&str; 16] = [
    "CGATT", "GGGCC", "ATCGA", "ATGTC", "TTAGT", "ACCAG", "CCCGA", "AATTC", "ATACG", "CCCTC",
    "GGAGA", "AGCCG", "AGACA", "ACCTA", "GAATC", "GATTT",
];

pub fn example_probes() -> ProbeSet {
    ProbeSet::from_strs(4, &EXAMPLE_PROBES).expect("fixture probes are valid")
}

/// Parameters of the worked example, with a budget of one round per scripted round.
pub fn example_params() -> SearchParams {
    SearchParams {
        workers: 3,
        budget: RoundBudget::OuterRounds(4),
        max_trials1: 2,
        max_trials2: 1000,
        max_cost1: 10,
        max_cost2: 10,
        winlength1: 70,
        winlength2: 20,
        ..SearchParams::default()
    }
}

const fn l(row: usize, col: usize) -> Location {
    Location::new(row, col)
}

/// Scripted location pairs and source choices for the four rounds of the
/// worked example; the starting placement is row-major.
pub fn example_script() -> SelectionScript {
    let trial = |pairs: [(Location, Location); 3]| TrialScript {
        pairs: pairs.to_vec(),
    };
    SelectionScript {
        workers: 3,
        initial: Some(
            (0..4)
                .map(|r| (1..=4).map(|c| r * 4 + c).collect())
                .collect(),
        ),
        rounds: vec![
            RoundScript {
                trials: vec![trial([
                    (l(1, 1), l(4, 3)),
                    (l(3, 3), l(1, 1)),
                    (l(4, 2), l(1, 4)),
                ])],
                sources: vec![],
            },
            RoundScript {
                trials: vec![trial([
                    (l(1, 2), l(4, 1)),
                    (l(1, 2), l(4, 2)),
                    (l(3, 1), l(4, 3)),
                ])],
                sources: vec![1],
            },
            RoundScript {
                trials: vec![trial([
                    (l(1, 4), l(3, 3)),
                    (l(4, 2), l(1, 2)),
                    (l(1, 2), l(2, 4)),
                ])],
                sources: vec![],
            },
            RoundScript {
                trials: vec![
                    trial([(l(1, 1), l(2, 2)), (l(2, 3), l(4, 4)), (l(1, 4), l(4, 4))]),
                    trial([(l(1, 4), l(2, 4)), (l(1, 4), l(2, 2)), (l(4, 1), l(2, 1))]),
                ],
                sources: vec![1],
            },
        ],
    }
}
