//! Acceptance suite. Runs every criterion and prints one PASS/FAIL line each;
//! exits non-zero if any criterion fails. Pass criterion numbers as arguments
//! to run a subset.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use blmp::engine::{Engine, Execution, Phase, Recorder, RoundBudget, SearchParams, Variant};
use blmp::fixtures::{example_params, example_probes, example_script};
use blmp::heuristics::{ls_run_observed, LsParams};
use blmp::io::{read_placement_file, read_probes_file};
use blmp::oracle::{brute_force_optimum, generate_probeset, verify_incremental};
use blmp::placement::neighbor_pair_count;
use blmp::{
    epitaxial_place, hamming, solve, total_cost, Algorithm, Placement, ProbeId, SolveOptions,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Upper triangle of the pairwise distance table of the 16 example probes:
/// row `i` lists `d(p_i, p_j)` for `j = i+1..=16`.
#[rustfmt::skip]
const EXAMPLE_DISTANCES: [&[u32]; 15] = [
    &[4, 5, 4, 3, 5, 4, 4, 4, 3, 3, 4, 3, 4, 3, 3],
    &[5, 3, 5, 5, 5, 4, 4, 4, 3, 3, 3, 5, 3, 4],
    &[3, 3, 3, 2, 4, 3, 4, 3, 3, 3, 2, 5, 5],
    &[4, 4, 5, 2, 3, 3, 5, 4, 4, 3, 3, 4],
    &[5, 4, 5, 3, 5, 3, 5, 4, 5, 4, 4],
    &[3, 4, 3, 3, 5, 2, 4, 2, 5, 5],
    &[5, 5, 2, 3, 4, 4, 2, 5, 5],
    &[4, 3, 5, 4, 4, 3, 2, 2],
    &[5, 4, 2, 2, 4, 4, 5],
    &[5, 4, 5, 2, 3, 4],
    &[4, 2, 4, 3, 4],
    &[2, 3, 5, 5],
    &[3, 4, 5],
    &[4, 4],
    &[2],
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn blmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blmp"))
        .args(args)
        .env_remove("BLMP_SEED")
        .output()
        .expect("blmp binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn distance_table() -> Verdict {
    let sp = read_probes_file(fixture("example16.probes")).map_err(|e| e.to_string())?;
    ensure!(
        sp == example_probes(),
        "fixture file differs from built-in probes"
    );
    let probes: Vec<_> = sp.probes().collect();
    let mut checked = 0;
    for (i, row) in EXAMPLE_DISTANCES.iter().enumerate() {
        ensure!(
            row.len() == 15 - i,
            "table row {} has {} entries",
            i + 1,
            row.len()
        );
        for (offset, &want) in row.iter().enumerate() {
            let j = i + 1 + offset;
            let got = hamming(&probes[i], &probes[j]).map_err(|e| e.to_string())?;
            ensure!(
                got == want,
                "d(p{}, p{}) = {got}, table says {want}",
                i + 1,
                j + 1
            );
            let packed = sp.distance(ProbeId::new(i as u32 + 1), ProbeId::new(j as u32 + 1));
            ensure!(
                packed == want,
                "packed d(p{}, p{}) = {packed}, table says {want}",
                i + 1,
                j + 1
            );
            checked += 1;
        }
    }
    ensure!(checked == 120, "checked {checked} pairs");
    Ok(format!("{checked}/120 distances equal"))
}

fn example_ground_truth() -> Verdict {
    let sp = read_probes_file(fixture("example16.probes")).map_err(|e| e.to_string())?;
    let pl = read_placement_file(fixture("fig3.placement"), &sp).map_err(|e| e.to_string())?;
    ensure!(
        pl == Placement::row_major(4),
        "fixture placement is not row-major"
    );
    let cost = total_cost(&sp, &pl);
    let edges = neighbor_pair_count(4) as i64;
    ensure!(cost == 85, "total cost {cost}");
    ensure!(edges == 24, "{edges} neighbor pairs");
    let hundredths = 100 * cost / edges;
    ensure!(hundredths == 354, "average displays as {hundredths}/100");
    let out = blmp(&[
        "cost",
        "--instance",
        path_str(&fixture("example16.probes")),
        "--placement",
        path_str(&fixture("fig3.placement")),
    ]);
    ensure!(
        out.stdout == b"85\n",
        "cost subcommand printed {:?}",
        String::from_utf8_lossy(&out.stdout)
    );
    Ok(format!("COST={cost}, average={cost}/{edges} (3.54)"))
}

#[rustfmt::skip]
const GOLDEN_PAIRS: [(i64, i64); 15] = [
    (16, 17), (22, 20), (14, 15),
    (18, 18), (22, 18), (19, 24),
    (19, 24), (20, 20), (20, 23),
    (20, 22), (21, 24), (12, 14),
    (16, 17), (18, 22), (18, 19),
];
const GOLDEN_COSTS: [i64; 5] = [85, 83, 83, 83, 84];

fn field(line: &str, key: &str) -> Option<String> {
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(key))
        .map(str::to_string)
}

fn golden_replay() -> Verdict {
    // Through the binary, with the shipped script file.
    let out = blmp(&[
        "replay",
        "--script",
        path_str(&fixture("example_replay.json")),
        "--instance",
        path_str(&fixture("example16.probes")),
    ]);
    ensure!(
        out.status.code() == Some(0),
        "replay exited with {:?}",
        out.status.code()
    );
    let text = String::from_utf8_lossy(&out.stdout);
    let pairs: Vec<(i64, i64)> = text
        .lines()
        .filter_map(|l| {
            let local = field(l, "localcost=")?.parse().ok()?;
            let fresh = field(l, "newlocalcost=")?.parse().ok()?;
            Some((local, fresh))
        })
        .collect();
    ensure!(pairs == GOLDEN_PAIRS, "trace pairs {pairs:?}");
    let state_lines: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("start:") || l.contains(" done:"))
        .collect();
    let costs: Vec<i64> = state_lines
        .iter()
        .filter_map(|l| field(l, "COST=")?.parse().ok())
        .collect();
    ensure!(costs == GOLDEN_COSTS, "COST trajectory {costs:?}");
    let averages: Vec<String> = state_lines
        .iter()
        .filter_map(|l| {
            l.split_whitespace()
                .find(|w| w.starts_with('('))
                .map(str::to_string)
        })
        .collect();
    let want: Vec<String> = GOLDEN_COSTS.iter().map(|c| format!("({c}/24)")).collect();
    ensure!(averages == want, "average trajectory {averages:?}");
    let shown: Vec<String> = state_lines
        .iter()
        .filter_map(|l| field(l, "average="))
        .collect();
    ensure!(
        shown == ["3.54", "3.45", "3.45", "3.45", "3.50"],
        "displayed averages {shown:?}"
    );
    ensure!(
        text.lines().last() == Some("bestCOST=83"),
        "last line {:?}",
        text.lines().last()
    );

    // Through the library, checking exact rationals.
    let mut rec = Recorder::default();
    let outcome = Engine::new(&example_probes(), example_params())
        .script(example_script())
        .verify(true)
        .run(Variant::Alg1, &mut rec)
        .map_err(|e| e.to_string())?;
    let lib_pairs: Vec<(i64, i64)> = rec.local_cost_pairs();
    ensure!(lib_pairs == GOLDEN_PAIRS, "library pairs {lib_pairs:?}");
    for (r, c) in rec.rounds.iter().zip(&GOLDEN_COSTS[1..]) {
        ensure!(r.cost == *c, "round {} COST {}", r.round, r.cost);
        let avg = r.average.ok_or("missing average")?;
        ensure!(avg * 24 == (*c).into(), "round {} average {avg}", r.round);
    }
    ensure!(outcome.best_cost == 83, "bestCOST {}", outcome.best_cost);
    Ok("15/15 pairs, COST 85>83>83>83>84, averages c/24, bestCOST=83".into())
}

fn incremental_fuzz() -> Verdict {
    let big = generate_probeset(20, 25, 2024).map_err(|e| e.to_string())?;
    let r = verify_incremental(&big, 2024, 10_000);
    ensure!(
        r.passed && r.first_divergence.is_none(),
        "dim=20 diverged: {:?}",
        r.first_divergence
    );
    ensure!(
        r.swaps_checked == 10_000,
        "dim=20 checked {}",
        r.swaps_checked
    );
    ensure!(r.adjacent_swaps > 0, "dim=20 drew no adjacent pairs");
    let small = example_probes().prefix(2).map_err(|e| e.to_string())?;
    let s = verify_incremental(&small, 7, 1_000);
    ensure!(
        s.passed && s.first_divergence.is_none(),
        "dim=2 diverged: {:?}",
        s.first_divergence
    );
    ensure!(
        s.swaps_checked == 1_000,
        "dim=2 checked {}",
        s.swaps_checked
    );
    let cli = blmp(&[
        "verify",
        "--dim",
        "20",
        "--probelength",
        "25",
        "--swaps",
        "10000",
        "--seed",
        "5",
    ]);
    ensure!(
        cli.status.code() == Some(0),
        "verify subcommand exited {:?}",
        cli.status.code()
    );
    Ok(format!(
        "dim=20: 10000 swaps ({} adjacent); dim=2: 1000 swaps ({} adjacent); all exact",
        r.adjacent_swaps, s.adjacent_swaps
    ))
}

fn oracle_floor() -> Verdict {
    let mut hits = 0;
    let mut ratios = Vec::new();
    for seed in 1..=20u64 {
        let sp = generate_probeset(3, 5, seed).map_err(|e| e.to_string())?;
        let opt = brute_force_optimum(&sp)
            .map_err(|e| e.to_string())?
            .optimum_cost;
        let params = SearchParams {
            workers: 4,
            budget: RoundBudget::OuterRounds(5_000),
            max_cost: 20,
            seed,
            ..SearchParams::default()
        };
        for algo in Algorithm::ALL {
            let out = solve(&sp, algo, &params, &SolveOptions::default(), &mut ())
                .map_err(|e| e.to_string())?;
            ensure!(
                out.best_cost == total_cost(&sp, &out.best),
                "{algo} on instance {seed}: reported cost is stale"
            );
            ensure!(
                out.best_cost >= opt,
                "{algo} on instance {seed}: {} below optimum {opt}",
                out.best_cost
            );
            if algo == Algorithm::Alg2 {
                hits += usize::from(out.best_cost == opt);
                ratios.push(out.best_cost as f64 / opt.max(1) as f64);
            }
        }
    }
    ensure!(
        hits >= 15,
        "ALG2 reached the optimum on {hits}/20 instances"
    );
    Ok(format!(
        "no algorithm below optimum on 20 instances; ALG2 optimal on {hits}/20"
    ))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inst = dir.path().join("d8.probes");
    let gen = blmp(&[
        "gen",
        "--dim",
        "8",
        "--probelength",
        "25",
        "--seed",
        "31",
        "-o",
        path_str(&inst),
    ]);
    ensure!(gen.status.code() == Some(0), "gen failed");
    let mut rows = 0;
    for algo in Algorithm::ALL {
        let mut seen: Option<(Vec<u8>, Vec<u8>)> = None;
        for attempt in 0..2 {
            let pl = dir
                .path()
                .join(format!("{}-{attempt}.placement", algo.name()));
            let out = blmp(&[
                "run",
                "--algo",
                algo.name(),
                "--instance",
                path_str(&inst),
                "--seed",
                "17",
                "--workers",
                "4",
                "--rounds",
                "1500",
                "-o",
                path_str(&pl),
            ]);
            ensure!(
                out.status.code() == Some(0),
                "{algo} run failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let placement = std::fs::read(&pl).map_err(|e| e.to_string())?;
            match &seen {
                None => seen = Some((out.stdout, placement)),
                Some((csv, bytes)) => {
                    ensure!(*csv == out.stdout, "{algo}: CSV rows differ between runs");
                    ensure!(
                        *bytes == placement,
                        "{algo}: placement files differ between runs"
                    );
                }
            }
        }
        rows += 1;
    }

    let sp = read_probes_file(&inst).map_err(|e| e.to_string())?;
    let mut sweeps = 0;
    for k in [1, 2, 4, 8] {
        let params = SearchParams {
            workers: k,
            budget: RoundBudget::OuterRounds(400),
            pr: 0.01,
            seed: 100 + k as u64,
            ..SearchParams::default()
        };
        for variant in [None, Some(Variant::Alg1), Some(Variant::Alg2)] {
            let engine = Engine::new(&sp, params.clone()).verify(true);
            let out = match variant {
                None => engine.run_ls_par(&mut ()),
                Some(v) => engine.run(v, &mut ()),
            }
            .map_err(|e| format!("k={k} {variant:?}: {e}"))?;
            ensure!(
                out.best_cost == total_cost(&sp, &out.best),
                "k={k}: stale best cost"
            );
            sweeps += 1;
        }
    }
    let params = SearchParams {
        workers: 2,
        budget: RoundBudget::OuterRounds(60),
        seed: 3,
        ..SearchParams::default()
    };
    let seq = Engine::new(&sp, params.clone())
        .run(Variant::Alg2, &mut ())
        .map_err(|e| e.to_string())?;
    let thr = Engine::new(&sp, params)
        .execution(Execution::Threads)
        .verify(true)
        .run(Variant::Alg2, &mut ())
        .map_err(|e| e.to_string())?;
    let counters = |o: &blmp::RunOutcome| {
        (
            o.best_cost,
            o.final_cost,
            o.stats.rounds,
            o.stats.trials,
            o.stats.improving,
            o.stats.uphill,
        )
    };
    ensure!(
        seq.best == thr.best && counters(&seq) == counters(&thr),
        "threaded run differs from sequential reference"
    );
    Ok(format!(
        "{rows} algorithms byte-identical across reruns; replication held in {sweeps} audited runs (k=1,2,4,8)"
    ))
}

fn epitaxial_direction() -> Verdict {
    const INSTANCES: usize = 10;
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    let threads = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(INSTANCES);
    let failure: Mutex<Option<String>> = Mutex::new(None);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= INSTANCES {
                    break;
                }
                let seed = 1000 + i as u64;
                let run = || -> Result<(i64, i64, u64), String> {
                    let sp = generate_probeset(16, 25, seed).map_err(|e| e.to_string())?;
                    let epi = total_cost(&sp, &epitaxial_place(&sp, seed));
                    let params = SearchParams {
                        workers: 8,
                        budget: RoundBudget::WallClockSeconds(60.0),
                        seed,
                        ..SearchParams::default()
                    };
                    let out = Engine::new(&sp, params)
                        .round_cap(200_000)
                        .run(Variant::Alg2, &mut ())
                        .map_err(|e| e.to_string())?;
                    Ok((epi, out.best_cost, out.stats.rounds))
                };
                match run() {
                    Ok(r) => results.lock().unwrap().push((seed, r)),
                    Err(e) => *failure.lock().unwrap() = Some(e),
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let mut results = results.into_inner().unwrap();
    results.sort();
    let wins = results
        .iter()
        .filter(|(_, (epi, alg2, _))| alg2 <= epi)
        .count();
    let detail: Vec<String> = results
        .iter()
        .map(|(seed, (epi, alg2, rounds))| format!("{seed}:{alg2}/{epi}@{rounds}"))
        .collect();
    ensure!(
        wins >= 8,
        "ALG2 <= epitaxial on {wins}/10 [{}]",
        detail.join(" ")
    );
    Ok(format!(
        "ALG2 <= epitaxial on {wins}/10 [alg2/epitaxial@rounds {}]",
        detail.join(" ")
    ))
}

fn check_alg_run(
    variant: Variant,
    dim: usize,
    probe_seed: u64,
    params: SearchParams,
) -> Result<(), TestCaseError> {
    let sp = generate_probeset(dim, 10, probe_seed).unwrap();
    let mut rec = Recorder::without_trials();
    let out = Engine::new(&sp, params.clone())
        .verify(true)
        .run(variant, &mut rec)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let grid: Vec<ProbeId> = out.best.cells().to_vec();
    prop_assert!(
        Placement::from_grid(dim, grid).is_ok(),
        "best placement is not a permutation"
    );
    prop_assert_eq!(out.best_cost, total_cost(&sp, &out.best));

    let mut prev_best: Option<i64> = None;
    let (mut sa, mut myub) = (0u64, 0i64);
    for r in &rec.rounds {
        prop_assert!(r.best_cost <= r.cost);
        if let Some(b) = prev_best {
            prop_assert!(r.best_cost <= b, "bestCOST rose in round {}", r.round);
            prop_assert_eq!(r.best_cost, b.min(r.cost));
        }
        prev_best = Some(r.best_cost);
        sa += 1;
        if myub == 0 && sa == params.winlength1 {
            sa = 0;
            myub = params.max_cost1;
        } else if myub == params.max_cost1 && myub != 0 && sa == params.winlength2 {
            sa = 0;
            myub = 0;
        }
        prop_assert_eq!(
            (r.sa, r.myub),
            (sa, myub),
            "myub window in round {}",
            r.round
        );
    }
    for s in rec
        .syncs
        .iter()
        .filter(|s| s.phase == Phase::Uphill && s.source.is_some())
    {
        prop_assert!(
            s.cost <= s.best_cost + params.max_cost2,
            "uphill to {} over {} + {}",
            s.cost,
            s.best_cost,
            params.max_cost2
        );
    }
    Ok(())
}

fn structural_invariants() -> Verdict {
    let mut runner = TestRunner::new(Config {
        cases: 96,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        prop_oneof![Just(Variant::Alg1), Just(Variant::Alg2)],
        2usize..=6,
        any::<u64>(),
        1usize..=5,
        1u64..=8,
        0i64..=30,
        0i64..=8,
        0i64..=8,
        1u64..=8,
        1u64..=8,
        any::<u64>(),
    );
    runner
        .run(
            &strategy,
            |(variant, dim, probe_seed, workers, t1, max_cost, c1, c2, w1, w2, seed)| {
                let params = SearchParams {
                    workers,
                    budget: RoundBudget::OuterRounds(150),
                    max_trials1: t1,
                    max_trials2: t1 * 10,
                    max_cost,
                    max_cost1: c1,
                    max_cost2: c2,
                    winlength1: w1,
                    winlength2: w2,
                    seed,
                    ..SearchParams::default()
                };
                check_alg_run(variant, dim, probe_seed, params)
            },
        )
        .map_err(|e| format!("ALG1/ALG2 property: {e}"))?;

    let mut runner = TestRunner::new(Config {
        cases: 48,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(
            &(
                2usize..=6,
                any::<u64>(),
                1usize..=5,
                0.0f64..=1.0,
                any::<u64>(),
            ),
            |(dim, probe_seed, workers, pr, seed)| {
                let sp = generate_probeset(dim, 10, probe_seed).unwrap();
                let params = SearchParams {
                    workers,
                    budget: RoundBudget::OuterRounds(400),
                    pr,
                    seed,
                    ..SearchParams::default()
                };
                let mut rec = Recorder::without_trials();
                let out = Engine::new(&sp, params)
                    .verify(true)
                    .run_ls_par(&mut rec)
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert!(Placement::from_grid(dim, out.best.cells().to_vec()).is_ok());
                let mut ls = Recorder::without_trials();
                let single = ls_run_observed(
                    &sp,
                    &LsParams {
                        budget: RoundBudget::OuterRounds(400),
                        pr,
                        seed,
                    },
                    &mut ls,
                    true,
                )
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert!(Placement::from_grid(dim, single.best.cells().to_vec()).is_ok());
                for rounds in [&rec.rounds, &ls.rounds] {
                    for w in rounds.windows(2) {
                        prop_assert_eq!(w[1].best_cost, w[0].best_cost.min(w[1].cost));
                    }
                }
                Ok(())
            },
        )
        .map_err(|e| format!("LS/LS-Par property: {e}"))?;
    Ok("144 randomized runs: permutation kept, bestCOST running minimum, myub windows exact, uphill within bestCOST+MaxCost2".into())
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 8] = [
    (1, "distance table", distance_table),
    (2, "example cost and average", example_ground_truth),
    (3, "golden trace replay", golden_replay),
    (4, "incremental exactness fuzz", incremental_fuzz),
    (5, "oracle floor and convergence", oracle_floor),
    (6, "determinism and replication", determinism),
    (7, "ALG2 versus epitaxial at dim=16", epitaxial_direction),
    (8, "structural invariants", structural_invariants),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    if std::env::args().any(|a| a == "--list") {
        for (id, name, _) in CRITERIA {
            println!("criterion {id}: {name}: test");
        }
        return;
    }
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {id} PASS  {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id} FAIL  {name} ({secs:.1}s): {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
