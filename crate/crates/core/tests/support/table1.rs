//! Synthetic two-cohort log with the shape of the experiment's data summary:
//! 38 experienced players (431 / 361 complete runs, medians 9 / 8.5, 129
//! incomplete) and 29 novices (342 / 345, medians 12 / 12, 76 incomplete).
//!
//! Every value is chosen so the expected outputs follow by hand:
//! complete run `j` of player `i` earns `base + 0.25 i + 16 j`, hence the best
//! is `base + 0.25 i + 16 n`. Incomplete and practice runs earn far more, so
//! any leak into the best-performance extraction is visible.

#![allow(dead_code)]

use cybersim_core::persistence::RunLogEntry;
use cybersim_core::session::RunRecord;
use cybersim_core::{AttackScenario, DecisionVector, Level};

pub struct CohortShape {
    pub label: &'static str,
    pub level_one: Vec<usize>,
    pub level_two: Vec<usize>,
    pub incomplete: usize,
}

pub struct Expected {
    pub label: &'static str,
    pub players: usize,
    pub complete_one: usize,
    pub complete_two: usize,
    pub median_one: f64,
    pub median_two: f64,
    pub total_runs: usize,
    pub incomplete: usize,
    /// As printed in the report.
    pub incomplete_pct: &'static str,
}

pub const EXPECTED: [Expected; 2] = [
    Expected {
        label: "experienced",
        players: 38,
        complete_one: 431,
        complete_two: 361,
        median_one: 9.0,
        median_two: 8.5,
        total_runs: 921,
        incomplete: 129,
        incomplete_pct: "14.0%",
    },
    Expected {
        label: "novice",
        players: 29,
        complete_one: 342,
        complete_two: 345,
        median_one: 12.0,
        median_two: 12.0,
        total_runs: 763,
        incomplete: 76,
        incomplete_pct: "10.0%",
    },
];

pub fn shapes() -> [CohortShape; 2] {
    // 38 x 9 = 342; the top 18 players take the remaining 89 (17 x 5 + 4),
    // leaving the 19th and 20th values at 9.
    let mut e1 = vec![9usize; 38];
    for (k, c) in e1.iter_mut().enumerate().skip(20) {
        *c += if k == 20 { 4 } else { 5 };
    }
    // 19 players at 8 and 19 at 9 give 323 and median 8.5; 38 more go to the
    // top 18 (2 each, plus 2 extra on the last).
    let mut e2: Vec<usize> = (0..38).map(|k| if k < 19 { 8 } else { 9 }).collect();
    for (k, c) in e2.iter_mut().enumerate().skip(20) {
        *c += if k == 37 { 4 } else { 2 };
    }
    // 29 x 12 = 348; trimming the first six (or three) keeps the 15th at 12.
    let n1: Vec<usize> = (0..29).map(|k| if k < 6 { 11 } else { 12 }).collect();
    let n2: Vec<usize> = (0..29).map(|k| if k < 3 { 11 } else { 12 }).collect();
    [
        CohortShape {
            label: "experienced",
            level_one: e1,
            level_two: e2,
            incomplete: 129,
        },
        CohortShape {
            label: "novice",
            level_one: n1,
            level_two: n2,
            incomplete: 76,
        },
    ]
}

pub fn player_id(label: &str, i: usize) -> String {
    format!("{}{:02}", &label[..1], i + 1)
}

fn base(level: Level) -> f64 {
    match level {
        Level::One => 2000.0,
        Level::Two => 1500.0,
    }
}

/// Best complete-run profit of player `i` with `n` complete runs.
pub fn expected_best(i: usize, n: usize, level: Level) -> f64 {
    base(level) + 0.25 * i as f64 + 16.0 * n as f64
}

fn record(player: String, level: Level, run_index: u32, profit: f64, complete: bool) -> RunRecord {
    let months = if complete { 60 } else { 30 };
    let mut monthly = vec![0.0; months];
    monthly[months - 1] = profit;
    RunRecord {
        player_id: player,
        level,
        run_index,
        decision_history: vec![DecisionVector::ZERO; months.div_ceil(12)],
        scenario: AttackScenario::none(),
        accumulated_profit: monthly.clone(),
        monthly_profit: monthly,
        complete,
        seed: run_index as u64,
    }
}

/// The log as JSON lines, interleaving cohorts and levels, plus one practice
/// run per player.
pub fn log_text() -> String {
    let mut entries = Vec::new();
    let mut clock = 1_000u64;
    for shape in shapes() {
        let players = shape.level_one.len();
        let slots = 2 * players;
        for i in 0..players {
            for (s, level, counts) in [(0, Level::One, &shape.level_one), (1, Level::Two, &shape.level_two)] {
                let slot = 2 * i + s;
                let incomplete = shape.incomplete / slots + usize::from(slot < shape.incomplete % slots);
                let n = counts[i];
                let mut run_index = 0u32;
                // Complete runs in descending value order, so the best is logged first.
                for j in (1..=n).rev() {
                    run_index += 1;
                    clock += 1;
                    let v = base(level) + 0.25 * i as f64 + 16.0 * j as f64;
                    let rec = record(player_id(shape.label, i), level, run_index, v, true);
                    entries.push(RunLogEntry::new(rec, shape.label, false, clock));
                }
                for _ in 0..incomplete {
                    run_index += 1;
                    clock += 1;
                    let rec = record(player_id(shape.label, i), level, run_index, 9_000.0, false);
                    entries.push(RunLogEntry::new(rec, shape.label, false, clock));
                }
            }
            clock += 1;
            let practice = record(player_id(shape.label, i), Level::One, 0, 50_000.0, true);
            entries.push(RunLogEntry::new(practice, shape.label, true, clock));
        }
    }
    entries.iter().map(|e| e.to_line().unwrap()).collect()
}
