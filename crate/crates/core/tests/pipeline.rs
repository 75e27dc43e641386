//! Run log to report, end to end.

mod support;

use std::sync::Arc;
use std::thread;

use cybersim_core::analytics::{analyze, best_per_player, cohort_summary};
use cybersim_core::persistence::{load_cohorts, load_cohorts_from_path, read_entries, RunLog};
use cybersim_core::session::SessionState;
use cybersim_core::{DecisionVector, Level, SimConfig};

use support::table1::{expected_best, log_text, player_id, shapes, EXPECTED};

#[test]
fn table_one_counts_medians_and_exclusions() {
    let loaded = load_cohorts(log_text().as_bytes()).unwrap();
    assert_eq!(loaded.cohorts.len(), 2);
    let report = analyze(&loaded.cohorts).unwrap();
    let text = report.render_text();
    for (exp, summary) in EXPECTED.iter().zip(&report.summaries) {
        assert_eq!(summary.label, exp.label);
        assert_eq!(summary.n_players, exp.players);
        assert_eq!(summary.level_one.complete_runs, exp.complete_one);
        assert_eq!(summary.level_two.complete_runs, exp.complete_two);
        assert_eq!(summary.level_one.median_runs_per_player, exp.median_one);
        assert_eq!(summary.level_two.median_runs_per_player, exp.median_two);
        assert_eq!(summary.total_runs, exp.total_runs);
        assert_eq!(summary.incomplete_runs, exp.incomplete);
        let line = format!(
            "{} of {} runs excluded ({})",
            exp.incomplete, exp.total_runs, exp.incomplete_pct
        );
        assert!(text.contains(&line), "missing {line:?} in\n{text}");
    }
    for (exp, excl) in EXPECTED.iter().zip(&loaded.exclusions) {
        assert_eq!(excl.practice_skipped, exp.players);
        assert_eq!(excl.incomplete_runs, exp.incomplete);
    }
}

#[test]
fn table_one_best_performance() {
    let loaded = load_cohorts(log_text().as_bytes()).unwrap();
    for (shape, cohort) in shapes().iter().zip(&loaded.cohorts) {
        for (level, counts) in [(Level::One, &shape.level_one), (Level::Two, &shape.level_two)] {
            let scores = best_per_player(cohort, level);
            assert_eq!(scores.len(), counts.len());
            for (i, &n) in counts.iter().enumerate() {
                let s = scores
                    .iter()
                    .find(|s| s.player_id == player_id(shape.label, i))
                    .unwrap();
                assert_eq!(s.value, expected_best(i, n, level), "{} level {level}", s.player_id);
                assert_eq!(s.run_count, n);
            }
        }
    }
}

#[test]
fn concurrent_appends_stay_whole() {
    let dir = tempfile::tempdir().unwrap();
    let log = Arc::new(RunLog::open(dir.path().join("runs.jsonl")).unwrap());
    let cfg = SimConfig::default();
    let handles: Vec<_> = ["a", "b", "c", "d"]
        .into_iter()
        .enumerate()
        .map(|(k, player)| {
            let log = Arc::clone(&log);
            let cfg = cfg.clone();
            thread::spawn(move || {
                let level = if k % 2 == 0 { Level::One } else { Level::Two };
                let mut s = SessionState::new(player, level, k as u64, false, &cfg).unwrap();
                for run in 0..10 {
                    s.set_decisions(DecisionVector::new(0.01 * (run % 5) as f64, 0.01, 0.01))
                        .unwrap();
                    for _ in 0..5 {
                        if let Some(rec) = s.advance().unwrap().completed_run {
                            log.append_run(&rec, "cohort", false).unwrap();
                        }
                    }
                    s.reset_run().unwrap();
                }
                s.completed_runs().to_vec()
            })
        })
        .collect();
    let mut expected: Vec<_> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();

    let text = std::fs::read_to_string(log.path()).unwrap();
    let mut got: Vec<_> = read_entries(&text).unwrap().into_iter().map(|e| e.record).collect();
    let key = |r: &cybersim_core::RunRecord| (r.player_id.clone(), r.run_index);
    got.sort_by_key(key);
    expected.sort_by_key(key);
    assert_eq!(got, expected);

    let cohorts = load_cohorts_from_path(log.path()).unwrap();
    let summary = cohort_summary(cohorts.get("cohort").unwrap()).unwrap();
    assert_eq!(summary.n_players, 4);
    assert_eq!(summary.level_one.complete_runs + summary.level_two.complete_runs, 40);
}
