//! Experiment analysis over logged runs.
//!
//! Incomplete runs stay in the cohort for exclusion reporting, but no statistic
//! reads their profit.

mod stats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use stats::{
    learning_slope, mean, median, pearson_with_p, performance_histogram, variance, welch_t_test, Histogram, StatResult,
};

use crate::error::{Error, Result};
use crate::scenario::Level;
use crate::session::RunRecord;

/// A run as stored in the log, with the time it was logged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedRun {
    pub record: RunRecord,
    pub logged_at_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlayerRuns {
    pub level_one: Vec<LoggedRun>,
    pub level_two: Vec<LoggedRun>,
}

impl PlayerRuns {
    pub fn level(&self, level: Level) -> &[LoggedRun] {
        match level {
            Level::One => &self.level_one,
            Level::Two => &self.level_two,
        }
    }

    pub fn push(&mut self, run: LoggedRun) {
        match run.record.level {
            Level::One => self.level_one.push(run),
            Level::Two => self.level_two.push(run),
        }
    }

    /// Complete runs at `level` in play order.
    pub fn complete(&self, level: Level) -> Vec<&LoggedRun> {
        let mut runs: Vec<&LoggedRun> = self.level(level).iter().filter(|r| r.record.complete).collect();
        runs.sort_by_key(|r| (r.record.run_index, r.logged_at_ms));
        runs
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cohort {
    pub label: String,
    pub players: BTreeMap<String, PlayerRuns>,
}

impl Cohort {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            players: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, run: LoggedRun) {
        self.players.entry(run.record.player_id.clone()).or_default().push(run);
    }

    fn all_runs(&self) -> impl Iterator<Item = &LoggedRun> {
        self.players
            .values()
            .flat_map(|p| p.level_one.iter().chain(p.level_two.iter()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    /// Players with at least one logged run at this level.
    pub players: usize,
    pub complete_runs: usize,
    pub incomplete_runs: usize,
    /// Median count of complete runs per player.
    pub median_runs_per_player: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub label: String,
    pub n_players: usize,
    pub level_one: LevelSummary,
    pub level_two: LevelSummary,
    pub total_runs: usize,
    pub incomplete_runs: usize,
    /// Share of all logged runs that were incomplete, in percent.
    pub incomplete_pct: f64,
}

impl CohortSummary {
    pub fn level(&self, level: Level) -> &LevelSummary {
        match level {
            Level::One => &self.level_one,
            Level::Two => &self.level_two,
        }
    }
}

pub fn cohort_summary(cohort: &Cohort) -> Result<CohortSummary> {
    if cohort.players.is_empty() {
        return Err(Error::Stats(format!("cohort {:?} has no players", cohort.label)));
    }
    let level = |level: Level| {
        let mut counts = Vec::new();
        let mut incomplete = 0;
        for runs in cohort.players.values() {
            let logged = runs.level(level);
            if logged.is_empty() {
                continue;
            }
            let complete = logged.iter().filter(|r| r.record.complete).count();
            incomplete += logged.len() - complete;
            counts.push(complete as f64);
        }
        LevelSummary {
            players: counts.len(),
            complete_runs: counts.iter().sum::<f64>() as usize,
            incomplete_runs: incomplete,
            median_runs_per_player: median(&counts).unwrap_or(0.0),
        }
    };
    let (one, two) = (level(Level::One), level(Level::Two));
    let total_runs = cohort.all_runs().count();
    let incomplete_runs = one.incomplete_runs + two.incomplete_runs;
    Ok(CohortSummary {
        label: cohort.label.clone(),
        n_players: cohort.players.len(),
        level_one: one,
        level_two: two,
        total_runs,
        incomplete_runs,
        incomplete_pct: if total_runs == 0 {
            0.0
        } else {
            100.0 * incomplete_runs as f64 / total_runs as f64
        },
    })
}

/// A player's best complete run at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerScore {
    pub player_id: String,
    pub value: f64,
    /// When the best run was logged; breaks ranking ties.
    pub timestamp_ms: u64,
    /// Number of complete runs at this level.
    pub run_count: usize,
}

/// Best performance of every player with at least one complete run at `level`,
/// ordered by player id.
pub fn best_per_player(cohort: &Cohort, level: Level) -> Vec<PlayerScore> {
    cohort
        .players
        .iter()
        .filter_map(|(id, runs)| {
            let complete = runs.complete(level);
            let best = complete.iter().copied().reduce(|best, r| {
                let (v, bv) = (r.record.final_profit(), best.record.final_profit());
                if v > bv || (v == bv && r.logged_at_ms < best.logged_at_ms) {
                    r
                } else {
                    best
                }
            })?;
            Some(PlayerScore {
                player_id: id.clone(),
                value: best.record.final_profit(),
                timestamp_ms: best.logged_at_ms,
                run_count: complete.len(),
            })
        })
        .collect()
}

/// Learning slope of every player with at least two complete runs at `level`.
pub fn player_learning_slopes(cohort: &Cohort, level: Level) -> Vec<(String, f64)> {
    cohort
        .players
        .iter()
        .filter_map(|(id, runs)| {
            let profits: Vec<f64> = runs.complete(level).iter().map(|r| r.record.final_profit()).collect();
            learning_slope(&profits).ok().map(|s| (id.clone(), s))
        })
        .collect()
}

/// Correlation between a player's number of complete runs and their best run.
pub fn runs_vs_best(cohort: &Cohort, level: Level) -> Result<StatResult> {
    let scores = best_per_player(cohort, level);
    let counts: Vec<f64> = scores.iter().map(|s| s.run_count as f64).collect();
    let bests: Vec<f64> = scores.iter().map(|s| s.value).collect();
    pearson_with_p(&counts, &bests)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankChange {
    pub player_id: String,
    pub rank_one: usize,
    pub rank_two: usize,
    /// `(rank_two - rank_one) / n * 100`; positive means the player fell.
    pub change_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTransition {
    /// Ordered by level-one rank.
    pub changes: Vec<RankChange>,
    pub top_k: usize,
    /// Mean change over the `top_k` best level-one players.
    pub top_k_mean_change_pct: f64,
}

/// Ranks 1..n, best first; equal values go to the earlier timestamp, then player id.
fn ranks(scores: &[PlayerScore]) -> BTreeMap<&str, usize> {
    let mut order: Vec<&PlayerScore> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then(a.timestamp_ms.cmp(&b.timestamp_ms))
            .then(a.player_id.cmp(&b.player_id))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(k, s)| (s.player_id.as_str(), k + 1))
        .collect()
}

pub fn rank_transition(level_one: &[PlayerScore], level_two: &[PlayerScore], top_k: usize) -> Result<RankTransition> {
    fn ids(s: &[PlayerScore]) -> BTreeSet<&str> {
        s.iter().map(|p| p.player_id.as_str()).collect()
    }
    if ids(level_one) != ids(level_two) || level_one.len() != level_two.len() {
        return Err(Error::Stats("both levels must rank the same players".into()));
    }
    if level_one.is_empty() {
        return Err(Error::Stats("no players to rank".into()));
    }
    let n = level_one.len() as f64;
    let (r1, r2) = (ranks(level_one), ranks(level_two));
    let mut changes: Vec<RankChange> = r1
        .iter()
        .map(|(id, &rank_one)| {
            let rank_two = r2[id];
            RankChange {
                player_id: id.to_string(),
                rank_one,
                rank_two,
                change_pct: (rank_two as f64 - rank_one as f64) / n * 100.0,
            }
        })
        .collect();
    changes.sort_by_key(|c| c.rank_one);
    let k = top_k.min(changes.len());
    let top_k_mean_change_pct = if k == 0 {
        0.0
    } else {
        changes[..k].iter().map(|c| c.change_pct).sum::<f64>() / k as f64
    };
    Ok(RankTransition {
        changes,
        top_k: k,
        top_k_mean_change_pct,
    })
}

/// The numbers behind the summary tables and figures for a set of cohorts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub summaries: Vec<CohortSummary>,
    /// (cohort, level, correlation of run count with best performance)
    pub correlations: Vec<(String, Level, Option<StatResult>)>,
    /// Welch test between the first two cohorts' best performances, per level.
    pub comparisons: Vec<(Level, Option<StatResult>)>,
    pub rank_transitions: Vec<(String, Option<RankTransition>)>,
}

pub const DEFAULT_TOP_K: usize = 6;

pub fn analyze(cohorts: &[Cohort]) -> Result<AnalysisReport> {
    let summaries = cohorts.iter().map(cohort_summary).collect::<Result<Vec<_>>>()?;
    let mut correlations = Vec::new();
    for cohort in cohorts {
        for level in [Level::One, Level::Two] {
            correlations.push((cohort.label.clone(), level, runs_vs_best(cohort, level).ok()));
        }
    }
    let comparisons = match cohorts {
        [a, b, ..] => [Level::One, Level::Two]
            .into_iter()
            .map(|level| {
                let va: Vec<f64> = best_per_player(a, level).iter().map(|s| s.value).collect();
                let vb: Vec<f64> = best_per_player(b, level).iter().map(|s| s.value).collect();
                (level, welch_t_test(&va, &vb).ok())
            })
            .collect(),
        _ => Vec::new(),
    };
    let rank_transitions = cohorts
        .iter()
        .map(|c| {
            let mut one = best_per_player(c, Level::One);
            let mut two = best_per_player(c, Level::Two);
            let both: BTreeSet<String> = one
                .iter()
                .map(|s| s.player_id.clone())
                .filter(|id| two.iter().any(|t| &t.player_id == id))
                .collect();
            one.retain(|s| both.contains(&s.player_id));
            two.retain(|s| both.contains(&s.player_id));
            (c.label.clone(), rank_transition(&one, &two, DEFAULT_TOP_K).ok())
        })
        .collect();
    Ok(AnalysisReport {
        summaries,
        correlations,
        comparisons,
        rank_transitions,
    })
}

fn fmt_stat(s: &Option<StatResult>) -> String {
    match s {
        Some(s) => format!(
            "{:.6} (p = {:.6}, df = {:.6}){}",
            s.statistic,
            s.p_value,
            s.degrees_of_freedom,
            if s.significant_at_5pct { " *" } else { "" }
        ),
        None => "n/a".to_string(),
    }
}

impl AnalysisReport {
    /// Plain-text report: data summary, exclusions, correlations, group
    /// comparisons and ranking changes.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "DATA SUMMARY");
        let _ = writeln!(
            out,
            "{:<16} {:>8} {:>10} {:>10} {:>12} {:>12}",
            "cohort", "players", "runs L1", "runs L2", "median L1", "median L2"
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<16} {:>8} {:>10} {:>10} {:>12.1} {:>12.1}",
                s.label,
                s.n_players,
                s.level_one.complete_runs,
                s.level_two.complete_runs,
                s.level_one.median_runs_per_player,
                s.level_two.median_runs_per_player
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "EXCLUSIONS (incomplete runs)");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{:<16} {} of {} runs excluded ({:.1}%)",
                s.label, s.incomplete_runs, s.total_runs, s.incomplete_pct
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "CORRELATION: number of runs vs best accumulated profit (* p < 0.05)"
        );
        for (label, level, stat) in &self.correlations {
            let _ = writeln!(out, "{label:<16} level {level}: r = {}", fmt_stat(stat));
        }
        if !self.comparisons.is_empty() {
            let _ = writeln!(out);
            let a = &self.summaries[0].label;
            let b = &self.summaries[1].label;
            let _ = writeln!(out, "WELCH T-TEST: best performance, {a} vs {b}");
            for (level, stat) in &self.comparisons {
                let _ = writeln!(out, "level {level}: t = {}", fmt_stat(stat));
            }
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "RANKING CHANGE level one -> level two (positive = fell)");
        for (label, rt) in &self.rank_transitions {
            match rt {
                Some(rt) => {
                    let v = rt.top_k_mean_change_pct;
                    let direction = if v > 0.0 {
                        "decrease in ranking"
                    } else if v < 0.0 {
                        "increase in ranking"
                    } else {
                        "no change"
                    };
                    let _ = writeln!(out, "{label:<16} top {} mean change {v:+.6}% ({direction})", rt.top_k);
                }
                None => {
                    let _ = writeln!(out, "{label:<16} n/a");
                }
            }
        }
        out
    }
}
