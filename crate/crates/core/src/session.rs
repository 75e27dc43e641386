//! Interactive play: decision rounds, 12-month advances, resets and the
//! records they leave behind.

use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{level_one_scenario, level_two_scenario, AttackScenario, Level};
use crate::sim::{DecisionSchedule, DecisionVector, SimConfig, Simulator, ROUND_MONTHS};

/// Wall-clock budget per level.
pub const DEFAULT_TIME_LIMIT_SECS: u64 = 600;

/// One playthrough, complete or abandoned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub player_id: String,
    pub level: Level,
    /// 1-based position in the player's sequence of recorded runs for this level.
    pub run_index: u32,
    /// The vector in force for each round played.
    pub decision_history: Vec<DecisionVector>,
    pub scenario: AttackScenario,
    /// Profit earned in each month played.
    pub monthly_profit: Vec<f64>,
    /// Accumulated profit at the end of each month played.
    pub accumulated_profit: Vec<f64>,
    pub complete: bool,
    /// Noise seed of the run.
    pub seed: u64,
}

impl RunRecord {
    pub fn months_played(&self) -> usize {
        self.monthly_profit.len()
    }

    /// Accumulated profit at the last month played.
    pub fn final_profit(&self) -> f64 {
        self.accumulated_profit.last().copied().unwrap_or(0.0)
    }

    pub fn schedule(&self) -> DecisionSchedule {
        DecisionSchedule(self.decision_history.clone())
    }
}

/// What the player sees after an advance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observations {
    /// Month reached.
    pub month: u32,
    /// Profit of each month just simulated.
    pub monthly_profit: Vec<f64>,
    pub accumulated_profit: f64,
    /// Set when this advance finished the run.
    pub completed_run: Option<RunRecord>,
}

#[derive(Debug, Clone)]
struct ActiveRun {
    run_index: u32,
    scenario: AttackScenario,
    seed: u64,
    sim: Simulator,
    history: Vec<DecisionVector>,
    pending: DecisionVector,
}

impl ActiveRun {
    fn record(&self, player_id: &str, level: Level, complete: bool) -> RunRecord {
        let samples = &self.sim.samples()[self.sim.samples().len().min(1)..];
        RunRecord {
            player_id: player_id.to_string(),
            level,
            run_index: self.run_index,
            decision_history: self.history.clone(),
            scenario: self.scenario.clone(),
            monthly_profit: samples.iter().map(|s| s.month_profit).collect(),
            accumulated_profit: samples.iter().map(|s| s.accumulated_profit).collect(),
            complete,
            seed: self.seed,
        }
    }
}

/// One player's attempt at one level.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub player_id: String,
    pub level: Level,
    pub practice: bool,
    pub started_at_ms: u64,
    pub time_limit_secs: u64,
    cfg: SimConfig,
    seeds: ChaCha8Rng,
    current: Option<ActiveRun>,
    completed_runs: Vec<RunRecord>,
}

impl SessionState {
    /// Opens a session and starts its first run. Level one replays the fixed
    /// scenario every run; level two draws a new one per run from `seed`.
    pub fn new(player_id: impl Into<String>, level: Level, seed: u64, practice: bool, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let started_at_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64);
        let mut session = Self {
            player_id: player_id.into(),
            level,
            practice,
            started_at_ms,
            time_limit_secs: DEFAULT_TIME_LIMIT_SECS,
            cfg: cfg.clone(),
            seeds: ChaCha8Rng::seed_from_u64(seed),
            current: None,
            completed_runs: Vec::new(),
        };
        session.start_run()?;
        Ok(session)
    }

    fn start_run(&mut self) -> Result<()> {
        let scenario = match self.level {
            Level::One => level_one_scenario(&self.cfg),
            Level::Two => level_two_scenario(self.seeds.random(), &self.cfg),
        };
        let seed: u64 = self.seeds.random();
        let sim = Simulator::new(&self.cfg, &scenario, seed)?;
        self.current = Some(ActiveRun {
            run_index: self.completed_runs.len() as u32 + 1,
            scenario,
            seed,
            sim,
            history: Vec::new(),
            pending: DecisionVector::ZERO,
        });
        Ok(())
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn completed_runs(&self) -> &[RunRecord] {
        &self.completed_runs
    }

    /// Month of the run in progress, `None` once it has finished.
    pub fn current_month(&self) -> Option<u32> {
        self.current.as_ref().map(|r| r.sim.month())
    }

    pub fn current_run_index(&self) -> Option<u32> {
        self.current.as_ref().map(|r| r.run_index)
    }

    /// Vector that the next advance will use.
    pub fn decisions_in_force(&self) -> Option<DecisionVector> {
        self.current.as_ref().map(|r| r.pending)
    }

    /// Monthly profit and accumulated profit of the run in progress.
    pub fn current_series(&self) -> (Vec<f64>, f64) {
        match &self.current {
            Some(run) => {
                let samples = run.sim.samples();
                let monthly = samples.iter().skip(1).map(|s| s.month_profit).collect();
                (monthly, run.sim.accumulated_profit())
            }
            None => (Vec::new(), 0.0),
        }
    }

    /// Scenario of the run in progress. Hidden for level two, where players
    /// must not learn the attack pattern before the run ends.
    pub fn visible_scenario(&self) -> Option<&AttackScenario> {
        match (self.level, &self.current) {
            (Level::One, Some(run)) => Some(&run.scenario),
            _ => None,
        }
    }

    /// Queues `dv` for the next 12-month advance. Earlier rounds are fixed.
    pub fn set_decisions(&mut self, dv: DecisionVector) -> Result<()> {
        let run = self
            .current
            .as_mut()
            .ok_or_else(|| Error::State("no run in progress".into()))?;
        dv.validate(&self.cfg)?;
        run.pending = dv;
        Ok(())
    }

    /// Simulates the next round with the queued vector. The run is recorded
    /// as complete when it reaches the horizon.
    pub fn advance(&mut self) -> Result<Observations> {
        let run = self
            .current
            .as_mut()
            .ok_or_else(|| Error::State("no run in progress".into()))?;
        let dv = run.pending;
        let monthly_profit: Vec<f64> = run
            .sim
            .advance(&dv, ROUND_MONTHS)?
            .iter()
            .map(|s| s.month_profit)
            .collect();
        run.history.push(dv);
        let month = run.sim.month();
        let accumulated_profit = run.sim.accumulated_profit();

        let completed_run = if run.sim.finished() {
            let record = run.record(&self.player_id, self.level, true);
            self.completed_runs.push(record.clone());
            self.current = None;
            Some(record)
        } else {
            None
        };
        Ok(Observations {
            month,
            monthly_profit,
            accumulated_profit,
            completed_run,
        })
    }

    /// Abandons the run in progress, recording it as incomplete if any month
    /// was played, and starts a fresh one. Returns the abandoned record.
    pub fn reset_run(&mut self) -> Result<Option<RunRecord>> {
        let abandoned = match self.current.take() {
            Some(run) if run.sim.month() > 0 => {
                let record = run.record(&self.player_id, self.level, false);
                self.completed_runs.push(record.clone());
                Some(record)
            }
            _ => None,
        };
        self.start_run()?;
        Ok(abandoned)
    }

    /// Best accumulated profit over complete runs; `None` for practice
    /// sessions or when no run has been completed.
    pub fn best_performance(&self) -> Option<f64> {
        if self.practice {
            return None;
        }
        best_complete(&self.completed_runs)
    }

    pub fn elapsed_secs(&self, now_ms: u64) -> u64 {
        now_ms.saturating_sub(self.started_at_ms) / 1000
    }

    pub fn expired(&self, now_ms: u64) -> bool {
        self.elapsed_secs(now_ms) >= self.time_limit_secs
    }
}

/// Maximum final profit among complete runs.
pub fn best_complete<'a>(runs: impl IntoIterator<Item = &'a RunRecord>) -> Option<f64> {
    runs.into_iter()
        .filter(|r| r.complete)
        .map(RunRecord::final_profit)
        .reduce(f64::max)
}
