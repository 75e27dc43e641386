//! Policy evaluation and search over constant allocations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{level_one_scenario, level_two_scenario, AttackScenario, Level};
use crate::sim::{mix_seed, rounds_for, run_simulation, DecisionSchedule, DecisionVector, SimConfig, ROUND_MONTHS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PolicySpec {
    /// The same vector every round.
    Constant { vector: DecisionVector },
    /// One vector per round.
    Staged { vectors: Vec<DecisionVector> },
    /// Nothing until the round after the first incident, then `vector`.
    Reactive { vector: DecisionVector },
}

impl PolicySpec {
    pub fn zero() -> Self {
        PolicySpec::Constant {
            vector: DecisionVector::ZERO,
        }
    }

    pub fn constant(vector: DecisionVector) -> Self {
        PolicySpec::Constant { vector }
    }

    pub fn validate(&self, cfg: &SimConfig) -> Result<()> {
        match self {
            PolicySpec::Constant { vector } | PolicySpec::Reactive { vector } => vector.validate(cfg),
            PolicySpec::Staged { vectors } => {
                if vectors.len() < rounds_for(cfg) {
                    return Err(Error::Config(format!(
                        "staged policy has {} rounds, horizon needs {}",
                        vectors.len(),
                        rounds_for(cfg)
                    )));
                }
                vectors.iter().try_for_each(|v| v.validate(cfg))
            }
        }
    }

    /// The concrete schedule this policy plays against `scenario`.
    pub fn schedule_for(&self, scenario: &AttackScenario, cfg: &SimConfig) -> DecisionSchedule {
        let rounds = rounds_for(cfg);
        match self {
            PolicySpec::Constant { vector } => DecisionSchedule::constant(*vector, cfg),
            PolicySpec::Staged { vectors } => DecisionSchedule(vectors.clone()),
            PolicySpec::Reactive { vector } => {
                let start = scenario
                    .first_onset()
                    .map_or(rounds, |onset| (onset / ROUND_MONTHS as f64).floor() as usize + 1);
                DecisionSchedule(
                    (0..rounds)
                        .map(|r| if r >= start { *vector } else { DecisionVector::ZERO })
                        .collect(),
                )
            }
        }
    }
}

/// Where the scenarios for an evaluation come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Level(Level),
    Fixed(AttackScenario),
}

impl From<Level> for ScenarioSource {
    fn from(level: Level) -> Self {
        ScenarioSource::Level(level)
    }
}

impl ScenarioSource {
    fn scenario(&self, seed: u64, cfg: &SimConfig) -> AttackScenario {
        match self {
            ScenarioSource::Level(Level::One) => level_one_scenario(cfg),
            ScenarioSource::Level(Level::Two) => level_two_scenario(mix_seed(seed), cfg),
            ScenarioSource::Fixed(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single scenario.
    pub std: f64,
    pub n_scenarios: usize,
    pub values: Vec<f64>,
}

impl PolicyEvaluation {
    fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            std,
            n_scenarios: n,
            values,
        }
    }
}

/// Accumulated profit of `policy` over `n_seeds` realizations, seeds
/// `seed_base, seed_base + 1, ...`. Level one reuses the fixed scenario with a
/// fresh noise seed per realization; level two also redraws the attacks.
pub fn evaluate_policy(
    policy: &PolicySpec,
    source: impl Into<ScenarioSource>,
    n_seeds: usize,
    seed_base: u64,
    cfg: &SimConfig,
) -> Result<PolicyEvaluation> {
    if n_seeds == 0 {
        return Err(Error::Config("n_seeds must be at least 1".into()));
    }
    policy.validate(cfg)?;
    let source = source.into();
    let values = (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let seed = seed_base.wrapping_add(i);
            let scenario = source.scenario(seed, cfg);
            let schedule = policy.schedule_for(&scenario, cfg);
            run_simulation(&schedule, &scenario, cfg, seed).map(|t| t.accumulated_profit)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolicyEvaluation::from_values(values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub vector: DecisionVector,
    pub total_spend: f64,
    pub accumulated_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: PolicySpec,
    pub best_profit: f64,
    pub table: Vec<GridCell>,
}

impl GridSearchResult {
    pub fn best_vector(&self) -> DecisionVector {
        match self.best {
            PolicySpec::Constant { vector } => vector,
            _ => unreachable!("grid search only yields constant policies"),
        }
    }
}

/// Allocation levels `0, step, ..., alloc_cap`.
fn grid_levels(grid_step: f64, cfg: &SimConfig) -> Result<Vec<f64>> {
    let cells = cfg.alloc_cap / grid_step;
    if !(grid_step > 0.0) || (cells - cells.round()).abs() > 1e-9 || cells.round() < 1.0 {
        return Err(Error::Config(format!(
            "grid step {grid_step} does not divide alloc_cap {}",
            cfg.alloc_cap
        )));
    }
    let n = cells.round() as usize;
    Ok((0..=n).map(|k| cfg.alloc_cap * k as f64 / n as f64).collect())
}

/// Exhaustive search over constant allocations against one fixed scenario.
/// Cells are ordered by (p, d, r) ascending. Ties on profit go to the lower
/// total spend, then to the earlier cell.
pub fn grid_search(grid_step: f64, scenario: &AttackScenario, cfg: &SimConfig, seed: u64) -> Result<GridSearchResult> {
    let levels = grid_levels(grid_step, cfg)?;
    let mut vectors = Vec::with_capacity(levels.len().pow(3));
    for &p in &levels {
        for &d in &levels {
            for &r in &levels {
                vectors.push(DecisionVector::new(p, d, r));
            }
        }
    }
    let table = vectors
        .par_iter()
        .map(|dv| {
            let traj = run_simulation(&DecisionSchedule::constant(*dv, cfg), scenario, cfg, seed)?;
            Ok(GridCell {
                vector: *dv,
                total_spend: dv.total(),
                accumulated_profit: traj.accumulated_profit,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = table
        .iter()
        .reduce(|best, cell| {
            let better = cell.accumulated_profit > best.accumulated_profit
                || (cell.accumulated_profit == best.accumulated_profit && cell.total_spend < best.total_spend);
            if better {
                cell
            } else {
                best
            }
        })
        .expect("grid has at least one cell");
    Ok(GridSearchResult {
        best: PolicySpec::constant(best.vector),
        best_profit: best.accumulated_profit,
        table,
    })
}

/// Noise-free grid search on the level-one scenario.
pub fn grid_search_level_one(grid_step: f64, cfg: &SimConfig) -> Result<GridSearchResult> {
    let cfg = cfg.noiseless();
    grid_search(grid_step, &level_one_scenario(&cfg), &cfg, 0)
}

/// Accumulated profit when `vector` is switched on at each possible round
/// (zero allocation before), noise off.
pub fn delayed_start_sweep(
    vector: DecisionVector,
    scenario: &AttackScenario,
    cfg: &SimConfig,
) -> Result<Vec<(usize, f64)>> {
    let cfg = cfg.noiseless();
    vector.validate(&cfg)?;
    let rounds = rounds_for(&cfg);
    (0..rounds)
        .map(|start| {
            let schedule = DecisionSchedule(
                (0..rounds)
                    .map(|r| if r >= start { vector } else { DecisionVector::ZERO })
                    .collect(),
            );
            run_simulation(&schedule, scenario, &cfg, 0).map(|t| (start, t.accumulated_profit))
        })
        .collect()
}

/// Outcome of [`calibrate_resource_rate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub resource_rate: f64,
    pub capability_gain: f64,
    pub best_profit: f64,
    pub best_vector: DecisionVector,
    pub iterations: usize,
}

/// Finds the resource rate at which the level-one grid optimum earns `target`,
/// holding the capability bought per unit of allocation (`capability_gain *
/// resource_rate`) fixed. With that product fixed the model's dynamics do not
/// depend on the money scale, so the optimum is linear in `resource_rate` and
/// one rescale lands on the target; a short secant refinement absorbs rounding.
pub fn calibrate_resource_rate(target: f64, grid_step: f64, cfg: &SimConfig) -> Result<Calibration> {
    if !(target > 0.0) {
        return Err(Error::Config(format!(
            "calibration target must be positive, got {target}"
        )));
    }
    let leverage = cfg.capability_gain * cfg.resource_rate;
    let mut current = cfg.clone();
    let mut iterations = 0;
    loop {
        let result = grid_search_level_one(grid_step, &current)?;
        iterations += 1;
        let rel = (result.best_profit - target) / target;
        if rel.abs() < 1e-9 || iterations >= 8 {
            return Ok(Calibration {
                resource_rate: current.resource_rate,
                capability_gain: current.capability_gain,
                best_profit: result.best_profit,
                best_vector: result.best_vector(),
                iterations,
            });
        }
        current.resource_rate *= target / result.best_profit;
        current.capability_gain = leverage / current.resource_rate;
    }
}
