//! Simulation engine and experiment tooling for a cybersecurity
//! capability-investment game.
//!
//! - [`sim`]: the stock-and-flow model and its integrator
//! - [`scenario`]: level-one and level-two attack patterns
//! - [`session`]: interactive play in 12-month rounds
//! - [`optimizer`]: policy evaluation, grid search and calibration
//! - [`analytics`]: cohort statistics over logged runs
//! - [`persistence`]: the JSON-lines run log and CSV exports

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod optimizer;
pub mod persistence;
pub mod scenario;
pub mod session;
pub mod sim;

pub use error::{Error, Result};
pub use optimizer::{PolicyEvaluation, PolicySpec};
pub use scenario::{level_one_scenario, level_two_scenario, AttackIncident, AttackScenario, Level};
pub use session::{RunRecord, SessionState};
pub use sim::{run_simulation, DecisionSchedule, DecisionVector, EcoState, SimConfig, Trajectory};
