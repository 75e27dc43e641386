//! Stock-and-flow engine: four system stocks, three capability stocks and a
//! correlated profit shock, integrated on a fixed sub-monthly grid.

mod config;
mod engine;
mod model;
mod noise;

pub use config::{SimConfig, DEFAULT_CAPABILITY_GAIN, DEFAULT_RESOURCE_RATE};
pub use engine::{rounds_for, run_simulation, step, DecisionSchedule, Sample, Simulator, Trajectory, ROUND_MONTHS};
pub use model::{
    adverse_security_practices, capability_inflow, flow_rates, profit_rate, CapabilityInflow, DecisionVector, EcoState,
    FlowRates,
};
pub use noise::{mix_seed, NoiseState};
