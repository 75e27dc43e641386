use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::model::{capability_inflow, flow_rates, profit_rate, DecisionVector, EcoState};
use super::noise::NoiseState;
use crate::error::{Error, Result};
use crate::scenario::AttackScenario;

/// Months between decision points.
pub const ROUND_MONTHS: u32 = 12;

/// Number of decision rounds needed to cover the horizon.
pub fn rounds_for(cfg: &SimConfig) -> usize {
    cfg.horizon.div_ceil(ROUND_MONTHS) as usize
}

/// One decision vector per round; round `k` is in force over months
/// `[12k, 12k + 12)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionSchedule(pub Vec<DecisionVector>);

impl DecisionSchedule {
    pub fn constant(dv: DecisionVector, cfg: &SimConfig) -> Self {
        Self(vec![dv; rounds_for(cfg)])
    }

    pub fn zero(cfg: &SimConfig) -> Self {
        Self::constant(DecisionVector::ZERO, cfg)
    }

    pub fn rounds(&self) -> &[DecisionVector] {
        &self.0
    }

    pub fn for_month(&self, month: u32) -> Option<&DecisionVector> {
        self.0.get((month / ROUND_MONTHS) as usize)
    }
}

/// State of the model at the end of a month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub month: u32,
    pub state: EcoState,
    /// Vector in force during the month that ended here (month 0: the first round's).
    pub decisions: DecisionVector,
    /// Incident fraction at this instant.
    pub ci: f64,
    /// Instantaneous profit per month at this instant.
    pub profit_rate: f64,
    /// Profit integrated over the month that ended here; 0 at month 0.
    pub month_profit: f64,
    pub accumulated_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub accumulated_profit: f64,
}

impl Trajectory {
    /// Profit earned in each month, months 1..=n.
    pub fn monthly_profit(&self) -> Vec<f64> {
        self.samples.iter().skip(1).map(|s| s.month_profit).collect()
    }

    /// Accumulated profit at the end of each month, months 1..=n.
    pub fn accumulated_series(&self) -> Vec<f64> {
        self.samples.iter().skip(1).map(|s| s.accumulated_profit).collect()
    }
}

/// Advances the model by one integration step.
///
/// Flows are evaluated at the start of the step (explicit Euler). Where the
/// outflows of a stock would overdraw it within the step, they are scaled down
/// together so the stock lands at zero. Each flow moves systems between two
/// stocks, so the system total is preserved up to rounding.
///
/// Returns the new state and the profit earned over the step. The noise state
/// advances by one step.
pub fn step(
    state: &EcoState,
    decisions: &DecisionVector,
    ci: f64,
    noise: &mut NoiseState,
    cfg: &SimConfig,
) -> Result<(EcoState, f64)> {
    let dt = cfg.dt;
    let profit_increment = profit_rate(state, decisions, noise.xi(), cfg)? * dt;
    let mut f = flow_rates(state, ci, cfg)?;
    let inflow = capability_inflow(decisions, cfg);

    let limit = |stock: f64, outflow: f64| -> f64 {
        if outflow * dt > stock && outflow > 0.0 {
            stock / (outflow * dt)
        } else {
            1.0
        }
    };
    f.risk_promotion *= limit(state.snr, f.risk_promotion);
    let k = limit(state.sr, f.sr_detection + f.incident_occurrence);
    f.sr_detection *= k;
    f.incident_occurrence *= k;
    f.as_detection *= limit(state.as_, f.as_detection);
    f.patching *= limit(state.asd, f.patching);

    let next = EcoState {
        snr: (state.snr + dt * (f.sr_detection + f.patching - f.risk_promotion)).max(0.0),
        sr: (state.sr + dt * (f.risk_promotion - f.sr_detection - f.incident_occurrence)).max(0.0),
        as_: (state.as_ + dt * (f.incident_occurrence - f.as_detection)).max(0.0),
        asd: (state.asd + dt * (f.as_detection - f.patching)).max(0.0),
        c_p: state.c_p + dt * inflow.i_p,
        c_d: state.c_d + dt * inflow.i_d,
        c_rr: state.c_rr + dt * inflow.i_rr,
    };
    if cfg!(debug_assertions) {
        next.check(cfg)
            .map_err(|e| Error::Domain(format!("invariant violated after step: {e}")))?;
    }
    noise.step();
    Ok((next, profit_increment))
}

/// Month-by-month driver shared by batch runs and interactive sessions.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    scenario: AttackScenario,
    state: EcoState,
    noise: NoiseState,
    month: u32,
    samples: Vec<Sample>,
}

impl Simulator {
    pub fn new(cfg: &SimConfig, scenario: &AttackScenario, seed: u64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            scenario: scenario.clone(),
            state: EcoState::initial(cfg),
            noise: NoiseState::new(seed, cfg),
            month: 0,
            samples: Vec::new(),
        })
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    pub fn state(&self) -> &EcoState {
        &self.state
    }

    pub fn finished(&self) -> bool {
        self.month >= self.cfg.horizon
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn accumulated_profit(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.accumulated_profit)
    }

    fn sample_now(&self, decisions: &DecisionVector, month_profit: f64, accumulated: f64) -> Result<Sample> {
        let t = self.month as f64;
        Ok(Sample {
            month: self.month,
            state: self.state,
            decisions: *decisions,
            ci: self.scenario.ci_at(t, &self.cfg)?,
            profit_rate: profit_rate(&self.state, decisions, self.noise.xi(), &self.cfg)?,
            month_profit,
            accumulated_profit: accumulated,
        })
    }

    /// Simulates one month under `decisions` and returns the closing sample.
    pub fn advance_month(&mut self, decisions: &DecisionVector) -> Result<&Sample> {
        if self.finished() {
            return Err(Error::State(format!("run already reached month {}", self.cfg.horizon)));
        }
        decisions.validate(&self.cfg)?;
        if self.samples.is_empty() {
            let first = self.sample_now(decisions, 0.0, 0.0)?;
            self.samples.push(first);
        }
        let steps = self.cfg.steps_per_month();
        let mut month_profit = 0.0;
        for k in 0..steps {
            let t = self.month as f64 + k as f64 * self.cfg.dt;
            let ci = self.scenario.ci_at(t, &self.cfg)?;
            let (next, dp) = step(&self.state, decisions, ci, &mut self.noise, &self.cfg)?;
            self.state = next;
            month_profit += dp;
        }
        self.month += 1;
        let accumulated = self.accumulated_profit() + month_profit;
        let sample = self.sample_now(decisions, month_profit, accumulated)?;
        self.samples.push(sample);
        Ok(self.samples.last().expect("sample just pushed"))
    }

    /// Simulates up to `months` months (stopping at the horizon) and returns
    /// the samples produced.
    pub fn advance(&mut self, decisions: &DecisionVector, months: u32) -> Result<&[Sample]> {
        let start = self.samples.len().max(1);
        for _ in 0..months {
            if self.finished() {
                break;
            }
            self.advance_month(decisions)?;
        }
        Ok(&self.samples[start.min(self.samples.len())..])
    }

    pub fn into_trajectory(self) -> Trajectory {
        let accumulated_profit = self.accumulated_profit();
        Trajectory {
            samples: self.samples,
            accumulated_profit,
        }
    }
}

/// Simulates the whole horizon. All capabilities start at zero and every
/// system starts out not at risk.
pub fn run_simulation(
    schedule: &DecisionSchedule,
    scenario: &AttackScenario,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Trajectory> {
    let needed = rounds_for(cfg);
    if schedule.0.len() < needed {
        return Err(Error::Config(format!(
            "schedule has {} rounds, horizon needs {needed}",
            schedule.0.len()
        )));
    }
    let mut sim = Simulator::new(cfg, scenario, seed)?;
    for dv in &schedule.0[..needed] {
        sim.advance(dv, ROUND_MONTHS)?;
    }
    Ok(sim.into_trajectory())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{AttackIncident, AttackScenario};

    #[test]
    fn zero_policy_no_attack_earns_full_resources() {
        let cfg = SimConfig::default().noiseless();
        let traj = run_simulation(&DecisionSchedule::zero(&cfg), &AttackScenario::none(), &cfg, 1).unwrap();
        assert_eq!(traj.samples.len(), 61);
        assert!((traj.accumulated_profit - 3000.0).abs() < 1e-9);
    }

    #[test]
    fn euler_matches_discrete_decay() {
        // Explicit Euler on dSNR/dt = -SNR/6 is the geometric sequence (1 - dt/6)^n.
        let cfg = SimConfig::default().noiseless();
        let traj = run_simulation(&DecisionSchedule::zero(&cfg), &AttackScenario::none(), &cfg, 1).unwrap();
        let expected = 100.0 * (1.0 - cfg.dt / 6.0f64).powi(12 * 16);
        assert!((traj.samples[12].state.snr - expected).abs() < 1e-9);
    }

    #[test]
    fn short_schedule_is_rejected() {
        let cfg = SimConfig::default();
        let schedule = DecisionSchedule(vec![DecisionVector::ZERO; 4]);
        assert!(matches!(
            run_simulation(&schedule, &AttackScenario::none(), &cfg, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn no_incidents_without_systems_at_risk() {
        let cfg = SimConfig::default();
        let state = EcoState::initial(&cfg);
        let mut noise = NoiseState::new(0, &cfg);
        let (next, _) = step(&state, &DecisionVector::ZERO, 1.0, &mut noise, &cfg).unwrap();
        assert_eq!(next.as_, 0.0);
        assert_eq!(next.total_systems(), state.total_systems());
    }

    #[test]
    fn limiting_never_overdraws() {
        // A coarse step with full incident pressure would drain SR past zero.
        let cfg = SimConfig {
            dt: 1.0,
            ..SimConfig::default()
        };
        let state = EcoState {
            snr: 0.0,
            sr: 100.0,
            as_: 0.0,
            asd: 0.0,
            c_p: 50.0,
            c_d: 50.0,
            c_rr: 0.0,
        };
        let mut noise = NoiseState::new(0, &cfg);
        let (next, _) = step(&state, &DecisionVector::ZERO, 1.0, &mut noise, &cfg).unwrap();
        assert!(next.sr >= 0.0);
        assert!(next.sr < 1e-12);
        assert!((next.total_systems() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn simulator_stops_at_horizon() {
        let cfg = SimConfig::default();
        let scenario = AttackScenario::single(AttackIncident::new(3.0, 0.5, 1.0));
        let mut sim = Simulator::new(&cfg, &scenario, 9).unwrap();
        let got = sim.advance(&DecisionVector::ZERO, 100).unwrap().len();
        assert_eq!(got, 60);
        assert!(sim.finished());
        assert!(matches!(sim.advance_month(&DecisionVector::ZERO), Err(Error::State(_))));
    }
}
