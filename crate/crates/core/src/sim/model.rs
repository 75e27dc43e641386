//! Stocks, flows and the profit equation of the systems-at-risk model.

use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::error::{Error, Result};

/// The four system stocks and the three capability stocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcoState {
    /// Systems not at risk.
    pub snr: f64,
    /// Systems at risk.
    pub sr: f64,
    /// Affected (compromised, undetected) systems.
    #[serde(rename = "as")]
    pub as_: f64,
    /// Affected systems that have been detected.
    pub asd: f64,
    pub c_p: f64,
    pub c_d: f64,
    pub c_rr: f64,
}

impl EcoState {
    /// All systems healthy, no capabilities in place.
    pub fn initial(cfg: &SimConfig) -> Self {
        Self {
            snr: cfg.total_systems,
            sr: 0.0,
            as_: 0.0,
            asd: 0.0,
            c_p: 0.0,
            c_d: 0.0,
            c_rr: 0.0,
        }
    }

    pub fn total_systems(&self) -> f64 {
        self.snr + self.sr + self.as_ + self.asd
    }

    /// Compromised systems, detected or not. Both stocks depress profit
    /// until patched.
    pub fn affected(&self) -> f64 {
        self.as_ + self.asd
    }

    fn stocks(&self) -> [f64; 7] {
        [self.snr, self.sr, self.as_, self.asd, self.c_p, self.c_d, self.c_rr]
    }

    pub(crate) fn check(&self, cfg: &SimConfig) -> Result<()> {
        if self.stocks().iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(format!("negative or non-finite stock in {self:?}")));
        }
        let drift = (self.total_systems() - cfg.total_systems).abs();
        if drift > 1e-9 * cfg.total_systems.max(1.0) {
            return Err(Error::Domain(format!(
                "system stocks sum to {} instead of {}",
                self.total_systems(),
                cfg.total_systems
            )));
        }
        Ok(())
    }
}

/// Fractions of total resources allocated to prevention, detection and
/// response/recovery.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecisionVector {
    pub p_alloc: f64,
    pub d_alloc: f64,
    pub r_alloc: f64,
}

impl DecisionVector {
    pub const ZERO: DecisionVector = DecisionVector {
        p_alloc: 0.0,
        d_alloc: 0.0,
        r_alloc: 0.0,
    };

    pub fn new(p_alloc: f64, d_alloc: f64, r_alloc: f64) -> Self {
        Self {
            p_alloc,
            d_alloc,
            r_alloc,
        }
    }

    /// Every allocation at the ceiling.
    pub fn max(cfg: &SimConfig) -> Self {
        Self::new(cfg.alloc_cap, cfg.alloc_cap, cfg.alloc_cap)
    }

    pub fn total(&self) -> f64 {
        self.p_alloc + self.d_alloc + self.r_alloc
    }

    pub fn validate(&self, cfg: &SimConfig) -> Result<()> {
        for (field, value) in [
            ("p_alloc", self.p_alloc),
            ("d_alloc", self.d_alloc),
            ("r_alloc", self.r_alloc),
        ] {
            if !(value.is_finite() && (0.0..=cfg.alloc_cap).contains(&value)) {
                return Err(Error::validation(
                    field,
                    format!("{value} is outside [0, {}]", cfg.alloc_cap),
                ));
            }
        }
        Ok(())
    }
}

/// Instantaneous flows between the system stocks, in systems per month.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowRates {
    /// SNR -> SR
    pub risk_promotion: f64,
    /// SR -> SNR
    pub sr_detection: f64,
    /// SR -> AS
    pub incident_occurrence: f64,
    /// AS -> ASD
    pub as_detection: f64,
    /// ASD -> SNR
    pub patching: f64,
}

/// Capability inflow per month for the three capability stocks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CapabilityInflow {
    pub i_p: f64,
    pub i_d: f64,
    pub i_rr: f64,
    /// Money diverted from profit-making per month.
    pub spend: f64,
}

/// Fraction of systems drifting into risk given prevention capability `c_p`.
pub fn adverse_security_practices(c_p: f64) -> Result<f64> {
    if !(c_p >= 0.0) {
        return Err(Error::Domain(format!("prevention capability must be >= 0, got {c_p}")));
    }
    Ok(1.0 / (c_p + 1.0))
}

/// Effect of a capability level `c`: 0 with no capability, approaching 1.
fn effectiveness(c: f64) -> f64 {
    1.0 - 1.0 / (c + 1.0)
}

pub fn flow_rates(state: &EcoState, ci: f64, cfg: &SimConfig) -> Result<FlowRates> {
    if !(0.0..=1.0).contains(&ci) {
        return Err(Error::Domain(format!("incident fraction {ci} outside [0, 1]")));
    }
    let asp = adverse_security_practices(state.c_p)?;
    Ok(FlowRates {
        risk_promotion: state.snr * asp / cfg.b_pr,
        sr_detection: state.sr * effectiveness(state.c_d + state.c_p) / cfg.b_dsr,
        incident_occurrence: state.sr * ci,
        // Drains AS, so AS is the stock in the numerator.
        as_detection: state.as_ * effectiveness(state.c_d) / cfg.b_das,
        patching: state.asd * effectiveness(state.c_rr) / cfg.b_r,
    })
}

pub fn capability_inflow(decisions: &DecisionVector, cfg: &SimConfig) -> CapabilityInflow {
    let per_fraction = cfg.capability_gain * cfg.resource_rate;
    CapabilityInflow {
        i_p: per_fraction * decisions.p_alloc,
        i_d: per_fraction * decisions.d_alloc,
        i_rr: per_fraction * decisions.r_alloc,
        spend: decisions.total() * cfg.resource_rate,
    }
}

/// Profit per month: `alpha * R_P * (1 + xi)` with `alpha = 1 - sqrt((AS + ASD) / T)`.
pub fn profit_rate(state: &EcoState, decisions: &DecisionVector, xi: f64, cfg: &SimConfig) -> Result<f64> {
    let t = cfg.total_systems;
    let affected = state.affected();
    if affected > t * (1.0 + 1e-12) || state.as_ < 0.0 || state.asd < 0.0 {
        return Err(Error::Domain(format!("affected systems {affected} outside [0, {t}]")));
    }
    if !xi.is_finite() {
        return Err(Error::Domain("profit shock is not finite".into()));
    }
    let alpha = 1.0 - (affected.min(t) / t).sqrt();
    let productive = cfg.resource_rate - decisions.total() * cfg.resource_rate;
    Ok(alpha * productive * (1.0 + xi))
}
