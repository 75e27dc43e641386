//! Attack scenarios and the exogenous incident fraction `CI(t)`.
//!
//! Level one is a fixed pattern of five incidents. Level two draws five onsets
//! and impacts uniformly at random, then rescales the impacts so the total
//! equals level one's.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::SimConfig;

pub const INCIDENTS_PER_SCENARIO: usize = 5;

/// Default fixed pattern: (onset month, impact). Every pulse lasts one month.
pub const LEVEL_ONE_PATTERN: [(f64, f64); INCIDENTS_PER_SCENARIO] =
    [(18.0, 0.2), (27.0, 0.5), (36.0, 0.3), (45.0, 0.6), (54.0, 0.4)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    One,
    Two,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::One => "one",
            Level::Two => "two",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "one" | "1" => Ok(Level::One),
            "two" | "2" => Ok(Level::Two),
            other => Err(Error::validation("level", format!("expected one|two, got {other:?}"))),
        }
    }
}

/// A rectangular CI pulse of height `impact` over `[onset, onset + duration)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackIncident {
    pub onset: f64,
    pub impact: f64,
    pub duration: f64,
}

impl AttackIncident {
    pub fn new(onset: f64, impact: f64, duration: f64) -> Self {
        Self {
            onset,
            impact,
            duration,
        }
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.onset && t < self.onset + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackScenario {
    /// `None` for free-form scenarios (no attacks, single pulses, ...).
    pub level: Option<Level>,
    pub incidents: Vec<AttackIncident>,
    pub total_impact: f64,
    /// Seed a level-two scenario was drawn from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl AttackScenario {
    /// Builds a free-form scenario; incidents are sorted by onset.
    pub fn custom(mut incidents: Vec<AttackIncident>) -> Self {
        incidents.sort_by(|a, b| a.onset.total_cmp(&b.onset));
        let total_impact = incidents.iter().fold(0.0, |acc, i| acc + i.impact * i.duration);
        Self {
            level: None,
            incidents,
            total_impact,
            seed: None,
        }
    }

    /// `CI(t) = 0` throughout.
    pub fn none() -> Self {
        Self::custom(Vec::new())
    }

    pub fn single(incident: AttackIncident) -> Self {
        Self::custom(vec![incident])
    }

    /// Onset of the earliest incident, if any.
    pub fn first_onset(&self) -> Option<f64> {
        self.incidents.first().map(|i| i.onset)
    }

    pub fn validate(&self, cfg: &SimConfig) -> Result<()> {
        let horizon = cfg.horizon as f64;
        for (k, inc) in self.incidents.iter().enumerate() {
            if !(inc.impact > 0.0 && inc.impact <= 1.0) {
                return Err(Error::validation(
                    format!("incidents[{k}].impact"),
                    "must lie in (0, 1]",
                ));
            }
            if !(inc.duration > 0.0) || !(inc.onset >= 0.0) || inc.onset + inc.duration > horizon + 1e-9 {
                return Err(Error::validation(
                    format!("incidents[{k}]"),
                    format!(
                        "pulse [{}, {}) not inside [0, {horizon}]",
                        inc.onset,
                        inc.onset + inc.duration
                    ),
                ));
            }
        }
        if self.incidents.windows(2).any(|w| w[0].onset > w[1].onset) {
            return Err(Error::validation("incidents", "must be sorted by onset"));
        }
        if self.level.is_some() && self.incidents.len() != INCIDENTS_PER_SCENARIO {
            return Err(Error::validation(
                "incidents",
                format!("a level scenario needs exactly {INCIDENTS_PER_SCENARIO} incidents"),
            ));
        }
        Ok(())
    }

    /// Incident fraction at month `t`: the sum of active pulse heights, capped at 1.
    pub fn ci_at(&self, t: f64, cfg: &SimConfig) -> Result<f64> {
        if !(0.0..=cfg.horizon as f64).contains(&t) {
            return Err(Error::Domain(format!("month {t} outside [0, {}]", cfg.horizon)));
        }
        // Folding from +0.0: an empty `sum()` yields -0.0.
        let sum = self
            .incidents
            .iter()
            .filter(|i| i.contains(t))
            .fold(0.0, |acc, i| acc + i.impact);
        Ok(sum.min(1.0))
    }
}

pub fn level_one_scenario(_cfg: &SimConfig) -> AttackScenario {
    let incidents = LEVEL_ONE_PATTERN
        .iter()
        .map(|&(onset, impact)| AttackIncident::new(onset, impact, 1.0))
        .collect();
    AttackScenario {
        level: Some(Level::One),
        ..AttackScenario::custom(incidents)
    }
}

/// Random scenario with uniform onsets and impacts whose total equals the
/// level-one total.
pub fn level_two_scenario(seed: u64, cfg: &SimConfig) -> AttackScenario {
    const DURATION: f64 = 1.0;
    let target = level_one_scenario(cfg).total_impact;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let latest_onset = cfg.horizon as f64 - DURATION;

    let mut onsets: Vec<f64> = (0..INCIDENTS_PER_SCENARIO)
        .map(|_| rng.random::<f64>() * latest_onset)
        .collect();
    onsets.sort_by(f64::total_cmp);
    // Uniform on (0, 1].
    let raw: Vec<f64> = (0..INCIDENTS_PER_SCENARIO).map(|_| 1.0 - rng.random::<f64>()).collect();
    let impacts = rescale_impacts(&raw, target / DURATION);

    let incidents: Vec<AttackIncident> = onsets
        .into_iter()
        .zip(impacts)
        .map(|(onset, impact)| AttackIncident::new(onset, impact, DURATION))
        .collect();
    AttackScenario {
        level: Some(Level::Two),
        incidents,
        total_impact: target,
        seed: Some(seed),
    }
}

/// Scales `raw` to sum to `target`. Values pushed above 1 are pinned at 1 and
/// the remainder is spread over the rest in proportion to their raw values.
fn rescale_impacts(raw: &[f64], target: f64) -> Vec<f64> {
    debug_assert!(target <= raw.len() as f64);
    let mut out = vec![0.0; raw.len()];
    let mut pinned = vec![false; raw.len()];
    loop {
        let free_raw: f64 = raw.iter().zip(&pinned).filter(|(_, p)| !**p).map(|(r, _)| r).sum();
        let remaining = target - pinned.iter().filter(|p| **p).count() as f64;
        let scale = remaining / free_raw;
        let mut changed = false;
        for k in 0..raw.len() {
            if pinned[k] {
                out[k] = 1.0;
            } else {
                out[k] = raw[k] * scale;
                if out[k] > 1.0 {
                    pinned[k] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_one_defaults() {
        let cfg = SimConfig::default();
        let s = level_one_scenario(&cfg);
        s.validate(&cfg).unwrap();
        assert_eq!(s.incidents.len(), 5);
        assert!((s.total_impact - 2.0).abs() < 1e-15);
        assert!(s.incidents.windows(2).all(|w| w[0].onset < w[1].onset));
        assert_eq!(s, level_one_scenario(&cfg));
    }

    #[test]
    fn level_two_matches_total_and_varies() {
        let cfg = SimConfig::default();
        let target = level_one_scenario(&cfg).total_impact;
        let a = level_two_scenario(1, &cfg);
        let b = level_two_scenario(2, &cfg);
        a.validate(&cfg).unwrap();
        let sum: f64 = a.incidents.iter().map(|i| i.impact * i.duration).sum();
        assert!((sum - target).abs() < 1e-12);
        assert_ne!(
            a.incidents.iter().map(|i| i.onset).collect::<Vec<_>>(),
            b.incidents.iter().map(|i| i.onset).collect::<Vec<_>>()
        );
        assert_eq!(a, level_two_scenario(1, &cfg));
    }

    #[test]
    fn rescale_pins_overflow() {
        // Naive scaling of [0.01, 0.01, 0.01, 0.01, 1.0] to 2.0 puts 1.92 on the last.
        let out = rescale_impacts(&[0.01, 0.01, 0.01, 0.01, 1.0], 2.0);
        assert_eq!(out[4], 1.0);
        assert!((out.iter().sum::<f64>() - 2.0).abs() < 1e-12);
        assert!(out.iter().all(|v| *v > 0.0 && *v <= 1.0));
    }

    #[test]
    fn ci_pulses() {
        let cfg = SimConfig::default();
        let s = AttackScenario::custom(vec![
            AttackIncident::new(10.0, 0.5, 1.0),
            AttackIncident::new(20.0, 0.7, 2.0),
            AttackIncident::new(21.0, 0.6, 1.0),
        ]);
        assert_eq!(s.ci_at(5.0, &cfg).unwrap(), 0.0);
        assert_eq!(s.ci_at(10.0, &cfg).unwrap(), 0.5);
        assert_eq!(s.ci_at(10.999, &cfg).unwrap(), 0.5);
        assert_eq!(s.ci_at(11.0, &cfg).unwrap(), 0.0);
        assert_eq!(s.ci_at(21.5, &cfg).unwrap(), 1.0);
        assert!(s.ci_at(-1.0, &cfg).is_err());
        assert!(s.ci_at(61.0, &cfg).is_err());
    }

    #[test]
    fn level_parsing() {
        assert_eq!("one".parse::<Level>().unwrap(), Level::One);
        assert_eq!("2".parse::<Level>().unwrap(), Level::Two);
        assert!("three".parse::<Level>().is_err());
    }
}
