//! Two-sample and correlation tests, regression slope, and histograms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatResult {
    /// Welch t, or Pearson r.
    pub statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub degrees_of_freedom: f64,
    pub significant_at_5pct: bool,
}

impl StatResult {
    fn new(statistic: f64, p_value: f64, degrees_of_freedom: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            degrees_of_freedom,
            significant_at_5pct: p_value < 0.05,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}

fn two_sided_t(t: f64, df: f64) -> Result<f64> {
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Stats(format!("t distribution: {e}")))?;
    Ok(2.0 * dist.sf(t.abs()))
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<StatResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Stats("each sample needs at least two values".into()));
    }
    let (va, vb) = (variance(a), variance(b));
    if !(va > 0.0 && vb > 0.0) {
        return Err(Error::Stats("samples must have nonzero variance".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let t = (mean(a) - mean(b)) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(StatResult::new(t, two_sided_t(t, df)?, df))
}

/// Pearson correlation with the two-sided p-value of `r * sqrt((n-2)/(1-r^2))`
/// under a t distribution with `n - 2` degrees of freedom.
pub fn pearson_with_p(x: &[f64], y: &[f64]) -> Result<StatResult> {
    if x.len() != y.len() {
        return Err(Error::Stats(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Stats("correlation needs at least three pairs".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::Stats("both variables need nonzero variance".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = x.len() as f64 - 2.0;
    let p = if 1.0 - r * r <= 0.0 {
        0.0
    } else {
        two_sided_t(r * (df / (1.0 - r * r)).sqrt(), df)?
    };
    Ok(StatResult::new(r, p, df))
}

/// Ordinary-least-squares slope of `values` against `1, 2, ..., n`.
pub fn learning_slope(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Stats("slope needs at least two runs".into()));
    }
    let xm = (values.len() as f64 + 1.0) / 2.0;
    let ym = mean(values);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in values.iter().enumerate() {
        let dx = (k + 1) as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Share of values in each bin; sums to 1.
    pub fraction: Vec<f64>,
    /// `fraction / bin width`; integrates to 1.
    pub density: Vec<f64>,
}

/// Equal-width histogram over the sample's range. A constant sample gets a
/// unit-width range centred on its value.
pub fn performance_histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::Stats("no values to histogram".into()));
    }
    if bins == 0 {
        return Err(Error::Stats("need at least one bin".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();

    let mut counts = vec![0usize; bins];
    for v in values {
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = values.len() as f64;
    let fraction: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let density = fraction.iter().map(|f| f / width).collect();
    Ok(Histogram {
        edges,
        counts,
        fraction,
        density,
    })
}
