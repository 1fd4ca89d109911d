//! Distribution-free lower confidence bound for the identifiable proportion.
//!
//! The bound reuses the threshold estimator with `c_n` set to the `1 - beta`
//! quantile of `sqrt(n) dn(Fn, F)` under the null. Because the statistic's law
//! does not depend on `F`, it is simulated from uniform samples.

use alloc::vec::Vec;

use rand::Rng;

use crate::distributions::KnownCdf;
use crate::mixture::{CriterionEvaluator, SortedSample};
use crate::rng;
use crate::{Error, Result};

/// Smallest Monte-Carlo replication count accepted.
pub const MIN_REPLICATIONS: usize = 1000;
pub const DEFAULT_REPLICATIONS: usize = 10_000;

/// Upper quantiles of the square root of the asymptotic Cramer-von Mises
/// statistic, keyed by tail probability.
const ASYMPTOTIC_TABLE: [(f64, f64); 3] = [(0.10, 0.589_321), (0.05, 0.679_235), (0.01, 0.862_241)];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CriticalMethod {
    MonteCarlo { replications: usize, seed: u64 },
    /// Tabulated limit; `interpolate` allows levels between table entries.
    Asymptotic {
        #[serde(default)]
        interpolate: bool,
    },
    /// A caller-supplied `c_n`; `f64::INFINITY` never rejects.
    Fixed { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CriticalValueSpec {
    pub beta: f64,
    #[serde(flatten)]
    pub method: CriticalMethod,
}

impl CriticalValueSpec {
    pub fn monte_carlo(beta: f64, replications: usize, seed: u64) -> Result<Self> {
        let spec = Self {
            beta,
            method: CriticalMethod::MonteCarlo { replications, seed },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn asymptotic(beta: f64) -> Result<Self> {
        let spec = Self {
            beta,
            method: CriticalMethod::Asymptotic { interpolate: false },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn fixed(beta: f64, value: f64) -> Result<Self> {
        let spec = Self {
            beta,
            method: CriticalMethod::Fixed { value },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::ProbabilityOutOfRange(self.beta));
        }
        match self.method {
            CriticalMethod::MonteCarlo { replications, .. } if replications < MIN_REPLICATIONS => Err(Error::invalid(
                "replications",
                alloc::format!("{replications} is below the minimum of {MIN_REPLICATIONS}"),
            )),
            CriticalMethod::Fixed { value } if value.is_nan() || value <= 0.0 => {
                Err(Error::invalid("critical value", alloc::format!("{value} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// `c_n` for a sample of size `n`.
    pub fn critical_value(&self, n: usize) -> Result<f64> {
        self.validate()?;
        match self.method {
            CriticalMethod::MonteCarlo { replications, seed } => simulate_hn_quantile(n, self.beta, replications, seed),
            CriticalMethod::Asymptotic { interpolate } => asymptotic_cvm_quantile(self.beta, interpolate),
            CriticalMethod::Fixed { value } => Ok(value),
        }
    }
}

/// `sqrt(n) dn(Fn, U)` for one uniform sample of size `n`.
pub fn null_statistic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> f64 {
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    u.sort_by(f64::total_cmp);
    let ss: f64 = u
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let d = (i + 1) as f64 / n as f64 - x;
            d * d
        })
        .sum();
    libm::sqrt(ss)
}

/// The null statistic of replication `rep`, drawn from its own stream.
pub fn null_statistic_replicate(n: usize, seed: u64, rep: u64) -> f64 {
    null_statistic(n, &mut rng::stream(seed, rep))
}

/// The order statistic `ceil(B (1 - beta))` of `stats`.
pub fn upper_quantile(stats: &mut [f64], beta: f64) -> Result<f64> {
    if stats.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ProbabilityOutOfRange(beta));
    }
    stats.sort_by(f64::total_cmp);
    let b = stats.len() as f64;
    // guard against 1000 * 0.95 landing a hair above 950
    let k = libm::ceil(b * (1.0 - beta) - 1e-9).max(1.0) as usize;
    Ok(stats[k.min(stats.len()) - 1])
}

/// Monte-Carlo `1 - beta` quantile of `H_n`.
pub fn simulate_hn_quantile(n: usize, beta: f64, replications: usize, seed: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if replications < MIN_REPLICATIONS {
        return Err(Error::invalid(
            "replications",
            alloc::format!("{replications} is below the minimum of {MIN_REPLICATIONS}"),
        ));
    }
    let mut stats: Vec<f64> = (0..replications as u64)
        .map(|rep| null_statistic_replicate(n, seed, rep))
        .collect();
    upper_quantile(&mut stats, beta)
}

/// Tabulated asymptotic quantile. With `interpolate`, levels strictly inside
/// the table are interpolated linearly in `log(beta)`.
pub fn asymptotic_cvm_quantile(beta: f64, interpolate: bool) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ProbabilityOutOfRange(beta));
    }
    if let Some(&(_, q)) = ASYMPTOTIC_TABLE.iter().find(|(b, _)| (b - beta).abs() < 1e-12) {
        return Ok(q);
    }
    if interpolate {
        for w in ASYMPTOTIC_TABLE.windows(2) {
            let ((b_hi, q_lo), (b_lo, q_hi)) = (w[0], w[1]);
            if beta < b_hi && beta > b_lo {
                let t = (libm::log(b_hi) - libm::log(beta)) / (libm::log(b_hi) - libm::log(b_lo));
                return Ok(q_lo + t * (q_hi - q_lo));
            }
        }
    }
    Err(Error::UnsupportedLevel(beta))
}

/// Levels with a tabulated asymptotic quantile.
pub fn asymptotic_levels() -> impl Iterator<Item = f64> {
    ASYMPTOTIC_TABLE.iter().map(|&(b, _)| b)
}

/// Lower confidence bound together with the threshold it used.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LowerBound {
    pub alpha_lower: f64,
    pub beta: f64,
    pub critical_value: f64,
}

pub fn lower_bound(s: &SortedSample, fb: &KnownCdf, spec: &CriticalValueSpec) -> Result<LowerBound> {
    let c_n = spec.critical_value(s.len())?;
    lower_bound_with_cn(&CriterionEvaluator::new(s, fb), spec.beta, c_n)
}

/// Lower bound from a precomputed `c_n`.
pub fn lower_bound_with_cn(ev: &CriterionEvaluator, beta: f64, c_n: f64) -> Result<LowerBound> {
    Ok(LowerBound {
        alpha_lower: ev.estimate_alpha(c_n)?,
        beta,
        critical_value: c_n,
    })
}

/// Test of `F = Fb` against the presence of signal.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HomogeneityTest {
    pub reject: bool,
    pub bound: LowerBound,
}

pub fn homogeneity_test(s: &SortedSample, fb: &KnownCdf, spec: &CriticalValueSpec) -> Result<HomogeneityTest> {
    let bound = lower_bound(s, fb, spec)?;
    Ok(HomogeneityTest {
        reject: bound.alpha_lower > 0.0,
        bound,
    })
}
