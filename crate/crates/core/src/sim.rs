//! Simulation scenarios and replication metrics.
//!
//! Each replication draws from its own stream `rng::stream(base_seed, rep)`,
//! so results do not depend on the order replications are run in.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::confidence::{CriticalMethod, CriticalValueSpec, DEFAULT_REPLICATIONS};
use crate::distributions::KnownCdf;
use crate::identifiability::{alpha0_continuous, DEFAULT_GRID as IDENT_GRID};
use crate::mixture::{default_cn, CriterionEvaluator, SortedSample, DEFAULT_GRID};
use crate::special::student_t_two_sided_pvalue;
use crate::{rng, Error, Result};

/// Effect-size range of the bi-triangular alternative means.
pub const BITRIANGULAR_A: f64 = 0.263;
pub const BITRIANGULAR_B: f64 = 2.0;
/// At and above this sample size the asymptotic critical value is the default.
pub const ASYMPTOTIC_MIN_N: usize = 500;

/// One draw from the symmetric bi-triangular law: a triangle on `[a, b]`
/// peaked at the midpoint, mirrored onto `[-b, -a]` with probability 1/2.
pub fn draw_bitriangular<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let magnitude = a + (b - a) * 0.5 * (u + v);
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

pub fn bitriangular_sample(a: f64, b: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::invalid("bi-triangular range", alloc::format!("need 0 < a < b, got [{a}, {b}]")));
    }
    let mut r = rng::seeded(seed);
    Ok((0..count).map(|_| draw_bitriangular(a, b, &mut r)).collect())
}

/// Data-generating process of one simulation study.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind")]
pub enum ScenarioConfig {
    /// Two-sided one-sample t-test p-values from `j` observations per unit;
    /// units in blocks of `block_size` share a factor with correlation `rho`.
    A {
        n: usize,
        j: usize,
        alpha: f64,
        #[serde(default)]
        rho: f64,
        #[serde(default = "default_block_size")]
        block_size: usize,
    },
    /// Moving-average normal scores with lag `l`; alternatives shifted by
    /// `+-U(m_star, m_star + 1)`.
    B { n: usize, l: usize, m_star: f64, alpha: f64 },
    /// `alpha N(2, 1) + (1 - alpha) N(0, 1)`.
    SettingI { n: usize, alpha: f64 },
    /// `alpha Beta(1, 10) + (1 - alpha) U(0, 1)`.
    SettingII { n: usize, alpha: f64 },
}

fn default_block_size() -> usize {
    100
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let (n, alpha) = (self.n(), self.alpha());
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::ProbabilityOutOfRange(alpha));
        }
        match *self {
            ScenarioConfig::A { j, rho, block_size, .. } => {
                if j < 2 {
                    return Err(Error::invalid("j", "need at least 2 observations per unit"));
                }
                if !(0.0..1.0).contains(&rho) {
                    return Err(Error::invalid("rho", alloc::format!("{rho} outside [0, 1)")));
                }
                if block_size == 0 {
                    return Err(Error::invalid("block_size", "must be positive"));
                }
            }
            ScenarioConfig::B { m_star, .. } if !(m_star.is_finite() && m_star >= 0.0) => {
                return Err(Error::invalid("m_star", alloc::format!("{m_star} must be non-negative")));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        match *self {
            ScenarioConfig::A { n, .. }
            | ScenarioConfig::B { n, .. }
            | ScenarioConfig::SettingI { n, .. }
            | ScenarioConfig::SettingII { n, .. } => n,
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            ScenarioConfig::A { alpha, .. }
            | ScenarioConfig::B { alpha, .. }
            | ScenarioConfig::SettingI { alpha, .. }
            | ScenarioConfig::SettingII { alpha, .. } => alpha,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::A { .. } => "A",
            ScenarioConfig::B { .. } => "B",
            ScenarioConfig::SettingI { .. } => "SettingI",
            ScenarioConfig::SettingII { .. } => "SettingII",
        }
    }

    pub fn background(&self) -> KnownCdf {
        match self {
            ScenarioConfig::A { .. } | ScenarioConfig::SettingII { .. } => KnownCdf::standard_uniform(),
            ScenarioConfig::B { .. } | ScenarioConfig::SettingI { .. } => KnownCdf::standard_normal(),
        }
    }

    /// Identifiable proportion used as the reference for bias and coverage.
    pub fn alpha0(&self) -> Result<f64> {
        match *self {
            ScenarioConfig::B { m_star, alpha, .. } => {
                let fs = KnownCdf::symmetric_shift_normal(m_star, m_star + 1.0)?;
                alpha0_continuous(alpha, &fs, &KnownCdf::standard_normal(), IDENT_GRID)
            }
            _ => Ok(self.alpha()),
        }
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match *self {
            ScenarioConfig::A {
                n,
                j,
                alpha,
                rho,
                block_size,
            } => generate_a(rng, n, j, alpha, rho, block_size),
            ScenarioConfig::B { n, l, m_star, alpha } => generate_b(rng, n, l, m_star, alpha),
            ScenarioConfig::SettingI { n, alpha } => {
                let signal = KnownCdf::Normal { mean: 2.0, sd: 1.0 };
                generate_labelled(rng, n, alpha, &signal, &KnownCdf::standard_normal())
            }
            ScenarioConfig::SettingII { n, alpha } => {
                let signal = KnownCdf::Beta { a: 1.0, b: 10.0 };
                generate_labelled(rng, n, alpha, &signal, &KnownCdf::standard_uniform())
            }
        }
    }
}

/// Marks `round(alpha n)` randomly chosen units as alternatives.
fn alternative_mask<R: Rng + ?Sized>(rng: &mut R, n: usize, alpha: f64) -> Vec<bool> {
    let k = libm::round(alpha * n as f64) as usize;
    let mut mask = vec![false; n];
    for i in index::sample(rng, n, k.min(n)) {
        mask[i] = true;
    }
    mask
}

/// `units x j` standard normals, row-major. Rows in the same block of
/// `block_size` share a factor: `sqrt(rho) factor + sqrt(1 - rho) noise`.
pub fn block_correlated_normals<R: Rng + ?Sized>(
    rng: &mut R,
    units: usize,
    j: usize,
    rho: f64,
    block_size: usize,
) -> Vec<f64> {
    let (shared, own) = (libm::sqrt(rho), libm::sqrt(1.0 - rho));
    let mut factor = vec![0.0; j];
    let mut out = Vec::with_capacity(units * j);
    for i in 0..units {
        if i % block_size.max(1) == 0 {
            for f in factor.iter_mut() {
                *f = StandardNormal.sample(rng);
            }
        }
        for f in &factor {
            let e: f64 = StandardNormal.sample(rng);
            out.push(shared * f + own * e);
        }
    }
    out
}

/// `z_i = (w_i + ... + w_{i+l}) / sqrt(l + 1)` from `n + l` standard normals.
pub fn moving_average_normals<R: Rng + ?Sized>(rng: &mut R, n: usize, l: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n + l).map(|_| StandardNormal.sample(rng)).collect();
    let scale = 1.0 / libm::sqrt((l + 1) as f64);
    let mut window: f64 = w[..l.min(w.len())].iter().sum();
    (0..n)
        .map(|i| {
            window += w[i + l];
            let z = scale * window;
            window -= w[i];
            z
        })
        .collect()
}

fn generate_a<R: Rng + ?Sized>(rng: &mut R, n: usize, j: usize, alpha: f64, rho: f64, block_size: usize) -> Vec<f64> {
    let mask = alternative_mask(rng, n, alpha);
    let mu: Vec<f64> = mask
        .iter()
        .map(|&alt| {
            if alt {
                draw_bitriangular(BITRIANGULAR_A, BITRIANGULAR_B, rng)
            } else {
                0.0
            }
        })
        .collect();
    let noise = block_correlated_normals(rng, n, j, rho, block_size);
    let df = (j - 1) as f64;
    noise
        .chunks_exact(j)
        .zip(&mu)
        .map(|(row, m)| {
            let mean = m + row.iter().sum::<f64>() / j as f64;
            let var = row
                .iter()
                .map(|x| (m + x - mean) * (m + x - mean))
                .sum::<f64>()
                / df;
            student_t_two_sided_pvalue(mean / libm::sqrt(var / j as f64), df)
        })
        .collect()
}

fn generate_b<R: Rng + ?Sized>(rng: &mut R, n: usize, l: usize, m_star: f64, alpha: f64) -> Vec<f64> {
    let mask = alternative_mask(rng, n, alpha);
    let mut z = moving_average_normals(rng, n, l);
    for (x, alt) in z.iter_mut().zip(mask) {
        if alt {
            let m = m_star + rng.random::<f64>();
            *x += if rng.random::<bool>() { m } else { -m };
        }
    }
    z
}

fn generate_labelled<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    alpha: f64,
    signal: &KnownCdf,
    background: &KnownCdf,
) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.random::<f64>() < alpha {
                signal.draw(rng)
            } else {
                background.draw(rng)
            }
        })
        .collect()
}

/// Estimators run in every replication.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EstimatorSelection {
    /// One thresholded estimate per `tau`, with `c_n = tau log log n`.
    #[serde(default = "default_taus")]
    pub cn_taus: Vec<f64>,
    #[serde(default = "yes")]
    pub elbow: bool,
    #[serde(default = "yes")]
    pub lower_bound: bool,
}

fn default_taus() -> Vec<f64> {
    vec![0.1]
}

fn yes() -> bool {
    true
}

impl Default for EstimatorSelection {
    fn default() -> Self {
        Self {
            cn_taus: default_taus(),
            elbow: true,
            lower_bound: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimulationConfig {
    pub scenario: ScenarioConfig,
    pub replications: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub estimators: EstimatorSelection,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Critical value for the lower bound; by default asymptotic from
    /// [`ASYMPTOTIC_MIN_N`] on, Monte Carlo below.
    #[serde(default)]
    pub critical: Option<CriticalMethod>,
}

fn default_beta() -> f64 {
    0.05
}

fn default_grid() -> usize {
    DEFAULT_GRID
}

impl SimulationConfig {
    pub fn new(scenario: ScenarioConfig, replications: usize, base_seed: u64) -> Self {
        Self {
            scenario,
            replications,
            base_seed,
            estimators: EstimatorSelection::default(),
            beta: default_beta(),
            grid: default_grid(),
            critical: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.replications == 0 {
            return Err(Error::invalid("replications", "must be at least 1"));
        }
        if self.estimators.cn_taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("cn_taus", "must be positive"));
        }
        self.critical_spec().validate()
    }

    /// The lower-bound critical value specification in effect.
    pub fn critical_spec(&self) -> CriticalValueSpec {
        let method = self.critical.unwrap_or(if self.scenario.n() >= ASYMPTOTIC_MIN_N {
            CriticalMethod::Asymptotic { interpolate: false }
        } else {
            CriticalMethod::MonteCarlo {
                replications: DEFAULT_REPLICATIONS,
                seed: self.base_seed,
            }
        });
        CriticalValueSpec { beta: self.beta, method }
    }
}

/// Estimates from one replication.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Outcome {
    pub cn_estimates: Vec<f64>,
    pub elbow: Option<f64>,
    pub lower_bound: Option<f64>,
}

/// A configuration with its per-study constants resolved.
#[derive(Debug, Clone)]
pub struct PreparedSimulation {
    config: SimulationConfig,
    background: KnownCdf,
    alpha0: f64,
    cn: Vec<f64>,
    lower_cn: Option<f64>,
}

impl PreparedSimulation {
    pub fn prepare(config: SimulationConfig) -> Result<Self> {
        Self::prepare_with(config, |n, spec| spec.critical_value(n))
    }

    /// `critical` computes the lower-bound `c_n`; callers may substitute a
    /// cached or parallel computation.
    pub fn prepare_with<F>(config: SimulationConfig, critical: F) -> Result<Self>
    where
        F: FnOnce(usize, &CriticalValueSpec) -> Result<f64>,
    {
        config.validate()?;
        let n = config.scenario.n();
        let cn = config
            .estimators
            .cn_taus
            .iter()
            .map(|&tau| default_cn(n, tau))
            .collect::<Result<Vec<_>>>()?;
        let lower_cn = if config.estimators.lower_bound {
            Some(critical(n, &config.critical_spec())?)
        } else {
            None
        };
        Ok(Self {
            background: config.scenario.background(),
            alpha0: config.scenario.alpha0()?,
            cn,
            lower_cn,
            config,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn lower_bound_cn(&self) -> Option<f64> {
        self.lower_cn
    }

    /// The data of replication `rep`.
    pub fn sample(&self, rep: u64) -> Vec<f64> {
        let mut r = rng::stream(self.config.base_seed, rep);
        self.config.scenario.generate(&mut r)
    }

    pub fn replicate(&self, rep: u64) -> Result<Outcome> {
        let s = SortedSample::new(self.sample(rep))?;
        let ev = CriterionEvaluator::new(&s, &self.background);
        let cn_estimates = self
            .cn
            .iter()
            .map(|&c| ev.estimate_alpha(c))
            .collect::<Result<Vec<_>>>()?;
        let elbow = if self.config.estimators.elbow {
            match ev.curve(self.config.grid)?.elbow() {
                Ok(e) => Some(e.estimate),
                Err(Error::NoElbow) => Some(0.0),
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let lower_bound = self.lower_cn.map(|c| ev.estimate_alpha(c)).transpose()?;
        Ok(Outcome {
            cn_estimates,
            elbow,
            lower_bound,
        })
    }

    /// Aggregates outcomes listed in replication order.
    pub fn summarize(&self, outcomes: &[Outcome]) -> MetricsTable {
        let alpha = self.config.scenario.alpha();
        let mut rows = Vec::new();
        for (k, tau) in self.config.estimators.cn_taus.iter().enumerate() {
            let xs: Vec<f64> = outcomes.iter().map(|o| o.cn_estimates[k]).collect();
            rows.push(MetricsRow::from_estimates(
                alloc::format!("cn_tau_{tau}"),
                alpha,
                self.alpha0,
                &xs,
                false,
            ));
        }
        if self.config.estimators.elbow {
            let xs: Vec<f64> = outcomes.iter().filter_map(|o| o.elbow).collect();
            rows.push(MetricsRow::from_estimates("elbow".into(), alpha, self.alpha0, &xs, false));
        }
        if self.lower_cn.is_some() {
            let xs: Vec<f64> = outcomes.iter().filter_map(|o| o.lower_bound).collect();
            rows.push(MetricsRow::from_estimates(
                "lower_bound".into(),
                alpha,
                self.alpha0,
                &xs,
                true,
            ));
        }
        MetricsTable {
            scenario: self.config.scenario.name().into(),
            n: self.config.scenario.n(),
            base_seed: self.config.base_seed,
            rows,
        }
    }
}

/// Serial replication loop.
pub fn run_replications(config: SimulationConfig) -> Result<MetricsTable> {
    let prepared = PreparedSimulation::prepare(config)?;
    let outcomes = (0..prepared.config.replications as u64)
        .map(|rep| prepared.replicate(rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(prepared.summarize(&outcomes))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MetricsRow {
    pub estimator: String,
    pub alpha: f64,
    pub alpha0: f64,
    pub mean: f64,
    pub rmse: f64,
    /// Fraction of replications with the estimate at or below `alpha0`;
    /// reported for lower bounds only.
    pub coverage: Option<f64>,
    pub reps: usize,
}

impl MetricsRow {
    fn from_estimates(estimator: String, alpha: f64, alpha0: f64, xs: &[f64], with_coverage: bool) -> Self {
        let reps = xs.len();
        let m = reps.max(1) as f64;
        let mean = xs.iter().sum::<f64>() / m;
        let rmse = libm::sqrt(xs.iter().map(|x| (x - alpha0) * (x - alpha0)).sum::<f64>() / m);
        let coverage = with_coverage.then(|| xs.iter().filter(|&&x| x <= alpha0).count() as f64 / m);
        Self {
            estimator,
            alpha,
            alpha0,
            mean,
            rmse,
            coverage,
            reps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MetricsTable {
    pub scenario: String,
    pub n: usize,
    pub base_seed: u64,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, estimator: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }
}
