//! Parallel Monte-Carlo and replication loops. Every replication owns a
//! seeded stream and results are collected in replication order, so output
//! does not depend on the thread count.

use mixsep_core::confidence::{null_statistic_replicate, upper_quantile, MIN_REPLICATIONS};
use mixsep_core::sim::{MetricsTable, PreparedSimulation, SimulationConfig};
use mixsep_core::{CriticalMethod, CriticalValueSpec, Error, Result};
use rayon::prelude::*;

use crate::cache::QuantileCache;

pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `threads = None` uses rayon's default.
    pub fn new(threads: Option<usize>) -> std::result::Result<Self, rayon::ThreadPoolBuildError> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t.max(1));
        }
        Ok(Self { pool: builder.build()? })
    }

    /// `f(0), ..., f(count - 1)` in order.
    pub fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(&f).collect())
    }

    pub fn hn_quantile(&self, n: usize, beta: f64, replications: usize, seed: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if replications < MIN_REPLICATIONS {
            return Err(Error::invalid(
                "replications",
                format!("{replications} is below the minimum of {MIN_REPLICATIONS}"),
            ));
        }
        let mut stats = self.map(replications as u64, |rep| null_statistic_replicate(n, seed, rep));
        upper_quantile(&mut stats, beta)
    }

    /// `c_n` for `spec`, reading and filling `cache` for Monte-Carlo values.
    pub fn critical_value(&self, n: usize, spec: &CriticalValueSpec, cache: &QuantileCache) -> Result<f64> {
        spec.validate()?;
        match spec.method {
            CriticalMethod::MonteCarlo { replications, seed } => {
                if let Some(q) = cache.get(n, spec.beta, replications, seed) {
                    return Ok(q);
                }
                let q = self.hn_quantile(n, spec.beta, replications, seed)?;
                cache.put(n, spec.beta, replications, seed, q);
                Ok(q)
            }
            _ => spec.critical_value(n),
        }
    }

    pub fn run_replications(&self, config: SimulationConfig, cache: &QuantileCache) -> Result<MetricsTable> {
        let prepared = PreparedSimulation::prepare_with(config, |n, spec| self.critical_value(n, spec, cache))?;
        let reps = prepared.config().replications as u64;
        let outcomes = self
            .map(reps, |rep| prepared.replicate(rep))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(prepared.summarize(&outcomes))
    }
}
