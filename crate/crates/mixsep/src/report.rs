//! JSON report shapes. Schemas for each live in `schemas/`.

use mixsep_core::sim::{MetricsTable, SimulationConfig};
use mixsep_core::{Elbow, LowerBound};
use serde::Serialize;

/// Enough to rerun a command and get byte-identical output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub args: Vec<String>,
    pub seed: u64,
    pub input_sha256: Option<String>,
}

impl Provenance {
    pub fn new(seed: u64, input_sha256: Option<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            args: std::env::args().skip(1).collect(),
            seed,
            input_sha256,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalValueReport {
    pub method: &'static str,
    #[serde(flatten)]
    pub bound: LowerBound,
    pub replications: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveReference {
    pub grid: usize,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignalSummary {
    pub alpha_used: f64,
    pub alpha_source: &'static str,
    pub step_points: usize,
    pub concave_knots: Option<usize>,
    pub density_at_zero: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub n: usize,
    pub background: String,
    pub tau: f64,
    pub c_n: f64,
    pub alpha_hat_cn: f64,
    pub alpha_tilde_elbow: Option<f64>,
    pub elbow: Option<Elbow>,
    pub lower_bound: CriticalValueReport,
    pub criterion_curve: CurveReference,
    pub signal: Option<SignalSummary>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignalFiles {
    pub fs_step: String,
    pub fs_concave: Option<String>,
    pub density: Option<String>,
    pub lfdr: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignalReport {
    pub n: usize,
    pub background: String,
    pub alpha_used: f64,
    pub alpha_source: &'static str,
    pub lfdr_points: Option<usize>,
    pub files: SignalFiles,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentifiabilityReport {
    pub alpha: f64,
    pub alpha0: f64,
    pub identifiable: bool,
    pub signal: String,
    pub background: String,
    pub method: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub metrics: MetricsTable,
    pub lower_bound_c_n: Option<f64>,
    pub provenance: Provenance,
}
