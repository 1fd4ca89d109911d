//! Recovery of the signal component once a proportion has been chosen: its
//! CDF, the least concave majorant of that CDF, the induced non-increasing
//! density and the local false discovery rate.

use alloc::vec::Vec;

use crate::distributions::KnownCdf;
use crate::mixture::{isotonized_cdf, SortedSample, StepCdf};
use crate::shape_restricted::{least_concave_majorant, PiecewiseLinearConcaveFn};
use crate::special::normal_cdf;
use crate::{Error, Result};

/// Isotonized estimate of `Fs` at proportion `alpha`.
pub fn estimate_fs(s: &SortedSample, fb: &KnownCdf, alpha: f64) -> Result<StepCdf> {
    if alpha == 0.0 {
        return Err(Error::ZeroSignal);
    }
    isotonized_cdf(s, fb, alpha)
}

/// Least concave majorant of a step CDF supported on `[0, inf)`, over the
/// knots `{0}` and the jump locations.
pub fn concavify(f: &StepCdf) -> Result<PiecewiseLinearConcaveFn> {
    if f.locations().first().is_some_and(|&x| x < 0.0) {
        return Err(Error::NegativeSupport);
    }
    let mut knots = Vec::with_capacity(f.len() + 1);
    let mut values = Vec::with_capacity(f.len() + 1);
    if f.locations().first() != Some(&0.0) {
        knots.push(0.0);
        values.push(0.0);
    }
    knots.extend_from_slice(f.locations());
    values.extend_from_slice(f.values());
    least_concave_majorant(&knots, &values)
}

/// Non-increasing step density: `values[j]` holds on `(knots[j], knots[j + 1]]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MonotoneDensity {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl MonotoneDensity {
    /// Left derivative of a concave majorant.
    pub fn from_concave(f: &PiecewiseLinearConcaveFn) -> Self {
        Self {
            knots: f.knots().to_vec(),
            values: f.slopes().into_iter().map(|s| s.max(0.0)).collect(),
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Left-derivative convention at knots. On `[0, knots[1]]` the first
    /// slope applies; outside `[0, last knot]` the density is zero.
    pub fn eval(&self, x: f64) -> f64 {
        if self.values.is_empty() || x < 0.0 || x > self.knots[self.knots.len() - 1] {
            return 0.0;
        }
        let j = self.knots.partition_point(|&k| k < x);
        self.values[j.saturating_sub(1).min(self.values.len() - 1)]
    }

    /// `int f = sum of slope * width`.
    pub fn integral(&self) -> f64 {
        self.knots
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| v * (w[1] - w[0]))
            .sum()
    }
}

pub fn density_estimate(f: &PiecewiseLinearConcaveFn) -> MonotoneDensity {
    MonotoneDensity::from_concave(f)
}

/// Local false discovery rates at increasing evaluation points.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LfdrCurve {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl LfdrCurve {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `(1 - a) fb / (a f + (1 - a) fb)`; a point where both densities vanish
/// gets 1.
pub fn lfdr(points: &[f64], alpha: f64, density: &MonotoneDensity, fb: &KnownCdf) -> Result<LfdrCurve> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::ProbabilityOutOfRange(alpha));
    }
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("evaluation points", "must be sorted"));
    }
    let values = points
        .iter()
        .map(|&x| {
            let b = (1.0 - alpha) * fb.density(x)?;
            let total = alpha * density.eval(x) + b;
            Ok(if total > 0.0 { (b / total).clamp(0.0, 1.0) } else { 1.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LfdrCurve {
        points: points.to_vec(),
        values,
    })
}

/// Everything recovered about the signal at one proportion.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SignalEstimate {
    pub alpha_used: f64,
    pub fs_step: StepCdf,
    pub fs_concave: PiecewiseLinearConcaveFn,
    pub density: MonotoneDensity,
}

pub fn recover_signal(s: &SortedSample, fb: &KnownCdf, alpha: f64) -> Result<SignalEstimate> {
    let fs_step = estimate_fs(s, fb, alpha)?;
    let fs_concave = concavify(&fs_step)?;
    let density = MonotoneDensity::from_concave(&fs_concave);
    Ok(SignalEstimate {
        alpha_used: alpha,
        fs_step,
        fs_concave,
        density,
    })
}

/// Normal distribution closest to a step CDF in `L2` weighted by the step
/// masses.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NormalFit {
    pub mean: f64,
    pub sd: f64,
    pub distance: f64,
}

/// Coarse grid search followed by shrinking local grids. A convenience fit,
/// not a certified optimum.
pub fn fit_closest_normal(f: &StepCdf) -> Result<NormalFit> {
    if f.is_empty() {
        return Err(Error::EmptySample);
    }
    let xs = f.locations();
    let mut prev = 0.0;
    let weights: Vec<f64> = f
        .values()
        .iter()
        .map(|&v| {
            let w = v - prev;
            prev = v;
            w
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("step CDF", "has no mass"));
    }
    let distance = |mean: f64, sd: f64| {
        let ss: f64 = xs
            .iter()
            .zip(f.values())
            .zip(&weights)
            .map(|((&x, &v), &w)| {
                let d = v - normal_cdf((x - mean) / sd);
                w * d * d
            })
            .sum();
        libm::sqrt(ss / total)
    };

    let mean0: f64 = xs.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>() / total;
    let var0: f64 = xs.iter().zip(&weights).map(|(x, w)| w * (x - mean0) * (x - mean0)).sum::<f64>() / total;
    let span = xs[xs.len() - 1] - xs[0];
    let sd0 = libm::sqrt(var0).max(span * 1e-3).max(1e-9);

    let (mut mean, mut sd) = (mean0, sd0);
    let mut best = distance(mean, sd);
    let (mut mean_radius, mut log_sd_radius) = (2.0 * sd0, libm::log(8.0));
    const STEPS: i32 = 20;
    for _ in 0..8 {
        let (centre_mean, centre_sd) = (mean, sd);
        for i in -STEPS..=STEPS {
            let m = centre_mean + mean_radius * i as f64 / STEPS as f64;
            for j in -STEPS..=STEPS {
                let s = centre_sd * libm::exp(log_sd_radius * j as f64 / STEPS as f64);
                let d = distance(m, s);
                if d < best {
                    best = d;
                    mean = m;
                    sd = s;
                }
            }
        }
        mean_radius *= 0.2;
        log_sd_radius *= 0.2;
    }
    Ok(NormalFit {
        mean,
        sd,
        distance: best,
    })
}
