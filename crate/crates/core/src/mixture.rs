//! Estimators of the identifiable mixing proportion.
//!
//! For a candidate proportion `gamma`, the naive component estimate
//! `(Fn - (1 - gamma) Fb) / gamma` is projected onto the set of CDFs in the
//! `L2(Fn)` metric. The distance between the two, scaled by `gamma`, is the
//! criterion: it is non-increasing and convex in `gamma`, vanishes at 1 and
//! changes regime at the identifiable proportion.

use alloc::vec::Vec;

use crate::distributions::KnownCdf;
use crate::shape_restricted::isotonic_regression_uniform;
use crate::{Error, Result};

/// Bisection stops once the bracket is this narrow.
pub const BISECTION_TOLERANCE: f64 = 1e-6;
pub const BISECTION_MAX_ITERATIONS: usize = 60;
/// Default number of grid points for the criterion curve.
pub const DEFAULT_GRID: usize = 200;
/// Second-difference peaks within this fraction of the maximum are reported.
pub const PEAK_FRACTION: f64 = 0.95;

/// Observations sorted ascending, with `Fn` evaluated at each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
    ecdf: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid("observation", alloc::format!("{x} is not finite")));
        }
        data.sort_by(f64::total_cmp);
        let n = data.len();
        let mut ecdf = alloc::vec![0.0; n];
        // tied observations share Fn at the last index of their block
        let mut end = n;
        for i in (0..n).rev() {
            if i + 1 < n && data[i] != data[i + 1] {
                end = i + 1;
            }
            ecdf[i] = end as f64 / n as f64;
        }
        Ok(Self { values: data, ecdf })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Fn(X_(i))` for each order statistic.
    pub fn ecdf_at_points(&self) -> &[f64] {
        &self.ecdf
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn empirical_cdf(&self) -> StepCdf {
        StepCdf::from_points(&self.values, &self.ecdf)
    }
}

/// Right-continuous, non-decreasing step function with values in `[0, 1]`;
/// zero left of the first jump.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StepCdf {
    locations: Vec<f64>,
    values: Vec<f64>,
}

impl StepCdf {
    pub fn new(locations: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if locations.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: locations.len(),
                right: values.len(),
            });
        }
        if locations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("jump locations", "must be strictly increasing"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) || values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("step values", "must be non-decreasing within [0, 1]"));
        }
        Ok(Self { locations, values })
    }

    /// Collapses runs of equal locations, keeping the value at the end of each run.
    fn from_points(xs: &[f64], ys: &[f64]) -> Self {
        let mut locations: Vec<f64> = Vec::with_capacity(xs.len());
        let mut values: Vec<f64> = Vec::with_capacity(xs.len());
        for (&x, &y) in xs.iter().zip(ys) {
            if locations.last() == Some(&x) {
                *values.last_mut().expect("paired push") = y;
            } else {
                locations.push(x);
                values.push(y);
            }
        }
        Self { locations, values }
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.locations.partition_point(|&l| l <= x) {
            0 => 0.0,
            i => self.values[i - 1],
        }
    }

    /// `sup_x |S(x) - F(x)|` against a continuous CDF.
    pub fn sup_distance(&self, d: &KnownCdf) -> f64 {
        let mut prev = 0.0;
        let mut sup: f64 = 0.0;
        for (&x, &v) in self.locations.iter().zip(&self.values) {
            let f = d.cdf(x);
            sup = sup.max((v - f).abs()).max((prev - f).abs());
            prev = v;
        }
        sup.max((1.0 - prev).abs())
    }
}

fn check_gamma(gamma: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        (0.0..=1.0).contains(&gamma)
    } else {
        gamma > 0.0 && gamma <= 1.0
    };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid("gamma", alloc::format!("{gamma} outside the admissible range")))
    }
}

/// `Fn` and `Fb` at the order statistics; every criterion evaluation for the
/// same data reuses them.
#[derive(Debug, Clone)]
pub struct CriterionEvaluator {
    ecdf: Vec<f64>,
    background: Vec<f64>,
}

impl CriterionEvaluator {
    pub fn new(s: &SortedSample, fb: &KnownCdf) -> Self {
        Self {
            ecdf: s.ecdf.clone(),
            background: s.values.iter().map(|&x| fb.cdf(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ecdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ecdf.is_empty()
    }

    /// `Fb(X_(i))`.
    pub fn background(&self) -> &[f64] {
        &self.background
    }

    pub fn naive_values(&self, gamma: f64) -> Result<Vec<f64>> {
        check_gamma(gamma, false)?;
        Ok(self
            .ecdf
            .iter()
            .zip(&self.background)
            .map(|(f, b)| (f - (1.0 - gamma) * b) / gamma)
            .collect())
    }

    /// Isotonized and clipped estimate of `Fs` at each order statistic.
    pub fn isotonized_values(&self, gamma: f64) -> Result<Vec<f64>> {
        let naive = self.naive_values(gamma)?;
        let mut fitted = isotonic_regression_uniform(&naive)?;
        for v in fitted.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(fitted)
    }

    /// `dn(Fn, Fb)`, the criterion's limit as `gamma -> 0+`.
    pub fn distance_to_background(&self) -> f64 {
        let ss: f64 = self
            .ecdf
            .iter()
            .zip(&self.background)
            .map(|(f, b)| (f - b) * (f - b))
            .sum();
        libm::sqrt(ss / self.len() as f64)
    }

    /// `gamma * dn(naive, isotonized)`; `gamma = 0` gives `dn(Fn, Fb)`.
    pub fn criterion(&self, gamma: f64) -> Result<f64> {
        check_gamma(gamma, true)?;
        if gamma == 0.0 {
            return Ok(self.distance_to_background());
        }
        let fitted = self.isotonized_values(gamma)?;
        // gamma * (naive - fitted) = Fn - (1 - gamma) Fb - gamma * fitted
        let ss: f64 = self
            .ecdf
            .iter()
            .zip(&self.background)
            .zip(&fitted)
            .map(|((f, b), t)| {
                let r = f - (1.0 - gamma) * b - gamma * t;
                r * r
            })
            .sum();
        Ok(libm::sqrt(ss / self.len() as f64))
    }

    /// Criterion on the grid `k / grid_size`, `k = 1..=grid_size`.
    pub fn curve(&self, grid_size: usize) -> Result<CriterionCurve> {
        if grid_size < 10 {
            return Err(Error::invalid("grid size", "need at least 10 points"));
        }
        let values = (1..=grid_size)
            .map(|k| self.criterion(k as f64 / grid_size as f64))
            .collect::<Result<Vec<_>>>()?;
        CriterionCurve::from_grid(self.distance_to_background(), values)
    }

    /// `inf { gamma : sqrt(n) * criterion(gamma) <= c_n }` by bisection.
    ///
    /// The feasible set is an interval `[alpha_hat, 1]`, so bisection is exact
    /// up to [`BISECTION_TOLERANCE`]; the returned point is always feasible.
    pub fn estimate_alpha(&self, c_n: f64) -> Result<f64> {
        if c_n.is_nan() || c_n <= 0.0 {
            return Err(Error::invalid("c_n", alloc::format!("{c_n} must be positive")));
        }
        let threshold = c_n / libm::sqrt(self.len() as f64);
        if self.distance_to_background() <= threshold {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..BISECTION_MAX_ITERATIONS {
            if hi - lo <= BISECTION_TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.criterion(mid)? <= threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

/// Naive estimate `(Fn(X_(i)) - (1 - gamma) Fb(X_(i))) / gamma`; may leave `[0, 1]`.
pub fn naive_component_values(s: &SortedSample, fb: &KnownCdf, gamma: f64) -> Result<Vec<f64>> {
    CriterionEvaluator::new(s, fb).naive_values(gamma)
}

/// The `L2(Fn)` projection of the naive estimate onto CDFs, as a step function
/// jumping at the order statistics.
pub fn isotonized_cdf(s: &SortedSample, fb: &KnownCdf, gamma: f64) -> Result<StepCdf> {
    let fitted = CriterionEvaluator::new(s, fb).isotonized_values(gamma)?;
    Ok(StepCdf::from_points(&s.values, &fitted))
}

pub fn criterion(s: &SortedSample, fb: &KnownCdf, gamma: f64) -> Result<f64> {
    CriterionEvaluator::new(s, fb).criterion(gamma)
}

pub fn criterion_curve(s: &SortedSample, fb: &KnownCdf, grid_size: usize) -> Result<CriterionCurve> {
    CriterionEvaluator::new(s, fb).curve(grid_size)
}

pub fn estimate_alpha_cn(s: &SortedSample, fb: &KnownCdf, c_n: f64) -> Result<f64> {
    CriterionEvaluator::new(s, fb).estimate_alpha(c_n)
}

/// `tau * log(log(n))`.
pub fn default_cn(n: usize, tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid("tau", alloc::format!("{tau} must be positive")));
    }
    if (n as f64) <= core::f64::consts::E {
        return Err(Error::CnUndefined(n));
    }
    Ok(tau * libm::log(libm::log(n as f64)))
}

/// Criterion values on a uniform grid together with their numerical second
/// differences.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CriterionCurve {
    gammas: Vec<f64>,
    values: Vec<f64>,
    value_at_zero: f64,
    second_differences: Vec<f64>,
}

impl CriterionCurve {
    /// Builds the curve for the grid `k / m`, `k = 1..=m`, where `m =
    /// values.len()`. The left neighbour of the first grid point is the
    /// `gamma = 0` value.
    pub fn from_grid(value_at_zero: f64, values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 3 {
            return Err(Error::invalid("criterion curve", "need at least 3 grid points"));
        }
        let h = 1.0 / m as f64;
        let gammas: Vec<f64> = (1..=m).map(|k| k as f64 / m as f64).collect();
        let second_differences = (0..m - 1)
            .map(|i| {
                let left = if i == 0 { value_at_zero } else { values[i - 1] };
                (left - 2.0 * values[i] + values[i + 1]) / (h * h)
            })
            .collect();
        Ok(Self {
            gammas,
            values,
            value_at_zero,
            second_differences,
        })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    /// Second differences at `gammas()[..len - 1]`; the last grid point
    /// (`gamma = 1`) has no right neighbour.
    pub fn second_differences(&self) -> &[f64] {
        &self.second_differences
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Point of maximum second difference, with every near-maximal peak.
    pub fn elbow(&self) -> Result<Elbow> {
        let sd = &self.second_differences;
        let (argmax, max) = sd
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        if max.is_nan() || max <= 1e-12 {
            return Err(Error::NoElbow);
        }
        let cutoff = PEAK_FRACTION * max;
        let peak_gammas: Vec<f64> = (0..sd.len())
            .filter(|&i| {
                let left_ok = i == 0 || sd[i] >= sd[i - 1];
                let right_ok = i + 1 == sd.len() || sd[i] >= sd[i + 1];
                sd[i] >= cutoff && left_ok && right_ok
            })
            .map(|i| self.gammas[i])
            .collect();
        let estimate = peak_gammas.first().copied().unwrap_or(self.gammas[argmax]);
        Ok(Elbow {
            estimate,
            argmax_gamma: self.gammas[argmax],
            max_second_difference: max,
            peak_gammas,
        })
    }
}

/// Outcome of the elbow search.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Elbow {
    /// Smallest grid point among the near-maximal peaks.
    pub estimate: f64,
    /// Grid point of the largest second difference.
    pub argmax_gamma: f64,
    pub max_second_difference: f64,
    /// Local maxima of the second differences within [`PEAK_FRACTION`] of the maximum.
    pub peak_gammas: Vec<f64>,
}

/// The elbow estimate of the identifiable proportion.
pub fn elbow_estimate(curve: &CriterionCurve) -> Result<f64> {
    Ok(curve.elbow()?.estimate)
}
