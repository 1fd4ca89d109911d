//! Known distributions used as the background `Fb` (and as parametric signal
//! components in the identifiability calculators).

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Distribution;

use crate::rng;
use crate::special;
use crate::{Error, Result};

/// Residual mass below which infinite discrete supports are truncated.
pub const SUPPORT_TRUNCATION: f64 = 1e-12;

/// How a tabulated CDF is evaluated between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMode {
    /// Piecewise-linear interpolation (continuous surrogate).
    #[default]
    Linear,
    /// Right-continuous step function, for genuinely discrete tables.
    Step,
}

/// CDF given by a table of `(x, F(x))` pairs.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
    mode: TableMode,
}

impl TabulatedCdf {
    pub fn new(xs: Vec<f64>, mut fs: Vec<f64>, mode: TableMode) -> Result<Self> {
        if xs.len() != fs.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: fs.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::EmptySample);
        }
        if xs.iter().chain(&fs).any(|v| !v.is_finite()) {
            return Err(Error::invalid("table", "non-finite entry"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("table", "x grid must be strictly increasing"));
        }
        if fs.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(Error::invalid("table", "CDF values must be non-decreasing"));
        }
        let last = fs[fs.len() - 1];
        if fs[0] < 0.0 || (last - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("table", "CDF values must start >= 0 and end at 1"));
        }
        // absorb rounding so the table is exactly a CDF
        let mut running = 0.0f64;
        for f in fs.iter_mut() {
            running = running.max(f.clamp(0.0, 1.0));
            *f = running;
        }
        *fs.last_mut().expect("non-empty") = 1.0;
        Ok(Self { xs, fs, mode })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn fs(&self) -> &[f64] {
        &self.fs
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    fn cdf(&self, x: f64) -> f64 {
        if x < self.xs[0] {
            return 0.0;
        }
        // index of the last grid point <= x
        let i = self.xs.partition_point(|&g| g <= x) - 1;
        match self.mode {
            TableMode::Step => self.fs[i],
            TableMode::Linear => {
                if i + 1 == self.xs.len() {
                    return 1.0;
                }
                let (x0, x1) = (self.xs[i], self.xs[i + 1]);
                let (f0, f1) = (self.fs[i], self.fs[i + 1]);
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        let i = self.fs.partition_point(|&f| f < p);
        let i = i.min(self.xs.len() - 1);
        match self.mode {
            TableMode::Step => self.xs[i],
            TableMode::Linear => {
                if i == 0 {
                    return self.xs[0];
                }
                let (x0, x1) = (self.xs[i - 1], self.xs[i]);
                let (f0, f1) = (self.fs[i - 1], self.fs[i]);
                x0 + (p - f0) / (f1 - f0) * (x1 - x0)
            }
        }
    }
}

/// A fully specified distribution.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KnownCdf {
    Uniform { lo: f64, hi: f64 },
    Normal { mean: f64, sd: f64 },
    StudentT { df: f64 },
    Beta { a: f64, b: f64 },
    /// Density `exp(-(x - location) / scale) / scale` on `(location, inf)`.
    Exponential { location: f64, scale: f64 },
    /// Law of `Z + S U` with `Z ~ N(0, 1)`, `U ~ Uniform(lo, hi)` and a fair
    /// random sign `S`; the alternative of the shifted-normal simulation.
    SymmetricShiftNormal { lo: f64, hi: f64 },
    Poisson { rate: f64 },
    Binomial { trials: u64, prob: f64 },
    Tabulated(TabulatedCdf),
}

fn positive(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(what, alloc::format!("{v} must be positive and finite")))
    }
}

fn finite(what: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(what, alloc::format!("{v} is not finite")))
    }
}

impl KnownCdf {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::Uniform { lo, hi }.validated()
    }

    pub fn standard_uniform() -> Self {
        Self::Uniform { lo: 0.0, hi: 1.0 }
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::Normal { mean, sd }.validated()
    }

    pub fn standard_normal() -> Self {
        Self::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Self::StudentT { df }.validated()
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Self::Beta { a, b }.validated()
    }

    pub fn exponential(location: f64, scale: f64) -> Result<Self> {
        Self::Exponential { location, scale }.validated()
    }

    pub fn symmetric_shift_normal(lo: f64, hi: f64) -> Result<Self> {
        Self::SymmetricShiftNormal { lo, hi }.validated()
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Self::Poisson { rate }.validated()
    }

    pub fn binomial(trials: u64, prob: f64) -> Result<Self> {
        Self::Binomial { trials, prob }.validated()
    }

    pub fn tabulated(xs: Vec<f64>, fs: Vec<f64>, mode: TableMode) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedCdf::new(xs, fs, mode)?))
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter constraints of the variant.
    pub fn validate(&self) -> Result<()> {
        match *self {
            KnownCdf::Uniform { lo, hi } => {
                finite("uniform bound", lo)?;
                finite("uniform bound", hi)?;
                if lo >= hi {
                    return Err(Error::invalid("uniform bounds", "need lo < hi"));
                }
            }
            KnownCdf::Normal { mean, sd } => {
                finite("normal mean", mean)?;
                positive("normal sd", sd)?;
            }
            KnownCdf::StudentT { df } => positive("degrees of freedom", df)?,
            KnownCdf::Beta { a, b } => {
                positive("beta shape", a)?;
                positive("beta shape", b)?;
            }
            KnownCdf::Exponential { location, scale } => {
                finite("exponential location", location)?;
                positive("exponential scale", scale)?;
            }
            KnownCdf::SymmetricShiftNormal { lo, hi } => {
                finite("shift bound", lo)?;
                finite("shift bound", hi)?;
                if !(0.0 <= lo && lo < hi) {
                    return Err(Error::invalid("shift bounds", "need 0 <= lo < hi"));
                }
            }
            KnownCdf::Poisson { rate } => positive("poisson rate", rate)?,
            KnownCdf::Binomial { trials, prob } => {
                if trials == 0 {
                    return Err(Error::invalid("binomial trials", "need at least one trial"));
                }
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::invalid("binomial prob", alloc::format!("{prob} not in [0, 1]")));
                }
            }
            KnownCdf::Tabulated(_) => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            KnownCdf::Uniform { .. } => "uniform",
            KnownCdf::Normal { .. } => "normal",
            KnownCdf::StudentT { .. } => "student_t",
            KnownCdf::Beta { .. } => "beta",
            KnownCdf::Exponential { .. } => "exponential",
            KnownCdf::SymmetricShiftNormal { .. } => "symmetric_shift_normal",
            KnownCdf::Poisson { .. } => "poisson",
            KnownCdf::Binomial { .. } => "binomial",
            KnownCdf::Tabulated(_) => "tabulated",
        }
    }

    /// True for variants evaluated as continuous CDFs (including linearly
    /// interpolated tables).
    pub fn is_continuous(&self) -> bool {
        match self {
            KnownCdf::Poisson { .. } | KnownCdf::Binomial { .. } => false,
            KnownCdf::Tabulated(t) => t.mode == TableMode::Linear,
            _ => true,
        }
    }

    pub fn is_discrete(&self) -> bool {
        !self.is_continuous()
    }

    /// `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match self {
            KnownCdf::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            KnownCdf::Normal { mean, sd } => special::normal_cdf((x - mean) / sd),
            KnownCdf::StudentT { df } => special::student_t_cdf(x, *df),
            KnownCdf::Beta { a, b } => special::reg_inc_beta(x, *a, *b),
            KnownCdf::Exponential { location, scale } => {
                if x <= *location {
                    0.0
                } else {
                    -libm::expm1(-(x - location) / scale)
                }
            }
            KnownCdf::SymmetricShiftNormal { lo, hi } => {
                // d/dt [t Phi(t) + phi(t)] = Phi(t)
                let anti = |t: f64| t * special::normal_cdf(t) + special::normal_pdf(t);
                let width = hi - lo;
                let plus = (anti(x - lo) - anti(x - hi)) / width;
                let minus = (anti(x + hi) - anti(x + lo)) / width;
                (0.5 * (plus + minus)).clamp(0.0, 1.0)
            }
            KnownCdf::Poisson { rate } => {
                if x < 0.0 {
                    return 0.0;
                }
                let k = libm::floor(x);
                let mut total = 0.0;
                let mut j = 0.0;
                while j <= k {
                    total += poisson_pmf(*rate, j);
                    if total >= 1.0 {
                        return 1.0;
                    }
                    j += 1.0;
                }
                total
            }
            KnownCdf::Binomial { trials, prob } => {
                if x < 0.0 {
                    return 0.0;
                }
                let k = libm::floor(x).min(*trials as f64) as u64;
                let total: f64 = (0..=k).map(|j| binomial_pmf(*trials, *prob, j)).sum();
                total.min(1.0)
            }
            KnownCdf::Tabulated(t) => t.cdf(x),
        }
    }

    /// Density for continuous variants, probability mass for discrete ones.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(match self {
            KnownCdf::Uniform { lo, hi } => {
                if (*lo..=*hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            KnownCdf::Normal { mean, sd } => special::normal_pdf((x - mean) / sd) / sd,
            KnownCdf::StudentT { df } => special::student_t_pdf(x, *df),
            KnownCdf::Beta { a, b } => {
                if !(0.0..=1.0).contains(&x) {
                    0.0
                } else if (x == 0.0 && *a < 1.0) || (x == 1.0 && *b < 1.0) {
                    f64::INFINITY
                } else if (x == 0.0 && *a > 1.0) || (x == 1.0 && *b > 1.0) {
                    0.0
                } else {
                    // x^(a-1) (1-x)^(b-1) / B(a, b), guarding 0^0
                    let la = if *a == 1.0 { 0.0 } else { (a - 1.0) * libm::log(x) };
                    let lb = if *b == 1.0 { 0.0 } else { (b - 1.0) * libm::log1p(-x) };
                    libm::exp(la + lb - special::ln_beta(*a, *b))
                }
            }
            KnownCdf::Exponential { location, scale } => {
                if x < *location {
                    0.0
                } else {
                    libm::exp(-(x - location) / scale) / scale
                }
            }
            KnownCdf::SymmetricShiftNormal { lo, hi } => {
                let phi = special::normal_cdf;
                let width = hi - lo;
                0.5 * ((phi(x - lo) - phi(x - hi)) + (phi(x + hi) - phi(x + lo))) / width
            }
            KnownCdf::Poisson { rate } => {
                if x >= 0.0 && libm::floor(x) == x {
                    poisson_pmf(*rate, x)
                } else {
                    0.0
                }
            }
            KnownCdf::Binomial { trials, prob } => {
                if x >= 0.0 && libm::floor(x) == x && x <= *trials as f64 {
                    binomial_pmf(*trials, *prob, x as u64)
                } else {
                    0.0
                }
            }
            KnownCdf::Tabulated(_) => return Err(Error::NoDensity),
        })
    }

    /// Generalized inverse `inf { t : p <= F(t) }` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(match self {
            KnownCdf::Uniform { lo, hi } => lo + p * (hi - lo),
            KnownCdf::Normal { mean, sd } => mean + sd * special::normal_quantile(p),
            KnownCdf::Exponential { location, scale } => location - scale * libm::log1p(-p),
            KnownCdf::Beta { .. } => self.bisect_quantile(p, 0.0, 1.0),
            KnownCdf::StudentT { .. } | KnownCdf::SymmetricShiftNormal { .. } => {
                let (lo, hi) = self.bracket(p);
                self.bisect_quantile(p, lo, hi)
            }
            KnownCdf::Poisson { rate } => {
                let mut total = 0.0;
                let mut k = 0.0;
                loop {
                    total += poisson_pmf(*rate, k);
                    if total >= p || total >= 1.0 {
                        break k;
                    }
                    k += 1.0;
                }
            }
            KnownCdf::Binomial { trials, prob } => {
                let mut total = 0.0;
                let mut k = 0u64;
                loop {
                    total += binomial_pmf(*trials, *prob, k);
                    if total >= p || k == *trials {
                        break k as f64;
                    }
                    k += 1;
                }
            }
            KnownCdf::Tabulated(t) => t.quantile(p),
        })
    }

    fn bracket(&self, p: f64) -> (f64, f64) {
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.cdf(lo) >= p {
            lo *= 2.0;
        }
        while self.cdf(hi) < p {
            hi *= 2.0;
        }
        (lo, hi)
    }

    /// Bisection down to adjacent doubles; requires `F(lo) < p <= F(hi)`.
    fn bisect_quantile(&self, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return hi;
            }
            if self.cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            KnownCdf::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            KnownCdf::Normal { mean, sd } => {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                mean + sd * z
            }
            KnownCdf::StudentT { df } => rand_distr::StudentT::new(*df)
                .expect("validated df")
                .sample(rng),
            KnownCdf::Beta { a, b } => rand_distr::Beta::new(*a, *b)
                .expect("validated shapes")
                .sample(rng),
            KnownCdf::Exponential { location, scale } => {
                let e: f64 = rand_distr::Exp1.sample(rng);
                location + scale * e
            }
            KnownCdf::SymmetricShiftNormal { lo, hi } => {
                let z: f64 = rand_distr::StandardNormal.sample(rng);
                let shift = lo + (hi - lo) * rng.random::<f64>();
                if rng.random::<bool>() {
                    z + shift
                } else {
                    z - shift
                }
            }
            KnownCdf::Poisson { rate } => rand_distr::Poisson::new(*rate)
                .expect("validated rate")
                .sample(rng),
            KnownCdf::Binomial { trials, prob } => rand_distr::Binomial::new(*trials, *prob)
                .expect("validated parameters")
                .sample(rng) as f64,
            KnownCdf::Tabulated(t) => loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break t.quantile(u);
                }
            },
        }
    }

    /// `n` draws from the sequence seeded by `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng::seeded(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    /// Atoms `(location, mass)` of a discrete variant; infinite supports are
    /// cut once the remaining mass is below [`SUPPORT_TRUNCATION`].
    pub fn atoms(&self) -> Result<Vec<(f64, f64)>> {
        match self {
            KnownCdf::Poisson { rate } => {
                let mut atoms = Vec::new();
                let mut total = 0.0;
                let mut k = 0.0;
                loop {
                    let mass = poisson_pmf(*rate, k);
                    total += mass;
                    if mass > 0.0 {
                        atoms.push((k, mass));
                    }
                    // past the mode the tail is bounded by the remaining mass
                    if 1.0 - total < SUPPORT_TRUNCATION && k > *rate {
                        break;
                    }
                    k += 1.0;
                }
                Ok(atoms)
            }
            KnownCdf::Binomial { trials, prob } => Ok((0..=*trials)
                .map(|k| (k as f64, binomial_pmf(*trials, *prob, k)))
                .filter(|(_, m)| *m > 0.0)
                .collect()),
            KnownCdf::Tabulated(t) if t.mode == TableMode::Step => {
                let mut prev = 0.0;
                Ok(t.xs
                    .iter()
                    .zip(&t.fs)
                    .filter_map(|(&x, &f)| {
                        let mass = f - prev;
                        prev = f;
                        (mass > 0.0).then_some((x, mass))
                    })
                    .collect())
            }
            _ => Err(Error::NotDiscrete("atom enumeration")),
        }
    }
}

fn poisson_pmf(rate: f64, k: f64) -> f64 {
    libm::exp(k * libm::log(rate) - rate - special::ln_gamma(k + 1.0))
}

fn binomial_pmf(trials: u64, prob: f64, k: u64) -> f64 {
    if k > trials {
        return 0.0;
    }
    if prob == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if prob == 1.0 {
        return if k == trials { 1.0 } else { 0.0 };
    }
    let (n, k) = (trials as f64, k as f64);
    let ln_choose = special::ln_gamma(n + 1.0) - special::ln_gamma(k + 1.0) - special::ln_gamma(n - k + 1.0);
    libm::exp(ln_choose + k * libm::log(prob) + (n - k) * libm::log1p(-prob))
}

/// Maps each `x` to `quantile(x)` of a continuous `d`, i.e. `Y = Psi^{-1}(X)`
/// with `Psi = d.cdf`.
pub fn push_through_quantile(xs: &[f64], d: &KnownCdf) -> Result<Vec<f64>> {
    if !d.is_continuous() {
        return Err(Error::NonInvertible);
    }
    xs.iter().map(|&x| d.quantile(x)).collect()
}

/// Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_distance(sample: &[f64], d: &KnownCdf) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = d.cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    /// Adaptive Simpson quadrature.
    fn adaptive<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let whole = simpson(f, a, b, 2);
        let split = simpson(f, a, c, 2) + simpson(f, c, b, 2);
        if depth == 0 || (split - whole).abs() < 15.0 * tol {
            split + (split - whole) / 15.0
        } else {
            adaptive(f, a, c, tol / 2.0, depth - 1) + adaptive(f, c, b, tol / 2.0, depth - 1)
        }
    }

    fn continuous_zoo() -> Vec<KnownCdf> {
        vec![
            KnownCdf::standard_uniform(),
            KnownCdf::uniform(-2.0, 3.0).unwrap(),
            KnownCdf::standard_normal(),
            KnownCdf::normal(2.0, 0.5).unwrap(),
            KnownCdf::student_t(9.0).unwrap(),
            KnownCdf::student_t(2.5).unwrap(),
            KnownCdf::beta(1.0, 10.0).unwrap(),
            KnownCdf::beta(2.0, 3.0).unwrap(),
            KnownCdf::exponential(1.0, 2.0).unwrap(),
            KnownCdf::symmetric_shift_normal(1.0, 2.0).unwrap(),
        ]
    }

    #[test]
    fn cdf_examples() {
        assert!((KnownCdf::standard_uniform().cdf(0.3) - 0.3).abs() < 1e-15);
        assert_eq!(KnownCdf::standard_normal().cdf(0.0), 0.5);
        let beta = KnownCdf::beta(1.0, 10.0).unwrap();
        let closed = 1.0 - libm::pow(0.9, 10.0);
        assert!((beta.cdf(0.1) - closed).abs() < 1e-14);
        assert!((closed - 0.6513).abs() < 1e-4);
        // numeric integration oracle
        let q = simpson(|x| beta.density(x).unwrap(), 0.0, 0.1, 10_000);
        assert!((q - closed).abs() < 1e-12);
    }

    #[test]
    fn density_examples() {
        let d = KnownCdf::standard_normal().density(0.0).unwrap();
        assert!((d - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((d - 0.39894).abs() < 1e-5);
        assert_eq!(KnownCdf::standard_uniform().density(0.5).unwrap(), 1.0);
        let m = KnownCdf::poisson(1.0).unwrap().density(0.0).unwrap();
        assert!((m - libm::exp(-1.0)).abs() < 1e-15);
        let t = KnownCdf::tabulated(vec![0.0, 1.0], vec![0.0, 1.0], TableMode::Linear).unwrap();
        assert_eq!(t.density(0.5), Err(Error::NoDensity));
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(KnownCdf::standard_uniform().quantile(0.25).unwrap(), 0.25);
        let z = KnownCdf::standard_normal().quantile(0.975).unwrap();
        assert!((z - 1.95996).abs() < 1e-5);
        let t = KnownCdf::student_t(9.0).unwrap().quantile(0.975).unwrap();
        assert!((t - 2.2622).abs() < 1e-4);
        // bisection oracle for the normal, independent of the Halley path
        let n = KnownCdf::standard_normal();
        let (mut lo, mut hi) = (0.0f64, 5.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if n.cdf(mid) >= 0.975 {
                hi = mid
            } else {
                lo = mid
            }
        }
        assert!((z - hi).abs() < 1e-12);
        for p in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(KnownCdf::standard_normal().quantile(p).is_err());
        }
    }

    #[test]
    fn quantile_is_generalized_inverse() {
        let mut zoo = continuous_zoo();
        zoo.push(KnownCdf::tabulated(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 0.3, 0.3, 1.0], TableMode::Linear).unwrap());
        let mut rng = rng::seeded(11);
        for _ in 0..1000 {
            let d = &zoo[rng.random_range(0..zoo.len())];
            let p: f64 = rng.random_range(1e-6..1.0 - 1e-6);
            let q = d.quantile(p).unwrap();
            assert!(d.cdf(q) >= p - 1e-15, "{d:?} p={p}");
            let eps = 1e-9 * q.abs().max(1.0);
            assert!(d.cdf(q - eps) < p + 1e-12, "{d:?} p={p}");
        }
        for d in [
            KnownCdf::poisson(3.5).unwrap(),
            KnownCdf::binomial(7, 0.3).unwrap(),
            KnownCdf::tabulated(vec![0.0, 1.0, 2.0], vec![0.2, 0.7, 1.0], TableMode::Step).unwrap(),
        ] {
            for i in 1..100 {
                let p = i as f64 / 100.0;
                let q = d.quantile(p).unwrap();
                assert!(d.cdf(q) >= p - 1e-15);
                assert!(d.cdf(q - 0.5) < p);
            }
        }
    }

    #[test]
    fn cdf_is_monotone_with_limits() {
        for d in continuous_zoo().into_iter().chain([
            KnownCdf::poisson(2.0).unwrap(),
            KnownCdf::binomial(5, 0.4).unwrap(),
        ]) {
            let mut prev = 0.0;
            for i in 0..=4000 {
                let x = -40.0 + 0.02 * i as f64;
                let f = d.cdf(x);
                assert!(f >= prev - 1e-15 && (0.0..=1.0).contains(&f), "{d:?} at {x}");
                prev = f;
            }
            assert!(d.cdf(-1e6) < 1e-12 && d.cdf(1e6) > 1.0 - 1e-12, "{d:?}");
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in continuous_zoo() {
            let (lo, hi) = match d {
                KnownCdf::Uniform { lo, hi } => (lo, hi),
                KnownCdf::Beta { .. } => (0.0, 1.0),
                KnownCdf::Exponential { location, .. } => (location, location + 80.0),
                KnownCdf::StudentT { .. } => (-2000.0, 2000.0),
                _ => (-40.0, 40.0),
            };
            let total = adaptive(|x| d.density(x).unwrap(), lo, hi, 1e-10, 40);
            // heavy t tails beyond the window
            let missing = d.cdf(lo) + (1.0 - d.cdf(hi));
            assert!((total + missing - 1.0).abs() < 1e-6, "{d:?}: {total}");
        }
        for d in [KnownCdf::poisson(4.2).unwrap(), KnownCdf::binomial(12, 0.35).unwrap()] {
            let total: f64 = d.atoms().unwrap().iter().map(|a| a.1).sum();
            assert!((total - 1.0).abs() < 1e-12, "{d:?}: {total}");
        }
    }

    #[test]
    fn shift_normal_density_matches_cdf_derivative() {
        let d = KnownCdf::symmetric_shift_normal(1.0, 2.0).unwrap();
        for x in [-3.0, -1.2, 0.0, 0.4, 2.2] {
            let h = 1e-5;
            let fd = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            assert!((fd - d.density(x).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = KnownCdf::standard_normal();
        assert!(d.sample(0, 1).is_empty());
        let a = d.sample(100, 42);
        let b = d.sample(100, 42);
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
        assert_ne!(a, d.sample(100, 43));
    }

    #[test]
    fn uniform_sample_passes_ks() {
        let u = KnownCdf::standard_uniform();
        let s = u.sample(100_000, 5);
        assert!(ks_distance(&s, &u) < 0.01);
        for d in continuous_zoo() {
            let s = d.sample(20_000, 9);
            // 1% critical value of the KS statistic is 1.63 / sqrt(n)
            assert!(ks_distance(&s, &d) < 1.63 / libm::sqrt(20_000.0), "{d:?}");
        }
    }

    #[test]
    fn push_through_quantile_examples() {
        let normal = KnownCdf::standard_normal();
        assert!(push_through_quantile(&[], &normal).unwrap().is_empty());
        let xs = [-2.5, -0.3, 0.0, 0.8, 3.1];
        let ps: Vec<f64> = xs.iter().map(|&x| normal.cdf(x)).collect();
        let back = push_through_quantile(&ps, &normal).unwrap();
        for (a, b) in xs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        let u = KnownCdf::standard_uniform().sample(20_000, 3);
        let z = push_through_quantile(&u, &normal).unwrap();
        assert!(ks_distance(&z, &normal) < 1.63 / libm::sqrt(20_000.0));
        assert_eq!(
            push_through_quantile(&[0.5], &KnownCdf::poisson(1.0).unwrap()),
            Err(Error::NonInvertible)
        );
        let step = KnownCdf::tabulated(vec![0.0, 1.0], vec![0.5, 1.0], TableMode::Step).unwrap();
        assert_eq!(push_through_quantile(&[0.5], &step), Err(Error::NonInvertible));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(KnownCdf::normal(0.0, 0.0).is_err());
        assert!(KnownCdf::uniform(1.0, 1.0).is_err());
        assert!(KnownCdf::beta(-1.0, 1.0).is_err());
        assert!(KnownCdf::binomial(0, 0.5).is_err());
        assert!(KnownCdf::binomial(3, 1.5).is_err());
        assert!(KnownCdf::poisson(0.0).is_err());
        assert!(KnownCdf::tabulated(vec![0.0, 0.0], vec![0.5, 1.0], TableMode::Linear).is_err());
        assert!(KnownCdf::tabulated(vec![0.0, 1.0], vec![0.5, 0.9], TableMode::Linear).is_err());
        assert!(KnownCdf::tabulated(vec![0.0, 1.0], vec![0.6, 0.5], TableMode::Linear).is_err());
    }
}
