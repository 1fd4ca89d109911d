//! The identifiable proportion `alpha0 = alpha (1 - essinf fs / fb)` of a
//! fully specified mixture.

use alloc::vec::Vec;

use crate::distributions::KnownCdf;
use crate::{Error, Result};

/// Default number of background quantiles scanned for the essential infimum.
pub const DEFAULT_GRID: usize = 100_000;

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(alpha))
    }
}

/// `inf fs / fb` over the atoms of a discrete `fb`.
pub fn discrete_ratio_infimum(fs: &KnownCdf, fb: &KnownCdf) -> Result<f64> {
    for d in [fs, fb] {
        if !d.is_discrete() {
            return Err(Error::NotDiscrete(d.name()));
        }
    }
    match (fs, fb) {
        (KnownCdf::Poisson { rate: ls }, KnownCdf::Poisson { rate: lb }) => {
            Ok(if ls >= lb { libm::exp(lb - ls) } else { 0.0 })
        }
        (KnownCdf::Binomial { trials: ns, prob: ps }, KnownCdf::Binomial { trials: nb, prob: pb }) if ns == nb => {
            let n = *ns as f64;
            // the likelihood ratio is monotone in k, so an endpoint attains the infimum
            Ok(if ps >= pb {
                libm::pow((1.0 - ps) / (1.0 - pb), n)
            } else {
                libm::pow(ps / pb, n)
            })
        }
        _ => discrete_ratio_infimum_by_atoms(fs, fb),
    }
}

/// Atom enumeration, shared with the closed forms' cross-checks.
///
/// Infinite supports are truncated (see [`KnownCdf::atoms`]), so when the
/// ratio only approaches its infimum in the far tail the result is an upper
/// bound. Poisson signals with a smaller rate than a Poisson background are
/// the typical case; [`discrete_ratio_infimum`] handles those in closed form.
pub fn discrete_ratio_infimum_by_atoms(fs: &KnownCdf, fb: &KnownCdf) -> Result<f64> {
    let signal = fs.atoms()?;
    let background = fb.atoms()?;
    let mut inf = f64::INFINITY;
    for (x, mb) in background {
        let ms = signal
            .binary_search_by(|(y, _)| y.total_cmp(&x))
            .map(|i| signal[i].1)
            .unwrap_or(0.0);
        inf = inf.min(ms / mb);
    }
    Ok(inf.min(1.0))
}

/// Discrete components.
pub fn alpha0_discrete(alpha: f64, fs: &KnownCdf, fb: &KnownCdf) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha * (1.0 - discrete_ratio_infimum(fs, fb)?))
}

fn check_continuous(fs: &KnownCdf, fb: &KnownCdf) -> Result<()> {
    for d in [fs, fb] {
        if !d.is_continuous() {
            return Err(Error::NotContinuous(d.name()));
        }
        if matches!(d, KnownCdf::Tabulated(_)) {
            return Err(Error::NoDensity);
        }
    }
    Ok(())
}

/// `essinf fs / fb` for the normal and exponential pairs, `None` otherwise.
pub fn continuous_ratio_infimum_closed_form(fs: &KnownCdf, fb: &KnownCdf) -> Option<f64> {
    match (fs, fb) {
        (KnownCdf::Normal { mean: ms, sd: ss }, KnownCdf::Normal { mean: mb, sd: sb }) => {
            if ss == sb {
                return Some(if ms == mb { 1.0 } else { 0.0 });
            }
            if ss < sb {
                return Some(0.0);
            }
            // log ratio = ln(sb / ss) + q(x), q minimized at x*
            let (vs, vb) = (ss * ss, sb * sb);
            let a = 1.0 / vb - 1.0 / vs;
            let x = (mb / vb - ms / vs) / a;
            let q = (x - mb) * (x - mb) / (2.0 * vb) - (x - ms) * (x - ms) / (2.0 * vs);
            Some(((sb / ss) * libm::exp(q)).min(1.0))
        }
        (
            KnownCdf::Exponential {
                location: a_s,
                scale: ss,
            },
            KnownCdf::Exponential {
                location: a_b,
                scale: sb,
            },
        ) => {
            if a_s > a_b || ss < sb {
                return Some(0.0);
            }
            // ratio is non-decreasing on [a_b, inf) and minimal at a_b
            Some(((sb / ss) * libm::exp(-(a_b - a_s) / ss)).min(1.0))
        }
        _ => None,
    }
}

/// Minimum of `fs / fb` over the background quantiles `k / (grid + 1)`.
pub fn continuous_ratio_infimum_on_grid(fs: &KnownCdf, fb: &KnownCdf, grid: usize) -> Result<f64> {
    check_continuous(fs, fb)?;
    if grid == 0 {
        return Err(Error::invalid("grid", "must be positive"));
    }
    let mut inf = f64::INFINITY;
    for k in 1..=grid {
        let x = fb.quantile(k as f64 / (grid + 1) as f64)?;
        let b = fb.density(x)?;
        if b > 0.0 {
            inf = inf.min(fs.density(x)? / b);
        }
    }
    Ok(inf.min(1.0))
}

pub fn continuous_ratio_infimum(fs: &KnownCdf, fb: &KnownCdf, grid: usize) -> Result<f64> {
    check_continuous(fs, fb)?;
    match continuous_ratio_infimum_closed_form(fs, fb) {
        Some(r) => Ok(r),
        None => continuous_ratio_infimum_on_grid(fs, fb, grid),
    }
}

/// Absolutely continuous components.
pub fn alpha0_continuous(alpha: f64, fs: &KnownCdf, fb: &KnownCdf, grid: usize) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha * (1.0 - continuous_ratio_infimum(fs, fb, grid)?))
}

/// Dispatches on the component types.
pub fn alpha0(alpha: f64, fs: &KnownCdf, fb: &KnownCdf) -> Result<f64> {
    if fs.is_discrete() && fb.is_discrete() {
        alpha0_discrete(alpha, fs, fb)
    } else {
        alpha0_continuous(alpha, fs, fb, DEFAULT_GRID)
    }
}

/// A distribution `kappa * continuous + (1 - kappa) * discrete`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MixedComponent {
    pub kappa: f64,
    pub continuous: KnownCdf,
    pub discrete: KnownCdf,
}

impl MixedComponent {
    pub fn new(kappa: f64, continuous: KnownCdf, discrete: KnownCdf) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::ProbabilityOutOfRange(kappa));
        }
        if !continuous.is_continuous() {
            return Err(Error::NotContinuous(continuous.name()));
        }
        if !discrete.is_discrete() {
            return Err(Error::NotDiscrete(discrete.name()));
        }
        Ok(Self {
            kappa,
            continuous,
            discrete,
        })
    }
}

/// Components with both an absolutely continuous and a discrete part.
///
/// `alpha Fs - eps Fb` stays a sub-CDF as long as `eps` is below both
/// `alpha kappa_s r_a / kappa_b` and `alpha (1 - kappa_s) r_d / (1 - kappa_b)`,
/// where `r_a`, `r_d` are the ratio infima of the two parts. A part absent
/// from the background imposes no constraint.
pub fn alpha0_mixed(alpha: f64, fs: &MixedComponent, fb: &MixedComponent, grid: usize) -> Result<f64> {
    check_alpha(alpha)?;
    let mut bounds: Vec<f64> = Vec::with_capacity(2);
    if fb.kappa > 0.0 {
        let r = if fs.kappa > 0.0 {
            continuous_ratio_infimum(&fs.continuous, &fb.continuous, grid)?
        } else {
            0.0
        };
        bounds.push(alpha * fs.kappa * r / fb.kappa);
    }
    if fb.kappa < 1.0 {
        let r = if fs.kappa < 1.0 {
            discrete_ratio_infimum(&fs.discrete, &fb.discrete)?
        } else {
            0.0
        };
        bounds.push(alpha * (1.0 - fs.kappa) * r / (1.0 - fb.kappa));
    }
    let eps = bounds.into_iter().fold(f64::INFINITY, f64::min).min(alpha);
    Ok((alpha - eps).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn poisson_examples() {
        let s = KnownCdf::poisson(2.0).unwrap();
        let b = KnownCdf::poisson(1.0).unwrap();
        close(alpha0_discrete(0.3, &s, &b).unwrap(), 0.3 * (1.0 - libm::exp(-1.0)), 1e-15);
        close(alpha0_discrete(0.3, &s, &b).unwrap(), 0.18964, 1e-5);
        assert_eq!(alpha0_discrete(0.3, &b, &s).unwrap(), 0.3);
        close(
            discrete_ratio_infimum_by_atoms(&s, &b).unwrap(),
            discrete_ratio_infimum(&s, &b).unwrap(),
            1e-12,
        );
    }

    #[test]
    fn binomial_examples() {
        let s = KnownCdf::binomial(2, 0.6).unwrap();
        let b = KnownCdf::binomial(2, 0.4).unwrap();
        close(alpha0_discrete(1.0, &s, &b).unwrap(), 5.0 / 9.0, 1e-15);
        close(
            alpha0_discrete(1.0, &b, &s).unwrap(),
            1.0 - libm::pow(0.4 / 0.6, 2.0),
            1e-15,
        );
        // supports differ
        let s = KnownCdf::binomial(2, 0.5).unwrap();
        let b = KnownCdf::binomial(3, 0.5).unwrap();
        assert_eq!(alpha0_discrete(0.4, &s, &b).unwrap(), 0.4);
        assert!(alpha0_discrete(0.4, &KnownCdf::standard_normal(), &b).is_err());
    }

    #[test]
    fn normal_examples() {
        let b = KnownCdf::standard_normal();
        for s in [KnownCdf::normal(2.0, 1.0).unwrap(), KnownCdf::normal(0.0, 0.5).unwrap()] {
            assert_eq!(alpha0_continuous(0.3, &s, &b, 1000).unwrap(), 0.3);
        }
        assert_eq!(alpha0_continuous(0.3, &b, &b, 1000).unwrap(), 0.0);

        // N(0, 4) against N(0, 1): ratio minimal at 0 where it equals 1/2
        let s = KnownCdf::normal(0.0, 2.0).unwrap();
        close(alpha0_continuous(0.5, &s, &b, 1000).unwrap(), 0.25, 1e-15);
        // dense uniform-x grid oracle
        let mut inf = f64::INFINITY;
        for i in 0..=1_000_000 {
            let x = -10.0 + 20.0 * i as f64 / 1e6;
            inf = inf.min(s.density(x).unwrap() / b.density(x).unwrap());
        }
        close(alpha0_continuous(0.5, &s, &b, 1000).unwrap(), 0.5 * (1.0 - inf), 1e-9);
    }

    #[test]
    fn exponential_examples() {
        let b = KnownCdf::exponential(0.0, 1.0).unwrap();
        assert_eq!(
            alpha0_continuous(0.4, &KnownCdf::exponential(0.5, 1.0).unwrap(), &b, 1000).unwrap(),
            0.4
        );
        assert_eq!(
            alpha0_continuous(0.4, &KnownCdf::exponential(0.0, 0.5).unwrap(), &b, 1000).unwrap(),
            0.4
        );
        let s = KnownCdf::exponential(0.0, 2.0).unwrap();
        close(alpha0_continuous(0.4, &s, &b, 1000).unwrap(), 0.2, 1e-15);
        // equal scales, signal shifted left: ratio constant exp(-1) on [0, inf)
        let s = KnownCdf::exponential(-1.0, 1.0).unwrap();
        close(
            alpha0_continuous(1.0, &s, &b, 1000).unwrap(),
            1.0 - libm::exp(-1.0),
            1e-15,
        );
    }

    #[test]
    fn beta_against_uniform() {
        let s = KnownCdf::beta(1.0, 10.0).unwrap();
        let b = KnownCdf::standard_uniform();
        close(alpha0_continuous(0.1, &s, &b, DEFAULT_GRID).unwrap(), 0.1, 1e-12);
        assert!(alpha0_continuous(0.1, &KnownCdf::poisson(1.0).unwrap(), &b, 10).is_err());
    }

    #[test]
    fn shift_mixture_factor() {
        let s = KnownCdf::symmetric_shift_normal(1.0, 2.0).unwrap();
        let b = KnownCdf::standard_normal();
        let r = alpha0_continuous(1.0, &s, &b, DEFAULT_GRID).unwrap();
        // ratio minimal at 0: sqrt(2 pi) (Phi(2) - Phi(1))
        let oracle = 1.0 - libm::sqrt(2.0 * core::f64::consts::PI) * (normal_cdf(2.0) - normal_cdf(1.0));
        close(r, oracle, 1e-6);
    }

    #[test]
    fn mixed_reduces_to_pure_cases() {
        let nb = KnownCdf::standard_normal();
        let ns = KnownCdf::normal(0.0, 2.0).unwrap();
        let pb = KnownCdf::poisson(1.0).unwrap();
        let ps = KnownCdf::poisson(2.0).unwrap();
        let s = MixedComponent::new(1.0, ns.clone(), ps.clone()).unwrap();
        let b = MixedComponent::new(1.0, nb.clone(), pb.clone()).unwrap();
        close(
            alpha0_mixed(0.5, &s, &b, 1000).unwrap(),
            alpha0_continuous(0.5, &ns, &nb, 1000).unwrap(),
            1e-15,
        );
        let s = MixedComponent::new(0.0, ns.clone(), ps.clone()).unwrap();
        let b = MixedComponent::new(0.0, nb.clone(), pb.clone()).unwrap();
        close(
            alpha0_mixed(0.3, &s, &b, 1000).unwrap(),
            alpha0_discrete(0.3, &ps, &pb).unwrap(),
            1e-15,
        );
        let b = MixedComponent::new(0.4, nb, pb).unwrap();
        assert!(alpha0_mixed(0.7, &b, &b, 1000).unwrap() < 1e-15);
        assert!(MixedComponent::new(1.2, ns, ps).is_err());
    }

    #[test]
    fn alpha0_is_linear_in_alpha() {
        let s = KnownCdf::normal(0.3, 1.7).unwrap();
        let b = KnownCdf::standard_normal();
        let unit = alpha0(1.0, &s, &b).unwrap();
        for k in 1..10 {
            let a = k as f64 / 10.0;
            close(alpha0(a, &s, &b).unwrap(), a * unit, 1e-15);
            assert!(alpha0(a, &s, &b).unwrap() <= a);
        }
    }
}
