//! Nonparametric estimation for two-component mixtures `F = a Fs + (1 - a) Fb`
//! where the background `Fb` is known.
//!
//! The crate is `no_std` (it needs `alloc`). It provides:
//!
//! * [`shape_restricted`]: weighted PAVA, least concave majorants, clipping.
//! * [`distributions`]: the known-distribution kernel used for `Fb` and `Fs`.
//! * [`mixture`]: the naive and isotonized component estimators, the distance
//!   criterion, the thresholded estimator and the elbow estimator.
//! * [`confidence`]: the distribution-free lower confidence bound and its
//!   critical values.
//! * [`signal`]: recovery of `Fs`, its non-increasing density and local FDR.
//! * [`identifiability`]: closed-form and numeric identifiable proportions.
//! * [`sim`]: simulation scenarios and replication metrics.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod confidence;
pub mod distributions;
mod error;
pub mod identifiability;
pub mod mixture;
pub mod rng;
pub mod shape_restricted;
pub mod signal;
pub mod sim;
pub mod special;

pub use error::{Error, Result};

pub use confidence::{CriticalMethod, CriticalValueSpec, LowerBound};
pub use distributions::{KnownCdf, TableMode};
pub use mixture::{CriterionCurve, CriterionEvaluator, Elbow, SortedSample, StepCdf};
pub use shape_restricted::{PiecewiseLinearConcaveFn, WeightedVector};
pub use signal::{LfdrCurve, MonotoneDensity, SignalEstimate};
