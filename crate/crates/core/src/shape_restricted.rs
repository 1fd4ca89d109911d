//! Order-restricted projections: weighted isotonic regression (PAVA),
//! unit-interval clipping and least concave majorants.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Absolute slack used when checking monotonicity or concavity of numerically
/// produced sequences.
pub const MONOTONE_TOLERANCE: f64 = 1e-12;

/// Values to be projected onto the monotone cone together with their
/// (strictly positive) weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedVector {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: weights.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("value", alloc::format!("{v} is not finite")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::invalid("weight", alloc::format!("{w} is not positive")));
        }
        Ok(Self { values, weights })
    }

    /// Unit weights.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let weights = alloc::vec![1.0; values.len()];
        Self::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

struct Block {
    mean: f64,
    weight: f64,
    len: usize,
}

fn pava<W>(values: &[f64], weight: W) -> Vec<f64>
where
    W: Fn(usize) -> f64,
{
    let mut blocks: Vec<Block> = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        blocks.push(Block {
            mean: v,
            weight: weight(i),
            len: 1,
        });
        while blocks.len() >= 2 {
            let last = blocks.len() - 1;
            if blocks[last - 1].mean <= blocks[last].mean {
                break;
            }
            let right = blocks.pop().expect("at least two blocks");
            let left = blocks.last_mut().expect("at least one block");
            let total = left.weight + right.weight;
            left.mean = (left.mean * left.weight + right.mean * right.weight) / total;
            left.weight = total;
            left.len += right.len;
        }
    }
    let mut fitted = Vec::with_capacity(values.len());
    for block in &blocks {
        fitted.extend(core::iter::repeat_n(block.mean, block.len));
    }
    fitted
}

/// Weighted least-squares projection onto non-decreasing sequences.
///
/// Single left-to-right pass with back-merging of violating blocks, O(n).
pub fn isotonic_regression(v: &WeightedVector) -> Vec<f64> {
    let weights = v.weights();
    pava(v.values(), |i| weights[i])
}

/// Isotonic regression with equal weights; this is the projection used for
/// the `L2(Fn)` metric.
pub fn isotonic_regression_uniform(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(pava(values, |_| 1.0))
}

/// Element-wise `min(max(x, 0), 1)`.
pub fn clip_unit(seq: &[f64]) -> Vec<f64> {
    seq.iter().map(|x| x.clamp(0.0, 1.0)).collect()
}

/// Piecewise-linear concave function given by its vertices.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PiecewiseLinearConcaveFn {
    knots: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearConcaveFn {
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Slopes of the linear pieces; `slopes()[j]` holds on `(knots[j], knots[j + 1]]`.
    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect()
    }

    pub fn first_knot(&self) -> f64 {
        self.knots[0]
    }

    pub fn last_knot(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Linear interpolation between vertices.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.first_knot(), self.last_knot());
        if !(lo..=hi).contains(&x) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let j = self.knots.partition_point(|&k| k < x);
        if self.knots[j] == x {
            return Ok(self.values[j]);
        }
        let (x0, x1) = (self.knots[j - 1], self.knots[j]);
        let (y0, y1) = (self.values[j - 1], self.values[j]);
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

/// Least concave majorant (upper convex hull) of the points `(knots[i], values[i])`.
///
/// Knots must be strictly increasing; ties are rejected.
pub fn least_concave_majorant(knots: &[f64], values: &[f64]) -> Result<PiecewiseLinearConcaveFn> {
    if knots.len() != values.len() {
        return Err(Error::LengthMismatch {
            left: knots.len(),
            right: values.len(),
        });
    }
    if knots.is_empty() {
        return Err(Error::EmptySample);
    }
    if knots.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(Error::invalid("hull input", "non-finite coordinate"));
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("knots", "must be strictly increasing"));
    }

    let mut hx: Vec<f64> = Vec::with_capacity(knots.len());
    let mut hy: Vec<f64> = Vec::with_capacity(knots.len());
    for (&x, &y) in knots.iter().zip(values) {
        while hx.len() >= 2 {
            let k = hx.len();
            let (ax, ay) = (hx[k - 2], hy[k - 2]);
            let (bx, by) = (hx[k - 1], hy[k - 1]);
            // b lies on or below the chord a -> (x, y)
            let cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax);
            if cross >= 0.0 {
                hx.pop();
                hy.pop();
            } else {
                break;
            }
        }
        hx.push(x);
        hy.push(y);
    }
    Ok(PiecewiseLinearConcaveFn {
        knots: hx,
        values: hy,
    })
}

/// Slope of the piece immediately to the left of `x`.
pub fn left_derivative(f: &PiecewiseLinearConcaveFn, x: f64) -> Result<f64> {
    let (lo, hi) = (f.first_knot(), f.last_knot());
    if !(x > lo && x <= hi) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    // first knot >= x closes the segment containing x from the left
    let j = f.knots.partition_point(|&k| k < x);
    let (x0, x1) = (f.knots[j - 1], f.knots[j]);
    Ok((f.values[j] - f.values[j - 1]) / (x1 - x0))
}
