//! Tracing a convex rate–distortion curve through its Lagrangian points.
//!
//! Each solver exposes the two curve ends and a slope-parametrised interior
//! point. A query at a target distortion (or rate) bisects the slope until
//! it is bracketed by two curve points and then time-shares between them,
//! which is the lower convex envelope evaluated on the bracketing chord.

use crate::error::{Error, Infeasibility, Result};

#[derive(Debug, Clone)]
pub(crate) struct CurvePoint<S> {
    pub distortion: f64,
    pub rate: f64,
    pub sol: S,
}

pub(crate) trait LagrangianCurve {
    type Sol: Clone;

    /// Smallest attainable distortion and the least rate reaching it.
    fn min_distortion_end(&self) -> CurvePoint<Self::Sol>;
    /// Zero-rate end of the curve.
    fn zero_rate_end(&self) -> CurvePoint<Self::Sol>;
    /// Minimiser of `rate + slope * distortion` (slope in nats per unit of
    /// normalised distortion).
    fn point(&self, slope: f64) -> CurvePoint<Self::Sol>;
    /// Time-sharing of two solutions, `weight` on `a`, re-evaluated.
    fn mix(&self, a: &Self::Sol, b: &Self::Sol, weight: f64) -> CurvePoint<Self::Sol>;
}

const LN_SLOPE_MIN: f64 = -14.0;
const LN_SLOPE_MAX: f64 = 16.0;
const BISECTION_STEPS: usize = 80;
/// Bracket width in log-slope at which the chord is used.
const SLOPE_TOL: f64 = 1e-4;
/// Bracket width in distortion (or rate) at which the chord is used.
const SPAN_TOL: f64 = 1e-9;

/// Curve point at distortion exactly `target` (or the zero-rate end above it).
pub(crate) fn at_distortion<C: LagrangianCurve>(curve: &C, target: f64) -> Result<CurvePoint<C::Sol>> {
    if !(target >= 0.0) {
        return Err(Error::OutOfRange(format!("distortion {target} must be >= 0")));
    }
    let zero = curve.zero_rate_end();
    if target >= zero.distortion {
        return Ok(zero);
    }
    let full = curve.min_distortion_end();
    if target < full.distortion - 1e-12 {
        return Err(Error::Infeasible(Infeasibility::DistortionBelowMinimum {
            target,
            minimum: full.distortion,
        }));
    }
    if target <= full.distortion {
        return Ok(full);
    }

    // `large` holds the larger-distortion side of the bracket.
    let (mut large, mut small) = (zero, full);
    let (mut lo, mut hi) = (LN_SLOPE_MIN, LN_SLOPE_MAX);
    for _ in 0..BISECTION_STEPS {
        if hi - lo < SLOPE_TOL || large.distortion - small.distortion < SPAN_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p = curve.point(mid.exp());
        if p.distortion == target {
            return Ok(p);
        }
        if p.distortion > target {
            large = p;
            lo = mid;
        } else {
            small = p;
            hi = mid;
        }
    }
    let span = large.distortion - small.distortion;
    let weight = if span > 0.0 { (target - small.distortion) / span } else { 1.0 };
    Ok(curve.mix(&large.sol, &small.sol, weight.clamp(0.0, 1.0)))
}

/// Smallest distortion whose curve rate does not exceed `rate`.
pub(crate) fn distortion_at_rate<C: LagrangianCurve>(curve: &C, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::OutOfRange(format!("rate {rate} must be >= 0")));
    }
    let full = curve.min_distortion_end();
    if rate >= full.rate {
        return Ok(full.distortion);
    }
    let zero = curve.zero_rate_end();
    if rate <= 0.0 {
        return Ok(zero.distortion);
    }
    let (mut below, mut above) = (zero, full);
    let (mut lo, mut hi) = (LN_SLOPE_MIN, LN_SLOPE_MAX);
    for _ in 0..BISECTION_STEPS {
        if hi - lo < SLOPE_TOL || above.rate - below.rate < SPAN_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p = curve.point(mid.exp());
        if p.rate <= rate {
            below = p;
            lo = mid;
        } else {
            above = p;
            hi = mid;
        }
    }
    let span = above.rate - below.rate;
    if span <= 0.0 {
        return Ok(below.distortion.min(above.distortion));
    }
    let t = (rate - below.rate) / span;
    Ok(below.distortion + t * (above.distortion - below.distortion))
}

/// Softmax of log-weights in place; `-inf` entries get zero mass.
pub(crate) fn softmax_in_place(logits: &mut [f64]) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        let k = logits.len() as f64;
        logits.iter_mut().for_each(|x| *x = 1.0 / k);
        return;
    }
    let mut z = 0.0;
    for x in logits.iter_mut() {
        *x = (*x - m).exp();
        z += *x;
    }
    logits.iter_mut().for_each(|x| *x /= z);
}
