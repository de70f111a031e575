//! Blahut–Arimoto for the ordinary rate–distortion function.

use super::curve::{softmax_in_place, CurvePoint, LagrangianCurve};
use super::{DistortionMeasure, ITER_MAX, ITER_TOL};

/// Test channel `Q(û|u)`, row-major `source x reproduction`.
pub(crate) type TestChannel = Vec<f64>;

pub(crate) struct OrdinaryCurve<'a> {
    pu: &'a [f64],
    d: &'a DistortionMeasure,
    /// per-source-letter minimum distortion
    row_min: Vec<f64>,
    scale: f64,
}

impl<'a> OrdinaryCurve<'a> {
    pub fn new(pu: &'a [f64], d: &'a DistortionMeasure) -> Self {
        let row_min = (0..d.source_size())
            .map(|u| d.row(u).iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        OrdinaryCurve { pu, d, row_min, scale: d.scale() }
    }

    fn nr(&self) -> usize {
        self.d.reproduction_size()
    }

    pub fn evaluate(&self, q: &TestChannel) -> (f64, f64) {
        let nr = self.nr();
        let mut out = vec![0.0; nr];
        let mut dist = 0.0;
        for (u, &p) in self.pu.iter().enumerate() {
            for r in 0..nr {
                let m = p * q[u * nr + r];
                out[r] += m;
                dist += m * self.d.get(u, r);
            }
        }
        let mut rate = 0.0;
        for (u, &p) in self.pu.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for r in 0..nr {
                let c = q[u * nr + r];
                if c > 0.0 {
                    rate += p * c * (c / out[r]).log2();
                }
            }
        }
        (dist, rate.max(0.0))
    }

    fn output(&self, q: &TestChannel) -> Vec<f64> {
        let nr = self.nr();
        let mut out = vec![0.0; nr];
        for (u, &p) in self.pu.iter().enumerate() {
            for r in 0..nr {
                out[r] += p * q[u * nr + r];
            }
        }
        out
    }

    /// Alternating minimisation; `allowed` restricts the support of each row
    /// (used for the infinite-slope end).
    fn iterate(&self, slope: f64, allowed: Option<&[bool]>) -> TestChannel {
        let (nu, nr) = (self.d.source_size(), self.nr());
        let mut q = vec![1.0 / nr as f64; nu * nr];
        if let Some(mask) = allowed {
            for u in 0..nu {
                let row = &mut q[u * nr..(u + 1) * nr];
                let k = mask[u * nr..(u + 1) * nr].iter().filter(|&&b| b).count() as f64;
                for (r, x) in row.iter_mut().enumerate() {
                    *x = if mask[u * nr + r] { 1.0 / k } else { 0.0 };
                }
            }
        }
        let mut prev = f64::INFINITY;
        let mut logits = vec![0.0; nr];
        for _ in 0..ITER_MAX {
            let out = self.output(&q);
            for u in 0..nu {
                for r in 0..nr {
                    let ok = allowed.is_none_or(|m| m[u * nr + r]);
                    logits[r] = if ok && out[r] > 0.0 {
                        out[r].ln() - slope * (self.d.get(u, r) - self.row_min[u]) / self.scale
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                softmax_in_place(&mut logits);
                q[u * nr..(u + 1) * nr].copy_from_slice(&logits);
            }
            let (dist, rate) = self.evaluate(&q);
            let objective = rate + slope * dist / (self.scale * std::f64::consts::LN_2);
            if (prev - objective).abs() < ITER_TOL {
                break;
            }
            prev = objective;
        }
        q
    }
}

impl LagrangianCurve for OrdinaryCurve<'_> {
    type Sol = TestChannel;

    fn min_distortion_end(&self) -> CurvePoint<TestChannel> {
        let (nu, nr) = (self.d.source_size(), self.nr());
        let mut mask = vec![false; nu * nr];
        for u in 0..nu {
            for r in 0..nr {
                mask[u * nr + r] = self.d.get(u, r) <= self.row_min[u];
            }
        }
        let q = self.iterate(0.0, Some(&mask));
        let (distortion, rate) = self.evaluate(&q);
        CurvePoint { distortion, rate, sol: q }
    }

    fn zero_rate_end(&self) -> CurvePoint<TestChannel> {
        let (nu, nr) = (self.d.source_size(), self.nr());
        let best = self.d.best_constant(self.pu);
        let mut q = vec![0.0; nu * nr];
        for u in 0..nu {
            q[u * nr + best] = 1.0;
        }
        let (distortion, _) = self.evaluate(&q);
        CurvePoint { distortion, rate: 0.0, sol: q }
    }

    fn point(&self, slope: f64) -> CurvePoint<TestChannel> {
        let q = self.iterate(slope, None);
        let (distortion, rate) = self.evaluate(&q);
        CurvePoint { distortion, rate, sol: q }
    }

    fn mix(&self, a: &TestChannel, b: &TestChannel, weight: f64) -> CurvePoint<TestChannel> {
        let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| weight * x + (1.0 - weight) * y).collect();
        let (distortion, rate) = self.evaluate(&q);
        CurvePoint { distortion, rate, sol: q }
    }
}
