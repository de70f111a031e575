//! Wyner–Ziv rate–distortion via decoder strategies.
//!
//! Every auxiliary letter `a` together with the optimal reconstruction
//! `ψ(a, ·)` induces a strategy `t: V -> Û`, and `I(U;A|V) >= I(U;T|V)` for
//! `T = ψ(A, ·)`. Over conditional laws `P(t|u)` the objective
//! `I(U;T|V) + s E d(U, T(V))` is jointly convex in `(P(t|u), q(t|v))`, so
//! alternating minimisation reaches the global optimum of every Lagrangian.
//! The optimal strategy law is finally reduced to `|U| + 1` support points
//! with the marginal and distortion constraints held fixed.

use nalgebra::DMatrix;

use super::curve::{softmax_in_place, CurvePoint, LagrangianCurve};
use super::{DistortionMeasure, WzSolution, ITER_MAX, ITER_TOL};
use crate::error::{Error, Result};
use crate::prob::{plog2p, Channel, Distribution};

/// Cap on the number of decoder strategies `|Û|^|V|`.
pub const MAX_STRATEGIES: usize = 1 << 14;

/// Conditional strategy law `P(t|u)`, row-major `source x strategy`.
pub(crate) type StrategyLaw = Vec<f64>;

pub(crate) struct WzCurve<'a> {
    pu: &'a [f64],
    ch_v: &'a Channel,
    d: &'a DistortionMeasure,
    n_strat: usize,
    /// `cost[u * n_strat + t] = Σ_v p(v|u) d(u, t(v))`
    cost: Vec<f64>,
    cost_min: Vec<f64>,
    /// `p(u|v)`, row-major `v x u`
    post: Vec<f64>,
    pv: Vec<f64>,
    scale: f64,
}

impl<'a> WzCurve<'a> {
    pub fn new(pu: &'a [f64], ch_v: &'a Channel, d: &'a DistortionMeasure) -> Result<Self> {
        let (nu, nv, nr) = (pu.len(), ch_v.output_size(), d.reproduction_size());
        let n_strat = (nr as u128)
            .checked_pow(nv as u32)
            .filter(|&n| n <= MAX_STRATEGIES as u128)
            .ok_or_else(|| {
                Error::GuardExceeded(format!("{nr}^{nv} decoder strategies exceed {MAX_STRATEGIES}"))
            })? as usize;
        let mut strat = vec![0; n_strat * nv];
        for t in 0..n_strat {
            let mut rest = t;
            for v in 0..nv {
                strat[t * nv + v] = rest % nr;
                rest /= nr;
            }
        }
        let mut cost = vec![0.0; nu * n_strat];
        for u in 0..nu {
            for t in 0..n_strat {
                cost[u * n_strat + t] =
                    (0..nv).map(|v| ch_v.get(u, v) * d.get(u, strat[t * nv + v])).sum();
            }
        }
        let cost_min = (0..nu)
            .map(|u| cost[u * n_strat..(u + 1) * n_strat].iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let pv = ch_v.output_raw(pu);
        let mut post = vec![0.0; nv * nu];
        for v in 0..nv {
            if pv[v] > 0.0 {
                for u in 0..nu {
                    post[v * nu + u] = pu[u] * ch_v.get(u, v) / pv[v];
                }
            }
        }
        Ok(WzCurve { pu, ch_v, d, n_strat, cost, cost_min, post, pv, scale: d.scale() })
    }

    fn nu(&self) -> usize {
        self.pu.len()
    }

    fn nv(&self) -> usize {
        self.ch_v.output_size()
    }

    /// `q(t|v) = Σ_u p(u|v) P(t|u)`, row-major `v x strategy`.
    fn side_law(&self, law: &StrategyLaw) -> Vec<f64> {
        let (nu, nv, ns) = (self.nu(), self.nv(), self.n_strat);
        let mut q = vec![0.0; nv * ns];
        for v in 0..nv {
            for u in 0..nu {
                let w = self.post[v * nu + u];
                if w == 0.0 {
                    continue;
                }
                for t in 0..ns {
                    q[v * ns + t] += w * law[u * ns + t];
                }
            }
        }
        q
    }

    /// `(E d, I(U;T|V))` of a strategy law.
    pub fn evaluate(&self, law: &StrategyLaw) -> (f64, f64) {
        let (nu, nv, ns) = (self.nu(), self.nv(), self.n_strat);
        let q = self.side_law(law);
        let mut dist = 0.0;
        let mut rate = 0.0;
        for u in 0..nu {
            let pu = self.pu[u];
            if pu == 0.0 {
                continue;
            }
            for t in 0..ns {
                let p = law[u * ns + t];
                if p == 0.0 {
                    continue;
                }
                dist += pu * p * self.cost[u * ns + t];
                for v in 0..nv {
                    let w = self.ch_v.get(u, v);
                    if w > 0.0 {
                        rate += pu * w * p * (p / q[v * ns + t]).log2();
                    }
                }
            }
        }
        (dist, rate.max(0.0))
    }

    fn iterate(&self, slope: f64, allowed: Option<&[bool]>) -> StrategyLaw {
        let (nu, nv, ns) = (self.nu(), self.nv(), self.n_strat);
        let mut law = vec![0.0; nu * ns];
        for u in 0..nu {
            let k = (0..ns).filter(|&t| allowed.is_none_or(|m| m[u * ns + t])).count() as f64;
            for t in 0..ns {
                if allowed.is_none_or(|m| m[u * ns + t]) {
                    law[u * ns + t] = 1.0 / k;
                }
            }
        }
        let mut logits = vec![0.0; ns];
        let mut prev = f64::INFINITY;
        for _ in 0..ITER_MAX {
            let q = self.side_law(&law);
            let log_q: Vec<f64> = q.iter().map(|&x| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY }).collect();
            for u in 0..nu {
                for t in 0..ns {
                    if !allowed.is_none_or(|m| m[u * ns + t]) {
                        logits[t] = f64::NEG_INFINITY;
                        continue;
                    }
                    let mut acc = -slope * (self.cost[u * ns + t] - self.cost_min[u]) / self.scale;
                    for v in 0..nv {
                        let w = self.ch_v.get(u, v);
                        if w > 0.0 && self.pv[v] > 0.0 {
                            acc += w * log_q[v * ns + t];
                        }
                    }
                    logits[t] = if acc.is_nan() { f64::NEG_INFINITY } else { acc };
                }
                softmax_in_place(&mut logits);
                law[u * ns..(u + 1) * ns].copy_from_slice(&logits);
            }
            let (dist, rate) = self.evaluate(&law);
            let objective = rate + slope * dist / (self.scale * std::f64::consts::LN_2);
            if (prev - objective).abs() < ITER_TOL {
                break;
            }
            prev = objective;
        }
        law
    }

    /// Strategy that is optimal with no description at all.
    fn side_only_strategy(&self) -> usize {
        let (nu, nv) = (self.nu(), self.nv());
        let nr = self.d.reproduction_size();
        let mut t = 0;
        let mut radix = 1;
        for v in 0..nv {
            let mut best = 0;
            let mut best_cost = f64::INFINITY;
            for r in 0..nr {
                let c: f64 = (0..nu).map(|u| self.pu[u] * self.ch_v.get(u, v) * self.d.get(u, r)).sum();
                if c < best_cost {
                    best_cost = c;
                    best = r;
                }
            }
            t += best * radix;
            radix *= nr;
        }
        t
    }

    /// Reduce a strategy law to an auxiliary variable over `|U| + 1` letters
    /// and attach the Bayes-optimal reconstruction.
    pub fn to_solution(&self, law: &StrategyLaw) -> Result<WzSolution> {
        let (nu, ns) = (self.nu(), self.n_strat);
        // weights P(t) and per-strategy source posteriors P(u|t)
        let mut weights = Vec::new();
        let mut posts: Vec<Vec<f64>> = Vec::new();
        for t in 0..ns {
            let w: f64 = (0..nu).map(|u| self.pu[u] * law[u * ns + t]).sum();
            if w > 1e-300 {
                weights.push(w);
                posts.push((0..nu).map(|u| self.pu[u] * law[u * ns + t] / w).collect());
            }
        }
        let support: Vec<usize> = (0..ns)
            .filter(|&t| (0..nu).map(|u| self.pu[u] * law[u * ns + t]).sum::<f64>() > 1e-300)
            .collect();
        let dist: Vec<f64> = support
            .iter()
            .zip(&posts)
            .map(|(&t, post)| post.iter().enumerate().map(|(u, &p)| p * self.cost[u * ns + t]).sum())
            .collect();
        let cond_ent: Vec<f64> = posts.iter().map(|post| self.side_conditional_entropy(post)).collect();

        let kept = caratheodory_reduce(&mut weights, &posts, &dist, &cond_ent, nu + 1);

        let n_aux = nu + 1;
        let mut aux = vec![0.0; nu * n_aux];
        for u in 0..nu {
            if self.pu[u] > 0.0 {
                for (a, &i) in kept.iter().enumerate() {
                    aux[u * n_aux + a] = weights[i] * posts[i][u] / self.pu[u];
                }
            } else {
                aux[u * n_aux] = 1.0;
            }
        }
        let aux_channel = Channel::from_flat(nu, n_aux, aux)?;
        Ok(WzSolution::from_aux(&Distribution::new(self.pu.to_vec())?, self.ch_v, self.d, aux_channel))
    }

    /// `H(U | V, T=t)` for a strategy letter with source posterior `post`.
    fn side_conditional_entropy(&self, post: &[f64]) -> f64 {
        let (nu, nv) = (self.nu(), self.nv());
        let mut total = 0.0;
        for v in 0..nv {
            let pv: f64 = (0..nu).map(|u| post[u] * self.ch_v.get(u, v)).sum();
            if pv <= 0.0 {
                continue;
            }
            let h: f64 = -(0..nu).map(|u| plog2p(post[u] * self.ch_v.get(u, v) / pv)).sum::<f64>();
            total += pv * h;
        }
        total
    }
}

/// Carathéodory reduction of a finite mixture.
///
/// Keeps `Σ w_i post_i` and `Σ w_i dist_i` fixed while moving along null
/// directions that never decrease `Σ w_i cond_ent_i`, until at most
/// `max_support` points carry weight. Returns the indices still in use.
pub(crate) fn caratheodory_reduce(
    weights: &mut [f64],
    posts: &[Vec<f64>],
    dist: &[f64],
    cond_ent: &[f64],
    max_support: usize,
) -> Vec<usize> {
    let mut live: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    while live.len() > max_support {
        let rows = posts[0].len() + 1;
        let mut m = vec![vec![0.0; live.len()]; rows];
        for (j, &i) in live.iter().enumerate() {
            for (r, &p) in posts[i].iter().enumerate() {
                m[r][j] = p;
            }
            m[rows - 1][j] = dist[i];
        }
        let Some(mut z) = null_vector(m) else { break };
        let gain: f64 = live.iter().zip(&z).map(|(&i, zj)| cond_ent[i] * zj).sum();
        if gain < 0.0 {
            z.iter_mut().for_each(|x| *x = -*x);
        }
        let mut step = f64::INFINITY;
        let mut drop = None;
        for (j, &i) in live.iter().enumerate() {
            if z[j] < 0.0 {
                let s = weights[i] / -z[j];
                if s < step {
                    step = s;
                    drop = Some(j);
                }
            }
        }
        let Some(drop) = drop else { break };
        for (j, &i) in live.iter().enumerate() {
            weights[i] = (weights[i] + step * z[j]).max(0.0);
        }
        weights[live[drop]] = 0.0;
        live.retain(|&i| weights[i] > 1e-300);
    }
    let total: f64 = live.iter().map(|&i| weights[i]).sum();
    for &i in &live {
        weights[i] /= total;
    }
    live
}

/// A unit vector in the null space of a wide matrix.
fn null_vector(m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let cols = m.first()?.len();
    if m.len() >= cols {
        return None;
    }
    // pad to square so the SVD returns a full set of right singular vectors
    let square = DMatrix::from_fn(cols, cols, |i, j| m.get(i).map_or(0.0, |row| row[j]));
    let svd = square.svd(false, true);
    let v_t = svd.v_t?;
    let k = svd.singular_values.imin();
    Some(v_t.row(k).iter().copied().collect())
}

impl LagrangianCurve for WzCurve<'_> {
    type Sol = StrategyLaw;

    fn min_distortion_end(&self) -> CurvePoint<StrategyLaw> {
        let (nu, ns) = (self.nu(), self.n_strat);
        let mut mask = vec![false; nu * ns];
        for u in 0..nu {
            for t in 0..ns {
                mask[u * ns + t] = self.cost[u * ns + t] <= self.cost_min[u] + 1e-15;
            }
        }
        let law = self.iterate(0.0, Some(&mask));
        let (distortion, rate) = self.evaluate(&law);
        CurvePoint { distortion, rate, sol: law }
    }

    fn zero_rate_end(&self) -> CurvePoint<StrategyLaw> {
        let (nu, ns) = (self.nu(), self.n_strat);
        let best = self.side_only_strategy();
        let mut law = vec![0.0; nu * ns];
        for u in 0..nu {
            law[u * ns + best] = 1.0;
        }
        let (distortion, _) = self.evaluate(&law);
        CurvePoint { distortion, rate: 0.0, sol: law }
    }

    fn point(&self, slope: f64) -> CurvePoint<StrategyLaw> {
        let law = self.iterate(slope, None);
        let (distortion, rate) = self.evaluate(&law);
        CurvePoint { distortion, rate, sol: law }
    }

    fn mix(&self, a: &StrategyLaw, b: &StrategyLaw, weight: f64) -> CurvePoint<StrategyLaw> {
        let law: Vec<f64> = a.iter().zip(b).map(|(x, y)| weight * x + (1.0 - weight) * y).collect();
        let (distortion, rate) = self.evaluate(&law);
        CurvePoint { distortion, rate, sol: law }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_vector_is_in_kernel() {
        let m = vec![vec![1.0, 2.0, 3.0, 4.0], vec![0.5, -1.0, 2.0, 0.0], vec![1.0, 1.0, 1.0, 1.0]];
        let z = null_vector(m.clone()).unwrap();
        assert!(z.iter().any(|x| x.abs() > 0.0));
        for row in &m {
            let dot: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn reduction_preserves_moments() {
        let posts = vec![
            vec![0.9, 0.1],
            vec![0.2, 0.8],
            vec![0.5, 0.5],
            vec![0.6, 0.4],
            vec![0.3, 0.7],
        ];
        let dist = vec![0.1, 0.3, 0.2, 0.25, 0.05];
        let ent = vec![0.4, 0.6, 0.9, 0.8, 0.7];
        let mut w = vec![0.2; 5];
        let before_m: Vec<f64> = (0..2).map(|u| (0..5).map(|i| w[i] * posts[i][u]).sum()).collect();
        let before_d: f64 = (0..5).map(|i| w[i] * dist[i]).sum();
        let before_h: f64 = (0..5).map(|i| w[i] * ent[i]).sum();
        let kept = caratheodory_reduce(&mut w, &posts, &dist, &ent, 3);
        assert!(kept.len() <= 3);
        let after_m: Vec<f64> = (0..2).map(|u| kept.iter().map(|&i| w[i] * posts[i][u]).sum()).collect();
        let after_d: f64 = kept.iter().map(|&i| w[i] * dist[i]).sum();
        let after_h: f64 = kept.iter().map(|&i| w[i] * ent[i]).sum();
        for u in 0..2 {
            assert!((before_m[u] - after_m[u]).abs() < 1e-12);
        }
        assert!((before_d - after_d).abs() < 1e-12);
        assert!(after_h >= before_h - 1e-12);
    }
}
