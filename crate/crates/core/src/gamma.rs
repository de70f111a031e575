//! Secrecy function of a degraded wiretap channel under an input cost.
//!
//! `Γ(r, q) = max I(X;Y) - I(X;Z)` over input laws with `I(X;Y) >= r` and
//! `E φ(X) <= q`. On a degraded cascade `X -> Y -> Z` the objective is
//! concave in `P_X` and the feasible set is convex, so a log-barrier
//! interior-point method with Newton centring reaches the global maximum.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Infeasibility, Result};
use crate::prob::{compose_channels, Channel, Distribution};

/// Main channel `P(y|x)`, wiretap degradation `P(z|y)` and letter costs `φ(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedChannelModel {
    ch_y: Channel,
    ch_z: Channel,
    ch_zx: Channel,
    phi: Vec<f64>,
}

impl CodedChannelModel {
    pub fn new(ch_y: Channel, ch_z: Channel, phi: Vec<f64>) -> Result<Self> {
        if phi.len() != ch_y.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "cost vector has {} entries but the main channel has {} inputs",
                phi.len(),
                ch_y.input_size()
            )));
        }
        if let Some((x, c)) = phi.iter().enumerate().find(|(_, c)| !c.is_finite() || **c < 0.0) {
            return Err(Error::Domain(format!("cost of letter {x} is {c}; costs must be finite and nonnegative")));
        }
        let ch_zx = compose_channels(&ch_y, &ch_z)?;
        Ok(CodedChannelModel { ch_y, ch_z, ch_zx, phi })
    }

    /// Zero-cost model.
    pub fn costless(ch_y: Channel, ch_z: Channel) -> Result<Self> {
        let phi = vec![0.0; ch_y.input_size()];
        Self::new(ch_y, ch_z, phi)
    }

    pub fn ch_y(&self) -> &Channel {
        &self.ch_y
    }

    pub fn ch_z(&self) -> &Channel {
        &self.ch_z
    }

    /// End-to-end wiretap channel `P(z|x)`.
    pub fn ch_zx(&self) -> &Channel {
        &self.ch_zx
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn input_size(&self) -> usize {
        self.ch_y.input_size()
    }

    pub fn min_cost(&self) -> f64 {
        min_cost(&self.phi)
    }

    /// `(I(X;Y), I(X;Z), E φ(X))` at an input law.
    pub fn evaluate(&self, px: &Distribution) -> Result<(f64, f64, f64)> {
        if px.len() != self.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "input law has {} letters, channel has {}",
                px.len(),
                self.input_size()
            )));
        }
        let p = px.probs();
        Ok((
            self.ch_y.mutual_information_raw(p),
            self.ch_zx.mutual_information_raw(p),
            dot(&self.phi, p),
        ))
    }
}

/// Maximiser of the secrecy function at one `(r, q)`.
#[derive(Debug, Clone, Serialize)]
pub struct GammaResult {
    pub value: f64,
    pub optimizer_px: Distribution,
    /// `I(X;Y)` at the optimiser
    pub achieved_rate: f64,
    /// `E φ(X)` at the optimiser
    pub achieved_cost: f64,
}

fn min_cost(phi: &[f64]) -> f64 {
    phi.iter().copied().fold(f64::INFINITY, f64::min)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_budget(phi: &[f64], q: f64) -> Result<()> {
    if q.is_nan() {
        return Err(Error::OutOfRange("cost budget is NaN".into()));
    }
    let minimum = min_cost(phi);
    if q < minimum - 1e-12 {
        return Err(Error::Infeasible(Infeasibility::CostBelowMinimum { budget: q, minimum }));
    }
    Ok(())
}

/// Capacity-achieving input law under `E φ(X) <= q`.
fn capacity_law(ch: &Channel, phi: &[f64], q: f64) -> Vec<f64> {
    let nx = ch.input_size();
    let minimum = min_cost(phi);
    let support: Vec<usize> = if q <= minimum + 1e-12 {
        (0..nx).filter(|&x| phi[x] <= minimum + 1e-12).collect()
    } else {
        (0..nx).collect()
    };
    let dearest = support.iter().map(|&x| phi[x]).fold(0.0, f64::max);
    let budget = (q < dearest && q > minimum + 1e-12).then_some(q);
    let n = support.len();
    let start: Vec<f64> = match budget {
        Some(q) => {
            let cheap: Vec<bool> = support.iter().map(|&x| phi[x] <= minimum + 1e-12).collect();
            let k = cheap.iter().filter(|&&b| b).count() as f64;
            let mean = support.iter().map(|&x| phi[x]).sum::<f64>() / n as f64;
            let eps = (0.5 * (q - minimum) / (mean - minimum)).min(0.5);
            cheap.iter().map(|&b| (1.0 - eps) * if b { 1.0 / k } else { 0.0 } + eps / n as f64).collect()
        }
        None => vec![1.0 / n as f64; n],
    };
    let problem = Barrier { ch_y: ch, ch_z: None, phi, support, rate_floor: None, budget };
    let reduced = problem.solve(start);
    let mut p = vec![0.0; nx];
    for (&x, v) in problem.support.iter().zip(reduced) {
        p[x] = v;
    }
    p
}

/// `max I(X;Y)` over input laws with `E φ(X) <= q`.
pub fn capacity(ch_y: &Channel, phi: &[f64], q: f64) -> Result<f64> {
    if phi.len() != ch_y.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "cost vector has {} entries but the channel has {} inputs",
            phi.len(),
            ch_y.input_size()
        )));
    }
    check_budget(phi, q)?;
    Ok(ch_y.mutual_information_raw(&capacity_law(ch_y, phi, q)))
}

/// Log-barrier program for one `(r, q)` query, over the letters in `support`.
struct Barrier<'a> {
    ch_y: &'a Channel,
    /// wiretap channel from the input letters; `None` maximises `I(X;Y)` alone
    ch_z: Option<&'a Channel>,
    phi: &'a [f64],
    support: Vec<usize>,
    /// rate floor in nats, when the constraint is active
    rate_floor: Option<f64>,
    /// cost budget, when the constraint is active
    budget: Option<f64>,
}

/// Mutual information (nats), its gradient and Hessian at an input law.
fn mi_derivatives(ch: &Channel, support: &[usize], p: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = support.len();
    let mut out = vec![0.0; ch.output_size()];
    for (i, &x) in support.iter().enumerate() {
        for (o, &w) in out.iter_mut().zip(ch.row(x)) {
            *o += p[i] * w;
        }
    }
    let mut value = 0.0;
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    for (i, &x) in support.iter().enumerate() {
        let mut d = 0.0;
        for (y, &w) in ch.row(x).iter().enumerate() {
            if w > 0.0 {
                d += w * (w / out[y]).ln();
            }
        }
        value += p[i] * d;
        grad[i] = d - 1.0;
    }
    for (y, &py) in out.iter().enumerate() {
        if py <= 0.0 {
            continue;
        }
        for (i, &x) in support.iter().enumerate() {
            let wi = ch.get(x, y);
            if wi == 0.0 {
                continue;
            }
            for (j, &x2) in support.iter().enumerate() {
                hess[(i, j)] -= wi * ch.get(x2, y) / py;
            }
        }
    }
    (value, grad, hess)
}

impl Barrier<'_> {
    fn cost(&self, p: &[f64]) -> f64 {
        self.support.iter().zip(p).map(|(&x, pi)| self.phi[x] * pi).sum()
    }

    fn strictly_feasible(&self, p: &[f64]) -> bool {
        if p.iter().any(|&v| !(v > 0.0)) {
            return false;
        }
        if let Some(q) = self.budget {
            if self.cost(p) >= q {
                return false;
            }
        }
        if let Some(r) = self.rate_floor {
            if mi_derivatives(self.ch_y, &self.support, p).0 <= r {
                return false;
            }
        }
        true
    }

    /// Barrier objective `t f + Σ log(slacks)` with gradient and Hessian.
    fn centring(&self, p: &[f64], t: f64) -> (f64, DVector<f64>, DMatrix<f64>) {
        let (iy, gy, hy) = mi_derivatives(self.ch_y, &self.support, p);
        let (mut value, mut grad, mut hess) = match self.ch_z {
            Some(ch_z) => {
                let (iz, gz, hz) = mi_derivatives(ch_z, &self.support, p);
                (t * (iy - iz), (&gy - &gz) * t, (&hy - &hz) * t)
            }
            None => (t * iy, &gy * t, &hy * t),
        };
        for (i, &v) in p.iter().enumerate() {
            value += v.ln();
            grad[i] += 1.0 / v;
            hess[(i, i)] -= 1.0 / (v * v);
        }
        if let Some(r) = self.rate_floor {
            let s = iy - r;
            value += s.ln();
            grad += &gy / s;
            hess += &hy / s - (&gy * gy.transpose()) / (s * s);
        }
        if let Some(q) = self.budget {
            let s = q - self.cost(p);
            let phi = DVector::from_iterator(p.len(), self.support.iter().map(|&x| self.phi[x]));
            value += s.ln();
            grad -= &phi / s;
            hess -= (&phi * phi.transpose()) / (s * s);
        }
        (value, grad, hess)
    }

    fn barrier_terms(&self) -> f64 {
        (self.support.len() + self.rate_floor.is_some() as usize + self.budget.is_some() as usize) as f64
    }

    /// Equality-constrained Newton ascent on the simplex.
    fn centre(&self, p: &mut Vec<f64>, t: f64) {
        let n = p.len();
        for _ in 0..NEWTON_MAX {
            let (value, grad, hess) = self.centring(p, t);
            let mut kkt = DMatrix::zeros(n + 1, n + 1);
            kkt.view_mut((0, 0), (n, n)).copy_from(&hess);
            let mut rhs = DVector::zeros(n + 1);
            for i in 0..n {
                kkt[(i, n)] = 1.0;
                kkt[(n, i)] = 1.0;
                rhs[i] = -grad[i];
            }
            let Some(sol) = kkt.lu().solve(&rhs) else { return };
            let dir = sol.rows(0, n).into_owned();
            let decrement = -(dir.transpose() * &hess * &dir)[(0, 0)];
            if !(decrement > 2.0 * NEWTON_TOL * t.max(1.0)) {
                return;
            }
            let slope = grad.dot(&dir);
            let mut s = 1.0;
            loop {
                let mut trial: Vec<f64> = (0..n).map(|i| p[i] + s * dir[i]).collect();
                let z: f64 = trial.iter().sum();
                trial.iter_mut().for_each(|v| *v /= z);
                if self.strictly_feasible(&trial) && self.centring(&trial, t).0 >= value + 0.25 * s * slope {
                    *p = trial;
                    break;
                }
                s *= 0.5;
                if s < 1e-12 {
                    return;
                }
            }
        }
    }

    fn solve(&self, mut p: Vec<f64>) -> Vec<f64> {
        let mut t = 1.0;
        let m = self.barrier_terms();
        loop {
            self.centre(&mut p, t);
            if m / t < BARRIER_GAP {
                return p;
            }
            t *= 20.0;
        }
    }
}

const NEWTON_MAX: usize = 200;
/// Newton stops once the centring suboptimality, in objective units, is below this.
const NEWTON_TOL: f64 = 1e-15;
/// Duality-gap target of the barrier method, in nats.
pub const BARRIER_GAP: f64 = 1e-12;

/// `Γ(r, q)` with its maximising input law.
pub fn gamma(m: &CodedChannelModel, r: f64, q: f64) -> Result<GammaResult> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::OutOfRange(format!("rate floor {r} must be >= 0")));
    }
    check_budget(&m.phi, q)?;
    let cap_law = capacity_law(&m.ch_y, &m.phi, q);
    let cap = m.ch_y.mutual_information_raw(&cap_law);
    if r > cap + 1e-12 {
        return Err(Error::Infeasible(Infeasibility::RateAboveCapacity { rate: r, capacity: cap }));
    }
    if r >= cap - 1e-9 {
        return finish(m, cap_law);
    }

    let nx = m.input_size();
    let minimum = min_cost(&m.phi);
    let support: Vec<usize> = if q <= minimum + 1e-12 {
        (0..nx).filter(|&x| m.phi[x] <= minimum + 1e-12).collect()
    } else {
        (0..nx).collect()
    };
    let dearest = support.iter().map(|&x| m.phi[x]).fold(0.0, f64::max);
    let problem = Barrier {
        ch_y: &m.ch_y,
        ch_z: Some(&m.ch_zx),
        phi: &m.phi,
        rate_floor: (r > 0.0).then_some(r * std::f64::consts::LN_2),
        budget: (q < dearest && q > minimum + 1e-12).then_some(q),
        support,
    };

    // strictly feasible start: capacity law nudged towards cheap letters and the centre
    let n = problem.support.len();
    let cap_r: Vec<f64> = problem.support.iter().map(|&x| cap_law[x]).collect();
    let cheap: Vec<f64> = problem.support.iter().map(|&x| if m.phi[x] <= minimum + 1e-12 { 1.0 } else { 0.0 }).collect();
    let k_cheap: f64 = cheap.iter().sum();
    let mut start = None;
    'search: for eps in [0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10] {
        for tc in [0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 0.0] {
            let p: Vec<f64> = (0..n)
                .map(|i| (1.0 - eps - tc) * cap_r[i] + tc * cheap[i] / k_cheap + eps / n as f64)
                .collect();
            if problem.strictly_feasible(&p) {
                start = Some(p);
                break 'search;
            }
        }
    }
    let Some(start) = start else { return finish(m, cap_law) };
    let reduced = problem.solve(start);
    let mut p = vec![0.0; nx];
    for (&x, v) in problem.support.iter().zip(reduced) {
        p[x] = v;
    }
    finish(m, p)
}

fn finish(m: &CodedChannelModel, p: Vec<f64>) -> Result<GammaResult> {
    let px = Distribution::new(p)?;
    let (iy, iz, cost) = m.evaluate(&px)?;
    Ok(GammaResult { value: (iy - iz).max(0.0), optimizer_px: px, achieved_rate: iy, achieved_cost: cost })
}

/// Secrecy capacity `C_s = Γ(0, q)`.
pub fn secrecy_capacity(m: &CodedChannelModel, q: f64) -> Result<f64> {
    Ok(gamma(m, 0.0, q)?.value)
}

/// `Γ` of a Gaussian wiretap pair from the two capacities.
pub fn gamma_gaussian(c_y: f64, c_z: f64) -> Result<f64> {
    if !(c_z >= 0.0) || !(c_y >= c_z) {
        return Err(Error::Domain(format!("need c_y >= c_z >= 0, got c_y = {c_y}, c_z = {c_z}")));
    }
    Ok(c_y - c_z)
}

/// Brute-force `Γ(r, q)` over the simplex lattice with spacing `step`.
pub fn gamma_grid_oracle(m: &CodedChannelModel, r: f64, q: f64, step: f64) -> Result<GammaResult> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::OutOfRange(format!("grid step {step} must lie in (0, 0.5]")));
    }
    let nx = m.input_size();
    if nx > 4 {
        return Err(Error::OutOfRange(format!("grid oracle supports at most 4 input letters, got {nx}")));
    }
    let levels = (1.0 / step).round() as usize;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut counts = vec![0usize; nx];
    let mut p = vec![0.0; nx];
    visit(levels, 0, &mut counts, &mut |c: &[usize]| {
        for (pi, &ci) in p.iter_mut().zip(c) {
            *pi = ci as f64 / levels as f64;
        }
        let iy = m.ch_y.mutual_information_raw(&p);
        if iy < r || dot(&m.phi, &p) > q {
            return;
        }
        let value = iy - m.ch_zx.mutual_information_raw(&p);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, p.clone()));
        }
    });
    let (_, p) = best.ok_or(Error::InfeasibleAtResolution(step))?;
    let px = Distribution::new(p)?;
    let (iy, iz, cost) = m.evaluate(&px)?;
    Ok(GammaResult { value: (iy - iz).max(0.0), optimizer_px: px, achieved_rate: iy, achieved_cost: cost })
}

fn visit(left: usize, at: usize, counts: &mut [usize], f: &mut impl FnMut(&[usize])) {
    if at + 1 == counts.len() {
        counts[at] = left;
        f(counts);
        return;
    }
    for c in 0..=left {
        counts[at] = c;
        visit(left - c, at + 1, counts, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;

    fn wiretap(ch_z: Channel) -> CodedChannelModel {
        CodedChannelModel::costless(Channel::identity(2), ch_z).unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert!((capacity(&Channel::identity(2), &[0.0, 0.0], 0.0).unwrap() - 1.0).abs() < 1e-9);
        let bsc = Channel::bsc(0.2).unwrap();
        let c = capacity(&bsc, &[0.0, 0.0], 0.0).unwrap();
        assert!((c - (1.0 - binary_entropy(0.2))).abs() < 1e-9);
        let flat = Channel::constant(3, &Distribution::uniform(2));
        assert!(capacity(&flat, &[0.0; 3], 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn capacity_with_cost() {
        // noiseless binary, letter 1 costs 1: capacity is h(q) for q < 1/2
        let ch = Channel::identity(2);
        for q in [0.05, 0.1, 0.3] {
            let c = capacity(&ch, &[0.0, 1.0], q).unwrap();
            assert!((c - binary_entropy(q)).abs() < 1e-7, "q={q}: {c}");
        }
        assert!((capacity(&ch, &[0.0, 1.0], 0.8).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(capacity(&ch, &[0.0, 1.0], 0.0).unwrap(), 0.0);
        assert!(matches!(
            capacity(&ch, &[0.5, 1.0], 0.2),
            Err(Error::Infeasible(Infeasibility::CostBelowMinimum { .. }))
        ));
    }

    #[test]
    fn gamma_bsc_wiretap_is_entropy_of_crossover() {
        for p0 in [0.05, 0.1, 0.2, 0.3] {
            let m = wiretap(Channel::bsc(p0).unwrap());
            for r in [0.0, 0.5, 0.99, 1.0] {
                let g = gamma(&m, r, 0.0).unwrap();
                assert!((g.value - binary_entropy(p0)).abs() < 1e-6, "p0={p0} r={r}: {}", g.value);
                assert!(g.achieved_rate >= r - 1e-9);
            }
        }
    }

    #[test]
    fn gamma_erasure_wiretap_is_erasure_probability() {
        let m = wiretap(Channel::erasure(0.3).unwrap());
        let g = gamma(&m, 0.4, 0.0).unwrap();
        assert!((g.value - 0.3).abs() < 1e-6);
    }

    #[test]
    fn clean_wiretap_has_no_secrecy() {
        let m = CodedChannelModel::costless(Channel::bsc(0.1).unwrap(), Channel::identity(2)).unwrap();
        assert!(gamma(&m, 0.2, 0.0).unwrap().value.abs() < 1e-9);
        assert!(secrecy_capacity(&m, 0.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn rate_above_capacity_is_infeasible() {
        let m = CodedChannelModel::costless(Channel::bsc(0.2).unwrap(), Channel::bsc(0.1).unwrap()).unwrap();
        let err = gamma(&m, 0.5, 0.0).unwrap_err();
        assert_eq!(err.infeasible_code(), Some("rate_above_capacity"));
        assert!(gamma(&m, -0.1, 0.0).is_err());
    }

    #[test]
    fn secrecy_capacity_examples() {
        let m = wiretap(Channel::bsc(0.2).unwrap());
        assert!((secrecy_capacity(&m, 0.0).unwrap() - 0.721928).abs() < 1e-6);
        let m = wiretap(Channel::erasure(0.3).unwrap());
        assert!((secrecy_capacity(&m, 0.0).unwrap() - 0.3).abs() < 1e-6);
    }

    #[test]
    fn gaussian_helper() {
        assert_eq!(gamma_gaussian(1.0, 0.5).unwrap(), 0.5);
        assert_eq!(gamma_gaussian(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(gamma_gaussian(0.75, 0.25).unwrap(), 0.5);
        assert!(gamma_gaussian(0.2, 0.5).is_err());
        assert!(gamma_gaussian(0.5, -0.1).is_err());
    }

    #[test]
    fn cost_constraint_binds() {
        // noiseless main channel, BSC wiretap, letter 1 costs 1
        let m = CodedChannelModel::new(Channel::identity(2), Channel::bsc(0.1).unwrap(), vec![0.0, 1.0]).unwrap();
        let g = gamma(&m, 0.0, 0.2).unwrap();
        assert!(g.achieved_cost <= 0.2 + 1e-9);
        let oracle = gamma_grid_oracle(&m, 0.0, 0.2, 0.001).unwrap();
        assert!(g.value >= oracle.value - 1e-9, "{} < {}", g.value, oracle.value);
        assert!(g.value - oracle.value < 1e-3);
    }

    #[test]
    fn matches_grid_oracle_on_a_ternary_cascade() {
        let ch_y = Channel::new(vec![vec![0.8, 0.1, 0.1], vec![0.1, 0.7, 0.2], vec![0.0, 0.2, 0.8]]).unwrap();
        let ch_z = Channel::new(vec![vec![0.7, 0.3], vec![0.4, 0.6], vec![0.1, 0.9]]).unwrap();
        let m = CodedChannelModel::new(ch_y, ch_z, vec![0.0, 1.0, 2.0]).unwrap();
        for (r, q) in [(0.0, 2.0), (0.3, 1.0), (0.1, 0.5), (0.5, 1.5)] {
            let g = gamma(&m, r, q).unwrap();
            let o = gamma_grid_oracle(&m, r, q, 0.01).unwrap();
            assert!(g.value >= o.value - 1e-9, "r={r} q={q}: {} < {}", g.value, o.value);
            assert!(g.value - o.value < 5e-3, "r={r} q={q}: {} vs {}", g.value, o.value);
            assert!(g.achieved_rate >= r - 1e-9 && g.achieved_cost <= q + 1e-9);
        }
    }
}
