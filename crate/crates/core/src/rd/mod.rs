//! Rate–distortion functions with and without decoder side information.

mod curve;
mod oracle;
mod ordinary;
mod wyner_ziv;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{entropy_raw, Channel, Distribution};

pub use oracle::{wz_oracle, wz_oracle_many};
pub use wyner_ziv::MAX_STRATEGIES;

use curve::{at_distortion, distortion_at_rate};
use ordinary::OrdinaryCurve;
use wyner_ziv::WzCurve;

/// Iteration cap of the alternating minimisations.
pub const ITER_MAX: usize = 10_000;
/// Objective change at which the alternating minimisations stop.
pub const ITER_TOL: f64 = 1e-12;

/// Single-letter distortion matrix `d[u][û]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMeasure {
    source_size: usize,
    reproduction_size: usize,
    entries: Vec<f64>,
}

impl DistortionMeasure {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let source_size = rows.len();
        let reproduction_size = rows.first().map_or(0, Vec::len);
        if source_size == 0 || reproduction_size == 0 {
            return Err(Error::InvalidDistortion("matrix must be non-empty".into()));
        }
        let mut entries = Vec::with_capacity(source_size * reproduction_size);
        for (u, row) in rows.into_iter().enumerate() {
            if row.len() != reproduction_size {
                return Err(Error::InvalidDistortion(format!(
                    "row {u} has {} entries, expected {reproduction_size}",
                    row.len()
                )));
            }
            for (r, x) in row.into_iter().enumerate() {
                if !x.is_finite() || x < 0.0 {
                    return Err(Error::InvalidDistortion(format!("entry [{u}][{r}] = {x} is not a finite nonnegative number")));
                }
                entries.push(x);
            }
        }
        Ok(DistortionMeasure { source_size, reproduction_size, entries })
    }

    /// Hamming distortion on a `k`-letter alphabet.
    pub fn hamming(k: usize) -> Self {
        let entries = (0..k * k).map(|i| if i / k == i % k { 0.0 } else { 1.0 }).collect();
        DistortionMeasure { source_size: k, reproduction_size: k, entries }
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn reproduction_size(&self) -> usize {
        self.reproduction_size
    }

    pub fn get(&self, u: usize, r: usize) -> f64 {
        self.entries[u * self.reproduction_size + r]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.entries[u * self.reproduction_size..(u + 1) * self.reproduction_size]
    }

    /// Square with `d(u, û) = 0` exactly when `û = u`.
    pub fn is_strict_diagonal(&self) -> bool {
        self.source_size == self.reproduction_size
            && (0..self.source_size)
                .all(|u| (0..self.reproduction_size).all(|r| (self.get(u, r) == 0.0) == (u == r)))
    }

    /// Largest entry, or 1 when the matrix is identically zero.
    pub(crate) fn scale(&self) -> f64 {
        let m = self.entries.iter().copied().fold(0.0, f64::max);
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// Reproduction letter minimising `Σ_u w(u) d(u, û)`, ties to the smallest index.
    pub(crate) fn best_constant(&self, weights: &[f64]) -> usize {
        self.best_constant_with_cost(weights).0
    }

    pub(crate) fn best_constant_with_cost(&self, weights: &[f64]) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for r in 0..self.reproduction_size {
            let c: f64 = weights.iter().enumerate().map(|(u, &w)| w * self.get(u, r)).sum();
            if c < best.1 {
                best = (r, c);
            }
        }
        best
    }

    fn check_source(&self, pu: &Distribution) -> Result<()> {
        if pu.len() != self.source_size {
            return Err(Error::DimensionMismatch(format!(
                "source has {} letters but the distortion matrix has {} rows",
                pu.len(),
                self.source_size
            )));
        }
        Ok(())
    }
}

fn check_side(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure) -> Result<()> {
    d.check_source(pu)?;
    if ch_v.input_size() != pu.len() {
        return Err(Error::DimensionMismatch(format!(
            "side channel takes {} inputs but the source has {} letters",
            ch_v.input_size(),
            pu.len()
        )));
    }
    Ok(())
}

fn check_distortion(target: f64) -> Result<()> {
    if target.is_nan() || target < 0.0 {
        return Err(Error::OutOfRange(format!("distortion {target} must be >= 0")));
    }
    Ok(())
}

/// Optimal test channel at one distortion level.
#[derive(Debug, Clone, Serialize)]
pub struct RdSolution {
    pub rate: f64,
    pub distortion: f64,
    pub test_channel: Channel,
}

/// `min_û E d(U, û)`: the smallest distortion reachable at zero rate.
pub fn max_distortion(pu: &Distribution, d: &DistortionMeasure) -> Result<f64> {
    d.check_source(pu)?;
    Ok(d.best_constant_with_cost(pu.probs()).1)
}

/// `E min_û d(U, û)`: the smallest distortion reachable at any rate.
pub fn min_distortion(pu: &Distribution, d: &DistortionMeasure) -> Result<f64> {
    d.check_source(pu)?;
    Ok(pu
        .probs()
        .iter()
        .enumerate()
        .map(|(u, &p)| p * d.row(u).iter().copied().fold(f64::INFINITY, f64::min))
        .sum())
}

/// `min_ψ E d(U, ψ(V))`: distortion from side information alone.
pub fn side_only_distortion(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure) -> Result<f64> {
    check_side(pu, ch_v, d)?;
    let mut total = 0.0;
    for v in 0..ch_v.output_size() {
        let w: Vec<f64> = (0..pu.len()).map(|u| pu.get(u) * ch_v.get(u, v)).collect();
        total += d.best_constant_with_cost(&w).1;
    }
    Ok(total)
}

pub fn rate_distortion_solution(pu: &Distribution, d: &DistortionMeasure, target: f64) -> Result<RdSolution> {
    d.check_source(pu)?;
    check_distortion(target)?;
    let curve = OrdinaryCurve::new(pu.probs(), d);
    let p = at_distortion(&curve, target)?;
    let nr = d.reproduction_size();
    Ok(RdSolution {
        rate: p.rate,
        distortion: p.distortion,
        test_channel: Channel::from_flat(pu.len(), nr, p.sol)?,
    })
}

/// Ordinary rate–distortion function `R_U(D)` in bits.
pub fn rate_distortion(pu: &Distribution, d: &DistortionMeasure, target: f64) -> Result<f64> {
    Ok(rate_distortion_solution(pu, d, target)?.rate)
}

/// Distortion–rate function `D_U(R)`.
pub fn distortion_rate(pu: &Distribution, d: &DistortionMeasure, rate: f64) -> Result<f64> {
    d.check_source(pu)?;
    let curve = OrdinaryCurve::new(pu.probs(), d);
    distortion_at_rate(&curve, rate)
}

/// Auxiliary-variable solution of the Wyner–Ziv problem.
#[derive(Debug, Clone, Serialize)]
pub struct WzSolution {
    /// `I(U;A) - I(V;A)` in bits
    pub rate: f64,
    /// `P(a|u)`, with `|U| + 1` auxiliary letters
    pub aux_channel: Channel,
    /// `ψ[a][v]`, the Bayes reconstruction
    pub reconstruction_map: Vec<Vec<usize>>,
    /// `E d(U, ψ(A, V))`
    pub achieved_distortion: f64,
}

impl WzSolution {
    /// Recompute rate, Bayes-optimal `ψ` and distortion from `P(a|u)`.
    pub fn from_aux(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure, aux_channel: Channel) -> Self {
        let (rate, reconstruction_map, achieved_distortion) = evaluate_aux(pu.probs(), ch_v, d, &aux_channel);
        WzSolution { rate, aux_channel, reconstruction_map, achieved_distortion }
    }
}

/// `(I(U;A) - I(V;A), ψ, E d(U, ψ(A, V)))` for an auxiliary channel.
pub(crate) fn evaluate_aux(
    pu: &[f64],
    ch_v: &Channel,
    d: &DistortionMeasure,
    aux: &Channel,
) -> (f64, Vec<Vec<usize>>, f64) {
    let (nu, nv, na) = (pu.len(), ch_v.output_size(), aux.output_size());
    let mut psi = vec![vec![0; nv]; na];
    let mut dist = 0.0;
    let mut weights = vec![0.0; nu];
    let mut pav = vec![0.0; na * nv];
    let mut pua = vec![0.0; nu * na];
    for a in 0..na {
        for u in 0..nu {
            pua[u * na + a] = pu[u] * aux.get(u, a);
        }
        for v in 0..nv {
            for u in 0..nu {
                weights[u] = pu[u] * aux.get(u, a) * ch_v.get(u, v);
            }
            pav[a * nv + v] = weights.iter().sum();
            let (r, c) = d.best_constant_with_cost(&weights);
            psi[a][v] = r;
            dist += c;
        }
    }
    let pv = ch_v.output_raw(pu);
    // I(U;A) - I(V;A) = H(U) - H(U,A) - H(V) + H(V,A)
    let rate = entropy_raw(pu) - entropy_raw(&pua) - entropy_raw(&pv) + entropy_raw(&pav);
    (rate.max(0.0), psi, dist)
}

/// Wyner–Ziv rate–distortion function `R_U|V(D)` with its optimal auxiliary.
pub fn wyner_ziv_rate(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure, target: f64) -> Result<WzSolution> {
    check_side(pu, ch_v, d)?;
    check_distortion(target)?;
    let curve = WzCurve::new(pu.probs(), ch_v, d)?;
    let p = at_distortion(&curve, target)?;
    curve.to_solution(&p.sol)
}

/// Inverse of the Wyner–Ziv function, `D_U|V(R)`.
pub fn wyner_ziv_distortion_rate(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure, rate: f64) -> Result<f64> {
    check_side(pu, ch_v, d)?;
    let curve = WzCurve::new(pu.probs(), ch_v, d)?;
    distortion_at_rate(&curve, rate)
}

/// `R_U(D) - R_U|V(D)`, the rate saved by decoder side information.
pub fn rd_gap(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure, target: f64) -> Result<f64> {
    let ordinary = rate_distortion(pu, d, target)?;
    let wz = wyner_ziv_rate(pu, ch_v, d, target)?.rate;
    Ok(ordinary - wz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{binary_entropy, entropy, Joint2};

    fn side_information(pu: &Distribution, ch_v: &Channel) -> Result<f64> {
        Ok(crate::prob::mutual_information(&Joint2::from_channel(pu, ch_v)?))
    }

    fn bss() -> Distribution {
        Distribution::uniform(2)
    }

    #[test]
    fn hamming_is_strict_diagonal() {
        assert!(DistortionMeasure::hamming(3).is_strict_diagonal());
        let d = DistortionMeasure::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(!d.is_strict_diagonal());
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DistortionMeasure::new(vec![]).is_err());
        assert!(DistortionMeasure::new(vec![vec![0.0, -1.0]]).is_err());
        assert!(DistortionMeasure::new(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn binary_hamming_examples() {
        let d = DistortionMeasure::hamming(2);
        assert!((rate_distortion(&bss(), &d, 0.0).unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(rate_distortion(&bss(), &d, 0.5).unwrap(), 0.0);
        assert_eq!(rate_distortion(&bss(), &d, 0.7).unwrap(), 0.0);
        let r = rate_distortion(&bss(), &d, 0.1).unwrap();
        assert!((r - (1.0 - binary_entropy(0.1))).abs() < 1e-6, "{r}");
    }

    #[test]
    fn distortion_rate_examples() {
        let d = DistortionMeasure::hamming(2);
        assert!((distortion_rate(&bss(), &d, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(distortion_rate(&bss(), &d, 1.0).unwrap().abs() < 1e-6);
        let dr = distortion_rate(&bss(), &d, 0.5).unwrap();
        assert!((dr - 0.110028).abs() < 1e-4, "{dr}");
        assert!(distortion_rate(&bss(), &d, -0.1).is_err());
    }

    #[test]
    fn negative_distortion_is_rejected() {
        let d = DistortionMeasure::hamming(2);
        assert!(rate_distortion(&bss(), &d, -0.1).is_err());
        assert!(wyner_ziv_rate(&bss(), &Channel::bsc(0.2).unwrap(), &d, -0.1).is_err());
    }

    #[test]
    fn wz_lossless_is_conditional_entropy() {
        let d = DistortionMeasure::hamming(2);
        let pu = Distribution::new(vec![0.3, 0.7]).unwrap();
        let ch = Channel::bsc(0.15).unwrap();
        let sol = wyner_ziv_rate(&pu, &ch, &d, 0.0).unwrap();
        let h_u_given_v = entropy(&pu) - side_information(&pu, &ch).unwrap();
        assert!((sol.rate - h_u_given_v).abs() < 1e-6, "{} vs {h_u_given_v}", sol.rate);
        assert_eq!(sol.aux_channel.output_size(), 3);
    }

    #[test]
    fn wz_with_useless_side_information_is_ordinary() {
        let d = DistortionMeasure::hamming(2);
        let pu = Distribution::new(vec![0.4, 0.6]).unwrap();
        let ch = Channel::constant(2, &Distribution::new(vec![0.5, 0.5]).unwrap());
        for target in [0.0, 0.05, 0.1, 0.2, 0.35] {
            let wz = wyner_ziv_rate(&pu, &ch, &d, target).unwrap().rate;
            let rd = rate_distortion(&pu, &d, target).unwrap();
            assert!((wz - rd).abs() < 1e-3, "D={target}: {wz} vs {rd}");
        }
    }

    #[test]
    fn wz_solution_is_self_consistent() {
        let d = DistortionMeasure::hamming(2);
        let ch = Channel::bsc(0.25).unwrap();
        for target in [0.02, 0.05, 0.1, 0.2] {
            let sol = wyner_ziv_rate(&bss(), &ch, &d, target).unwrap();
            let (rate, psi, dist) = evaluate_aux(bss().probs(), &ch, &d, &sol.aux_channel);
            assert!((rate - sol.rate).abs() < 1e-9);
            assert_eq!(psi, sol.reconstruction_map);
            assert!((dist - sol.achieved_distortion).abs() < 1e-9);
            assert!(sol.achieved_distortion <= target + 1e-9, "{} > {target}", sol.achieved_distortion);
        }
    }

    #[test]
    fn wz_above_side_only_distortion_is_free() {
        let d = DistortionMeasure::hamming(2);
        let ch = Channel::bsc(0.25).unwrap();
        let floor = side_only_distortion(&bss(), &ch, &d).unwrap();
        assert!((floor - 0.25).abs() < 1e-12);
        assert_eq!(wyner_ziv_rate(&bss(), &ch, &d, floor).unwrap().rate, 0.0);
    }

    #[test]
    fn gap_bounds() {
        let d = DistortionMeasure::hamming(2);
        let ch = Channel::bsc(0.25).unwrap();
        let iuv = side_information(&bss(), &ch).unwrap();
        let g0 = rd_gap(&bss(), &ch, &d, 0.0).unwrap();
        assert!((g0 - iuv).abs() < 1e-6);
        let g = rd_gap(&bss(), &ch, &d, 0.1).unwrap();
        assert!(g >= -1e-6 && g <= iuv + 1e-6, "{g}");
        let indep = Channel::constant(2, &bss());
        assert!(rd_gap(&bss(), &indep, &d, 0.1).unwrap().abs() < 1e-3);
    }

    #[test]
    fn wz_distortion_rate_inverts() {
        let d = DistortionMeasure::hamming(2);
        let ch = Channel::bsc(0.25).unwrap();
        let target = 0.08;
        let r = wyner_ziv_rate(&bss(), &ch, &d, target).unwrap().rate;
        let back = wyner_ziv_distortion_rate(&bss(), &ch, &d, r).unwrap();
        assert!((back - target).abs() < 1e-4, "{back}");
    }
}
