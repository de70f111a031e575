//! Achievable equivocation region and the systematic-versus-general comparisons.

use serde::Serialize;

use crate::error::{Error, Infeasibility, Result};
use crate::gamma::{capacity, gamma, secrecy_capacity, CodedChannelModel};
use crate::prob::{entropy, expected_cost, joint_from_cascade, Channel, Distribution, Joint3};
use crate::rd::{distortion_rate, rate_distortion, wyner_ziv_distortion_rate, wyner_ziv_rate, DistortionMeasure};

/// Slack allowed when comparing a source rate with `bandwidth * capacity`.
pub const TRANSMISSIBILITY_SLACK: f64 = 1e-9;

/// Source with two side-information receivers, coded channel and distortion.
#[derive(Debug, Clone)]
pub struct SecrecyModel {
    pu: Distribution,
    ch_v: Channel,
    ch_w: Channel,
    coded: CodedChannelModel,
    d: DistortionMeasure,
    systematic: bool,
    joint: Joint3,
}

/// Entropies of the source given each receiver's side information, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceEntropies {
    pub h_u: f64,
    pub h_u_given_v: f64,
    pub h_u_given_w: f64,
    pub i_uv: f64,
    pub i_uw: f64,
}

impl SecrecyModel {
    pub fn new(
        pu: Distribution,
        ch_v: Channel,
        ch_w: Channel,
        coded: CodedChannelModel,
        d: DistortionMeasure,
    ) -> Result<Self> {
        if d.source_size() != pu.len() {
            return Err(Error::DimensionMismatch(format!(
                "distortion matrix has {} rows but the source has {} letters",
                d.source_size(),
                pu.len()
            )));
        }
        let joint = joint_from_cascade(&pu, &ch_v, &ch_w)?;
        Ok(SecrecyModel { pu, ch_v, ch_w, coded, d, systematic: false, joint })
    }

    /// Systematic configuration: the side channels are copies of the coded
    /// channels, so `V` is the uncoded output of the main channel and `W`
    /// its wiretapped version.
    pub fn systematic(pu: Distribution, coded: CodedChannelModel, d: DistortionMeasure) -> Result<Self> {
        if pu.len() != coded.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "systematic configuration needs a source alphabet equal to the channel input alphabet ({} vs {})",
                pu.len(),
                coded.input_size()
            )));
        }
        let (ch_v, ch_w) = (coded.ch_y().clone(), coded.ch_z().clone());
        let mut m = Self::new(pu, ch_v, ch_w, coded, d)?;
        m.systematic = true;
        Ok(m)
    }

    pub fn pu(&self) -> &Distribution {
        &self.pu
    }

    pub fn ch_v(&self) -> &Channel {
        &self.ch_v
    }

    pub fn ch_w(&self) -> &Channel {
        &self.ch_w
    }

    pub fn coded(&self) -> &CodedChannelModel {
        &self.coded
    }

    pub fn d(&self) -> &DistortionMeasure {
        &self.d
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    /// Joint law of `(U, V, W)`.
    pub fn joint(&self) -> &Joint3 {
        &self.joint
    }

    /// `E φ(U)` when the source letters are sent uncoded.
    pub fn source_cost(&self) -> Option<f64> {
        self.systematic.then(|| expected_cost(&self.pu, self.coded.phi()).expect("dimensions checked"))
    }

    pub fn entropies(&self) -> SourceEntropies {
        let h_u = entropy(&self.pu);
        let h_u_given_v = self.joint.conditional_entropy(0, 1);
        let h_u_given_w = self.joint.conditional_entropy(0, 2);
        SourceEntropies {
            h_u,
            h_u_given_v,
            h_u_given_w,
            i_uv: (h_u - h_u_given_v).max(0.0),
            i_uw: (h_u - h_u_given_w).max(0.0),
        }
    }
}

/// Figure-of-merit record `(λ, D, Δ, R, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quintuple {
    pub lambda: f64,
    pub distortion: f64,
    pub delta: f64,
    pub key_rate: f64,
    pub cost: f64,
}

impl Quintuple {
    pub fn validate(&self) -> Result<()> {
        check_args(self.lambda, self.key_rate, self.distortion)?;
        if !self.delta.is_finite() || !self.cost.is_finite() {
            return Err(Error::OutOfRange("equivocation and cost must be finite".into()));
        }
        Ok(())
    }
}

fn check_args(lambda: f64, key_rate: f64, distortion: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::OutOfRange(format!("bandwidth expansion {lambda} must be positive")));
    }
    if !(key_rate >= 0.0 && key_rate.is_finite()) {
        return Err(Error::OutOfRange(format!("key rate {key_rate} must be >= 0")));
    }
    if !(distortion >= 0.0 && distortion.is_finite()) {
        return Err(Error::OutOfRange(format!("distortion {distortion} must be >= 0")));
    }
    Ok(())
}

/// Ingredients of one evaluation of the equivocation formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    /// equivocation reached with unlimited key: `H(U|W)` or `H(U)`
    pub ceiling: f64,
    /// source-coding rate: `R_U|V(D)` or `R_U(D)`
    pub source_rate: f64,
    /// channel uses per source symbol: `λ` or `1 + λ`
    pub bandwidth: f64,
    pub capacity: f64,
    /// `Γ(source_rate / bandwidth, Q)`
    pub gamma: f64,
    /// `source_rate - bandwidth * gamma - R`, before clipping at zero
    pub bracket: f64,
    pub delta_star: f64,
}

fn assemble(ceiling: f64, source_rate: f64, bandwidth: f64, coded: &CodedChannelModel, key_rate: f64, q: f64) -> Result<RegionPoint> {
    let cap = capacity(coded.ch_y(), coded.phi(), q)?;
    if source_rate > bandwidth * cap + TRANSMISSIBILITY_SLACK {
        return Err(Error::Infeasible(Infeasibility::Transmissibility {
            rate: source_rate,
            lambda: bandwidth,
            capacity: cap,
        }));
    }
    let g = gamma(coded, (source_rate / bandwidth).min(cap), q)?.value;
    let bracket = source_rate - bandwidth * g - key_rate;
    Ok(RegionPoint {
        ceiling,
        source_rate,
        bandwidth,
        capacity: cap,
        gamma: g,
        bracket,
        delta_star: ceiling - bracket.max(0.0),
    })
}

/// Full evaluation of `Δ*(λ, R, D, Q)` for the informed-receiver system.
pub fn region_point(m: &SecrecyModel, lambda: f64, key_rate: f64, distortion: f64, q: f64) -> Result<RegionPoint> {
    check_args(lambda, key_rate, distortion)?;
    let rate = wyner_ziv_rate(&m.pu, &m.ch_v, &m.d, distortion)?.rate;
    assemble(m.entropies().h_u_given_w, rate, lambda, &m.coded, key_rate, q)
}

/// `Δ*(λ, R, D, Q) = H(U|W) - [R_U|V(D) - λ Γ(R_U|V(D)/λ, Q) - R]₊`.
pub fn delta_star(m: &SecrecyModel, lambda: f64, key_rate: f64, distortion: f64, q: f64) -> Result<f64> {
    Ok(region_point(m, lambda, key_rate, distortion, q)?.delta_star)
}

/// Evaluation of the equivocation formula for a general code without side information.
pub fn general_point(
    pu: &Distribution,
    d: &DistortionMeasure,
    coded: &CodedChannelModel,
    lambda: f64,
    key_rate: f64,
    distortion: f64,
    q: f64,
) -> Result<RegionPoint> {
    check_args(lambda, key_rate, distortion)?;
    let rate = rate_distortion(pu, d, distortion)?;
    assemble(entropy(pu), rate, 1.0 + lambda, coded, key_rate, q)
}

/// `Δ*_gen(λ, R, D, Q) = H(U) - [R_U(D) - (1+λ) Γ(R_U(D)/(1+λ), Q) - R]₊`.
pub fn delta_star_general(
    pu: &Distribution,
    d: &DistortionMeasure,
    coded: &CodedChannelModel,
    lambda: f64,
    key_rate: f64,
    distortion: f64,
    q: f64,
) -> Result<f64> {
    Ok(general_point(pu, d, coded, lambda, key_rate, distortion, q)?.delta_star)
}

/// Four-term split of `Δ*` below the saturation key rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    /// `H(U|W) - H(U|V)`
    pub t1: f64,
    /// `H(U|V) - R_U|V(D)`
    pub t2: f64,
    /// `λ Γ(R_U|V(D)/λ, Q)`
    pub t3: f64,
    /// `R`
    pub t4: f64,
    pub sum: f64,
}

pub fn decompose(m: &SecrecyModel, lambda: f64, key_rate: f64, distortion: f64, q: f64) -> Result<Decomposition> {
    let p = region_point(m, lambda, key_rate, distortion, q)?;
    if !(p.bracket > 0.0) {
        return Err(Error::Regime(format!(
            "key rate {key_rate} is at or above the saturation key rate {}",
            (p.bracket + key_rate).max(0.0)
        )));
    }
    let e = m.entropies();
    let t1 = e.h_u_given_w - e.h_u_given_v;
    let t2 = e.h_u_given_v - p.source_rate;
    let t3 = lambda * p.gamma;
    let t4 = key_rate;
    Ok(Decomposition { t1, t2, t3, t4, sum: t1 + t2 + t3 + t4 })
}

/// Verdict on a quintuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Achievability {
    pub achievable: bool,
    /// machine-readable reason when not achievable
    pub reason: Option<&'static str>,
    pub delta_star: Option<f64>,
}

pub fn is_achievable(m: &SecrecyModel, quint: &Quintuple) -> Result<Achievability> {
    quint.validate()?;
    match region_point(m, quint.lambda, quint.key_rate, quint.distortion, quint.cost) {
        Ok(p) => {
            let achievable = quint.delta <= p.delta_star;
            Ok(Achievability {
                achievable,
                reason: (!achievable).then_some("equivocation_above_bound"),
                delta_star: Some(p.delta_star),
            })
        }
        Err(Error::Infeasible(why)) => Ok(Achievability { achievable: false, reason: Some(why.code()), delta_star: None }),
        Err(e) => Err(e),
    }
}

/// A systematic-code value next to the matching general-code value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub sys: f64,
    pub gen: f64,
}

/// Equivocations with unlimited key: `H(U|W)` and `H(U)`; they differ by `I(U;W)`.
pub fn full_equivocations(m: &SecrecyModel) -> Comparison {
    let e = m.entropies();
    Comparison { sys: e.h_u_given_w, gen: e.h_u }
}

/// A systematic code sends the source letters over the same channel, so
/// their average cost must also fit the budget.
fn check_systematic_cost(m: &SecrecyModel, q: f64) -> Result<()> {
    match m.source_cost() {
        Some(c) if c > q + 1e-12 => Err(Error::Infeasible(Infeasibility::SourceCostAboveBudget { cost: c, budget: q })),
        _ => Ok(()),
    }
}

/// Both equivocation formulas at zero key rate.
pub fn zero_key_equivocations(m: &SecrecyModel, lambda: f64, distortion: f64, q: f64) -> Result<Comparison> {
    check_systematic_cost(m, q)?;
    Ok(Comparison {
        sys: delta_star(m, lambda, 0.0, distortion, q)?,
        gen: delta_star_general(&m.pu, &m.d, &m.coded, lambda, 0.0, distortion, q)?,
    })
}

/// Smallest key rates at which each formula reaches its ceiling.
pub fn saturation_key_rates(m: &SecrecyModel, lambda: f64, distortion: f64, q: f64) -> Result<Comparison> {
    check_systematic_cost(m, q)?;
    let sys = region_point(m, lambda, 0.0, distortion, q)?;
    let gen = general_point(&m.pu, &m.d, &m.coded, lambda, 0.0, distortion, q)?;
    Ok(Comparison { sys: sys.bracket.max(0.0), gen: gen.bracket.max(0.0) })
}

/// Distortions at which the channel-coding rate meets the secrecy capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecrecyDistortions {
    pub sys: f64,
    pub gen: f64,
    pub secrecy_capacity: f64,
}

/// `D*_gen = D_U((1+λ) C_s)` and `D*_sys = D_U|V(λ C_s)`.
pub fn secrecy_distortions(m: &SecrecyModel, lambda: f64, q: f64) -> Result<SecrecyDistortions> {
    check_args(lambda, 0.0, 0.0)?;
    check_systematic_cost(m, q)?;
    let cs = secrecy_capacity(&m.coded, q)?;
    Ok(SecrecyDistortions {
        sys: wyner_ziv_distortion_rate(&m.pu, &m.ch_v, &m.d, lambda * cs)?,
        gen: distortion_rate(&m.pu, &m.d, (1.0 + lambda) * cs)?,
        secrecy_capacity: cs,
    })
}

/// Secrecy distortions of a Gaussian source over Gaussian channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianSecrecyDistortion {
    pub sys: f64,
    pub gen: f64,
    /// whether `C_Y - C_Z <= ½ log2(σ_U² / σ_U|V²)`
    pub sys_better: bool,
}

/// Closed-form secrecy distortions under squared error.
pub fn gaussian_secrecy_distortion(
    sigma_u2: f64,
    sigma_u_given_v2: f64,
    lambda: f64,
    c_y: f64,
    c_z: f64,
) -> Result<GaussianSecrecyDistortion> {
    if !(sigma_u_given_v2 > 0.0) || !(sigma_u2 >= sigma_u_given_v2) || !sigma_u2.is_finite() {
        return Err(Error::Domain(format!(
            "need σ_U² >= σ_U|V² > 0, got {sigma_u2} and {sigma_u_given_v2}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!("bandwidth expansion {lambda} must be positive")));
    }
    let gap = crate::gamma::gamma_gaussian(c_y, c_z)?;
    Ok(GaussianSecrecyDistortion {
        sys: sigma_u_given_v2 * (-2.0 * lambda * gap).exp2(),
        gen: sigma_u2 * (-2.0 * (1.0 + lambda) * gap).exp2(),
        sys_better: gap <= 0.5 * (sigma_u2 / sigma_u_given_v2).log2(),
    })
}

/// Capacity `½ log2(1 + P/N)` of an additive white Gaussian noise channel.
pub fn gaussian_capacity(power: f64, noise: f64) -> Result<f64> {
    if !(power >= 0.0) || !(noise > 0.0) {
        return Err(Error::Domain(format!("need power >= 0 and noise > 0, got {power} and {noise}")));
    }
    Ok(0.5 * (1.0 + power / noise).log2())
}

/// MMSE `σ_U² N / (σ_U² + N)` of a Gaussian source seen through additive noise `N`.
pub fn gaussian_conditional_variance(sigma_u2: f64, noise: f64) -> Result<f64> {
    if !(sigma_u2 > 0.0) || !(noise > 0.0) {
        return Err(Error::Domain(format!("need positive variances, got {sigma_u2} and {noise}")));
    }
    Ok(sigma_u2 * noise / (sigma_u2 + noise))
}

/// Equivocation when `R'` of the key rate encrypts the uncoded part of a
/// systematic code and the rest encrypts the coded part, binary source.
pub fn key_split_equivocation(
    m: &SecrecyModel,
    lambda: f64,
    distortion: f64,
    q: f64,
    key_rate: f64,
    split: f64,
) -> Result<f64> {
    if m.pu.len() != 2 {
        return Err(Error::Domain(format!("key split needs a binary source, got {} letters", m.pu.len())));
    }
    if !(0.0..=1.0).contains(&key_rate) {
        return Err(Error::OutOfRange(format!("key rate {key_rate} must lie in [0, 1]")));
    }
    if !(split >= 0.0 && split <= key_rate) {
        return Err(Error::OutOfRange(format!("split {split} must lie in [0, {key_rate}]")));
    }
    let p = region_point(m, lambda, key_rate, distortion, q)?;
    let e = m.entropies();
    Ok(split * e.h_u + (1.0 - split) * e.h_u_given_w + (key_rate - split) + lambda * p.gamma - p.source_rate)
}

/// Both sides of the zero-key equality condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualityCheck {
    /// `(1+λ) Γ(R_U(D)/(1+λ), Q) - λ Γ(R_U|V(D)/λ, Q)`
    pub lhs: f64,
    /// `R_U(D) - R_U|V(D) - I(U;W)`
    pub rhs: f64,
    pub holds: bool,
}

/// Tolerance of [`equality_condition_check`].
pub const EQUALITY_TOL: f64 = 1e-3;

pub fn equality_condition_check(m: &SecrecyModel, lambda: f64, distortion: f64, q: f64) -> Result<EqualityCheck> {
    check_systematic_cost(m, q)?;
    let sys = region_point(m, lambda, 0.0, distortion, q)?;
    let gen = general_point(&m.pu, &m.d, &m.coded, lambda, 0.0, distortion, q)?;
    let lhs = gen.bandwidth * gen.gamma - sys.bandwidth * sys.gamma;
    let rhs = gen.source_rate - sys.source_rate - m.entropies().i_uw;
    Ok(EqualityCheck { lhs, rhs, holds: (lhs - rhs).abs() <= EQUALITY_TOL })
}
