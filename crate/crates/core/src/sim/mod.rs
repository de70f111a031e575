//! Exact desk-scale model of the direct-part codec.
//!
//! A block quantizer maps `U^N` to a message `s`, the low `key_bits` bits of
//! `s` are XORed with a uniform key, and the result `t` selects a sub-code
//! from which the transmitted codeword is drawn uniformly. Every law in the
//! chain is finite, so all reported quantities are exact sums rather than
//! estimates.

mod block;
mod codebook;
mod quantizer;

use rayon::prelude::*;
use serde::Serialize;

pub use codebook::{build_codebook, Codebook, CodebookSpec, MAX_CODEWORDS, MAX_INPUT_BLOCKS};
pub use quantizer::{build_toy_wz_quantizer, Quantizer, MAX_SOURCE_CELLS, SEARCH_BUDGET};

use block::{block_kernel, block_row, entropy_of, product_law, Radix};
use crate::error::{Error, Result};
use crate::gamma::gamma;
use crate::prob::{binary_entropy, compose_channels, entropy_raw, Distribution};
use crate::rd::wyner_ziv_rate;
use crate::region::SecrecyModel;

/// Largest joint state space visited by [`SimSystem::exact_equivocation`].
pub const MAX_EQUIVOCATION_STATES: u128 = 1 << 26;
/// Largest `M1 * |Y|^n` (and `M1 * |Z|^n`) table built by [`SimSystem::new`].
pub const MAX_CHANNEL_CELLS: usize = 1 << 24;

/// Slack used by the theorem-level checks in [`SimReport`].
const CHECK_TOL: f64 = 1e-12;

/// Quantizer, one-time pad and partitioned codebook on a fixed model.
#[derive(Debug, Clone)]
pub struct SimSystem {
    model: SecrecyModel,
    big_n: usize,
    n: usize,
    key_bits: u32,
    quantizer: Quantizer,
    codebook: Codebook,
    src: Radix,
    side: Radix,
    out_y: Radix,
    out_z: Radix,
    x_blocks: Radix,
    /// `P(u^N)`
    pu: Vec<f64>,
    /// `P(s)`
    ps: Vec<f64>,
    /// `P(t)`
    qt: Vec<f64>,
    /// `P(y^n | x_m)` for every codeword
    py: Vec<Vec<f64>>,
    /// `P(z^n | x_m)` for every codeword
    pz: Vec<Vec<f64>>,
    /// Bayes estimate of `t` for every `y^n`
    decoder: Vec<usize>,
}

impl SimSystem {
    /// `key_bits` must not exceed `log2 M`; the message space of the
    /// quantizer must equal the number of sub-codes and be a power of two.
    pub fn new(model: SecrecyModel, big_n: usize, n: usize, key_bits: u32, quantizer: Quantizer, codebook: Codebook) -> Result<Self> {
        let spec = &codebook.spec;
        spec.validate()?;
        let m = spec.m;
        if !m.is_power_of_two() || m != quantizer.padded_messages || m != quantizer.reconstructor.len() {
            return Err(Error::DimensionMismatch(format!(
                "codebook has {m} sub-codes but the quantizer uses {} padded messages (must be equal and a power of two)",
                quantizer.padded_messages
            )));
        }
        if key_bits > m.trailing_zeros() {
            return Err(Error::OutOfRange(format!("key_bits {key_bits} exceeds log2 M = {}", m.trailing_zeros())));
        }
        if spec.n != n || codebook.words.iter().any(|w| w.len() != n) {
            return Err(Error::DimensionMismatch(format!("codebook block length {} differs from n = {n}", spec.n)));
        }
        let nx = model.coded().input_size();
        if spec.px_star.len() != nx || codebook.words.iter().flatten().any(|&x| x >= nx) {
            return Err(Error::DimensionMismatch(format!("codewords must use the {nx}-letter channel input alphabet")));
        }
        let src = Radix::new(model.pu().len(), big_n, MAX_SOURCE_CELLS, "source blocks")?;
        let side = Radix::new(model.ch_v().output_size(), big_n, MAX_SOURCE_CELLS, "side-information blocks")?;
        if quantizer.encoder.len() != src.count || quantizer.encoder.iter().any(|&s| s >= m) {
            return Err(Error::DimensionMismatch("quantizer table does not cover the source blocks".into()));
        }
        if quantizer.reconstructor.iter().any(|row| row.len() != side.count) {
            return Err(Error::DimensionMismatch("reconstructor table does not cover the side-information blocks".into()));
        }
        let out_y = Radix::new(model.coded().ch_y().output_size(), n, MAX_CHANNEL_CELLS, "main channel outputs")?;
        let out_z = Radix::new(model.coded().ch_zx().output_size(), n, MAX_CHANNEL_CELLS, "wiretap outputs")?;
        let x_blocks = Radix::new(nx, n, MAX_INPUT_BLOCKS, "channel input blocks")?;
        for (what, out) in [("main", out_y), ("wiretap", out_z)] {
            if spec.m1.saturating_mul(out.count) > MAX_CHANNEL_CELLS {
                return Err(Error::GuardExceeded(format!("{} codewords x {} {what} outputs", spec.m1, out.count)));
            }
        }

        let pu = product_law(model.pu().probs(), src);
        let mut ps = vec![0.0; m];
        for (u, &s) in quantizer.encoder.iter().enumerate() {
            ps[s] += pu[u];
        }
        let keys = 1usize << key_bits;
        let qt: Vec<f64> = (0..m).map(|t| (0..keys).map(|k| ps[t ^ k]).sum::<f64>() / keys as f64).collect();
        let py: Vec<Vec<f64>> = codebook.words.iter().map(|w| block_row(model.coded().ch_y(), w, out_y)).collect();
        let pz: Vec<Vec<f64>> = codebook.words.iter().map(|w| block_row(model.coded().ch_zx(), w, out_z)).collect();
        let m2 = spec.m2;
        let decoder = (0..out_y.count)
            .map(|y| {
                let mut best = (0, f64::NEG_INFINITY);
                for (t, &q) in qt.iter().enumerate() {
                    let score = q * (t * m2..(t + 1) * m2).map(|i| py[i][y]).sum::<f64>();
                    if score > best.1 {
                        best = (t, score);
                    }
                }
                best.0
            })
            .collect();
        Ok(SimSystem {
            model,
            big_n,
            n,
            key_bits,
            quantizer,
            codebook,
            src,
            side,
            out_y,
            out_z,
            x_blocks,
            pu,
            ps,
            qt,
            py,
            pz,
            decoder,
        })
    }

    pub fn model(&self) -> &SecrecyModel {
        &self.model
    }

    pub fn key_bits(&self) -> u32 {
        self.key_bits
    }

    pub fn quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// `Pr{T = t}` for every sub-code index.
    pub fn message_priors(&self) -> &[f64] {
        &self.qt
    }

    fn messages(&self) -> usize {
        self.codebook.spec.m
    }

    fn m2(&self) -> usize {
        self.codebook.spec.m2
    }

    fn keys(&self) -> usize {
        1 << self.key_bits
    }

    /// Index of the codeword sent for source block `u`, key `k` and randomizer.
    pub fn encode(&self, u: &[usize], k: usize, randomizer: usize) -> Result<usize> {
        if k >= self.keys() {
            return Err(Error::OutOfRange(format!("key {k} needs more than {} bits", self.key_bits)));
        }
        if randomizer >= self.m2() {
            return Err(Error::OutOfRange(format!("randomizer {randomizer} outside 0..{}", self.m2())));
        }
        let s = self.quantizer.encoder[self.src.index(u)?];
        Ok((s ^ k) * self.m2() + randomizer)
    }

    /// Bayes estimate of the sub-code index from a main-channel output block.
    pub fn decode_index(&self, y: &[usize]) -> Result<usize> {
        Ok(self.decoder[self.out_y.index(y)?])
    }

    /// Reconstruction block `F_D(T' xor k, v^N)`.
    pub fn legit_decode(&self, y: &[usize], v: &[usize], k: usize) -> Result<Vec<usize>> {
        if k >= self.keys() {
            return Err(Error::OutOfRange(format!("key {k} needs more than {} bits", self.key_bits)));
        }
        let s = self.decode_index(y)? ^ k;
        let r = self.quantizer.reconstructor[s][self.side.index(v)?];
        let uhat = Radix::new(self.model.d().reproduction_size(), self.big_n, usize::MAX, "reconstruction")?;
        Ok(uhat.digits(r))
    }

    /// `P(z^n | T = t)` for every `t`.
    fn wiretap_given_t(&self) -> Vec<Vec<f64>> {
        let m2 = self.m2();
        (0..self.messages())
            .map(|t| {
                let mut row = vec![0.0; self.out_z.count];
                for word in &self.pz[t * m2..(t + 1) * m2] {
                    for (acc, &p) in row.iter_mut().zip(word) {
                        *acc += p / m2 as f64;
                    }
                }
                row
            })
            .collect()
    }

    /// `H(U^N | W^N, Z^n)` in bits for the whole block.
    pub fn exact_equivocation(&self) -> Result<f64> {
        let nw = self.model.ch_w().output_size();
        let w_blocks = Radix::new(nw, self.big_n, MAX_SOURCE_CELLS, "wiretapper side-information blocks")?;
        let states = [self.src.count, self.keys(), self.m2(), w_blocks.count, self.out_z.count]
            .iter()
            .map(|&c| c as u128)
            .product::<u128>();
        if states > MAX_EQUIVOCATION_STATES {
            return Err(Error::GuardExceeded(format!("{states} equivocation states")));
        }
        let uw = compose_channels(self.model.ch_v(), self.model.ch_w())?;
        let pw = block_kernel(&uw, self.src, w_blocks);
        let given_t = self.wiretap_given_t();
        let keys = self.keys();
        let given_s: Vec<Vec<f64>> = (0..self.messages())
            .map(|s| {
                (0..self.out_z.count)
                    .map(|z| (0..keys).map(|k| given_t[s ^ k][z]).sum::<f64>() / keys as f64)
                    .collect()
            })
            .collect();
        let parts: Vec<(f64, f64)> = (0..w_blocks.count)
            .into_par_iter()
            .map(|w| {
                let mut h_uwz = 0.0;
                let mut wz = vec![0.0; self.out_z.count];
                for u in 0..self.src.count {
                    let base = self.pu[u] * pw[u][w];
                    if base == 0.0 {
                        continue;
                    }
                    let law = &given_s[self.quantizer.encoder[u]];
                    let cells = law.iter().map(|&p| base * p);
                    for (acc, p) in wz.iter_mut().zip(cells.clone()) {
                        *acc += p;
                    }
                    h_uwz += entropy_of(cells);
                }
                (h_uwz, entropy_of(wz))
            })
            .collect();
        let (h_uwz, h_wz) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
        Ok((h_uwz - h_wz).max(0.0))
    }

    /// Exact report of every performance quantity plus the theorem checks.
    pub fn measure(&self) -> Result<SimReport> {
        let (m, m2, keys) = (self.messages(), self.m2(), self.keys());
        let equivocation = self.exact_equivocation()?;
        let h_u_given_w = self.model.entropies().h_u_given_w;

        // legit decoder: law of T' given T
        let mut confusion = vec![vec![0.0; m]; m];
        for (t, row) in confusion.iter_mut().enumerate() {
            for word in &self.py[t * m2..(t + 1) * m2] {
                for (y, &p) in word.iter().enumerate() {
                    row[self.decoder[y]] += p / m2 as f64;
                }
            }
        }
        let legit_error: f64 = (0..m).map(|t| self.qt[t] * (1.0 - confusion[t][t])).sum::<f64>().clamp(0.0, 1.0);

        let pv = block_kernel(self.model.ch_v(), self.src, self.side);
        let uhat = Radix::new(self.model.d().reproduction_size(), self.big_n, usize::MAX, "reconstruction")?;
        let d = self.model.d();
        let block_distortion = |u: &[usize], r: usize| -> f64 {
            uhat.digits(r).iter().zip(u).map(|(&b, &a)| d.get(a, b)).sum::<f64>() / self.big_n as f64
        };
        let mut distortion = 0.0;
        let mut quantizer_distortion = 0.0;
        for u in 0..self.src.count {
            let digits = self.src.digits(u);
            let s = self.quantizer.encoder[u];
            for v in 0..self.side.count {
                let p = self.pu[u] * pv[u][v];
                if p == 0.0 {
                    continue;
                }
                quantizer_distortion += p * block_distortion(&digits, self.quantizer.reconstructor[s][v]);
                for k in 0..keys {
                    for (t_hat, &c) in confusion[s ^ k].iter().enumerate() {
                        if c > 0.0 {
                            let r = self.quantizer.reconstructor[t_hat ^ k][v];
                            distortion += p * c * block_distortion(&digits, r) / keys as f64;
                        }
                    }
                }
            }
        }

        // informed wiretapper: sub-code C_t and union C'_s
        let delta_t: Vec<f64> = (0..m).map(|t| self.informed_error(&(t * m2..(t + 1) * m2).collect::<Vec<_>>())).collect();
        let informed_wiretap_error: f64 = (0..m).map(|t| self.qt[t] * delta_t[t]).sum();
        let delta_s: Vec<f64> = (0..m)
            .map(|s| {
                let union: Vec<usize> = (0..keys).flat_map(|k| ((s ^ k) * m2)..((s ^ k) + 1) * m2).collect();
                self.informed_error(&union)
            })
            .collect();
        let informed_wiretap_error_union: f64 = (0..m).map(|s| self.ps[s] * delta_s[s]).sum();

        let fano_subcode = (0..m).all(|t| {
            let h = self.codeword_equivocation(&(t * m2..(t + 1) * m2).collect::<Vec<_>>());
            h <= binary_entropy(delta_t[t]) + delta_t[t] * (m2 as f64).log2() + CHECK_TOL
        });
        let given_t = self.wiretap_given_t();
        let fano_union = (0..m).all(|s| {
            let cells: Vec<f64> = (0..keys).flat_map(|k| given_t[s ^ k].iter().map(move |&p| p / keys as f64)).collect();
            let h_tz = entropy_of(cells);
            let h_z = entropy_of((0..self.out_z.count).map(|z| (0..keys).map(|k| given_t[s ^ k][z]).sum::<f64>() / keys as f64));
            let bound = binary_entropy(delta_s[s]) + delta_s[s] * ((keys * m2) as f64).log2();
            h_tz - h_z <= bound + CHECK_TOL
        });

        let pad_perfect = (keys == m).then(|| {
            (0..m).all(|t| (self.qt[t] - 1.0 / m as f64).abs() <= CHECK_TOL)
                && (0..m).all(|s| (0..m).all(|t| {
                    let joint = if (s ^ t) < keys { self.ps[s] / keys as f64 } else { 0.0 };
                    (joint - self.ps[s] * self.qt[t]).abs() <= CHECK_TOL
                }))
        });

        let (info, per_letter, avg_power) = self.wiretap_information();
        let n = self.n as f64;
        Ok(SimReport {
            source_block: self.big_n,
            channel_block: self.n,
            key_bits: self.key_bits,
            messages: m,
            subcode_size: m2,
            equivocation_per_symbol: equivocation / self.big_n as f64,
            equivocation_ceiling: h_u_given_w,
            distortion,
            quantizer_distortion,
            legit_error,
            informed_wiretap_error,
            informed_wiretap_error_union,
            avg_power,
            wiretap_information_per_use: info / n,
            per_letter_information_bound: per_letter / n,
            fano_holds: fano_subcode && fano_union,
            pad_perfect,
            converse_holds: equivocation / self.big_n as f64 <= h_u_given_w + 1e-9,
            memoryless_bound_holds: info <= per_letter + CHECK_TOL,
        })
    }

    /// Error probability of the ML decoder for a uniformly used list of codewords on the wiretap channel.
    fn informed_error(&self, list: &[usize]) -> f64 {
        let hit: f64 = (0..self.out_z.count)
            .map(|z| list.iter().map(|&i| self.pz[i][z]).fold(0.0, f64::max))
            .sum();
        (1.0 - hit / list.len() as f64).clamp(0.0, 1.0)
    }

    /// `H(X^n | Z^n)` when `X^n` is uniform over the listed codeword slots.
    fn codeword_equivocation(&self, list: &[usize]) -> f64 {
        let mut words: Vec<(usize, f64)> = Vec::new();
        for &i in list {
            let key = self.x_blocks.index(self.codebook.word(i)).expect("codewords validated");
            match words.iter_mut().find(|(w, _)| *w == key) {
                Some(entry) => entry.1 += 1.0 / list.len() as f64,
                None => words.push((key, 1.0 / list.len() as f64)),
            }
        }
        let rows: Vec<Vec<f64>> = words
            .iter()
            .map(|&(w, p)| block_row(self.model.coded().ch_zx(), &self.x_blocks.digits(w), self.out_z).into_iter().map(|x| x * p).collect())
            .collect();
        let h_xz = entropy_of(rows.iter().flatten().copied());
        let h_z = entropy_of((0..self.out_z.count).map(|z| rows.iter().map(|r| r[z]).sum::<f64>()));
        (h_xz - h_z).max(0.0)
    }

    /// `I(X^n; Z^n)`, `sum_j I(X_j; Z_j)` and the expected cost per channel use.
    fn wiretap_information(&self) -> (f64, f64, f64) {
        let (m2, nx) = (self.m2(), self.model.coded().input_size());
        let ch = self.model.coded().ch_zx();
        let phi = self.model.coded().phi();
        let mut px = vec![0.0; self.x_blocks.count];
        for (i, word) in self.codebook.words.iter().enumerate() {
            px[self.x_blocks.index(word).expect("codewords validated")] += self.qt[i / m2] / m2 as f64;
        }
        let mut pz = vec![0.0; self.out_z.count];
        let mut h_z_given_x = 0.0;
        let mut marginals = vec![vec![0.0; nx]; self.n];
        let mut power = 0.0;
        for (x, &p) in px.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let digits = self.x_blocks.digits(x);
            let row = block_row(ch, &digits, self.out_z);
            h_z_given_x += p * entropy_raw(&row);
            for (acc, r) in pz.iter_mut().zip(&row) {
                *acc += p * r;
            }
            for (j, &a) in digits.iter().enumerate() {
                marginals[j][a] += p;
            }
            power += p * digits.iter().map(|&a| phi[a]).sum::<f64>() / self.n as f64;
        }
        let info = (entropy_raw(&pz) - h_z_given_x).max(0.0);
        let per_letter = marginals.iter().map(|p| ch.mutual_information_raw(p)).sum();
        (info, per_letter, power)
    }
}


/// Exact performance of one [`SimSystem`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub source_block: usize,
    pub channel_block: usize,
    pub key_bits: u32,
    pub messages: usize,
    pub subcode_size: usize,
    /// `H(U^N | W^N, Z^n) / N`
    pub equivocation_per_symbol: f64,
    /// `H(U | W)`, the largest value the equivocation can take
    pub equivocation_ceiling: f64,
    /// per-letter distortion at the legitimate receiver
    pub distortion: f64,
    /// per-letter distortion when the message is received without error
    pub quantizer_distortion: f64,
    /// `Pr{T' != T}`
    pub legit_error: f64,
    /// `sum_t q_t delta_t` for the sub-codes
    pub informed_wiretap_error: f64,
    /// `sum_s p_s delta'_s` for the key-union codes
    pub informed_wiretap_error_union: f64,
    pub avg_power: f64,
    /// `I(X^n; Z^n) / n`
    pub wiretap_information_per_use: f64,
    /// `(1/n) sum_j I(X_j; Z_j)`
    pub per_letter_information_bound: f64,
    pub fano_holds: bool,
    /// present only when the key covers the whole message
    pub pad_perfect: Option<bool>,
    pub converse_holds: bool,
    pub memoryless_bound_holds: bool,
}

/// Parameters of a toy system built by [`SimSystem::from_config`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub source_block: usize,
    pub channel_block: usize,
    /// quantizer messages before padding to a power of two
    pub messages: usize,
    pub subcode_size: usize,
    pub key_bits: u32,
    pub seed: u64,
    /// codeword component law; uniform when absent
    pub px_star: Option<Distribution>,
    pub target_distortion: f64,
}

impl SimSystem {
    /// Toy quantizer plus a seeded codebook sized to its padded message space.
    pub fn from_config(model: SecrecyModel, cfg: &SimConfig) -> Result<Self> {
        let quantizer = build_toy_wz_quantizer(&model, cfg.source_block, cfg.messages, cfg.target_distortion)?;
        let px = cfg.px_star.clone().unwrap_or_else(|| Distribution::uniform(model.coded().input_size()));
        let spec = CodebookSpec::new(quantizer.padded_messages, cfg.subcode_size, cfg.channel_block, px, cfg.seed)?;
        let codebook = build_codebook(&spec)?;
        Self::new(model, cfg.source_block, cfg.channel_block, cfg.key_bits, quantizer, codebook)
    }
}

/// Key length recommended for a blocklength-`N` system at key rate `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KeyPlan {
    pub key_bits: u32,
    /// true when the channel alone already hides the description and the key is unused
    pub degenerate: bool,
    /// `R_U|V(D) - λ Γ(R_U|V(D)/λ, Q)`, the largest useful key rate
    pub useful_rate: f64,
}

pub fn key_plan(m: &SecrecyModel, lambda: f64, key_rate: f64, distortion: f64, q: f64, big_n: usize) -> Result<KeyPlan> {
    if !(lambda > 0.0) || !(key_rate >= 0.0) {
        return Err(Error::OutOfRange("need lambda > 0 and a nonnegative key rate".into()));
    }
    let rate = wyner_ziv_rate(m.pu(), m.ch_v(), m.d(), distortion)?.rate;
    let g = gamma(m.coded(), rate / lambda, q)?;
    let useful_rate = (rate - lambda * g.value).max(0.0);
    let degenerate = useful_rate <= 0.0;
    let key_bits = if degenerate { 0 } else { (big_n as f64 * key_rate.min(useful_rate)).floor() as u32 };
    Ok(KeyPlan { key_bits, degenerate, useful_rate })
}
