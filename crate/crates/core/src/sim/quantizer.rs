//! Block quantizer with a side-information-aware Bayes reconstructor.

use serde::Serialize;

use super::block::{block_kernel, product_law, Radix};
use crate::error::{Error, Result};
use crate::region::SecrecyModel;
use crate::rd::DistortionMeasure;

/// Largest number of assignments scored by [`build_toy_wz_quantizer`].
pub const SEARCH_BUDGET: u64 = 1 << 20;
/// Largest `|U|^N * |V|^N` handled by the quantizer.
pub const MAX_SOURCE_CELLS: usize = 1 << 22;

/// Encoder table `u^N -> s` with its reconstruction table `(s, v^N) -> û^N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantizer {
    /// message index for every source block
    pub encoder: Vec<usize>,
    /// reconstruction block index, `reconstructor[s][v]`
    pub reconstructor: Vec<Vec<usize>>,
    /// requested number of messages
    pub messages: usize,
    /// message space after padding to a power of two
    pub padded_messages: usize,
    /// expected per-letter distortion with the message known
    pub distortion: f64,
    pub meets_target: bool,
    /// `false` when the search budget forced a greedy search
    pub exhaustive: bool,
}

/// Joint block law of `(U^N, V^N)` and the per-letter distortion structure.
pub(crate) struct SourceBlocks<'a> {
    pub u: Radix,
    pub v: Radix,
    /// `P(u^N, v^N)`, row `u`
    pub joint: Vec<Vec<f64>>,
    pub d: &'a DistortionMeasure,
    digits_u: Vec<Vec<usize>>,
}

impl<'a> SourceBlocks<'a> {
    pub fn new(m: &'a SecrecyModel, big_n: usize) -> Result<Self> {
        let u = Radix::new(m.pu().len(), big_n, MAX_SOURCE_CELLS, "source blocks")?;
        let v = Radix::new(m.ch_v().output_size(), big_n, MAX_SOURCE_CELLS, "side-information blocks")?;
        if u.count.saturating_mul(v.count) > MAX_SOURCE_CELLS {
            return Err(Error::GuardExceeded(format!("{} x {} source cells", u.count, v.count)));
        }
        let pu = product_law(m.pu().probs(), u);
        let kernel = block_kernel(m.ch_v(), u, v);
        let joint = kernel.into_iter().zip(&pu).map(|(row, &p)| row.into_iter().map(|x| x * p).collect()).collect();
        let digits_u = (0..u.count).map(|i| u.digits(i)).collect();
        Ok(SourceBlocks { u, v, joint, d: m.d(), digits_u })
    }

    /// Bayes reconstruction of `v` from the source blocks in `members`
    /// (weights `P(u, v)`), with its total expected distortion.
    fn reconstruct(&self, members: &[usize], v: usize) -> (usize, f64) {
        let (nr, len) = (self.d.reproduction_size(), self.u.len);
        let mut block = 0;
        let mut cost = 0.0;
        for i in 0..len {
            let mut best = (0, f64::INFINITY);
            for r in 0..nr {
                let c: f64 = members.iter().map(|&u| self.joint[u][v] * self.d.get(self.digits_u[u][i], r)).sum();
                if c < best.1 {
                    best = (r, c);
                }
            }
            block = block * nr + best.0;
            cost += best.1;
        }
        (block, cost)
    }

    /// Reconstruction table for `rows` messages and the per-letter distortion.
    /// Messages no source block maps to fall back to the side-information-only
    /// reconstruction.
    pub fn reconstructor(&self, encoder: &[usize], rows: usize) -> (Vec<Vec<usize>>, f64) {
        let mut cells = vec![Vec::new(); rows];
        for (u, &s) in encoder.iter().enumerate() {
            cells[s].push(u);
        }
        let everyone: Vec<usize> = (0..self.u.count).collect();
        let mut total = 0.0;
        let table = cells
            .iter()
            .map(|members| {
                (0..self.v.count)
                    .map(|v| {
                        if members.is_empty() {
                            self.reconstruct(&everyone, v).0
                        } else {
                            let (b, c) = self.reconstruct(members, v);
                            total += c;
                            b
                        }
                    })
                    .collect()
            })
            .collect();
        (table, total / self.u.len as f64)
    }

    fn score(&self, encoder: &[usize], rows: usize) -> f64 {
        let mut cells = vec![Vec::new(); rows];
        for (u, &s) in encoder.iter().enumerate() {
            cells[s].push(u);
        }
        cells
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| (0..self.v.count).map(|v| self.reconstruct(c, v).1).sum::<f64>())
            .sum::<f64>()
            / self.u.len as f64
    }
}

/// Searches encoder tables `U^N -> {0..M-1}` for the smallest expected
/// distortion under Bayes reconstruction from `(s, V^N)`.
///
/// Up to [`SEARCH_BUDGET`] assignments the search is exhaustive over label
/// classes; beyond it a deterministic coordinate descent is used and
/// `exhaustive` is `false`.
pub fn build_toy_wz_quantizer(m: &SecrecyModel, big_n: usize, messages: usize, target: f64) -> Result<Quantizer> {
    if big_n == 0 || messages == 0 {
        return Err(Error::OutOfRange("block length and message count must be positive".into()));
    }
    let src = SourceBlocks::new(m, big_n)?;
    let cells = src.u.count;
    let labels = messages.min(cells);
    let candidates = (labels as f64).powi(cells as i32);
    let (encoder, exhaustive) = if candidates <= SEARCH_BUDGET as f64 {
        (exhaustive_search(&src, labels), true)
    } else {
        (greedy_search(&src, labels), false)
    };
    let padded = messages.next_power_of_two();
    let (reconstructor, distortion) = src.reconstructor(&encoder, padded);
    Ok(Quantizer {
        encoder,
        reconstructor,
        messages,
        padded_messages: padded,
        distortion,
        meets_target: distortion <= target + 1e-12,
        exhaustive,
    })
}

/// Visits encoders in restricted-growth form, so each partition of the
/// source blocks into at most `labels` classes is scored once.
fn exhaustive_search(src: &SourceBlocks, labels: usize) -> Vec<usize> {
    fn rec(src: &SourceBlocks, labels: usize, at: usize, used: usize, cur: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
        if at == cur.len() {
            let s = src.score(cur, labels);
            if s < best.0 - 1e-15 {
                *best = (s, cur.clone());
            }
            return;
        }
        for label in 0..=used.min(labels - 1) {
            cur[at] = label;
            rec(src, labels, at + 1, used.max(label + 1), cur, best);
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    rec(src, labels, 0, 0, &mut vec![0; src.u.count], &mut best);
    best.1
}

/// First-improvement coordinate descent from `u -> u mod labels`. Moving
/// one source block only changes the cost of two cells, so each move is
/// rescored locally; the loop stops at a local optimum or when
/// [`SEARCH_BUDGET`] moves have been tried.
fn greedy_search(src: &SourceBlocks, labels: usize) -> Vec<usize> {
    let mut encoder: Vec<usize> = (0..src.u.count).map(|u| u % labels).collect();
    let mut cells = vec![Vec::new(); labels];
    for (u, &s) in encoder.iter().enumerate() {
        cells[s].push(u);
    }
    let cell_cost = |members: &[usize]| -> f64 { (0..src.v.count).map(|v| src.reconstruct(members, v).1).sum() };
    let mut costs: Vec<f64> = cells.iter().map(|c| cell_cost(c)).collect();
    let mut tried = 0u64;
    loop {
        let mut improved = false;
        for u in 0..encoder.len() {
            let from = encoder[u];
            let without: Vec<usize> = cells[from].iter().copied().filter(|&x| x != u).collect();
            let from_cost = cell_cost(&without);
            for to in (0..labels).filter(|&l| l != from) {
                if tried >= SEARCH_BUDGET {
                    return encoder;
                }
                tried += 1;
                let mut with = cells[to].clone();
                with.push(u);
                let to_cost = cell_cost(&with);
                if from_cost + to_cost < costs[from] + costs[to] - 1e-15 {
                    encoder[u] = to;
                    cells[from] = without;
                    cells[to] = with;
                    costs[from] = from_cost;
                    costs[to] = to_cost;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return encoder;
        }
    }
}
