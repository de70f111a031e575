//! Exhaustive grid search for the Wyner–Ziv function.
//!
//! Rows of `P(a|u)` range over the simplex lattice with spacing `grid_step`
//! and `|U| + 1` auxiliary letters. Relabelling auxiliary letters changes
//! nothing, so only candidates whose columns are in non-increasing
//! lexicographic order are visited. Every candidate is scored with its
//! exactly optimal reconstruction. The reported rate is the lower convex
//! envelope of the candidate `(distortion, rate)` cloud: time-sharing two
//! candidates is itself achievable, so the result still bounds the true
//! function from above.

use rayon::prelude::*;

use super::DistortionMeasure;
use crate::error::{Error, Result};
use crate::prob::{entropy_raw, plog2p, Channel, Distribution};

/// Upper limit on visited candidates per call.
pub const MAX_CANDIDATES: u128 = 50_000_000;

/// Grid-search upper bound on `R_U|V(D)`.
///
/// Fails with [`Error::InfeasibleAtResolution`] when no grid candidate
/// meets the distortion target.
pub fn wz_oracle(pu: &Distribution, ch_v: &Channel, d: &DistortionMeasure, target: f64, grid_step: f64) -> Result<f64> {
    wz_oracle_many(pu, ch_v, d, &[target], grid_step)?.remove(0)
}

/// [`wz_oracle`] at several distortion levels from a single sweep.
pub fn wz_oracle_many(
    pu: &Distribution,
    ch_v: &Channel,
    d: &DistortionMeasure,
    targets: &[f64],
    grid_step: f64,
) -> Result<Vec<Result<f64>>> {
    super::check_side(pu, ch_v, d)?;
    for &t in targets {
        super::check_distortion(t)?;
    }
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::OutOfRange(format!("grid step {grid_step} must lie in (0, 0.5]")));
    }
    let nu = pu.len();
    if nu > 3 {
        return Err(Error::OutOfRange(format!("oracle supports at most 3 source letters, got {nu}")));
    }
    let levels = (1.0 / grid_step).round() as usize;
    let na = nu + 1;
    let rows = compositions(levels, na);
    let total = (rows.len() as u128).pow(nu as u32);
    if total > MAX_CANDIDATES * 8 {
        return Err(Error::GuardExceeded(format!("{total} oracle candidates")));
    }
    let search = Search::new(pu.probs(), ch_v, d, levels, rows);
    let first: Vec<usize> = (0..search.rows.len()).filter(|&i| is_non_increasing(&search.rows[i])).collect();

    let mut cloud: Vec<(f64, f64)> = first
        .par_iter()
        .map(|&i| {
            let mut front = Vec::new();
            let mut choice = vec![i; nu];
            search.descend(1, &mut choice, &mut front);
            lower_hull(front)
        })
        .reduce(Vec::new, |mut a, b| {
            a.extend(b);
            a
        });
    cloud = lower_hull(cloud);
    Ok(targets.iter().map(|&t| envelope_at(&cloud, t).ok_or(Error::InfeasibleAtResolution(grid_step))).collect())
}

/// Lower convex hull of `(distortion, rate)` points, sorted by distortion.
fn lower_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if hull.last().is_some_and(|q| q.0 == p.0) {
            continue;
        }
        // drop points that are not below everything to their left
        if hull.last().is_some_and(|q| q.1 <= p.1) {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Time-sharing rate at distortion `target` on a lower hull.
fn envelope_at(hull: &[(f64, f64)], target: f64) -> Option<f64> {
    let first = hull.first()?;
    if target < first.0 - 1e-12 {
        return None;
    }
    let k = hull.partition_point(|p| p.0 <= target);
    if k == hull.len() {
        return Some(hull[k - 1].1);
    }
    if k == 0 {
        return Some(first.1);
    }
    let (a, b) = (hull[k - 1], hull[k]);
    let w = (target - a.0) / (b.0 - a.0);
    Some((a.1 + w * (b.1 - a.1)).max(0.0))
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in (0..=left).rev() {
            cur.push(x);
            rec(left - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

fn is_non_increasing(row: &[usize]) -> bool {
    row.windows(2).all(|w| w[0] >= w[1])
}

struct Search<'a> {
    pu: &'a [f64],
    ch_v: &'a Channel,
    d: &'a DistortionMeasure,
    levels: usize,
    rows: Vec<Vec<usize>>,
    h_u: f64,
    h_v: f64,
}

impl<'a> Search<'a> {
    fn new(pu: &'a [f64], ch_v: &'a Channel, d: &'a DistortionMeasure, levels: usize, rows: Vec<Vec<usize>>) -> Self {
        let h_u = entropy_raw(pu);
        let h_v = entropy_raw(&ch_v.output_raw(pu));
        Search { pu, ch_v, d, levels, rows, h_u, h_v }
    }

    /// Whether the columns restricted to rows `0..=depth` are in
    /// non-increasing lexicographic order.
    fn ordered(&self, choice: &[usize], depth: usize) -> bool {
        let na = self.rows[0].len();
        for a in 0..na - 1 {
            for &row in &choice[..=depth] {
                let (x, y) = (self.rows[row][a], self.rows[row][a + 1]);
                if x > y {
                    break;
                }
                if x < y {
                    return false;
                }
            }
        }
        true
    }

    fn descend(&self, depth: usize, choice: &mut Vec<usize>, out: &mut Vec<(f64, f64)>) {
        if depth == choice.len() {
            let (rate, dist) = self.score(choice);
            out.push((dist, rate));
            return;
        }
        for i in 0..self.rows.len() {
            choice[depth] = i;
            if self.ordered(choice, depth) {
                self.descend(depth + 1, choice, out);
            }
        }
    }

    fn score(&self, choice: &[usize]) -> (f64, f64) {
        let (nu, nv, na) = (self.pu.len(), self.ch_v.output_size(), self.rows[0].len());
        let scale = 1.0 / self.levels as f64;
        let mut h_ua = 0.0;
        for u in 0..nu {
            for a in 0..na {
                h_ua -= plog2p(self.pu[u] * self.rows[choice[u]][a] as f64 * scale);
            }
        }
        let mut h_va = 0.0;
        let mut dist = 0.0;
        let mut w = [0.0; 3];
        for a in 0..na {
            for v in 0..nv {
                let mut p = 0.0;
                for u in 0..nu {
                    w[u] = self.pu[u] * self.rows[choice[u]][a] as f64 * scale * self.ch_v.get(u, v);
                    p += w[u];
                }
                if p == 0.0 {
                    continue;
                }
                h_va -= plog2p(p);
                dist += self.d.best_constant_with_cost(&w[..nu]).1;
            }
        }
        ((self.h_u - h_ua - self.h_v + h_va).max(0.0), dist)
    }
}
