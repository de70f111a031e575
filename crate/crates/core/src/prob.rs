//! Finite-alphabet probability primitives.
//!
//! Distributions, stochastic matrices and small joint tables over index
//! alphabets `0..k`, plus the Shannon measures built on them. Every
//! information quantity is in bits and uses the convention `0 log 0 = 0`.

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for simplex membership and row stochasticity.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn plog2p(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of an unchecked weight vector (bits).
pub(crate) fn entropy_raw(p: &[f64]) -> f64 {
    -p.iter().map(|&x| plog2p(x)).sum::<f64>()
}

/// Binary entropy function `h(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_raw(&[p, 1.0 - p])
}

fn check_simplex(weights: &mut [f64], what: &str) -> std::result::Result<(), String> {
    if weights.is_empty() {
        return Err(format!("{what}: empty probability vector"));
    }
    for (i, w) in weights.iter_mut().enumerate() {
        if !w.is_finite() {
            return Err(format!("{what}: entry {i} is not finite"));
        }
        if *w < 0.0 {
            if *w < -SIMPLEX_TOL {
                return Err(format!("{what}: entry {i} is negative ({w})"));
            }
            *w = 0.0;
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(format!("{what}: weights sum to {total}, not 1"));
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(())
}

/// Probability vector over the alphabet `0..len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        check_simplex(&mut probs, "distribution").map_err(Error::InvalidDistribution)?;
        Ok(Distribution { probs })
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform distribution over an empty alphabet");
        Distribution { probs: vec![1.0 / size as f64; size] }
    }

    /// Point mass on `at`.
    pub fn point(size: usize, at: usize) -> Self {
        assert!(at < size);
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Distribution { probs }
    }

    /// Binary distribution `(1 - p, p)`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(vec![1.0 - p, p])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, a: usize) -> f64 {
        self.probs[a]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Row-stochastic matrix; entry `(a, b)` is the probability of output `b`
/// given input `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    input_size: usize,
    output_size: usize,
    entries: Vec<f64>,
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.input_size))?;
        for a in 0..self.input_size {
            seq.serialize_element(self.row(a))?;
        }
        seq.end()
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let input_size = rows.len();
        if input_size == 0 {
            return Err(Error::InvalidChannel("no rows".into()));
        }
        let output_size = rows[0].len();
        let mut entries = Vec::with_capacity(input_size * output_size);
        for (a, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidChannel(format!(
                    "row {a} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            entries.extend(row);
        }
        Self::from_flat(input_size, output_size, entries)
    }

    pub fn from_flat(input_size: usize, output_size: usize, mut entries: Vec<f64>) -> Result<Self> {
        if input_size == 0 || output_size == 0 {
            return Err(Error::InvalidChannel("empty alphabet".into()));
        }
        if entries.len() != input_size * output_size {
            return Err(Error::InvalidChannel(format!(
                "{} entries for a {input_size}x{output_size} matrix",
                entries.len()
            )));
        }
        for (a, row) in entries.chunks_mut(output_size).enumerate() {
            check_simplex(row, &format!("row {a}")).map_err(Error::InvalidChannel)?;
        }
        Ok(Channel { input_size, output_size, entries })
    }

    pub fn identity(size: usize) -> Self {
        let mut entries = vec![0.0; size * size];
        for a in 0..size {
            entries[a * size + a] = 1.0;
        }
        Channel { input_size: size, output_size: size, entries }
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output `2` is the erasure symbol.
    pub fn erasure(p: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - p, 0.0, p], vec![0.0, 1.0 - p, p]])
    }

    /// Channel whose output law ignores the input.
    pub fn constant(input_size: usize, output: &Distribution) -> Self {
        let mut entries = Vec::with_capacity(input_size * output.len());
        for _ in 0..input_size {
            entries.extend_from_slice(output.probs());
        }
        Channel { input_size, output_size: output.len(), entries }
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.output_size + b]
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[f64] {
        &self.entries[a * self.output_size..(a + 1) * self.output_size]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.output_size).map(|r| r.to_vec()).collect()
    }

    /// Output law induced by input law `p`.
    pub fn output(&self, p: &Distribution) -> Result<Distribution> {
        if p.len() != self.input_size {
            return Err(Error::DimensionMismatch(format!(
                "input law over {} letters, channel expects {}",
                p.len(),
                self.input_size
            )));
        }
        Ok(Distribution { probs: self.output_raw(p.probs()) })
    }

    pub(crate) fn output_raw(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_size];
        for (a, &pa) in p.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(a)) {
                *o += pa * w;
            }
        }
        out
    }

    /// Average conditional output entropy `Σ_a p(a) H(row a)`, weights unchecked.
    pub(crate) fn noise_entropy_raw(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .filter(|(_, &pa)| pa > 0.0)
            .map(|(a, &pa)| pa * entropy_raw(self.row(a)))
            .sum()
    }

    /// `I(X;Y)` for unchecked input weights `p`.
    pub(crate) fn mutual_information_raw(&self, p: &[f64]) -> f64 {
        (entropy_raw(&self.output_raw(p)) - self.noise_entropy_raw(p)).max(0.0)
    }
}

/// Joint law of a pair, stored row-major as `table[a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint2 {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl Joint2 {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || table.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDistribution("ragged or empty joint table".into()));
        }
        let mut flat: Vec<f64> = table.into_iter().flatten().collect();
        check_simplex(&mut flat, "joint").map_err(Error::InvalidDistribution)?;
        Ok(Joint2 { rows, cols, table: flat })
    }

    /// Joint law of `(X, Y)` with `X ~ px` and `Y` drawn through `ch`.
    pub fn from_channel(px: &Distribution, ch: &Channel) -> Result<Self> {
        if px.len() != ch.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "input law over {} letters, channel expects {}",
                px.len(),
                ch.input_size()
            )));
        }
        let mut table = Vec::with_capacity(px.len() * ch.output_size());
        for (a, &pa) in px.probs().iter().enumerate() {
            table.extend(ch.row(a).iter().map(|w| pa * w));
        }
        Ok(Joint2 { rows: px.len(), cols: ch.output_size(), table })
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.table[a * self.cols + b]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn first_marginal(&self) -> Distribution {
        let probs = self.table.chunks(self.cols).map(|r| r.iter().sum()).collect();
        Distribution { probs }
    }

    pub fn second_marginal(&self) -> Distribution {
        let mut probs = vec![0.0; self.cols];
        for row in self.table.chunks(self.cols) {
            for (p, &x) in probs.iter_mut().zip(row) {
                *p += x;
            }
        }
        Distribution { probs }
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_raw(&self.table)
    }
}

/// Joint law of a triple, `table[u][v][w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint3 {
    dims: [usize; 3],
    table: Vec<f64>,
}

impl Joint3 {
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn get(&self, u: usize, v: usize, w: usize) -> f64 {
        let [_, nv, nw] = self.dims;
        self.table[(u * nv + v) * nw + w]
    }

    /// Pair marginal keeping the two listed coordinates (in the given order).
    pub fn pair(&self, first: usize, second: usize) -> Joint2 {
        assert!(first < 3 && second < 3 && first != second);
        let rows = self.dims[first];
        let cols = self.dims[second];
        let mut table = vec![0.0; rows * cols];
        let [nu, nv, nw] = self.dims;
        for u in 0..nu {
            for v in 0..nv {
                for w in 0..nw {
                    let idx = [u, v, w];
                    table[idx[first] * cols + idx[second]] += self.get(u, v, w);
                }
            }
        }
        Joint2 { rows, cols, table }
    }

    pub fn marginal(&self, axis: usize) -> Distribution {
        let other = if axis == 0 { 1 } else { 0 };
        self.pair(axis, other).first_marginal()
    }

    /// `H(first | second)` from the pair marginal.
    pub fn conditional_entropy(&self, first: usize, second: usize) -> f64 {
        let j = self.pair(first, second);
        (j.joint_entropy() - entropy(&j.second_marginal())).max(0.0)
    }

    pub fn entropy(&self) -> f64 {
        entropy_raw(&self.table)
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &Distribution) -> f64 {
    entropy_raw(p.probs())
}

/// Joint law of `(U, V, W)` for the cascade `U -> ch1 -> V -> ch2 -> W`.
pub fn joint_from_cascade(pu: &Distribution, ch1: &Channel, ch2: &Channel) -> Result<Joint3> {
    if pu.len() != ch1.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "source over {} letters, first channel expects {}",
            pu.len(),
            ch1.input_size()
        )));
    }
    if ch1.output_size() != ch2.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "first channel emits {} letters, second expects {}",
            ch1.output_size(),
            ch2.input_size()
        )));
    }
    let dims = [pu.len(), ch1.output_size(), ch2.output_size()];
    let mut table = Vec::with_capacity(dims.iter().product());
    for (u, &p) in pu.probs().iter().enumerate() {
        for v in 0..dims[1] {
            let puv = p * ch1.get(u, v);
            table.extend(ch2.row(v).iter().map(|w| puv * w));
        }
    }
    Ok(Joint3 { dims, table })
}

/// `I = H(first) + H(second) - H(joint)`, clipped at zero against rounding.
pub fn mutual_information(j: &Joint2) -> f64 {
    (entropy(&j.first_marginal()) + entropy(&j.second_marginal()) - j.joint_entropy()).max(0.0)
}

/// `I(X;Y|Z) = I(X;Y) - I(X;Z)` on the degraded cascade `X -> Y -> Z`.
pub fn conditional_mutual_information_xyz(
    px: &Distribution,
    ch_y: &Channel,
    ch_z: &Channel,
) -> Result<f64> {
    let ch_xz = compose_channels(ch_y, ch_z)?;
    let ixy = mutual_information(&Joint2::from_channel(px, ch_y)?);
    let ixz = mutual_information(&Joint2::from_channel(px, &ch_xz)?);
    Ok((ixy - ixz).max(0.0))
}

/// Channel from the input of `ch1` to the output of `ch2` (matrix product).
pub fn compose_channels(ch1: &Channel, ch2: &Channel) -> Result<Channel> {
    if ch1.output_size() != ch2.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose {}x{} with {}x{}",
            ch1.input_size(),
            ch1.output_size(),
            ch2.input_size(),
            ch2.output_size()
        )));
    }
    let (n_in, n_out) = (ch1.input_size(), ch2.output_size());
    let mut entries = vec![0.0; n_in * n_out];
    for a in 0..n_in {
        let out = &mut entries[a * n_out..(a + 1) * n_out];
        for (b, &p) in ch1.row(a).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &q) in out.iter_mut().zip(ch2.row(b)) {
                *o += p * q;
            }
        }
    }
    Ok(Channel { input_size: n_in, output_size: n_out, entries })
}

/// `Σ_x px(x) φ(x)`.
pub fn expected_cost(px: &Distribution, phi: &[f64]) -> Result<f64> {
    if phi.len() != px.len() {
        return Err(Error::DimensionMismatch(format!(
            "cost vector has {} entries, law has {}",
            phi.len(),
            px.len()
        )));
    }
    Ok(px.probs().iter().zip(phi).map(|(p, c)| p * c).sum())
}
