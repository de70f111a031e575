#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use secrecy_core::sim::SimSystem;
use secrecy_core::{Channel, Distribution};

pub fn random_law(rng: &mut ChaCha8Rng, k: usize) -> Distribution {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.02..1.0)).collect();
    let s: f64 = w.iter().sum();
    Distribution::new(w.into_iter().map(|x| x / s).collect()).unwrap()
}

pub fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Channel {
    Channel::new((0..rows).map(|_| random_law(rng, cols).into_vec()).collect()).unwrap()
}

pub fn blocks(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..base).map(move |a| {
                    let mut next = prefix.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    out
}

pub fn transition(ch: &Channel, input: &[usize], output: &[usize]) -> f64 {
    input.iter().zip(output).map(|(&a, &b)| ch.get(a, b)).product()
}

fn h(masses: impl Iterator<Item = f64>) -> f64 {
    masses.filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum()
}

/// `H(U^N | W^N, Z^n)` by summing over every (u, v, w, k, τ, z) tuple.
pub fn brute_equivocation(sys: &SimSystem, big_n: usize, n: usize) -> f64 {
    let m = sys.model();
    let book = sys.codebook();
    let m2 = book.spec.m2;
    let keys = 1usize << sys.key_bits();
    let ch_zx = m.coded().ch_zx();
    let mut uwz: HashMap<(usize, Vec<usize>, Vec<usize>), f64> = HashMap::new();
    for (ui, u) in blocks(m.pu().len(), big_n).iter().enumerate() {
        let pu: f64 = u.iter().map(|&a| m.pu().get(a)).product();
        let s = sys.quantizer().encoder[ui];
        for v in blocks(m.ch_v().output_size(), big_n) {
            let puv = pu * transition(m.ch_v(), u, &v);
            for w in blocks(m.ch_w().output_size(), big_n) {
                let puvw = puv * transition(m.ch_w(), &v, &w);
                for k in 0..keys {
                    for tau in 0..m2 {
                        let x = &book.words[(s ^ k) * m2 + tau];
                        for z in blocks(ch_zx.output_size(), n) {
                            let p = puvw * transition(ch_zx, x, &z) / (keys * m2) as f64;
                            *uwz.entry((ui, w.clone(), z)).or_default() += p;
                        }
                    }
                }
            }
        }
    }
    let mut wz: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    for ((_, w, z), p) in &uwz {
        *wz.entry((w.clone(), z.clone())).or_default() += p;
    }
    h(uwz.values().copied()) - h(wz.values().copied())
}
