//! Brute-force enumerations written independently of the simulator's tables.

mod common;

use secrecy_core::gamma::CodedChannelModel;
use secrecy_core::region::SecrecyModel;
use secrecy_core::sim::{SimConfig, SimSystem};
use secrecy_core::{Channel, Distribution, DistortionMeasure};

use common::{blocks, brute_equivocation, transition};

fn model(p_v: f64, p_w: f64, p_y: f64, p_z: f64) -> SecrecyModel {
    let coded = CodedChannelModel::costless(Channel::bsc(p_y).unwrap(), Channel::bsc(p_z).unwrap()).unwrap();
    SecrecyModel::new(
        Distribution::uniform(2),
        Channel::bsc(p_v).unwrap(),
        Channel::bsc(p_w).unwrap(),
        coded,
        DistortionMeasure::hamming(2),
    )
    .unwrap()
}

fn system(m: SecrecyModel, big_n: usize, n: usize, messages: usize, m2: usize, key_bits: u32, seed: u64) -> SimSystem {
    let cfg = SimConfig {
        source_block: big_n,
        channel_block: n,
        messages,
        subcode_size: m2,
        key_bits,
        seed,
        px_star: None,
        target_distortion: 1.0,
    };
    SimSystem::from_config(m, &cfg).unwrap()
}

#[test]
fn equivocation_matches_brute_force() {
    let cases = [
        (model(0.1, 0.2, 0.05, 0.2), 2, 2, 2, 2, 1, 7u64),
        (model(0.25, 0.1, 0.1, 0.15), 2, 2, 4, 1, 2, 11),
        (model(0.05, 0.3, 0.0, 0.3), 2, 2, 4, 1, 1, 3),
        (model(0.2, 0.2, 0.1, 0.1), 2, 2, 2, 2, 0, 19),
    ];
    for (m, big_n, n, messages, m2, kb, seed) in cases {
        let sys = system(m, big_n, n, messages, m2, kb, seed);
        let fast = sys.exact_equivocation().unwrap();
        let slow = brute_equivocation(&sys, big_n, n);
        assert!((fast - slow).abs() <= 1e-12, "{fast} vs {slow}");
    }
}

#[test]
fn bayes_decoder_matches_posterior_enumeration() {
    let sys = system(model(0.2, 0.1, 0.1, 0.2), 2, 3, 4, 2, 1, 2024);
    let m = sys.model();
    let book = sys.codebook();
    let (m2, keys) = (book.spec.m2, 1usize << sys.key_bits());
    for y in blocks(2, 3) {
        let mut posterior = vec![0.0; book.spec.m];
        for (ui, u) in blocks(2, 2).iter().enumerate() {
            let pu: f64 = u.iter().map(|&a| m.pu().get(a)).product();
            let s = sys.quantizer().encoder[ui];
            for k in 0..keys {
                for tau in 0..m2 {
                    let t = s ^ k;
                    posterior[t] += pu * transition(m.coded().ch_y(), &book.words[t * m2 + tau], &y) / (keys * m2) as f64;
                }
            }
        }
        let best = posterior.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expected = posterior.iter().position(|&p| p >= best * (1.0 - 1e-12)).unwrap();
        assert_eq!(sys.decode_index(&y).unwrap(), expected, "y = {y:?}, posterior {posterior:?}");
    }
}

#[test]
fn full_pad_makes_the_message_independent_of_the_source() {
    let sys = system(model(0.2, 0.1, 0.1, 0.2), 2, 2, 4, 1, 2, 5);
    let priors = sys.message_priors();
    assert!(priors.iter().all(|&q| (q - 0.25).abs() < 1e-15));
    assert_eq!(sys.measure().unwrap().pad_perfect, Some(true));
}

#[test]
fn legit_decode_round_trips_on_a_clean_channel() {
    let sys = system(model(0.2, 0.1, 0.0, 0.2), 2, 2, 4, 1, 1, 8);
    let book = sys.codebook();
    for (ui, u) in blocks(2, 2).iter().enumerate() {
        for k in 0..2 {
            let idx = sys.encode(u, k, 0).unwrap();
            let y = book.words[idx].clone();
            let t = sys.decode_index(&y).unwrap();
            let s = sys.quantizer().encoder[ui];
            // distinct codewords are required for a guaranteed round trip
            let distinct = book.words.iter().filter(|w| **w == y).count() == 1;
            if distinct {
                assert_eq!(t ^ k, s);
                let v = u.clone();
                let rec = sys.legit_decode(&y, &v, k).unwrap();
                assert_eq!(rec.len(), 2);
            }
        }
    }
}
