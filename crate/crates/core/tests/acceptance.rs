//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secrecy_core::gamma::{capacity, gamma, CodedChannelModel};
use secrecy_core::prob::{binary_entropy, entropy, mutual_information, Joint2};
use secrecy_core::rd::{rate_distortion, side_only_distortion, wyner_ziv_rate, wz_oracle_many};
use secrecy_core::region::{
    decompose, delta_star, equality_condition_check, gaussian_capacity, gaussian_conditional_variance,
    gaussian_secrecy_distortion, key_split_equivocation, region_point, saturation_key_rates, zero_key_equivocations,
    SecrecyModel,
};
use secrecy_core::sim::{SimConfig, SimSystem};
use secrecy_core::{Channel, Distribution, DistortionMeasure};

use common::{brute_equivocation, random_channel, random_law};

#[derive(Default)]
struct Gate {
    failed: usize,
    total: usize,
}

impl Gate {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        self.total += 1;
        if !pass {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn hamming2() -> DistortionMeasure {
    DistortionMeasure::hamming(2)
}

/// Binary model whose wiretap channel is slightly noisier than the main one,
/// so that the unsaturated regime is reachable at moderate bandwidth ratios.
fn random_binary_model(rng: &mut ChaCha8Rng) -> SecrecyModel {
    let pu = random_law(rng, 2);
    let v = random_channel(rng, 2, 2);
    let w = random_channel(rng, 2, 2);
    let py = rng.gen_range(0.0..0.2);
    let y = Channel::bsc(py).unwrap();
    let z = Channel::bsc(py + rng.gen_range(0.005..0.1)).unwrap();
    SecrecyModel::new(pu, v, w, CodedChannelModel::costless(y, z).unwrap(), hamming2()).unwrap()
}

/// Γ closed forms on a noiseless main channel.
fn criterion_1(gate: &mut Gate) {
    let rates: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for (label, make, closed) in [
        ("1a BSC wiretap", Channel::bsc as fn(f64) -> secrecy_core::Result<Channel>, binary_entropy as fn(f64) -> f64),
        ("1b erasure wiretap", Channel::erasure, |p| p),
    ] {
        let mut worst = 0.0f64;
        let mut slowest = Duration::ZERO;
        for p0 in [0.05, 0.1, 0.2, 0.3] {
            let m = CodedChannelModel::costless(Channel::identity(2), make(p0).unwrap()).unwrap();
            for &r in &rates {
                let t = Instant::now();
                let g = gamma(&m, r, 0.0).unwrap().value;
                slowest = slowest.max(t.elapsed());
                worst = worst.max((g - closed(p0)).abs());
            }
        }
        gate.check(
            label,
            worst <= 1e-3 && slowest < Duration::from_secs(5),
            format!("max |Γ - closed form| = {worst:.3e} (tol 1e-3) over 44 points, slowest point {slowest:?} (limit 5 s)"),
        );
    }
}

/// Rate-distortion certification.
fn criterion_2(gate: &mut Gate) {
    let bss = Distribution::uniform(2);
    let worst = (0..20)
        .map(|k| {
            let d = 0.5 * k as f64 / 20.0;
            (rate_distortion(&bss, &hamming2(), d).unwrap() - (1.0 - binary_entropy(d))).abs()
        })
        .fold(0.0, f64::max);
    gate.check("2a R_U(D) = 1 - h(D)", worst <= 1e-3, format!("max error {worst:.3e} at 20 points (tol 1e-3)"));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_rd, mut worst_wz) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let pu = random_law(&mut rng, 2);
        let v = random_channel(&mut rng, 2, 2);
        let i_uv = mutual_information(&Joint2::from_channel(&pu, &v).unwrap());
        worst_rd = worst_rd.max((rate_distortion(&pu, &hamming2(), 0.0).unwrap() - entropy(&pu)).abs());
        worst_wz = worst_wz.max((wyner_ziv_rate(&pu, &v, &hamming2(), 0.0).unwrap().rate - (entropy(&pu) - i_uv)).abs());
    }
    gate.check(
        "2b zero-distortion rates",
        worst_rd <= 1e-4 && worst_wz <= 1e-4,
        format!("max |R_U(0) - H(U)| = {worst_rd:.3e}, max |R_U|V(0) - H(U|V)| = {worst_wz:.3e} on 50 models (tol 1e-4)"),
    );
}

/// Wyner–Ziv solver against the exhaustive grid.
fn criterion_3(gate: &mut Gate) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fractions = [0.1, 0.3, 0.5, 0.7, 0.9];
    let (mut worst, mut over, mut points) = (0.0f64, 0usize, 0usize);
    let mut signed = (f64::INFINITY, f64::NEG_INFINITY);
    let mut gap_ok = true;
    let mut worst_gap = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..20 {
        let pu = random_law(&mut rng, 2);
        let v = random_channel(&mut rng, 2, 2);
        let d = hamming2();
        let floor = side_only_distortion(&pu, &v, &d).unwrap();
        let targets: Vec<f64> = fractions.iter().map(|f| f * floor).collect();
        let oracle = wz_oracle_many(&pu, &v, &d, &targets, 0.02).unwrap();
        let i_uv = mutual_information(&Joint2::from_channel(&pu, &v).unwrap());
        for (&t, o) in targets.iter().zip(oracle) {
            let wz = wyner_ziv_rate(&pu, &v, &d, t).unwrap().rate;
            let diff = wz - o.unwrap();
            signed = (signed.0.min(diff), signed.1.max(diff));
            let err = diff.abs();
            points += 1;
            worst = worst.max(err);
            over += usize::from(err > 5e-3);
            let gap = rate_distortion(&pu, &d, t).unwrap() - wz;
            worst_gap = (worst_gap.0.min(gap), worst_gap.1.max(gap - i_uv));
            gap_ok &= gap >= -1e-6 && gap <= i_uv + 1e-6;
        }
    }
    let elapsed = start.elapsed();
    gate.check(
        "3a solver vs grid oracle (step 0.02)",
        over == 0,
        format!(
            "{over}/{points} points above 5e-3, worst {worst:.3e}; solver - oracle ranges over [{:.3e}, {:.3e}]",
            signed.0, signed.1
        ),
    );
    gate.check(
        "3b 0 <= R_U - R_U|V <= I(U;V)",
        gap_ok,
        format!("min gap {:.3e}, max gap - I(U;V) {:.3e} (slack 1e-6)", worst_gap.0, worst_gap.1),
    );
    gate.check("3c runtime", elapsed < Duration::from_secs(120), format!("{elapsed:?} (limit 120 s)"));
}

/// Assembly of the equivocation formula.
fn criterion_4(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut instances, mut attempts, mut worst_sum, mut bounds_ok) = (0usize, 0usize, 0.0f64, true);
    while instances < 100 && attempts < 2000 {
        attempts += 1;
        let m = random_binary_model(&mut rng);
        let lambda = rng.gen_range(1.0..3.0);
        let floor = side_only_distortion(m.pu(), m.ch_v(), m.d()).unwrap();
        let dist = rng.gen_range(0.0..1.0) * floor;
        let Ok(p) = region_point(&m, lambda, 0.0, dist, 0.0) else { continue };
        let ceiling = m.entropies().h_u_given_w;
        let saturated = delta_star(&m, lambda, 2.0, dist, 0.0).unwrap();
        for v in [p.delta_star, saturated] {
            bounds_ok &= v >= -1e-12 && v <= ceiling + 1e-12;
        }
        if p.bracket <= 1e-6 {
            continue;
        }
        let r = rng.gen_range(0.0..1.0) * p.bracket;
        let dec = decompose(&m, lambda, r, dist, 0.0).unwrap();
        worst_sum = worst_sum.max((dec.sum - delta_star(&m, lambda, r, dist, 0.0).unwrap()).abs());
        instances += 1;
    }
    gate.check(
        "4a decomposition sum",
        instances == 100 && worst_sum <= 1e-9,
        format!("max |sum - Δ*| = {worst_sum:.3e} on {instances} instances (tol 1e-9)"),
    );
    gate.check("4b 0 <= Δ* <= H(U|W)", bounds_ok, format!("R = 0 and R = 2 on {attempts} sampled models"));

    let mut worst_kink = 0.0f64;
    let mut shape_ok = true;
    let mut shown = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..100_000 {
        if shown == 5 {
            break;
        }
        let m = random_binary_model(&mut rng);
        let Ok(sat) = saturation_key_rates(&m, 2.0, 0.0, 0.0) else { continue };
        if sat.sys < 0.05 {
            continue;
        }
        shown += 1;
        let step = 0.05;
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * step).collect();
        let values: Vec<f64> = grid.iter().map(|&r| delta_star(&m, 2.0, r, 0.0, 0.0).unwrap()).collect();
        for i in 0..grid.len() - 1 {
            let slope = (values[i + 1] - values[i]) / step;
            if grid[i + 1] <= sat.sys {
                shape_ok &= (slope - 1.0).abs() <= 1e-6;
            } else if grid[i] >= sat.sys {
                shape_ok &= slope.abs() <= 1e-6;
            }
        }
        let kink = values[values.len() - 1] - values[0];
        worst_kink = worst_kink.max((kink - sat.sys).abs());
    }
    gate.check(
        "4c slope-1-then-flat",
        shown == 5 && shape_ok && worst_kink <= 1e-3,
        format!("kink located within {worst_kink:.3e} of the saturation key rate on {shown} models (tol 1e-3)"),
    );
}

/// Systematic versus general codes in the equality configuration.
fn criterion_5(gate: &mut Gate) {
    for (label, make) in [
        ("BSC", Channel::bsc as fn(f64) -> secrecy_core::Result<Channel>),
        ("erasure", Channel::erasure),
    ] {
        let mut worst = 0.0f64;
        let mut sat_ok = true;
        let mut eq8_ok = true;
        let mut sample = String::new();
        for p0 in [0.05, 0.1, 0.2, 0.3] {
            let coded = CodedChannelModel::costless(Channel::identity(2), make(p0).unwrap()).unwrap();
            let m = SecrecyModel::systematic(Distribution::uniform(2), coded, hamming2()).unwrap();
            for lambda in [0.5, 1.0, 2.0] {
                let z = zero_key_equivocations(&m, lambda, 0.0, 0.0).unwrap();
                if (z.sys - z.gen).abs() > worst {
                    worst = (z.sys - z.gen).abs();
                    sample = format!("p0 = {p0}, λ = {lambda}: sys {:.6}, gen {:.6}", z.sys, z.gen);
                }
                let s = saturation_key_rates(&m, lambda, 0.0, 0.0).unwrap();
                sat_ok &= s.sys <= s.gen + 1e-9;
                eq8_ok &= equality_condition_check(&m, lambda, 0.0, 0.0).unwrap().holds;
            }
        }
        gate.check(
            &format!("5a zero-key sys = gen ({label} wiretap)"),
            worst <= 1e-3,
            format!("max |sys - gen| = {worst:.3e} (tol 1e-3); worst {sample}"),
        );
        gate.check(&format!("5b saturation sys <= gen ({label} wiretap)"), sat_ok, "12 (p0, λ) pairs".into());
        gate.check(
            &format!("5c equality condition lhs = rhs ({label} wiretap)"),
            eq8_ok,
            "12 (p0, λ) pairs within 1e-3".into(),
        );
    }
}

/// Gaussian secrecy distortions.
fn criterion_6(gate: &mut Gate) {
    let (mut exact, mut verdict, mut invariant) = (true, true, true);
    let mut cases = 0;
    for &(var_u, side_noise, power, main_noise, extra) in
        &[(1.0, 0.5, 2.0, 1.0, 1.0), (4.0, 1.0, 1.0, 1.0, 0.2), (2.0, 8.0, 3.0, 0.5, 5.0), (1.0, 0.01, 10.0, 1.0, 0.1)]
    {
        let var_uv = gaussian_conditional_variance(var_u, side_noise).unwrap();
        let c_y = gaussian_capacity(power, main_noise).unwrap();
        let c_z = gaussian_capacity(power, main_noise + extra).unwrap();
        let expected_verdict = c_y - c_z <= 0.5 * (var_u / var_uv).log2();
        let mut seen = Vec::new();
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            cases += 1;
            let g = gaussian_secrecy_distortion(var_u, var_uv, lambda, c_y, c_z).unwrap();
            let sys = var_uv * 2f64.powf(-2.0 * lambda * (c_y - c_z));
            let gen = var_u * 2f64.powf(-2.0 * (1.0 + lambda) * (c_y - c_z));
            exact &= (g.sys - sys).abs() <= 1e-15 * sys.max(1.0) && (g.gen - gen).abs() <= 1e-15 * gen.max(1.0);
            verdict &= g.sys_better == expected_verdict && g.sys_better == (g.sys <= g.gen);
            seen.push(g.sys_better);
        }
        invariant &= seen.iter().all(|&b| b == seen[0]);
    }
    gate.check("6a closed forms", exact, format!("{cases} (model, λ) cases"));
    gate.check("6b verdict matches the capacity-gap inequality", verdict, format!("{cases} cases"));
    gate.check("6c verdict invariant in λ ∈ {0.5, 1, 2, 4}", invariant, "4 models".into());
}

/// Splitting the key between uncoded and coded parts.
fn criterion_7(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut models, mut wins) = (0, 0);
    for _ in 0..100_000 {
        if models == 20 {
            break;
        }
        let m = random_binary_model(&mut rng);
        if m.entropies().i_uw >= 1.0 {
            continue;
        }
        let dist = 0.2 * side_only_distortion(m.pu(), m.ch_v(), m.d()).unwrap();
        let key = rng.gen_range(0.1..1.0);
        let grid: Vec<f64> = (0..=10).map(|i| key * i as f64 / 10.0).collect();
        let Ok(values) = grid.iter().map(|&s| key_split_equivocation(&m, 2.0, dist, 0.0, key, s)).collect::<Result<Vec<_>, _>>() else {
            continue;
        };
        models += 1;
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        wins += usize::from(values[0] == best && values[1..].iter().all(|&v| v < best));
    }
    gate.check("7 best split is R' = 0", models == 20 && wins == models, format!("{wins}/{models} models"));
}

/// Exact simulator checks.
fn criterion_8(gate: &mut Gate) {
    let start = Instant::now();
    let channel_sets = [(0.1, 0.2, 0.05, 0.2), (0.25, 0.1, 0.1, 0.15), (0.05, 0.3, 0.02, 0.3)];
    let (mut configs, mut converse, mut theorems, mut monotone) = (0, true, true, true);
    let mut worst_converse = f64::NEG_INFINITY;
    let mut worst_brute = 0.0f64;
    let mut drops = Vec::new();
    for (ci, &(pv, pw, py, pz)) in channel_sets.iter().enumerate() {
        let coded = CodedChannelModel::costless(Channel::bsc(py).unwrap(), Channel::bsc(pz).unwrap()).unwrap();
        let m = SecrecyModel::new(
            Distribution::uniform(2),
            Channel::bsc(pv).unwrap(),
            Channel::bsc(pw).unwrap(),
            coded,
            hamming2(),
        )
        .unwrap();
        for big_n in [2, 3] {
            for n in [2, 3] {
                let mut last = f64::NEG_INFINITY;
                for kb in 0..=2u32 {
                    let cfg = SimConfig {
                        source_block: big_n,
                        channel_block: n,
                        messages: 4,
                        subcode_size: 2,
                        key_bits: kb,
                        seed: 1000 + ci as u64,
                        px_star: None,
                        target_distortion: 1.0,
                    };
                    let sys = SimSystem::from_config(m.clone(), &cfg).unwrap();
                    let r = sys.measure().unwrap();
                    configs += 1;
                    worst_converse = worst_converse.max(r.equivocation_per_symbol - r.equivocation_ceiling);
                    converse &= r.converse_holds;
                    theorems &= r.fano_holds && r.pad_perfect.unwrap_or(true) && (kb < 2 || r.pad_perfect == Some(true));
                    if r.equivocation_per_symbol < last - 1e-12 {
                        monotone = false;
                        drops.push(format!("set {ci} N={big_n} n={n} kb={kb}: {last:.6} -> {:.6}", r.equivocation_per_symbol));
                    }
                    last = r.equivocation_per_symbol;
                    if big_n == 2 && n == 2 {
                        let slow = brute_equivocation(&sys, 2, 2);
                        worst_brute = worst_brute.max((sys.exact_equivocation().unwrap() - slow).abs());
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    gate.check(
        "8a converse H(U^N|W^N,Z^n)/N <= H(U|W)",
        converse && configs >= 27,
        format!("{configs} configurations, max excess {worst_converse:.3e} (slack 1e-9)"),
    );
    gate.check("8b Fano and pad perfection", theorems, format!("{configs} configurations"));
    gate.check(
        "8c equivocation non-decreasing in key_bits",
        monotone,
        if drops.is_empty() { "12 sweeps over key_bits ∈ {0, 1, 2}".into() } else { drops.join("; ") },
    );
    gate.check("8d exact vs brute-force enumerator", worst_brute <= 1e-12, format!("max difference {worst_brute:.3e} on N = n = 2 (tol 1e-12)"));
    gate.check("8e runtime", elapsed < Duration::from_secs(300), format!("{elapsed:?} (limit 300 s)"));
}

/// Γ shape on random cascades.
fn criterion_9(gate: &mut Gate) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut mono_r, mut mono_q, mut worst_concave) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let nx = rng.gen_range(2..=3);
        let ny = rng.gen_range(2..=3);
        let y = random_channel(&mut rng, nx, ny);
        let z = random_channel(&mut rng, y.output_size(), 2);
        let phi: Vec<f64> = (0..nx).map(|_| rng.gen_range(0.0..2.0)).collect();
        let m = CodedChannelModel::new(y.clone(), z, phi.clone()).unwrap();
        let qmin = m.min_cost();
        let qmax = phi.iter().cloned().fold(0.0, f64::max);
        let qs: Vec<f64> = (0..4).map(|i| qmin + (qmax - qmin) * i as f64 / 3.0).collect();
        let g = |r: f64, q: f64| gamma(&m, r, q).unwrap().value;
        for w in qs.windows(2) {
            let c_lo = capacity(&y, &phi, w[0]).unwrap();
            for f in [0.0, 0.3, 0.6, 0.9] {
                mono_q = mono_q.max(g(f * c_lo, w[0]) - g(f * c_lo, w[1]));
            }
        }
        for &q in &qs {
            let c = capacity(&y, &phi, q).unwrap();
            let vals: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|f| g(f * c, q)).collect();
            for w in vals.windows(2) {
                mono_r = mono_r.max(w[1] - w[0]);
            }
        }
        for _ in 0..3 {
            let (q1, q2) = (rng.gen_range(qmin..=qmax), rng.gen_range(qmin..=qmax));
            let r1 = rng.gen_range(0.0..1.0) * capacity(&y, &phi, q1).unwrap();
            let r2 = rng.gen_range(0.0..1.0) * capacity(&y, &phi, q2).unwrap();
            let mid = g(0.5 * (r1 + r2), 0.5 * (q1 + q2));
            worst_concave = worst_concave.max(0.5 * (g(r1, q1) + g(r2, q2)) - mid);
        }
    }
    gate.check(
        "9a Γ non-increasing in r, non-decreasing in q",
        mono_r <= 1e-6 && mono_q <= 1e-6,
        format!("worst increase in r {mono_r:.3e}, worst decrease in q {mono_q:.3e} (slack 1e-6) on 50 cascades"),
    );
    gate.check(
        "9b midpoint concavity",
        worst_concave <= 1e-4,
        format!("worst violation {worst_concave:.3e} (tol 1e-4) over 150 pairs"),
    );
}

type Criterion = (&'static str, fn(&mut Gate));

fn main() -> ExitCode {
    let mut gate = Gate::default();
    let criteria: [Criterion; 9] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
        ("9", criterion_9),
    ];
    for (id, run) in criteria {
        let t = Instant::now();
        run(&mut gate);
        println!("     criterion {id} took {:?}", t.elapsed());
    }
    println!("acceptance: {} of {} checks passed", gate.total - gate.failed, gate.total);
    if gate.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
