//! One test per acceptance criterion. Each prints a PASS or FAIL line.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use cf_secrecy::channel::{
    db_to_linear, gaussian_gains, make_instance, secrecy_power_policy, ChannelInstance, Mode,
    PowerPolicy,
};
use cf_secrecy::codec::{
    build_chain, crypto_lemma_check, eavesdropper_observation, encode, Binning,
};
use cf_secrecy::experiment::{run_snr_sweep, run_theta_sweep, SnrGrid, SweepConfig};
use cf_secrecy::lattice::{brute_force_minima, shortest_independent_vectors, SearchOptions};
use cf_secrecy::lemma1::{
    entropy_per_dim, entropy_per_dim_mc, ratio_bound, tail_probability, QuantizerExperiment,
};
use cf_secrecy::matrix::build_f;
use cf_secrecy::rates::{admissible_orders, rate_comb, slope_over_top_half, sum_comb_lower_bound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(
    id: u32,
    name: &str,
    pass: bool,
    detail: &str,
    elapsed: Duration,
    limit: Duration,
) -> bool {
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    println!(
        "{} criterion {id} ({name}): {detail}; {:.2}s of {}s",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

#[test]
fn criterion_1_point_to_point_anchor() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for p in [1.0, 15.0, 1e3] {
        let inst = make_instance(&[1.0], &[1.0], p, Mode::Plain).unwrap();
        let em = build_f(&inst, &PowerPolicy::uniform(1)).unwrap();
        let r = rate_comb(&em, &[1], p).unwrap();
        worst = worst.max((r - 0.5 * (1.0 + p).log2()).abs());
    }
    let ok = report(
        1,
        "point-to-point rate",
        worst < 1e-9,
        &format!("max abs error {worst:.3e}"),
        t.elapsed(),
        Duration::from_secs(1),
    );
    assert!(ok);
}

#[test]
fn criterion_2_search_matches_enumeration() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = SearchOptions::default();
    let (mut checked, mut mismatches, mut draws) = (0, 0, 0);
    for k in [2usize, 3] {
        let mut accepted = 0;
        while accepted < 100 {
            draws += 1;
            let (h, g) = gaussian_gains(k, rng.random());
            let p = db_to_linear(rng.random_range(0.0..30.0));
            let inst = make_instance(&h, &g, p, Mode::Secrecy).unwrap();
            let em = build_f(&inst, &secrecy_power_policy(&inst).unwrap()).unwrap();
            if common::minima_box(em.gram()) > 8.0 {
                continue;
            }
            accepted += 1;
            let fast = shortest_independent_vectors(&em, &opts).unwrap();
            let slow = brute_force_minima(&em, 8).unwrap();
            checked += 1;
            if fast.norms != slow.norms || fast.degraded {
                mismatches += 1;
            }
        }
    }
    let ok = report(
        2,
        "search vs exhaustive enumeration",
        mismatches == 0 && checked == 200,
        &format!("{checked} instances ({draws} drawn), {mismatches} mismatches"),
        t.elapsed(),
        Duration::from_secs(60),
    );
    assert!(ok);
}

fn gaussian_family(users: usize, count: u64) -> Vec<ChannelInstance> {
    (0..count)
        .map(|s| {
            let (h, g) = gaussian_gains(users, 1000 + s);
            make_instance(&h, &g, 1.0, Mode::Secrecy).unwrap()
        })
        .collect()
}

#[test]
fn criterion_3_secure_dof_slope() {
    let t = Instant::now();
    let grid = SnrGrid::parse("20:100:5").unwrap().points().unwrap();
    let opts = SearchOptions::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for k in [2usize, 3] {
        let family = gaussian_family(k, 100);
        let cf = slope_over_top_half(&family, &grid, &opts, |r| r.r_sum_secure).unwrap();
        let base = slope_over_top_half(&family, &grid, &opts, |r| r.r_baseline).unwrap();
        let target = (k as f64 - 1.0) / k as f64;
        pass &= (cf - target).abs() <= 0.05 && base.abs() <= 0.02;
        detail.push(format!(
            "K={k}: slope {cf:.4} (target {target:.4}), baseline {base:.4}"
        ));
    }
    let ok = report(
        3,
        "secure degrees of freedom",
        pass,
        &detail.join("; "),
        t.elapsed(),
        Duration::from_secs(30),
    );
    assert!(ok);
}

#[test]
fn criterion_4_sum_rate_lower_bound() {
    let t = Instant::now();
    let opts = SearchOptions::default();
    let (mut violations, mut worst) = (0, f64::INFINITY);
    for inst in gaussian_family(3, 100) {
        for db in [20.0, 40.0, 60.0] {
            let inst = inst.with_power(db_to_linear(db)).unwrap();
            let policy = secrecy_power_policy(&inst).unwrap();
            let (lhs, rhs) = sum_comb_lower_bound(&inst, &policy, &opts).unwrap();
            worst = worst.min(lhs - rhs);
            if lhs < rhs - 1e-9 {
                violations += 1;
            }
        }
    }
    let ok = report(
        4,
        "sum of computation rates lower bound",
        violations == 0,
        &format!("{violations} violations in 300 cases, smallest margin {worst:.4} bits"),
        t.elapsed(),
        Duration::from_secs(10),
    );
    assert!(ok);
}

#[test]
fn criterion_5_equal_norm_angle_sweep() {
    let t = Instant::now();
    let rows = run_theta_sweep(25.0, 512).unwrap();
    let baseline_zero = rows.iter().all(|r| r.r_baseline == 0.0);
    let positive = rows.iter().filter(|r| r.r_sum_secure > 0.0).count();
    let frac = positive as f64 / rows.len() as f64;
    let ok = report(
        5,
        "angle sweep with |h| = |g|",
        baseline_zero && frac >= 0.9,
        &format!(
            "baseline identically zero: {baseline_zero}; positive on {positive}/512 ({frac:.4})"
        ),
        t.elapsed(),
        Duration::from_secs(60),
    );
    assert!(ok);
}

#[test]
fn criterion_6_three_user_snr_sweep() {
    let t = Instant::now();
    let cfg = SweepConfig::snr_sweep(3, SnrGrid::parse("0:60:2").unwrap(), 50, 2024);
    let rows = run_snr_sweep(&cfg).unwrap();
    let means: Vec<_> = rows.iter().filter(|r| r.kind == "mean").collect();
    let mut pass = means.len() == 31;
    let mut first_bad = None;
    for m in &means {
        let below = m.r_sum_secure < m.capacity_sum && m.r_baseline < m.capacity_sum;
        let beats = m.snr_db < 30.0 || m.r_sum_secure > m.r_baseline;
        if !(below && beats) {
            pass = false;
            first_bad.get_or_insert(m.snr_db);
        }
    }
    let per_trial = rows
        .iter()
        .filter(|r| r.kind == "trial")
        .all(|r| r.r_sum_secure < r.capacity_sum && r.r_baseline < r.capacity_sum);
    pass &= per_trial;
    let crossover = means
        .iter()
        .find(|m| m.r_sum_secure > m.r_baseline)
        .map(|m| m.snr_db);
    let ok = report(
        6,
        "three-user SNR sweep",
        pass,
        &format!(
            "secure mean first above baseline at {crossover:?} dB, failing point {first_bad:?}, every trial below capacity: {per_trial}"
        ),
        t.elapsed(),
        Duration::from_secs(300),
    );
    assert!(ok);
}

#[test]
fn criterion_7_quantizer_entropy() {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();

    let mut bound_failures = Vec::new();
    for k in [2usize, 3] {
        for n in [1usize, 2, 4, 8, 16] {
            let exp = QuantizerExperiment::new(n, &vec![1.0; k], 1.0, 100_000, 0.1).unwrap();
            let h = entropy_per_dim(&exp, 0).unwrap();
            let b = ratio_bound(&exp, 0).unwrap();
            if h > b {
                bound_failures.push(format!("n={n} K={k}: H={h:.4} > bound {b:.4}"));
            }
        }
    }
    pass &= bound_failures.is_empty();
    detail.push(if bound_failures.is_empty() {
        "entropy below ratio bound everywhere".to_string()
    } else {
        format!("bound violated at {}", bound_failures.join(", "))
    });

    let exp = QuantizerExperiment::new(1, &[1.0, 1.0], 1.0, 100_000, 0.1).unwrap();
    let closed = -(2.0 * 0.125 * 0.125f64.log2() + 0.75 * 0.75f64.log2());
    let exact = entropy_per_dim(&exp, 0).unwrap();
    let mc = entropy_per_dim_mc(&exp, 0, 7).unwrap();
    let exact_ok = (exact - closed).abs() < 1e-6;
    let mc_ok = (mc.miller_madow - closed).abs() <= 3.0 * mc.std_err;
    pass &= exact_ok && mc_ok;
    detail.push(format!(
        "two equal users: exact {exact:.7}, MC {:.5} +/- {:.5} against {closed:.7}",
        mc.miller_madow, mc.std_err
    ));

    for k in [2usize, 3] {
        let tails: Vec<f64> = [4usize, 16, 64, 256]
            .iter()
            .map(|&n| {
                let exp = QuantizerExperiment::new(n, &vec![1.0; k], 1.0, 100_000, 0.1).unwrap();
                tail_probability(&exp, 11).unwrap().probability
            })
            .collect();
        let monotone = tails.windows(2).all(|w| w[1] <= w[0]);
        pass &= monotone && tails[3] < 0.1;
        detail.push(format!("K={k} tail over n=4,16,64,256: {tails:?}"));
    }

    let ok = report(
        7,
        "quantized-sum entropy",
        pass,
        &detail.join("; "),
        t.elapsed(),
        Duration::from_secs(120),
    );
    assert!(ok);
}

#[test]
fn criterion_8_codec_invariants() {
    let t = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();

    let mut worst_residual = 0i64;
    let mut power_ok = true;
    for g in [
        vec![1.0, 1.0],
        vec![1.0, 2.0],
        vec![2.0, -3.0],
        vec![0.5, 1.0, 1.5],
    ] {
        let p = 100.0;
        let h = vec![1.0; g.len()];
        let inst = make_instance(&h, &g, p, Mode::Secrecy).unwrap();
        let chain = build_chain(&inst, 2, 4, 4).unwrap();
        let bins: Vec<Binning> = (0..g.len())
            .map(|u| Binning::new(&chain, u, 1.0, u as u64).unwrap())
            .collect();
        let trials = 1000;
        let mut powers = vec![Vec::with_capacity(trials); g.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..trials {
            let cws: Vec<_> = bins
                .iter()
                .map(|b| encode(&chain, b, rng.random_range(0..b.bins), rng.random()).unwrap())
                .collect();
            let obs = eavesdropper_observation(&chain, &cws, None).unwrap();
            worst_residual = worst_residual.max(obs.grid_residual);
            for (u, cw) in cws.iter().enumerate() {
                powers[u].push(cw.power());
            }
        }
        for v in &powers {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            power_ok &= mean <= p + 3.0 * sd / n.sqrt();
        }
    }
    pass &= worst_residual == 0 && power_ok;
    detail.push(format!(
        "alignment residual {worst_residual}, power within limit: {power_ok}"
    ));

    for alphabet in [2u64, 4, 8] {
        let inst = make_instance(&[1.0, 1.0], &[1.0, 1.0], 10.0, Mode::Secrecy).unwrap();
        let chain = build_chain(&inst, 1, 1, alphabet).unwrap();
        let r = crypto_lemma_check(&chain, 100_000, alphabet).unwrap();
        let ok = r.alphabet == alphabet && r.exact_uniform == Some(true) && r.passes(0.01);
        pass &= ok;
        detail.push(format!(
            "alphabet {alphabet}: exact {:?}, p-values {:.3}/{:.3}",
            r.exact_uniform, r.uniformity_p, r.independence_p
        ));
    }
    let ok = report(
        8,
        "codec invariants",
        pass,
        &detail.join("; "),
        t.elapsed(),
        Duration::from_secs(60),
    );
    assert!(ok);
}

#[test]
fn criterion_9_admissible_orders() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut full_rank, mut mismatches, mut empty) = (0, 0, 0);
    for k in 1..=4usize {
        for _ in 0..250 {
            let rows: Vec<Vec<i64>> = (0..k)
                .map(|_| (0..k).map(|_| rng.random_range(-3..=3)).collect())
                .collect();
            let singular = common::rational_rank(&rows) < k;
            match admissible_orders(&rows) {
                Err(_) if singular => continue,
                Err(_) => mismatches += 1,
                Ok(_) if singular => mismatches += 1,
                Ok(orders) => {
                    full_rank += 1;
                    let got: BTreeSet<Vec<usize>> =
                        orders.iter().map(|p| p.user_order().to_vec()).collect();
                    let want: BTreeSet<Vec<usize>> = common::permutations(k)
                        .into_iter()
                        .filter(|o| common::eliminates_without_swaps(&rows, o))
                        .collect();
                    if got != want {
                        mismatches += 1;
                    }
                    if got.is_empty() {
                        empty += 1;
                    }
                }
            }
        }
    }
    let ok = report(
        9,
        "admissible decoding orders",
        mismatches == 0 && empty == 0,
        &format!("{full_rank} full-rank matrices, {mismatches} mismatches, {empty} empty"),
        t.elapsed(),
        Duration::from_secs(10),
    );
    assert!(ok);
}
