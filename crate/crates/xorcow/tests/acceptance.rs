//! Acceptance gate: one test per release criterion.
//!
//! Each test prints a single `ACCEPTANCE <k> PASS/FAIL: ...` line (shown
//! with `--nocapture`; always visible in the panic message on failure) and
//! then asserts. These pin the headline numbers and structural properties
//! the library exists to deliver — a failure here is a release blocker,
//! not a flake: every check below is fully deterministic.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xorcow::channel::{binom_pmf, link_failure_prob};
use xorcow::params::db_to_linear;
use xorcow::sim::{
    brute_force_failure_prob, occupycow2_help_sets, run_occupycow2_cycle, run_xorcow_cycle,
    sample_realization,
};
use xorcow::{
    estimate_failure, min_snr, occupycow2_failure_prob, optimize_freqhop_k,
    optimize_phase_split, sweep_network_size, write_results, xorcow_failure_prob, PhaseSplit,
    ReportFormat, Schedule, Scheme, SystemParams,
};

const TARGET: f64 = 1e-9;
const RESOLUTION_DB: f64 = 0.01;

fn verdict(criterion: usize, ok: bool, detail: String) {
    let word = if ok { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion} {word}: {detail}");
    assert!(ok, "ACCEPTANCE {criterion} {word}: {detail}");
}

/// Reference scenario: `n` clients, `m`-bit frames, 2 ms cycle, 20 MHz.
fn scenario(n: usize, m_bits: u64, snr_db: f64) -> SystemParams {
    SystemParams::new(n, m_bits, 2e-3, 20e6, db_to_linear(snr_db)).unwrap()
}

fn xorcow_min_snr(
    params: SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
    lo_db: f64,
    hi_db: f64,
) -> xorcow::Result<f64> {
    let result = min_snr(
        TARGET,
        move |snr| {
            xorcow_failure_prob(&params.with_snr(snr), split, schedule)
                .expect("valid scenario stays valid across SNR")
        },
        lo_db,
        hi_db,
        RESOLUTION_DB,
    )?;
    Ok(result.snr_db)
}

/// Two-hop baseline closed form at the common rate `4 m n / T`.
fn occupy_closed_form(params: &SystemParams) -> f64 {
    let rate = 4.0 * params.m_bits as f64 * params.n as f64 / params.cycle_t;
    let p = link_failure_prob(rate, params.bandwidth_w, params.snr).unwrap();
    occupycow2_failure_prob(params.n, p).unwrap()
}

// ---------------------------------------------------------------------------

/// 1. The reference deployment (30 clients, 160-bit frames, 2 ms cycle over
///    20 MHz) reaches a 1e-9 cycle failure probability below 2 dB nominal SNR
///    with the fixed schedule and the equal split.
#[test]
fn criterion_1_headline_minimum_snr() {
    let snr_db =
        xorcow_min_snr(scenario(30, 160, 0.0), PhaseSplit::equal(), Schedule::Fixed, -10.0, 60.0)
            .unwrap();
    verdict(
        1,
        snr_db <= 2.0,
        format!("fixed equal-split 30-client scenario needs {snr_db:.9} dB (required <= 2.0)"),
    );
}

/// 2. The closed form agrees with exhaustive link-subset enumeration to
///    1e-10 across sizes, splits, schedules and SNRs.
#[test]
fn criterion_2_oracle_equivalence() {
    let splits = [
        PhaseSplit::equal(),
        PhaseSplit::new(0.5, 0.25, 0.25).unwrap(),
        PhaseSplit::new(0.25, 0.5, 0.25).unwrap(),
    ];
    let mut worst = 0.0_f64;
    let mut points = 0;
    for n in 1..=3 {
        for schedule in [Schedule::Fixed, Schedule::Flexible] {
            for &split in &splits {
                for snr_db in [-5.0, 0.0, 5.0, 10.0] {
                    let params = scenario(n, 160, snr_db);
                    let exact = brute_force_failure_prob(&params, split, schedule).unwrap();
                    let closed = xorcow_failure_prob(&params, split, schedule).unwrap();
                    worst = worst.max((closed - exact).abs());
                    points += 1;
                }
            }
        }
    }
    verdict(
        2,
        worst <= 1e-10,
        format!("worst |closed form - enumeration| = {worst:.3e} over {points} grid points"),
    );
}

/// 3. Monte Carlo agreement: at three operating points per schedule with
///    analytic failure probability inside [1e-3, 1e-1], a million-trial
///    estimate lands within four binomial standard deviations.
#[test]
fn criterion_3_monte_carlo_cross_validation() {
    const TRIALS: u64 = 1_000_000;
    let mut worst_z = 0.0_f64;
    let mut in_band = true;
    for (scheme, schedule) in [
        (Scheme::XorcowFixed, Schedule::Fixed),
        (Scheme::XorcowFlexible, Schedule::Flexible),
    ] {
        for (idx, snr_db) in [-8.0, -7.0, -6.0].into_iter().enumerate() {
            let params = scenario(10, 160, snr_db);
            let p = xorcow_failure_prob(&params, PhaseSplit::equal(), schedule).unwrap();
            in_band &= (1e-3..=1e-1).contains(&p);
            let est =
                estimate_failure(&params, PhaseSplit::equal(), scheme, TRIALS, 7 + idx as u64)
                    .unwrap();
            let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
            worst_z = worst_z.max((est.p_hat - p).abs() / sigma);
        }
    }
    verdict(
        3,
        worst_z <= 4.0 && in_band,
        format!(
            "six operating points (n = 10, both schedules, 1e6 trials): worst deviation \
             {worst_z:.2} sigma (<= 4 required; analytic p in [1e-3, 1e-1]: {in_band})"
        ),
    );
}

/// 4. Structural theorems, zero counterexamples over seeded realizations:
///    every client the two-hop baseline rescues has a relay covering both
///    directions, and any cycle the baseline survives in four phases of `t_m`
///    is survived by the XOR protocol in three — the 4/3 throughput advantage.
#[test]
fn criterion_4_structural_theorems() {
    const TRIALS_PER_SETTING: u64 = 100_000;
    let mut common_path_gaps = 0u64;
    let mut dominance_breaks = 0u64;
    let mut baseline_successes = 0u64;
    for n in [5usize, 15] {
        for (level, snr_db) in [-6.0, -3.0, 0.0].into_iter().enumerate() {
            let occupy = scenario(n, 160, snr_db);
            let t_m = occupy.cycle_t / 4.0;
            let xor =
                SystemParams::new(n, 160, 3.0 * t_m, occupy.bandwidth_w, occupy.snr).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            rng.set_stream(level as u64);
            for _ in 0..TRIALS_PER_SETTING {
                let real = sample_realization(n, &mut rng);
                if run_occupycow2_cycle(&real, &occupy, t_m).unwrap().failed {
                    continue;
                }
                baseline_successes += 1;
                let sets = occupycow2_help_sets(&real, &occupy, t_m).unwrap();
                for set in &sets[1..] {
                    if !set.direct && !set.dl.iter().any(|j| set.ul.contains(j)) {
                        common_path_gaps += 1;
                    }
                }
                if run_xorcow_cycle(&real, &xor, PhaseSplit::equal(), Schedule::Fixed).failed {
                    dominance_breaks += 1;
                }
            }
        }
    }
    verdict(
        4,
        common_path_gaps == 0 && dominance_breaks == 0,
        format!(
            "{baseline_successes} surviving baseline cycles (n in {{5, 15}}, three SNRs, 1e5 \
             realizations each): {common_path_gaps} common-path gaps, {dominance_breaks} \
             three-phase XOR losses"
        ),
    );
}

/// 5. Optimizing the phase split buys little: the improvement over the
///    equal split is below 1.5 dB at every size and schedule, and the
///    optimizer never does worse than the equal split.
#[test]
fn criterion_5_phase_optimization_is_shallow() {
    let mut max_gain = f64::NEG_INFINITY;
    let mut min_gain = f64::INFINITY;
    let mut ok = true;
    for n in [10usize, 30, 60] {
        for schedule in [Schedule::Fixed, Schedule::Flexible] {
            let params = scenario(n, 160, 0.0);
            let (_, best) =
                optimize_phase_split(&params, TARGET, schedule, -10.0, 60.0).unwrap();
            let equal =
                xorcow_min_snr(params, PhaseSplit::equal(), schedule, -10.0, 60.0).unwrap();
            let gain = equal - best.snr_db;
            max_gain = max_gain.max(gain);
            min_gain = min_gain.min(gain);
            ok &= (0.0..1.5).contains(&gain);
        }
    }
    verdict(
        5,
        ok,
        format!(
            "split-search gain over the equal split spans [{min_gain:.9}, {max_gain:.9}] dB \
             across n in {{10, 30, 60}} and both schedules (required: within [0, 1.5))"
        ),
    );
}

/// 6. Frequency-hopping reconstruction: the best sub-channel count sits
///    near twenty (inside [10, 30]) for small networks and does not grow with
///    network size.
#[test]
fn criterion_6_freqhop_reconstruction() {
    let best_k = |n: usize| {
        optimize_freqhop_k(&scenario(n, 160, 0.0), TARGET, 64, -10.0, 60.0)
            .unwrap()
            .0
    };
    let small: Vec<usize> = (1..=7).map(best_k).collect();
    let k5 = small[4];
    let k30 = best_k(30);
    let in_band = small.iter().all(|k| (10..=30).contains(k));
    verdict(
        6,
        in_band && k30 <= k5,
        format!(
            "best hop count for n = 1..7 is {small:?} (all within [10, 30]); \
             k_opt(30) = {k30} <= k_opt(5) = {k5}"
        ),
    );
}

/// 7. Analytic dominance over the two-hop baseline: at every swept network
///    size the equal-split XOR protocol needs no more SNR than the two-hop
///    closed form evaluated at its four-phase rate.
#[test]
fn criterion_7_dominates_the_two_hop_closed_form() {
    let sizes = [1usize, 2, 3, 5, 7, 10, 15, 20, 30, 45, 60];
    let mut ok = true;
    let mut min_margin = f64::INFINITY;
    let mut argmin = 0usize;
    for n in sizes {
        let params = scenario(n, 160, 0.0);
        let xor =
            xorcow_min_snr(params, PhaseSplit::equal(), Schedule::Fixed, -10.0, 85.0).unwrap();
        let two_hop = min_snr(
            TARGET,
            move |snr| occupy_closed_form(&params.with_snr(snr)),
            -10.0,
            85.0,
            RESOLUTION_DB,
        )
        .unwrap()
        .snr_db;
        let margin = two_hop - xor;
        if margin < min_margin {
            min_margin = margin;
            argmin = n;
        }
        ok &= xor <= two_hop;
    }
    verdict(
        7,
        ok,
        format!(
            "XOR equal-split min-SNR <= two-hop closed-form min-SNR at all {} sizes; \
             smallest margin {min_margin:.9} dB at n = {argmin}",
            sizes.len()
        ),
    );
}

/// 8. Invariant bundle: binomial partition, SNR and cycle-time
///    monotonicity, (m, W) scale invariance, split-dispatch totality, seed
///    determinism, and byte-stable report encodings.
#[test]
fn criterion_8_invariant_bundle() {
    let mut failures: Vec<String> = Vec::new();

    // Binomial terms partition unity for any failure probability.
    for n in [1usize, 5, 30] {
        for p in [0.0, 1e-9, 0.3, 0.9, 1.0] {
            let sum: f64 = (0..=n).map(|a| binom_pmf(n, a, p).unwrap()).sum();
            if (sum - 1.0).abs() > 1e-12 {
                failures.push(format!("partition(n={n}, p={p}) = {sum}"));
            }
        }
    }

    // More SNR never hurts; more cycle time never hurts.
    for schedule in [Schedule::Fixed, Schedule::Flexible] {
        let mut prev = f64::INFINITY;
        for snr_db in (-10..=20).step_by(2) {
            let p = xorcow_failure_prob(
                &scenario(10, 160, snr_db as f64),
                PhaseSplit::equal(),
                schedule,
            )
            .unwrap();
            if p > prev + 1e-15 {
                failures.push(format!("p rose with SNR at {snr_db} dB ({schedule})"));
            }
            prev = p;
        }
        let mut prev = f64::INFINITY;
        for cycle_ms in [1.0, 2.0, 4.0, 8.0] {
            let params =
                SystemParams::new(10, 160, cycle_ms * 1e-3, 20e6, db_to_linear(-5.0)).unwrap();
            let p = xorcow_failure_prob(&params, PhaseSplit::equal(), schedule).unwrap();
            if p > prev + 1e-15 {
                failures.push(format!("p rose with cycle time at {cycle_ms} ms ({schedule})"));
            }
            prev = p;
        }
    }

    // Fixed-schedule failure probability depends on (m, W) only through
    // m/W: doubling both is bit-exact.
    for split in [PhaseSplit::equal(), PhaseSplit::new(0.5, 0.25, 0.25).unwrap()] {
        let base = xorcow_failure_prob(
            &SystemParams::new(10, 160, 2e-3, 20e6, 0.5).unwrap(),
            split,
            Schedule::Fixed,
        )
        .unwrap();
        let doubled = xorcow_failure_prob(
            &SystemParams::new(10, 320, 2e-3, 40e6, 0.5).unwrap(),
            split,
            Schedule::Fixed,
        )
        .unwrap();
        if base.to_bits() != doubled.to_bits() {
            failures.push(format!("scale invariance broke: {base:e} vs {doubled:e}"));
        }
    }

    // Every admissible split lands in exactly one rate-ordering case and
    // yields a probability (spot-checked on a 0.05-step simplex grid).
    for schedule in [Schedule::Fixed, Schedule::Flexible] {
        for i in 1..=18 {
            for j in 1..=(19 - i) {
                let f_d = f64::from(i) * 0.05;
                let f_u = f64::from(j) * 0.05;
                let split = PhaseSplit::new(f_d, f_u, 1.0 - f_d - f_u).unwrap();
                match xorcow_failure_prob(&scenario(6, 160, -2.0), split, schedule) {
                    Ok(p) if (0.0..=1.0).contains(&p) => {}
                    other => failures.push(format!("dispatch({split:?}, {schedule}): {other:?}")),
                }
            }
        }
    }

    // Same seed, same estimate — bit for bit.
    let params = scenario(5, 160, -7.0);
    let a = estimate_failure(&params, PhaseSplit::equal(), Scheme::XorcowFixed, 20_000, 9);
    let b = estimate_failure(&params, PhaseSplit::equal(), Scheme::XorcowFixed, 20_000, 9);
    if a.as_ref().ok() != b.as_ref().ok() || a.is_err() {
        failures.push(format!("seed determinism broke: {a:?} vs {b:?}"));
    }

    // Identical sweeps encode to identical CSV and JSON bytes.
    let template = scenario(4, 160, 0.0);
    let run = || {
        sweep_network_size(&[2, 3], &template, &[Scheme::Occupycow2], TARGET, -10.0, 80.0)
            .unwrap()
    };
    let rows_a = run();
    let rows_b = run();
    if rows_a != rows_b {
        failures.push("sweep rerun produced different rows".into());
    }
    for format in [ReportFormat::Csv, ReportFormat::Json] {
        let mut first = Vec::new();
        let mut second = Vec::new();
        write_results(&rows_a, format, &mut first).unwrap();
        write_results(&rows_b, format, &mut second).unwrap();
        if first != second {
            failures.push(format!("{format} encoding is not byte-stable"));
        }
    }

    verdict(
        8,
        failures.is_empty(),
        if failures.is_empty() {
            "partition, monotonicity, scale invariance, dispatch totality, seed determinism \
             and report byte-stability all hold"
                .into()
        } else {
            failures.join("; ")
        },
    );
}
