//! Minimum-SNR search and the design-space explorations built on it:
//! phase-split optimization, the frequency-hopped repetition baseline, and
//! the network-size sweep behind the headline comparison tables.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{occupycow2_failure_prob, xorcow_failure_prob};
use crate::channel::{any_fail, link_failure_prob};
use crate::error::{Error, Result};
use crate::params::{db_to_linear, PhaseSplit, Schedule, Scheme, SystemParams};

/// Default SNR search bracket, dB. Wide enough that every scheme of
/// interest crosses a 1e-9 target somewhere inside it for n >= 2.
pub const DEFAULT_SNR_LO_DB: f64 = -10.0;
pub const DEFAULT_SNR_HI_DB: f64 = 60.0;

/// Default bisection resolution on the dB axis.
pub const DEFAULT_RESOLUTION_DB: f64 = 0.01;

/// Default cap for the frequency-hopping sub-channel scan.
pub const DEFAULT_K_MAX: usize = 64;

// ---------------------------------------------------------------------------
// Minimum-SNR bisection
// ---------------------------------------------------------------------------

/// Outcome of a minimum-SNR search.
///
/// `snr_db` is the smallest probed SNR whose failure probability does not
/// exceed the target; by construction the evaluator at `snr_db` returns
/// `achieved_pfail <= target` while `snr_db - resolution_db` still misses it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinSnrResult {
    pub snr_db: f64,
    pub achieved_pfail: f64,
    pub iterations: usize,
}

/// Finds the minimum SNR (in dB) at which `evaluator` drops to `target`.
///
/// `evaluator` maps a *linear* SNR to a failure probability and must be
/// nonincreasing in SNR; the search itself walks the dB axis, halving the
/// bracket until it is narrower than `resolution_db`. The bracket must
/// straddle the target — `evaluator(hi) <= target <= evaluator(lo)` — or the
/// search refuses to guess and reports both endpoint values.
pub fn min_snr(
    target: f64,
    evaluator: impl Fn(f64) -> f64,
    lo_db: f64,
    hi_db: f64,
    resolution_db: f64,
) -> Result<MinSnrResult> {
    validate_target(target)?;
    if !(lo_db.is_finite() && hi_db.is_finite() && lo_db < hi_db) {
        return Err(Error::domain(format!(
            "SNR bracket must satisfy lo < hi, got [{lo_db}, {hi_db}]"
        )));
    }
    if !(resolution_db.is_finite() && resolution_db > 0.0) {
        return Err(Error::domain(format!(
            "resolution must be positive, got {resolution_db}"
        )));
    }

    let p_of = |db: f64| evaluator(db_to_linear(db));
    let p_lo = p_of(lo_db);
    let mut p_hi = p_of(hi_db);
    if !(p_hi <= target && target <= p_lo) {
        return Err(Error::Bracket { lo_db, hi_db, p_lo, p_hi, target });
    }

    let (mut lo, mut hi) = (lo_db, hi_db);
    let mut iterations = 0;
    while hi - lo > resolution_db {
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            break; // bracket already at float resolution
        }
        if p_of(mid) <= target {
            hi = mid;
            p_hi = p_of(mid);
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(MinSnrResult { snr_db: hi, achieved_pfail: p_hi, iterations })
}

fn validate_target(target: f64) -> Result<()> {
    if !(target.is_finite() && target > 0.0 && target < 1.0) {
        return Err(Error::domain(format!(
            "target must lie strictly inside (0, 1), got {target}"
        )));
    }
    Ok(())
}

/// Failure-probability evaluator (over linear SNR) for the XOR protocol
/// with everything but the SNR pinned. Parameters are validated up front so
/// the closure itself cannot fail.
fn xorcow_evaluator(
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
) -> impl Fn(f64) -> f64 {
    let base = *params;
    move |snr| {
        xorcow_failure_prob(&base.with_snr(snr), split, schedule)
            .expect("evaluation with validated parameters cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Frequency-hopped repetition baseline
// ---------------------------------------------------------------------------

/// Derived quantities of the `k`-sub-channel hopping design: every one of
/// the `2n` messages is repeated once per sub-channel, so each repetition
/// must squeeze the whole per-message payload into `1/(2n)` of the cycle on
/// a `W/k` slice of spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqHopParams {
    /// Number of equal sub-channels the band is divided into.
    pub k: usize,
    /// Per-hop transmit rate, bits/s (identical for every hop).
    pub hop_rate: f64,
    /// Bandwidth of one sub-channel, Hz.
    pub sub_bandwidth: f64,
}

impl FreqHopParams {
    pub fn new(params: &SystemParams, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("sub-channel count k must be >= 1"));
        }
        let hop_rate = 2.0 * params.n as f64 * params.m_bits as f64 / params.cycle_t;
        Ok(FreqHopParams { k, hop_rate, sub_bandwidth: params.bandwidth_w / k as f64 })
    }

    /// Cycle failure probability at a given linear SNR: a message is lost
    /// only if all `k` independently faded repetitions fail, and the cycle
    /// fails if any of the `2n` messages is lost.
    fn failure_prob(&self, n: usize, snr: f64) -> f64 {
        let p_hop = link_failure_prob(self.hop_rate, self.sub_bandwidth, snr)
            .expect("hop rate and sub-bandwidth are validated at construction");
        any_fail(2 * n, p_hop.powi(self.k as i32))
            .expect("a power of a probability is a probability")
    }
}

/// Cycle failure probability of the `k`-hop repetition baseline at
/// `params.snr`.
pub fn freqhop_failure_prob(params: &SystemParams, k: usize) -> Result<f64> {
    Ok(FreqHopParams::new(params, k)?.failure_prob(params.n, params.snr))
}

/// Scans `k = 1..=k_max` and returns the sub-channel count whose minimum
/// SNR for `target` is lowest (smallest `k` wins ties). Counts for which the
/// bracket does not straddle the target are skipped; if none qualifies, the
/// bracket failure of the closest-achieving `k` is reported.
pub fn optimize_freqhop_k(
    params: &SystemParams,
    target: f64,
    k_max: usize,
    lo_db: f64,
    hi_db: f64,
) -> Result<(usize, MinSnrResult)> {
    if k_max == 0 {
        return Err(Error::domain("k_max must be >= 1"));
    }
    let mut best: Option<(usize, MinSnrResult)> = None;
    let mut closest_miss: Option<(f64, f64)> = None; // (p_lo, p_hi), min p_hi
    for k in 1..=k_max {
        let hop = FreqHopParams::new(params, k)?;
        let n = params.n;
        match min_snr(target, |snr| hop.failure_prob(n, snr), lo_db, hi_db, DEFAULT_RESOLUTION_DB)
        {
            Ok(found) => {
                if best.as_ref().is_none_or(|(_, b)| found.snr_db < b.snr_db) {
                    best = Some((k, found));
                }
            }
            Err(Error::Bracket { p_lo, p_hi, .. }) => {
                if closest_miss.is_none_or(|(_, miss)| p_hi < miss) {
                    closest_miss = Some((p_lo, p_hi));
                }
            }
            Err(other) => return Err(other),
        }
    }
    best.ok_or_else(|| {
        let (p_lo, p_hi) = closest_miss.expect("k_max >= 1 guarantees at least one attempt");
        Error::Bracket { lo_db, hi_db, p_lo, p_hi, target }
    })
}

// ---------------------------------------------------------------------------
// Phase-split optimization
// ---------------------------------------------------------------------------

const COARSE_STEP: f64 = 0.05;
const REFINE_FLOOR: f64 = 0.005;

/// Minimizes the minimum-achieving SNR over the phase-split simplex.
///
/// Derivative-free by design — the objective has kinks where the rate
/// ordering (and hence the failure-regime decomposition) changes: a coarse
/// 0.05-step sweep of the simplex seeds a greedy coordinate exchange whose
/// step halves from 0.025 down to 0.005. The equal split is always part of
/// the search, so the result can never be worse than it; splits whose
/// bracket misses the target are simply skipped (if even the equal split
/// misses, that bracket failure is returned).
pub fn optimize_phase_split(
    params: &SystemParams,
    target: f64,
    schedule: Schedule,
    lo_db: f64,
    hi_db: f64,
) -> Result<(PhaseSplit, MinSnrResult)> {
    let solve = |split: PhaseSplit| {
        min_snr(target, xorcow_evaluator(params, split, schedule), lo_db, hi_db, DEFAULT_RESOLUTION_DB)
    };
    let try_fractions = |f: [f64; 3]| -> Option<(PhaseSplit, MinSnrResult)> {
        if f.iter().any(|&x| x < REFINE_FLOOR - 1e-12) {
            return None;
        }
        let split = PhaseSplit::new(f[0], f[1], f[2]).ok()?;
        solve(split).ok().map(|r| (split, r))
    };

    // The equal split must be solvable; otherwise report why.
    let mut best = (PhaseSplit::equal(), solve(PhaseSplit::equal())?);

    // Coarse pass over the lattice {0.05 i : i >= 1} with all three
    // fractions at least one step. Cells are independent; evaluate in
    // parallel but pick the winner in deterministic input order.
    let lattice: Vec<[f64; 3]> = (1..=18)
        .flat_map(|i| {
            (1..=(19 - i)).map(move |j| {
                let (f_d, f_u) = (0.05 * i as f64, 0.05 * j as f64);
                [f_d, f_u, 1.0 - f_d - f_u]
            })
        })
        .collect();
    let coarse: Vec<Option<(PhaseSplit, MinSnrResult)>> =
        lattice.par_iter().map(|&f| try_fractions(f)).collect();
    for (split, found) in coarse.into_iter().flatten() {
        if found.snr_db < best.1.snr_db {
            best = (split, found);
        }
    }

    // Greedy exchange: move `step` of the cycle from one phase to another
    // while anything improves, then halve the step.
    let mut step = COARSE_STEP / 2.0;
    while step >= REFINE_FLOOR {
        loop {
            let cur = [best.0.f_d, best.0.f_u, best.0.f_x];
            let moves: Vec<[f64; 3]> = (0..3)
                .flat_map(|to| (0..3).filter(move |&from| from != to).map(move |from| (to, from)))
                .map(|(to, from)| {
                    let mut f = cur;
                    f[to] += step;
                    f[from] -= step;
                    f
                })
                .collect();
            let evals: Vec<Option<(PhaseSplit, MinSnrResult)>> =
                moves.par_iter().map(|&f| try_fractions(f)).collect();
            let mut improved = false;
            for (split, found) in evals.into_iter().flatten() {
                if found.snr_db < best.1.snr_db {
                    best = (split, found);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        step *= 0.5;
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Network-size sweep
// ---------------------------------------------------------------------------

/// Per-cell outcome marker for sweep tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepStatus {
    /// The minimum SNR was found inside the bracket.
    Ok,
    /// The target is unreachable inside the SNR bracket; `min_snr_db` is
    /// empty for this row.
    BracketFailure,
}

/// One row of a sweep table: the minimum SNR a scheme needs to hit the
/// target at network size `n`, plus scheme-specific detail in `aux`
/// (the phase split used, or the chosen sub-channel count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub n: usize,
    pub m_bits: u64,
    pub min_snr_db: Option<f64>,
    pub aux: String,
    pub status: SweepStatus,
}

/// Tabulates the minimum SNR of each scheme across network sizes, holding
/// the payload per client (and hence aggregate throughput growth with `n`)
/// fixed by the template. XOR rows use the equal split; frequency-hopping
/// rows scan and record their best sub-channel count. Cells are pure and
/// evaluated in parallel, emitted in scheme-major, `n`-minor input order. A
/// cell whose bracket misses the target becomes a `bracket-failure` row
/// rather than an error.
pub fn sweep_network_size(
    n_values: &[usize],
    template: &SystemParams,
    schemes: &[Scheme],
    target: f64,
    lo_db: f64,
    hi_db: f64,
) -> Result<Vec<SweepRow>> {
    validate_target(target)?;
    if n_values.is_empty() || schemes.is_empty() {
        return Err(Error::domain("sweep needs at least one n and one scheme"));
    }
    let cells: Vec<(Scheme, usize)> = schemes
        .iter()
        .flat_map(|&scheme| n_values.iter().map(move |&n| (scheme, n)))
        .collect();
    cells
        .par_iter()
        .map(|&(scheme, n)| sweep_cell(scheme, n, template, target, lo_db, hi_db))
        .collect()
}

fn sweep_cell(
    scheme: Scheme,
    n: usize,
    template: &SystemParams,
    target: f64,
    lo_db: f64,
    hi_db: f64,
) -> Result<SweepRow> {
    let params =
        SystemParams::new(n, template.m_bits, template.cycle_t, template.bandwidth_w, 1.0)?;
    let row = |min_snr_db, aux, status| SweepRow {
        scheme,
        n,
        m_bits: template.m_bits,
        min_snr_db,
        aux,
        status,
    };
    let outcome = |result: Result<MinSnrResult>, aux: String| match result {
        Ok(found) => Ok(row(Some(found.snr_db), aux, SweepStatus::Ok)),
        Err(Error::Bracket { .. }) => Ok(row(None, aux, SweepStatus::BracketFailure)),
        Err(other) => Err(other),
    };

    match scheme {
        Scheme::XorcowFixed | Scheme::XorcowFlexible => {
            let schedule = match scheme {
                Scheme::XorcowFixed => Schedule::Fixed,
                _ => Schedule::Flexible,
            };
            let split = PhaseSplit::equal();
            let aux = format!("split={:.3}/{:.3}/{:.3}", split.f_d, split.f_u, split.f_x);
            let result = min_snr(
                target,
                xorcow_evaluator(&params, split, schedule),
                lo_db,
                hi_db,
                DEFAULT_RESOLUTION_DB,
            );
            outcome(result, aux)
        }
        Scheme::Occupycow2 => {
            // Four equal phases squeeze the full payload into a quarter of
            // the cycle each.
            let rate = 4.0 * params.n as f64 * params.m_bits as f64 / params.cycle_t;
            let bandwidth = params.bandwidth_w;
            let evaluator = move |snr: f64| {
                let p = link_failure_prob(rate, bandwidth, snr)
                    .expect("validated parameters cannot fail");
                occupycow2_failure_prob(n, p).expect("p is a probability")
            };
            outcome(
                min_snr(target, evaluator, lo_db, hi_db, DEFAULT_RESOLUTION_DB),
                String::new(),
            )
        }
        Scheme::Freqhop => match optimize_freqhop_k(&params, target, DEFAULT_K_MAX, lo_db, hi_db) {
            Ok((k, found)) => Ok(row(Some(found.snr_db), format!("k={k}"), SweepStatus::Ok)),
            Err(Error::Bracket { .. }) => {
                Ok(row(None, String::new(), SweepStatus::BracketFailure))
            }
            Err(other) => Err(other),
        },
        Scheme::Generic => Err(Error::UnsupportedScheme {
            scheme: scheme.name(),
            operation: "the network-size sweep (no closed form)",
        }),
    }
}
