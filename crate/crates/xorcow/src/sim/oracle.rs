//! Exhaustive small-network oracle: integrates the exact cycle engine over
//! the full joint link distribution.
//!
//! Within one cycle a link's fate only matters through which of the finitely
//! many rates it clears. Sorting the distinct positive rates into thresholds
//! `t_1 < ... < t_K` splits each link's gain into `K + 1` classes with known
//! probabilities, so the failure probability is an exact finite sum over all
//! `(K + 1)^L` class assignments of the `L = (n+1)n/2` links — no sampling,
//! no case analysis, just the simulator run on every possible world. This is
//! the ground truth the closed-form analysis is validated against.

use super::cycle::run_cycle_with;
use crate::channel::{link_survival_prob, CompensatedSum};
use crate::error::{Error, Result};
use crate::params::{rates_for, PhaseSplit, Schedule, SystemParams};

/// Largest network the enumeration accepts. The state space is
/// `(K + 1)^(n(n+1)/2)`; by `n = 4` a flexible-schedule run already walks
/// ~7^10 ≈ 3e8 worlds, and `n = 5` would be out of reach.
const MAX_ORACLE_N: usize = 4;

/// Exact cycle failure probability by enumeration. Supports `n <= 4`.
pub fn brute_force_failure_prob(
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
) -> Result<f64> {
    let n = params.n;
    if n > MAX_ORACLE_N {
        return Err(Error::EnumerationTooLarge { n, max: MAX_ORACLE_N });
    }

    // Every rate the cycle engine can possibly query.
    let mut thresholds: Vec<f64> = match schedule {
        Schedule::Fixed => {
            let r = rates_for(params, split, schedule, 0);
            vec![r.r_d, r.r_u, r.r_x]
        }
        Schedule::Flexible => {
            let base = rates_for(params, split, schedule, 0);
            let mut v = vec![base.r_d, base.r_u];
            v.extend((0..=n).map(|at| rates_for(params, split, schedule, at).r_x));
            v
        }
    };
    thresholds.retain(|r| *r > 0.0);
    thresholds.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
    thresholds.dedup();
    let k = thresholds.len();

    // Class c = number of thresholds the link clears; P(class c) is the
    // survival-probability gap between consecutive thresholds.
    let mut class_prob = Vec::with_capacity(k + 1);
    for c in 0..=k {
        let lo = if c == 0 {
            1.0
        } else {
            link_survival_prob(thresholds[c - 1], params.bandwidth_w, params.snr)?
        };
        let hi = if c == k {
            0.0
        } else {
            link_survival_prob(thresholds[c], params.bandwidth_w, params.snr)?
        };
        class_prob.push(lo - hi);
    }

    // A queried rate maps to the minimum class that clears it; the engine
    // only ever asks about rates in the threshold set (or <= 0).
    let class_needed = |rate: f64| -> usize {
        thresholds
            .iter()
            .position(|t| *t == rate)
            .map(|idx| idx + 1)
            .expect("cycle engine queried a rate outside the threshold set")
    };

    let nodes = n + 1;
    let pairs: Vec<(usize, usize)> = (0..nodes)
        .flat_map(|i| ((i + 1)..nodes).map(move |j| (i, j)))
        .collect();
    let l = pairs.len();

    // Odometer over all class assignments, skipping zero-probability worlds
    // wholesale (degenerate SNRs collapse most classes).
    let mut assign = vec![0usize; l];
    let mut total = CompensatedSum::new();
    let mut link_class = vec![0usize; nodes * nodes];
    loop {
        let mut weight = 1.0;
        for (slot, &(i, j)) in pairs.iter().enumerate() {
            let c = assign[slot];
            weight *= class_prob[c];
            link_class[i * nodes + j] = c;
            link_class[j * nodes + i] = c;
        }
        if weight > 0.0 {
            let outcome = run_cycle_with(params, split, schedule, |u, v, rate| {
                rate <= 0.0 || link_class[u * nodes + v] >= class_needed(rate)
            });
            if outcome.failed {
                total.add(weight);
            }
        }
        // Advance the odometer.
        let mut slot = 0;
        loop {
            if slot == l {
                return Ok(total.value().clamp(0.0, 1.0));
            }
            assign[slot] += 1;
            if assign[slot] <= k {
                break;
            }
            assign[slot] = 0;
            slot += 1;
        }
    }
}
