//! Parallel Monte Carlo estimation of cycle failure probabilities.

use super::generic::{run_generic_cycle, InfoTopology};
use super::{run_occupycow2_cycle, run_xorcow_cycle, sample_realization};
use crate::error::{Error, Result};
use crate::params::{PhaseSplit, Schedule, Scheme, SystemParams};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A Monte Carlo failure-rate estimate with its binomial error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    /// Half-width of the normal-approximation 95% confidence interval,
    /// `1.96 * sqrt(p_hat (1 - p_hat) / trials)`.
    pub ci95_half_width: f64,
}

impl McEstimate {
    fn from_counts(trials: u64, failures: u64) -> Self {
        let p_hat = failures as f64 / trials as f64;
        let ci95_half_width = 1.96 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        McEstimate { trials, failures, p_hat, ci95_half_width }
    }

    /// One binomial standard error at `p_hat` (0 when degenerate).
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }
}

/// Estimates the cycle failure probability of `scheme` over `trials`
/// independent fading realizations.
///
/// Trial `t` always draws its realization from ChaCha stream `t` of the
/// given seed, so estimates are bit-for-bit reproducible across thread
/// counts and batch layouts. The two-hop baseline spends the whole cycle
/// (`t_m = cycle_t / 4`); the generic scheme runs the star topology through
/// the generic engine (a semantic cross-check more than a new protocol).
/// The frequency-hopping baseline has no per-link realization model and is
/// rejected here.
pub fn estimate_failure(
    params: &SystemParams,
    split: PhaseSplit,
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::domain("trials must be >= 1"));
    }
    let star_topology = match scheme {
        Scheme::Generic => Some(InfoTopology::star(params.n)),
        Scheme::Freqhop => {
            return Err(Error::UnsupportedScheme {
                scheme: "freqhop",
                operation: "estimate_failure",
            })
        }
        _ => None,
    };

    // Seed once; each trial re-targets its own stream of the same cipher.
    let base = ChaCha8Rng::seed_from_u64(seed);
    let run_trial = |t: u64| -> Result<bool> {
        let mut rng = base.clone();
        rng.set_stream(t);
        let real = sample_realization(params.n, &mut rng);
        let failed = match scheme {
            Scheme::XorcowFixed => {
                run_xorcow_cycle(&real, params, split, Schedule::Fixed).failed
            }
            Scheme::XorcowFlexible => {
                run_xorcow_cycle(&real, params, split, Schedule::Flexible).failed
            }
            Scheme::Occupycow2 => {
                run_occupycow2_cycle(&real, params, params.cycle_t / 4.0)?.failed
            }
            Scheme::Generic => {
                let topo = star_topology.as_ref().expect("built above");
                run_generic_cycle(&real, topo, params, split)?.failed
            }
            Scheme::Freqhop => unreachable!("rejected above"),
        };
        Ok(failed)
    };

    const BATCH: u64 = 4096;
    let batches = trials.div_ceil(BATCH);
    let failures = (0..batches)
        .into_par_iter()
        .map(|b| -> Result<u64> {
            let lo = b * BATCH;
            let hi = (lo + BATCH).min(trials);
            let mut count = 0u64;
            for t in lo..hi {
                if run_trial(t)? {
                    count += 1;
                }
            }
            Ok(count)
        })
        .try_reduce(|| 0u64, |x, y| Ok(x + y))?;

    Ok(McEstimate::from_counts(trials, failures))
}
