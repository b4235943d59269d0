//! Cycle-level simulation: sampled fading realizations, exact per-cycle
//! protocol execution, Monte Carlo estimation, and an exhaustive small-`n`
//! enumeration oracle.
//!
//! Everything here runs the *same* cycle engine against different link
//! predicates: Monte Carlo drives it with sampled exponential gains, the
//! oracle with quantized link classes. That makes the simulator the single
//! semantic ground truth the closed-form analysis is tested against.

mod cycle;
mod generic;
mod mc;
mod occupy;
mod oracle;

pub use cycle::run_xorcow_cycle;
pub use generic::{build_xor_schedule, run_generic_cycle, InfoTopology, Stream, XorSchedule, XorSlot};
pub use mc::{estimate_failure, McEstimate};
pub use occupy::{occupycow2_help_sets, run_occupycow2_cycle, HelpSets};
pub use oracle::brute_force_failure_prob;

use crate::channel::outage_threshold;

use rand::Rng;

// ---------------------------------------------------------------------------
// Fading realizations
// ---------------------------------------------------------------------------

/// One cycle's frozen fading state: a symmetric matrix of exponential power
/// gains over `nodes` radios (node 0 is the controller in star runs).
///
/// Links are reciprocal and block-faded: the same gain decides every
/// transmission between a pair within the cycle, whatever the rate.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRealization {
    nodes: usize,
    gains: Vec<f64>,
}

impl LinkRealization {
    /// All-zero gains (every link dead); useful as a test scaffold together
    /// with [`LinkRealization::set_gain`].
    pub fn zeros(nodes: usize) -> Self {
        LinkRealization { nodes, gains: vec![0.0; nodes * nodes] }
    }

    /// Draws all `nodes * (nodes - 1) / 2` pair gains i.i.d. unit-mean
    /// exponential, in a fixed (row-major upper-triangle) order so that a
    /// given RNG stream always yields the same realization.
    pub fn sample(nodes: usize, rng: &mut impl Rng) -> Self {
        let mut real = LinkRealization::zeros(nodes);
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                // Inverse-CDF: -ln(1 - U) with U in [0, 1) is Exp(1).
                let u: f64 = rng.random();
                real.set_gain(i, j, -f64::ln_1p(-u));
            }
        }
        real
    }

    /// Total radio count, controller included.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.gains[i * self.nodes + j]
    }

    /// Sets the reciprocal gain between `i` and `j`.
    pub fn set_gain(&mut self, i: usize, j: usize, gain: f64) {
        assert!(i != j && i < self.nodes && j < self.nodes, "bad link ({i}, {j})");
        self.gains[i * self.nodes + j] = gain;
        self.gains[j * self.nodes + i] = gain;
    }

    /// Whether the `i -> j` link carries `rate` bits/s: capacity
    /// `W log2(1 + g snr)` reaches `rate`, i.e. the gain clears the same
    /// fade threshold that defines [`crate::channel::link_failure_prob`].
    /// A non-positive rate always succeeds.
    pub fn supports(&self, i: usize, j: usize, rate: f64, bandwidth: f64, snr: f64) -> bool {
        rate <= 0.0 || self.gain(i, j) >= outage_threshold(rate, bandwidth, snr)
    }
}

/// Star-network realization for `n` clients plus the controller.
pub fn sample_realization(n: usize, rng: &mut impl Rng) -> LinkRealization {
    LinkRealization::sample(n + 1, rng)
}

// ---------------------------------------------------------------------------
// Cycle outcomes
// ---------------------------------------------------------------------------

/// Per-node delivery flags for one executed cycle, indexed by node id.
///
/// For the star protocols entry 0 (the controller) is vacuously `true`; for
/// generic topologies `dl_ok[v]` means node `v` received every stream it
/// subscribes to and `ul_ok[v]` means every stream sourced at `v` reached
/// all of its subscribers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleOutcome {
    pub dl_ok: Vec<bool>,
    pub ul_ok: Vec<bool>,
    /// Whether any required delivery was missed cycle-wide.
    pub failed: bool,
}

impl CycleOutcome {
    pub(crate) fn from_flags(dl_ok: Vec<bool>, ul_ok: Vec<bool>) -> Self {
        let failed = dl_ok.iter().chain(ul_ok.iter()).any(|ok| !ok);
        CycleOutcome { dl_ok, ul_ok, failed }
    }
}
