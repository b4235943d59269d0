//! Reliability analysis of XOR-CoW, a cooperative network-coded protocol
//! for low-latency control traffic over Rayleigh-faded wireless links.
//!
//! A controller exchanges short downlink/uplink payloads with `n` clients
//! every cycle; after the two direct phases, idle clients that overheard
//! their peers relay XOR-coded repair packets so one retransmission can heal
//! a downlink and an uplink miss at once. The crate computes the probability
//! that a cycle fails to deliver every message, three independent ways:
//!
//! * [`analytic`] — closed-form evaluation of the failure probability for
//!   star networks (both the fixed and the flexible XOR-phase schedule),
//!   plus the plain two-hop relaying baseline;
//! * [`sim`] — a deterministic per-cycle protocol engine driven either by
//!   Monte Carlo sampling or by exhaustive small-network enumeration (the
//!   oracle the closed forms are validated against), including a
//!   generic-topology engine for arbitrary stream patterns;
//! * [`optimize`] — minimum-SNR searches on top of either evaluator: phase
//!   split optimization, the frequency-hopped repetition baseline, and
//!   network-size sweep tables, which [`report`] renders as CSV, JSON or
//!   SVG.
//!
//! [`channel`] holds the shared numerics (delay-limited outage law,
//! log-domain binomials, conditional split probabilities); [`params`] the
//! scenario types. SNR is linear everywhere inside the crate — decibels
//! exist only at the CLI boundary, converted by [`params::db_to_linear`].

pub mod analytic;
pub mod channel;
pub mod error;
pub mod optimize;
pub mod params;
pub mod report;
pub mod sim;

pub use analytic::{occupycow2_failure_prob, xorcow_failure_prob};
pub use error::{Error, Result};
pub use optimize::{
    freqhop_failure_prob, min_snr, optimize_freqhop_k, optimize_phase_split,
    sweep_network_size, MinSnrResult, SweepRow, SweepStatus,
};
pub use params::{PhaseSplit, Schedule, Scheme, SystemParams};
pub use report::{write_results, write_results_file, ReportFormat};
pub use sim::{estimate_failure, McEstimate};
