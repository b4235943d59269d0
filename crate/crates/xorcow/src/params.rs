//! Scenario parameters and the per-phase rate law.
//!
//! A cycle serves `n` client nodes through a central controller: every client
//! must receive an `m`-bit downlink message and deliver an `m`-bit uplink
//! message within one cycle of `cycle_t` seconds, split into a downlink
//! phase, an uplink phase and a network-coded retransmission ("XOR") phase.
//! The fractions of the cycle given to each phase fix the three transmit
//! rates, which in turn fix every outage probability downstream.

use crate::error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Converts a decibel quantity to linear scale. This is the *only* place the
/// dB convention lives; everything inside the library works in linear SNR.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Inverse of [`db_to_linear`], for presenting results.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

// ---------------------------------------------------------------------------
// System parameters
// ---------------------------------------------------------------------------

/// Physical scenario shared by every analysis: network size, payload size,
/// cycle budget, bandwidth and the operating (linear) SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of client nodes served per cycle.
    pub n: usize,
    /// Payload bits per stream (each client sends and receives this much).
    pub m_bits: u64,
    /// Full cycle duration in seconds.
    pub cycle_t: f64,
    /// Channel bandwidth in Hz.
    pub bandwidth_w: f64,
    /// Mean link SNR, linear (not dB).
    pub snr: f64,
}

impl SystemParams {
    pub fn new(n: usize, m_bits: u64, cycle_t: f64, bandwidth_w: f64, snr: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be >= 1"));
        }
        if m_bits == 0 {
            return Err(Error::domain("m_bits must be >= 1"));
        }
        if !(cycle_t.is_finite() && cycle_t > 0.0) {
            return Err(Error::domain(format!("cycle_t must be positive, got {cycle_t}")));
        }
        if !(bandwidth_w.is_finite() && bandwidth_w > 0.0) {
            return Err(Error::domain(format!(
                "bandwidth_w must be positive, got {bandwidth_w}"
            )));
        }
        if !(snr.is_finite() && snr >= 0.0) {
            return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
        }
        Ok(SystemParams { n, m_bits, cycle_t, bandwidth_w, snr })
    }

    /// Same scenario at a different operating SNR (used by SNR searches).
    pub fn with_snr(&self, snr: f64) -> Self {
        SystemParams { snr, ..*self }
    }

    /// The headline industrial-control scenario: 30 nodes exchanging
    /// 20-byte messages every 2 ms in 20 MHz. SNR defaults to 0 dB.
    pub fn printer_scenario() -> Self {
        SystemParams {
            n: 30,
            m_bits: 160,
            cycle_t: 2e-3,
            bandwidth_w: 20e6,
            snr: 1.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Phase split
// ---------------------------------------------------------------------------

/// Fractions of the cycle assigned to the downlink, uplink and XOR phases.
/// All three must be strictly positive and sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSplit {
    pub f_d: f64,
    pub f_u: f64,
    pub f_x: f64,
}

impl PhaseSplit {
    pub fn new(f_d: f64, f_u: f64, f_x: f64) -> Result<Self> {
        for (name, f) in [("f_d", f_d), ("f_u", f_u), ("f_x", f_x)] {
            if !(f.is_finite() && f > 0.0 && f < 1.0) {
                return Err(Error::domain(format!(
                    "phase fraction {name} = {f} outside (0, 1)"
                )));
            }
        }
        let sum = f_d + f_u + f_x;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "phase fractions must sum to 1, got {sum}"
            )));
        }
        Ok(PhaseSplit { f_d, f_u, f_x })
    }

    /// The even three-way split, the natural default for equal payloads.
    pub fn equal() -> Self {
        let third = 1.0 / 3.0;
        PhaseSplit { f_d: third, f_u: third, f_x: third }
    }

    /// Phase durations `(T_D, T_U, T_X)` in seconds for a given cycle.
    pub fn durations(&self, cycle_t: f64) -> (f64, f64, f64) {
        (self.f_d * cycle_t, self.f_u * cycle_t, self.f_x * cycle_t)
    }
}

// ---------------------------------------------------------------------------
// Schedules and rates
// ---------------------------------------------------------------------------

/// How transmit rates are chosen within the fixed phase durations.
///
/// * `Fixed`: every phase moves the full `n`-stream payload, so all three
///   rates are pinned at design time (`R = m * n / T_phase`). Simple, but the
///   XOR phase pays for retransmissions that usually aren't needed.
/// * `Flexible`: the uplink phase also carries one node-coordination bit per
///   stream (`R_U = (m + 1) * n / T_U`), buying the controller the right to
///   shrink the XOR payload to the streams still missing after uplink: with
///   `a_tilde` uplink-and-downlink-clean nodes, `R_X = m * (n - a_tilde) /
///   T_X`. Rates adapt per cycle; the phase clock does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    Fixed,
    Flexible,
}

impl std::fmt::Display for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Schedule::Fixed => "fixed",
            Schedule::Flexible => "flexible",
        })
    }
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Schedule::Fixed),
            "flexible" => Ok(Schedule::Flexible),
            other => Err(Error::domain(format!(
                "unknown schedule {other:?} (expected \"fixed\" or \"flexible\")"
            ))),
        }
    }
}

/// Protocol families the estimators, sweeps and CLI can address.
///
/// Not every operation supports every scheme: the frequency-hopping
/// baseline has no per-link realization to simulate, and the generic-engine
/// cross-check has no closed form to sweep. Operations reject what they
/// cannot do rather than silently substituting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// XOR relaying, all three rates pinned at design time.
    XorcowFixed,
    /// XOR relaying with the per-cycle shrinking XOR payload.
    XorcowFlexible,
    /// Plain two-hop relaying over four equal phases.
    Occupycow2,
    /// Frequency-hopped repetition, no cooperation.
    Freqhop,
    /// The star traffic pattern run through the generic-topology engine.
    Generic,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::XorcowFixed,
        Scheme::XorcowFlexible,
        Scheme::Occupycow2,
        Scheme::Freqhop,
        Scheme::Generic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::XorcowFixed => "xorcow-fixed",
            Scheme::XorcowFlexible => "xorcow-flexible",
            Scheme::Occupycow2 => "occupycow2",
            Scheme::Freqhop => "freqhop",
            Scheme::Generic => "generic",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown scheme {s:?} (expected one of: xorcow-fixed, \
                     xorcow-flexible, occupycow2, freqhop, generic)"
                ))
            })
    }
}

/// The three per-phase transmit rates (bits/s) for one cycle, plus the
/// schedule and the `a_tilde` the XOR rate was computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple {
    pub r_d: f64,
    pub r_u: f64,
    pub r_x: f64,
    pub schedule: Schedule,
    /// Number of already-clean nodes the flexible XOR rate assumes; always 0
    /// for the fixed schedule.
    pub a_tilde: usize,
}

/// Computes the per-phase rates for a scenario and split.
///
/// `a_tilde` is the count of nodes whose uplink and downlink both already
/// succeeded; it only matters for the flexible schedule's XOR rate (and is
/// ignored — forced to 0 — for the fixed schedule). `a_tilde = n` means
/// nothing is left to retransmit, so `R_X = 0`.
///
/// # Examples
///
/// ```
/// use xorcow::params::{rates_for, PhaseSplit, Schedule, SystemParams};
///
/// let p = SystemParams::new(30, 160, 2e-3, 20e6, 1.0).unwrap();
/// let r = rates_for(&p, PhaseSplit::equal(), Schedule::Fixed, 0);
/// assert!((r.r_d - 7.2e6).abs() < 1e-6); // 160 * 30 / (2ms / 3)
/// ```
pub fn rates_for(
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
    a_tilde: usize,
) -> RateTriple {
    assert!(
        a_tilde <= params.n,
        "a_tilde = {a_tilde} exceeds n = {}",
        params.n
    );
    let (t_d, t_u, t_x) = split.durations(params.cycle_t);
    let m = params.m_bits as f64;
    let n = params.n as f64;
    match schedule {
        Schedule::Fixed => RateTriple {
            r_d: m * n / t_d,
            r_u: m * n / t_u,
            r_x: m * n / t_x,
            schedule,
            a_tilde: 0,
        },
        Schedule::Flexible => RateTriple {
            r_d: m * n / t_d,
            r_u: (m + 1.0) * n / t_u,
            r_x: m * (n - a_tilde as f64) / t_x,
            schedule,
            a_tilde,
        },
    }
}

// ---------------------------------------------------------------------------
