//! Scalar channel primitives shared by every layer of the crate.
//!
//! The model is a quasi-static Rayleigh fading link: a transmission at rate
//! `R` over bandwidth `W` succeeds iff the instantaneous capacity
//! `W * log2(1 + g * snr)` reaches `R`, where the power gain `g` is unit-mean
//! exponential and frozen for the whole cycle. The outage probability is
//!
//! ```text
//! p(R, W, snr) = 1 - exp(-(2^(R/W) - 1) / snr)
//! ```
//!
//! with `snr` the *linear* mean SNR. Everything downstream (per-case cycle
//! failure sums, Monte Carlo link sampling, exhaustive enumeration) is built
//! on this one formula, so analytic and simulated numbers agree to rounding
//! error rather than to modelling error.

use crate::error::{Error, Result};

use std::cell::RefCell;
use std::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Link outage
// ---------------------------------------------------------------------------

/// Fade threshold for a rate-`R` transmission: the link fails iff the
/// realized power gain falls below `(2^(R/W) - 1) / snr`.
///
/// Shared by [`link_failure_prob`] and the simulator's link predicate so that
/// both sides quantize a realization identically.
pub(crate) fn outage_threshold(rate: f64, bandwidth: f64, snr: f64) -> f64 {
    // `rate / bandwidth` is computed first: scaling rate and bandwidth by the
    // same power of two leaves the quotient (and thus the result) bit-exact.
    f64::exp_m1((rate / bandwidth) * LN_2) / snr
}

/// Probability that a single Rayleigh-faded link fails to carry `rate` bits/s
/// in bandwidth `bandwidth` Hz at linear mean SNR `snr`.
///
/// Edge semantics: a non-positive rate never fails (nothing to send), and a
/// positive rate at zero SNR always fails. Negative bandwidth or SNR and
/// non-finite inputs are domain errors.
///
/// # Examples
///
/// ```
/// use xorcow::channel::link_failure_prob;
///
/// // Spectral efficiency 0.25 bit/s/Hz at 0 dB: 1 - exp(-(2^0.25 - 1)).
/// let p = link_failure_prob(0.25, 1.0, 1.0).unwrap();
/// assert!((p - 0.17238492255645518).abs() < 1e-15);
///
/// assert_eq!(link_failure_prob(0.0, 1.0, 1.0).unwrap(), 0.0);
/// assert_eq!(link_failure_prob(1.0, 1.0, 0.0).unwrap(), 1.0);
/// ```
pub fn link_failure_prob(rate: f64, bandwidth: f64, snr: f64) -> Result<f64> {
    validate_link_args(rate, bandwidth, snr)?;
    if rate <= 0.0 {
        return Ok(0.0);
    }
    if snr == 0.0 {
        return Ok(1.0);
    }
    // 1 - exp(-t) computed as -expm1(-t) to keep accuracy for small outage.
    Ok(-f64::exp_m1(-outage_threshold(rate, bandwidth, snr)))
}

/// Complement of [`link_failure_prob`]: `exp(-(2^(R/W) - 1) / snr)`.
///
/// Kept separate (rather than `1 - p`) so that near-certain-failure regimes
/// retain full relative precision; the exhaustive enumerator builds its link
/// class weights from differences of this function.
pub fn link_survival_prob(rate: f64, bandwidth: f64, snr: f64) -> Result<f64> {
    validate_link_args(rate, bandwidth, snr)?;
    if rate <= 0.0 {
        return Ok(1.0);
    }
    if snr == 0.0 {
        return Ok(0.0);
    }
    Ok(f64::exp(-outage_threshold(rate, bandwidth, snr)))
}

fn validate_link_args(rate: f64, bandwidth: f64, snr: f64) -> Result<()> {
    if !rate.is_finite() || !bandwidth.is_finite() || !snr.is_finite() {
        return Err(Error::domain(format!(
            "link args must be finite: rate = {rate}, bandwidth = {bandwidth}, snr = {snr}"
        )));
    }
    if bandwidth <= 0.0 {
        return Err(Error::domain(format!("bandwidth must be > 0, got {bandwidth}")));
    }
    if snr < 0.0 {
        return Err(Error::domain(format!("snr must be >= 0, got {snr}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Binomial weights
// ---------------------------------------------------------------------------

thread_local! {
    // ln(k!) for k = 0..len, grown on demand. Rebuilt with compensated
    // accumulation so ln-factorials stay accurate to ~1 ulp even at k = 200+.
    static LN_FACT: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

/// `ln C(n, k)` via a cached ln-factorial table.
fn ln_choose(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    LN_FACT.with(|cell| {
        let mut table = cell.borrow_mut();
        if table.len() <= n {
            let mut rebuilt = Vec::with_capacity(n + 1);
            let mut sum = CompensatedSum::new();
            rebuilt.push(0.0);
            for i in 1..=n {
                sum.add((i as f64).ln());
                rebuilt.push(sum.value());
            }
            *table = rebuilt;
        }
        table[n] - table[k] - table[n - k]
    })
}

/// Probability that exactly `m` of `n` independent links *succeed* when each
/// fails with probability `p`:
///
/// ```text
/// B(n, m, p) = C(n, m) * (1 - p)^m * p^(n - m)
/// ```
///
/// Note the convention: `p` is the per-link failure probability and `m`
/// counts successes, matching how the per-cycle failure sums are written.
/// Evaluated in the log domain so deep tails (e.g. `n = 200`) neither
/// underflow prematurely nor lose relative accuracy.
///
/// # Examples
///
/// ```
/// use xorcow::channel::binom_pmf;
///
/// // 3 of 5 links up at failure probability 1/4: 10 * (3/4)^3 * (1/4)^2.
/// let b = binom_pmf(5, 3, 0.25).unwrap();
/// assert!((b - 0.263671875).abs() < 1e-15);
/// ```
pub fn binom_pmf(n: usize, m: usize, p: f64) -> Result<f64> {
    if m > n {
        return Err(Error::domain(format!("binom_pmf: m = {m} exceeds n = {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("binom_pmf: p = {p} outside [0, 1]")));
    }
    // Degenerate fade probabilities collapse to point masses; handling them
    // here keeps ln(0) out of the log-domain path.
    if p == 0.0 {
        return Ok(if m == n { 1.0 } else { 0.0 });
    }
    if p == 1.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let ln_term = ln_choose(n, m) + (m as f64) * (1.0 - p).ln() + ((n - m) as f64) * p.ln();
    Ok(ln_term.exp())
}

/// Probability that at least one of `n` independent links fails:
/// `F(n, p) = 1 - (1 - p)^n`, computed as `-expm1(n * ln1p(-p))` so that
/// values near `n * p` keep full relative precision when `p` is tiny.
///
/// # Examples
///
/// ```
/// use xorcow::channel::any_fail;
///
/// assert_eq!(any_fail(0, 0.3).unwrap(), 0.0);
/// assert!((any_fail(2, 0.5).unwrap() - 0.75).abs() < 1e-15);
/// ```
pub fn any_fail(n: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("any_fail: p = {p} outside [0, 1]")));
    }
    if n == 0 || p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok(-f64::exp_m1((n as f64) * f64::ln_1p(-p)))
}

// ---------------------------------------------------------------------------
// Conditional link probabilities
// ---------------------------------------------------------------------------

/// The six conditional fade probabilities used by the per-case failure sums.
///
/// Given per-phase outage probabilities `p_D <= / >= p_U` and `p_X` (all for
/// the *same* underlying gain, so outage events at increasing rates are
/// nested), the cycle analysis repeatedly needs quantities of the form
/// "probability the gain clears rate A given it cleared / missed rate B".
/// Each accessor documents its validity ordering; calling one outside that
/// ordering is a domain error. Exact rate ties make the underlying events
/// coincide, and the accessors then return the natural degenerate value
/// (`1` for [`ConditionalSet::q_ud`], `0` for the others).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSet {
    p_d: f64,
    p_u: f64,
    p_x: f64,
}

/// Orderings that hold exactly when the generating rates tie can still show a
/// sub-ulp inversion after two monotone `expm1`/`exp` round trips; anything
/// beyond this slack is a genuine caller error.
const ORDERING_SLACK: f64 = 1e-12;

impl ConditionalSet {
    pub fn new(p_d: f64, p_u: f64, p_x: f64) -> Result<Self> {
        for (name, p) in [("p_d", p_d), ("p_u", p_u), ("p_x", p_x)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!(
                    "conditional set: {name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(ConditionalSet { p_d, p_u, p_x })
    }

    /// P(gain misses the downlink rate | it missed the uplink rate), valid
    /// for `p_U <= p_D` (i.e. `R_U <= R_D`): `q_UD = p_U / p_D`, with the
    /// exact-tie (and the degenerate `p_D = 0`) case equal to `1`.
    pub fn q_ud(&self) -> Result<f64> {
        self.require("q_ud", self.p_u, self.p_d)?;
        if self.p_u >= self.p_d {
            return Ok(1.0);
        }
        Ok((self.p_u / self.p_d).clamp(0.0, 1.0))
    }

    /// P(gain misses the uplink rate | it cleared the downlink rate), valid
    /// for `p_D <= p_U`: `s_UD = (p_U - p_D) / (1 - p_D)`; ties give `0`.
    pub fn s_ud(&self) -> Result<f64> {
        self.require("s_ud", self.p_d, self.p_u)?;
        Self::excess(self.p_d, self.p_u)
    }

    /// P(gain misses the XOR rate | it cleared the uplink rate), valid for
    /// `p_U <= p_X`: `s_XU = (p_X - p_U) / (1 - p_U)`; ties give `0`.
    pub fn s_xu(&self) -> Result<f64> {
        self.require("s_xu", self.p_u, self.p_x)?;
        Self::excess(self.p_u, self.p_x)
    }

    /// P(gain misses the XOR rate | it cleared the downlink rate), valid for
    /// `p_D <= p_X`: `s_XD = (p_X - p_D) / (1 - p_D)`; ties give `0`.
    pub fn s_xd(&self) -> Result<f64> {
        self.require("s_xd", self.p_d, self.p_x)?;
        Self::excess(self.p_d, self.p_x)
    }

    /// P(gain misses the XOR rate | it cleared the uplink rate but missed the
    /// downlink rate), valid for `p_U <= p_X <= p_D`:
    /// `r_UXUD = (p_X - p_U) / (p_D - p_U)`; a full tie gives `0`.
    pub fn r_uxud(&self) -> Result<f64> {
        self.require("r_uxud", self.p_u, self.p_x)?;
        self.require("r_uxud", self.p_x, self.p_d)?;
        Self::between(self.p_u, self.p_x, self.p_d)
    }

    /// P(gain misses the XOR rate | it cleared the downlink rate but missed
    /// the uplink rate), valid for `p_D <= p_X <= p_U`:
    /// `r_DXDU = (p_X - p_D) / (p_U - p_D)`; a full tie gives `0`.
    pub fn r_dxdu(&self) -> Result<f64> {
        self.require("r_dxdu", self.p_d, self.p_x)?;
        self.require("r_dxdu", self.p_x, self.p_u)?;
        Self::between(self.p_d, self.p_x, self.p_u)
    }

    /// `(hi - lo) / (1 - lo)` clamped to `[0, 1]`; `0` when the pair ties or
    /// the condition degenerates (`lo = 1`).
    fn excess(lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo || lo >= 1.0 {
            return Ok(0.0);
        }
        Ok(((hi - lo) / (1.0 - lo)).clamp(0.0, 1.0))
    }

    /// `(mid - lo) / (hi - lo)` clamped to `[0, 1]`; `0` when the bracket
    /// collapses.
    fn between(lo: f64, mid: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        Ok(((mid - lo) / (hi - lo)).clamp(0.0, 1.0))
    }

    fn require(&self, what: &str, smaller: f64, larger: f64) -> Result<()> {
        if smaller > larger + ORDERING_SLACK {
            return Err(Error::domain(format!(
                "{what} requested outside its validity ordering: \
                 p_d = {}, p_u = {}, p_x = {}",
                self.p_d, self.p_u, self.p_x
            )));
        }
        Ok(())
    }
}

/// Builds a [`ConditionalSet`] from the three per-phase outage probabilities.
pub fn conditional_set(p_d: f64, p_u: f64, p_x: f64) -> Result<ConditionalSet> {
    ConditionalSet::new(p_d, p_u, p_x)
}

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator.
///
/// The cycle failure probability is a sum of up to `O(n^3)` nonnegative terms
/// spanning many orders of magnitude; compensation keeps the total accurate
/// to a few ulps instead of a few hundred, which matters when the result is
/// compared against an exact enumeration at the 1e-10 level.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
