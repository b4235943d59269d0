//! Exact cycle-failure probability of the XOR-relaying star protocol.
//!
//! One cycle has three phases. The controller broadcasts every downlink
//! message (rate `R_D`), the clients take turns sending uplink (rate `R_U`,
//! with every idle radio eavesdropping), and finally the network retransmits
//! XOR-coded repair traffic (rate `R_X`): in each repair slot the controller
//! and every client that (a) got its own downlink and (b) overheard the
//! target's uplink transmit the same `DL XOR UL` codeword simultaneously,
//! so any one clean path delivers both missing directions at once.
//!
//! Because all links ride the same fading gain at three rates, sorting the
//! rates splits the analysis into six regimes. Within a regime the node
//! population factors into sets by which direct links cleared which rates,
//! the set sizes are binomially distributed with nested conditional
//! probabilities, and the rescue probability of each unlucky node depends
//! only on the set sizes. [`xorcow_failure_prob`] sums those closed-form
//! terms; the result matches exhaustive link-state enumeration to rounding
//! error (see the acceptance suite).
//!
//! Set-size notation used throughout, for one realized cycle:
//!
//! * `a`: clients whose direct downlink cleared `R_D` (the relay pool);
//!   `a_tilde` of them also cleared `R_U` ("strong"), `a_check = a -
//!   a_tilde` did not.
//! * `a_tilde_x` / `a_check_x`: members of those subsets whose direct link
//!   additionally clears `R_X`; `a_tilde_u = a_tilde - a_tilde_x`.
//! * `b`: clients whose downlink failed but whose uplink cleared `R_U`;
//!   `b_tilde` of them clear `R_X` as well.
//!
//! The flexible schedule reuses the same six regimes per outcome of
//! `a_tilde`, because its XOR rate shrinks with the number of
//! already-served nodes.

use crate::channel::{
    any_fail, binom_pmf, conditional_set, link_failure_prob, CompensatedSum,
};
use crate::error::{Error, Result};
use crate::params::{rates_for, PhaseSplit, RateTriple, Schedule, SystemParams};

// ---------------------------------------------------------------------------
// Regime dispatch
// ---------------------------------------------------------------------------

/// The six rate-ordering regimes. Every positive rate triple maps to exactly
/// one regime; ties resolve to the regime whose formula is exact for the
/// tied configuration (an XOR rate tied with the downlink rate behaves like
/// "XOR strictly fastest" unless all three rates coincide).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// `R_D >= R_U > R_X`: XOR slowest; overheard links always re-decode.
    Case1,
    /// `R_D > R_X >= R_U`: XOR between uplink and downlink.
    Case2,
    /// `R_U >= R_D > R_X`: uplink dominates, XOR slowest.
    Case3,
    /// `R_U > R_X >= R_D`: uplink dominates, XOR in the middle.
    Case4,
    /// `R_X >= R_U > R_D`: XOR fastest under a dominant uplink.
    Case5,
    /// `R_X >= R_D >= R_U` (not all equal): XOR fastest under a dominant
    /// downlink.
    Case6,
}

impl CaseId {
    /// 1-based regime index, mostly for diagnostics.
    pub fn index(self) -> u8 {
        match self {
            CaseId::Case1 => 1,
            CaseId::Case2 => 2,
            CaseId::Case3 => 3,
            CaseId::Case4 => 4,
            CaseId::Case5 => 5,
            CaseId::Case6 => 6,
        }
    }
}

impl std::fmt::Display for CaseId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "case{}", self.index())
    }
}

/// Maps a rate triple to its regime. Total: every triple with `r_d, r_u > 0`
/// and `r_x >= 0` lands in exactly one case.
///
/// Ties follow the exact semantics of the tied configuration: `r_x == r_u`
/// under a dominant downlink belongs with [`CaseId::Case2`] (an uplink-clean
/// link re-decodes the XOR for free), `r_x == r_d > r_u` belongs with
/// [`CaseId::Case6`] (a downlink-clean link re-decodes the XOR, but uplink
/// cleanliness alone no longer implies it), and the all-equal triple
/// collapses to [`CaseId::Case1`].
pub fn dispatch_case(rates: &RateTriple) -> CaseId {
    let RateTriple { r_d, r_u, r_x, .. } = *rates;
    if r_d >= r_u {
        if r_x < r_u {
            CaseId::Case1
        } else if r_x < r_d {
            CaseId::Case2
        } else if r_x > r_d {
            CaseId::Case6
        } else if r_d == r_u {
            // All three rates equal: the XOR phase behaves like one more
            // chance at the common rate.
            CaseId::Case1
        } else {
            CaseId::Case6
        }
    } else if r_x < r_d {
        CaseId::Case3
    } else if r_x < r_u {
        CaseId::Case4
    } else {
        CaseId::Case5
    }
}

// ---------------------------------------------------------------------------
// Set sizes
// ---------------------------------------------------------------------------

/// Realized sizes of the node sets a regime term conditions on. See the
/// module docs for the set definitions; the per-case constructors fill in
/// the fields the regime does not distinguish.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetCounts {
    pub a: usize,
    pub a_tilde: usize,
    pub a_check: usize,
    pub a_tilde_x: usize,
    pub a_tilde_u: usize,
    pub a_check_x: usize,
    pub b: usize,
    pub b_tilde: usize,
}

impl SetCounts {
    /// `R_D >= R_U`: every relay is strong, so only `a` and `b` matter.
    pub fn for_case1(a: usize, b: usize) -> Self {
        SetCounts {
            a,
            a_tilde: a,
            a_check: 0,
            a_tilde_x: 0,
            a_tilde_u: 0,
            a_check_x: 0,
            b,
            b_tilde: 0,
        }
    }

    /// Like case 1 plus the split of `b` by XOR-rate support.
    pub fn for_case2(a: usize, b: usize, b_tilde: usize) -> Self {
        SetCounts { b_tilde, ..Self::for_case1(a, b) }
    }

    /// `R_U >= R_D`: downlink failure implies uplink failure, so `b = 0`;
    /// the relay pool splits into strong and downlink-only nodes.
    pub fn for_case3(a: usize, a_tilde: usize) -> Self {
        SetCounts {
            a,
            a_tilde,
            a_check: a.saturating_sub(a_tilde),
            a_tilde_x: 0,
            a_tilde_u: 0,
            a_check_x: 0,
            b: 0,
            b_tilde: 0,
        }
    }

    /// Case 3 plus the split of the downlink-only nodes by XOR support.
    pub fn for_case4(a: usize, a_tilde: usize, a_check_x: usize) -> Self {
        SetCounts { a_check_x, ..Self::for_case3(a, a_tilde) }
    }

    /// Case 3 plus the split of the strong nodes by XOR support.
    pub fn for_case5(a: usize, a_tilde: usize, a_tilde_x: usize) -> Self {
        SetCounts {
            a_tilde_x,
            a_tilde_u: a_tilde.saturating_sub(a_tilde_x),
            ..Self::for_case3(a, a_tilde)
        }
    }

    /// `R_X > R_D >= R_U`: every relay is strong (`a_tilde = a`) and splits
    /// by XOR support; `b` reappears because downlink is the harder rate.
    pub fn for_case6(a: usize, a_tilde_x: usize, b: usize) -> Self {
        SetCounts {
            a,
            a_tilde: a,
            a_check: 0,
            a_tilde_x,
            a_tilde_u: a.saturating_sub(a_tilde_x),
            a_check_x: 0,
            b,
            b_tilde: 0,
        }
    }

    /// Checks the structural constraints a regime term relies on.
    fn validate(&self, case: CaseId, n: usize) -> Result<()> {
        let ok = self.a <= n
            && self.a_tilde <= self.a
            && self.a_check == self.a - self.a_tilde
            && self.a_tilde_x <= self.a_tilde
            && self.a_check_x <= self.a_check
            && self.b <= n - self.a
            && self.b_tilde <= self.b
            && match case {
                CaseId::Case1 | CaseId::Case2 => self.a_tilde == self.a,
                CaseId::Case3 | CaseId::Case4 => true,
                CaseId::Case5 => self.a_tilde_u == self.a_tilde - self.a_tilde_x,
                CaseId::Case6 => {
                    self.a_tilde == self.a && self.a_tilde_u == self.a - self.a_tilde_x
                }
            };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "inconsistent set counts for {case} with n = {n}: {self:?}"
            )))
        }
    }
}

// ---------------------------------------------------------------------------
// Rescue-success variants
// ---------------------------------------------------------------------------

/// Which rate screens the helper links in the ambiguous rescue factors of
/// cases 5 and 6.
///
/// When the XOR rate is the fastest, a helper that overheard a node's uplink
/// (a link event at `R_U`) does not automatically deliver the XOR codeword
/// (an event at `R_X`), and two readings of the partially-served nodes'
/// rescue probability are self-consistent. Both are implemented; the
/// defaults in [`VariantConfig`] are the readings that match exhaustive
/// link-state enumeration exactly (the alternatives differ at the 1e-4
/// level on small strict-regime configurations).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessVariant {
    /// Helper links screened at the uplink rate over the overheard set.
    UplinkScreened,
    /// Helper links screened at the XOR rate (over the whole relay pool for
    /// the downlink-rescue factor of case 6).
    XorScreened,
}

/// Variant selection for the case-5 and case-6 rescue factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariantConfig {
    pub rescue5: SuccessVariant,
    pub rescue6: SuccessVariant,
}

impl Default for VariantConfig {
    /// The enumeration-exact pairing: case 5 screens the uplink-failed
    /// relays' rescue at `R_U`, case 6 screens the downlink rescue of
    /// uplink-clean nodes at `R_X` over the whole relay pool.
    fn default() -> Self {
        VariantConfig {
            rescue5: SuccessVariant::UplinkScreened,
            rescue6: SuccessVariant::XorScreened,
        }
    }
}

/// Probability that one node with both direct links down is fully served,
/// given `q_strong` relays whose direct links clear `R_X` and `a_weak`
/// relays whose direct links clear only the uplink rate.
///
/// Each strong relay independently overhears the node's uplink (failure
/// `p_u`); at least one connection is required to get the uplink through.
/// The downlink then arrives if any connected strong relay's link to the
/// node stretches from `R_U` to `R_X` (failure `s_xu` each) or any weak
/// relay reaches the node at `R_X` outright (failure `p_x` each):
///
/// ```text
/// sum_{k=1}^{q} C(q,k) (1-p_u)^k p_u^(q-k) * (1 - s_xu^k * p_x^a_weak)
///   = (1 - p_u^q) - p_x^a_weak * ((p_u + (1-p_u) s_xu)^q - p_u^q)
/// ```
///
/// evaluated in the closed form on the right (the binomial sum telescopes).
pub fn doubly_failed_rescue_prob(
    q_strong: usize,
    a_weak: usize,
    p_u: f64,
    p_x: f64,
    s_xu: f64,
) -> f64 {
    let q = q_strong as i32;
    let pu_q = p_u.powi(q);
    let mix = (p_u + (1.0 - p_u) * s_xu).powi(q);
    ((1.0 - pu_q) - p_x.powi(a_weak as i32) * (mix - pu_q)).clamp(0.0, 1.0)
}

/// Joint probability that *every* node left unserved after the main phases
/// is rescued in case 5 (`R_X >= R_U > R_D`), conditioned on the counts.
///
/// The `a_check` relays that only got their downlink recover their uplink
/// through the `a_tilde_x` strong-and-XOR-capable relays; the `n - a` nodes
/// with nothing recover both directions via [`doubly_failed_rescue_prob`].
pub fn success5_prob(
    counts: &SetCounts,
    p_u: f64,
    p_x: f64,
    n: usize,
    variant: SuccessVariant,
) -> Result<f64> {
    counts.validate(CaseId::Case5, n)?;
    let s_xu = conditional_set(0.0, p_u, p_x)?.s_xu()?;
    let screen = match variant {
        SuccessVariant::UplinkScreened => p_u,
        SuccessVariant::XorScreened => p_x,
    };
    let first = (1.0 - screen.powi(counts.a_tilde_x as i32)).powi(counts.a_check as i32);
    let ks = doubly_failed_rescue_prob(counts.a_tilde_x, counts.a_tilde_u, p_u, p_x, s_xu);
    Ok(first * ks.powi((n - counts.a) as i32))
}

/// Joint rescue probability for case 6 (`R_X >= R_D >= R_U`), conditioned
/// on the counts.
///
/// The `b` uplink-only nodes need their downlink from any of the `a` relays
/// at the XOR rate; the `n - a - b` doubly-failed nodes go through
/// [`doubly_failed_rescue_prob`].
pub fn success6_prob(
    counts: &SetCounts,
    p_u: f64,
    p_x: f64,
    n: usize,
    variant: SuccessVariant,
) -> Result<f64> {
    counts.validate(CaseId::Case6, n)?;
    let s_xu = conditional_set(0.0, p_u, p_x)?.s_xu()?;
    let first = match variant {
        SuccessVariant::XorScreened => {
            (1.0 - p_x.powi(counts.a as i32)).powi(counts.b as i32)
        }
        SuccessVariant::UplinkScreened => {
            (1.0 - p_u.powi(counts.a_tilde_x as i32)).powi(counts.b as i32)
        }
    };
    let ks = doubly_failed_rescue_prob(counts.a_tilde_x, counts.a_tilde_u, p_u, p_x, s_xu);
    Ok(first * ks.powi((n - counts.a - counts.b) as i32))
}

// ---------------------------------------------------------------------------
// Per-configuration failure terms
// ---------------------------------------------------------------------------

/// Probability that the realized cycle lands on the configuration `counts`
/// *and* at least one node finishes unserved, for the given regime.
///
/// [`xorcow_failure_prob`] is literally the sum of this function over all
/// reachable configurations, so property tests exercising this term
/// exercise the production sum.
pub fn case_failure_term(
    case: CaseId,
    counts: &SetCounts,
    n: usize,
    p_d: f64,
    p_u: f64,
    p_x: f64,
    variants: VariantConfig,
) -> Result<f64> {
    counts.validate(case, n)?;
    let cond = conditional_set(p_d, p_u, p_x)?;
    let a = counts.a;
    let w_a = binom_pmf(n, a, p_d)?;
    let term = match case {
        CaseId::Case1 => {
            // The b uplink-only nodes are safe (the controller itself sends
            // their XOR at the slowest rate over an uplink-proven link);
            // each doubly-failed node needs one of the a relays to have
            // overheard it at R_U.
            w_a * binom_pmf(n - a, counts.b, cond.q_ud()?)?
                * any_fail(n - a - counts.b, p_u.powi(a as i32))?
        }
        CaseId::Case2 => {
            // b_tilde of the b uplink-only nodes re-decode the XOR on their
            // own link; everyone else unserved needs a relay at R_X.
            w_a * binom_pmf(n - a, counts.b, cond.q_ud()?)?
                * binom_pmf(counts.b, counts.b_tilde, cond.r_uxud()?)?
                * any_fail(n - a - counts.b_tilde, p_x.powi(a as i32))?
        }
        CaseId::Case3 => {
            // Downlink failure implies uplink failure; a doubly-failed node
            // is rescued end-to-end by any relay that overheard it.
            w_a * binom_pmf(a, counts.a_tilde, cond.s_ud()?)?
                * any_fail(n - a, p_u.powi(a as i32))?
        }
        CaseId::Case4 => {
            // Relays whose own link clears R_X (strong ones by R_U > R_X,
            // plus a_check_x of the rest) can be rescued/rescue; the
            // remaining nodes need an overheard link among those helpers.
            let helpers = counts.a_tilde + counts.a_check_x;
            w_a * binom_pmf(a, counts.a_tilde, cond.s_ud()?)?
                * binom_pmf(counts.a_check, counts.a_check_x, cond.r_dxdu()?)?
                * any_fail(n - helpers, p_u.powi(helpers as i32))?
        }
        CaseId::Case5 => {
            w_a * binom_pmf(a, counts.a_tilde, cond.s_ud()?)?
                * binom_pmf(counts.a_tilde, counts.a_tilde_x, cond.s_xu()?)?
                * (1.0 - success5_prob(counts, p_u, p_x, n, variants.rescue5)?)
        }
        CaseId::Case6 => {
            w_a * binom_pmf(a, counts.a_tilde_x, cond.s_xd()?)?
                * binom_pmf(n - a, counts.b, cond.q_ud()?)?
                * (1.0 - success6_prob(counts, p_u, p_x, n, variants.rescue6)?)
        }
    };
    Ok(term)
}

// ---------------------------------------------------------------------------
// Full-cycle failure probability
// ---------------------------------------------------------------------------

/// Cycle failure probability with the default (enumeration-exact) rescue
/// variants. See [`xorcow_failure_prob_with`].
pub fn xorcow_failure_prob(
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
) -> Result<f64> {
    xorcow_failure_prob_with(params, split, schedule, VariantConfig::default())
}

/// Probability that at least one of the `n` clients misses its downlink or
/// fails to deliver its uplink within one cycle.
///
/// For the fixed schedule the rate triple is known up front: dispatch once,
/// then sum the regime's terms over all configurations. The flexible
/// schedule's XOR rate depends on how many nodes are already served, so the
/// dispatch happens inside the sum — per relay count `a` when the downlink
/// rate dominates (every relay is strong), otherwise per `(a, a_tilde)`.
pub fn xorcow_failure_prob_with(
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
    variants: VariantConfig,
) -> Result<f64> {
    let n = params.n;
    let w = params.bandwidth_w;
    let snr = params.snr;
    let mut total = CompensatedSum::new();

    match schedule {
        Schedule::Fixed => {
            let rates = rates_for(params, split, Schedule::Fixed, 0);
            let p_d = link_failure_prob(rates.r_d, w, snr)?;
            let p_u = link_failure_prob(rates.r_u, w, snr)?;
            let p_x = link_failure_prob(rates.r_x, w, snr)?;
            let case = dispatch_case(&rates);
            for a in 0..=n {
                if binom_pmf(n, a, p_d)? == 0.0 {
                    continue;
                }
                add_case_terms(&mut total, case, n, a, None, p_d, p_u, p_x, variants)?;
            }
        }
        Schedule::Flexible => {
            let base = rates_for(params, split, Schedule::Flexible, 0);
            let p_d = link_failure_prob(base.r_d, w, snr)?;
            let p_u = link_failure_prob(base.r_u, w, snr)?;
            if base.r_d >= base.r_u {
                // Every relay is strong, so the served count is a itself and
                // the regime can only be 1, 2 or 6.
                for a in 0..=n {
                    if binom_pmf(n, a, p_d)? == 0.0 {
                        continue;
                    }
                    let rates = rates_for(params, split, Schedule::Flexible, a);
                    let p_x = link_failure_prob(rates.r_x, w, snr)?;
                    let case = dispatch_case(&rates);
                    debug_assert!(matches!(
                        case,
                        CaseId::Case1 | CaseId::Case2 | CaseId::Case6
                    ));
                    add_case_terms(&mut total, case, n, a, None, p_d, p_u, p_x, variants)?;
                }
            } else {
                // Strong relays are a sub-draw of the relay pool; the XOR
                // rate (hence the regime) is set by their count.
                let s_ud = conditional_set(p_d, p_u, 1.0)?.s_ud()?;
                for a in 0..=n {
                    let w_a = binom_pmf(n, a, p_d)?;
                    if w_a == 0.0 {
                        continue;
                    }
                    for a_tilde in 0..=a {
                        if w_a * binom_pmf(a, a_tilde, s_ud)? == 0.0 {
                            continue;
                        }
                        let rates = rates_for(params, split, Schedule::Flexible, a_tilde);
                        let p_x = link_failure_prob(rates.r_x, w, snr)?;
                        let case = dispatch_case(&rates);
                        debug_assert!(matches!(
                            case,
                            CaseId::Case3 | CaseId::Case4 | CaseId::Case5
                        ));
                        add_case_terms(
                            &mut total,
                            case,
                            n,
                            a,
                            Some(a_tilde),
                            p_d,
                            p_u,
                            p_x,
                            variants,
                        )?;
                    }
                }
            }
        }
    }
    Ok(total.value().clamp(0.0, 1.0))
}

/// Accumulates every configuration term of one regime at fixed `a` (and, for
/// regimes 3-5, fixed `a_tilde` when the caller has already pinned it — the
/// flexible schedule needs that because `p_x` changes with `a_tilde`).
#[allow(clippy::too_many_arguments)]
fn add_case_terms(
    total: &mut CompensatedSum,
    case: CaseId,
    n: usize,
    a: usize,
    a_tilde: Option<usize>,
    p_d: f64,
    p_u: f64,
    p_x: f64,
    variants: VariantConfig,
) -> Result<()> {
    let mut add = |counts: SetCounts| -> Result<()> {
        total.add(case_failure_term(case, &counts, n, p_d, p_u, p_x, variants)?);
        Ok(())
    };
    match case {
        CaseId::Case1 => {
            for b in 0..=(n - a) {
                add(SetCounts::for_case1(a, b))?;
            }
        }
        CaseId::Case2 => {
            for b in 0..=(n - a) {
                for b_tilde in 0..=b {
                    add(SetCounts::for_case2(a, b, b_tilde))?;
                }
            }
        }
        CaseId::Case3 => {
            for at in at_range(a, a_tilde) {
                add(SetCounts::for_case3(a, at))?;
            }
        }
        CaseId::Case4 => {
            for at in at_range(a, a_tilde) {
                for a_check_x in 0..=(a - at) {
                    add(SetCounts::for_case4(a, at, a_check_x))?;
                }
            }
        }
        CaseId::Case5 => {
            for at in at_range(a, a_tilde) {
                for a_tilde_x in 0..=at {
                    add(SetCounts::for_case5(a, at, a_tilde_x))?;
                }
            }
        }
        CaseId::Case6 => {
            for a_tilde_x in 0..=a {
                for b in 0..=(n - a) {
                    add(SetCounts::for_case6(a, a_tilde_x, b))?;
                }
            }
        }
    }
    Ok(())
}

/// Either the pinned `a_tilde` alone or the full `0..=a` marginalization.
fn at_range(a: usize, a_tilde: Option<usize>) -> std::ops::RangeInclusive<usize> {
    match a_tilde {
        Some(at) => at..=at,
        None => 0..=a,
    }
}

// ---------------------------------------------------------------------------
// Two-hop baseline
// ---------------------------------------------------------------------------

/// Cycle failure probability of the plain two-hop relaying baseline at a
/// common per-phase rate whose link outage is `p`.
///
/// That protocol repeats downlink and uplink once each through every
/// first-hop survivor, so a cycle fails iff some node has neither a direct
/// link nor a helper among the `a` survivors:
///
/// ```text
/// sum_a C(n,a) (1-p)^a p^(n-a) * (1 - (1 - p^a)^(n-a))
/// ```
///
/// The XOR protocol at three equal rates collapses to exactly this law,
/// which doubles as a regression anchor between the two analyses.
pub fn occupycow2_failure_prob(n: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "occupycow2_failure_prob: p = {p} outside [0, 1]"
        )));
    }
    let mut total = CompensatedSum::new();
    for a in 0..=n {
        total.add(binom_pmf(n, a, p)? * any_fail(n - a, p.powi(a as i32))?);
    }
    Ok(total.value().clamp(0.0, 1.0))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::db_to_linear;
    use proptest::prelude::*;

    fn triple(r_d: f64, r_u: f64, r_x: f64) -> RateTriple {
        RateTriple { r_d, r_u, r_x, schedule: Schedule::Fixed, a_tilde: 0 }
    }

    fn scenario(n: usize, snr_db: f64) -> SystemParams {
        SystemParams::new(n, 160, 2e-3, 20e6, db_to_linear(snr_db)).unwrap()
    }

    fn split(f_d: f64, f_u: f64, f_x: f64) -> PhaseSplit {
        PhaseSplit::new(f_d, f_u, f_x).unwrap()
    }

    #[test]
    fn dispatch_covers_all_orderings_and_ties() {
        use CaseId::*;
        let expect = [
            ((2.0, 1.0, 0.5), Case1),
            ((1.0, 1.0, 0.5), Case1),
            ((1.0, 1.0, 1.0), Case1), // all equal
            ((2.0, 1.0, 1.5), Case2),
            ((2.0, 1.0, 1.0), Case2), // r_x == r_u < r_d
            ((1.0, 2.0, 0.5), Case3),
            ((1.0, 2.0, 1.5), Case4),
            ((1.0, 2.0, 1.0), Case4), // r_x == r_d < r_u
            ((1.0, 2.0, 2.0), Case5), // r_x == r_u > r_d
            ((1.0, 2.0, 3.0), Case5),
            ((2.0, 1.0, 3.0), Case6),
            ((2.0, 1.0, 2.0), Case6), // r_x == r_d > r_u
            ((1.0, 1.0, 2.0), Case6),
            ((2.0, 2.0, 0.0), Case1), // nothing left to retransmit
        ];
        for ((r_d, r_u, r_x), want) in expect {
            assert_eq!(
                dispatch_case(&triple(r_d, r_u, r_x)),
                want,
                "({r_d}, {r_u}, {r_x})"
            );
        }
    }

    #[test]
    fn single_node_has_no_relays() {
        // With n = 1 the cycle lives or dies on the one direct link at the
        // common 240 kb/s rate: failure = 1 - exp(-(2^0.012 - 1)).
        let p = xorcow_failure_prob(&scenario(1, 0.0), PhaseSplit::equal(), Schedule::Fixed)
            .unwrap();
        assert!((p - 0.008317670056845753).abs() < 1e-15, "p = {p}");
    }

    type FrozenCase = (usize, f64, (f64, f64, f64), Schedule, f64);

    #[test]
    fn matches_enumeration_frozen_values() {
        // Values frozen from two agreeing independent implementations
        // (direct summation and exhaustive link-state enumeration).
        let cases: [FrozenCase; 4] = [
            (2, 0.0, (1. / 3., 1. / 3., 1. / 3.), Schedule::Fixed, 8.209397215882e-4),
            (2, 0.0, (1. / 3., 1. / 3., 1. / 3.), Schedule::Flexible, 8.243408055110e-4),
            (3, -5.0, (0.5, 0.25, 0.25), Schedule::Fixed, 8.918978754355e-3),
            (3, 5.0, (0.25, 0.5, 0.25), Schedule::Flexible, 4.795791080715e-6),
        ];
        for (n, snr_db, (fd, fu, fx), sched, want) in cases {
            let got =
                xorcow_failure_prob(&scenario(n, snr_db), split(fd, fu, fx), sched).unwrap();
            assert!(
                ((got - want) / want).abs() < 2e-12,
                "n = {n}, snr = {snr_db} dB, {sched}: got {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn strict_regime_values_and_variant_arbitration() {
        // A split putting the XOR phase under the most time pressure lands
        // in regime 5 (uplink dominant) or 6 (downlink dominant) strictly.
        let c5 = xorcow_failure_prob(&scenario(2, 0.0), split(0.5, 0.3, 0.2), Schedule::Fixed)
            .unwrap();
        assert!(((c5 - 1.546703156982e-3) / c5).abs() < 2e-12, "c5 = {c5:e}");
        let c6 = xorcow_failure_prob(&scenario(3, 0.0), split(0.3, 0.5, 0.2), Schedule::Fixed)
            .unwrap();
        assert!(((c6 - 3.950759720534e-4) / c6).abs() < 2e-12, "c6 = {c6:e}");

        // The rejected variant pairings are measurably different; had they
        // agreed, the arbitration would have been moot.
        let other5 = xorcow_failure_prob_with(
            &scenario(2, 0.0),
            split(0.5, 0.3, 0.2),
            Schedule::Fixed,
            VariantConfig { rescue5: SuccessVariant::XorScreened, ..Default::default() },
        )
        .unwrap();
        assert!((other5 - c5).abs() > 1e-5);
        let other6 = xorcow_failure_prob_with(
            &scenario(3, 0.0),
            split(0.3, 0.5, 0.2),
            Schedule::Fixed,
            VariantConfig { rescue6: SuccessVariant::UplinkScreened, ..Default::default() },
        )
        .unwrap();
        assert!((other6 - c6).abs() > 1e-6);
    }

    #[test]
    fn equal_rates_collapse_to_two_hop_law() {
        for n in [2usize, 5, 30] {
            for snr_db in [-3.0, 0.0, 6.0] {
                let params = scenario(n, snr_db);
                let via_cases =
                    xorcow_failure_prob(&params, PhaseSplit::equal(), Schedule::Fixed).unwrap();
                let rate = params.m_bits as f64 * n as f64 / (params.cycle_t / 3.0);
                let p = link_failure_prob(rate, params.bandwidth_w, params.snr).unwrap();
                let closed = occupycow2_failure_prob(n, p).unwrap();
                assert!(
                    (via_cases - closed).abs() <= 1e-13 * closed.max(1e-30),
                    "n = {n}, snr = {snr_db}: {via_cases:e} vs {closed:e}"
                );
            }
        }
    }

    #[test]
    fn success5_hand_value() {
        // a = 2 relays, both strong, one XOR-capable; one doubly-failed
        // node (n = 3). Rescue = B(1,1,0.2) * (1 - 0.375 * 0.5) = 0.65.
        let counts = SetCounts::for_case5(2, 2, 1);
        let s = success5_prob(&counts, 0.2, 0.5, 3, SuccessVariant::UplinkScreened).unwrap();
        assert!((s - 0.65).abs() < 1e-15, "s = {s}");

        // No strong XOR-capable relay: a doubly-failed node cannot be
        // reached at all.
        let counts = SetCounts::for_case5(2, 2, 0);
        let s = success5_prob(&counts, 0.2, 0.5, 3, SuccessVariant::UplinkScreened).unwrap();
        assert_eq!(s, 0.0);

        // Nobody missing anything: empty products are certain successes.
        let counts = SetCounts::for_case5(3, 3, 3);
        let s = success5_prob(&counts, 0.2, 0.5, 3, SuccessVariant::UplinkScreened).unwrap();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn success6_edges() {
        // b = 0 and n = a: nothing to rescue.
        let counts = SetCounts::for_case6(3, 2, 0);
        let s = success6_prob(&counts, 0.2, 0.3, 3, SuccessVariant::XorScreened).unwrap();
        assert_eq!(s, 1.0);
        // One uplink-only node against two relays at p_x = 0.3.
        let counts = SetCounts::for_case6(2, 1, 1);
        let s = success6_prob(&counts, 0.2, 0.3, 3, SuccessVariant::XorScreened).unwrap();
        assert!((s - (1.0 - 0.09)).abs() < 1e-15);
    }

    #[test]
    fn terms_reject_inconsistent_counts() {
        let bad = SetCounts { b: 3, ..SetCounts::for_case1(2, 0) };
        assert!(case_failure_term(
            CaseId::Case1, &bad, 4, 0.5, 0.4, 0.3, VariantConfig::default()
        )
        .is_err());
        // Case 6 requires every relay strong (a_tilde == a).
        let bad = SetCounts { a_tilde: 1, ..SetCounts::for_case6(2, 1, 0) };
        assert!(case_failure_term(
            CaseId::Case6, &bad, 4, 0.3, 0.2, 0.5, VariantConfig::default()
        )
        .is_err());
        assert!(SetCounts::for_case5(2, 1, 2).a_tilde_x > 1); // builder can't fix this
        assert!(case_failure_term(
            CaseId::Case5, &SetCounts::for_case5(2, 1, 2), 4, 0.2, 0.3, 0.5,
            VariantConfig::default()
        )
        .is_err());
    }

    #[test]
    fn certain_failure_at_zero_snr_and_vanishing_at_high_snr() {
        for sched in [Schedule::Fixed, Schedule::Flexible] {
            for spl in [PhaseSplit::equal(), split(0.5, 0.3, 0.2), split(0.25, 0.5, 0.25)] {
                let dead = SystemParams::new(4, 160, 2e-3, 20e6, 0.0).unwrap();
                assert_eq!(xorcow_failure_prob(&dead, spl, sched).unwrap(), 1.0);
                let strong = SystemParams::new(4, 160, 2e-3, 20e6, 1e12).unwrap();
                assert!(xorcow_failure_prob(&strong, spl, sched).unwrap() < 1e-20);
            }
        }
    }

    #[test]
    fn monotone_in_snr_and_cycle_time() {
        for sched in [Schedule::Fixed, Schedule::Flexible] {
            let mut last = f64::INFINITY;
            for snr_db in [-6.0, -3.0, 0.0, 3.0, 6.0, 9.0] {
                let p = xorcow_failure_prob(&scenario(6, snr_db), split(0.4, 0.35, 0.25), sched)
                    .unwrap();
                assert!(p <= last, "{sched}: snr {snr_db}");
                last = p;
            }
            let mut last = f64::INFINITY;
            for t_ms in [1.0, 1.5, 2.0, 3.0, 5.0] {
                let params = SystemParams::new(6, 160, t_ms * 1e-3, 20e6, 1.0).unwrap();
                let p = xorcow_failure_prob(&params, split(0.4, 0.35, 0.25), sched).unwrap();
                assert!(p <= last, "{sched}: T {t_ms} ms");
                last = p;
            }
        }
    }

    #[test]
    fn fixed_schedule_scale_invariance_is_bit_exact() {
        // Doubling payload and bandwidth together leaves every fixed-schedule
        // spectral efficiency unchanged, so the sums are bit-identical.
        // (The flexible uplink carries a constant +1 bit per stream, which
        // deliberately breaks exact scaling there.)
        for (fd, fu, fx) in [(1. / 3., 1. / 3., 1. / 3.), (0.5, 0.3, 0.2), (0.25, 0.5, 0.25)] {
            let base = SystemParams::new(7, 160, 2e-3, 20e6, 0.7).unwrap();
            let doubled = SystemParams::new(7, 320, 2e-3, 40e6, 0.7).unwrap();
            let p0 = xorcow_failure_prob(&base, split(fd, fu, fx), Schedule::Fixed).unwrap();
            let p1 = xorcow_failure_prob(&doubled, split(fd, fu, fx), Schedule::Fixed).unwrap();
            assert_eq!(p0.to_bits(), p1.to_bits());
        }
    }

    #[test]
    fn two_hop_law_edges() {
        assert_eq!(occupycow2_failure_prob(5, 0.0).unwrap(), 0.0);
        assert_eq!(occupycow2_failure_prob(5, 1.0).unwrap(), 1.0);
        // n = 1: no relays, failure = p.
        let p = occupycow2_failure_prob(1, 0.37).unwrap();
        assert!((p - 0.37).abs() < 1e-15);
        assert!(occupycow2_failure_prob(5, 1.2).is_err());
    }

    /// Literal binomial form of the doubly-failed rescue probability, kept
    /// as an independent check on the closed form used in production.
    fn rescue_literal(q: usize, a_weak: usize, p_u: f64, p_x: f64, s_xu: f64) -> f64 {
        (1..=q)
            .map(|k| {
                binom_pmf(q, k, p_u).unwrap()
                    * (1.0 - s_xu.powi(k as i32) * p_x.powi(a_weak as i32))
            })
            .sum()
    }

    proptest! {
        #[test]
        fn prop_rescue_closed_form_matches_literal(
            q in 0usize..8,
            a_weak in 0usize..6,
            p_u in 0.0f64..=1.0,
            extra in 0.0f64..=1.0,
        ) {
            let p_x = (p_u + extra * (1.0 - p_u)).min(1.0);
            let s_xu = if p_u < 1.0 { (p_x - p_u) / (1.0 - p_u) } else { 0.0 };
            let closed = doubly_failed_rescue_prob(q, a_weak, p_u, p_x, s_xu);
            let literal = rescue_literal(q, a_weak, p_u, p_x, s_xu);
            prop_assert!((closed - literal).abs() < 1e-14);
        }

        #[test]
        fn prop_failure_prob_is_a_probability(
            n in 1usize..8,
            snr_db in -10.0f64..20.0,
            fd in 0.1f64..0.8,
            fu in 0.1f64..0.8,
            fixed in proptest::bool::ANY,
        ) {
            prop_assume!(fd + fu < 0.95);
            let spl = PhaseSplit::new(fd, fu, 1.0 - fd - fu).unwrap();
            let sched = if fixed { Schedule::Fixed } else { Schedule::Flexible };
            let p = xorcow_failure_prob(&scenario(n, snr_db), spl, sched).unwrap();
            prop_assert!((0.0..=1.0).contains(&p), "p = {p}");
        }
    }
}
