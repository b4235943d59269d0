//! Exact per-cycle execution of the XOR-relaying star protocol.

use super::{CycleOutcome, LinkRealization};
use crate::params::{rates_for, PhaseSplit, Schedule, SystemParams};

/// Runs one cycle of the XOR protocol against an arbitrary link predicate
/// `supports(u, v, rate)`. Node 0 is the controller, clients are `1..=n`.
///
/// Phases, for a frozen realization:
///
/// 1. Downlink broadcast at `r_d`: client `i` holds its message iff
///    `supports(0, i, r_d)`.
/// 2. Uplink slots at `r_u`: the controller hears `i` directly iff
///    `supports(0, i, r_u)`; every other client `j` overhears iff
///    `supports(i, j, r_u)`.
/// 3. XOR repair slots at `r_x`, one per target client (fixed schedule) or
///    one per not-yet-served client (flexible schedule, which also shrinks
///    the XOR payload and hence `r_x`). In client `i`'s slot the codeword
///    `DL_i XOR UL_i` is sent simultaneously by everyone who can form it:
///    the controller (iff it got `UL_i`), client `i` itself (iff it got
///    `DL_i`; it knows its own uplink), and every client that got its *own*
///    downlink and overheard `UL_i`. One clean link from any co-transmitter
///    delivers the codeword; the receiver strips the half it already knows.
///    The controller recovers `UL_i` from any transmitting client; client
///    `i` recovers `DL_i` from any co-transmitter (it cannot listen while
///    transmitting, but if it transmits it already has its downlink, and
///    its uplink rides its own transmission).
pub(crate) fn run_cycle_with<S>(
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
    supports: S,
) -> CycleOutcome
where
    S: Fn(usize, usize, f64) -> bool,
{
    let n = params.n;
    let base = rates_for(params, split, schedule, 0);
    let (r_d, r_u) = (base.r_d, base.r_u);

    // Phase 1 + 2 direct outcomes (index = node id; slot 0 unused).
    let mut dl_ok = vec![true; n + 1];
    let mut ul_ok = vec![true; n + 1];
    for i in 1..=n {
        dl_ok[i] = supports(0, i, r_d);
        ul_ok[i] = supports(0, i, r_u);
    }
    // heard[i][j]: client j overheard client i's uplink.
    let mut heard = vec![vec![false; n + 1]; n + 1];
    for (i, row) in heard.iter_mut().enumerate().skip(1) {
        for (j, flag) in row.iter_mut().enumerate().skip(1) {
            if i != j {
                *flag = supports(i, j, r_u);
            }
        }
    }

    // Phase 3 slot list and rate.
    let served = |i: usize| dl_ok[i] && ul_ok[i];
    let (r_x, slots): (f64, Vec<usize>) = match schedule {
        Schedule::Fixed => (base.r_x, (1..=n).collect()),
        Schedule::Flexible => {
            let a_tilde = (1..=n).filter(|&i| served(i)).count();
            let slots = (1..=n).filter(|&i| !served(i)).collect();
            (rates_for(params, split, schedule, a_tilde).r_x, slots)
        }
    };

    // Relay eligibility is frozen here: a repair earlier in the XOR phase
    // restores a client's own traffic but does not hand it the rest of the
    // broadcast, so it never becomes a relay for later slots.
    let dl_direct = dl_ok.clone();
    for i in slots {
        // Client co-transmitters in i's slot: own downlink received and
        // uplink i overheard.
        let relays = || (1..=n).filter(|&j| j != i && dl_direct[j] && heard[i][j]);
        let self_tx = dl_ok[i];
        let ctrl_tx = ul_ok[i];
        if !ul_ok[i] {
            ul_ok[i] = relays().any(|j| supports(0, j, r_x))
                || (self_tx && supports(0, i, r_x));
        }
        if !dl_ok[i] {
            // i holds no downlink, so it is not transmitting: it listens.
            dl_ok[i] = relays().any(|j| supports(j, i, r_x))
                || (ctrl_tx && supports(0, i, r_x));
        }
    }

    CycleOutcome::from_flags(dl_ok, ul_ok)
}

/// Executes one XOR-protocol cycle on a sampled realization.
///
/// The realization must cover `params.n` clients plus the controller.
pub fn run_xorcow_cycle(
    real: &LinkRealization,
    params: &SystemParams,
    split: PhaseSplit,
    schedule: Schedule,
) -> CycleOutcome {
    assert_eq!(
        real.nodes(),
        params.n + 1,
        "realization covers {} radios but the scenario needs {}",
        real.nodes(),
        params.n + 1
    );
    run_cycle_with(params, split, schedule, |u, v, rate| {
        real.supports(u, v, rate, params.bandwidth_w, params.snr)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize) -> SystemParams {
        SystemParams::new(n, 160, 2e-3, 20e6, 1.0).unwrap()
    }

    fn split(f_d: f64, f_u: f64, f_x: f64) -> PhaseSplit {
        PhaseSplit::new(f_d, f_u, f_x).unwrap()
    }

    #[test]
    fn perfect_links_succeed_and_dead_links_fail() {
        for sched in [Schedule::Fixed, Schedule::Flexible] {
            let mut real = LinkRealization::zeros(4);
            for i in 0..4 {
                for j in (i + 1)..4 {
                    real.set_gain(i, j, 1e12);
                }
            }
            let out = run_xorcow_cycle(&real, &params(3), PhaseSplit::equal(), sched);
            assert!(!out.failed);
            assert!(out.dl_ok.iter().all(|&x| x) && out.ul_ok.iter().all(|&x| x));

            let dead = LinkRealization::zeros(4);
            let out = run_xorcow_cycle(&dead, &params(3), PhaseSplit::equal(), sched);
            assert!(out.failed);
            assert!(!out.dl_ok[1] && !out.ul_ok[3]);
        }
    }

    #[test]
    fn relay_rescues_an_isolated_client() {
        // Client 2 has no controller link at all, but client 1 has a strong
        // controller link and overhears client 2: in client 2's XOR slot,
        // client 1 carries UL_2 up and DL_2 down.
        let mut real = LinkRealization::zeros(3);
        real.set_gain(0, 1, 1e12);
        real.set_gain(1, 2, 1e12);
        for sched in [Schedule::Fixed, Schedule::Flexible] {
            let out = run_xorcow_cycle(&real, &params(2), PhaseSplit::equal(), sched);
            assert!(!out.failed, "{sched}: {out:?}");
        }
    }

    #[test]
    fn controller_repairs_downlink_of_uplink_only_client() {
        // Client 1 reaches the controller at the uplink rate but its
        // downlink (same gain, higher rate here) failed. The controller
        // holds UL_1, so it transmits in the XOR slot; the slower XOR rate
        // goes through over the same link.
        let p = params(1);
        let spl = split(0.2, 0.4, 0.4); // r_d = 400k, r_u = r_x = 200k
        let rates = rates_for(&p, spl, Schedule::Fixed, 0);
        assert!(rates.r_d > rates.r_u && rates.r_x == rates.r_u);
        // Gain threshold for 400 kb/s at snr 1: 2^(r/W) - 1.
        let g_mid = crate::channel::outage_threshold(rates.r_u, p.bandwidth_w, 1.0) * 1.01;
        let mut real = LinkRealization::zeros(2);
        real.set_gain(0, 1, g_mid);
        let out = run_xorcow_cycle(&real, &p, spl, Schedule::Fixed);
        assert!(!out.failed, "{out:?}");
    }

    #[test]
    fn half_duplex_self_repair_uses_own_slot() {
        // Client 1 got its downlink but its uplink rate is too fast for its
        // controller link; in its own XOR slot it transmits the codeword
        // itself, and the controller strips DL_1 to recover UL_1. That only
        // works if the link clears the XOR rate.
        let p = params(1);
        let spl = split(0.4, 0.2, 0.4); // r_d = r_x = 200k, r_u = 400k
        let rates = rates_for(&p, spl, Schedule::Fixed, 0);
        let g_mid = crate::channel::outage_threshold(rates.r_d, p.bandwidth_w, 1.0) * 1.01;
        let mut real = LinkRealization::zeros(2);
        real.set_gain(0, 1, g_mid);
        let out = run_xorcow_cycle(&real, &p, spl, Schedule::Fixed);
        assert!(!out.failed, "{out:?}");

        // Squeeze the XOR phase so r_x exceeds what the link carries: now
        // the self-repair must fail. (Downlink keeps its 0.4 share, so it
        // still succeeds; only the repair rate moved.)
        let spl = split(0.4, 0.3, 0.3);
        let out = run_xorcow_cycle(&real, &p, spl, Schedule::Fixed);
        assert!(out.failed && !out.ul_ok[1]);
    }

    #[test]
    fn flexible_schedule_skips_served_clients_entirely() {
        // Both clients served directly: no XOR slots remain, and the XOR
        // rate formula hits r_x = 0. Nothing may change.
        let mut real = LinkRealization::zeros(3);
        real.set_gain(0, 1, 1e12);
        real.set_gain(0, 2, 1e12);
        let out = run_xorcow_cycle(&real, &params(2), PhaseSplit::equal(), Schedule::Flexible);
        assert!(!out.failed);
    }
}
