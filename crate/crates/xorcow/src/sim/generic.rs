//! XOR scheduling and cycle execution for arbitrary information topologies.
//!
//! The star protocol is one instance of a general pattern: any set of
//! streams (source node, subscriber set) can be served by a first phase
//! with one slot per stream, followed by an XOR repair phase in which
//! mutually-inverse unicast streams share one coded slot. A pair's slot is
//! driven by every node that holds *both* messages after the first phase;
//! a receiver missing one side strips the side it knows.

use super::{CycleOutcome, LinkRealization};
use crate::error::{Error, Result};
use crate::params::{PhaseSplit, SystemParams};

// ---------------------------------------------------------------------------
// Topologies
// ---------------------------------------------------------------------------

/// One information stream: `m_bits` from `source` to every subscriber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub source: usize,
    /// Strictly increasing, non-empty, never containing `source`.
    pub subscribers: Vec<usize>,
}

impl Stream {
    pub fn new(source: usize, mut subscribers: Vec<usize>) -> Self {
        subscribers.sort_unstable();
        subscribers.dedup();
        Stream { source, subscribers }
    }

    fn is_unicast_to(&self, node: usize) -> bool {
        self.subscribers == [node]
    }
}

/// A validated stream set over `node_count` radios (ids `0..node_count`),
/// held in canonical `(source, subscribers)` order so slot layouts are
/// reproducible regardless of input order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoTopology {
    node_count: usize,
    streams: Vec<Stream>,
}

impl InfoTopology {
    pub fn new(node_count: usize, mut streams: Vec<Stream>) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::domain("a topology needs at least two nodes"));
        }
        for s in &streams {
            if s.source >= node_count {
                return Err(Error::domain(format!(
                    "stream source {} out of range (node_count = {node_count})",
                    s.source
                )));
            }
            if s.subscribers.is_empty() {
                return Err(Error::domain(format!(
                    "stream from {} has no subscribers",
                    s.source
                )));
            }
            if let Some(&bad) = s.subscribers.iter().find(|&&v| v >= node_count) {
                return Err(Error::domain(format!(
                    "subscriber {bad} out of range (node_count = {node_count})"
                )));
            }
            if s.subscribers.contains(&s.source) {
                return Err(Error::domain(format!(
                    "stream from {} subscribes to itself",
                    s.source
                )));
            }
        }
        streams.sort_by(|x, y| (x.source, &x.subscribers).cmp(&(y.source, &y.subscribers)));
        Ok(InfoTopology { node_count, streams })
    }

    /// The star topology equivalent to the `n`-client controller protocol:
    /// one downlink and one uplink unicast per client.
    pub fn star(n: usize) -> Self {
        let mut streams = Vec::with_capacity(2 * n);
        for i in 1..=n {
            streams.push(Stream::new(0, vec![i]));
            streams.push(Stream::new(i, vec![0]));
        }
        InfoTopology::new(n + 1, streams).expect("star topology is always valid")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn streams(&self) -> &[Stream] {
        &self.streams
    }
}

// ---------------------------------------------------------------------------
// XOR schedule
// ---------------------------------------------------------------------------

/// One slot of the repair phase: either a coded pair of mutually-inverse
/// unicast streams or a plain retransmission slot (stream indices refer to
/// [`InfoTopology::streams`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XorSlot {
    Paired(usize, usize),
    Single(usize),
}

/// The two-phase slot layout for a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorSchedule {
    /// First phase: one slot per stream, in canonical stream order.
    pub phase1: Vec<usize>,
    /// Repair phase: coded pairs first (ordered by their first member),
    /// then the unpairable streams.
    pub xor_slots: Vec<XorSlot>,
}

/// Greedily pairs mutually-inverse unicast streams (`u -> v` with `v -> u`)
/// into shared XOR slots; every multicast or unmatched stream keeps a slot
/// of its own. Deterministic on the canonical stream order.
pub fn build_xor_schedule(topology: &InfoTopology) -> XorSchedule {
    let streams = topology.streams();
    let k = streams.len();
    let mut used = vec![false; k];
    let mut pairs = Vec::new();
    for i in 0..k {
        if used[i] || streams[i].subscribers.len() != 1 {
            continue;
        }
        let (u, v) = (streams[i].source, streams[i].subscribers[0]);
        if let Some(j) = (i + 1..k)
            .find(|&j| !used[j] && streams[j].source == v && streams[j].is_unicast_to(u))
        {
            used[i] = true;
            used[j] = true;
            pairs.push(XorSlot::Paired(i, j));
        }
    }
    let singles = (0..k).filter(|&i| !used[i]).map(XorSlot::Single);
    XorSchedule {
        phase1: (0..k).collect(),
        xor_slots: pairs.into_iter().chain(singles).collect(),
    }
}

// ---------------------------------------------------------------------------
// Cycle execution
// ---------------------------------------------------------------------------

/// Executes one cycle of the generic protocol on a realization.
///
/// The first phase gets the downlink-plus-uplink share of the cycle
/// (`f_d + f_u`) at rate `m * |streams| / T_1`; the repair phase gets `f_x`
/// at rate `m * |xor_slots| / T_X`. Holder sets are frozen when the first
/// phase ends: repair slots recruit no new relays.
pub fn run_generic_cycle(
    real: &LinkRealization,
    topology: &InfoTopology,
    params: &SystemParams,
    split: PhaseSplit,
) -> Result<CycleOutcome> {
    let nodes = topology.node_count();
    assert_eq!(real.nodes(), nodes, "realization/topology size mismatch");
    let streams = topology.streams();
    let schedule = build_xor_schedule(topology);
    let m = params.m_bits as f64;
    let t_1 = (split.f_d + split.f_u) * params.cycle_t;
    let t_x = split.f_x * params.cycle_t;
    let r_1 = m * streams.len() as f64 / t_1;
    let r_x = m * schedule.xor_slots.len() as f64 / t_x;
    let link = |u: usize, v: usize, rate: f64| real.supports(u, v, rate, params.bandwidth_w, params.snr);

    // Phase 1: every node listens to every slot it isn't transmitting.
    let mut holds: Vec<Vec<bool>> = streams
        .iter()
        .map(|s| {
            (0..nodes)
                .map(|x| x == s.source || link(s.source, x, r_1))
                .collect()
        })
        .collect();
    let phase1_holds = holds.clone();

    for slot in &schedule.xor_slots {
        match *slot {
            XorSlot::Paired(s1, s2) => {
                let tx: Vec<usize> = (0..nodes)
                    .filter(|&x| phase1_holds[s1][x] && phase1_holds[s2][x])
                    .collect();
                for (need, have) in [(s1, s2), (s2, s1)] {
                    for &x in &streams[need].subscribers {
                        // A receiver must hold one side to strip it; a
                        // holder of both is transmitting, not listening.
                        if !phase1_holds[need][x]
                            && phase1_holds[have][x]
                            && tx.iter().any(|&t| link(t, x, r_x))
                        {
                            holds[need][x] = true;
                        }
                    }
                }
            }
            XorSlot::Single(s) => {
                let tx: Vec<usize> =
                    (0..nodes).filter(|&x| phase1_holds[s][x]).collect();
                for &x in &streams[s].subscribers {
                    if !phase1_holds[s][x] && tx.iter().any(|&t| link(t, x, r_x)) {
                        holds[s][x] = true;
                    }
                }
            }
        }
    }

    // dl_ok[v]: v got everything it subscribes to; ul_ok[v]: everything v
    // sources arrived everywhere.
    let mut dl_ok = vec![true; nodes];
    let mut ul_ok = vec![true; nodes];
    for (s, stream) in streams.iter().enumerate() {
        for &x in &stream.subscribers {
            if !holds[s][x] {
                dl_ok[x] = false;
                ul_ok[stream.source] = false;
            }
        }
    }
    Ok(CycleOutcome::from_flags(dl_ok, ul_ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Schedule;
    use crate::sim::{run_xorcow_cycle, sample_realization};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn topology_validation() {
        assert!(InfoTopology::new(1, vec![]).is_err());
        assert!(InfoTopology::new(3, vec![Stream::new(3, vec![0])]).is_err());
        assert!(InfoTopology::new(3, vec![Stream::new(0, vec![5])]).is_err());
        assert!(InfoTopology::new(3, vec![Stream::new(0, vec![0, 1])]).is_err());
        assert!(InfoTopology::new(3, vec![Stream { source: 0, subscribers: vec![] }]).is_err());
        // Canonical ordering is applied on construction.
        let topo = InfoTopology::new(
            3,
            vec![Stream::new(2, vec![0]), Stream::new(0, vec![1, 2]), Stream::new(0, vec![1])],
        )
        .unwrap();
        let order: Vec<usize> = topo.streams().iter().map(|s| s.source).collect();
        assert_eq!(order, vec![0, 0, 2]);
        assert_eq!(topo.streams()[0].subscribers, vec![1]);
    }

    #[test]
    fn pairing_matches_the_worked_example() {
        // Nodes: 0, 1 exchange unicasts; 1 and 3 exchange unicasts; 0 also
        // multicasts to {2, 3}. Expected: two coded pairs plus the multicast.
        let topo = InfoTopology::new(
            4,
            vec![
                Stream::new(0, vec![1]),
                Stream::new(1, vec![0]),
                Stream::new(1, vec![3]),
                Stream::new(3, vec![1]),
                Stream::new(0, vec![2, 3]),
            ],
        )
        .unwrap();
        // Canonical order: (0,[1]), (0,[2,3]), (1,[0]), (1,[3]), (3,[1]).
        let schedule = build_xor_schedule(&topo);
        assert_eq!(
            schedule.xor_slots,
            vec![XorSlot::Paired(0, 2), XorSlot::Paired(3, 4), XorSlot::Single(1)]
        );
        assert_eq!(schedule.phase1, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn star_topology_pairs_every_client() {
        let topo = InfoTopology::star(4);
        let schedule = build_xor_schedule(&topo);
        assert_eq!(schedule.phase1.len(), 8);
        assert_eq!(schedule.xor_slots.len(), 4);
        assert!(schedule
            .xor_slots
            .iter()
            .all(|s| matches!(s, XorSlot::Paired(..))));
    }

    #[test]
    fn generic_star_matches_the_dedicated_star_runner() {
        // Same slot counts, same rates, same relay rule: the generic
        // engine on the star topology must reproduce the fixed-schedule
        // star runner outcome for outcome-for-outcome.
        let n = 5;
        // Deep in the failure regime so both failing and surviving cycles
        // appear; equality is asserted realization by realization either way.
        let snr = crate::params::db_to_linear(-7.0);
        let params = SystemParams::new(n, 160, 2e-3, 20e6, snr).unwrap();
        let topo = InfoTopology::star(n);
        // The star runner splits phase 1 into equal downlink and uplink
        // halves; any split with f_d == f_u matches the generic rate law.
        let split = PhaseSplit::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut failures = 0usize;
        for _ in 0..20_000 {
            let real = sample_realization(n, &mut rng);
            let star = run_xorcow_cycle(&real, &params, split, Schedule::Fixed);
            let gen = run_generic_cycle(&real, &topo, &params, split).unwrap();
            assert_eq!(star.failed, gen.failed, "diverged on {real:?}");
            for i in 1..=n {
                assert_eq!(
                    star.dl_ok[i], gen.dl_ok[i],
                    "dl[{i}] star={star:?} gen={gen:?} real={real:?}"
                );
                assert_eq!(
                    star.ul_ok[i], gen.ul_ok[i],
                    "ul[{i}] star={star:?} gen={gen:?} real={real:?}"
                );
            }
            failures += usize::from(star.failed);
        }
        assert!(failures > 0, "test regime too easy to be interesting");
    }

    #[test]
    fn paired_slot_requires_holding_one_side() {
        // Pure relay chain: 0 <-> 1 exchange; node 1's links are dead, but
        // node 2 heard both sides in phase 1. Node 2 drives the pair slot
        // and rescues both directions.
        let topo = InfoTopology::new(
            3,
            vec![Stream::new(0, vec![1]), Stream::new(1, vec![0])],
        )
        .unwrap();
        let params = SystemParams::new(2, 160, 2e-3, 20e6, 1.0).unwrap();
        let split = PhaseSplit::equal();
        let mut real = LinkRealization::zeros(3);
        real.set_gain(0, 2, 1e12);
        real.set_gain(1, 2, 1e12);
        let out = run_generic_cycle(&real, &topo, &params, split).unwrap();
        assert!(!out.failed, "{out:?}");

        // Sever node 2's link to node 1: now 1 never produced its uplink
        // to anyone... it still holds its own message, so the slot is
        // driven by {2}? No: 2 no longer holds 1's stream, and 1 holds
        // only its own side, so nobody holds both and the pair is silent.
        let mut real = LinkRealization::zeros(3);
        real.set_gain(0, 2, 1e12);
        let out = run_generic_cycle(&real, &topo, &params, split).unwrap();
        assert!(out.failed);
    }
}
