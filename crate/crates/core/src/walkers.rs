//! Simple random walks: single steps, synchronous forwarding rounds over
//! per-node FIFO queues, hop-count thresholds and the visit-timing
//! statistics used to infer `n` and `k` locally.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::codec::Block;
use crate::error::{Error, Result};
use crate::network::GraphTopology;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    SourceCopy,
    Precoded,
}

/// A circulating unit of data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub kind: PacketKind,
    pub origin: usize,
    /// Hop counter `c(.)`; never decreases.
    pub counter: u64,
    pub payload: Block,
    /// Source indices XORed into the payload.
    pub lineage: Vec<usize>,
}

impl Packet {
    pub fn source_copy(origin: usize, source: usize, payload: Block) -> Self {
        Packet {
            kind: PacketKind::SourceCopy,
            origin,
            counter: 0,
            payload,
            lineage: vec![source],
        }
    }
}

/// Moves a walker from `current` to a uniformly chosen neighbour.
pub fn step_walk<R: Rng + ?Sized>(current: usize, g: &GraphTopology, rng: &mut R) -> Result<usize> {
    let nbrs = g.neighbors(current);
    if nbrs.is_empty() {
        return Err(Error::IsolatedNode(current));
    }
    Ok(nbrs[rng.gen_range(0..nbrs.len())] as usize)
}

/// Hop budget after which a walk has covered the graph w.h.p.:
/// `ceil(C1 * n * ln n)` with the natural logarithm.
pub fn cover_threshold(n_est: f64, c1: f64) -> Result<u64> {
    if !(n_est >= 2.0) || !n_est.is_finite() {
        return Err(Error::invalid("n_est", "must be at least 2"));
    }
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::invalid("c1", "must be positive"));
    }
    Ok(libm::ceil(c1 * n_est * libm::log(n_est) - 1e-9) as u64)
}

/// Outcome of delivering a packet to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    /// Put the packet at the tail of the receiver's forward queue.
    Enqueue,
    /// The packet left circulation (absorbed or discarded).
    Consumed,
}

/// FIFO forward queues of packet handles, one per node.
#[derive(Debug, Clone, Default)]
pub struct ForwardQueues {
    queues: Vec<VecDeque<u32>>,
    active: Vec<u32>,
    is_active: Vec<bool>,
    in_flight: usize,
}

impl ForwardQueues {
    pub fn new(n: usize) -> Self {
        ForwardQueues {
            queues: vec![VecDeque::new(); n],
            active: Vec::new(),
            is_active: vec![false; n],
            in_flight: 0,
        }
    }

    pub fn push(&mut self, node: usize, handle: u32) {
        self.queues[node].push_back(handle);
        self.in_flight += 1;
        if !self.is_active[node] {
            self.is_active[node] = true;
            self.active.push(node as u32);
        }
    }

    pub fn queue(&self, node: usize) -> &VecDeque<u32> {
        &self.queues[node]
    }

    /// Packets currently waiting in any queue.
    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    pub fn is_empty(&self) -> bool {
        self.in_flight == 0
    }

    /// Dequeues the head-of-line packet of every node whose queue is
    /// non-empty and picks a uniformly random neighbour for it. Returns
    /// `(receiver, handle)` pairs in increasing sender order; the caller
    /// decides what each receiver does with its packet.
    pub fn depart<R: Rng + ?Sized>(&mut self, g: &GraphTopology, rng: &mut R) -> Result<Vec<(usize, u32)>> {
        self.active.sort_unstable();
        let mut departures = Vec::with_capacity(self.active.len());
        for &u in &self.active {
            let u = u as usize;
            let handle = self.queues[u].pop_front().expect("active node has a packet");
            departures.push((step_walk(u, g, rng)?, handle));
        }
        self.in_flight -= departures.len();
        let senders = core::mem::take(&mut self.active);
        for &u in &senders {
            if self.queues[u as usize].is_empty() {
                self.is_active[u as usize] = false;
            } else {
                self.active.push(u);
            }
        }
        Ok(departures)
    }

    /// Drops every queued packet.
    pub fn clear(&mut self) {
        for &u in &self.active {
            self.queues[u as usize].clear();
            self.is_active[u as usize] = false;
        }
        self.active.clear();
        self.in_flight = 0;
    }
}

/// One synchronous round: every node whose queue was non-empty at the start
/// of the round sends its head-of-line packet to a uniformly random
/// neighbour. Deliveries are then handed to `deliver` in increasing sender
/// order. Returns the number of transmissions.
pub fn forward_round<R, F>(
    queues: &mut ForwardQueues,
    g: &GraphTopology,
    rng: &mut R,
    mut deliver: F,
) -> Result<usize>
where
    R: Rng + ?Sized,
    F: FnMut(usize, u32) -> Delivery,
{
    let departures = queues.depart(g, rng)?;
    for &(to, handle) in &departures {
        if deliver(to, handle) == Delivery::Enqueue {
            queues.push(to, handle);
        }
    }
    Ok(departures.len())
}

/// How the inter-packet time is measured from the visit log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterPacketEstimator {
    /// Mean gap between consecutive visits of any packet.
    #[default]
    ConsecutiveGaps,
    /// Mean over ordered source pairs of `|t_i^(j) - t_i'^(j)|` for
    /// `j <= min(J_i, J_i')`.
    PairedOffsets,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// `n_hat = T_visit / n_divisor`.
    pub n_divisor: f64,
    pub inter_packet: InterPacketEstimator,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            n_divisor: 2.0,
            inter_packet: InterPacketEstimator::default(),
        }
    }
}

/// Visit log kept by a node during inference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingStats {
    visits: BTreeMap<u32, Vec<u64>>,
    all_visits: Vec<u64>,
    first_seen: Option<u32>,
    stop_count: u32,
    stopped: bool,
}

impl TimingStats {
    pub fn new(stop_count: u32) -> Self {
        TimingStats {
            visits: BTreeMap::new(),
            all_visits: Vec::new(),
            first_seen: None,
            stop_count,
            stopped: false,
        }
    }

    pub fn first_seen(&self) -> Option<u32> {
        self.first_seen
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn stop_count(&self) -> u32 {
        self.stop_count
    }

    /// Visit times of `source`, in increasing order.
    pub fn visits_of(&self, source: u32) -> &[u64] {
        self.visits.get(&source).map_or(&[], Vec::as_slice)
    }

    /// `k(u)`: distinct sources seen so far.
    pub fn sources_seen(&self) -> usize {
        self.visits.len()
    }

    /// Logs a visit of `source` at round `now`. Returns false when the log
    /// is already closed or `now` does not advance that source's times.
    pub fn record_visit(&mut self, source: u32, now: u64) -> bool {
        if self.stopped {
            return false;
        }
        let list = self.visits.entry(source).or_default();
        if list.last().is_some_and(|&t| t >= now) {
            return false;
        }
        list.push(now);
        self.all_visits.push(now);
        let first = *self.first_seen.get_or_insert(source);
        if self.visits[&first].len() >= self.stop_count as usize {
            self.stopped = true;
        }
        true
    }

    /// Reopens a closed log until the first-seen source accumulates
    /// `extra` more visits.
    pub fn extend(&mut self, extra: u32) {
        self.stop_count = self.stop_count.saturating_add(extra);
        self.stopped = false;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountEstimate {
    pub n_hat: f64,
    pub k_hat: f64,
    pub mean_visit: f64,
    pub mean_packet: f64,
}

fn mean_gap(times: &[u64]) -> Option<f64> {
    (times.len() >= 2).then(|| (times[times.len() - 1] - times[0]) as f64 / (times.len() - 1) as f64)
}

/// Estimates `(n_hat, k_hat)` from a node's visit log:
/// `n_hat = T_visit / divisor`, `k_hat = T_visit / T_packet`, where
/// `T_visit` averages each seen source's mean return gap.
pub fn estimate_counts(stats: &TimingStats, cfg: &EstimatorConfig) -> Result<CountEstimate> {
    let per_source: Vec<f64> = stats.visits.values().filter_map(|t| mean_gap(t)).collect();
    if per_source.is_empty() {
        return Err(Error::EstimateUnavailable);
    }
    let mean_visit = per_source.iter().sum::<f64>() / per_source.len() as f64;

    let mean_packet = match cfg.inter_packet {
        InterPacketEstimator::ConsecutiveGaps => {
            mean_gap(&stats.all_visits).ok_or(Error::EstimateUnavailable)?
        }
        InterPacketEstimator::PairedOffsets => {
            let lists: Vec<&Vec<u64>> = stats.visits.values().collect();
            let mut total = 0.0;
            let mut pairs = 0usize;
            for (i, a) in lists.iter().enumerate() {
                for b in &lists[i + 1..] {
                    let j = a.len().min(b.len());
                    let offset: f64 = a[..j].iter().zip(&b[..j]).map(|(&x, &y)| x.abs_diff(y) as f64).sum();
                    total += offset / j as f64;
                    pairs += 1;
                }
            }
            // Both orders of a pair contribute the same absolute offset.
            // A lone source is its own successor: T_packet = T_visit.
            if pairs == 0 {
                mean_visit
            } else {
                total / pairs as f64
            }
        }
    };
    if !(mean_packet > 0.0) || !(cfg.n_divisor > 0.0) {
        return Err(Error::EstimateUnavailable);
    }
    Ok(CountEstimate {
        n_hat: mean_visit / cfg.n_divisor,
        k_hat: mean_visit / mean_packet,
        mean_visit,
        mean_packet,
    })
}

/// Rounds until a single walk from `start` has visited every node.
pub fn measure_cover_time<R: Rng + ?Sized>(g: &GraphTopology, start: usize, rng: &mut R) -> Result<u64> {
    let n = g.n();
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut remaining = n - 1;
    let mut at = start;
    let mut rounds = 0;
    while remaining > 0 {
        at = step_walk(at, g, rng)?;
        rounds += 1;
        if !seen[at] {
            seen[at] = true;
            remaining -= 1;
        }
    }
    Ok(rounds)
}

/// Arrival statistics of one node under independent walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VisitSummary {
    pub visits: u64,
    pub first: u64,
    pub last: u64,
}

impl VisitSummary {
    /// Mean gap between consecutive arrivals of any walker.
    pub fn mean_gap(&self) -> Option<f64> {
        (self.visits >= 2).then(|| (self.last - self.first) as f64 / (self.visits - 1) as f64)
    }
}

/// Runs independent simple random walks from `starts` for `rounds` rounds
/// (every walker steps once per round) and summarises arrivals per node.
pub fn observe_visits<R: Rng + ?Sized>(
    g: &GraphTopology,
    starts: &[usize],
    rounds: u64,
    rng: &mut R,
) -> Result<Vec<VisitSummary>> {
    let mut summary = vec![VisitSummary::default(); g.n()];
    let mut at: Vec<usize> = starts.to_vec();
    for t in 1..=rounds {
        for pos in at.iter_mut() {
            *pos = step_walk(*pos, g, rng)?;
            let s = &mut summary[*pos];
            if s.visits == 0 {
                s.first = t;
            }
            s.visits += 1;
            s.last = t;
        }
    }
    Ok(summary)
}
