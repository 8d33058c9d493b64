//! RCDS-I and RCDS-II storage protocols.
//!
//! Both protocols run the same synchronous engine:
//!
//! 1. *Initialization*: every node draws its LT code degree `d_c ~ Omega_r`;
//!    every source draws `b ~ Omega_L` and launches `b` copies of its packet.
//! 2. *Pre-coding*: non-sources elect to become redundant nodes; together
//!    with the sources they form the pre-coding outputs, each drawing an
//!    in-degree `a(w)`. Copies random-walk and a pre-coding output absorbs
//!    (XORs) the first copies of distinct sources that arrive with a hop
//!    counter at or above its cover threshold.
//! 3. *Raptor coding*: every pre-coding output launches its block; a node
//!    XORs a pre-coded packet into its storage with probability `d_c / m`
//!    on the packet's first visit only. A packet is discarded on a revisit
//!    once its counter reaches the cover threshold.
//! 4. *Storage*: the accumulated XOR is the node's storage packet.
//!
//! RCDS-I nodes know `n` and `k`. RCDS-II nodes first run an inference
//! phase (one probe walk per source) and substitute their own estimates of
//! `n`, `k` and `m` everywhere.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::codec::{
    binomial_distribution, centralized_raptor_encode, precode_output_count, xor_combine, Block,
    DegreeDistribution, SystemParams,
};
use crate::error::{Error, Result};
use crate::network::{choose_sources, GraphTopology};
use crate::seed::{stream_rng, Stream};
use crate::trace::{EventKind, NoTrace, PacketId, TraceEvent, TraceSink};
use crate::walkers::{
    cover_threshold, estimate_counts, step_walk, EstimatorConfig, ForwardQueues, Packet, PacketKind,
    TimingStats,
};

/// Copies older than this many cover thresholds are retired when no node
/// can still absorb them.
pub const EXHAUSTION_FACTOR: u64 = 3;

/// Round budget of the pre-coding and Raptor-coding phases, in cover
/// thresholds.
pub const ABORT_FACTOR: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Rcds1,
    Rcds2,
    /// Storage filled by the centralised reference encoder.
    Centralized,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Rcds1 => "rcds1",
            Algorithm::Rcds2 => "rcds2",
            Algorithm::Centralized => "centralized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rcds1" => Algorithm::Rcds1,
            "rcds2" => Algorithm::Rcds2,
            "centralized" | "centralized-reference" => Algorithm::Centralized,
            _ => return None,
        })
    }
}

/// When a revisiting pre-coded packet is checked against the discard rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscardCheck {
    /// Compare the counter as received; discard takes precedence over the
    /// enqueue-and-increment rule.
    #[default]
    BeforeIncrement,
    /// Increment first, then compare.
    AfterIncrement,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOptions {
    pub estimator: EstimatorConfig,
    pub discard_check: DiscardCheck,
    /// A pre-coding output applies the `d_c / m` acceptance rule to its own
    /// block when launching it.
    pub origin_accepts: bool,
    /// Source nodes start their pre-code with their own packet.
    pub source_self_init: bool,
    /// Round budget of the inference phase; `None` derives one from the
    /// graph size and `C2`.
    pub inference_rounds: Option<u64>,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            estimator: EstimatorConfig::default(),
            discard_check: DiscardCheck::default(),
            origin_accepts: true,
            source_self_init: true,
            inference_rounds: None,
        }
    }
}

/// What a node believes about the network: `(n, k, m)` and the cover
/// threshold derived from its `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalView {
    pub n: f64,
    pub k: f64,
    pub m: usize,
    pub threshold: u64,
}

impl LocalView {
    /// Exact knowledge, as assumed by RCDS-I.
    pub fn exact(params: &SystemParams) -> Result<Self> {
        Ok(LocalView {
            n: params.n as f64,
            k: params.k as f64,
            m: params.m,
            threshold: cover_threshold(params.n as f64, params.c1)?,
        })
    }

    /// View built from local estimates; values are clamped so every derived
    /// probability and threshold is well defined.
    pub fn estimated(n_hat: f64, k_hat: f64, params: &SystemParams) -> Result<Self> {
        let k = k_hat.max(1.0);
        let n = n_hat.max(2.0);
        let m = precode_output_count(k, params.epsilon).max(1);
        Ok(LocalView {
            n,
            k,
            m,
            threshold: cover_threshold(n, params.c1)?,
        })
    }

    /// Probability that a non-source elects to be a redundant node,
    /// `(m - k) / (n - k)` clamped to `[0, 1]`.
    pub fn redundancy_probability(&self) -> f64 {
        let (num, den) = (self.m as f64 - self.k, self.n - self.k);
        if den <= 0.0 {
            return if num > 0.0 { 1.0 } else { 0.0 };
        }
        (num / den).clamp(0.0, 1.0)
    }

    pub fn acceptance_probability(&self, d_c: usize) -> f64 {
        (d_c as f64 / self.m as f64).min(1.0)
    }

    /// `a(w) ~ Binomial(k, E[b] / m)`.
    pub fn indegree_distribution(&self, eb: f64) -> Result<DegreeDistribution> {
        let trials = libm::round(self.k) as usize;
        binomial_distribution(trials, (eb / self.m as f64).min(1.0))
    }
}

/// Source positions and their packets.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub sources: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl Deployment {
    pub fn new(sources: Vec<usize>, blocks: Vec<Block>) -> Result<Self> {
        if sources.is_empty() || sources.len() != blocks.len() {
            return Err(Error::invalid("deployment", "need one block per source"));
        }
        let len = blocks[0].len();
        if let Some(b) = blocks.iter().find(|b| b.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                found: b.len(),
            });
        }
        let mut sorted = sources.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sources.len() {
            return Err(Error::invalid("deployment", "duplicate source node"));
        }
        Ok(Deployment { sources, blocks })
    }

    /// Chooses `params.k` sources and fills their payloads from seeded
    /// streams derived from `seed`.
    pub fn generate(g: &GraphTopology, params: &SystemParams, seed: u64) -> Result<Self> {
        let sources = choose_sources(g, params.k, &mut stream_rng(seed, Stream::Sources, 0))?;
        let mut payload_rng = stream_rng(seed, Stream::Payload, 0);
        let blocks = (0..params.k)
            .map(|_| Block::random(params.payload_len, &mut payload_rng))
            .collect();
        Ok(Deployment { sources, blocks })
    }

    pub fn k(&self) -> usize {
        self.sources.len()
    }
}

/// Per-node protocol state.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub source_index: Option<usize>,
    pub is_precode_output: bool,
    pub d_c: usize,
    pub a_w: usize,
    /// Sources absorbed from circulating copies, in absorption order.
    pub accepted_sources: Vec<usize>,
    /// Pre-code block and its source lineage.
    pub y: Block,
    pub y_lineage: Vec<usize>,
    /// Storage block and the pre-coded packet IDs folded into it.
    pub z: Block,
    pub z_ids: Vec<usize>,
    pub stats: Option<TimingStats>,
    pub view: LocalView,
    /// The view came from the network-wide median, not local inference.
    pub view_fallback: bool,
}

impl NodeState {
    fn new(id: usize, source_index: Option<usize>, payload_len: usize, view: LocalView) -> Self {
        NodeState {
            id,
            source_index,
            is_precode_output: false,
            d_c: 0,
            a_w: 0,
            accepted_sources: Vec::new(),
            y: Block::zero(payload_len),
            y_lineage: Vec::new(),
            z: Block::zero(payload_len),
            z_ids: Vec::new(),
            stats: None,
            view,
            view_fallback: false,
        }
    }

    pub fn is_source(&self) -> bool {
        self.source_index.is_some()
    }

    fn holds_source(&self, s: usize) -> bool {
        self.y_lineage.contains(&s) || self.accepted_sources.contains(&s)
    }

    fn can_absorb(&self, s: usize) -> bool {
        self.is_precode_output && self.accepted_sources.len() < self.a_w && !self.holds_source(s)
    }
}

/// Final storage packet of one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredPacket {
    pub d_c: usize,
    /// Pre-coded packet IDs XORed into `block`, sorted.
    pub precoded_ids: Vec<usize>,
    pub block: Block,
}

impl StoredPacket {
    /// A node that accepted nothing stores the zero block.
    pub fn is_empty(&self) -> bool {
        self.precoded_ids.is_empty()
    }
}

/// A pre-coding output block as launched in the Raptor-coding phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecodedPacket {
    pub origin: usize,
    /// Source indices XORed into `block`, sorted.
    pub lineage: Vec<usize>,
    pub block: Block,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PhaseTransmissions {
    pub inference: u64,
    pub precoding: u64,
    pub raptor: u64,
}

impl PhaseTransmissions {
    pub fn total(&self) -> u64 {
        self.inference + self.precoding + self.raptor
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Source copies retired without absorption.
    pub discarded_copies: usize,
    /// Pre-code slots (`a(w)` minus absorbed sources) left empty.
    pub unfilled_capacity: usize,
    /// Nodes whose view is the network-wide median estimate.
    pub fallback_views: usize,
    /// `(n_hat, k_hat, m_hat)` per node for RCDS-II.
    pub estimates: Vec<(f64, f64, usize)>,
    pub rounds: u64,
}

/// Everything the query side needs: storage packets with lineage, the
/// pre-code lineage table, transmission counts and the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct StorageOutcome {
    pub algorithm: Algorithm,
    pub params: SystemParams,
    pub sources: Vec<usize>,
    pub source_blocks: Vec<Block>,
    pub storage: Vec<StoredPacket>,
    pub precoded: Vec<PrecodedPacket>,
    pub transmissions: PhaseTransmissions,
    pub diagnostics: Diagnostics,
}

impl StorageOutcome {
    pub fn total_transmissions(&self) -> u64 {
        self.transmissions.total()
    }

    /// Lineage table `precode[w]` for the decoder.
    pub fn precode(&self) -> Vec<Vec<usize>> {
        self.precoded.iter().map(|p| p.lineage.clone()).collect()
    }

    /// Bit-exact audit: every pre-coded block is the XOR of its lineage and
    /// every storage block is the XOR of the pre-coded blocks it names.
    pub fn audit(&self) -> Result<bool> {
        let len = self.params.payload_len;
        for p in &self.precoded {
            if xor_combine(len, p.lineage.iter().map(|&s| &self.source_blocks[s]))? != p.block {
                return Ok(false);
            }
        }
        for s in &self.storage {
            if xor_combine(len, s.precoded_ids.iter().map(|&w| &self.precoded[w].block))? != s.block {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Synchronous protocol engine shared by RCDS-I and RCDS-II.
pub struct Engine<'a, R: Rng + ?Sized, T: TraceSink> {
    g: &'a GraphTopology,
    params: &'a SystemParams,
    opts: ProtocolOptions,
    dep: &'a Deployment,
    rng: &'a mut R,
    trace: &'a mut T,
    nodes: Vec<NodeState>,
    queues: ForwardQueues,
    packets: Vec<Packet>,
    packet_ids: Vec<PacketId>,
    /// Launches scheduled for the next round: `(receiver, handle)`.
    pending: Vec<(usize, u32)>,
    round: u64,
    tx: PhaseTransmissions,
    diag: Diagnostics,
    outputs: Vec<usize>,
    precoded: Vec<PrecodedPacket>,
    visited: Vec<bool>,
}

impl<'a, R: Rng + ?Sized, T: TraceSink> Engine<'a, R, T> {
    /// Sets up node state. Every node starts with the exact view; RCDS-II
    /// replaces it via [`Engine::inference_phase`] or
    /// [`Engine::set_views`].
    pub fn new(
        g: &'a GraphTopology,
        dep: &'a Deployment,
        params: &'a SystemParams,
        opts: ProtocolOptions,
        rng: &'a mut R,
        trace: &'a mut T,
    ) -> Result<Self> {
        params.validate()?;
        if params.n != g.n() {
            return Err(Error::invalid("n", "does not match the graph"));
        }
        if dep.k() != params.k {
            return Err(Error::invalid("k", "does not match the deployment"));
        }
        if dep.blocks.iter().any(|b| b.len() != params.payload_len) {
            return Err(Error::invalid("payload_len", "does not match the source blocks"));
        }
        if let Some(u) = (0..g.n()).find(|&u| g.degree(u) == 0) {
            return Err(Error::IsolatedNode(u));
        }
        let view = LocalView::exact(params)?;
        let mut source_of = vec![None; g.n()];
        for (i, &s) in dep.sources.iter().enumerate() {
            if s >= g.n() {
                return Err(Error::invalid("sources", "node ID out of range"));
            }
            source_of[s] = Some(i);
        }
        let nodes = (0..g.n())
            .map(|u| NodeState::new(u, source_of[u], params.payload_len, view))
            .collect();
        Ok(Engine {
            g,
            params,
            opts,
            dep,
            rng,
            trace,
            nodes,
            queues: ForwardQueues::new(g.n()),
            packets: Vec::new(),
            packet_ids: Vec::new(),
            pending: Vec::new(),
            round: 0,
            tx: PhaseTransmissions::default(),
            diag: Diagnostics::default(),
            outputs: Vec::new(),
            precoded: Vec::new(),
            visited: Vec::new(),
        })
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Source copies and pre-coded packets awaiting a transmission.
    pub fn packets_in_flight(&self) -> usize {
        self.queues.in_flight() + self.pending.len()
    }

    pub fn packet_counters(&self) -> impl Iterator<Item = u64> + '_ {
        self.pending
            .iter()
            .map(|&(_, h)| h)
            .chain((0..self.g.n()).flat_map(|u| self.queues.queue(u).iter().copied()))
            .map(|h| self.packets[h as usize].counter)
    }

    /// Installs per-node views (for example oracle estimates).
    pub fn set_views(&mut self, views: &[LocalView]) -> Result<()> {
        if views.len() != self.nodes.len() {
            return Err(Error::invalid("views", "need one view per node"));
        }
        for (node, view) in self.nodes.iter_mut().zip(views) {
            node.view = *view;
        }
        Ok(())
    }

    fn emit(&mut self, node: usize, kind: EventKind, handle: u32) {
        self.trace.record(TraceEvent {
            round: self.round,
            node: node as u32,
            kind,
            packet: self.packet_ids[handle as usize],
            counter: self.packets[handle as usize].counter,
        });
    }

    fn new_packet(&mut self, packet: Packet, id: PacketId) -> u32 {
        self.packets.push(packet);
        self.packet_ids.push(id);
        (self.packets.len() - 1) as u32
    }

    fn schedule_launch(&mut self, from: usize, handle: u32) -> Result<()> {
        let to = step_walk(from, self.g, self.rng)?;
        self.pending.push((to, handle));
        Ok(())
    }

    /// Advances one round: scheduled launches are delivered first, then
    /// every non-empty queue forwards its head-of-line packet.
    fn run_round<F>(&mut self, mut on_arrival: F) -> Result<u64>
    where
        F: FnMut(&mut Self, usize, u32) -> Result<bool>,
    {
        self.round += 1;
        let mut arrivals = core::mem::take(&mut self.pending);
        arrivals.extend(self.queues.depart(self.g, self.rng)?);
        for &(to, handle) in &arrivals {
            if on_arrival(self, to, handle)? {
                self.queues.push(to, handle);
            }
        }
        Ok(arrivals.len() as u64)
    }

    /// RCDS-II inference: one probe per source walks the graph and every
    /// node logs arrival times until its first-seen probe has visited it
    /// `C2` times, then estimates `(n, k)`. Nodes still undecided when the
    /// round budget runs out adopt the median of the completed estimates.
    pub fn inference_phase(&mut self) -> Result<()> {
        let c2 = self.params.c2;
        for node in &mut self.nodes {
            node.stats = Some(TimingStats::new(c2));
        }
        let budget = self.opts.inference_rounds.unwrap_or(
            // About fifty expected returns per C2 at the least-visited node.
            50 * c2 as u64 * (2 * self.g.edge_count() as u64).max(self.g.n() as u64),
        );
        for (i, &s) in self.dep.sources.iter().enumerate() {
            let probe = Packet::source_copy(s, i, Block::zero(0));
            let h = self.new_packet(probe, PacketId::Probe { source: i as u32 });
            self.schedule_launch(s, h)?;
        }

        let n = self.nodes.len();
        let mut estimates: Vec<Option<(f64, f64)>> = vec![None; n];
        let mut done = 0;
        let estimator = self.opts.estimator;
        let start = self.round;
        while done < n && self.round - start < budget {
            let moved = self.run_round(|eng, to, h| {
                eng.packets[h as usize].counter += 1;
                let source = eng.packets[h as usize].lineage[0] as u32;
                let now = eng.round;
                let stats = eng.nodes[to].stats.as_mut().expect("stats installed");
                if stats.record_visit(source, now) && stats.is_stopped() {
                    match estimate_counts(stats, &estimator) {
                        Ok(est) => {
                            estimates[to] = Some((est.n_hat, est.k_hat));
                            done += 1;
                        }
                        Err(Error::EstimateUnavailable) => stats.extend(c2),
                        Err(e) => return Err(e),
                    }
                }
                eng.emit(to, EventKind::Enqueue, h);
                Ok(true)
            })?;
            self.tx.inference += moved;
        }
        // Probes are retired once inference ends.
        self.queues.clear();
        self.pending.clear();

        let median = |mut xs: Vec<f64>| -> Option<f64> {
            if xs.is_empty() {
                return None;
            }
            xs.sort_by(f64::total_cmp);
            let mid = xs.len() / 2;
            Some(if xs.len() % 2 == 1 {
                xs[mid]
            } else {
                (xs[mid - 1] + xs[mid]) / 2.0
            })
        };
        let completed: Vec<(f64, f64)> = estimates.iter().flatten().copied().collect();
        let fallback = match (
            median(completed.iter().map(|e| e.0).collect()),
            median(completed.iter().map(|e| e.1).collect()),
        ) {
            (Some(n_med), Some(k_med)) => (n_med, k_med),
            _ => {
                return Err(Error::Aborted {
                    phase: "inference",
                    rounds: budget,
                })
            }
        };
        self.diag.estimates.clear();
        for (node, est) in self.nodes.iter_mut().zip(&estimates) {
            let (n_hat, k_hat) = est.unwrap_or(fallback);
            node.view = LocalView::estimated(n_hat, k_hat, self.params)?;
            node.view_fallback = est.is_none();
            self.diag.estimates.push((n_hat, k_hat, node.view.m));
        }
        self.diag.fallback_views = estimates.iter().filter(|e| e.is_none()).count();
        Ok(())
    }

    /// Draws `d_c` for every node and schedules the launch of `b(s_i)`
    /// copies of every source packet, all with counter zero.
    pub fn init(&mut self) -> Result<()> {
        let lt = self.params.lt_distribution()?;
        for node in &mut self.nodes {
            node.d_c = lt.sample(self.rng);
        }
        let left = self.params.left_degree.distribution()?;
        for (i, &s) in self.dep.sources.iter().enumerate() {
            let b = left.sample(self.rng);
            for c in 0..b {
                let copy = Packet::source_copy(s, i, self.dep.blocks[i].clone());
                let h = self.new_packet(
                    copy,
                    PacketId::SourceCopy {
                        source: i as u32,
                        copy: c as u32,
                    },
                );
                self.schedule_launch(s, h)?;
            }
        }
        Ok(())
    }

    fn elect_precode_outputs(&mut self) -> Result<()> {
        let eb = self.params.eb;
        for u in 0..self.nodes.len() {
            let node = &self.nodes[u];
            let elected = node.is_source() || self.rng.gen_bool(node.view.redundancy_probability());
            if !elected {
                continue;
            }
            let a_w = node.view.indegree_distribution(eb)?.sample(self.rng);
            let self_init = self.opts.source_self_init;
            let source_blocks = &self.dep.blocks;
            let node = &mut self.nodes[u];
            node.is_precode_output = true;
            node.a_w = a_w;
            if let (Some(i), true) = (node.source_index, self_init) {
                node.y = source_blocks[i].clone();
                node.y_lineage = vec![i];
            }
            self.outputs.push(u);
        }
        Ok(())
    }

    fn anyone_can_absorb(&self, source: usize) -> bool {
        self.outputs.iter().any(|&w| self.nodes[w].can_absorb(source))
    }

    /// Runs the pre-coding phase until every source copy is absorbed or
    /// retired.
    pub fn precoding_phase(&mut self) -> Result<()> {
        self.elect_precode_outputs()?;
        let max_threshold = self.nodes.iter().map(|n| n.view.threshold).max().unwrap_or(1);
        let budget = ABORT_FACTOR * max_threshold;
        let start = self.round;
        while self.packets_in_flight() > 0 {
            if self.round - start >= budget {
                return Err(Error::Aborted {
                    phase: "pre-coding",
                    rounds: budget,
                });
            }
            let moved = self.run_round(|eng, to, h| {
                let source = eng.packets[h as usize].lineage[0];
                let counter = eng.packets[h as usize].counter;
                let threshold = eng.nodes[to].view.threshold;
                if counter >= threshold && eng.nodes[to].can_absorb(source) {
                    let node = &mut eng.nodes[to];
                    node.y.xor_assign(&eng.packets[h as usize].payload);
                    node.accepted_sources.push(source);
                    eng.emit(to, EventKind::Absorb, h);
                    return Ok(false);
                }
                if counter > EXHAUSTION_FACTOR * threshold && !eng.anyone_can_absorb(source) {
                    eng.diag.discarded_copies += 1;
                    eng.emit(to, EventKind::Discard, h);
                    return Ok(false);
                }
                eng.packets[h as usize].counter += 1;
                eng.emit(to, EventKind::Enqueue, h);
                Ok(true)
            })?;
            self.tx.precoding += moved;
        }

        for &w in &self.outputs {
            let node = &mut self.nodes[w];
            self.diag.unfilled_capacity += node.a_w - node.accepted_sources.len();
            node.y_lineage.extend_from_slice(&node.accepted_sources);
            node.y_lineage.sort_unstable();
        }
        Ok(())
    }

    /// Storage decision for a first visit of pre-coded packet `j` at `u`.
    fn first_visit(&mut self, u: usize, j: usize, h: u32) {
        let m_total = self.precoded.len();
        self.visited[u * m_total + j] = true;
        let p = self.nodes[u].view.acceptance_probability(self.nodes[u].d_c);
        if self.rng.gen_bool(p) {
            let node = &mut self.nodes[u];
            node.z.xor_assign(&self.precoded[j].block);
            node.z_ids.push(j);
            self.emit(u, EventKind::Accept, h);
        }
    }

    /// Launches every pre-coding output block and runs the walks until all
    /// of them are discarded.
    pub fn raptor_coding_phase(&mut self) -> Result<()> {
        self.precoded = self
            .outputs
            .iter()
            .map(|&w| PrecodedPacket {
                origin: w,
                lineage: self.nodes[w].y_lineage.clone(),
                block: self.nodes[w].y.clone(),
            })
            .collect();
        let m_total = self.precoded.len();
        self.visited = vec![false; self.nodes.len() * m_total];
        let mut handle_to_j = vec![usize::MAX; self.packets.len()];

        for j in 0..m_total {
            let origin = self.precoded[j].origin;
            let packet = Packet {
                kind: PacketKind::Precoded,
                origin,
                counter: 0,
                payload: Block::zero(0),
                lineage: self.precoded[j].lineage.clone(),
            };
            let h = self.new_packet(packet, PacketId::Precoded { id: j as u32 });
            handle_to_j.push(j);
            if self.opts.origin_accepts {
                self.first_visit(origin, j, h);
            } else {
                self.visited[origin * m_total + j] = true;
            }
            self.schedule_launch(origin, h)?;
        }

        let max_threshold = self.nodes.iter().map(|n| n.view.threshold).max().unwrap_or(1);
        let budget = ABORT_FACTOR * max_threshold;
        let start = self.round;
        let discard_check = self.opts.discard_check;
        while self.packets_in_flight() > 0 {
            if self.round - start >= budget {
                return Err(Error::Aborted {
                    phase: "raptor-coding",
                    rounds: budget,
                });
            }
            let moved = self.run_round(|eng, to, h| {
                let j = handle_to_j[h as usize];
                if !eng.visited[to * m_total + j] {
                    eng.first_visit(to, j, h);
                    eng.packets[h as usize].counter += 1;
                    eng.emit(to, EventKind::Enqueue, h);
                    return Ok(true);
                }
                let threshold = eng.nodes[to].view.threshold;
                let counter = &mut eng.packets[h as usize].counter;
                let discard = match discard_check {
                    DiscardCheck::BeforeIncrement => *counter >= threshold,
                    DiscardCheck::AfterIncrement => {
                        *counter += 1;
                        *counter >= threshold
                    }
                };
                if discard {
                    eng.emit(to, EventKind::Discard, h);
                    return Ok(false);
                }
                if discard_check == DiscardCheck::BeforeIncrement {
                    *counter += 1;
                }
                eng.emit(to, EventKind::Enqueue, h);
                Ok(true)
            })?;
            self.tx.raptor += moved;
        }
        Ok(())
    }

    /// Final counters of the pre-coded packets, indexed by pre-coded ID.
    pub fn precoded_counters(&self) -> Vec<u64> {
        self.packets
            .iter()
            .filter(|p| p.kind == PacketKind::Precoded)
            .map(|p| p.counter)
            .collect()
    }

    /// Storage phase: freezes every node's accumulated XOR.
    pub fn finish(self, algorithm: Algorithm) -> StorageOutcome {
        let mut diag = self.diag;
        diag.rounds = self.round;
        let storage = self
            .nodes
            .into_iter()
            .map(|node| {
                let mut ids = node.z_ids;
                ids.sort_unstable();
                StoredPacket {
                    d_c: node.d_c,
                    precoded_ids: ids,
                    block: node.z,
                }
            })
            .collect();
        StorageOutcome {
            algorithm,
            params: self.params.clone(),
            sources: self.dep.sources.clone(),
            source_blocks: self.dep.blocks.clone(),
            storage,
            precoded: self.precoded,
            transmissions: self.tx,
            diagnostics: diag,
        }
    }
}

/// RCDS-I initialization: node state with `d_c` drawn and source copies
/// scheduled for launch.
pub fn rcds1_init<'a, R: Rng + ?Sized, T: TraceSink>(
    g: &'a GraphTopology,
    dep: &'a Deployment,
    params: &'a SystemParams,
    opts: ProtocolOptions,
    rng: &'a mut R,
    trace: &'a mut T,
) -> Result<Engine<'a, R, T>> {
    let mut engine = Engine::new(g, dep, params, opts, rng, trace)?;
    engine.init()?;
    Ok(engine)
}

pub fn rcds1_run<R: Rng + ?Sized>(
    g: &GraphTopology,
    dep: &Deployment,
    params: &SystemParams,
    opts: ProtocolOptions,
    rng: &mut R,
) -> Result<StorageOutcome> {
    rcds1_run_traced(g, dep, params, opts, rng, &mut NoTrace)
}

pub fn rcds1_run_traced<R: Rng + ?Sized, T: TraceSink>(
    g: &GraphTopology,
    dep: &Deployment,
    params: &SystemParams,
    opts: ProtocolOptions,
    rng: &mut R,
    trace: &mut T,
) -> Result<StorageOutcome> {
    let mut engine = Engine::new(g, dep, params, opts, rng, trace)?;
    engine.init()?;
    engine.precoding_phase()?;
    engine.raptor_coding_phase()?;
    Ok(engine.finish(Algorithm::Rcds1))
}

pub fn rcds2_run<R: Rng + ?Sized>(
    g: &GraphTopology,
    dep: &Deployment,
    params: &SystemParams,
    opts: ProtocolOptions,
    rng: &mut R,
) -> Result<StorageOutcome> {
    rcds2_run_traced(g, dep, params, opts, rng, &mut NoTrace)
}

pub fn rcds2_run_traced<R: Rng + ?Sized, T: TraceSink>(
    g: &GraphTopology,
    dep: &Deployment,
    params: &SystemParams,
    opts: ProtocolOptions,
    rng: &mut R,
    trace: &mut T,
) -> Result<StorageOutcome> {
    let mut engine = Engine::new(g, dep, params, opts, rng, trace)?;
    engine.inference_phase()?;
    engine.init()?;
    engine.precoding_phase()?;
    engine.raptor_coding_phase()?;
    Ok(engine.finish(Algorithm::Rcds2))
}

/// RCDS-II with the inference phase replaced by injected views.
pub fn rcds2_run_with_views<R: Rng + ?Sized>(
    g: &GraphTopology,
    dep: &Deployment,
    params: &SystemParams,
    opts: ProtocolOptions,
    views: &[LocalView],
    rng: &mut R,
) -> Result<StorageOutcome> {
    let mut trace = NoTrace;
    let mut engine = Engine::new(g, dep, params, opts, rng, &mut trace)?;
    engine.set_views(views)?;
    engine.init()?;
    engine.precoding_phase()?;
    engine.raptor_coding_phase()?;
    Ok(engine.finish(Algorithm::Rcds2))
}

/// Reference storage: node `u` keeps the `u`-th symbol of a centrally
/// encoded Raptor stream. No packets move.
pub fn centralized_storage<R: Rng + ?Sized>(
    dep: &Deployment,
    params: &SystemParams,
    rng: &mut R,
) -> Result<StorageOutcome> {
    let enc = centralized_raptor_encode(&dep.blocks, params, params.n, rng)?;
    let precoded = enc
        .precode
        .into_iter()
        .zip(enc.intermediates)
        .enumerate()
        .map(|(w, (lineage, block))| PrecodedPacket {
            origin: w,
            lineage,
            block,
        })
        .collect();
    let storage = enc
        .symbols
        .into_iter()
        .map(|s| StoredPacket {
            d_c: s.intermediates.len(),
            precoded_ids: s.intermediates,
            block: s.block,
        })
        .collect();
    Ok(StorageOutcome {
        algorithm: Algorithm::Centralized,
        params: params.clone(),
        sources: dep.sources.clone(),
        source_blocks: dep.blocks.clone(),
        storage,
        precoded,
        transmissions: PhaseTransmissions::default(),
        diagnostics: Diagnostics::default(),
    })
}

/// Runs `algorithm` with default options.
pub fn run_algorithm<R: Rng + ?Sized>(
    algorithm: Algorithm,
    g: &GraphTopology,
    dep: &Deployment,
    params: &SystemParams,
    opts: ProtocolOptions,
    rng: &mut R,
) -> Result<StorageOutcome> {
    match algorithm {
        Algorithm::Rcds1 => rcds1_run(g, dep, params, opts, rng),
        Algorithm::Rcds2 => rcds2_run(g, dep, params, opts, rng),
        Algorithm::Centralized => centralized_storage(dep, params, rng),
    }
}
