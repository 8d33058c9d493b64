//! Per-round event trace hooks.
//!
//! The protocol engines report every packet movement and decision to a
//! [`TraceSink`]. The default sink discards events; the `rcds-sim` crate
//! renders them as `round node event packet-id counter` text lines.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketId {
    /// Inference walker launched by source `source`.
    Probe { source: u32 },
    /// Copy `copy` of source `source` circulating during pre-coding.
    SourceCopy { source: u32, copy: u32 },
    /// Pre-coded packet `id` circulating during Raptor coding.
    Precoded { id: u32 },
}

impl fmt::Display for PacketId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PacketId::Probe { source } => write!(f, "p{source}"),
            PacketId::SourceCopy { source, copy } => write!(f, "x{source}.{copy}"),
            PacketId::Precoded { id } => write!(f, "y{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// The node received the packet and queued it for forwarding.
    Enqueue,
    /// A pre-coding output node XORed a source copy into its pre-code.
    Absorb,
    /// A node XORed a pre-coded packet into its storage.
    Accept,
    /// The packet left circulation without being absorbed.
    Discard,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Enqueue => "enqueue",
            EventKind::Absorb => "absorb",
            EventKind::Accept => "accept",
            EventKind::Discard => "discard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "enqueue" => EventKind::Enqueue,
            "absorb" => EventKind::Absorb,
            "accept" => EventKind::Accept,
            "discard" => EventKind::Discard,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub round: u64,
    pub node: u32,
    pub kind: EventKind,
    pub packet: PacketId,
    /// Packet counter after the event.
    pub counter: u64,
}

pub trait TraceSink {
    fn record(&mut self, event: TraceEvent);
}

/// Sink that drops every event.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTrace;

impl TraceSink for NoTrace {
    #[inline]
    fn record(&mut self, _: TraceEvent) {}
}

impl TraceSink for alloc::vec::Vec<TraceEvent> {
    fn record(&mut self, event: TraceEvent) {
        self.push(event);
    }
}
