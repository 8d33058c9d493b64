//! Event traces: one `round node event packet-id counter` line per event,
//! and a replay checker over them.

use std::collections::BTreeMap;
use std::io::Write;

use rcds_core::trace::{EventKind, PacketId, TraceEvent, TraceSink};

use super::{expect_end, field, lines};
use crate::error::{SimError, SimResult};

pub fn format_event(e: &TraceEvent) -> String {
    format!("{} {} {} {} {}", e.round, e.node, e.kind.as_str(), e.packet, e.counter)
}

pub fn parse_packet_id(s: &str) -> Option<PacketId> {
    let (tag, rest) = s.split_at_checked(1)?;
    match tag {
        "p" => Some(PacketId::Probe { source: rest.parse().ok()? }),
        "y" => Some(PacketId::Precoded { id: rest.parse().ok()? }),
        "x" => {
            let (s, c) = rest.split_once('.')?;
            Some(PacketId::SourceCopy {
                source: s.parse().ok()?,
                copy: c.parse().ok()?,
            })
        }
        _ => None,
    }
}

pub fn parse_event(line_no: usize, line: &str) -> SimResult<TraceEvent> {
    let mut t = line.split_whitespace();
    let round = field(line_no, t.next(), "round")?;
    let node = field(line_no, t.next(), "node")?;
    let kind = t
        .next()
        .and_then(EventKind::parse)
        .ok_or_else(|| SimError::parse(line_no, "bad event kind"))?;
    let packet = t
        .next()
        .and_then(parse_packet_id)
        .ok_or_else(|| SimError::parse(line_no, "bad packet ID"))?;
    let counter = field(line_no, t.next(), "counter")?;
    expect_end(line_no, t)?;
    Ok(TraceEvent {
        round,
        node,
        kind,
        packet,
        counter,
    })
}

pub fn parse_trace(text: &str) -> SimResult<Vec<TraceEvent>> {
    lines(text).map(|(ln, l)| parse_event(ln, l)).collect()
}

/// Sink writing events as text lines. The first IO error is kept and
/// later events are dropped.
pub struct TraceWriter<W: Write> {
    out: W,
    error: Option<std::io::Error>,
    pub written: u64,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        TraceWriter {
            out,
            error: None,
            written: 0,
        }
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for TraceWriter<W> {
    fn record(&mut self, event: TraceEvent) {
        if self.error.is_none() {
            match writeln!(self.out, "{}", format_event(&event)) {
                Ok(()) => self.written += 1,
                Err(e) => self.error = Some(e),
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplaySummary {
    pub events: usize,
    pub enqueues: usize,
    pub absorbs: usize,
    pub accepts: usize,
    pub discards: usize,
    pub packets: usize,
    pub last_round: u64,
    /// Rule violations found, one message per offending event.
    pub violations: Vec<String>,
}

/// Replays a trace and checks that rounds never go backwards, a packet's
/// counter never decreases, nothing happens to a packet after it was
/// absorbed or discarded, and (when `threshold` is given) no source copy is
/// absorbed below it.
pub fn replay(events: &[TraceEvent], threshold: Option<u64>) -> ReplaySummary {
    let mut s = ReplaySummary::default();
    // Last counter and retirement flag per packet.
    let mut state: BTreeMap<String, (u64, bool)> = BTreeMap::new();
    let mut round = 0;
    for (i, e) in events.iter().enumerate() {
        s.events += 1;
        match e.kind {
            EventKind::Enqueue => s.enqueues += 1,
            EventKind::Absorb => s.absorbs += 1,
            EventKind::Accept => s.accepts += 1,
            EventKind::Discard => s.discards += 1,
        }
        if e.round < round {
            s.violations.push(format!("event {i}: round went back to {}", e.round));
        }
        round = round.max(e.round);
        let entry = state.entry(e.packet.to_string()).or_insert((0, false));
        if entry.1 {
            s.violations.push(format!("event {i}: {} used after leaving circulation", e.packet));
        }
        if e.counter < entry.0 {
            s.violations.push(format!("event {i}: counter of {} decreased", e.packet));
        }
        entry.0 = e.counter;
        if matches!(e.kind, EventKind::Absorb | EventKind::Discard) {
            entry.1 = true;
        }
        if let (EventKind::Absorb, Some(t)) = (e.kind, threshold) {
            if e.counter < t {
                s.violations.push(format!("event {i}: {} absorbed at counter {} < {t}", e.packet, e.counter));
            }
        }
    }
    s.packets = state.len();
    s.last_round = round;
    s
}
