//! Deterministic discrete-event engine.
//!
//! Simulated time is kept as a 64-bit count of femtoseconds so that
//! per-link delays survive conversion from the closed-form millisecond
//! values without visible rounding, even when many legs are chained. Events
//! dequeue in `(time, seq)` order; `seq` is a monotonically increasing
//! insertion counter, so equal-time events are FIFO.
//!
//! ```
//! use coresim::simnet::{Action, Engine, SimTime, WirelessMode};
//! use coresim::topology::{NodeId, NodeKind};
//!
//! let mut engine: Engine<&str> = Engine::new(WirelessMode::ExpectedValue);
//! let bs = NodeId::new(NodeKind::BaseStation, 0);
//! engine
//!     .schedule(SimTime::from_ms(1.5), Action::Deliver { payload: "hello", to: bs })
//!     .unwrap();
//! let events = engine.run_until(SimTime::from_ms(2.0)).unwrap();
//! assert_eq!(events, 1);
//! ```

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::delay::{wired_delay, wireless_delay, DelayConfig, DelayParams};
use crate::topology::{NodeId, NodeKind, Topology, TopologyError};

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("causality violation: event at {event_ms} ms is before clock {clock_ms} ms")]
    PastTimeEvent { event_ms: f64, clock_ms: f64 },
    #[error("run_until target {target_ms} ms is before clock {clock_ms} ms")]
    PastTimeTarget { target_ms: f64, clock_ms: f64 },
    #[error(transparent)]
    Route(#[from] TopologyError),
}

// PartialEq on f64 fields above never sees NaN: times come from SimTime.
impl Eq for SimError {}

/// Simulated time, femtoseconds since simulation start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

pub const FS_PER_MS: u64 = 1_000_000_000_000;

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_ms(ms: f64) -> SimTime {
        SimTime((ms * FS_PER_MS as f64).round() as u64)
    }

    pub fn as_ms(&self) -> f64 {
        self.0 as f64 / FS_PER_MS as f64
    }

    pub fn saturating_sub(&self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl std::ops::Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.as_ms())
    }
}

/// What an event does when it fires.
#[derive(Debug, Clone, PartialEq)]
pub enum Action<P> {
    Deliver { payload: P, to: NodeId },
    Timer { owner: NodeId, tag: u32 },
}

/// A timestamped deliverable in the event queue.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent<P> {
    pub at: SimTime,
    pub seq: u64,
    pub action: Action<P>,
}

struct Queued<P> {
    at: SimTime,
    seq: u64,
    action: Action<P>,
}

impl<P> PartialEq for Queued<P> {
    fn eq(&self, other: &Self) -> bool {
        self.at == other.at && self.seq == other.seq
    }
}
impl<P> Eq for Queued<P> {}
impl<P> PartialOrd for Queued<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<P> Ord for Queued<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.seq).cmp(&(other.at, other.seq))
    }
}

/// One line of the optional event trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub at: SimTime,
    pub seq: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: String,
    pub size_bytes: u64,
}

impl TraceRecord {
    /// `t_ms seq src dst kind size_bytes`
    pub fn line(&self) -> String {
        format!(
            "{:.6} {} {} {} {} {}",
            self.at.as_ms(),
            self.seq,
            self.src,
            self.dst,
            self.kind,
            self.size_bytes
        )
    }
}

/// Wireless leg semantics for the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WirelessMode {
    /// Apply the analytic prefactor exactly; reproduces the closed forms.
    #[default]
    ExpectedValue,
    /// Draw geometric retransmission counts from a seeded generator.
    Stochastic { seed: u64 },
}

/// Single-threaded event loop. One instance per simulation; independent
/// instances share nothing.
pub struct Engine<P> {
    clock: SimTime,
    next_seq: u64,
    queue: BinaryHeap<Reverse<Queued<P>>>,
    trace: Vec<TraceRecord>,
    rng: Option<ChaCha8Rng>,
    wireless_mode: WirelessMode,
}

impl<P> Engine<P> {
    pub fn new(mode: WirelessMode) -> Engine<P> {
        let rng = match mode {
            WirelessMode::ExpectedValue => None,
            WirelessMode::Stochastic { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Engine {
            clock: SimTime::ZERO,
            next_seq: 0,
            queue: BinaryHeap::new(),
            trace: Vec::new(),
            rng,
            wireless_mode: mode,
        }
    }

    pub fn clock(&self) -> SimTime {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn record_trace(&mut self, rec: TraceRecord) {
        self.trace.push(rec);
    }

    /// Queue an action at absolute time `at`.
    pub fn schedule(&mut self, at: SimTime, action: Action<P>) -> Result<u64, SimError> {
        if at < self.clock {
            return Err(SimError::PastTimeEvent {
                event_ms: at.as_ms(),
                clock_ms: self.clock.as_ms(),
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Reverse(Queued { at, seq, action }));
        Ok(seq)
    }

    /// Pop the next event due at or before `t_end`, advancing the clock
    /// to its timestamp.
    pub fn pop_due(&mut self, t_end: SimTime) -> Option<SimEvent<P>> {
        let due = self
            .queue
            .peek()
            .map(|Reverse(q)| q.at <= t_end)
            .unwrap_or(false);
        if !due {
            return None;
        }
        let Reverse(q) = self.queue.pop().unwrap();
        self.clock = q.at;
        Some(SimEvent {
            at: q.at,
            seq: q.seq,
            action: q.action,
        })
    }

    /// Process (and drop) all events due by `t_end`; the clock ends at
    /// `t_end`. Returns the number of events processed.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<usize, SimError> {
        if t_end < self.clock {
            return Err(SimError::PastTimeTarget {
                target_ms: t_end.as_ms(),
                clock_ms: self.clock.as_ms(),
            });
        }
        let mut count = 0;
        while self.pop_due(t_end).is_some() {
            count += 1;
        }
        self.clock = t_end;
        Ok(count)
    }

    /// Delay of one link traversal for a message of `size_bytes`.
    pub fn link_delay(
        &mut self,
        size_bytes: f64,
        wireless: bool,
        p: &DelayParams,
        cfg: &DelayConfig,
    ) -> SimTime {
        if !wireless {
            return SimTime::from_ms(wired_delay(size_bytes, 1, p));
        }
        match self.wireless_mode {
            WirelessMode::ExpectedValue => SimTime::from_ms(wireless_delay(size_bytes, p, cfg)),
            WirelessMode::Stochastic { .. } => {
                let q = p.failure_prob;
                let rng = self.rng.as_mut().expect("stochastic mode has an RNG");
                let mut attempts = 1u64;
                while q > 0.0 && rng.gen::<f64>() < q {
                    attempts += 1;
                }
                let per_attempt =
                    8.0 * size_bytes / (p.wireless_bandwidth_mbps * 1000.0) + p.wireless_latency_ms;
                SimTime::from_ms(attempts as f64 * per_attempt)
            }
        }
    }

    /// Total traversal delay of `path` for a message of `size_bytes`,
    /// store-and-forward per hop. A single-node path costs nothing.
    pub fn transmit(
        &mut self,
        size_bytes: f64,
        path: &[NodeId],
        topo: &Topology,
        p: &DelayParams,
        cfg: &DelayConfig,
    ) -> Result<SimTime, SimError> {
        let mut total = SimTime::ZERO;
        for pair in path.windows(2) {
            if !topo.has_link(pair[0], pair[1]) {
                return Err(SimError::Route(TopologyError::NoRoute(pair[0], pair[1])));
            }
            let wireless = topo.is_wireless(pair[0], pair[1]);
            total = total + self.link_delay(size_bytes, wireless, p, cfg);
        }
        Ok(total)
    }
}

/// Convenience: is either endpoint a UE (the only wireless attachment)?
pub fn is_wireless_pair(a: NodeId, b: NodeId) -> bool {
    a.kind == NodeKind::Ue || b.kind == NodeKind::Ue
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::HopCounts;
    use crate::topology::{build_topology, Architecture};

    #[test]
    fn events_dequeue_in_time_then_seq_order() {
        let mut e: Engine<u32> = Engine::new(WirelessMode::ExpectedValue);
        let t5 = SimTime::from_ms(5.0);
        let t3 = SimTime::from_ms(3.0);
        let n = NodeId::new(NodeKind::Uce, 0);
        e.schedule(t5, Action::Timer { owner: n, tag: 1 }).unwrap();
        e.schedule(t3, Action::Timer { owner: n, tag: 2 }).unwrap();
        e.schedule(t5, Action::Timer { owner: n, tag: 3 }).unwrap();
        let order: Vec<u32> = std::iter::from_fn(|| e.pop_due(SimTime::from_ms(10.0)))
            .map(|ev| match ev.action {
                Action::Timer { tag, .. } => tag,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(order, vec![2, 1, 3]);
    }

    #[test]
    fn past_time_schedule_is_causality_error() {
        let mut e: Engine<u32> = Engine::new(WirelessMode::ExpectedValue);
        let n = NodeId::new(NodeKind::Uce, 0);
        e.schedule(SimTime::from_ms(2.0), Action::Timer { owner: n, tag: 0 })
            .unwrap();
        e.run_until(SimTime::from_ms(2.0)).unwrap();
        assert!(matches!(
            e.schedule(SimTime::from_ms(1.0), Action::Timer { owner: n, tag: 0 }),
            Err(SimError::PastTimeEvent { .. })
        ));
    }

    #[test]
    fn run_until_on_empty_queue_advances_clock() {
        let mut e: Engine<u32> = Engine::new(WirelessMode::ExpectedValue);
        assert_eq!(e.run_until(SimTime::from_ms(7.5)).unwrap(), 0);
        assert_eq!(e.clock(), SimTime::from_ms(7.5));
    }

    #[test]
    fn transmit_matches_closed_form_legs() {
        let p = DelayParams::default();
        let cfg = DelayConfig::default();
        let h = HopCounts::default();
        let t = build_topology(&h, Architecture::Icna, 1).unwrap();
        let mut e: Engine<u32> = Engine::new(WirelessMode::ExpectedValue);

        let bs1 = NodeId::new(NodeKind::BaseStation, 1);
        let uce = NodeId::new(NodeKind::Uce, 0);
        let path = t.route(bs1, uce).unwrap();
        let got = e.transmit(50.0, &path, &t, &p, &cfg).unwrap();
        assert!((got.as_ms() - 14.008).abs() < 1e-6);

        let ue = NodeId::new(NodeKind::Ue, 0);
        let path = t.route(ue, bs1).unwrap();
        let got = e.transmit(50.0, &path, &t, &p, &cfg).unwrap();
        assert!((got.as_ms() - 6.690909).abs() < 1e-6);

        let got = e.transmit(50.0, &[bs1], &t, &p, &cfg).unwrap();
        assert_eq!(got, SimTime::ZERO);
    }

    #[test]
    fn stochastic_with_zero_q_equals_prefactor_one() {
        let p = DelayParams {
            failure_prob: 0.0,
            ..Default::default()
        };
        let cfg = DelayConfig::default();
        let mut stoch: Engine<u32> = Engine::new(WirelessMode::Stochastic { seed: 42 });
        let got = stoch.link_delay(50.0, true, &p, &cfg);
        let expect = wireless_delay(50.0, &p, &cfg); // prefactor is 1 at q=0
        assert!((got.as_ms() - expect).abs() < 1e-9);
    }
}
