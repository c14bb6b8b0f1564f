//! Continuous-time discrete-event scheduler.
//!
//! Time is measured in years since simulation start. Pending events are kept
//! in a binary heap ordered by `(fire_time, sequence)`, where `sequence` is a
//! per-scheduler insertion counter: events scheduled for the same instant
//! fire in the order they were inserted.

mod rng;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use thiserror::Error;

pub use rng::{RngRegistry, RngStream, Substream};

/// Years since simulation start (burn-in included).
pub type SimTime = f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("event scheduled at {at} but clock is already {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("invalid rate {0}: must be positive and finite")]
    InvalidRate(f64),
    #[error("categorical weights must be non-empty, non-negative and have a positive sum")]
    InvalidWeights,
}

/// Stable identifier of a person; never reused within a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Symbolic message tag, e.g. `VZV_EXPOSURE`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MessageKind(pub &'static str);

/// Inter-agent message. `payload` carries pack-specific detail such as the
/// type of an exposure source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Message<P = ()> {
    pub sender: AgentId,
    pub recipient: AgentId,
    pub kind: MessageKind,
    pub delivery_time: SimTime,
    pub payload: P,
}

struct Entry<E> {
    time: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pending-event queue and simulation clock of one realization.
pub struct Scheduler<E> {
    queue: BinaryHeap<Entry<E>>,
    now: SimTime,
    next_seq: u64,
    processed: u64,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            queue: BinaryHeap::new(),
            now: 0.0,
            next_seq: 0,
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    /// Total events handed to a model so far.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Enqueue `payload` to fire at `at`. Returns the event's sequence number.
    pub fn schedule(&mut self, at: SimTime, payload: E) -> Result<u64, EngineError> {
        if !(at >= self.now) {
            return Err(EngineError::ScheduleInPast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Entry {
            time: at,
            seq,
            payload,
        });
        Ok(seq)
    }

    /// Enqueue relative to the current clock.
    ///
    /// Panics on a negative or NaN delay: that is a model bug, not a
    /// recoverable condition.
    pub fn schedule_in(&mut self, delay: f64, payload: E) -> u64 {
        let at = self.now + delay;
        match self.schedule(at, payload) {
            Ok(seq) => seq,
            Err(e) => panic!("model scheduled an event in the past: {e}"),
        }
    }

    /// Fire time of the earliest pending event.
    pub fn peek_time(&self) -> Option<SimTime> {
        self.queue.peek().map(|e| e.time)
    }

    /// Pop the next event if it fires at or before `t_end`, advancing the clock.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        match self.queue.peek() {
            Some(e) if e.time <= t_end => {
                let e = self.queue.pop().expect("peeked");
                debug_assert!(e.time >= self.now);
                self.now = e.time;
                self.processed += 1;
                Some((e.time, e.payload))
            }
            _ => None,
        }
    }

    /// Process every event with fire time `<= t_end`, including events
    /// scheduled while processing, then set the clock to `t_end`.
    pub fn run_until<M>(&mut self, t_end: SimTime, model: &mut M) -> u64
    where
        M: Model<Event = E>,
    {
        assert!(
            t_end >= self.now,
            "run_until({t_end}) with clock at {}",
            self.now
        );
        let mut count = 0;
        while let Some((_, ev)) = self.pop_until(t_end) {
            model.handle(self, ev);
            count += 1;
        }
        self.now = t_end;
        count
    }
}

/// A simulation model driven by a [`Scheduler`].
pub trait Model {
    type Event;

    fn handle(&mut self, sched: &mut Scheduler<Self::Event>, event: Self::Event);
}
