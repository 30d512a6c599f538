use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Arrival,
    CutDone,
    PickDone,
    FlipDone,
    ChillBatchDone,
    ExtractDone,
    RouteDone,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            EventKind::Arrival => "Arrival",
            EventKind::CutDone => "CutDone",
            EventKind::PickDone => "PickDone",
            EventKind::FlipDone => "FlipDone",
            EventKind::ChillBatchDone => "ChillBatchDone",
            EventKind::ExtractDone => "ExtractDone",
            EventKind::RouteDone => "RouteDone",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Event<P> {
    pub time: f64,
    /// Insertion counter, assigned by the queue.
    pub seq: u64,
    pub kind: EventKind,
    pub payload: P,
}

impl<P> PartialEq for Event<P> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}

impl<P> Eq for Event<P> {}

impl<P> PartialOrd for Event<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so that BinaryHeap (a max-heap) pops the earliest (time, seq) first.
impl<P> Ord for Event<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pending events ordered by (time, seq) plus the simulation clock.
#[derive(Debug)]
pub struct EventQueue<P> {
    heap: BinaryHeap<Event<P>>,
    clock: f64,
    next_seq: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            clock: 0.0,
            next_seq: 0,
        }
    }

    pub fn now(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Inserts an event and returns its sequence number.
    pub fn schedule(&mut self, time: f64, kind: EventKind, payload: P) -> Result<u64> {
        if !time.is_finite() {
            return Err(Error::NonFiniteTime(time));
        }
        if time < self.clock {
            return Err(Error::ScheduleInPast {
                time,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event {
            time,
            seq,
            kind,
            payload,
        });
        Ok(seq)
    }

    /// Schedules `delay` seconds after the current clock.
    pub fn schedule_in(&mut self, delay: f64, kind: EventKind, payload: P) -> Result<u64> {
        self.schedule(self.clock + delay, kind, payload)
    }

    /// Removes the earliest event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<Event<P>> {
        let e = self.heap.pop()?;
        self.clock = e.time;
        Some(e)
    }
}
