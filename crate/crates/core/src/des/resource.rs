use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seize {
    Granted,
    Queued,
}

/// A station with `capacity` identical servers and a FIFO wait line.
#[derive(Debug, Clone)]
pub struct Resource {
    name: String,
    capacity: usize,
    holders: Vec<u64>,
    waiting: VecDeque<u64>,
    busy_time: f64,
    last_change: f64,
    grants: u64,
}

impl Resource {
    pub fn new(name: impl Into<String>, capacity: usize) -> Result<Self> {
        let name = name.into();
        if capacity == 0 {
            return Err(Error::config(format!("stations.{name}"), "capacity must be at least 1"));
        }
        Ok(Resource {
            name,
            capacity,
            holders: Vec::with_capacity(capacity),
            waiting: VecDeque::new(),
            busy_time: 0.0,
            last_change: 0.0,
            grants: 0,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn in_use(&self) -> usize {
        self.holders.len()
    }

    pub fn queue_len(&self) -> usize {
        self.waiting.len()
    }

    pub fn is_idle(&self) -> bool {
        self.holders.is_empty() && self.waiting.is_empty()
    }

    pub fn holds(&self, uid: u64) -> bool {
        self.holders.contains(&uid)
    }

    /// Number of times a server was granted.
    pub fn grants(&self) -> u64 {
        self.grants
    }

    fn accrue(&mut self, now: f64) {
        self.busy_time += self.holders.len() as f64 * (now - self.last_change).max(0.0);
        self.last_change = now;
    }

    pub fn seize(&mut self, uid: u64, now: f64) -> Result<Seize> {
        if self.holders.contains(&uid) || self.waiting.contains(&uid) {
            return Err(Error::AlreadySeized {
                resource: self.name.clone(),
                uid,
            });
        }
        self.accrue(now);
        if self.holders.len() < self.capacity {
            self.holders.push(uid);
            self.grants += 1;
            Ok(Seize::Granted)
        } else {
            self.waiting.push_back(uid);
            Ok(Seize::Queued)
        }
    }

    /// Frees `uid`'s server; returns the waiting entity granted in its place.
    pub fn release(&mut self, uid: u64, now: f64) -> Result<Option<u64>> {
        let pos = self
            .holders
            .iter()
            .position(|&h| h == uid)
            .ok_or_else(|| Error::NotHolder {
                resource: self.name.clone(),
                uid,
            })?;
        self.accrue(now);
        self.holders.swap_remove(pos);
        let next = self.waiting.pop_front();
        if let Some(n) = next {
            self.holders.push(n);
            self.grants += 1;
        }
        Ok(next)
    }

    /// Server-seconds spent busy up to `now`.
    pub fn busy_time(&self, now: f64) -> f64 {
        self.busy_time + self.holders.len() as f64 * (now - self.last_change).max(0.0)
    }

    /// busy / (capacity × elapsed); zero for an empty horizon.
    pub fn utilization(&self, now: f64) -> f64 {
        if now <= 0.0 {
            return 0.0;
        }
        self.busy_time(now) / (self.capacity as f64 * now)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_server_fifo() {
        let mut r = Resource::new("cutter", 1).unwrap();
        assert_eq!(r.seize(1, 0.0).unwrap(), Seize::Granted);
        assert_eq!(r.seize(2, 0.0).unwrap(), Seize::Queued);
        assert_eq!(r.seize(3, 1.0).unwrap(), Seize::Queued);
        assert_eq!(r.release(1, 30.0).unwrap(), Some(2));
        assert!(r.holds(2));
        assert_eq!(r.release(2, 60.0).unwrap(), Some(3));
        assert_eq!(r.release(3, 90.0).unwrap(), None);
        assert_eq!(r.busy_time(100.0), 90.0);
        assert!((r.utilization(100.0) - 0.9).abs() < 1e-12);
    }

    #[test]
    fn two_servers_grant_both() {
        let mut r = Resource::new("x", 2).unwrap();
        assert_eq!(r.seize(1, 0.0).unwrap(), Seize::Granted);
        assert_eq!(r.seize(2, 0.0).unwrap(), Seize::Granted);
        assert_eq!(r.in_use(), 2);
        assert_eq!(r.busy_time(5.0), 10.0);
        assert_eq!(r.utilization(5.0), 1.0);
    }

    #[test]
    fn release_errors() {
        let mut r = Resource::new("x", 1).unwrap();
        assert!(matches!(r.release(3, 0.0), Err(Error::NotHolder { .. })));
        r.seize(1, 0.0).unwrap();
        assert!(matches!(r.seize(1, 0.0), Err(Error::AlreadySeized { .. })));
        r.release(1, 1.0).unwrap();
        assert!(r.release(1, 2.0).is_err());
        assert!(Resource::new("y", 0).is_err());
    }
}
