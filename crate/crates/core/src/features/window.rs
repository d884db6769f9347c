use alloc::vec::Vec;

use super::history::Metrics;
use crate::de::Strategy;

#[derive(Clone, Debug, PartialEq)]
pub struct WindowEntry {
    pub strategy: Strategy,
    pub metrics: Metrics,
    pub trial_fitness: f64,
    seq: u64,
}

/// Fixed-size window of improving applications.
///
/// While not full every improving application is appended. Once full, a new
/// entry replaces the oldest entry of the same operator; if that operator
/// has none, the entry with the highest trial fitness goes.
#[derive(Clone, Debug)]
pub struct MetricWindow {
    capacity: usize,
    entries: Vec<WindowEntry>,
    next_seq: u64,
}

impl MetricWindow {
    pub fn new(capacity: usize) -> Self {
        MetricWindow {
            capacity,
            entries: Vec::with_capacity(capacity),
            next_seq: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[WindowEntry] {
        &self.entries
    }

    /// Offers an application; ignored unless it improved on its parent.
    pub fn insert(&mut self, strategy: Strategy, metrics: Metrics, trial_fitness: f64) {
        if !(metrics[0] > 0.0) || self.capacity == 0 {
            return;
        }
        if self.entries.len() >= self.capacity {
            let victim = self
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.strategy == strategy)
                .min_by_key(|(_, e)| e.seq)
                .map(|(i, _)| i)
                .or_else(|| self.worst_index());
            if let Some(i) = victim {
                self.entries.remove(i);
            }
        }
        self.entries.push(WindowEntry {
            strategy,
            metrics,
            trial_fitness,
            seq: self.next_seq,
        });
        self.next_seq += 1;
    }

    /// Highest trial fitness; the earliest such entry on ties.
    fn worst_index(&self) -> Option<usize> {
        let mut worst: Option<usize> = None;
        for (i, e) in self.entries.iter().enumerate() {
            match worst {
                Some(w) if self.entries[w].trial_fitness >= e.trial_fitness => {}
                _ => worst = Some(i),
            }
        }
        worst
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}
