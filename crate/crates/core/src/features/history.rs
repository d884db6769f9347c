use alloc::collections::VecDeque;

use crate::de::Strategy;

/// Number of improvement metrics tracked per application.
pub const METRICS: usize = 4;
const OPS: usize = Strategy::COUNT;

/// Improvements of a trial over parent, best parent, best-so-far and
/// median parent fitness (positive means the trial is better).
pub type Metrics = [f64; METRICS];

pub fn improvement_metrics(
    parent_f: f64,
    trial_f: f64,
    best_parent_f: f64,
    bsf: f64,
    median_f: f64,
) -> Metrics {
    [
        parent_f - trial_f,
        best_parent_f - trial_f,
        bsf - trial_f,
        median_f - trial_f,
    ]
}

/// Per-generation application counts and successful metric values.
///
/// Indexed `[metric][operator]`. Only strictly positive metric values are
/// successes; their running sum and maximum are kept in insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenerationRecord {
    pub applications: [u32; OPS],
    pub successes: [[u32; OPS]; METRICS],
    pub improvement_sum: [[f64; OPS]; METRICS],
    pub best_improvement: [[f64; OPS]; METRICS],
}

impl GenerationRecord {
    fn record(&mut self, op: Strategy, metrics: &Metrics) {
        let o = op.ordinal();
        self.applications[o] += 1;
        for (m, &value) in metrics.iter().enumerate() {
            if value > 0.0 {
                self.successes[m][o] += 1;
                self.improvement_sum[m][o] += value;
                if value > self.best_improvement[m][o] {
                    self.best_improvement[m][o] = value;
                }
            }
        }
    }
}

/// Ring of the most recent generation records, oldest first.
#[derive(Clone, Debug)]
pub struct OperatorHistory {
    capacity: usize,
    records: VecDeque<GenerationRecord>,
}

impl OperatorHistory {
    /// `capacity` is the number of generations kept (at least 1).
    pub fn new(capacity: usize) -> Self {
        let capacity = capacity.max(1);
        OperatorHistory {
            capacity,
            records: VecDeque::with_capacity(capacity + 1),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Starts a new generation, dropping the oldest beyond capacity.
    pub fn rotate(&mut self) {
        self.records.push_back(GenerationRecord::default());
        while self.records.len() > self.capacity {
            self.records.pop_front();
        }
    }

    /// Records one application in the current generation.
    pub fn record(&mut self, op: Strategy, metrics: &Metrics) {
        if self.records.is_empty() {
            self.rotate();
        }
        if let Some(current) = self.records.back_mut() {
            current.record(op, metrics);
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records, oldest first.
    pub fn records(&self) -> impl ExactSizeIterator<Item = &GenerationRecord> + '_ {
        self.records.iter()
    }

    pub fn current(&self) -> Option<&GenerationRecord> {
        self.records.back()
    }

    pub fn clear(&mut self) {
        self.records.clear();
    }
}
