use alloc::collections::VecDeque;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use super::{DdqnError, Observation};

/// Capacity-bounded FIFO of observations.
#[derive(Clone, Debug)]
pub struct ReplayMemory {
    capacity: usize,
    items: VecDeque<Observation>,
}

impl ReplayMemory {
    pub fn new(capacity: usize) -> Self {
        ReplayMemory {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Appends, evicting the oldest observation when full.
    pub fn push(&mut self, obs: Observation) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(obs);
    }

    /// Oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Observation> + ExactSizeIterator + '_ {
        self.items.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Observation> {
        self.items.get(i)
    }

    /// Positions of a uniform sample without replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<usize>, DdqnError> {
        if batch_size == 0 || batch_size > self.items.len() {
            return Err(DdqnError::InsufficientMemory {
                have: self.items.len(),
                need: batch_size,
            });
        }
        Ok(index::sample(rng, self.items.len(), batch_size).into_vec())
    }

    /// Uniform sample without replacement.
    pub fn sample<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<&Observation>, DdqnError> {
        Ok(self
            .sample_indices(batch_size, rng)?
            .into_iter()
            .map(|i| &self.items[i])
            .collect())
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }
}
