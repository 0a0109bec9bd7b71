//! Fixed-capacity FIFO replay memory.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: VecDeque<T>,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, items: VecDeque::with_capacity(capacity.min(1 << 16)) }
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

    /// Append, evicting the oldest entry when full. Returns the evicted item.
    pub fn push(&mut self, item: T) -> Option<T> {
        let evicted = if self.items.len() == self.capacity {
            self.items.pop_front()
        } else {
            None
        };
        self.items.push_back(item);
        evicted
    }

    /// Uniform sample of `size` distinct entries, or `None` while the buffer
    /// holds fewer than `size`.
    pub fn sample<'a>(&'a self, size: usize, rng: &mut impl Rng) -> Option<Vec<&'a T>> {
        if size == 0 || self.items.len() < size {
            return None;
        }
        Some(
            index::sample(rng, self.items.len(), size)
                .into_iter()
                .map(|i| &self.items[i])
                .collect(),
        )
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.items.get(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(2);
        assert_eq!(b.push(1), None);
        assert_eq!(b.push(2), None);
        assert_eq!(b.push(3), Some(1));
        assert_eq!(b.iter().copied().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn undersized_buffer_is_not_ready() {
        let mut b = ReplayBuffer::new(10);
        b.push(1);
        let mut rng = seeds::substream(1, seeds::SAMPLING);
        assert!(b.sample(2, &mut rng).is_none());
    }

    #[test]
    fn full_sample_is_a_permutation() {
        let mut b = ReplayBuffer::new(8);
        (0..8).for_each(|i| {
            b.push(i);
        });
        let mut rng = seeds::substream(1, seeds::SAMPLING);
        let mut s: Vec<i32> = b.sample(8, &mut rng).unwrap().into_iter().copied().collect();
        s.sort();
        assert_eq!(s, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn inclusion_frequency_is_uniform() {
        let n = 20;
        let size = 5;
        let trials = 100_000;
        let mut b = ReplayBuffer::new(n);
        (0..n).for_each(|i| {
            b.push(i);
        });
        let mut rng = seeds::substream(2, seeds::SAMPLING);
        let mut counts = vec![0usize; n];
        for _ in 0..trials {
            for &i in b.sample(size, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        let p = size as f64 / n as f64;
        let mean = trials as f64 * p;
        let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() < 3.5 * sigma, "count {c}");
        }
    }
}
