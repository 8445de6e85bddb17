//! Priority-queue plumbing shared by the grid searches.

use std::cmp::Ordering;

use crate::real::Real;

/// Min-heap entry: smaller key pops first, ties broken by cell index.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MinEntry<T> {
    pub key: T,
    pub cell: usize,
}

impl<T: Real> PartialEq for MinEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for MinEntry<T> {}

impl<T: Real> PartialOrd for MinEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for MinEntry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .partial_cmp(&self.key)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

/// Per-search state over the whole grid, reset in O(1) by bumping an epoch.
pub(crate) struct Scratch<T> {
    pub g: Vec<T>,
    pub pred: Vec<u32>,
    stamp: Vec<u32>,
    closed: Vec<u32>,
    epoch: u32,
}

impl<T: Real> Scratch<T> {
    pub fn new(len: usize) -> Self {
        Self {
            g: vec![T::infinity(); len],
            pred: vec![u32::MAX; len],
            stamp: vec![0; len],
            closed: vec![0; len],
            epoch: 0,
        }
    }

    pub fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.closed.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    #[inline]
    pub fn g(&self, i: usize) -> T {
        if self.stamp[i] == self.epoch {
            self.g[i]
        } else {
            T::infinity()
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, g: T, pred: usize) {
        self.stamp[i] = self.epoch;
        self.g[i] = g;
        self.pred[i] = pred as u32;
    }

    #[inline]
    pub fn is_closed(&self, i: usize) -> bool {
        self.closed[i] == self.epoch
    }

    #[inline]
    pub fn close(&mut self, i: usize) {
        self.closed[i] = self.epoch;
    }

    #[inline]
    pub fn pred(&self, i: usize) -> Option<usize> {
        if self.stamp[i] == self.epoch && self.pred[i] != u32::MAX {
            Some(self.pred[i] as usize)
        } else {
            None
        }
    }
}
