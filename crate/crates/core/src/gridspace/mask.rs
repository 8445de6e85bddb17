use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::gridspace::GridSpace;
use crate::real::Real;

/// A domain as a cell mask: `inside[i]` is true iff cell `i` belongs to the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainMask<T> {
    space: GridSpace<T>,
    inside: Vec<bool>,
}

impl<T: Real> DomainMask<T> {
    /// Validates that the inside set is nonempty, proper and stencil-connected.
    pub fn new(space: GridSpace<T>, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != space.len() {
            return Err(Error::InvalidMask(format!(
                "mask has {} cells, space has {}",
                inside.len(),
                space.len()
            )));
        }
        let count = inside.iter().filter(|b| **b).count();
        if count == 0 {
            return Err(Error::InvalidMask("no inside cell".into()));
        }
        if count == inside.len() {
            return Err(Error::InvalidMask("complement is empty".into()));
        }
        let mask = Self { space, inside };
        let comps = mask.component_count();
        if comps != 1 {
            return Err(Error::InvalidMask(format!(
                "inside set has {comps} connected components"
            )));
        }
        Ok(mask)
    }

    /// Rasterizes by cell-center membership.
    pub fn from_fn(space: GridSpace<T>, mut member: impl FnMut([T; 3]) -> bool) -> Result<Self> {
        let inside = (0..space.len()).map(|i| member(space.center(i))).collect();
        Self::new(space, inside)
    }

    pub fn space(&self) -> &GridSpace<T> {
        &self.space
    }

    #[inline]
    pub fn is_inside(&self, i: usize) -> bool {
        self.inside[i]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|b| **b).count()
    }

    pub fn inside_cells(&self) -> Vec<usize> {
        (0..self.inside.len()).filter(|&i| self.inside[i]).collect()
    }

    /// `|inside| * h^Q`.
    pub fn measure(&self) -> T {
        T::count(self.inside_count()) * self.space.cell_measure()
    }

    /// A complement cell that shares a face with an inside cell.
    pub fn is_boundary(&self, i: usize) -> bool {
        if self.inside[i] {
            return false;
        }
        let mut hit = false;
        self.space.for_each_face_neighbor(i, |j| hit |= self.inside[j]);
        hit
    }

    /// All boundary cells in index order.
    pub fn boundary_cells(&self) -> Vec<usize> {
        (0..self.inside.len()).filter(|&i| self.is_boundary(i)).collect()
    }

    /// Number of stencil-connected components of the inside set.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.inside.len()];
        let mut comps = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.inside.len() {
            if !self.inside[start] || seen[start] {
                continue;
            }
            comps += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                self.space.for_each_neighbor(u, |v, _| {
                    if self.inside[v] && !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                });
            }
        }
        comps
    }

    /// Minimal number of stencil hops from each inside cell to the complement
    /// (0 on the complement). Used as a sanity bracket for distance fields.
    pub fn hop_distances(&self) -> Vec<usize> {
        let mut hops = vec![usize::MAX; self.inside.len()];
        let mut queue = VecDeque::new();
        for i in 0..self.inside.len() {
            if !self.inside[i] {
                hops[i] = 0;
                queue.push_back(i);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = hops[u] + 1;
            self.space.for_each_neighbor(u, |v, _| {
                if hops[v] == usize::MAX {
                    hops[v] = next;
                    queue.push_back(v);
                }
            });
        }
        hops
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize) -> GridSpace<f64> {
        GridSpace::new(2, &[n, n], 1.0, &[0.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_empty_full_and_disconnected() {
        let s = space(6);
        assert!(DomainMask::new(s.clone(), vec![false; 36]).is_err());
        assert!(DomainMask::new(s.clone(), vec![true; 36]).is_err());
        let mut inside = vec![false; 36];
        inside[s.index([1, 1, 0])] = true;
        inside[s.index([4, 4, 0])] = true;
        assert!(DomainMask::new(s, inside).is_err());
    }

    #[test]
    fn diagonal_cells_are_connected() {
        let s = space(6);
        let mut inside = vec![false; 36];
        inside[s.index([1, 1, 0])] = true;
        inside[s.index([2, 2, 0])] = true;
        assert!(DomainMask::new(s, inside).is_ok());
    }

    #[test]
    fn square_boundary_count() {
        // 4x4 inside block in an 8x8 grid: 16 face-adjacent complement cells.
        let s = space(8);
        let mask = DomainMask::from_fn(s, |p| {
            (2.0..=5.0).contains(&p[0]) && (2.0..=5.0).contains(&p[1])
        })
        .unwrap();
        assert_eq!(mask.inside_count(), 16);
        assert_eq!(mask.boundary_cells().len(), 16);
    }
}
