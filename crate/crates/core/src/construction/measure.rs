//! Equal-split probability measure on the deepest level of the tree.

use serde::{Deserialize, Serialize};

use crate::construction::tree::GenerationTree;
use crate::content::frostman::{ball_masses, TreeMeasureView};
use crate::error::{Error, Result};
use crate::gridspace::GridSpace;
use crate::real::{compensated_sum, Real};

/// Weights of the level-`depth` nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMeasure {
    pub weights: Vec<(usize, f64)>,
}

impl TreeMeasure {
    pub fn total(&self) -> f64 {
        compensated_sum(self.weights.iter().map(|w| w.1))
    }

    /// Atoms at the leaves' boundary cells; leaves sharing a cell are merged.
    pub fn view<T: Real>(&self, tree: &GenerationTree) -> TreeMeasureView<T> {
        let mut atoms: Vec<(usize, f64)> = self.weights.iter().map(|&(n, w)| (tree.nodes[n].omega, w)).collect();
        atoms.sort_by_key(|a| a.0);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(atoms.len());
        for (cell, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == cell => last.1 += T::of(w),
                _ => merged.push((cell, T::of(w))),
            }
        }
        TreeMeasureView::new(merged)
    }
}

/// Splits each node's mass equally among the children whose subtrees reach
/// the full depth; halted branches pass their share to surviving siblings.
pub fn build_tree_measure(tree: &GenerationTree) -> Result<TreeMeasure> {
    let depth = tree.params.depth;
    let mut survives = vec![false; tree.nodes.len()];
    for node in tree.nodes.iter().rev() {
        survives[node.id] = node.level == depth || node.children.iter().any(|&c| survives[c]);
    }
    if tree.nodes.is_empty() || !survives[0] {
        return Err(Error::NoCompleteBranch);
    }
    let mut weight = vec![0.0f64; tree.nodes.len()];
    weight[0] = 1.0;
    for node in &tree.nodes {
        if !survives[node.id] || node.level == depth {
            continue;
        }
        let alive: Vec<usize> = node.children.iter().copied().filter(|&c| survives[c]).collect();
        let share = weight[node.id] / alive.len() as f64;
        for c in alive {
            weight[c] = share;
        }
    }
    let weights = tree.leaves().iter().filter(|&&n| survives[n]).map(|&n| (n, weight[n])).collect();
    Ok(TreeMeasure { weights })
}

/// Worst ratio `nu(B(x, r)) / (eta^-(s-eps) (r/r0)^(s-eps))` over atoms `x`
/// and dyadic radii `r = r0 2^-j` in `[eta^K r0, r0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanScan {
    pub max_ratio: f64,
    pub worst_radius: f64,
    pub worst_atom: usize,
    pub radii: Vec<f64>,
}

impl FrostmanScan {
    pub fn passes(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-6
    }
}

pub fn frostman_scan<T: Real>(
    space: &GridSpace<T>,
    tree: &GenerationTree,
    measure: &TreeMeasure,
    s: f64,
    eps: f64,
) -> FrostmanScan {
    let view: TreeMeasureView<T> = measure.view(tree);
    let (r0, eta) = (tree.params.r0, tree.params.eta);
    let finest = tree.radius_at(tree.params.depth);
    let t = s - eps;
    let mut radii = Vec::new();
    let mut r = r0;
    while r >= finest * (1.0 - 1e-12) {
        radii.push(r);
        r /= 2.0;
    }
    let mut scan = FrostmanScan { max_ratio: 0.0, worst_radius: r0, worst_atom: 0, radii: radii.clone() };
    for &r in &radii {
        let bound = eta.powf(-t) * (r / r0).powf(t);
        let masses = ball_masses(space, &view.atoms, T::of(r));
        for (k, m) in masses.into_iter().enumerate() {
            let ratio = m.f64() / bound;
            if ratio > scan.max_ratio {
                scan.max_ratio = ratio;
                scan.worst_radius = r;
                scan.worst_atom = view.atoms[k].0;
            }
        }
    }
    scan
}
