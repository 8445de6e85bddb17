//! Assembly of John paths from the tree's chain paths, and the empirical John
//! constant of a path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::tree::GenerationTree;
use crate::error::{Error, Result};
use crate::gridspace::field::DistanceField;
use crate::gridspace::mask::DomainMask;
use crate::gridspace::path::{GridPath, Router};
use crate::real::Real;

/// Length and minimal `d` of the level-`level` chain segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelPiece {
    pub level: usize,
    pub radius: f64,
    pub length: f64,
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JohnPath<T> {
    pub node: usize,
    /// From `z0` to the node's boundary cell.
    pub path: GridPath<T>,
    pub pieces: Vec<LevelPiece>,
    /// `max_j max(length_j / radius_j, radius_j / clearance_j)`; 1 when there are no pieces.
    pub m: f64,
    pub john_constant: f64,
}

/// `max remaining(z) / max(d(z), h)` over all vertices but the last.
///
/// The terminal vertex may be a complement cell; any other complement vertex
/// is an error. A single-vertex path has constant 0.
pub fn john_constant_of_path<T: Real>(path: &GridPath<T>, mask: &DomainMask<T>, dfield: &DistanceField<T>) -> Result<T> {
    let h = mask.space().h();
    let cells = path.cells();
    let mut worst = T::zero();
    for (&c, &rem) in cells.iter().zip(path.remaining()).take(cells.len() - 1) {
        if !mask.is_inside(c) {
            return Err(Error::PathLeavesDomain(c));
        }
        worst = worst.max(rem / dfield.get(c).max(h));
    }
    Ok(worst)
}

/// Path from `z0` through every ancestor's chain path to `node`'s seed, then a
/// geodesic to its boundary cell. Works at any level.
pub fn assemble_node_path<T: Real>(
    tree: &GenerationTree,
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    router: &mut Router<'_, T>,
    node: usize,
) -> Result<JohnPath<T>> {
    let space = mask.space();
    let target = tree.nodes.get(node).ok_or(Error::BrokenAncestry(node))?;
    let mut path = GridPath::single(tree.params.z0);
    let mut pieces = Vec::new();
    let mut m = 1.0f64;
    for &id in &tree.ancestry(node)[1..] {
        let n = &tree.nodes[id];
        let chain = n.chain.as_ref().ok_or(Error::BrokenAncestry(node))?;
        let piece = GridPath::from_cells(space, chain.cells.clone())?;
        path = path.concat(space, &piece).map_err(|_| Error::BrokenAncestry(node))?;
        m = m.max(chain.length / n.radius).max(n.radius / chain.domain_clearance);
        pieces.push(LevelPiece { level: n.level, radius: n.radius, length: chain.length, clearance: chain.domain_clearance });
    }
    let tail = router
        .route(target.seed, target.omega, |i| mask.is_inside(i))
        .ok_or(Error::NoPath { from: target.seed, to: target.omega })?;
    path = path.concat(space, &tail)?;
    let john_constant = john_constant_of_path(&path, mask, dfield)?.f64();
    Ok(JohnPath { node, path, pieces, m, john_constant })
}

/// [`assemble_node_path`] for a node at the full depth.
pub fn assemble_john_path<T: Real>(
    tree: &GenerationTree,
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    leaf: usize,
) -> Result<JohnPath<T>> {
    match tree.nodes.get(leaf) {
        Some(n) if n.level == tree.params.depth && n.halt.is_none() => {}
        _ => return Err(Error::BrokenAncestry(leaf)),
    }
    assemble_node_path(tree, mask, dfield, &mut Router::new(mask.space()), leaf)
}

/// Paths for every node of the tree, in node order.
pub fn assemble_all<T: Real>(
    tree: &GenerationTree,
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
) -> Result<Vec<JohnPath<T>>> {
    (0..tree.nodes.len())
        .into_par_iter()
        .map_init(|| Router::new(mask.space()), |router, id| assemble_node_path(tree, mask, dfield, router, id))
        .collect()
}

/// `M^2 / (1 - eta) (1 + kappa h / (eta^K r0))`.
pub fn john_bound(tree: &GenerationTree, m: f64) -> f64 {
    let p = &tree.params;
    m * m / (1.0 - p.eta) * (1.0 + p.kappa * p.h / tree.radius_at(p.depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::measure::tests::synthetic;
    use crate::construction::tree::{run_construction, ConstructionConfig, EtaBound};
    use crate::domaingen::{generate, DomainKind, DomainSpec};
    use crate::gridspace::field::distance_to_complement;
    use crate::gridspace::GridSpace;

    fn disk(h: f64) -> DomainMask<f64> {
        generate(&DomainSpec { kind: DomainKind::Disk { radius: 1.0 }, h }).unwrap()
    }

    #[test]
    fn radial_path_is_one_john() {
        let h = 1.0 / 128.0;
        let m = disk(h);
        let d = distance_to_complement(&m);
        let s = m.space();
        let c = s.locate(&[0.0, 0.0]).unwrap();
        let mut cells = vec![c];
        let start = s.coord(c);
        let mut x = start[0];
        loop {
            x += 1;
            let i = s.index([x, start[1], 0]);
            cells.push(i);
            if !m.is_inside(i) {
                break;
            }
        }
        let p = GridPath::from_cells(s, cells).unwrap();
        let r = d.get(c);
        let cj = john_constant_of_path(&p, &m, &d).unwrap();
        assert!((cj - 1.0).abs() <= 2.0 * h / r, "{cj}");
        assert_eq!(john_constant_of_path(&GridPath::single(c), &m, &d).unwrap(), 0.0);
    }

    #[test]
    fn wall_hugging_path_ratio() {
        // Corridor rows 1..=9; walk along row 2 (clearance w = 2) for L cells, then exit.
        let s = GridSpace::new(2, &[80, 11], 1.0, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        let m = DomainMask::new(s.clone(), inside).unwrap();
        let d = distance_to_complement(&m);
        let len = 60;
        let mut cells: Vec<usize> = (10..10 + len + 1).map(|x| s.index([x, 2, 0])).collect();
        cells.push(s.index([10 + len, 1, 0]));
        cells.push(s.index([10 + len, 0, 0]));
        let p = GridPath::from_cells(&s, cells).unwrap();
        let cj = john_constant_of_path(&p, &m, &d).unwrap();
        let expect = (len as f64 + 2.0) / 2.0;
        assert!((cj - expect).abs() < 1e-9, "{cj} vs {expect}");
        let bad = GridPath::from_cells(&s, vec![s.index([5, 0, 0]), s.index([5, 1, 0]), s.index([5, 2, 0])]).unwrap();
        assert!(matches!(john_constant_of_path(&bad, &m, &d), Err(Error::PathLeavesDomain(_))));
    }

    #[test]
    fn depth_one_disk_paths_are_nearly_radial() {
        let h = 1.0 / 256.0;
        let m = disk(h);
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.0, 0.0]).unwrap();
        let cfg = ConstructionConfig { eta_bound: EtaBound::Report, ..Default::default() };
        let tree = run_construction(&m, &d, z0, 0.125, 1, &cfg).unwrap();
        let paths = assemble_all(&tree, &m, &d).unwrap();
        let root = &paths[0];
        assert!(root.john_constant <= 1.0 + 4.0 * h / tree.params.r0, "{}", root.john_constant);
        let worst_m = paths.iter().map(|p| p.m).fold(1.0, f64::max);
        for p in &paths {
            assert_eq!(p.path.start(), z0);
            assert_eq!(p.path.end(), tree.nodes[p.node].omega);
            assert!(p.john_constant <= john_bound(&tree, worst_m));
        }
        let leaf = tree.leaves()[0];
        assert_eq!(assemble_john_path(&tree, &m, &d, leaf).unwrap().path, paths[leaf].path);
        assert!(matches!(assemble_john_path(&tree, &m, &d, 0), Err(Error::BrokenAncestry(0))));
    }

    #[test]
    fn missing_chain_is_broken_ancestry() {
        let t = synthetic(1, &[0]);
        let s = GridSpace::new(2, &[8, 8], 1.0, &[0.0, 0.0]).unwrap();
        let inside = (0..s.len()).map(|i| !s.is_world_boundary(i)).collect();
        let m = DomainMask::new(s, inside).unwrap();
        let d = distance_to_complement(&m);
        assert!(matches!(assemble_john_path(&t, &m, &d, 1), Err(Error::BrokenAncestry(1))));
    }
}
