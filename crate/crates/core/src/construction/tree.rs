//! The generation tree: boundary points, seeds and radii level by level.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::chain::{chain_paths_from, ChainRecord};
use crate::construction::collection::{
    admissible_centers, touches_boundary, well_placed_subcollection, BallCollection, ChainGraph, CollectionKind,
    Region,
};
use crate::error::{Error, Result};
use crate::gridspace::field::DistanceField;
use crate::gridspace::mask::DomainMask;
use crate::gridspace::path::Router;
use crate::real::Real;

/// What to do when `eta` is not below the admissible bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaBound {
    #[default]
    Enforce,
    /// Build anyway and record that the bound failed.
    Report,
}

/// Which ball the first well-placed collection must contain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepOneReading {
    /// Only the seed ball `B(z0, eta r0)` is required, and it lives in the chainable collection.
    #[default]
    SeedBall,
    /// A boundary-touching ball at `omega0` is forced into the well-placed collection.
    TouchingBall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructionConfig {
    pub kappa: f64,
    pub eta1: f64,
    /// Exponent gap used in `eta2 = min(eta1, k_emp^(-2/eps))`.
    pub eps: f64,
    pub k_emp: Option<f64>,
    pub eta_bound: EtaBound,
    pub step_one: StepOneReading,
    pub parallel: bool,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        Self {
            kappa: 4.0,
            eta1: 1.0 / 168.0,
            eps: 0.2,
            k_emp: None,
            eta_bound: EtaBound::Enforce,
            step_one: StepOneReading::SeedBall,
            parallel: true,
        }
    }
}

impl ConstructionConfig {
    pub fn eta2(&self) -> f64 {
        match self.k_emp {
            Some(k) => self.eta1.min(k.powf(-2.0 / self.eps)),
            None => self.eta1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    EmptyCandidates,
    SeedNotAdmissible,
    NoBoundaryTouching,
    NoPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub level: usize,
    pub omega: usize,
    pub seed: usize,
    pub radius: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Expansion whose collections contain this node's ball.
    pub chain_witness: Option<usize>,
    /// Chain path from the parent's seed to this node's seed.
    pub chain: Option<ChainRecord>,
    /// `omega` equals the parent's `omega`.
    pub nested: bool,
    pub halt: Option<HaltReason>,
}

/// One node's step: the region, its maximal chainable collection and the
/// well-placed subcollection that became the children.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub node: usize,
    pub region: Region,
    pub chainable: BallCollection,
    pub well_placed: BallCollection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub z0: usize,
    pub r0: f64,
    pub eta: f64,
    pub depth: usize,
    pub kappa: f64,
    pub h: f64,
    pub eta_bound: f64,
    pub eta_bound_satisfied: bool,
    pub step_one: StepOneReading,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationTree {
    pub params: TreeParams,
    pub nodes: Vec<TreeNode>,
    pub levels: Vec<Vec<usize>>,
    pub expansions: Vec<Expansion>,
}

impl GenerationTree {
    /// `eta^k r0`.
    pub fn radius_at(&self, level: usize) -> f64 {
        self.params.r0 * self.params.eta.powi(level as i32)
    }

    /// Nodes at the full depth.
    pub fn leaves(&self) -> &[usize] {
        self.levels.get(self.params.depth).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Root-first node ids from level 0 down to `id`.
    pub fn ancestry(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Distinct boundary cells over all levels, ascending.
    pub fn boundary_points(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.nodes.iter().map(|n| n.omega).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Number of halted nodes per level.
    pub fn halted_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.iter().filter(|&&i| self.nodes[i].halt.is_some()).count()).collect()
    }
}

struct Child {
    center: usize,
    omega: usize,
    chain: ChainRecord,
}

struct Grown {
    expansion: Expansion,
    children: Vec<Child>,
}

/// Boundary cells `w` with `|d(x, w) - radius| <= slack`; prefers `own`, then
/// the smallest index among those within `reach` of `own`, then any.
fn boundary_point<T: Real>(mask: &DomainMask<T>, x: usize, radius: T, slack: T, own: usize, reach: T) -> Option<usize> {
    let space = mask.space();
    let d_own = space.distance(x, own);
    if d_own <= radius + slack && d_own >= radius - slack {
        return Some(own);
    }
    let mut best: Option<usize> = None;
    let mut fallback: Option<(T, usize)> = None;
    space.for_each_in_ball(x, radius + slack, |i, d| {
        if !mask.is_boundary(i) {
            return;
        }
        if d >= radius - slack && space.distance(i, own) <= reach && best.is_none_or(|b| i < b) {
            best = Some(i);
        }
        if fallback.is_none_or(|f| (d, i) < f) {
            fallback = Some((d, i));
        }
    });
    best.or(fallback.map(|f| f.1))
}

#[allow(clippy::too_many_arguments)]
fn grow<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    node: &TreeNode,
    child_radius: T,
    kappa: T,
    forced_at_omega: bool,
) -> std::result::Result<Grown, HaltReason> {
    let space = mask.space();
    let slack = kappa * space.h();
    let region = Region { center: node.omega, radius: 2.0 * node.radius };
    let cands = admissible_centers(mask, dfield, region, child_radius, kappa).map_err(|_| HaltReason::EmptyCandidates)?;
    if cands.binary_search(&node.seed).is_err() {
        return Err(HaltReason::SeedNotAdmissible);
    }
    let graph = ChainGraph::new(space, &cands, child_radius);
    let component = graph.component_of(node.seed).map_err(|_| HaltReason::SeedNotAdmissible)?;
    let chainable =
        BallCollection { radius: child_radius.f64(), centers: component, kind: CollectionKind::Chainable, region: Some(region) };
    let forced = if forced_at_omega {
        chainable
            .centers
            .iter()
            .copied()
            .filter(|&x| touches_boundary(dfield, x, child_radius, slack + space.tol()))
            .filter(|&x| space.distance(x, node.omega) <= child_radius + slack)
            .min_by(|&a, &b| {
                space.distance(a, node.omega).partial_cmp(&space.distance(b, node.omega)).expect("finite").then(a.cmp(&b))
            })
    } else {
        None
    };
    let well = well_placed_subcollection(space, &chainable, dfield, kappa, forced)
        .map_err(|_| HaltReason::NoBoundaryTouching)?;
    let mut router = Router::new(space);
    let paths =
        chain_paths_from(&graph, mask, &mut router, node.seed, &well.centers).map_err(|_| HaltReason::NoPath)?;
    let reach = T::of(2.0 * node.radius) + slack;
    let mut children = Vec::with_capacity(well.centers.len());
    for (&center, path) in well.centers.iter().zip(&paths) {
        let omega = boundary_point(mask, center, child_radius, slack, node.omega, reach).ok_or(HaltReason::NoBoundaryTouching)?;
        children.push(Child { center, omega, chain: path.record(dfield) });
    }
    Ok(Grown { expansion: Expansion { node: node.id, region, chainable, well_placed: well }, children })
}

/// Builds levels `0..=depth` from `z0` with ratio `eta`.
///
/// Branches that cannot continue are kept as halted nodes; the tree is only
/// rejected for invalid parameters.
pub fn run_construction<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    z0: usize,
    eta: f64,
    depth: usize,
    cfg: &ConstructionConfig,
) -> Result<GenerationTree> {
    let space = mask.space();
    if z0 >= space.len() || !mask.is_inside(z0) {
        return Err(Error::InvalidParameter(format!("z0 = {z0} is not an inside cell")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("eta = {eta} must lie in (0, 1)")));
    }
    let bound = cfg.eta2();
    let satisfied = eta < bound;
    if !satisfied && cfg.eta_bound == EtaBound::Enforce {
        return Err(Error::EtaOutOfRange { eta, bound });
    }
    let r0 = dfield.get(z0).f64();
    let h = space.h().f64();
    let finest = r0 * eta.powi(depth as i32);
    if finest < 4.0 * h - space.tol().f64() {
        return Err(Error::DepthUnresolvable { depth, finest, floor: 4.0 * h });
    }
    let kappa = T::of(cfg.kappa);
    let slack = kappa * space.h();
    let r0t = T::of(r0);
    let mut omega0: Option<usize> = None;
    space.for_each_in_ball(z0, r0t + slack, |i, d| {
        if d >= r0t - slack && mask.is_boundary(i) && omega0.is_none_or(|b| i < b) {
            omega0 = Some(i);
        }
    });
    let omega0 = omega0.ok_or_else(|| Error::InvalidParameter("no boundary cell at distance r0".into()))?;

    let mut tree = GenerationTree {
        params: TreeParams {
            z0,
            r0,
            eta,
            depth,
            kappa: cfg.kappa,
            h,
            eta_bound: bound,
            eta_bound_satisfied: satisfied,
            step_one: cfg.step_one,
        },
        nodes: vec![TreeNode {
            id: 0,
            level: 0,
            omega: omega0,
            seed: z0,
            radius: r0,
            parent: None,
            children: Vec::new(),
            chain_witness: None,
            chain: None,
            nested: false,
            halt: None,
        }],
        levels: vec![vec![0]],
        expansions: Vec::new(),
    };

    for k in 0..depth {
        let child_radius = T::of(tree.radius_at(k + 1));
        let forced = k == 0 && cfg.step_one == StepOneReading::TouchingBall;
        let active: Vec<usize> = tree.levels[k].iter().copied().filter(|&i| tree.nodes[i].halt.is_none()).collect();
        let work = |&i: &usize| grow(mask, dfield, &tree.nodes[i], child_radius, kappa, forced);
        let results: Vec<_> =
            if cfg.parallel { active.par_iter().map(work).collect() } else { active.iter().map(work).collect() };
        let mut next = Vec::new();
        for (&parent, result) in active.iter().zip(results) {
            match result {
                Err(reason) => tree.nodes[parent].halt = Some(reason),
                Ok(grown) => {
                    let witness = tree.expansions.len();
                    tree.expansions.push(grown.expansion);
                    let parent_omega = tree.nodes[parent].omega;
                    for child in grown.children {
                        let id = tree.nodes.len();
                        tree.nodes.push(TreeNode {
                            id,
                            level: k + 1,
                            omega: child.omega,
                            seed: child.center,
                            radius: child_radius.f64(),
                            parent: Some(parent),
                            children: Vec::new(),
                            chain_witness: Some(witness),
                            chain: Some(child.chain),
                            nested: child.omega == parent_omega,
                            halt: None,
                        });
                        tree.nodes[parent].children.push(id);
                        next.push(id);
                    }
                }
            }
        }
        tree.levels.push(next);
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domaingen::{generate, DomainKind, DomainSpec};
    use crate::gridspace::field::distance_to_complement;

    fn half_plane(h: f64) -> DomainMask<f64> {
        generate(&DomainSpec { kind: DomainKind::HalfPlane { width: 1.25, height: 0.7 }, h }).unwrap()
    }

    fn report_cfg() -> ConstructionConfig {
        ConstructionConfig { eta_bound: EtaBound::Report, ..Default::default() }
    }

    #[test]
    fn half_plane_children_are_separated_along_the_wall() {
        let h = 1.0 / 1024.0;
        let m = half_plane(h);
        let d = distance_to_complement(&m);
        let s = m.space();
        let z0 = s.locate(&[0.625, 0.3]).unwrap();
        let tree = run_construction(&m, &d, z0, 0.125, 2, &report_cfg()).unwrap();
        assert!(!tree.params.eta_bound_satisfied);
        let r0 = tree.params.r0;
        assert!((r0 - 0.3).abs() <= 2.0 * h);
        for (k, level) in tree.levels.iter().enumerate() {
            for &i in level {
                assert_eq!(tree.nodes[i].radius, r0 * 0.125f64.powi(k as i32));
            }
        }
        let level1 = &tree.levels[1];
        assert!(level1.len() >= 2, "{} children", level1.len());
        for (a, &x) in level1.iter().enumerate() {
            for &y in &level1[a + 1..] {
                assert!(s.distance(tree.nodes[x].seed, tree.nodes[y].seed) >= 8.0 * 0.125 * r0 - 1e-9);
            }
        }
        for n in &tree.nodes[1..] {
            let p = &tree.nodes[n.parent.unwrap()];
            assert!(s.distance(n.omega, p.omega) <= 2.0 * p.radius + 2.0 * 4.0 * h);
            assert!(m.is_boundary(n.omega));
        }
        assert!(tree.nodes.iter().any(|n| n.nested));
    }

    #[test]
    fn disk_ring_count_matches_circumference() {
        let h = 1.0 / 256.0;
        let m: DomainMask<f64> =
            generate(&DomainSpec { kind: DomainKind::Disk { radius: 1.0 }, h }).unwrap();
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.0, 0.0]).unwrap();
        let eta = 0.125;
        let tree = run_construction(&m, &d, z0, eta, 1, &report_cfg()).unwrap();
        let r0 = tree.params.r0;
        // Children lie in B(omega0, 2 r0), which meets the circle in an arc of
        // angle 2 * 2 asin(1) = 2 pi; spacing 8 eta r0 along a circle of radius ~ r0.
        let expect = (2.0 * std::f64::consts::PI * r0 / (8.0 * eta * r0)).floor();
        let n = tree.levels[1].len() as f64;
        assert!(n >= expect / 2.0 && n <= expect * 2.0, "{n} vs {expect}");
    }

    #[test]
    fn parameter_errors() {
        let h = 1.0 / 256.0;
        let m = half_plane(h);
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.625, 0.3]).unwrap();
        assert!(matches!(
            run_construction(&m, &d, z0, 0.125, 1, &ConstructionConfig::default()),
            Err(Error::EtaOutOfRange { .. })
        ));
        assert!(matches!(run_construction(&m, &d, z0, 0.125, 3, &report_cfg()), Err(Error::DepthUnresolvable { .. })));
        let outside = m.space().locate(&[0.625, -0.01]).unwrap();
        assert!(run_construction(&m, &d, outside, 0.125, 1, &report_cfg()).is_err());
    }

    #[test]
    fn step_one_readings_and_parallelism_agree_on_shape() {
        let h = 1.0 / 256.0;
        let m = half_plane(h);
        let d = distance_to_complement(&m);
        let z0 = m.space().locate(&[0.625, 0.3]).unwrap();
        let a = run_construction(&m, &d, z0, 0.125, 1, &report_cfg()).unwrap();
        let serial = ConstructionConfig { parallel: false, ..report_cfg() };
        assert_eq!(a, run_construction(&m, &d, z0, 0.125, 1, &serial).unwrap());
        let touching = ConstructionConfig { step_one: StepOneReading::TouchingBall, ..report_cfg() };
        let b = run_construction(&m, &d, z0, 0.125, 1, &touching).unwrap();
        assert!(b.levels[1].iter().any(|&i| b.nodes[i].omega == b.nodes[0].omega));
    }
}
