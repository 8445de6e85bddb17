//! Ball-count diagnostics: the fitted constant in the child-count lower bound
//! and the Lipschitz test function that forces many well-placed balls.

use serde::{Deserialize, Serialize};

use crate::construction::collection::{
    admissible_centers, chainable_component, separated_net, well_placed_subcollection, Region,
};
use crate::construction::tree::GenerationTree;
use crate::error::{Error, Result};
use crate::gridspace::field::{multi_source_distance, DistanceField};
use crate::gridspace::mask::DomainMask;
use crate::real::{compensated_sum, Real};

/// Exponents for the diagnostics in dimension `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub q: usize,
    pub s: f64,
    pub eps: f64,
    /// `q - s + eps/2` when `s < q - 1`, else 1.
    pub p: f64,
    pub eta1: f64,
    pub eta2: Option<f64>,
}

impl DiagnosticsConfig {
    pub fn new(q: usize, s: f64, eps: f64) -> Result<Self> {
        let qf = q as f64;
        if !(s > 0.0 && s <= qf - 1.0 + 1e-12) || !(eps > 0.0 && eps < s) {
            return Err(Error::InvalidParameter(format!("need 0 < eps < s <= {}, got s = {s}, eps = {eps}", qf - 1.0)));
        }
        let p = if s < qf - 1.0 - 1e-12 { qf - s + eps / 2.0 } else { 1.0 };
        let gap = qf - p;
        let ok = (gap >= 0.0 && gap < s) || (p == 1.0 && (s - (qf - 1.0)).abs() <= 1e-12);
        if !ok {
            return Err(Error::InvalidParameter(format!("exponents q = {q}, s = {s}, p = {p} out of range")));
        }
        Ok(Self { q, s, eps, p, eta1: 1.0 / 168.0, eta2: None })
    }

    /// `eta2 = min(eta1, k^(-2/eps))` for a fitted `k`.
    pub fn with_k(mut self, k: f64) -> Self {
        self.eta2 = Some(self.eta1.min(k.powf(-2.0 / self.eps)));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    /// Level of the children being counted.
    pub level: usize,
    pub parents: usize,
    pub halted: usize,
    pub min_children: usize,
    pub max_children: usize,
    /// `max eta^-(q-p) / N` over the expanded parents.
    pub k_emp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCountReport {
    pub per_level: Vec<LevelCount>,
    pub k_emp: f64,
    /// `max / min` of the per-level fits.
    pub stability: f64,
    pub single_child_nodes: Vec<usize>,
}

/// Fits the smallest `K` with `N >= eta^-(q-p) / K` at every expanded node.
pub fn verify_ball_count(tree: &GenerationTree, cfg: &DiagnosticsConfig) -> BallCountReport {
    let target = tree.params.eta.powf(-(cfg.q as f64 - cfg.p));
    let mut per_level = Vec::new();
    let mut singles = Vec::new();
    for k in 1..tree.levels.len() {
        let mut lc =
            LevelCount { level: k, parents: 0, halted: 0, min_children: usize::MAX, max_children: 0, k_emp: 0.0 };
        for &i in &tree.levels[k - 1] {
            let node = &tree.nodes[i];
            let n = node.children.len();
            if node.halt.is_some() || n == 0 {
                lc.halted += 1;
                continue;
            }
            lc.parents += 1;
            lc.min_children = lc.min_children.min(n);
            lc.max_children = lc.max_children.max(n);
            lc.k_emp = lc.k_emp.max(target / n as f64);
            if n == 1 {
                singles.push(i);
            }
        }
        if lc.parents > 0 {
            per_level.push(lc);
        }
    }
    let k_emp = per_level.iter().map(|l| l.k_emp).fold(0.0, f64::max);
    let lo = per_level.iter().map(|l| l.k_emp).fold(f64::INFINITY, f64::min);
    let stability = if per_level.is_empty() { 1.0 } else { k_emp / lo };
    BallCountReport { per_level, k_emp, stability, single_child_nodes: singles }
}

/// The ball `B(center, radius)`, the far point `z_b`, the well-placed centers
/// `B_i` of radius `eta r` and the separated net chained with them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSetup {
    pub center: usize,
    pub radius: f64,
    pub z_b: usize,
    pub eta: f64,
    pub well: Vec<usize>,
    pub net: Vec<usize>,
}

/// Builds the collections for [`build_test_function`]: the chainable component
/// of `B(z_b, eta r)` inside `B(center, r)`, its well-placed subcollection and
/// a greedy `eta r / 2`-net of the component containing the well-placed
/// centers and `z_b`.
pub fn test_function_setup<T: Real>(
    mask: &DomainMask<T>,
    dfield: &DistanceField<T>,
    center: usize,
    z_b: usize,
    radius: f64,
    eta: f64,
    kappa: f64,
) -> Result<TestFunctionSetup> {
    let space = mask.space();
    let small = T::of(eta * radius);
    let region = Region { center, radius };
    let cands = admissible_centers(mask, dfield, region, small, T::of(kappa))?;
    let chain = chainable_component(space, &cands, small, z_b, Some(region))?;
    let well = well_placed_subcollection(space, &chain, dfield, T::of(kappa), None)?;
    let mut mandatory = well.centers.clone();
    mandatory.push(z_b);
    let net = separated_net(space, &chain.centers, small / T::of(2.0), &mandatory);
    Ok(TestFunctionSetup { center, radius, z_b, eta, well: well.centers, net })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    /// Cells of `B(center, radius)`.
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
    /// Largest stencil difference quotient at each cell, within the ball.
    pub lip: Vec<f64>,
    /// `sum lip^p h^q`.
    pub lip_integral: f64,
    /// `N c_A 41^q (eta r)^(q-p) (1 + kappa h / (eta r))^p`.
    pub bound: f64,
    pub n_well: usize,
    pub lipschitz_violations: usize,
    /// Boundary cells of the ball where `f != 1`.
    pub e_violations: usize,
    /// Cells of `B(z_b, r/4)` in the ball where `f != 0`.
    pub f_violations: usize,
}

impl TestFunction {
    pub fn passes(&self) -> bool {
        self.lip_integral <= self.bound
            && self.lipschitz_violations == 0
            && self.e_violations == 0
            && self.f_violations == 0
    }
}

/// `f = 1` off `D = union of 20B` over the net; on `D`,
/// `f = max_i [1 - d(x, 40 B_i) / (eta r)]_+`.
pub fn build_test_function<T: Real>(
    mask: &DomainMask<T>,
    setup: &TestFunctionSetup,
    cfg: &DiagnosticsConfig,
    c_a: f64,
    kappa: f64,
) -> Result<TestFunction> {
    let eta = setup.eta;
    if eta >= cfg.eta1 || 41.0 * eta >= 1.0 {
        return Err(Error::EtaTooLarge { eta, bound: cfg.eta1.min(1.0 / 41.0) });
    }
    let space = mask.space();
    let unit = setup.radius * eta;
    let unit_t = T::of(unit);
    let tol = space.tol();
    let to_well = multi_source_distance(
        space,
        &setup.well.iter().map(|&c| (c, T::zero())).collect::<Vec<_>>(),
        |_| true,
        unit_t * T::of(41.0) + space.h(),
    );
    let to_net = multi_source_distance(
        space,
        &setup.net.iter().map(|&c| (c, T::zero())).collect::<Vec<_>>(),
        |_| true,
        unit_t * T::of(20.0) + space.h(),
    );
    let value = |i: usize| -> f64 {
        if to_net[i] > unit_t * T::of(20.0) + tol {
            return 1.0;
        }
        let gap = (to_well[i].f64() - 40.0 * unit).max(0.0);
        (1.0 - gap / unit).max(0.0)
    };
    let mut cells = Vec::new();
    space.for_each_in_ball(setup.center, T::of(setup.radius), |i, _| cells.push(i));
    cells.sort_unstable();
    let in_ball = |i: usize| space.distance(i, setup.center) <= T::of(setup.radius) + tol;
    let values: Vec<f64> = cells.iter().map(|&i| value(i)).collect();
    let slack = 1.0 + kappa * space.h().f64() / unit;
    let mut lip = Vec::with_capacity(cells.len());
    let mut lipschitz_violations = 0;
    for (&i, &fi) in cells.iter().zip(&values) {
        let mut best = 0.0f64;
        space.for_each_neighbor(i, |j, w| {
            if !in_ball(j) {
                return;
            }
            let q = (fi - value(j)).abs() / w.f64();
            best = best.max(q);
            if i < j && q > slack / unit + 1e-9 {
                lipschitz_violations += 1;
            }
        });
        lip.push(best);
    }
    let cell = space.cell_measure().f64();
    let lip_integral = compensated_sum(lip.iter().map(|l| l.powf(cfg.p) * cell));
    let q = cfg.q as f64;
    let n = setup.well.len();
    let bound = n as f64 * c_a * 41f64.powf(q) * unit.powf(q - cfg.p) * slack.powf(cfg.p);
    let quarter = T::of(setup.radius / 4.0) + tol;
    let mut e_violations = 0;
    let mut f_violations = 0;
    for (&i, &fi) in cells.iter().zip(&values) {
        if mask.is_boundary(i) && fi != 1.0 {
            e_violations += 1;
        }
        if space.distance(i, setup.z_b) <= quarter && fi != 0.0 {
            f_violations += 1;
        }
    }
    Ok(TestFunction {
        cells,
        values,
        lip,
        lip_integral,
        bound,
        n_well: n,
        lipschitz_violations,
        e_violations,
        f_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::measure::tests::synthetic;
    use crate::domaingen::{generate, DomainKind, DomainSpec};
    use crate::gridspace::field::distance_to_complement;

    #[test]
    fn exponents() {
        let c = DiagnosticsConfig::new(2, 1.0, 0.2).unwrap();
        assert_eq!(c.p, 1.0);
        let c = DiagnosticsConfig::new(3, 1.5, 0.2).unwrap();
        assert!((c.p - 1.6).abs() < 1e-12);
        assert!(DiagnosticsConfig::new(2, 1.5, 0.2).is_err());
        assert!(DiagnosticsConfig::new(2, 1.0, 1.0).is_err());
        let k = c.clone().with_k(2.0);
        assert!((k.eta2.unwrap() - 2f64.powf(-10.0)).abs() < 1e-15);
    }

    #[test]
    fn single_child_tree_is_flagged() {
        let t = synthetic(2, &[0, 1]);
        let cfg = DiagnosticsConfig::new(2, 1.0, 0.2).unwrap();
        let r = verify_ball_count(&t, &cfg);
        assert_eq!(r.single_child_nodes, vec![0, 1]);
        // eta^-(q-p) / 1 with q - p = 1.
        assert!((r.k_emp - 8.0).abs() < 1e-12);
        assert_eq!(r.stability, 1.0);
    }

    #[test]
    fn half_plane_test_function_small_instance() {
        let h = 1.0 / 256.0;
        let m: DomainMask<f64> =
            generate(&DomainSpec { kind: DomainKind::HalfPlane { width: 1.0, height: 0.5 }, h }).unwrap();
        let d = distance_to_complement(&m);
        let s = m.space();
        let omega = (0..s.len()).find(|&i| m.is_boundary(i) && s.coord(i)[0] == s.extent()[0] / 2).unwrap();
        let r = 100.0 * h;
        let z_b = s.locate(&[s.center(omega)[0], s.center(omega)[1] + r - h]).unwrap();
        let eta = 1.0 / 200.0;
        let setup = test_function_setup(&m, &d, omega, z_b, r, eta, 0.0);
        // eta r = h/2 is below the admissible radius floor.
        assert!(matches!(setup, Err(Error::BelowResolution { .. })));
        let cfg = DiagnosticsConfig::new(2, 1.0, 0.2).unwrap();
        let bad = TestFunctionSetup { center: omega, radius: r, z_b, eta: 0.01, well: vec![], net: vec![] };
        assert!(matches!(build_test_function(&m, &bad, &cfg, 1.0, 4.0), Err(Error::EtaTooLarge { .. })));
    }

    #[test]
    fn test_function_values() {
        let h = 1.0 / 2048.0;
        let m: DomainMask<f64> =
            generate(&DomainSpec { kind: DomainKind::HalfPlane { width: 0.7, height: 0.35 }, h }).unwrap();
        let d = distance_to_complement(&m);
        let s = m.space();
        let omega = (0..s.len()).find(|&i| m.is_boundary(i) && s.coord(i)[0] == s.extent()[0] / 2).unwrap();
        let eta = 1.0 / 200.0;
        let r = 0.3;
        let unit = eta * r;
        assert!(unit >= 3.0 * h);
        let z_b = s.locate(&[s.center(omega)[0], s.center(omega)[1] + r - 2.0 * h]).unwrap();
        let setup = test_function_setup(&m, &d, omega, z_b, r, eta, 1.0).unwrap();
        let cfg = DiagnosticsConfig::new(2, 1.0, 0.2).unwrap();
        let f = build_test_function(&m, &setup, &cfg, 4.0, 1.0).unwrap();
        // Centers of well-placed balls lie in 40 B_i: value 1.
        for &c in &setup.well {
            let k = f.cells.binary_search(&c).unwrap();
            assert_eq!(f.values[k], 1.0);
        }
        let k = f.cells.binary_search(&z_b).unwrap();
        assert_eq!(f.values[k], 0.0);
        assert_eq!(f.f_violations, 0);
        assert!(f.lip_integral > 0.0);
    }
}
