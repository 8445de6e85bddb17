//! The full experiment: every stage persists its artifact before the next runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vb_core::construction::{
    assemble_all, build_tree_measure, frostman_scan, john_bound, run_construction, verify_ball_count,
    BallCountReport, ConstructionConfig, DiagnosticsConfig, FrostmanScan, GenerationTree,
};
use vb_core::content::dyadic::DyadicTree;
use vb_core::content::{frostman_lower_bound, thickness_check, thickness_ladder, CenterSampling, FrostmanBound, ThicknessReport};
use vb_core::domaingen::generate_with_info;
use vb_core::gridspace::field::distance_to_complement;
use vb_core::io::{write_field_raw, write_mask};
use vb_core::visibility::{containment_report, visible_set, ContainmentReport, VisibilityConfig};
use vb_core::{DistanceField, DomainMask, GridSpace};

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub nodes_per_level: Vec<usize>,
    pub halted_per_level: Vec<usize>,
    pub nested: usize,
    pub boundary_points: usize,
    pub r0: f64,
    pub finest_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub paths: usize,
    /// Largest empirical John constant over the assembled paths.
    pub c_emp: f64,
    /// Largest per-path `M`.
    pub m: f64,
    pub john_bound: f64,
    pub john_violations: usize,
    pub chain_paths: usize,
    pub chain_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityStats {
    pub c: f64,
    pub tested: usize,
    pub visible: usize,
    /// `(c, visible count)` for each ladder value.
    pub ladder: Vec<(f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremRatio {
    pub exponent: f64,
    pub content: f64,
    pub d_z0: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub z0: usize,
    pub thickness: ThicknessReport,
    pub tree: TreeStats,
    pub ball_count: BallCountReport,
    /// `min(eta1, k_emp^(-2/eps))` with the fitted constant.
    pub eta2: f64,
    pub frostman: FrostmanBound,
    pub frostman_scan: FrostmanScan,
    pub paths: PathStats,
    pub visibility: VisibilityStats,
    pub containment: ContainmentReport,
    pub theorem: TheoremRatio,
    /// Names of configured assertions that failed.
    pub failures: Vec<String>,
    /// Wall-clock times, persisted separately so the report is reproducible.
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `dyadic content(cells, t)` with cubes no smaller than `floor`.
pub fn content_at_floor(space: &GridSpace<f64>, cells: &[usize], t: f64, floor: Option<f64>) -> f64 {
    let min_level = floor.map_or(0, |f| (f / space.h()).log2().ceil().max(0.0) as u32);
    DyadicTree::build(space, cells, t, min_level).value()
}

pub fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> Result<PathBuf> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

struct Clock {
    start: Instant,
    timings: Vec<StageTiming>,
}

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.push(StageTiming { stage: stage.into(), seconds: (now - self.start).as_secs_f64() });
        self.start = now;
    }
}

/// Paths from `z0` to every tree point, as cell lists, with their constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathArtifact {
    pub node: usize,
    pub john_constant: f64,
    pub m: f64,
    pub cells: Vec<usize>,
}

/// Runs every stage; artifacts land in `cfg.output`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate().context("config")?;
    let dir = cfg.output.clone();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir, "config.json", cfg)?;
    let mut clock = Clock { start: Instant::now(), timings: Vec::new() };

    let generated = generate_with_info::<f64>(&cfg.domain).context("stage generate")?;
    let mask = generated.mask;
    let space = mask.space().clone();
    let mask_name = if space.dim() == 2 { "mask.pbm" } else { "mask.raw" };
    write_mask(&mask, &dir.join(mask_name)).context("stage generate")?;
    write_json(&dir, "domain_info.json", &generated.info)?;
    clock.lap("generate");

    let dfield = distance_to_complement(&mask);
    write_field_raw(&space, dfield.as_slice(), &dir.join("distance.raw")).context("stage distance")?;
    let z0 = cfg.z0.resolve(&mask, &dfield).context("stage distance")?;
    clock.lap("distance");

    let diag = DiagnosticsConfig::new(space.dim(), cfg.s, cfg.eps).context("stage thickness")?;
    let thickness = thickness_check(
        &mask,
        cfg.s,
        &thickness_ladder(&mask),
        &CenterSampling::Strided(cfg.content.thickness_centers.max(1)),
    )
    .context("stage thickness")?;
    write_json(&dir, "thickness.json", &thickness)?;
    clock.lap("thickness");

    let ccfg = ConstructionConfig {
        kappa: cfg.kappa,
        eps: cfg.eps,
        eta_bound: vb_core::construction::EtaBound::Report,
        step_one: cfg.step_one,
        ..Default::default()
    };
    let tree = run_construction(&mask, &dfield, z0, cfg.eta, cfg.depth, &ccfg).context("stage construct")?;
    write_json(&dir, "tree.json", &tree)?;
    let ball_count = verify_ball_count(&tree, &diag);
    let eta2 = diag.clone().with_k(ball_count.k_emp.max(f64::MIN_POSITIVE)).eta2.unwrap_or(diag.eta1);
    write_json(&dir, "ball_count.json", &ball_count)?;
    clock.lap("construct");

    let measure = build_tree_measure(&tree).context("stage measure")?;
    write_json(&dir, "measure.json", &measure)?;
    let t = cfg.s - cfg.eps;
    let finest = tree.radius_at(cfg.depth);
    let frostman =
        frostman_lower_bound(&space, &measure.view(&tree), t, (finest, tree.params.r0)).context("stage measure")?;
    let scan = frostman_scan(&space, &tree, &measure, cfg.s, cfg.eps);
    write_json(&dir, "frostman.json", &(&frostman, &scan))?;
    clock.lap("measure");

    let paths = assemble_all(&tree, &mask, &dfield).context("stage paths")?;
    let c_emp = paths.iter().map(|p| p.john_constant).fold(1.0, f64::max);
    let m = paths.iter().map(|p| p.m).fold(1.0, f64::max);
    let bound = john_bound(&tree, m);
    let john_violations = paths.iter().filter(|p| p.john_constant > bound).count();
    let (chain_paths, chain_violations) = chain_certificates(&tree);
    let artifact: Vec<PathArtifact> = paths
        .iter()
        .map(|p| PathArtifact { node: p.node, john_constant: p.john_constant, m: p.m, cells: p.path.cells().to_vec() })
        .collect();
    write_json(&dir, "paths.json", &artifact)?;
    clock.lap("paths");

    let vcfg = VisibilityConfig {
        kappa: cfg.kappa,
        targets: cfg.visibility.targets.clone(),
        c_max: cfg.visibility.c_max,
        ..Default::default()
    };
    let c = cfg.visibility.c_factor * c_emp;
    let vis = visible_set(&mask, &dfield, z0, c, &vcfg).context("stage visibility")?;
    write_json(&dir, "visibility.json", &vis)?;
    let mut ladder = Vec::new();
    for &cl in &cfg.visibility.c_ladder {
        let v = visible_set(&mask, &dfield, z0, cl, &vcfg).context("stage visibility")?;
        ladder.push((cl, v.visible.len()));
    }
    let containment = containment_report(&tree, &vis, &mask, &dfield, &vcfg);
    write_json(&dir, "containment.json", &containment)?;
    clock.lap("visibility");

    let content = content_at_floor(&space, &vis.visible, t, cfg.content.scale_floor);
    let d_z0 = dfield.get(z0);
    let theorem = TheoremRatio { exponent: t, content, d_z0, ratio: content / d_z0.powf(t) };
    write_json(&dir, "theorem.json", &theorem)?;
    clock.lap("content");

    let a = &cfg.assertions;
    let mut failures = Vec::new();
    if a.containment && containment.fraction < 1.0 {
        failures.push("containment".to_string());
    }
    if a.john_bound && john_violations > 0 {
        failures.push("john_bound".to_string());
    }
    if a.chain_certificates && chain_violations > 0 {
        failures.push("chain_certificates".to_string());
    }
    if a.frostman && !scan.passes() {
        failures.push("frostman".to_string());
    }
    if a.eta_bound && cfg.eta >= eta2 {
        failures.push("eta_bound".to_string());
    }
    if let Some(min) = a.min_theorem_ratio {
        if !(theorem.ratio >= min) {
            failures.push("theorem_ratio".to_string());
        }
    }

    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        z0,
        thickness,
        tree: tree_stats(&tree),
        ball_count,
        eta2,
        frostman,
        frostman_scan: scan,
        paths: PathStats {
            paths: paths.len(),
            c_emp,
            m,
            john_bound: bound,
            john_violations,
            chain_paths,
            chain_violations,
        },
        visibility: VisibilityStats { c, tested: vis.tested.len(), visible: vis.visible.len(), ladder },
        containment,
        theorem,
        failures,
        timings: clock.timings,
    };
    write_json(&dir, "report.json", &report)?;
    write_json(&dir, "timings.json", &report.timings)?;
    Ok(report)
}

pub fn tree_stats(tree: &GenerationTree) -> TreeStats {
    TreeStats {
        nodes_per_level: tree.levels.iter().map(Vec::len).collect(),
        halted_per_level: tree.halted_counts(),
        nested: tree.nodes.iter().filter(|n| n.nested).count(),
        boundary_points: tree.boundary_points().len(),
        r0: tree.params.r0,
        finest_radius: tree.radius_at(tree.params.depth),
    }
}

/// `(checked, failed)` over all chain paths recorded in the tree.
pub fn chain_certificates(tree: &GenerationTree) -> (usize, usize) {
    let slack = tree.params.kappa * tree.params.h;
    let mut checked = 0;
    let mut failed = 0;
    for n in &tree.nodes {
        if let Some(chain) = &n.chain {
            checked += 1;
            let s = chain.hops.len() as f64;
            let ok = chain.length <= s * (n.radius + slack) + 1e-9 && chain.union_clearance >= n.radius / 2.0 - slack - 1e-9;
            if !ok {
                failed += 1;
            }
        }
    }
    (checked, failed)
}

/// Loads a mask and its distance field from an experiment directory or a mask file.
pub fn load_mask(path: &Path) -> Result<(DomainMask<f64>, DistanceField<f64>)> {
    let mask = vb_core::io::read_mask::<f64>(path).with_context(|| format!("reading {}", path.display()))?;
    let dfield = distance_to_complement(&mask);
    Ok((mask, dfield))
}
