use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use vb_cli::config::{ExperimentConfig, Z0Rule};
use vb_cli::pipeline::{chain_certificates, load_mask, run_experiment, tree_stats, write_json, PathArtifact};
use vb_cli::render::{render_svg, Layer};
use vb_core::construction::{
    assemble_all, build_tree_measure, frostman_scan, john_bound, run_construction, verify_ball_count,
    ConstructionConfig, DiagnosticsConfig, EtaBound, GenerationTree, StepOneReading,
};
use vb_core::content::{evaluate, thickness_check, thickness_ladder, CenterSampling, ContentMode, ContentQuery};
use vb_core::domaingen::{generate, DomainSpec};
use vb_core::gridspace::ahlfors::ahlfors_constants;
use vb_core::gridspace::field::distance_to_complement;
use vb_core::io::write_mask;
use vb_core::visibility::{min_john_constant, visible_set, VisibilityConfig, VisibilityResult};
use vb_core::{DistanceField, DomainMask};

/// Visible-boundary experiments on rasterized domains.
#[derive(Parser)]
#[command(name = "vb", version)]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "VB_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Where the domain comes from: a mask file, or the domain of a config.
#[derive(clap::Args)]
struct Source {
    /// Experiment config; supplies defaults for every option below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Mask file (.pbm, or .raw with a .json sidecar).
    #[arg(long)]
    mask: Option<PathBuf>,
}

impl Source {
    fn config(&self) -> Result<Option<ExperimentConfig>> {
        self.config.as_deref().map(ExperimentConfig::from_file).transpose()
    }

    fn load(&self) -> Result<(DomainMask<f64>, DistanceField<f64>, Option<ExperimentConfig>)> {
        let cfg = self.config()?;
        if let Some(path) = &self.mask {
            let (m, d) = load_mask(path)?;
            return Ok((m, d, cfg));
        }
        let Some(c) = cfg else { bail!("need --mask or --config") };
        let mask = generate::<f64>(&c.domain).context("generating the configured domain")?;
        let dfield = distance_to_complement(&mask);
        Ok((mask, dfield, Some(c)))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Enforce,
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    SeedBall,
    TouchingBall,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetKind {
    Boundary,
    Inside,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterize a domain.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Domain spec as JSON text or a path to a JSON file.
        #[arg(long)]
        domain: Option<String>,
        /// Overrides the cell size of the spec.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distance field, boundary size, regularity and thickness of a domain.
    Analyze {
        #[command(flatten)]
        src: Source,
        /// Thickness exponent.
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hausdorff content of the boundary or the interior.
    Content {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum, default_value = "boundary")]
        set: SetKind,
        #[arg(long)]
        exponent: f64,
        /// Smallest cover size in world units.
        #[arg(long)]
        floor: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the generation tree.
    Construct {
        #[command(flatten)]
        src: Source,
        /// Base point as comma-separated world coordinates.
        #[arg(long)]
        z0: Option<String>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, value_enum)]
        eta_policy: Option<Policy>,
        #[arg(long, value_enum)]
        step_one: Option<Reading>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the assembled paths.
        #[arg(long)]
        paths: Option<PathBuf>,
    },
    /// Visible boundary at a fixed constant, or the minimal constant for one cell.
    Visibility {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        z0: Option<String>,
        #[arg(long)]
        c: Option<f64>,
        /// Report the minimal constant for the boundary cell at this point.
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a tree: chain certificates, John bound, measure and ball counts.
    Verify {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SVG overlay of a 2D mask with optional tree, paths and visible set.
    Render {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        paths: Option<PathBuf>,
        #[arg(long)]
        vis: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// The full pipeline; exits nonzero when a configured assertion fails.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad coordinate {t:?}")))
        .collect()
}

fn resolve_z0(
    arg: &Option<String>,
    cfg: &Option<ExperimentConfig>,
    mask: &DomainMask<f64>,
    dfield: &DistanceField<f64>,
) -> Result<usize> {
    let rule = match (arg, cfg) {
        (Some(t), _) => Z0Rule::Point { at: parse_point(t)? },
        (None, Some(c)) => c.z0.clone(),
        (None, None) => Z0Rule::Deepest,
    };
    rule.resolve(mask, dfield)
}

fn read_json<S: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<S> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn emit<S: serde::Serialize>(out: &Option<PathBuf>, value: &S) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { config, domain, h, out } => {
            let mut spec: DomainSpec = match (domain, config) {
                (Some(d), _) => {
                    let text = if std::path::Path::new(&d).exists() { std::fs::read_to_string(&d)? } else { d };
                    serde_json::from_str(&text).context("parsing the domain spec")?
                }
                (None, Some(c)) => ExperimentConfig::from_file(&c)?.domain,
                (None, None) => bail!("need --domain or --config"),
            };
            if let Some(h) = h {
                spec.h = h;
            }
            let mask = generate::<f64>(&spec)?;
            write_mask(&mask, &out)?;
            eprintln!("{} cells, {} inside", mask.space().len(), mask.inside_count());
        }
        Command::Analyze { src, s, samples, out } => {
            let (mask, dfield, cfg) = src.load()?;
            let space = mask.space();
            let s = s.or(cfg.as_ref().map(|c| c.s)).unwrap_or(space.dim() as f64 - 1.0);
            let (deepest, depth) = dfield.max();
            let hi = (space.diameter() / 8.0).max(4.0 * space.h());
            let ahlfors = ahlfors_constants(space, None, samples, (4.0 * space.h(), hi), cfg.map_or(0, |c| c.seed))?;
            let thickness = thickness_check(&mask, s, &thickness_ladder(&mask), &CenterSampling::Strided(samples))?;
            emit(
                &out,
                &serde_json::json!({
                    "cells": space.len(),
                    "inside": mask.inside_count(),
                    "boundary": mask.boundary_cells().len(),
                    "deepest_cell": deepest,
                    "max_distance": depth,
                    "ahlfors": ahlfors,
                    "thickness": thickness,
                }),
            )?;
        }
        Command::Content { src, set, exponent, floor, out } => {
            let (mask, _, cfg) = src.load()?;
            let target = match set {
                SetKind::Boundary => mask.boundary_cells(),
                SetKind::Inside => mask.inside_cells(),
            };
            let h = mask.space().h();
            let floor = floor.or(cfg.and_then(|c| c.content.scale_floor)).unwrap_or(h);
            let q = ContentQuery { target, exponent, mode: ContentMode::Dimension, scale_floor: floor };
            emit(&out, &evaluate(mask.space(), &q)?)?;
        }
        Command::Construct { src, z0, eta, depth, kappa, eta_policy, step_one, out, paths } => {
            let (mask, dfield, cfg) = src.load()?;
            let z0 = resolve_z0(&z0, &cfg, &mask, &dfield)?;
            let Some(eta) = eta.or(cfg.as_ref().map(|c| c.eta)) else { bail!("need --eta or --config") };
            let Some(depth) = depth.or(cfg.as_ref().map(|c| c.depth)) else { bail!("need --depth or --config") };
            let policy = match eta_policy {
                Some(Policy::Enforce) => EtaBound::Enforce,
                Some(Policy::Report) => EtaBound::Report,
                None => cfg.as_ref().map_or(EtaBound::Enforce, |c| c.eta_policy),
            };
            let reading = match step_one {
                Some(Reading::SeedBall) => StepOneReading::SeedBall,
                Some(Reading::TouchingBall) => StepOneReading::TouchingBall,
                None => cfg.as_ref().map_or(StepOneReading::SeedBall, |c| c.step_one),
            };
            let ccfg = ConstructionConfig {
                kappa: kappa.or(cfg.as_ref().map(|c| c.kappa)).unwrap_or(4.0),
                eps: cfg.as_ref().map_or(0.2, |c| c.eps),
                eta_bound: policy,
                step_one: reading,
                ..Default::default()
            };
            let tree = run_construction(&mask, &dfield, z0, eta, depth, &ccfg)?;
            std::fs::write(&out, serde_json::to_string_pretty(&tree)? + "\n")?;
            if let Some(p) = paths {
                let all = assemble_all(&tree, &mask, &dfield)?;
                let artifact: Vec<PathArtifact> = all
                    .iter()
                    .map(|j| PathArtifact { node: j.node, john_constant: j.john_constant, m: j.m, cells: j.path.cells().to_vec() })
                    .collect();
                std::fs::write(&p, serde_json::to_string_pretty(&artifact)? + "\n")?;
            }
            eprintln!("{}", serde_json::to_string(&tree_stats(&tree))?);
        }
        Command::Visibility { src, z0, c, omega, kappa, out } => {
            let (mask, dfield, cfg) = src.load()?;
            let z0 = resolve_z0(&z0, &cfg, &mask, &dfield)?;
            let mut vcfg = VisibilityConfig {
                kappa: kappa.or(cfg.as_ref().map(|c| c.kappa)).unwrap_or(4.0),
                ..Default::default()
            };
            if let Some(c) = &cfg {
                vcfg.targets = c.visibility.targets.clone();
                vcfg.c_max = c.visibility.c_max;
            }
            if let Some(p) = omega {
                let at = parse_point(&p)?;
                let Some(w) = mask.space().locate(&at) else { bail!("omega {at:?} lies outside the grid") };
                if !mask.is_boundary(w) {
                    bail!("omega {at:?} is not a boundary cell");
                }
                let c_star = min_john_constant(&mask, &dfield, z0, w, &vcfg);
                emit(&out, &serde_json::json!({ "z0": z0, "omega": w, "c_star": c_star }))?;
            } else {
                let Some(c) = c else { bail!("need --c or --omega") };
                let vis = visible_set(&mask, &dfield, z0, c, &vcfg)?;
                emit(&out, &vis)?;
            }
        }
        Command::Verify { src, tree, s, eps, out } => {
            let (mask, dfield, cfg) = src.load()?;
            let tree: GenerationTree = read_json(&tree)?;
            let s = s.or(cfg.as_ref().map(|c| c.s)).unwrap_or(mask.space().dim() as f64 - 1.0);
            let eps = eps.or(cfg.as_ref().map(|c| c.eps)).unwrap_or(0.2);
            let diag = DiagnosticsConfig::new(mask.space().dim(), s, eps)?;
            let (chains, chain_failures) = chain_certificates(&tree);
            let paths = assemble_all(&tree, &mask, &dfield)?;
            let m = paths.iter().map(|p| p.m).fold(1.0, f64::max);
            let bound = john_bound(&tree, m);
            let john_failures = paths.iter().filter(|p| p.john_constant > bound).count();
            let measure = build_tree_measure(&tree)?;
            let scan = frostman_scan(mask.space(), &tree, &measure, s, eps);
            let counts = verify_ball_count(&tree, &diag);
            let ok = chain_failures == 0 && john_failures == 0 && scan.passes();
            emit(
                &out,
                &serde_json::json!({
                    "chain_paths": chains,
                    "chain_failures": chain_failures,
                    "m": m,
                    "john_bound": bound,
                    "john_failures": john_failures,
                    "measure_total": measure.total(),
                    "frostman": scan,
                    "ball_count": counts,
                    "passed": ok,
                }),
            )?;
            return Ok(ok);
        }
        Command::Render { src, tree, paths, vis, out } => {
            let (mask, _, _) = src.load()?;
            let tree: Option<GenerationTree> = tree.as_ref().map(read_json).transpose()?;
            let paths: Option<Vec<PathArtifact>> = paths.as_ref().map(read_json).transpose()?;
            let vis: Option<VisibilityResult> = vis.as_ref().map(read_json).transpose()?;
            let cells: Vec<Vec<usize>> = paths.iter().flatten().map(|p| p.cells.clone()).collect();
            let mut layers = Vec::new();
            if let Some(v) = &vis {
                layers.push(Layer::Visible(&v.visible));
            }
            if let Some(t) = &tree {
                layers.push(Layer::Tree(t));
            }
            if paths.is_some() {
                layers.push(Layer::Paths(&cells));
            }
            std::fs::write(&out, render_svg(&mask, &layers)?)?;
        }
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(o) = out {
                cfg.output = o;
            }
            let report = run_experiment(&cfg)?;
            write_json(&cfg.output, "summary.json", &serde_json::json!({ "passed": report.passed(), "failures": report.failures }))?;
            eprintln!("theorem ratio {:.6}; failures: {:?}", report.theorem.ratio, report.failures);
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
