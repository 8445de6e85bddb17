//! Experiment configuration.

use std::path::PathBuf;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};
use vb_core::construction::{EtaBound, StepOneReading};
use vb_core::domaingen::DomainSpec;
use vb_core::visibility::Targets;
use vb_core::{DistanceField, DomainMask};

/// How the base point is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Z0Rule {
    /// The cell containing a world point.
    Point { at: Vec<f64> },
    /// The inside cell farthest from the complement (lowest index on ties).
    Deepest,
}

impl Z0Rule {
    pub fn resolve(&self, mask: &DomainMask<f64>, dfield: &DistanceField<f64>) -> Result<usize> {
        match self {
            Z0Rule::Point { at } => {
                let Some(i) = mask.space().locate(at) else { bail!("z0 {at:?} lies outside the grid") };
                if !mask.is_inside(i) {
                    bail!("z0 {at:?} is not inside the domain");
                }
                Ok(i)
            }
            Z0Rule::Deepest => Ok(dfield.max().0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisibilitySettings {
    /// Visibility is computed at `c_factor` times the certified constant.
    pub c_factor: f64,
    /// Extra constants at which only the visible count is reported.
    pub c_ladder: Vec<f64>,
    pub targets: Targets,
    pub c_max: f64,
}

impl Default for VisibilitySettings {
    fn default() -> Self {
        Self { c_factor: 1.1, c_ladder: Vec::new(), targets: Targets::All, c_max: 1e3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContentSettings {
    /// Smallest dyadic side in world units; `None` means one cell.
    pub scale_floor: Option<f64>,
    /// Number of boundary cells sampled as thickness centers.
    pub thickness_centers: usize,
}

impl Default for ContentSettings {
    fn default() -> Self {
        Self { scale_floor: None, thickness_centers: 256 }
    }
}

/// Checks that decide the exit code of `run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Assertions {
    pub containment: bool,
    pub john_bound: bool,
    pub chain_certificates: bool,
    pub frostman: bool,
    /// Require `eta < eta2` once the ball-count constant is fitted.
    pub eta_bound: bool,
    pub min_theorem_ratio: Option<f64>,
}

impl Default for Assertions {
    fn default() -> Self {
        Self {
            containment: true,
            john_bound: true,
            chain_certificates: true,
            frostman: true,
            eta_bound: false,
            min_theorem_ratio: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub z0: Z0Rule,
    pub s: f64,
    pub eps: f64,
    pub eta: f64,
    pub depth: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub eta_policy: EtaBound,
    #[serde(default)]
    pub step_one: StepOneReading,
    #[serde(default)]
    pub content: ContentSettings,
    #[serde(default)]
    pub visibility: VisibilitySettings,
    #[serde(default)]
    pub assertions: Assertions,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_kappa() -> f64 {
    4.0
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Preconditions that need no computation.
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            bail!("eta = {} must lie in (0, 1)", self.eta);
        }
        if self.eta_policy == EtaBound::Enforce && self.eta >= 1.0 / 168.0 {
            bail!("eta = {} is not below eta1 = 1/168 (set eta_policy = \"report\" to run anyway)", self.eta);
        }
        if !(self.eps > 0.0 && self.eps < self.s) {
            bail!("need 0 < eps < s, got eps = {}, s = {}", self.eps, self.s);
        }
        if self.depth == 0 {
            bail!("depth must be at least 1");
        }
        if !(self.kappa >= 0.0) {
            bail!("kappa must be nonnegative");
        }
        if !(self.visibility.c_factor >= 1.0) {
            bail!("visibility.c_factor must be at least 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vb_core::domaingen::DomainKind;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            domain: DomainSpec { kind: DomainKind::Disk { radius: 1.0 }, h: 1.0 / 64.0 },
            z0: Z0Rule::Point { at: vec![0.0, 0.0] },
            s: 1.0,
            eps: 0.2,
            eta: 0.125,
            depth: 1,
            kappa: 4.0,
            eta_policy: EtaBound::Report,
            step_one: StepOneReading::SeedBall,
            content: ContentSettings::default(),
            visibility: VisibilitySettings { c_ladder: vec![1.0, 2.0], ..Default::default() },
            assertions: Assertions::default(),
            output: PathBuf::from("x"),
            seed: 7,
        }
    }

    #[test]
    fn round_trips_through_json() {
        let c = sample();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }

    #[test]
    fn invalid_eta_is_rejected_up_front() {
        let mut c = sample();
        c.eta = 1.5;
        assert!(c.validate().is_err());
        c.eta = 0.125;
        c.eta_policy = EtaBound::Enforce;
        assert!(c.validate().is_err());
        c.eta = 1.0 / 200.0;
        assert!(c.validate().is_ok());
    }
}
