//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, StarDomain};
use crate::pipeline::{RunOptions, X0Policy};
use crate::spectral::DEFAULT_DEGREE;
use crate::stability::{MuSource, StabilityParams, Theorem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub domains: Vec<DomainEntry>,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "all_theorems")]
    pub theorems: Vec<Theorem>,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn all_theorems() -> Vec<Theorem> {
    Theorem::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainEntry {
    pub id: String,
    pub shape: DomainSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Disk {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: Point,
    },
    Ellipse {
        semi_x: f64,
        semi_y: f64,
    },
    Fourier {
        base_radius: f64,
        #[serde(default)]
        cos_coeffs: Vec<f64>,
        #[serde(default)]
        sin_coeffs: Vec<f64>,
        #[serde(default)]
        center: Point,
    },
    /// `ρ = 1 + t cos kθ`.
    PerturbedDisk {
        t: f64,
        k: usize,
    },
}

fn one() -> f64 {
    1.0
}

impl DomainSpec {
    pub fn build(&self) -> Result<StarDomain> {
        match self {
            DomainSpec::Disk { radius, center } => StarDomain::fourier(*radius, vec![], vec![], *center),
            DomainSpec::Ellipse { semi_x, semi_y } => StarDomain::ellipse(*semi_x, *semi_y),
            DomainSpec::Fourier {
                base_radius,
                cos_coeffs,
                sin_coeffs,
                center,
            } => StarDomain::fourier(*base_radius, cos_coeffs.clone(), sin_coeffs.clone(), *center),
            DomainSpec::PerturbedDisk { t, k } => StarDomain::perturbed_disk(*t, *k),
        }
    }
}

/// Finest mesh and number of levels; each coarser level halves both counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub n_radial: usize,
    pub n_angular: usize,
    pub refinement_levels: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            n_radial: 32,
            n_angular: 128,
            refinement_levels: 1,
        }
    }
}

impl MeshConfig {
    /// `(n_radial, n_angular)` from coarsest to finest.
    pub fn levels(&self) -> Vec<(usize, usize)> {
        (0..self.refinement_levels)
            .rev()
            .map(|l| (self.n_radial >> l, self.n_angular >> l))
            .collect()
    }

    pub fn finest(&self) -> (usize, usize) {
        (self.n_radial, self.n_angular)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "sweep_parameter")]
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "sweep_mode")]
    pub mode_k: usize,
}

fn sweep_parameter() -> String {
    "t".into()
}

fn sweep_mode() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsConfig {
    pub csv_path: String,
    pub json_path: String,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            csv_path: "sweep.csv".into(),
            json_path: "sweep.json".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub gamma: f64,
    pub sobolev_c: Option<f64>,
    pub c0: f64,
    pub basis_degree: usize,
    pub x0_policy: X0Policy,
    pub mu2: Option<f64>,
    pub mu_source: MuSource,
    pub positive_part: bool,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        let s = StabilityParams::default();
        ParamsConfig {
            gamma: s.gamma,
            sobolev_c: s.sobolev_c,
            c0: 1.0,
            basis_degree: DEFAULT_DEGREE,
            x0_policy: X0Policy::MinPoint,
            mu2: None,
            mu_source: s.mu_source,
            positive_part: s.positive_part,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Largest accepted `residual_rel` at the finest level.
    pub residual_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { residual_rel: 1e-2 }
    }
}

fn bad(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let key = if path == "." { "config".to_string() } else { path };
            bad(&key, e.inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        if m.refinement_levels < 1 {
            return Err(bad("mesh.refinement_levels", "must be at least 1"));
        }
        if m.refinement_levels > 8 {
            return Err(bad("mesh.refinement_levels", "at most 8 levels are supported"));
        }
        let div = 1usize << (m.refinement_levels - 1);
        if m.n_radial == 0 || !m.n_radial.is_multiple_of(div) {
            return Err(bad("mesh.n_radial", format!("must be a positive multiple of {div}")));
        }
        if !m.n_angular.is_multiple_of(2 * div) || m.n_angular / div < 16 {
            return Err(bad(
                "mesh.n_angular",
                format!("must be a multiple of {} with at least 16 cells on the coarsest level", 2 * div),
            ));
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, d) in self.domains.iter().enumerate() {
            if d.id.is_empty() || !d.id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                return Err(bad(&format!("domains[{i}].id"), "must be non-empty and use only [A-Za-z0-9._-]"));
            }
            if !ids.insert(d.id.as_str()) {
                return Err(bad(&format!("domains[{i}].id"), format!("duplicate id {:?}", d.id)));
            }
            d.shape.build().map_err(|e| bad(&format!("domains[{i}].shape"), e))?;
        }
        if let Some(s) = &self.sweep {
            if s.parameter != "t" {
                return Err(bad("sweep.parameter", "only \"t\" is supported"));
            }
            if s.values.is_empty() {
                return Err(bad("sweep.values", "must not be empty"));
            }
            if s.values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(bad("sweep.values", "must be positive"));
            }
            if s.values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(bad("sweep.values", "must be strictly increasing"));
            }
            if s.mode_k == 0 {
                return Err(bad("sweep.mode_k", "must be at least 1"));
            }
        }
        if self.theorems.is_empty() {
            return Err(bad("theorems", "must not be empty"));
        }
        let p = &self.params;
        if !(p.gamma > 0.0 && p.gamma < 1.0) {
            return Err(bad("params.gamma", "must lie in (0, 1)"));
        }
        if p.sobolev_c.is_some_and(|c| !(c.is_finite() && c > 0.0)) {
            return Err(bad("params.sobolev_c", "must be positive"));
        }
        if !(p.c0.is_finite() && p.c0 > 0.0) {
            return Err(bad("params.c0", "must be positive"));
        }
        if p.basis_degree < 1 {
            return Err(bad("params.basis_degree", "must be at least 1"));
        }
        if p.mu2.is_some_and(|v| !(v.is_finite() && v > 0.0)) {
            return Err(bad("params.mu2", "must be positive"));
        }
        if !(self.thresholds.residual_rel.is_finite() && self.thresholds.residual_rel > 0.0) {
            return Err(bad("thresholds.residual_rel", "must be positive"));
        }
        if self.outputs.csv_path.is_empty() {
            return Err(bad("outputs.csv_path", "must not be empty"));
        }
        if self.outputs.json_path.is_empty() {
            return Err(bad("outputs.json_path", "must not be empty"));
        }
        Ok(())
    }

    /// Pipeline options at the finest mesh.
    pub fn run_options(&self) -> RunOptions {
        let p = &self.params;
        RunOptions {
            n_radial: self.mesh.n_radial,
            n_angular: self.mesh.n_angular,
            basis_degree: p.basis_degree,
            mu2: p.mu2,
            c0: p.c0,
            x0_policy: p.x0_policy,
            theorems: self.theorems.clone(),
            stability: StabilityParams {
                gamma: p.gamma,
                sobolev_c: p.sobolev_c,
                mu_source: p.mu_source,
                positive_part: p.positive_part,
            },
        }
    }

    pub fn built_domains(&self) -> Result<Vec<(String, StarDomain)>> {
        self.domains.iter().map(|d| Ok((d.id.clone(), d.shape.build()?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::parse(r#"{"domains":[{"id":"disk","shape":{"kind":"disk"}}]}"#).unwrap();
        assert_eq!(cfg.mesh, MeshConfig::default());
        assert_eq!(cfg.theorems.len(), 5);
        assert_eq!(cfg.built_domains().unwrap()[0].1, StarDomain::disk(1.0).unwrap());
    }

    #[test]
    fn levels_halve_from_finest() {
        let m = MeshConfig {
            n_radial: 32,
            n_angular: 128,
            refinement_levels: 3,
        };
        assert_eq!(m.levels(), vec![(8, 32), (16, 64), (32, 128)]);
    }

    #[test]
    fn errors_name_the_key() {
        let cases = [
            (r#"{"mesh":{"n_radial":"x"}}"#, "mesh.n_radial"),
            (r#"{"mesh":{"refinement_levels":0}}"#, "mesh.refinement_levels"),
            (r#"{"sweep":{"values":[]}}"#, "sweep.values"),
            (r#"{"sweep":{"values":[0.2,0.1]}}"#, "sweep.values"),
            (r#"{"bogus":1}"#, "bogus"),
            (r#"{"params":{"gamma":2}}"#, "params.gamma"),
            (r#"{"domains":[{"id":"a","shape":{"kind":"ellipse","semi_x":-1,"semi_y":1}}]}"#, "domains[0].shape"),
            (r#"{"domains":[{"id":"a","shape":{"kind":"disk","radus":1}}]}"#, "radus"),
        ];
        for (text, key) in cases {
            let msg = ExperimentConfig::parse(text).unwrap_err().to_string();
            assert!(msg.contains(key), "{text} -> {msg}");
        }
    }
}
