//! Run configuration read from JSON.

use crate::error::{CstError, Result};
use crate::group_model::{GroupDescriptor, GroupSpec};
use crate::irreps::enumerate_irreps;
use crate::quadrature::{band_of, GridSpec};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Certify,
    Cst,
    Transport,
    Connection,
    Horizontality,
    TorusGolden,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Certify,
        Suite::Cst,
        Suite::Transport,
        Suite::Connection,
        Suite::Horizontality,
        Suite::TorusGolden,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Certify => "certify",
            Suite::Cst => "cst",
            Suite::Transport => "transport",
            Suite::Connection => "connection",
            Suite::Horizontality => "horizontality",
            Suite::TorusGolden => "torus-golden",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "defaults::certify_tol")]
    pub certify: f64,
    #[serde(default = "defaults::unitarity_tol")]
    pub unitarity: f64,
    #[serde(default = "defaults::connection_tol")]
    pub connection: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            certify: defaults::certify_tol(),
            unitarity: defaults::unitarity_tol(),
            connection: defaults::connection_tol(),
        }
    }
}

mod defaults {
    pub fn certify_tol() -> f64 {
        1e-6
    }
    pub fn unitarity_tol() -> f64 {
        1e-6
    }
    pub fn connection_tol() -> f64 {
        1e-5
    }
    pub fn hbar0() -> f64 {
        1.0
    }
    pub fn hbar_values() -> Vec<f64> {
        vec![0.25, 1.0]
    }
    pub fn s_values() -> Vec<f64> {
        vec![0.5, 2.0]
    }
    pub fn rep_cutoff() -> f64 {
        2.0
    }
    pub fn output_dir() -> std::path::PathBuf {
        "cstlab-out".into()
    }
    pub fn suites() -> Vec<super::Suite> {
        super::Suite::ALL.to_vec()
    }
    pub fn seed() -> u64 {
        7
    }
    pub fn random_vectors() -> usize {
        20
    }
    pub fn sample_points() -> usize {
        8
    }
    pub fn table_levels() -> usize {
        5
    }
    pub fn table_start_radial() -> usize {
        8
    }
    pub fn kernel_points() -> usize {
        64
    }
}

/// Everything a `cstlab` run needs; every field except `group` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupDescriptor,
    #[serde(default = "defaults::hbar0")]
    pub hbar0: f64,
    #[serde(default = "defaults::hbar_values")]
    pub hbar_values: Vec<f64>,
    #[serde(default = "defaults::s_values")]
    pub s_values: Vec<f64>,
    /// Bound on `c_R` for probes, random vectors and certification.
    #[serde(default = "defaults::rep_cutoff")]
    pub rep_cutoff: f64,
    /// Quadrature grid; the smallest exact grid for `rep_cutoff` when absent.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "defaults::suites")]
    pub suites: Vec<Suite>,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    /// Random band-limited vectors per unitarity battery.
    #[serde(default = "defaults::random_vectors")]
    pub random_vectors: usize,
    /// Random `K_C` points for convolution checks and transform samples.
    #[serde(default = "defaults::sample_points")]
    pub sample_points: usize,
    /// Refinement levels written by `table`.
    #[serde(default = "defaults::table_levels")]
    pub table_levels: usize,
    /// Radial node count at level 0 of `table`; doubled per level.
    #[serde(default = "defaults::table_start_radial")]
    pub table_start_radial: usize,
    /// Kernel samples per torus axis, or along the SU(2) class angle.
    #[serde(default = "defaults::kernel_points")]
    pub kernel_points: usize,
}

impl RunConfig {
    /// Default configuration for a group.
    pub fn for_group(spec: &GroupSpec) -> Self {
        RunConfig {
            group: spec.descriptor(),
            hbar0: defaults::hbar0(),
            hbar_values: defaults::hbar_values(),
            s_values: defaults::s_values(),
            rep_cutoff: defaults::rep_cutoff(),
            grid: None,
            tolerances: Tolerances::default(),
            output_dir: defaults::output_dir(),
            suites: defaults::suites(),
            seed: defaults::seed(),
            random_vectors: defaults::random_vectors(),
            sample_points: defaults::sample_points(),
            table_levels: defaults::table_levels(),
            table_start_radial: defaults::table_start_radial(),
            kernel_points: defaults::kernel_points(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<GroupSpec> {
        GroupSpec::try_from(self.group.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        let bad = |msg: String| Err(CstError::Config(msg));
        if self.suites.is_empty() {
            return bad("suites must not be empty".into());
        }
        let mut seen = self.suites.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.suites.len() {
            return bad("suites must not repeat".into());
        }
        for (name, v) in [
            ("hbar0", self.hbar0),
            ("rep_cutoff", self.rep_cutoff),
            ("tolerances.certify", self.tolerances.certify),
            ("tolerances.unitarity", self.tolerances.unitarity),
            ("tolerances.connection", self.tolerances.connection),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        for (name, list) in [("hbar_values", &self.hbar_values), ("s_values", &self.s_values)] {
            if list.is_empty() {
                return bad(format!("{name} must not be empty"));
            }
            if let Some(v) = list.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return bad(format!("{name} must hold positive finite values, got {v}"));
            }
        }
        for (name, v) in [
            ("random_vectors", self.random_vectors),
            ("sample_points", self.sample_points),
            ("table_levels", self.table_levels),
            ("table_start_radial", self.table_start_radial),
            ("kernel_points", self.kernel_points),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("output_dir must not be empty".into());
        }
        if let Some(grid) = &self.grid {
            if grid.family() != spec.family() {
                return bad("grid family differs from group family".into());
            }
            grid.validate(&spec)?;
            let need = band_of(&enumerate_irreps(&spec, self.rep_cutoff));
            if grid.band_limit() < need {
                return bad(format!(
                    "grid band limit {} is below the band {need} of rep_cutoff {}",
                    grid.band_limit(),
                    self.rep_cutoff
                ));
            }
        }
        Ok(())
    }

    /// Band limit of all labels with `c_R ≤ rep_cutoff`.
    pub fn band(&self) -> Result<u32> {
        Ok(band_of(&enumerate_irreps(&self.spec()?, self.rep_cutoff)))
    }

    /// The configured grid, or the smallest exact grid for `rep_cutoff`.
    pub fn grid(&self) -> Result<GridSpec> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => Ok(GridSpec::recommended(&self.spec()?, self.band()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = RunConfig::from_json(r#"{"group": {"family": "torus", "n": 1}}"#).unwrap();
        assert_eq!(cfg, RunConfig::for_group(&GroupSpec::torus(1).unwrap()));
        assert_eq!(cfg.suites.len(), 6);
        assert_eq!(
            cfg.grid().unwrap(),
            GridSpec::recommended(&GroupSpec::torus(1).unwrap(), 1)
        );
    }

    #[test]
    fn rejects_invalid_configs() {
        let cases = [
            r#"{"group": {"family": "torus"}, "suites": []}"#,
            r#"{"group": {"family": "torus"}, "hbar0": 0}"#,
            r#"{"group": {"family": "torus"}, "hbar_values": [1.0, -0.5]}"#,
            r#"{"group": {"family": "su2"}, "s_values": []}"#,
            r#"{"group": {"family": "su2"}, "tolerances": {"connection": 0}}"#,
            r#"{"group": {"family": "su2"}, "suites": ["cst", "cst"]}"#,
            r#"{"group": {"family": "su2"}, "suites": ["bogus"]}"#,
            r#"{"group": {"family": "su2", "n": 2}}"#,
            r#"{"group": {"family": "torus"}, "unknown": 1}"#,
            r#"{"group": {"family": "torus"}, "rep_cutoff": 9,
                "grid": {"family": "torus", "points_per_angle": 7, "radial_nodes": 80, "band_limit": 2}}"#,
            r#"{"group": {"family": "torus"},
                "grid": {"family": "su2", "euler_alpha_points": 3, "euler_gamma_points": 5,
                         "legendre_beta_nodes": 2, "radial_nodes": 8, "angular_sphere_rule": 3, "band_limit": 2}}"#,
        ];
        for text in cases {
            assert!(RunConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
            assert_eq!(serde_json::from_str::<Suite>(&json).unwrap(), s);
        }
    }
}
