//! Run configuration read from a TOML file with dotted sections.
//!
//! Every key has a default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use singlepeak_core::melnikov::{CorrectionOptions, DecayOptions};
use singlepeak_core::reduction::EPS_MAX;
use singlepeak_core::{
    make_potential, CheckOptions, Dimension, FieldBasis, G2Rule, PotentialPair, PotentialSpec, QuadMode, SearchOptions,
    SliceGrid,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] singlepeak_core::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Space dimension N >= 3.
    pub dimension: usize,
    /// Exponent of eps in front of V; 2 gives the full Melnikov function.
    pub alpha: f64,
    /// Values of eps used by `solve`.
    pub epsilon: Vec<f64>,
    pub seed: u64,
    pub output: PathBuf,
    pub potential: PotentialConfig,
    pub quadrature: QuadratureConfig,
    pub scan: ScanConfig,
    pub search: SearchConfig,
    pub checks: ChecksConfig,
    pub asymptotics: AsymptoticsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dimension: 5,
            alpha: 2.0,
            epsilon: vec![0.1, 0.05, 0.025],
            seed: 0,
            output: PathBuf::from("out"),
            potential: PotentialConfig::default(),
            quadrature: QuadratureConfig::default(),
            scan: ScanConfig::default(),
            search: SearchConfig::default(),
            checks: ChecksConfig::default(),
            asymptotics: AsymptoticsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(rename = "A")]
    pub a: PotentialSpec,
    #[serde(rename = "V")]
    pub v: PotentialSpec,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self {
            a: PotentialSpec::family("gaussian-envelope"),
            v: PotentialSpec::family("gaussian"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// `product` (peaked Gauss rule) or `qmc`.
    pub scheme: QuadMode,
    /// Level of the product rule for G2.
    pub level: usize,
    /// Relative tolerance of the QMC rule.
    pub qmc_rel_tol: f64,
    /// Highest harmonic degree.
    pub kmax: usize,
    pub radial_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            scheme: QuadMode::Product,
            level: singlepeak_core::functionals::BUBBLE_G2_LEVEL,
            qmc_rel_tol: 1e-3,
            kmax: 8,
            radial_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub mu_min: f64,
    pub mu_max: f64,
    pub n_mu: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub n_s: usize,
    /// Slice origin; the zero vector when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
    /// Slice direction; e1 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            mu_min: 0.01,
            mu_max: 10.0,
            n_mu: 16,
            s_min: -5.0,
            s_max: 5.0,
            n_s: 21,
            origin: None,
            direction: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub grad_tol_rel: f64,
    pub merge_fraction: f64,
    pub fd_step: f64,
    pub max_starts: usize,
    pub simplex_iters: u64,
    pub newton_iters: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let d = SearchOptions::default();
        Self {
            grad_tol_rel: d.grad_tol_rel,
            merge_fraction: d.merge_fraction,
            fd_step: d.fd_step,
            max_starts: d.max_starts,
            simplex_iters: d.simplex_iters,
            newton_iters: d.newton_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChecksConfig {
    /// Lebesgue exponent for A; N/2 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Lebesgue exponent for V; N/4 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub rel_tol: f64,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            r: None,
            s: None,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsConfig {
    /// Centres for the small-mu limit; three points on the slice when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<Vec<f64>>>,
    /// Smallest mu of the Richardson triple (mu, 2 mu, 4 mu).
    pub mu: f64,
    pub limit_tolerance: f64,
    pub decay_tolerance: f64,
    pub mu_box_max: f64,
    pub xi_box_max: f64,
    pub corner_mu: f64,
    pub corner_xi: f64,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self {
            xi: None,
            mu: 0.01,
            limit_tolerance: 0.02,
            decay_tolerance: 1e-3,
            mu_box_max: 40.0,
            xi_box_max: 20.0,
            corner_mu: 10.0,
            corner_xi: 20.0,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: PathBuf::from("<string>"),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn dim(&self) -> Result<Dimension, ConfigError> {
        Dimension::new(self.dimension).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Checks ranges that do not need the potentials.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.dim()?.n();
        if !(1.0..=2.0).contains(&self.alpha) {
            return invalid(format!("alpha = {} outside [1, 2]", self.alpha));
        }
        if self.epsilon.is_empty() {
            return invalid("epsilon list is empty");
        }
        for &e in &self.epsilon {
            if !(e > 0.0 && e <= EPS_MAX) {
                return invalid(format!("epsilon {e} outside (0, {EPS_MAX}]"));
            }
        }
        let q = &self.quadrature;
        if q.kmax < 2 {
            return invalid("quadrature.kmax must be at least 2");
        }
        if q.level >= singlepeak_core::functionals::PEAKED_NODES.len() {
            return invalid(format!("quadrature.level {} too large", q.level));
        }
        if !(q.qmc_rel_tol > 0.0) {
            return invalid("quadrature.qmc_rel_tol must be positive");
        }
        let s = &self.scan;
        if !(s.mu_min > 0.0 && s.mu_max > s.mu_min) {
            return invalid("scan needs 0 < mu_min < mu_max");
        }
        if !(s.s_max > s.s_min) {
            return invalid("scan needs s_min < s_max");
        }
        if s.n_mu < 2 || s.n_s < 2 {
            return invalid("scan needs at least 2 points per axis");
        }
        for (name, v) in [("origin", &s.origin), ("direction", &s.direction)] {
            if let Some(v) = v {
                if v.len() != n {
                    return invalid(format!("scan.{name} has {} components, expected {n}", v.len()));
                }
            }
        }
        if let Some(pts) = &self.asymptotics.xi {
            if pts.is_empty() || pts.iter().any(|p| p.len() != n) {
                return invalid(format!("asymptotics.xi must list points with {n} components"));
            }
        }
        let a = &self.asymptotics;
        if !(a.mu > 0.0 && a.limit_tolerance > 0.0 && a.decay_tolerance > 0.0) {
            return invalid("asymptotics mu and tolerances must be positive");
        }
        if !(a.mu_box_max > 1.0 && a.xi_box_max > 1.0 && a.corner_mu > 0.0) {
            return invalid("asymptotics box must extend beyond 1");
        }
        Ok(())
    }

    pub fn potentials(&self, base: &Path) -> Result<PotentialPair, ConfigError> {
        let dim = self.dim()?;
        make_potential(&self.potential.a, &self.potential.v, dim, base)
            .map_err(|e| ConfigError::Core(singlepeak_core::Error::from(e)))
    }

    pub fn basis(&self) -> Result<std::sync::Arc<FieldBasis>, ConfigError> {
        FieldBasis::new(self.dim()?, self.quadrature.kmax, self.quadrature.radial_nodes)
            .map_err(|e| ConfigError::Core(e.into()))
    }

    pub fn g2_rule(&self) -> G2Rule {
        match self.quadrature.scheme {
            QuadMode::Product => G2Rule::Level(self.quadrature.level),
            QuadMode::Qmc => G2Rule::Qmc {
                rel_tol: self.quadrature.qmc_rel_tol,
                seed: self.seed,
            },
        }
    }

    pub fn origin(&self) -> Vec<f64> {
        self.scan.origin.clone().unwrap_or_else(|| vec![0.0; self.dimension])
    }

    pub fn direction(&self) -> Vec<f64> {
        self.scan.direction.clone().unwrap_or_else(|| {
            let mut e = vec![0.0; self.dimension];
            e[0] = 1.0;
            e
        })
    }

    pub fn grid(&self) -> Result<SliceGrid, ConfigError> {
        let s = &self.scan;
        SliceGrid::new(
            (s.mu_min, s.mu_max),
            s.n_mu,
            (s.s_min, s.s_max),
            s.n_s,
            self.origin(),
            self.direction(),
        )
        .map_err(|e| ConfigError::Core(e.into()))
    }

    pub fn search_options(&self) -> SearchOptions {
        let s = &self.search;
        SearchOptions {
            grad_tol_rel: s.grad_tol_rel,
            merge_fraction: s.merge_fraction,
            fd_step: s.fd_step,
            max_starts: s.max_starts,
            simplex_iters: s.simplex_iters,
            newton_iters: s.newton_iters,
            ..SearchOptions::default()
        }
    }

    pub fn check_options(&self) -> Result<CheckOptions, ConfigError> {
        let d = CheckOptions::defaults(self.dim()?);
        Ok(CheckOptions {
            r: self.checks.r.unwrap_or(d.r),
            s: self.checks.s.unwrap_or(d.s),
            rel_tol: self.checks.rel_tol,
            seed: self.seed,
        })
    }

    /// Centres for the small-mu comparison.
    pub fn limit_points(&self) -> Vec<Vec<f64>> {
        if let Some(p) = &self.asymptotics.xi {
            return p.clone();
        }
        let (o, d) = (self.origin(), self.direction());
        [0.0, 0.5, -0.3]
            .iter()
            .map(|&s| o.iter().zip(&d).map(|(o, d)| o + s * d).collect())
            .collect()
    }

    pub fn decay_options(&self) -> Result<DecayOptions, ConfigError> {
        let a = &self.asymptotics;
        let d = DecayOptions::defaults(self.dim()?);
        Ok(DecayOptions {
            xi_ref: self.origin(),
            direction: self.direction(),
            far_xi: vec![a.xi_box_max / 4.0, a.xi_box_max / 2.0, a.xi_box_max],
            large_mu: vec![a.mu_box_max / 4.0, a.mu_box_max / 2.0, a.mu_box_max],
            corner_mu: a.corner_mu,
            corner_xi: a.corner_xi,
            tolerance: a.decay_tolerance,
            ..d
        })
    }

    pub fn correction_options(&self) -> Result<CorrectionOptions, ConfigError> {
        Ok(CorrectionOptions {
            xi_ref: self.origin(),
            direction: self.direction(),
            ..CorrectionOptions::defaults(self.dim()?)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn dotted_keys_are_accepted() {
        let c = RunConfig::from_toml(
            "dimension = 6\npotential.A.family = \"algebraic-decay\"\npotential.A.width = 2.0\nscan.n_mu = 3\n",
        )
        .unwrap();
        assert_eq!(c.dimension, 6);
        assert_eq!(c.potential.a.family, "algebraic-decay");
        assert_eq!(c.potential.a.width, Some(2.0));
        assert_eq!(c.scan.n_mu, 3);
        assert_eq!(c.scan.n_s, 21);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let e = RunConfig::from_toml("dimension = 5\nscan.n_mus = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("n_mus"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(RunConfig::from_toml("potential.V.colour = 1").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.scan.origin = Some(vec![0.5, 0.0, 0.0, 0.0, 0.0]);
        c.potential.v = PotentialSpec::family("sign-changing-gaussian");
        c.asymptotics.xi = Some(vec![vec![0.1; 5]]);
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }

    #[test]
    fn validation_catches_ranges() {
        let bad = [
            "alpha = 0.5",
            "epsilon = [0.2]",
            "epsilon = []",
            "scan.mu_min = 0.0",
            "scan.s_min = 3.0\nscan.s_max = 1.0",
            "scan.origin = [0.0, 1.0]",
            "dimension = 2",
            "quadrature.level = 9",
        ];
        for text in bad {
            let c = RunConfig::from_toml(text).unwrap();
            assert!(c.validate().is_err(), "{text}");
        }
    }
}
