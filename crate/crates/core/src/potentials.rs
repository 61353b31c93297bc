//! Magnetic and electric potential families and numerical checks of the
//! standing integrability assumptions.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instanton::Dimension;
use crate::quadrature::{integrate_rn, Chart, QuadMode, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("unknown {kind} potential family '{name}'")]
    UnknownFamily { kind: &'static str, name: String },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("user table {path}: {reason}")]
    Table { path: String, reason: String },
}

fn invalid(name: &'static str, reason: impl Into<String>) -> PotentialError {
    PotentialError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Cubic radial-basis interpolant with a linear polynomial tail; zero
/// outside the ball containing the table nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfTable {
    nodes: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
    linear: Vec<Vec<f64>>,
    radius: f64,
}

impl RbfTable {
    /// Interpolates `values[j][col]` given at `nodes[j]`.
    pub fn new(nodes: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self, String> {
        let m = nodes.len();
        if m == 0 {
            return Err("table has no rows".into());
        }
        let n = nodes[0].len();
        if m < n + 2 {
            return Err(format!("table needs at least {} rows, got {m}", n + 2));
        }
        let cols = values[0].len();
        let size = m + n + 1;
        let mut sys = DMatrix::zeros(size, size);
        for i in 0..m {
            for j in 0..m {
                sys[(i, j)] = dist(&nodes[i], &nodes[j]).powi(3);
            }
            sys[(i, m)] = 1.0;
            sys[(m, i)] = 1.0;
            for k in 0..n {
                sys[(i, m + 1 + k)] = nodes[i][k];
                sys[(m + 1 + k, i)] = nodes[i][k];
            }
        }
        let lu = sys.lu();
        let mut weights = Vec::with_capacity(cols);
        let mut linear = Vec::with_capacity(cols);
        for c in 0..cols {
            let rhs = DVector::from_fn(size, |i, _| if i < m { values[i][c] } else { 0.0 });
            let sol = lu.solve(&rhs).ok_or("singular interpolation system (repeated nodes?)")?;
            weights.push(sol.rows(0, m).iter().copied().collect());
            linear.push(sol.rows(m, n + 1).iter().copied().collect());
        }
        let radius = nodes.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
        Ok(Self {
            nodes,
            weights,
            linear,
            radius,
        })
    }

    pub fn columns(&self) -> usize {
        self.weights.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eval(&self, x: &[f64], col: usize) -> f64 {
        if x.iter().map(|v| v * v).sum::<f64>().sqrt() > self.radius {
            return 0.0;
        }
        let w = &self.weights[col];
        let l = &self.linear[col];
        let mut acc = l[0];
        for (k, xk) in x.iter().enumerate() {
            acc += l[k + 1] * xk;
        }
        for (p, wj) in self.nodes.iter().zip(w) {
            acc += wj * dist(p, x).powi(3);
        }
        acc
    }

    /// Reads a CSV with header `x1..xN` followed by the named value columns.
    pub fn from_csv(path: &Path, dim: usize, columns: &[String]) -> Result<Self, PotentialError> {
        let err = |reason: String| PotentialError::Table {
            path: path.display().to_string(),
            reason,
        };
        let mut rdr = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
        let header = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let mut xcols = Vec::with_capacity(dim);
        for k in 1..=dim {
            xcols.push(find(&format!("x{k}")).ok_or_else(|| err(format!("missing column x{k}")))?);
        }
        let mut vcols = Vec::with_capacity(columns.len());
        for c in columns {
            vcols.push(find(c).ok_or_else(|| err(format!("missing column {c}")))?);
        }
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| err(e.to_string()))?;
            let get = |i: usize| -> Result<f64, PotentialError> {
                rec.get(i)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("row {}: bad number in column {}", line + 2, i + 1)))
            };
            nodes.push(xcols.iter().map(|&i| get(i)).collect::<Result<Vec<_>, _>>()?);
            values.push(vcols.iter().map(|&i| get(i)).collect::<Result<Vec<_>, _>>()?);
        }
        Self::new(nodes, values).map_err(err)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum MagneticFamily {
    Zero,
    /// a e^{-lambda|x-c|^2} + s e^{-lambda|x-c|^2} (-(x2-c2), x1-c1, 0, ...).
    GaussianEnvelope {
        amplitude: Vec<f64>,
        lambda: f64,
        center: Vec<f64>,
        swirl: f64,
    },
    /// a (1 + |x-c|^2/w^2)^{-p/2}.
    AlgebraicDecay {
        amplitude: Vec<f64>,
        width: f64,
        power: f64,
        center: Vec<f64>,
    },
    /// The pure gauge field grad(s e^{-lambda|x-c|^2}).
    GradientGaussian { strength: f64, lambda: f64, center: Vec<f64> },
    UserTable(Arc<RbfTable>),
}

/// Magnetic potential A with its analytic divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPotential {
    dim: usize,
    family: MagneticFamily,
}

fn check_vec(name: &'static str, v: &[f64], n: usize) -> Result<(), PotentialError> {
    if v.len() != n {
        return Err(invalid(name, format!("expected {n} components, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(name, "non-finite component"));
    }
    Ok(())
}

fn check_pos(name: &'static str, v: f64) -> Result<(), PotentialError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(invalid(name, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

fn check_finite(name: &'static str, v: f64) -> Result<(), PotentialError> {
    if !v.is_finite() {
        return Err(invalid(name, format!("must be finite, got {v}")));
    }
    Ok(())
}

impl MagneticPotential {
    pub fn zero(dim: Dimension) -> Self {
        Self {
            dim: dim.n(),
            family: MagneticFamily::Zero,
        }
    }

    pub fn new(dim: Dimension, family: MagneticFamily) -> Result<Self, PotentialError> {
        let n = dim.n();
        match &family {
            MagneticFamily::Zero => {}
            MagneticFamily::GaussianEnvelope {
                amplitude,
                lambda,
                center,
                swirl,
            } => {
                check_vec("amplitude", amplitude, n)?;
                check_vec("center", center, n)?;
                check_pos("lambda", *lambda)?;
                check_finite("swirl", *swirl)?;
            }
            MagneticFamily::AlgebraicDecay {
                amplitude,
                width,
                power,
                center,
            } => {
                check_vec("amplitude", amplitude, n)?;
                check_vec("center", center, n)?;
                check_pos("width", *width)?;
                if !(*power >= 0.0 && power.is_finite()) {
                    return Err(invalid("power", format!("growing potentials are not admissible, got {power}")));
                }
            }
            MagneticFamily::GradientGaussian {
                strength,
                lambda,
                center,
            } => {
                check_finite("strength", *strength)?;
                check_pos("lambda", *lambda)?;
                check_vec("center", center, n)?;
            }
            MagneticFamily::UserTable(t) => {
                if t.columns() != n + 1 {
                    return Err(invalid("table", format!("expected {} value columns", n + 1)));
                }
            }
        }
        Ok(Self { dim: n, family })
    }

    pub fn family(&self) -> &MagneticFamily {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            MagneticFamily::Zero => "zero",
            MagneticFamily::GaussianEnvelope { .. } => "gaussian-envelope",
            MagneticFamily::AlgebraicDecay { .. } => "algebraic-decay",
            MagneticFamily::GradientGaussian { .. } => "gradient-gaussian",
            MagneticFamily::UserTable(_) => "user-table",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, MagneticFamily::Zero)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes A(x) into `out` and returns div A(x).
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        match &self.family {
            MagneticFamily::Zero => {
                out.iter_mut().for_each(|v| *v = 0.0);
                0.0
            }
            MagneticFamily::GaussianEnvelope {
                amplitude,
                lambda,
                center,
                swirl,
            } => {
                let e = (-lambda * sq_dist(x, center)).exp();
                let mut div = 0.0;
                for k in 0..self.dim {
                    out[k] = amplitude[k] * e;
                    div += -2.0 * lambda * amplitude[k] * (x[k] - center[k]) * e;
                }
                if *swirl != 0.0 {
                    out[0] -= swirl * e * (x[1] - center[1]);
                    out[1] += swirl * e * (x[0] - center[0]);
                }
                div
            }
            MagneticFamily::AlgebraicDecay {
                amplitude,
                width,
                power,
                center,
            } => {
                let q = 1.0 + sq_dist(x, center) / (width * width);
                let f = q.powf(-power / 2.0);
                let g = -power / (width * width) * q.powf(-power / 2.0 - 1.0);
                let mut div = 0.0;
                for k in 0..self.dim {
                    out[k] = amplitude[k] * f;
                    div += amplitude[k] * (x[k] - center[k]) * g;
                }
                div
            }
            MagneticFamily::GradientGaussian {
                strength,
                lambda,
                center,
            } => {
                let d2 = sq_dist(x, center);
                let e = strength * (-lambda * d2).exp();
                for k in 0..self.dim {
                    out[k] = -2.0 * lambda * (x[k] - center[k]) * e;
                }
                e * (4.0 * lambda * lambda * d2 - 2.0 * lambda * self.dim as f64)
            }
            MagneticFamily::UserTable(t) => {
                for k in 0..self.dim {
                    out[k] = t.eval(x, k);
                }
                t.eval(x, self.dim)
            }
        }
    }

    pub fn field(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    pub fn div(&self, x: &[f64]) -> f64 {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out)
    }

    /// Center and length scale used to place quadrature charts.
    pub fn chart(&self) -> Chart {
        match &self.family {
            MagneticFamily::Zero => Chart::origin(self.dim),
            MagneticFamily::GaussianEnvelope { lambda, center, .. } | MagneticFamily::GradientGaussian { lambda, center, .. } => {
                Chart::new(center.clone(), 1.0 / lambda.sqrt())
            }
            MagneticFamily::AlgebraicDecay { width, center, .. } => Chart::new(center.clone(), *width),
            MagneticFamily::UserTable(t) => Chart::new(vec![0.0; self.dim], (t.radius() / 2.0).max(1e-3)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElectricFamily {
    Zero,
    /// v0 e^{-lambda|x-c|^2}.
    Gaussian { amplitude: f64, lambda: f64, center: Vec<f64> },
    /// v0 (1 + |x-c|^2/w^2)^{-p/2}.
    AlgebraicDecay {
        amplitude: f64,
        width: f64,
        power: f64,
        center: Vec<f64>,
    },
    /// v0 ((x-c).d) e^{-lambda|x-c|^2}.
    SignChangingGaussian {
        amplitude: f64,
        direction: Vec<f64>,
        lambda: f64,
        center: Vec<f64>,
    },
    UserTable(Arc<RbfTable>),
}

/// Electric potential V.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectricPotential {
    dim: usize,
    family: ElectricFamily,
}

impl ElectricPotential {
    pub fn zero(dim: Dimension) -> Self {
        Self {
            dim: dim.n(),
            family: ElectricFamily::Zero,
        }
    }

    pub fn new(dim: Dimension, family: ElectricFamily) -> Result<Self, PotentialError> {
        let n = dim.n();
        match &family {
            ElectricFamily::Zero => {}
            ElectricFamily::Gaussian {
                amplitude,
                lambda,
                center,
            } => {
                check_finite("amplitude", *amplitude)?;
                check_pos("lambda", *lambda)?;
                check_vec("center", center, n)?;
            }
            ElectricFamily::AlgebraicDecay {
                amplitude,
                width,
                power,
                center,
            } => {
                check_finite("amplitude", *amplitude)?;
                check_pos("width", *width)?;
                check_vec("center", center, n)?;
                if !(*power >= 0.0 && power.is_finite()) {
                    return Err(invalid("power", format!("growing potentials are not admissible, got {power}")));
                }
            }
            ElectricFamily::SignChangingGaussian {
                amplitude,
                direction,
                lambda,
                center,
            } => {
                check_finite("amplitude", *amplitude)?;
                check_vec("direction", direction, n)?;
                check_pos("lambda", *lambda)?;
                check_vec("center", center, n)?;
            }
            ElectricFamily::UserTable(t) => {
                if t.columns() != 1 {
                    return Err(invalid("table", "expected one value column"));
                }
            }
        }
        Ok(Self { dim: n, family })
    }

    pub fn family(&self) -> &ElectricFamily {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            ElectricFamily::Zero => "zero",
            ElectricFamily::Gaussian { .. } => "gaussian",
            ElectricFamily::AlgebraicDecay { .. } => "algebraic-decay",
            ElectricFamily::SignChangingGaussian { .. } => "sign-changing-gaussian",
            ElectricFamily::UserTable(_) => "user-table",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, ElectricFamily::Zero)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.family {
            ElectricFamily::Zero => 0.0,
            ElectricFamily::Gaussian {
                amplitude,
                lambda,
                center,
            } => amplitude * (-lambda * sq_dist(x, center)).exp(),
            ElectricFamily::AlgebraicDecay {
                amplitude,
                width,
                power,
                center,
            } => amplitude * (1.0 + sq_dist(x, center) / (width * width)).powf(-power / 2.0),
            ElectricFamily::SignChangingGaussian {
                amplitude,
                direction,
                lambda,
                center,
            } => {
                let proj: f64 = x.iter().zip(center).zip(direction).map(|((x, c), d)| (x - c) * d).sum();
                amplitude * proj * (-lambda * sq_dist(x, center)).exp()
            }
            ElectricFamily::UserTable(t) => t.eval(x, 0),
        }
    }

    pub fn chart(&self) -> Chart {
        match &self.family {
            ElectricFamily::Zero => Chart::origin(self.dim),
            ElectricFamily::Gaussian { lambda, center, .. } | ElectricFamily::SignChangingGaussian { lambda, center, .. } => {
                Chart::new(center.clone(), 1.0 / lambda.sqrt())
            }
            ElectricFamily::AlgebraicDecay { width, center, .. } => Chart::new(center.clone(), *width),
            ElectricFamily::UserTable(t) => Chart::new(vec![0.0; self.dim], (t.radius() / 2.0).max(1e-3)),
        }
    }
}

/// A potential pair (A, V).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub a: MagneticPotential,
    pub v: ElectricPotential,
}

impl PotentialPair {
    pub fn new(a: MagneticPotential, v: ElectricPotential) -> Self {
        Self { a, v }
    }

    pub fn zero(dim: Dimension) -> Self {
        Self::new(MagneticPotential::zero(dim), ElectricPotential::zero(dim))
    }
}

/// Configuration of one potential; unused keys are rejected per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PotentialSpec {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Amplitude>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swirl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
}

/// Scalar or vector amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PotentialSpec {
    pub fn family(name: &str) -> Self {
        Self {
            family: name.to_string(),
            ..Default::default()
        }
    }

    fn allow(&self, allowed: &[&'static str]) -> Result<(), PotentialError> {
        let present: [(&'static str, bool); 9] = [
            ("amplitude", self.amplitude.is_some()),
            ("lambda", self.lambda.is_some()),
            ("center", self.center.is_some()),
            ("swirl", self.swirl.is_some()),
            ("width", self.width.is_some()),
            ("power", self.power.is_some()),
            ("strength", self.strength.is_some()),
            ("direction", self.direction.is_some()),
            ("table", self.table.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(invalid(name, format!("not a parameter of family '{}'", self.family)));
            }
        }
        Ok(())
    }

    fn vector_amplitude(&self, n: usize, default: Vec<f64>) -> Result<Vec<f64>, PotentialError> {
        match &self.amplitude {
            None => Ok(default),
            Some(Amplitude::Vector(v)) => Ok(v.clone()),
            Some(Amplitude::Scalar(_)) => Err(invalid("amplitude", format!("expected a vector of {n} components"))),
        }
    }

    fn scalar_amplitude(&self, default: f64) -> Result<f64, PotentialError> {
        match &self.amplitude {
            None => Ok(default),
            Some(Amplitude::Scalar(v)) => Ok(*v),
            Some(Amplitude::Vector(_)) => Err(invalid("amplitude", "expected a scalar")),
        }
    }

    fn table_path(&self, base: &Path) -> Result<PathBuf, PotentialError> {
        let p = self.table.clone().ok_or_else(|| invalid("table", "user-table needs a table path"))?;
        Ok(if p.is_relative() { base.join(p) } else { p })
    }

    /// Builds the magnetic potential; relative table paths resolve against `base`.
    pub fn magnetic(&self, dim: Dimension, base: &Path) -> Result<MagneticPotential, PotentialError> {
        let n = dim.n();
        let e1: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
        let origin = vec![0.0; n];
        let family = match self.family.as_str() {
            "zero" => {
                self.allow(&[])?;
                MagneticFamily::Zero
            }
            "gaussian-envelope" => {
                self.allow(&["amplitude", "lambda", "center", "swirl"])?;
                MagneticFamily::GaussianEnvelope {
                    amplitude: self.vector_amplitude(n, e1)?,
                    lambda: self.lambda.unwrap_or(1.0),
                    center: self.center.clone().unwrap_or(origin),
                    swirl: self.swirl.unwrap_or(0.0),
                }
            }
            "algebraic-decay" => {
                self.allow(&["amplitude", "width", "power", "center"])?;
                MagneticFamily::AlgebraicDecay {
                    amplitude: self.vector_amplitude(n, e1)?,
                    width: self.width.unwrap_or(1.0),
                    power: self.power.unwrap_or(n as f64),
                    center: self.center.clone().unwrap_or(origin),
                }
            }
            "gradient-gaussian" => {
                self.allow(&["strength", "lambda", "center"])?;
                MagneticFamily::GradientGaussian {
                    strength: self.strength.unwrap_or(1.0),
                    lambda: self.lambda.unwrap_or(1.0),
                    center: self.center.clone().unwrap_or(origin),
                }
            }
            "user-table" => {
                self.allow(&["table"])?;
                let mut cols: Vec<String> = (1..=n).map(|k| format!("A{k}")).collect();
                cols.push("divA".into());
                let path = self.table_path(base)?;
                MagneticFamily::UserTable(Arc::new(RbfTable::from_csv(&path, n, &cols)?))
            }
            other => {
                return Err(PotentialError::UnknownFamily {
                    kind: "magnetic",
                    name: other.to_string(),
                })
            }
        };
        MagneticPotential::new(dim, family)
    }

    pub fn electric(&self, dim: Dimension, base: &Path) -> Result<ElectricPotential, PotentialError> {
        let n = dim.n();
        let e1: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
        let origin = vec![0.0; n];
        let family = match self.family.as_str() {
            "zero" => {
                self.allow(&[])?;
                ElectricFamily::Zero
            }
            "gaussian" => {
                self.allow(&["amplitude", "lambda", "center"])?;
                ElectricFamily::Gaussian {
                    amplitude: self.scalar_amplitude(1.0)?,
                    lambda: self.lambda.unwrap_or(1.0),
                    center: self.center.clone().unwrap_or(origin),
                }
            }
            "algebraic-decay" => {
                self.allow(&["amplitude", "width", "power", "center"])?;
                ElectricFamily::AlgebraicDecay {
                    amplitude: self.scalar_amplitude(1.0)?,
                    width: self.width.unwrap_or(1.0),
                    power: self.power.unwrap_or(n as f64),
                    center: self.center.clone().unwrap_or(origin),
                }
            }
            "sign-changing-gaussian" => {
                self.allow(&["amplitude", "direction", "lambda", "center"])?;
                ElectricFamily::SignChangingGaussian {
                    amplitude: self.scalar_amplitude(1.0)?,
                    direction: self.direction.clone().unwrap_or(e1),
                    lambda: self.lambda.unwrap_or(1.0),
                    center: self.center.clone().unwrap_or(origin),
                }
            }
            "user-table" => {
                self.allow(&["table"])?;
                let path = self.table_path(base)?;
                ElectricFamily::UserTable(Arc::new(RbfTable::from_csv(&path, n, &["V".to_string()])?))
            }
            other => {
                return Err(PotentialError::UnknownFamily {
                    kind: "electric",
                    name: other.to_string(),
                })
            }
        };
        ElectricPotential::new(dim, family)
    }
}

/// Builds (A, V) from their specs.
pub fn make_potential(a: &PotentialSpec, v: &PotentialSpec, dim: Dimension, base: &Path) -> Result<PotentialPair, PotentialError> {
    Ok(PotentialPair::new(a.magnetic(dim, base)?, v.electric(dim, base)?))
}

/// Exponents and tolerance for the assumption checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Lebesgue exponent for A, in (1, N).
    pub r: f64,
    /// Lebesgue exponent for V, in (1, N/2).
    pub s: f64,
    pub rel_tol: f64,
    pub seed: u64,
}

impl CheckOptions {
    pub fn defaults(dim: Dimension) -> Self {
        let n = dim.n() as f64;
        Self {
            r: n / 2.0,
            s: n / 4.0,
            rel_tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionEntry {
    pub name: &'static str,
    pub norm: String,
    pub exponent: f64,
    pub estimate: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub entries: Vec<AssumptionEntry>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Decay exponent p of |f(x)| ~ |x|^{-p} along a few rays; infinity when f vanishes far out.
pub fn tail_exponent<F: Fn(&[f64]) -> f64>(f: F, chart: &Chart) -> f64 {
    let n = chart.center.len();
    let base = chart.scale.max(1.0) + chart.center.iter().map(|v| v * v).sum::<f64>().sqrt();
    let (r1, r2) = (1e3 * base, 1e4 * base);
    let mut worst = f64::INFINITY;
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = s;
            dirs.push(d);
        }
    }
    dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
    for d in dirs {
        let at = |r: f64| -> f64 {
            let x: Vec<f64> = d.iter().zip(&chart.center).map(|(d, c)| c + r * d).collect();
            f(&x).abs()
        };
        let (a, b) = (at(r1), at(r2));
        let p = if b == 0.0 {
            f64::INFINITY
        } else if a == 0.0 {
            f64::NEG_INFINITY
        } else {
            (a / b).log10()
        };
        worst = worst.min(p);
    }
    worst
}

/// Accuracy accepted for a norm whose integrand is too rough for `rel_tol`;
/// the check only needs the norm to be finite.
const MEMBERSHIP_TOL: f64 = 1e-2;

fn norm_entry<F>(name: &'static str, f: F, q: f64, chart: &Chart, dim: usize, opts: &CheckOptions, bounded: bool) -> AssumptionEntry
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let norm = format!("L^{q}");
    let tail = tail_exponent(&f, chart);
    let tail_ok = tail * q > dim as f64;
    let integral = integrate_rn(|x: &[f64]| f(x).abs().powf(q), chart, opts.rel_tol, QuadMode::Product, opts.seed);
    let (estimate, quad_ok, qdetail) = match integral {
        Ok(e) => (e.value.powf(1.0 / q), true, String::new()),
        Err(QuadratureError::ToleranceNotMet { achieved, estimate })
            if estimate.is_finite() && achieved <= MEMBERSHIP_TOL * estimate.abs() =>
        {
            let note = format!("integral converged to {:.1e} relative only", achieved / estimate.abs());
            (estimate.powf(1.0 / q), true, note)
        }
        Err(e) => (f64::NAN, false, e.to_string()),
    };
    let pass = tail_ok && quad_ok && bounded;
    let mut detail = format!("tail exponent {tail:.3}, need > {:.3}", dim as f64 / q);
    if !bounded {
        detail.push_str("; unbounded samples");
    }
    if !qdetail.is_empty() {
        detail.push_str("; ");
        detail.push_str(&qdetail);
    }
    AssumptionEntry {
        name,
        norm,
        exponent: q,
        estimate,
        pass,
        detail,
    }
}

/// Numerical check of (A1), (A2) and (V).
pub fn check_assumptions(a: &MagneticPotential, v: &ElectricPotential, dim: Dimension, opts: &CheckOptions) -> AssumptionReport {
    let n = dim.n();
    let nf = n as f64;
    let mut entries = Vec::with_capacity(3);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let chart = a.chart();
    let cloud: Vec<Vec<f64>> = (0..400)
        .map(|_| {
            (0..n)
                .map(|k| chart.center[k] + 4.0 * chart.scale * (rng.random::<f64>() * 2.0 - 1.0))
                .collect()
        })
        .collect();

    let norm_a = |x: &[f64]| a.field(x).iter().map(|v| v * v).sum::<f64>().sqrt();
    let bounded_a = cloud.iter().all(|x| norm_a(x).is_finite());
    let r_ok = opts.r > 1.0 && opts.r < nf;
    let mut e1 = norm_entry("A1", norm_a, opts.r, &chart, n, opts, bounded_a);
    if !r_ok {
        e1.pass = false;
        e1.detail.push_str(&format!("; exponent r = {} outside (1, {n})", opts.r));
    }
    entries.push(e1);

    let q2 = nf / 2.0;
    let div = |x: &[f64]| a.div(x);
    let mut e2 = norm_entry("A2", div, q2, &chart, n, opts, cloud.iter().all(|x| div(x).is_finite()));
    let h = 1e-5;
    let mut mismatch: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for x in cloud.iter().take(200) {
        let mut fd = 0.0;
        let mut xp = x.clone();
        for k in 0..n {
            xp[k] = x[k] + h;
            let p = a.field(&xp)[k];
            xp[k] = x[k] - h;
            let m = a.field(&xp)[k];
            xp[k] = x[k];
            fd += (p - m) / (2.0 * h);
        }
        let d = a.div(x);
        scale = scale.max(d.abs());
        mismatch = mismatch.max((fd - d).abs());
    }
    let rel_mismatch = mismatch / scale;
    e2.detail.push_str(&format!("; divergence cross-check {rel_mismatch:.2e}"));
    if rel_mismatch > 1e-6 {
        e2.pass = false;
        e2.detail.push_str(" exceeds 1e-6");
    }
    entries.push(e2);

    let vchart = v.chart();
    let bounded_v = cloud.iter().all(|x| v.eval(x).is_finite());
    let s_ok = opts.s > 1.0 && opts.s < nf / 2.0;
    let mut e3 = norm_entry("V", |x: &[f64]| v.eval(x), opts.s, &vchart, n, opts, bounded_v);
    if !s_ok {
        e3.pass = false;
        e3.detail.push_str(&format!("; exponent s = {} outside (1, {})", opts.s, nf / 2.0));
    }
    entries.push(e3);
    AssumptionReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d5() -> Dimension {
        Dimension::new(5).unwrap()
    }

    fn base() -> PathBuf {
        PathBuf::from(".")
    }

    #[test]
    fn gaussian_envelope_at_origin() {
        let a = PotentialSpec::family("gaussian-envelope").magnetic(d5(), &base()).unwrap();
        let f = a.field(&[0.0; 5]);
        assert_eq!(f, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(a.div(&[0.0; 5]), 0.0);
    }

    #[test]
    fn sign_changing_signs() {
        let v = PotentialSpec::family("sign-changing-gaussian").electric(d5(), &base()).unwrap();
        let e1 = [1.0, 0.0, 0.0, 0.0, 0.0];
        assert_relative_eq!(v.eval(&e1), (-1.0f64).exp(), max_relative = 1e-15);
        assert!(v.eval(&[-1.0, 0.0, 0.0, 0.0, 0.0]) < 0.0);
    }

    #[test]
    fn divergences_match_central_differences() {
        let specs = [
            PotentialSpec {
                swirl: Some(0.7),
                center: Some(vec![0.2, -0.1, 0.0, 0.3, 0.0]),
                amplitude: Some(Amplitude::Vector(vec![0.5, -1.0, 0.2, 0.0, 0.3])),
                ..PotentialSpec::family("gaussian-envelope")
            },
            PotentialSpec {
                power: Some(4.0),
                width: Some(1.5),
                ..PotentialSpec::family("algebraic-decay")
            },
            PotentialSpec::family("gradient-gaussian"),
        ];
        for spec in specs {
            let a = spec.magnetic(d5(), &base()).unwrap();
            let x = [0.3, -0.4, 0.5, 0.1, -0.2];
            let h = 1e-5;
            let mut fd = 0.0;
            for k in 0..5 {
                let mut p = x;
                let mut m = x;
                p[k] += h;
                m[k] -= h;
                fd += (a.field(&p)[k] - a.field(&m)[k]) / (2.0 * h);
            }
            assert!((fd - a.div(&x)).abs() < 1e-8, "{}", spec.family);
        }
    }

    #[test]
    fn gaussian_pair_passes_checks() {
        let a = PotentialSpec {
            swirl: Some(0.5),
            ..PotentialSpec::family("gaussian-envelope")
        }
        .magnetic(d5(), &base())
        .unwrap();
        let v = PotentialSpec::family("gaussian").electric(d5(), &base()).unwrap();
        let rep = check_assumptions(&a, &v, d5(), &CheckOptions::defaults(d5()));
        assert_eq!(rep.entries.len(), 3);
        assert!(rep.all_pass(), "{rep:?}");
        // ||e^{-|x|^2}||_{L^{5/4}} = (pi / (5/4))^{5/2 * 4/5}
        assert_relative_eq!(rep.entries[2].estimate, (std::f64::consts::PI / 1.25).powf(2.0), max_relative = 1e-4);
    }

    #[test]
    fn sign_changing_v_passes_with_rough_integrand() {
        let a = PotentialSpec::family("gaussian-envelope").magnetic(d5(), &base()).unwrap();
        let v = PotentialSpec::family("sign-changing-gaussian").electric(d5(), &base()).unwrap();
        let rep = check_assumptions(&a, &v, d5(), &CheckOptions::defaults(d5()));
        assert!(rep.all_pass(), "{rep:?}");
        // int |x1|^s e^{-s|x|^2} = Gamma((s+1)/2) s^{-(s+1)/2} (pi/s)^2 for s = 5/4
        let s = 1.25f64;
        let integral = statrs::function::gamma::gamma((s + 1.0) / 2.0) * s.powf(-(s + 1.0) / 2.0) * (std::f64::consts::PI / s).powi(2);
        assert_relative_eq!(rep.entries[2].estimate, integral.powf(1.0 / s), max_relative = 1e-2);
    }

    #[test]
    fn constant_at_infinity_fails_a1() {
        let a = PotentialSpec {
            power: Some(0.0),
            ..PotentialSpec::family("algebraic-decay")
        }
        .magnetic(d5(), &base())
        .unwrap();
        let v = PotentialSpec::family("gaussian").electric(d5(), &base()).unwrap();
        let rep = check_assumptions(&a, &v, d5(), &CheckOptions::defaults(d5()));
        assert!(!rep.entries[0].pass);
        assert!(rep.entries[2].pass);
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = PotentialSpec {
            lambda: Some(-1.0),
            ..PotentialSpec::family("gaussian")
        };
        assert!(bad.electric(d5(), &base()).is_err());
        assert!(PotentialSpec::family("no-such").magnetic(d5(), &base()).is_err());
        let stray = PotentialSpec {
            swirl: Some(1.0),
            ..PotentialSpec::family("gaussian")
        };
        assert!(stray.electric(d5(), &base()).is_err());
    }

    #[test]
    fn user_table_requires_divergence_column() {
        let dir = std::env::temp_dir().join(format!("singlepeak-table-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.csv");
        let mut s = String::from("x1,x2,x3,x4,x5,A1,A2,A3,A4,A5\n");
        for i in 0..10 {
            s.push_str(&format!("{},{},0,0,0,1,0,0,0,0\n", i as f64 * 0.1, (i * i) as f64 * 0.05));
        }
        std::fs::write(&path, s).unwrap();
        let spec = PotentialSpec {
            table: Some(path.clone()),
            ..PotentialSpec::family("user-table")
        };
        let err = spec.magnetic(d5(), &base()).unwrap_err();
        assert!(err.to_string().contains("divA"), "{err}");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rbf_reproduces_linear_data() {
        let nodes: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.7).sin(), (t * 1.3).cos(), 0.1 * t - 0.5]
            })
            .collect();
        let values: Vec<Vec<f64>> = nodes.iter().map(|p| vec![1.0 + 2.0 * p[0] - p[2]]).collect();
        let t = RbfTable::new(nodes, values).unwrap();
        let x = [0.1, 0.2, 0.0];
        assert_relative_eq!(t.eval(&x, 0), 1.2, epsilon = 1e-9);
    }
}
