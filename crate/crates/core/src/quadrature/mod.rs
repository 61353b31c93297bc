//! Quadrature on R^N, on spheres and on the half line.

pub mod gauss;
pub mod harmonics;
pub mod peaked;
pub mod qmc;
pub mod radial;
pub mod sphere;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use harmonics::{AngularDerivative, HarmonicBasis};
pub use peaked::integrate_peaked;
pub use radial::RadialGrid;
pub use sphere::SphereRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
    #[error("tolerance not met: achieved error {achieved:.3e} on estimate {estimate:.6e}")]
    ToleranceNotMet { achieved: f64, estimate: f64 },
    #[error("integrand returned a non-finite value at {0:?}")]
    IntegrandFailure(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Integration scheme for integrals over R^N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadMode {
    #[default]
    Product,
    Qmc,
}

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Polar chart x = center + r omega with radial map scale `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub center: Vec<f64>,
    pub scale: f64,
}

impl Chart {
    pub fn new(center: Vec<f64>, scale: f64) -> Self {
        Self { center, scale }
    }

    pub fn origin(n: usize) -> Self {
        Self::new(vec![0.0; n], 1.0)
    }
}

/// Product levels (radial nodes, polar nodes); azimuthal nodes are twice the polar count.
pub const PRODUCT_LEVELS: [(usize, usize); 7] = [(16, 4), (24, 6), (32, 8), (40, 10), (48, 12), (56, 14), (64, 16)];

/// Integral and integral of |f| at one product level.
pub fn integrate_rn_level<F>(f: &F, chart: &Chart, level: usize) -> Result<(f64, f64, usize), QuadratureError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = chart.center.len();
    if n < 2 {
        return Err(QuadratureError::InvalidRule(format!("dimension {n}")));
    }
    let (nr, nt) = *PRODUCT_LEVELS
        .get(level)
        .ok_or_else(|| QuadratureError::InvalidRule(format!("product level {level}")))?;
    let radial = RadialGrid::build(nr, chart.scale)?;
    let sphere = SphereRule::with_counts(n - 1, nt, 2 * nt)?;
    let shells: Vec<Result<(f64, f64), QuadratureError>> = radial
        .nodes()
        .par_iter()
        .zip(radial.weights().par_iter())
        .map(|(&r, &wr)| {
            let jac = wr * r.powi(n as i32 - 1);
            let mut x = vec![0.0; n];
            let (mut s, mut a) = (0.0, 0.0);
            for (i, &w) in sphere.weights().iter().enumerate() {
                let om = sphere.point(i);
                for k in 0..n {
                    x[k] = chart.center[k] + r * om[k];
                }
                let v = f(&x);
                if !v.is_finite() {
                    return Err(QuadratureError::IntegrandFailure(x));
                }
                s += w * v;
                a += w * v.abs();
            }
            Ok((jac * s, jac * a))
        })
        .collect();
    let (mut total, mut abs) = (0.0, 0.0);
    for sh in shells {
        let (s, a) = sh?;
        total += s;
        abs += a;
    }
    Ok((total, abs, nr * sphere.len()))
}

/// Adaptive integral over R^N. Refines until the difference of consecutive
/// levels is below `rel_tol` times the integral of |f|.
pub fn integrate_rn<F>(f: F, chart: &Chart, rel_tol: f64, mode: QuadMode, seed: u64) -> Result<Estimate, QuadratureError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match mode {
        QuadMode::Qmc => qmc::integrate_rn_qmc(&f, chart, rel_tol, seed),
        QuadMode::Product => {
            let mut prev: Option<f64> = None;
            let mut evals = 0;
            let mut last = (0.0, f64::INFINITY);
            for level in 0..PRODUCT_LEVELS.len() {
                let (v, a, e) = integrate_rn_level(&f, chart, level)?;
                evals += e;
                if let Some(p) = prev {
                    let err = (v - p).abs();
                    last = (v, err);
                    if err <= rel_tol * a || a == 0.0 {
                        return Ok(Estimate {
                            value: v,
                            error: err,
                            evaluations: evals,
                        });
                    }
                }
                prev = Some(v);
            }
            Err(QuadratureError::ToleranceNotMet {
                achieved: last.1,
                estimate: last.0,
            })
        }
    }
}

/// Integral over S^d with a product rule of the given exactness.
pub fn integrate_sphere<F: Fn(&[f64]) -> f64>(f: F, d: usize, exactness: usize) -> Result<f64, QuadratureError> {
    let rule = SphereRule::new(d, exactness)?;
    Ok((0..rule.len()).map(|i| rule.weights()[i] * f(rule.point(i))).sum())
}

/// Adaptive integral over (0, inf) on the mapped Gauss-Legendre rule.
pub fn integrate_radial<F: Fn(f64) -> f64>(f: F, map_scale: f64, rel_tol: f64) -> Result<Estimate, QuadratureError> {
    let mut prev: Option<f64> = None;
    let mut evals = 0;
    let mut last = (0.0, f64::INFINITY);
    for count in [16usize, 32, 64, 128, 256, 512] {
        let g = RadialGrid::build(count, map_scale)?;
        let (mut v, mut a) = (0.0, 0.0);
        for (&r, &w) in g.nodes().iter().zip(g.weights()) {
            let y = f(r);
            if !y.is_finite() {
                return Err(QuadratureError::IntegrandFailure(vec![r]));
            }
            v += w * y;
            a += w * y.abs();
        }
        evals += count;
        if let Some(p) = prev {
            let err = (v - p).abs();
            last = (v, err);
            if err <= rel_tol * a || a == 0.0 {
                return Ok(Estimate {
                    value: v,
                    error: err,
                    evaluations: evals,
                });
            }
        }
        prev = Some(v);
    }
    Err(QuadratureError::ToleranceNotMet {
        achieved: last.1,
        estimate: last.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_in_five_dimensions() {
        let c = Chart::new(vec![0.3, -0.2, 0.0, 0.1, 0.0], 1.0);
        let e = integrate_rn(
            |x: &[f64]| (-x.iter().map(|v| v * v).sum::<f64>()).exp(),
            &c,
            1e-10,
            QuadMode::Product,
            0,
        )
        .unwrap();
        assert_relative_eq!(e.value, PI.powf(2.5), max_relative = 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let c = Chart::origin(5);
        let r = integrate_rn(|_: &[f64]| f64::NAN, &c, 1e-6, QuadMode::Product, 0);
        assert!(matches!(r, Err(QuadratureError::IntegrandFailure(_))));
    }

    #[test]
    fn unattainable_tolerance_fails() {
        // slowly decaying oscillation
        let c = Chart::origin(5);
        let r = integrate_rn(
            |x: &[f64]| (40.0 * x[0]).sin() / (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powi(3),
            &c,
            1e-15,
            QuadMode::Product,
            0,
        );
        assert!(matches!(r, Err(QuadratureError::ToleranceNotMet { .. })));
    }

    #[test]
    fn radial_beta_integral() {
        // int_0^inf r^4 / (1+r^2)^5 dr = B(5/2, 5/2) / 2
        let e = integrate_radial(|r| r.powi(4) / (1.0 + r * r).powi(5), 1.0, 1e-13).unwrap();
        assert_relative_eq!(e.value, 3.0 * PI / 256.0, max_relative = 1e-12);
    }
}
