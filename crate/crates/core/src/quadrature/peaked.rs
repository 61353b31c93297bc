//! Quadrature on R^N for integrands with a radial peak at one point and a
//! localized feature around another.
//!
//! Polar coordinates are taken about the peak, with the polar axis pointing at
//! the feature. The radius uses composite Gauss-Legendre panels, log-spaced
//! from the peak width and refined across the shell where the feature sits,
//! plus a mapped tail. The axial angle uses panels that double from the
//! angular width of the feature. The remaining sphere S^{N-2} uses a fixed
//! product rule.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::gauss::legendre_unit;
use super::{Chart, QuadratureError, SphereRule};

/// Ratio between consecutive radial breakpoints away from the feature.
const LOG_STEP: f64 = 0.5;
/// Feature widths on each side of the shell that get fine radial panels.
const SHELL_HALF_WIDTH: f64 = 6.0;
/// Feature widths beyond the shell where the tail panel starts.
const TAIL_START: f64 = 8.0;

struct Transverse {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Transverse {
    fn build(n: usize, exactness: usize) -> Result<Self, QuadratureError> {
        if n == 2 {
            return Ok(Self {
                points: vec![vec![1.0], vec![-1.0]],
                weights: vec![1.0, 1.0],
            });
        }
        let rule = SphereRule::new(n - 2, exactness)?;
        Ok(Self {
            points: (0..rule.len()).map(|i| rule.point(i).to_vec()).collect(),
            weights: rule.weights().to_vec(),
        })
    }
}

/// Orthonormal frame whose first vector is `e`.
fn frame_from(e: &[f64]) -> Vec<Vec<f64>> {
    let n = e.len();
    let mut basis: Vec<Vec<f64>> = vec![e.to_vec()];
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for b in &basis {
            let p: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn radial_breaks(mu: f64, dist: f64, width: f64) -> (Vec<f64>, f64) {
    let r_end = dist + TAIL_START * width + TAIL_START * mu;
    let mut breaks = vec![0.0, 1e-3 * mu];
    let mut r = 1e-3 * mu;
    let (lo, hi) = (dist - SHELL_HALF_WIDTH * width, dist + SHELL_HALF_WIDTH * width);
    while r < r_end {
        let mut step = r * (LOG_STEP.exp() - 1.0);
        if r + step > lo && r < hi && step > 0.5 * width {
            step = 0.5 * width;
        }
        r = (r + step).min(r_end);
        breaks.push(r);
    }
    (breaks, r_end)
}

fn angular_breaks(delta: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut t = delta;
    while t < PI {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.push(PI);
    breaks
}

/// Integral and integral of |f| over R^N. The peak chart gives the peak
/// centre and width, the feature chart the feature centre and width.
/// `nodes` is the Gauss-Legendre count per panel; `transverse` is the
/// polynomial exactness on S^{N-2}.
pub fn integrate_peaked<F>(
    f: &F,
    peak: &Chart,
    feature: &Chart,
    nodes: usize,
    transverse: usize,
) -> Result<(f64, f64, usize), QuadratureError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = peak.center.len();
    if n < 2 {
        return Err(QuadratureError::InvalidRule(format!("dimension {n}")));
    }
    if feature.center.len() != n {
        return Err(QuadratureError::DimensionMismatch {
            expected: n,
            got: feature.center.len(),
        });
    }
    let (mu, width) = (peak.scale, feature.scale);
    if !(mu > 0.0 && width > 0.0 && mu.is_finite() && width.is_finite()) {
        return Err(QuadratureError::InvalidRule(format!("chart scales {mu}, {width}")));
    }
    let xi = &peak.center;
    let offset: Vec<f64> = feature.center.iter().zip(xi).map(|(c, x)| c - x).collect();
    let mut dist = offset.iter().map(|v| v * v).sum::<f64>().sqrt();
    let axis: Vec<f64> = if dist > 1e-12 * (mu + width) {
        offset.iter().map(|v| v / dist).collect()
    } else {
        dist = 0.0;
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    };
    let frame = frame_from(&axis);
    let trans = Transverse::build(n, transverse)?;
    let (gl_x, gl_w) = legendre_unit(nodes)?;

    let (breaks, r_end) = radial_breaks(mu, dist, width);
    let mut radial: Vec<(f64, f64)> = Vec::with_capacity(breaks.len() * nodes + nodes);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        for (&t, &w) in gl_x.iter().zip(&gl_w) {
            let r = a + (b - a) * t;
            radial.push((r, w * (b - a) * r.powi(n as i32 - 1)));
        }
    }
    for (&u, &w) in gl_x.iter().zip(&gl_w) {
        let r = r_end / u;
        radial.push((r, w * r_end / (u * u) * r.powi(n as i32 - 1)));
    }

    let shells: Vec<Result<(f64, f64, usize), QuadratureError>> = radial
        .par_iter()
        .map(|&(r, wr)| {
            let delta = if dist > 0.0 {
                (0.5 * width / (r * dist).sqrt()).clamp(1e-9, PI / 4.0)
            } else {
                PI / 4.0
            };
            let mut x = vec![0.0; n];
            let (mut s, mut a, mut count) = (0.0, 0.0, 0);
            for pair in angular_breaks(delta).windows(2) {
                let (t0, t1) = (pair[0], pair[1]);
                for (&t, &w) in gl_x.iter().zip(&gl_w) {
                    let theta = t0 + (t1 - t0) * t;
                    let (sin, cos) = theta.sin_cos();
                    let wt = w * (t1 - t0) * sin.powi(n as i32 - 2);
                    for (om, &wo) in trans.points.iter().zip(&trans.weights) {
                        for k in 0..n {
                            let mut v = cos * frame[0][k];
                            for (j, o) in om.iter().enumerate() {
                                v += sin * o * frame[j + 1][k];
                            }
                            x[k] = xi[k] + r * v;
                        }
                        let y = f(&x);
                        if !y.is_finite() {
                            return Err(QuadratureError::IntegrandFailure(x));
                        }
                        s += wt * wo * y;
                        a += wt * wo * y.abs();
                        count += 1;
                    }
                }
            }
            Ok((wr * s, wr * a, count))
        })
        .collect();
    let (mut total, mut abs, mut evals) = (0.0, 0.0, 0);
    for sh in shells {
        let (s, a, c) = sh?;
        total += s;
        abs += a;
        evals += c;
    }
    Ok((total, abs, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instanton::sphere_area;
    use approx::assert_relative_eq;

    fn gaussian(c: &[f64], lambda: f64) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |x: &[f64]| (-lambda * x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp()
    }

    #[test]
    fn frame_is_orthonormal() {
        let e = [0.6, 0.0, -0.8, 0.0];
        let f = frame_from(&e);
        assert_eq!(f.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = f[i].iter().zip(&f[j]).map(|(a, b)| a * b).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn offset_gaussian_matches_closed_form() {
        let c = vec![2.0, 0.0, 1.0, 0.0, 0.0];
        let f = gaussian(&c, 1.0);
        let exact = std::f64::consts::PI.powf(2.5);
        for mu in [0.01, 0.3, 5.0] {
            let peak = Chart::new(vec![0.0; 5], mu);
            let (v, a, _) = integrate_peaked(&f, &peak, &Chart::new(c.clone(), 1.0), 8, 3).unwrap();
            assert_relative_eq!(v, exact, max_relative = 1e-9);
            assert_relative_eq!(a, exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn far_narrow_feature() {
        let c = vec![20.0, 0.0, 0.0];
        let f = gaussian(&c, 4.0);
        let exact = (std::f64::consts::PI / 4.0).powf(1.5);
        let (v, _, _) = integrate_peaked(&f, &Chart::new(vec![0.0; 3], 0.1), &Chart::new(c.clone(), 0.5), 8, 3).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-9);
    }

    #[test]
    fn peak_times_linear_weight() {
        // (1 + r^2)^{-4} x_1^2 in R^4 has integral |S^3|/4 * int r^5 (1+r^2)^{-4} dr = |S^3|/4 / 6
        let f = |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            x[0] * x[0] * (1.0 + r2).powi(-4)
        };
        let exact = sphere_area(3) / 4.0 / 6.0;
        let (v, _, _) = integrate_peaked(&f, &Chart::new(vec![0.0; 4], 1.0), &Chart::new(vec![1.0, 1.0, 0.0, 0.0], 1.0), 8, 3).unwrap();
        assert_relative_eq!(v, exact, max_relative = 1e-9);
    }

    #[test]
    fn rejects_bad_scales() {
        let f = |_: &[f64]| 1.0;
        assert!(integrate_peaked(&f, &Chart::new(vec![0.0; 3], 0.0), &Chart::origin(3), 4, 3).is_err());
        assert!(integrate_peaked(&f, &Chart::new(vec![0.0; 3], 1.0), &Chart::origin(4), 4, 3).is_err());
    }
}
