use std::f64::consts::PI;

use super::gauss::gegenbauer;
use super::QuadratureError;
use crate::instanton::sphere_area;

/// Gauss rule in one hyperspherical polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarAngle {
    pub theta: Vec<f64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Product rule on the unit sphere S^d in R^{d+1}: Gauss-Gegenbauer in each
/// polar angle and the trapezoid rule in the azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    d: usize,
    exactness: usize,
    polar: Vec<PolarAngle>,
    phi: Vec<f64>,
    phi_weight: f64,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    /// Rule on S^d exact for polynomials of degree `exactness`.
    pub fn new(d: usize, exactness: usize) -> Result<Self, QuadratureError> {
        let n_theta = exactness / 2 + 1;
        Self::with_counts(d, n_theta, exactness + 1)
    }

    pub fn with_counts(d: usize, n_theta: usize, n_phi: usize) -> Result<Self, QuadratureError> {
        if d == 0 || n_theta == 0 || n_phi == 0 {
            return Err(QuadratureError::InvalidRule(format!(
                "sphere rule S^{d} with {n_theta} polar and {n_phi} azimuthal nodes"
            )));
        }
        let mut polar = Vec::with_capacity(d - 1);
        for j in 1..d {
            let alpha = (d as f64 - j as f64 - 1.0) / 2.0;
            let (u, w) = gegenbauer(n_theta, alpha)?;
            // descending cosine = ascending angle
            let mut theta = Vec::with_capacity(n_theta);
            let mut cos = Vec::with_capacity(n_theta);
            let mut sin = Vec::with_capacity(n_theta);
            let mut weights = Vec::with_capacity(n_theta);
            for k in (0..n_theta).rev() {
                let c = u[k];
                theta.push(c.acos());
                cos.push(c);
                sin.push((1.0 - c * c).sqrt());
                weights.push(w[k]);
            }
            polar.push(PolarAngle {
                theta,
                cos,
                sin,
                weights,
            });
        }
        let phi: Vec<f64> = (0..n_phi).map(|p| 2.0 * PI * p as f64 / n_phi as f64).collect();
        let phi_weight = 2.0 * PI / n_phi as f64;
        let exactness = (2 * n_theta - 1).min(n_phi - 1);

        let amb = d + 1;
        let total = n_theta.pow((d - 1) as u32) * n_phi;
        let mut points = Vec::with_capacity(total * amb);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d - 1];
        for _ in 0..n_theta.pow((d - 1) as u32) {
            let mut w = phi_weight;
            let mut prod = 1.0;
            let mut head = Vec::with_capacity(d - 1);
            for (j, &q) in idx.iter().enumerate() {
                head.push(prod * polar[j].cos[q]);
                prod *= polar[j].sin[q];
                w *= polar[j].weights[q];
            }
            for &ph in &phi {
                points.extend_from_slice(&head);
                points.push(prod * ph.cos());
                points.push(prod * ph.sin());
                weights.push(w);
            }
            for j in (0..d - 1).rev() {
                idx[j] += 1;
                if idx[j] < n_theta {
                    break;
                }
                idx[j] = 0;
            }
        }
        Ok(Self {
            d,
            exactness,
            polar,
            phi,
            phi_weight,
            points,
            weights,
        })
    }

    /// Intrinsic dimension d of S^d.
    pub fn sphere_dim(&self) -> usize {
        self.d
    }

    pub fn ambient(&self) -> usize {
        self.d + 1
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let a = self.ambient();
        &self.points[i * a..(i + 1) * a]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn polar(&self) -> &[PolarAngle] {
        &self.polar
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn phi_weight(&self) -> f64 {
        self.phi_weight
    }

    pub fn n_theta(&self) -> usize {
        self.polar.first().map_or(0, |p| p.theta.len())
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    /// Surface area of S^d.
    pub fn area(&self) -> f64 {
        sphere_area(self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_area() {
        for d in 1..6 {
            let r = SphereRule::new(d, 6).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert_relative_eq!(s, sphere_area(d), max_relative = 1e-12);
        }
    }

    #[test]
    fn points_on_sphere() {
        let r = SphereRule::new(4, 8).unwrap();
        for i in 0..r.len() {
            let n: f64 = r.point(i).iter().map(|v| v * v).sum();
            assert_relative_eq!(n, 1.0, epsilon = 1e-14);
        }
        assert!(r.exactness() >= 8);
    }

    #[test]
    fn even_moments() {
        // int_{S^4} x_1^2 = area / 5, int x_1^2 x_2^2 = area / 35
        let r = SphereRule::new(4, 6).unwrap();
        let a = sphere_area(4);
        let m2: f64 = (0..r.len()).map(|i| r.weights()[i] * r.point(i)[3].powi(2)).sum();
        assert_relative_eq!(m2, a / 5.0, max_relative = 1e-12);
        let m22: f64 = (0..r.len())
            .map(|i| r.weights()[i] * (r.point(i)[0] * r.point(i)[4]).powi(2))
            .sum();
        assert_relative_eq!(m22, a / 35.0, max_relative = 1e-12);
    }
}
