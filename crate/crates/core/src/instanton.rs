//! Aubin-Talenti bubbles: closed forms, derivatives and the tangent space of
//! the critical manifold.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::functionals::field::{ComplexField, FieldBasis, FieldKind, Frame};
use crate::quadrature::{integrate_radial, QuadratureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstantonError {
    #[error("space dimension must satisfy N > 4, got {0}")]
    Dimension(usize),
    #[error("concentration scale must be positive and finite, got {0}")]
    Scale(f64),
    #[error("center has {got} components, expected {expected}")]
    CenterLength { expected: usize, got: usize },
    #[error("bubble norm quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
}

/// Space dimension N > 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    n: usize,
}

impl Dimension {
    pub fn new(n: usize) -> Result<Self, InstantonError> {
        if n <= 4 {
            return Err(InstantonError::Dimension(n));
        }
        Ok(Self { n })
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Critical Sobolev exponent 2N/(N-2).
    pub fn two_star(self) -> f64 {
        let n = self.n as f64;
        2.0 * n / (n - 2.0)
    }

    /// Surface area of the unit sphere S^{N-1}.
    pub fn sphere_area(self) -> f64 {
        sphere_area(self.n - 1)
    }
}

/// Surface area of S^d, the unit sphere in R^{d+1}.
pub fn sphere_area(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / ln_gamma(h).exp()
}

/// A point (sigma, mu, xi) of the critical manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    sigma: f64,
    mu: f64,
    xi: Vec<f64>,
}

impl Bubble {
    /// Builds a bubble; `sigma` is reduced to [0, 2pi).
    pub fn new(sigma: f64, mu: f64, xi: Vec<f64>) -> Result<Self, InstantonError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(InstantonError::Scale(mu));
        }
        Ok(Self {
            sigma: sigma.rem_euclid(2.0 * PI),
            mu,
            xi,
        })
    }

    pub fn unit(dim: Dimension) -> Self {
        Self {
            sigma: 0.0,
            mu: 1.0,
            xi: vec![0.0; dim.n()],
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn phase(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.sigma)
    }

    pub fn with_sigma(&self, sigma: f64) -> Self {
        Self {
            sigma: sigma.rem_euclid(2.0 * PI),
            mu: self.mu,
            xi: self.xi.clone(),
        }
    }

    pub fn frame(&self) -> Frame {
        Frame::new(self.mu, self.xi.clone())
    }

    fn check(&self, dim: Dimension) -> Result<(), InstantonError> {
        if self.xi.len() != dim.n() {
            return Err(InstantonError::CenterLength {
                expected: dim.n(),
                got: self.xi.len(),
            });
        }
        Ok(())
    }
}

/// kappa_N = (N(N-2))^{(N-2)/4}.
pub fn kappa(dim: Dimension) -> f64 {
    let n = dim.n() as f64;
    (n * (n - 2.0)).powf((n - 2.0) / 4.0)
}

/// Radial profile of the unit bubble z0 and its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct UnitProfile {
    n: f64,
    kappa: f64,
}

impl UnitProfile {
    pub fn new(dim: Dimension) -> Self {
        Self {
            n: dim.n() as f64,
            kappa: kappa(dim),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.kappa * (1.0 + r * r).powf(-(self.n - 2.0) / 2.0)
    }

    /// d z0 / dr.
    pub fn d1(&self, r: f64) -> f64 {
        -(self.n - 2.0) * self.kappa * r * (1.0 + r * r).powf(-self.n / 2.0)
    }

    /// (d z0 / dr) / r, regular at the origin.
    pub fn d1_over_r(&self, r: f64) -> f64 {
        -(self.n - 2.0) * self.kappa * (1.0 + r * r).powf(-self.n / 2.0)
    }

    /// d^2 z0 / dr^2.
    pub fn d2(&self, r: f64) -> f64 {
        let s = 1.0 + r * r;
        -(self.n - 2.0) * self.kappa * (s.powf(-self.n / 2.0) - self.n * r * r * s.powf(-self.n / 2.0 - 1.0))
    }

    /// Laplacian of the radial function z0.
    pub fn laplacian(&self, r: f64) -> f64 {
        self.d2(r) + (self.n - 1.0) * self.d1_over_r(r)
    }
}

fn offset(b: &Bubble, x: &[f64]) -> Vec<f64> {
    x.iter().zip(&b.xi).map(|(a, c)| a - c).collect()
}

/// e^{i sigma} kappa mu^{(N-2)/2} (mu^2 + |x-xi|^2)^{-(N-2)/2}.
pub fn eval_bubble(b: &Bubble, x: &[f64], dim: Dimension) -> Complex64 {
    let n = dim.n() as f64;
    let d2: f64 = offset(b, x).iter().map(|v| v * v).sum();
    let m = b.mu;
    let val = kappa(dim) * m.powf((n - 2.0) / 2.0) * (m * m + d2).powf(-(n - 2.0) / 2.0);
    b.phase() * val
}

/// Analytic gradient of [`eval_bubble`].
pub fn grad_bubble(b: &Bubble, x: &[f64], dim: Dimension) -> Vec<Complex64> {
    let n = dim.n() as f64;
    let d = offset(b, x);
    let d2: f64 = d.iter().map(|v| v * v).sum();
    let m = b.mu;
    let s = -(n - 2.0) * kappa(dim) * m.powf((n - 2.0) / 2.0) * (m * m + d2).powf(-n / 2.0);
    let ph = b.phase();
    d.iter().map(|v| ph * (s * v)).collect()
}

/// Analytic Laplacian of [`eval_bubble`].
pub fn laplacian_bubble(b: &Bubble, x: &[f64], dim: Dimension) -> Complex64 {
    let n = dim.n() as f64;
    let d2: f64 = offset(b, x).iter().map(|v| v * v).sum();
    let m = b.mu;
    let p = UnitProfile::new(dim);
    let r = d2.sqrt() / m;
    b.phase() * (p.laplacian(r) * m.powf(-(n - 2.0) / 2.0 - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleNorms {
    pub dirichlet: f64,
    pub l2: f64,
    pub l2star: f64,
}

/// The integrals of |grad z0|^2, z0^2 and z0^{2*} over R^N.
pub fn bubble_norms(dim: Dimension) -> Result<BubbleNorms, InstantonError> {
    let p = UnitProfile::new(dim);
    let n = dim.n() as f64;
    let area = dim.sphere_area();
    let ts = dim.two_star();
    let rel = 1e-13;
    let dir = integrate_radial(|r| p.d1(r).powi(2) * r.powf(n - 1.0), 1.0, rel)?;
    let l2 = integrate_radial(|r| p.value(r).powi(2) * r.powf(n - 1.0), 1.0, rel)?;
    let l2s = integrate_radial(|r| p.value(r).powf(ts) * r.powf(n - 1.0), 1.0, rel)?;
    Ok(BubbleNorms {
        dirichlet: area * dir.value,
        l2: area * l2.value,
        l2star: area * l2s.value,
    })
}

/// The N+2 generators of the tangent space at a bubble.
#[derive(Debug, Clone)]
pub struct TangentBasis {
    vectors: Vec<ComplexField>,
}

impl TangentBasis {
    /// Translations d/dxi_j (j = 1..N), then d/dmu, then the phase direction.
    pub fn vectors(&self) -> &[ComplexField] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn translation(&self, j: usize) -> &ComplexField {
        &self.vectors[j]
    }

    pub fn dilation(&self) -> &ComplexField {
        &self.vectors[self.vectors.len() - 2]
    }

    pub fn phase(&self) -> &ComplexField {
        &self.vectors[self.vectors.len() - 1]
    }

    /// Gram matrix in the E inner product.
    pub fn gram(&self) -> nalgebra::DMatrix<f64> {
        let k = self.vectors.len();
        nalgebra::DMatrix::from_fn(k, k, |i, j| {
            self.vectors[i]
                .e_inner(&self.vectors[j])
                .expect("tangent fields share a frame")
        })
    }
}

pub fn tangent_basis(b: &Bubble, basis: &Arc<FieldBasis>) -> Result<TangentBasis, InstantonError> {
    let dim = basis.dim();
    b.check(dim)?;
    let p = UnitProfile::new(dim);
    let n = dim.n();
    let half = (n as f64 - 2.0) / 2.0;
    let frame = b.frame();
    let ph = b.phase();
    let inv_mu = 1.0 / b.mu;
    let mut vectors = Vec::with_capacity(n + 2);
    for j in 0..n {
        vectors.push(ComplexField::from_unit_fn(basis, frame.clone(), FieldKind::Primal, |y| {
            let r = norm(y);
            ph * (-inv_mu * p.d1_over_r(r) * y[j])
        }));
    }
    vectors.push(ComplexField::from_unit_fn(basis, frame.clone(), FieldKind::Primal, |y| {
        let r = norm(y);
        ph * (inv_mu * (-half * p.value(r) - r * p.d1(r)))
    }));
    let iph = Complex64::i() * ph;
    vectors.push(ComplexField::from_unit_fn(basis, frame, FieldKind::Primal, |y| {
        iph * p.value(norm(y))
    }));
    Ok(TangentBasis { vectors })
}

/// The bubble itself as a field in its own frame.
pub fn bubble_field(b: &Bubble, basis: &Arc<FieldBasis>) -> Result<ComplexField, InstantonError> {
    b.check(basis.dim())?;
    let p = UnitProfile::new(basis.dim());
    let ph = b.phase();
    Ok(ComplexField::from_unit_fn(basis, b.frame(), FieldKind::Primal, |y| {
        ph * p.value(norm(y))
    }))
}

pub(crate) fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn d5() -> Dimension {
        Dimension::new(5).unwrap()
    }

    #[test]
    fn kappa_values() {
        assert_relative_eq!(kappa(Dimension::new(6).unwrap()), 24.0, max_relative = 1e-15);
        assert_relative_eq!(kappa(d5()), 15f64.powf(0.75), max_relative = 1e-15);
        assert_relative_eq!(kappa(d5()), 7.621991, epsilon = 1e-6);
        assert!(Dimension::new(4).is_err());
    }

    #[test]
    fn bubble_at_center_and_phase() {
        let b = Bubble::new(0.0, 1.0, vec![0.0; 5]).unwrap();
        let v = eval_bubble(&b, &[0.0; 5], d5());
        assert_relative_eq!(v.re, 7.621991, epsilon = 1e-6);
        let b = b.with_sigma(PI / 2.0);
        let v = eval_bubble(&b, &[0.0; 5], d5());
        assert!(v.re.abs() < 1e-12);
        assert_relative_eq!(v.im, 7.621991, epsilon = 1e-6);
    }

    #[test]
    fn gradient_vanishes_at_center() {
        let b = Bubble::new(0.3, 0.7, vec![0.1, -0.2, 0.3, 0.0, 1.0]).unwrap();
        let g = grad_bubble(&b, &b.xi().to_vec(), d5());
        assert!(g.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn displayed_gradient_identity_at_unit_scale() {
        let dim = d5();
        let b = Bubble::unit(dim);
        let x = [0.6, 0.0, 0.8, 0.0, 0.0];
        let g: f64 = grad_bubble(&b, &x, dim).iter().map(|c| c.norm_sqr()).sum();
        let n = 5.0;
        let k = kappa(dim);
        let expect = (2.0 - n) * (2.0 - n) * k * k * 1.0 / 2f64.powf(n);
        assert_relative_eq!(g, expect, max_relative = 1e-13);
    }

    #[test]
    fn reject_bad_scale() {
        assert!(Bubble::new(0.0, 0.0, vec![0.0; 5]).is_err());
        assert!(Bubble::new(0.0, f64::NAN, vec![0.0; 5]).is_err());
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(2), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 8.0 * PI * PI / 3.0, max_relative = 1e-14);
    }
}
