//! Fields on R^N stored in the frame of a bubble: y = (x - xi) / mu, expanded
//! in real hyperspherical harmonics with complex radial profiles tabulated
//! on a mapped Gauss grid.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::instanton::{Dimension, InstantonError};
use crate::quadrature::gauss::{barycentric_weights, differentiation_matrix, interpolate};
use crate::quadrature::{AngularDerivative, HarmonicBasis, QuadratureError, RadialGrid};

pub const DEFAULT_KMAX: usize = 8;
pub const DEFAULT_RADIAL_NODES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("fields live in different frames ({0:?} vs {1:?})")]
    FrameMismatch(Frame, Frame),
    #[error("operation needs a {expected:?} field, got {got:?}")]
    KindMismatch { expected: FieldKind, got: FieldKind },
    #[error("fields use different bases")]
    BasisMismatch,
    #[error("invalid field basis: {0}")]
    Basis(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Instanton(#[from] InstantonError),
}

/// Primal fields are functions u(x) = mu^{-(N-2)/2} U(y); dual fields are
/// densities k(x) = mu^{-(N+2)/2} K(y) acting on primal fields by Re int k conj(u).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Primal,
    Dual,
}

/// Affine frame x = mu y + xi.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub mu: f64,
    pub xi: Vec<f64>,
}

impl Frame {
    pub fn new(mu: f64, xi: Vec<f64>) -> Self {
        Self { mu, xi }
    }

    pub fn unit(n: usize) -> Self {
        Self::new(1.0, vec![0.0; n])
    }

    pub fn to_global(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.xi).map(|(y, c)| self.mu * y + c).collect()
    }

    pub fn to_local(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.xi).map(|(x, c)| (x - c) / self.mu).collect()
    }

    /// Factor relating unit-frame values to values at x for the given kind.
    pub fn amplitude(&self, n: usize, kind: FieldKind) -> f64 {
        let n = n as f64;
        match kind {
            FieldKind::Primal => self.mu.powf(-(n - 2.0) / 2.0),
            FieldKind::Dual => self.mu.powf(-(n + 2.0) / 2.0),
        }
    }
}

/// Radial grid, harmonic basis and per-degree operators shared by all fields.
#[derive(Debug)]
pub struct FieldBasis {
    dim: Dimension,
    harm: HarmonicBasis,
    radial: RadialGrid,
    tail_exp: i32,
    bary: Vec<f64>,
    dmat: DMatrix<f64>,
    stiffness: Vec<DMatrix<f64>>,
    chol: Vec<Cholesky<f64, Dyn>>,
    mass: Vec<f64>,
    bubble_weight: Vec<f64>,
}

impl FieldBasis {
    pub fn new(dim: Dimension, kmax: usize, radial_nodes: usize) -> Result<Arc<Self>, FieldError> {
        let n = dim.n();
        let harm = HarmonicBasis::new(n, kmax, 2 * kmax + 1)?;
        let radial = RadialGrid::new(radial_nodes, 1.0)?;
        let tail_exp = n as i32 - 3;
        let t = radial.t().to_vec();
        let nr = t.len();
        let bary = barycentric_weights(&t);
        let d = differentiation_matrix(&t, &bary);
        let a = tail_exp as f64;
        let mut dmat = DMatrix::zeros(nr, nr);
        for q in 0..nr {
            for i in 0..nr {
                let mut v = d[(q, i)] * ((1.0 - t[q]) / (1.0 - t[i])).powi(tail_exp);
                if q == i {
                    v -= a / (1.0 - t[q]);
                }
                dmat[(q, i)] = v;
            }
        }
        let r = radial.nodes();
        let nf = n as f64;
        // profiles interpolated onto a rule exact for the stiffness integrands
        let fine = RadialGrid::new(nr + n, 1.0)?;
        let (tf, wf) = (fine.t(), fine.t_weights());
        let nf_pts = tf.len();
        let lagrange = DMatrix::from_fn(nf_pts, nr, |q, i| {
            let den: f64 = (0..nr).map(|j| bary[j] / (tf[q] - t[j])).sum();
            bary[i] / (tf[q] - t[i]) / den
        });
        let untail = DMatrix::from_fn(nr, nr, |i, j| if i == j { (1.0 - t[i]).powi(-tail_exp) } else { 0.0 });
        let dlag = &lagrange * &d;
        let mut val = DMatrix::zeros(nf_pts, nr);
        let mut der = DMatrix::zeros(nf_pts, nr);
        for q in 0..nf_pts {
            let tail = (1.0 - tf[q]).powi(tail_exp);
            for i in 0..nr {
                val[(q, i)] = tail * lagrange[(q, i)];
                der[(q, i)] = tail * dlag[(q, i)] - a * tail / (1.0 - tf[q]) * lagrange[(q, i)];
            }
        }
        let val = val * &untail;
        let der = der * &untail;
        let grad_w = DVector::from_fn(nf_pts, |q, _| wf[q] * (1.0 - tf[q]).powi(2) * (tf[q] / (1.0 - tf[q])).powf(nf - 1.0));
        let ang_w = DVector::from_fn(nf_pts, |q, _| wf[q] * (tf[q] / (1.0 - tf[q])).powf(nf - 3.0) / (1.0 - tf[q]).powi(2));
        let radial_part = der.transpose() * DMatrix::from_diagonal(&grad_w) * &der;
        let angular_part = val.transpose() * DMatrix::from_diagonal(&ang_w) * &val;
        let mut stiffness = Vec::with_capacity(kmax + 1);
        let mut chol = Vec::with_capacity(kmax + 1);
        for l in 0..=kmax {
            let ev = (l * (l + n - 2)) as f64;
            let s = &radial_part + &angular_part * ev;
            let s = (&s + s.transpose()) * 0.5;
            let c = Cholesky::new(s.clone())
                .ok_or_else(|| FieldBasis::err(format!("stiffness matrix for degree {l} is not positive definite")))?;
            stiffness.push(s);
            chol.push(c);
        }
        let mass = (0..nr).map(|q| radial.weights()[q] * r[q].powf(nf - 1.0)).collect();
        let bubble_weight = r.iter().map(|r| nf * (nf - 2.0) / (1.0 + r * r).powi(2)).collect();
        Ok(Arc::new(Self {
            dim,
            harm,
            radial,
            tail_exp,
            bary,
            dmat,
            stiffness,
            chol,
            mass,
            bubble_weight,
        }))
    }

    pub fn with_defaults(dim: Dimension) -> Result<Arc<Self>, FieldError> {
        Self::new(dim, DEFAULT_KMAX, DEFAULT_RADIAL_NODES)
    }

    fn err(msg: String) -> FieldError {
        FieldError::Basis(msg)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn kmax(&self) -> usize {
        self.harm.kmax()
    }

    pub fn harmonics(&self) -> &HarmonicBasis {
        &self.harm
    }

    pub fn radial(&self) -> &RadialGrid {
        &self.radial
    }

    pub fn n_radial(&self) -> usize {
        self.radial.len()
    }

    pub fn n_channels(&self) -> usize {
        self.harm.len()
    }

    pub fn n_angular(&self) -> usize {
        self.harm.rule().len()
    }

    pub fn n_points(&self) -> usize {
        self.n_radial() * self.n_angular()
    }

    /// Weight of radial shell i in int dy: w_i r_i^{N-1}.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// N(N-2)/(1+r^2)^2 at the radial nodes.
    pub fn bubble_weight(&self) -> &[f64] {
        &self.bubble_weight
    }

    pub fn angular_weights(&self) -> &[f64] {
        self.harm.rule().weights()
    }

    /// Stiffness matrix of degree l in nodal values.
    pub fn stiffness(&self, l: usize) -> &DMatrix<f64> {
        &self.stiffness[l]
    }

    pub fn stiffness_cholesky(&self, l: usize) -> &Cholesky<f64, Dyn> {
        &self.chol[l]
    }

    /// Radial derivative df/dr at the nodes from nodal values.
    pub fn radial_derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let t = self.radial.t();
        let l = self.radial.map_scale();
        let nr = t.len();
        (0..nr)
            .map(|q| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..nr {
                    acc += f[i] * self.dmat[(q, i)];
                }
                acc * (1.0 - t[q]).powi(2) / l
            })
            .collect()
    }

    /// Profile value at radius r from nodal values.
    pub fn interpolate_profile(&self, f: &[Complex64], r: f64) -> Complex64 {
        let t = self.radial.t_of_r(r);
        let tn = self.radial.t();
        let p: Vec<Complex64> = f
            .iter()
            .zip(tn)
            .map(|(v, t)| v / (1.0 - t).powi(self.tail_exp))
            .collect();
        interpolate(tn, &self.bary, &p, t) * (1.0 - t).powi(self.tail_exp)
    }

    /// Unit-frame point y for shell i and angular point a.
    pub fn point(&self, i: usize, a: usize) -> Vec<f64> {
        let r = self.radial.nodes()[i];
        self.harm.rule().point(a).iter().map(|w| r * w).collect()
    }
}

/// Synthesized values (and optionally Cartesian gradients) on one radial shell.
#[derive(Debug, Clone)]
pub struct Shell {
    pub index: usize,
    pub r: f64,
    pub values: Vec<Complex64>,
    /// `grad[a * N + k]`, unit-frame Cartesian components.
    pub grad: Vec<Complex64>,
}

/// A complex field in the frame of a bubble.
#[derive(Debug, Clone)]
pub struct ComplexField {
    basis: Arc<FieldBasis>,
    frame: Frame,
    kind: FieldKind,
    data: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(basis: &Arc<FieldBasis>, frame: Frame, kind: FieldKind) -> Self {
        let len = basis.n_channels() * basis.n_radial();
        Self {
            basis: basis.clone(),
            frame,
            kind,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Builds a field from channel profiles, `data[c * n_radial + i]`.
    pub fn from_data(basis: &Arc<FieldBasis>, frame: Frame, kind: FieldKind, data: Vec<Complex64>) -> Result<Self, FieldError> {
        if data.len() != basis.n_channels() * basis.n_radial() {
            return Err(FieldError::Basis(format!("coefficient array of length {}", data.len())));
        }
        Ok(Self {
            basis: basis.clone(),
            frame,
            kind,
            data,
        })
    }

    /// Projects shell values produced by `fill(i, r, out)` onto the basis;
    /// `out[a]` is the unit-frame value at r * omega_a.
    pub fn from_shell_fn<F>(basis: &Arc<FieldBasis>, frame: Frame, kind: FieldKind, fill: F) -> Self
    where
        F: Fn(usize, f64, &mut [Complex64]) + Sync,
    {
        let nr = basis.n_radial();
        let nc = basis.n_channels();
        let na = basis.n_angular();
        let shells: Vec<Vec<Complex64>> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let mut vals = vec![Complex64::new(0.0, 0.0); na];
                fill(i, basis.radial.nodes()[i], &mut vals);
                basis.harm.analyze(&vals, 1)
            })
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); nc * nr];
        for (i, s) in shells.iter().enumerate() {
            for c in 0..nc {
                data[c * nr + i] = s[c];
            }
        }
        Self {
            basis: basis.clone(),
            frame,
            kind,
            data,
        }
    }

    /// Projects a unit-frame function y -> U(y).
    pub fn from_unit_fn<F>(basis: &Arc<FieldBasis>, frame: Frame, kind: FieldKind, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let n = basis.dim().n();
        let rule = basis.harm.rule();
        Self::from_shell_fn(basis, frame, kind, |_, r, out| {
            let mut y = vec![0.0; n];
            for (a, o) in out.iter_mut().enumerate() {
                for (k, w) in rule.point(a).iter().enumerate() {
                    y[k] = r * w;
                }
                *o = f(&y);
            }
        })
    }

    pub fn basis(&self) -> &Arc<FieldBasis> {
        &self.basis
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Nodal profile of channel c.
    pub fn profile(&self, c: usize) -> &[Complex64] {
        let nr = self.basis.n_radial();
        &self.data[c * nr..(c + 1) * nr]
    }

    pub fn profile_mut(&mut self, c: usize) -> &mut [Complex64] {
        let nr = self.basis.n_radial();
        &mut self.data[c * nr..(c + 1) * nr]
    }

    fn compatible(&self, other: &Self) -> Result<(), FieldError> {
        if !Arc::ptr_eq(&self.basis, &other.basis) {
            return Err(FieldError::BasisMismatch);
        }
        if self.frame != other.frame {
            return Err(FieldError::FrameMismatch(self.frame.clone(), other.frame.clone()));
        }
        Ok(())
    }

    pub fn require_kind(&self, kind: FieldKind) -> Result<(), FieldError> {
        if self.kind != kind {
            return Err(FieldError::KindMismatch {
                expected: kind,
                got: self.kind,
            });
        }
        Ok(())
    }

    /// self + s * other.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Result<Self, FieldError> {
        self.compatible(other)?;
        if self.kind != other.kind {
            return Err(FieldError::KindMismatch {
                expected: self.kind,
                got: other.kind,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect();
        Ok(Self {
            data,
            ..self.clone()
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|v| v * s).collect(),
            ..self.clone()
        }
    }

    /// E inner product Re int grad u . conj(grad v) of two primal fields.
    pub fn e_inner(&self, other: &Self) -> Result<f64, FieldError> {
        self.compatible(other)?;
        self.require_kind(FieldKind::Primal)?;
        other.require_kind(FieldKind::Primal)?;
        let b = &self.basis;
        let nr = b.n_radial();
        let total: f64 = (0..b.n_channels())
            .into_par_iter()
            .map(|c| {
                let s = b.stiffness(b.harm.degree(c));
                let f = self.profile(c);
                let g = other.profile(c);
                let mut acc = 0.0;
                for q in 0..nr {
                    let mut sg = Complex64::new(0.0, 0.0);
                    for i in 0..nr {
                        sg += g[i] * s[(q, i)];
                    }
                    acc += f[q].re * sg.re + f[q].im * sg.im;
                }
                acc
            })
            .sum();
        Ok(total)
    }

    pub fn e_norm(&self) -> Result<f64, FieldError> {
        Ok(self.e_inner(self)?.max(0.0).sqrt())
    }

    /// Re int k conj(u) dx for a dual field k (self) and a primal field u.
    pub fn pair(&self, u: &Self) -> Result<f64, FieldError> {
        self.compatible(u)?;
        self.require_kind(FieldKind::Dual)?;
        u.require_kind(FieldKind::Primal)?;
        let m = self.basis.mass();
        let nr = m.len();
        Ok(self
            .data
            .iter()
            .zip(&u.data)
            .enumerate()
            .map(|(j, (k, v))| m[j % nr] * (k.re * v.re + k.im * v.im))
            .sum())
    }

    /// Re int u conj(v) dy in the unit frame (both fields of the same kind).
    pub fn l2_inner(&self, other: &Self) -> Result<f64, FieldError> {
        self.compatible(other)?;
        let m = self.basis.mass();
        let nr = m.len();
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .enumerate()
            .map(|(j, (a, b))| m[j % nr] * (a.re * b.re + a.im * b.im))
            .sum())
    }

    /// Riesz representative in E of the dual field: the primal R with
    /// <R, v>_E = Re int k conj(v) for all v.
    pub fn riesz(&self) -> Result<Self, FieldError> {
        self.require_kind(FieldKind::Dual)?;
        let b = &self.basis;
        let nr = b.n_radial();
        let m = b.mass();
        let profiles: Vec<Vec<Complex64>> = (0..b.n_channels())
            .into_par_iter()
            .map(|c| {
                let ch = b.stiffness_cholesky(b.harm.degree(c));
                let k = self.profile(c);
                let re = ch.solve(&DVector::from_fn(nr, |i, _| m[i] * k[i].re));
                let im = ch.solve(&DVector::from_fn(nr, |i, _| m[i] * k[i].im));
                (0..nr).map(|i| Complex64::new(re[i], im[i])).collect()
            })
            .collect();
        Ok(Self {
            basis: b.clone(),
            frame: self.frame.clone(),
            kind: FieldKind::Primal,
            data: profiles.concat(),
        })
    }

    /// Values (and gradients when `with_grad`) on radial shell i.
    pub fn shell(&self, i: usize, with_grad: bool) -> Shell {
        let b = &self.basis;
        let nr = b.n_radial();
        let nc = b.n_channels();
        let na = b.n_angular();
        let n = b.dim().n();
        let r = b.radial.nodes()[i];
        let coeffs: Vec<Complex64> = (0..nc).map(|c| self.data[c * nr + i]).collect();
        let values = b.harm.synthesize(&coeffs, 1, AngularDerivative::None);
        let mut grad = Vec::new();
        if with_grad {
            let dr: Vec<Complex64> = (0..nc)
                .map(|c| {
                    let f = self.profile(c);
                    let t = b.radial.t();
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..nr {
                        acc += f[j] * b.dmat[(i, j)];
                    }
                    acc * (1.0 - t[i]).powi(2) / b.radial.map_scale()
                })
                .collect();
            let over_r: Vec<Complex64> = coeffs.iter().map(|v| v / r).collect();
            let mut comps = Vec::with_capacity(n);
            comps.push(b.harm.synthesize(&dr, 1, AngularDerivative::None));
            for j in 0..n - 2 {
                comps.push(b.harm.synthesize(&over_r, 1, AngularDerivative::Theta(j)));
            }
            comps.push(b.harm.synthesize(&over_r, 1, AngularDerivative::Phi));
            grad = vec![Complex64::new(0.0, 0.0); na * n];
            for a in 0..na {
                let fr = b.harm.frame(a);
                let ih = b.harm.inv_scale(a);
                for (t, comp) in comps.iter().enumerate() {
                    let v = if t == 0 { comp[a] } else { comp[a] * ih[t - 1] };
                    let e = &fr[t * n..(t + 1) * n];
                    for k in 0..n {
                        grad[a * n + k] += v * e[k];
                    }
                }
            }
        }
        Shell {
            index: i,
            r,
            values,
            grad,
        }
    }

    /// Value at a global point x.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let n = self.basis.dim().n();
        let y = self.frame.to_local(x);
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let omega: Vec<f64> = if r > 0.0 {
            y.iter().map(|v| v / r).collect()
        } else {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        };
        let ys = self.basis.harm.eval_point(&omega);
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, yc) in ys.iter().enumerate() {
            if *yc != 0.0 {
                acc += self.basis.interpolate_profile(self.profile(c), r) * *yc;
            }
        }
        acc * self.frame.amplitude(n, self.kind)
    }

    /// Squared E norm carried by each degree.
    pub fn degree_energy(&self) -> Result<Vec<f64>, FieldError> {
        self.require_kind(FieldKind::Primal)?;
        let b = &self.basis;
        let nr = b.n_radial();
        let mut out = vec![0.0; b.kmax() + 1];
        for c in 0..b.n_channels() {
            let l = b.harm.degree(c);
            let s = b.stiffness(l);
            let f = self.profile(c);
            let re = DVector::from_fn(nr, |i, _| f[i].re);
            let im = DVector::from_fn(nr, |i, _| f[i].im);
            out[l] += re.dot(&(s * &re)) + im.dot(&(s * &im));
        }
        Ok(out)
    }

    /// Fraction of the squared E norm in the top two retained degrees.
    pub fn truncation_fraction(&self) -> Result<f64, FieldError> {
        let e = self.degree_energy()?;
        let total: f64 = e.iter().sum();
        if total <= 0.0 {
            return Ok(0.0);
        }
        let k = e.len();
        let top: f64 = e[k.saturating_sub(2)..].iter().sum();
        Ok(top / total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instanton::{bubble_norms, UnitProfile};
    use approx::assert_relative_eq;

    fn basis() -> Arc<FieldBasis> {
        FieldBasis::new(Dimension::new(5).unwrap(), 3, 48).unwrap()
    }

    #[test]
    fn bubble_dirichlet_energy_from_stiffness() {
        let b = basis();
        let dim = b.dim();
        let p = UnitProfile::new(dim);
        let z = ComplexField::from_unit_fn(&b, Frame::unit(5), FieldKind::Primal, |y| {
            Complex64::new(p.value(crate::instanton::norm(y)), 0.0)
        });
        let norms = bubble_norms(dim).unwrap();
        assert_relative_eq!(z.e_inner(&z).unwrap(), norms.dirichlet, max_relative = 1e-10);
        assert_relative_eq!(z.l2_inner(&z).unwrap(), norms.l2, max_relative = 1e-8);
    }

    #[test]
    fn shell_gradient_matches_analytic() {
        let b = basis();
        let f = |y: &[f64]| Complex64::new(y[0] / (1.0 + y.iter().map(|v| v * v).sum::<f64>()).powi(2), 0.5 * y[2] * y[3] / (1.0 + y.iter().map(|v| v * v).sum::<f64>()).powi(3));
        let u = ComplexField::from_unit_fn(&b, Frame::unit(5), FieldKind::Primal, f);
        let sh = u.shell(20, true);
        let h = 1e-6;
        for a in (0..b.n_angular()).step_by(53) {
            let y = b.point(20, a);
            assert_relative_eq!(sh.values[a].re, f(&y).re, epsilon = 1e-9);
            for k in 0..5 {
                let mut yp = y.clone();
                let mut ym = y.clone();
                yp[k] += h;
                ym[k] -= h;
                let fd = (f(&yp) - f(&ym)) / (2.0 * h);
                assert!((sh.grad[a * 5 + k] - fd).norm() < 1e-7, "{a} {k}");
            }
        }
    }

    #[test]
    fn riesz_inverts_stiffness() {
        let b = basis();
        let dim = b.dim();
        let p = UnitProfile::new(dim);
        let fr = Frame::unit(5);
        // -Laplace z0 = z0^{2*-1}
        let ts = dim.two_star();
        let k = ComplexField::from_unit_fn(&b, fr.clone(), FieldKind::Dual, |y| {
            Complex64::new(p.value(crate::instanton::norm(y)).powf(ts - 1.0), 0.0)
        });
        let r = k.riesz().unwrap();
        let z = ComplexField::from_unit_fn(&b, fr, FieldKind::Primal, |y| Complex64::new(p.value(crate::instanton::norm(y)), 0.0));
        let diff = r.axpy(Complex64::new(-1.0, 0.0), &z).unwrap();
        assert!(diff.e_norm().unwrap() < 1e-8 * z.e_norm().unwrap());
    }

    #[test]
    fn point_evaluation_and_scaling() {
        let b = basis();
        let fr = Frame::new(2.0, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let u = ComplexField::from_unit_fn(&b, fr.clone(), FieldKind::Primal, |y| {
            Complex64::new(0.0, (1.0 + y[1]) / (1.0 + y.iter().map(|v| v * v).sum::<f64>()).powi(2))
        });
        let x = [1.6, 0.4, -0.2, 0.1, 0.3];
        let y = fr.to_local(&x);
        let expect = (1.0 + y[1]) / (1.0 + y.iter().map(|v| v * v).sum::<f64>()).powi(2) * 2f64.powf(-1.5);
        assert_relative_eq!(u.eval(&x).im, expect, max_relative = 1e-8);
    }

    #[test]
    fn frame_mismatch_rejected() {
        let b = basis();
        let u = ComplexField::zeros(&b, Frame::unit(5), FieldKind::Primal);
        let v = ComplexField::zeros(&b, Frame::new(2.0, vec![0.0; 5]), FieldKind::Primal);
        assert!(matches!(u.e_inner(&v), Err(FieldError::FrameMismatch(..))));
    }
}
