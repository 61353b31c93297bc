//! Conformal transplant to S^N and the block-diagonal solver for f0''(z).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::functionals::{ComplexField, FieldBasis, FieldError, FieldKind, Frame};
use crate::instanton::{kappa, Bubble, Dimension};
use crate::quadrature::gauss::gegenbauer;
use crate::quadrature::harmonics::{gegenbauer_all, gegenbauer_log_norm, harmonic_dim};
use crate::quadrature::QuadratureError;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("{block} block, degree {degree}: discrete factor {got:.10} differs from {expected:.10}; increase radial_nodes")]
    FactorMismatch {
        block: Block,
        degree: usize,
        expected: f64,
        got: f64,
    },
    #[error("sphere coefficients built for kmax {expected}, basis has {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Real-aligned or imaginary-aligned part of a field relative to the bubble phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Real,
    Imag,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Block::Real => "real",
            Block::Imag => "imaginary",
        })
    }
}

/// Spectrum of -Delta on the round S^N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereSpectrum {
    n: usize,
    kmax: usize,
}

impl SphereSpectrum {
    pub fn new(dim: Dimension, kmax: usize) -> Self {
        Self { n: dim.n(), kmax }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// lambda_k = k(k + N - 1).
    pub fn eigenvalue(&self, k: usize) -> u64 {
        (k * (k + self.n - 1)) as u64
    }

    /// (N+k-2)! (N+2k-1) / (k! (N-1)!).
    pub fn multiplicity(&self, k: usize) -> usize {
        harmonic_dim(self.n, k)
    }

    pub fn eigenvalues(&self) -> Vec<u64> {
        (0..=self.kmax).map(|k| self.eigenvalue(k)).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        (0..=self.kmax).map(|k| self.multiplicity(k)).collect()
    }

    /// Scalar curvature N(N-1).
    pub fn scalar_curvature(&self) -> f64 {
        (self.n * (self.n - 1)) as f64
    }

    /// Analytic diagonal factor of f0''(z0) on degree k in the E inner product.
    pub fn factor(&self, block: Block, k: usize) -> f64 {
        let n = self.n as f64;
        let c = n * (n - 2.0) / 4.0;
        let lam = self.eigenvalue(k) as f64;
        match block {
            Block::Real => (lam - n) / (lam + c),
            Block::Imag => lam / (lam + c),
        }
    }
}

/// phi(r) = (2 / (1 + r^2))^{(N-2)/2}.
pub fn conformal_factor(dim: Dimension, r: f64) -> f64 {
    (2.0 / (1.0 + r * r)).powf((dim.n() as f64 - 2.0) / 2.0)
}

/// Constant value of the transplanted unit bubble.
pub fn transplanted_bubble_constant(dim: Dimension) -> f64 {
    kappa(dim) / 2f64.powf((dim.n() as f64 - 2.0) / 2.0)
}

/// Coefficients of a function on S^N in the basis P_{k,l}(theta) Y_c(omega'),
/// where Y_c runs over the harmonic channels of degree l on S^{N-1} and l <= k.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCoefficients {
    kmax: usize,
    offsets: Vec<usize>,
    degrees: Vec<usize>,
    data: Vec<Complex64>,
}

impl SphereCoefficients {
    fn zeros(basis: &FieldBasis) -> Self {
        let kmax = basis.kmax();
        let mut offsets = Vec::with_capacity(basis.n_channels() + 1);
        let mut degrees = Vec::with_capacity(basis.n_channels());
        let mut at = 0;
        for c in 0..basis.n_channels() {
            let l = basis.harmonics().degree(c);
            offsets.push(at);
            degrees.push(l);
            at += kmax - l + 1;
        }
        offsets.push(at);
        Self {
            kmax,
            offsets,
            degrees,
            data: vec![Complex64::new(0.0, 0.0); at],
        }
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient of S^N degree k in channel c; zero when k is below the channel degree.
    pub fn get(&self, c: usize, k: usize) -> Complex64 {
        let l = self.degrees[c];
        if k < l || k > self.kmax {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.offsets[c] + k - l]
    }

    pub fn set(&mut self, c: usize, k: usize, v: Complex64) {
        let l = self.degrees[c];
        assert!(k >= l && k <= self.kmax, "degree {k} outside channel of degree {l}");
        self.data[self.offsets[c] + k - l] = v;
    }

    /// Sum of |coefficient|^2 per S^N degree.
    pub fn degree_energy(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.kmax + 1];
        for (c, &l) in self.degrees.iter().enumerate() {
            for k in l..=self.kmax {
                e[k] += self.get(c, k).norm_sqr();
            }
        }
        e
    }
}

/// Stereographic transplant U = u / phi between fields and functions on S^N.
#[derive(Debug, Clone)]
pub struct Transplant {
    basis: Arc<FieldBasis>,
    cos: Vec<f64>,
    weights: Vec<f64>,
    /// per channel degree l: ladder[l][(k - l) * n_nodes + j]
    ladder: Vec<Vec<f64>>,
}

impl Transplant {
    pub fn new(basis: &Arc<FieldBasis>) -> Result<Self, SpectralError> {
        let n = basis.dim().n();
        let kmax = basis.kmax();
        let (cos, weights) = gegenbauer(2 * kmax + 2, (n as f64 - 2.0) / 2.0)?;
        let ladder = (0..=kmax).map(|l| ladder_table(n, kmax, l, &cos)).collect();
        Ok(Self {
            basis: basis.clone(),
            cos,
            weights,
            ladder,
        })
    }

    pub fn basis(&self) -> &Arc<FieldBasis> {
        &self.basis
    }

    /// Phi(u) projected on degrees k <= kmax.
    pub fn transplant(&self, u: &ComplexField) -> Result<SphereCoefficients, SpectralError> {
        u.require_kind(FieldKind::Primal)?;
        if !Arc::ptr_eq(u.basis(), &self.basis) {
            return Err(FieldError::BasisMismatch.into());
        }
        let dim = self.basis.dim();
        let nj = self.cos.len();
        let samples: Vec<(f64, f64)> = self
            .cos
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| {
                let r = ((1.0 + x) / (1.0 - x)).sqrt();
                (r, w / conformal_factor(dim, r))
            })
            .collect();
        let mut out = SphereCoefficients::zeros(&self.basis);
        let kmax = self.basis.kmax();
        for c in 0..self.basis.n_channels() {
            let l = self.basis.harmonics().degree(c);
            let prof = u.profile(c);
            let vals: Vec<Complex64> = samples
                .iter()
                .map(|&(r, w)| self.basis.interpolate_profile(prof, r) * w)
                .collect();
            let tab = &self.ladder[l];
            for k in l..=kmax {
                let row = &tab[(k - l) * nj..(k - l + 1) * nj];
                let s: Complex64 = vals.iter().zip(row).map(|(v, p)| v * p).sum();
                out.set(c, k, s);
            }
        }
        Ok(out)
    }

    /// Inverse transplant u = phi U onto the radial grid, in the given frame.
    pub fn untransplant(&self, coeffs: &SphereCoefficients, frame: Frame) -> Result<ComplexField, SpectralError> {
        let kmax = self.basis.kmax();
        if coeffs.kmax != kmax || coeffs.degrees.len() != self.basis.n_channels() {
            return Err(SpectralError::DegreeMismatch {
                expected: coeffs.kmax,
                got: kmax,
            });
        }
        let n = self.basis.dim().n();
        let dim = self.basis.dim();
        let r = self.basis.radial().nodes();
        let xs: Vec<f64> = r.iter().map(|r| (r * r - 1.0) / (r * r + 1.0)).collect();
        let tables: Vec<Vec<f64>> = (0..=kmax).map(|l| ladder_table(n, kmax, l, &xs)).collect();
        let nr = r.len();
        let mut u = ComplexField::zeros(&self.basis, frame, FieldKind::Primal);
        for c in 0..self.basis.n_channels() {
            let l = self.basis.harmonics().degree(c);
            let tab = &tables[l];
            let prof = u.profile_mut(c);
            for (i, p) in prof.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in l..=kmax {
                    acc += coeffs.get(c, k) * tab[(k - l) * nr + i];
                }
                *p = acc * conformal_factor(dim, r[i]);
            }
        }
        Ok(u)
    }
}

/// Normalized P_{k,l}(x) = C^{l+(N-1)/2}_{k-l}(x) (1-x^2)^{l/2} / sqrt(h), rows k = l..=kmax.
fn ladder_table(n: usize, kmax: usize, l: usize, xs: &[f64]) -> Vec<f64> {
    let lam = l as f64 + (n as f64 - 1.0) / 2.0;
    let top = kmax - l;
    let norms: Vec<f64> = (0..=top).map(|j| (-0.5 * gegenbauer_log_norm(j, lam)).exp()).collect();
    let mut tab = vec![0.0; (top + 1) * xs.len()];
    for (i, &x) in xs.iter().enumerate() {
        let g = gegenbauer_all(top, lam, x);
        let s = (1.0 - x * x).max(0.0).powf(l as f64 / 2.0);
        for j in 0..=top {
            tab[j * xs.len() + i] = g[j] * s * norms[j];
        }
    }
    tab
}

/// Eigen-decomposition of one block of f0''(z0) in a channel of degree l:
/// columns of `v` are E-orthonormal, f0'' v_j = d_j v_j in the Galerkin sense.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    pub v: DMatrix<f64>,
    pub d: DVector<f64>,
    /// Trailing modes not resolved by the radial grid.
    pub spurious: usize,
}

impl ChannelBlock {
    fn build(basis: &FieldBasis, l: usize, weight: f64, cap: f64) -> Self {
        let nr = basis.n_radial();
        let chol = basis.stiffness_cholesky(l);
        let lower = chol.l();
        let diag = DMatrix::from_fn(nr, nr, |i, j| {
            if i == j {
                (weight * basis.mass()[i] * basis.bubble_weight()[i]).sqrt()
            } else {
                0.0
            }
        });
        let x = lower.solve_lower_triangular(&diag).expect("cholesky factor is nonsingular");
        let a = &x * x.transpose();
        let a = (&a + a.transpose()) * 0.5;
        let eig = SymmetricEigen::new(a);
        let mut order: Vec<usize> = (0..nr).collect();
        order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
        // modes the radial grid cannot resolve show up as huge eigenvalues
        let spurious = order.iter().take_while(|&&j| eig.eigenvalues[j] > cap).count();
        order.rotate_left(spurious);
        let q = DMatrix::from_fn(nr, nr, |i, j| eig.eigenvectors[(i, order[j])]);
        let v = lower.transpose().solve_upper_triangular(&q).expect("cholesky factor is nonsingular");
        let d = DVector::from_fn(nr, |j, _| 1.0 - eig.eigenvalues[order[j]]);
        Self { v, d, spurious }
    }
}

/// Kernel counts of the discrete f0''(z).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KernelCounts {
    pub imag_kernel: usize,
    pub real_kernel: usize,
}

impl KernelCounts {
    pub fn total(&self) -> usize {
        self.imag_kernel + self.real_kernel
    }
}

/// Output of L_z.
#[derive(Debug, Clone)]
pub struct LzSolution {
    pub phi: ComplexField,
    /// E-norm fraction of the Riesz representative lying in the kernel.
    pub kernel_fraction: f64,
    /// <L_z k, k> = Re int k conj(phi).
    pub quadratic: f64,
}

impl LzSolution {
    pub fn kernel_dominated(&self) -> bool {
        self.kernel_fraction > 0.5
    }
}

/// f0''(z) diagonalized per channel degree and block.
#[derive(Debug, Clone)]
pub struct BlockDiagonalHessian {
    basis: Arc<FieldBasis>,
    spectrum: SphereSpectrum,
    real: Vec<ChannelBlock>,
    imag: Vec<ChannelBlock>,
    threshold: f64,
}

pub const KERNEL_THRESHOLD: f64 = 1e-8;
pub const FACTOR_TOLERANCE: f64 = 1e-6;

impl BlockDiagonalHessian {
    /// Builds both blocks for every channel degree and validates the discrete
    /// factors of degrees up to kmax against the analytic ones.
    pub fn new(basis: &Arc<FieldBasis>) -> Result<Self, SpectralError> {
        let dim = basis.dim();
        let kmax = basis.kmax();
        let ts = dim.two_star();
        let spectrum = SphereSpectrum::new(dim, kmax);
        let built: Vec<(ChannelBlock, ChannelBlock)> = (0..=kmax)
            .into_par_iter()
            .map(|l| {
                let cap_r = 2.0 * (1.0 - spectrum.factor(Block::Real, 0));
                let cap_i = 2.0 * (1.0 - spectrum.factor(Block::Imag, 0));
                (
                    ChannelBlock::build(basis, l, ts - 1.0, cap_r),
                    ChannelBlock::build(basis, l, 1.0, cap_i),
                )
            })
            .collect();
        let (real, imag): (Vec<_>, Vec<_>) = built.into_iter().unzip();
        for (block, set) in [(Block::Real, &real), (Block::Imag, &imag)] {
            for (l, cb) in set.iter().enumerate() {
                for k in l..=kmax {
                    let expected = spectrum.factor(block, k);
                    let got = cb.d[k - l];
                    if (got - expected).abs() > FACTOR_TOLERANCE {
                        return Err(SpectralError::FactorMismatch {
                            block,
                            degree: k,
                            expected,
                            got,
                        });
                    }
                }
            }
        }
        let max = real
            .iter()
            .chain(&imag)
            .flat_map(|cb| cb.d.iter())
            .fold(0.0f64, |m, d| m.max(d.abs()));
        Ok(Self {
            basis: basis.clone(),
            spectrum,
            real,
            imag,
            threshold: KERNEL_THRESHOLD * max,
        })
    }

    pub fn basis(&self) -> &Arc<FieldBasis> {
        &self.basis
    }

    pub fn spectrum(&self) -> &SphereSpectrum {
        &self.spectrum
    }

    pub fn block(&self, block: Block, l: usize) -> &ChannelBlock {
        match block {
            Block::Real => &self.real[l],
            Block::Imag => &self.imag[l],
        }
    }

    /// Discrete factors of degrees l..=kmax in a channel of degree l.
    pub fn factors(&self, block: Block, l: usize) -> Vec<f64> {
        let kmax = self.basis.kmax();
        self.block(block, l).d.iter().take(kmax - l + 1).copied().collect()
    }

    fn is_kernel(&self, d: f64) -> bool {
        d.abs() < self.threshold
    }

    /// Numerically zero factors over all channels.
    pub fn kernel_dimension_check(&self) -> KernelCounts {
        let mut counts = KernelCounts {
            imag_kernel: 0,
            real_kernel: 0,
        };
        for c in 0..self.basis.n_channels() {
            let l = self.basis.harmonics().degree(c);
            counts.real_kernel += self.real[l].d.iter().filter(|d| self.is_kernel(**d)).count();
            counts.imag_kernel += self.imag[l].d.iter().filter(|d| self.is_kernel(**d)).count();
        }
        counts
    }

    /// ||L_z|| in the E norm on one block, or on both.
    pub fn inverse_norm(&self, block: Option<Block>) -> f64 {
        let sets: Vec<&Vec<ChannelBlock>> = match block {
            Some(Block::Real) => vec![&self.real],
            Some(Block::Imag) => vec![&self.imag],
            None => vec![&self.real, &self.imag],
        };
        sets.into_iter()
            .flatten()
            .flat_map(|cb| cb.d.iter())
            .filter(|d| !self.is_kernel(**d))
            .fold(0.0f64, |m, d| m.max(1.0 / d.abs()))
    }

    /// phi = L_z k for a dual density k in the frame of b: f0''(z) phi = P_perp k, phi orthogonal to T_z Z.
    pub fn apply_lz(&self, b: &Bubble, k: &ComplexField) -> Result<LzSolution, SpectralError> {
        k.require_kind(FieldKind::Dual)?;
        let frame = b.frame();
        if &frame != k.frame() {
            return Err(FieldError::FrameMismatch(frame, k.frame().clone()).into());
        }
        if !Arc::ptr_eq(k.basis(), &self.basis) {
            return Err(FieldError::BasisMismatch.into());
        }
        let nr = self.basis.n_radial();
        let mass = self.basis.mass();
        let fwd = b.phase().conj();
        let back = b.phase();
        let per: Vec<(Vec<Complex64>, f64, f64, f64)> = (0..self.basis.n_channels())
            .into_par_iter()
            .map(|c| {
                let l = self.basis.harmonics().degree(c);
                let prof = k.profile(c);
                let fr = DVector::from_fn(nr, |i, _| mass[i] * (prof[i] * fwd).re);
                let fi = DVector::from_fn(nr, |i, _| mass[i] * (prof[i] * fwd).im);
                let (pr, kr, tr, qr) = self.solve_block(&self.real[l], &fr);
                let (pi, ki, ti, qi) = self.solve_block(&self.imag[l], &fi);
                let out = (0..nr).map(|i| Complex64::new(pr[i], pi[i]) * back).collect();
                (out, kr + ki, tr + ti, qr + qi)
            })
            .collect();
        let mut phi = ComplexField::zeros(&self.basis, frame, FieldKind::Primal);
        let (mut kern, mut total, mut quad) = (0.0, 0.0, 0.0);
        for (c, (p, kc, tc, qc)) in per.into_iter().enumerate() {
            phi.profile_mut(c).copy_from_slice(&p);
            kern += kc;
            total += tc;
            quad += qc;
        }
        Ok(LzSolution {
            phi,
            kernel_fraction: if total > 0.0 { (kern / total).sqrt() } else { 0.0 },
            quadratic: quad,
        })
    }

    fn solve_block(&self, cb: &ChannelBlock, f: &DVector<f64>) -> (DVector<f64>, f64, f64, f64) {
        let a = cb.v.tr_mul(f);
        let mut coef = DVector::zeros(a.len());
        let (mut kern, mut total, mut quad) = (0.0, 0.0, 0.0);
        for j in 0..a.len() {
            let e = a[j] * a[j];
            total += e;
            if self.is_kernel(cb.d[j]) {
                kern += e;
            } else {
                coef[j] = a[j] / cb.d[j];
                quad += e / cb.d[j];
            }
        }
        (&cb.v * coef, kern, total, quad)
    }

    /// Removes the components along the discrete kernel from a primal field.
    pub fn project_perp(&self, b: &Bubble, u: &ComplexField) -> Result<ComplexField, SpectralError> {
        u.require_kind(FieldKind::Primal)?;
        let fwd = b.phase().conj();
        let back = b.phase();
        let nr = self.basis.n_radial();
        let mut out = u.clone();
        for c in 0..self.basis.n_channels() {
            let l = self.basis.harmonics().degree(c);
            let s = self.basis.stiffness(l);
            let prof: Vec<Complex64> = u.profile(c).iter().map(|x| x * fwd).collect();
            let mut parts = [DVector::zeros(nr), DVector::zeros(nr)];
            for (bi, cb) in [&self.real[l], &self.imag[l]].into_iter().enumerate() {
                let x = DVector::from_fn(nr, |i, _| if bi == 0 { prof[i].re } else { prof[i].im });
                let a = cb.v.tr_mul(&(s * &x));
                let mut y = x.clone();
                for j in 0..nr {
                    if self.is_kernel(cb.d[j]) {
                        y -= cb.v.column(j) * a[j];
                    }
                }
                parts[bi] = y;
            }
            for (i, p) in out.profile_mut(c).iter_mut().enumerate() {
                *p = Complex64::new(parts[0][i], parts[1][i]) * back;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::hessian_f0_apply;
    use crate::instanton::{bubble_field, tangent_basis, UnitProfile};
    use approx::assert_relative_eq;

    fn setup() -> (Dimension, Arc<FieldBasis>) {
        let d = Dimension::new(5).unwrap();
        (d, FieldBasis::new(d, 4, 48).unwrap())
    }

    #[test]
    fn spectrum_table() {
        let s = SphereSpectrum::new(Dimension::new(5).unwrap(), 8);
        assert_eq!(s.eigenvalues()[..3], [0, 5, 12]);
        assert_eq!(s.multiplicities()[..3], [1, 6, 20]);
        assert_eq!(s.factor(Block::Real, 1), 0.0);
        assert_eq!(s.factor(Block::Imag, 0), 0.0);
        assert!(s.factor(Block::Real, 0) < 0.0);
    }

    #[test]
    fn bubble_transplants_to_constant() {
        let (d, basis) = setup();
        let t = Transplant::new(&basis).unwrap();
        for phase in [Complex64::new(1.0, 0.0), Complex64::i()] {
            let z = bubble_field(&Bubble::unit(d), &basis).unwrap().scale(phase);
            let c = t.transplant(&z).unwrap();
            let area = crate::instanton::sphere_area(5);
            let expected = phase * transplanted_bubble_constant(d) * area.sqrt();
            assert!((c.get(0, 0) - expected).norm() < 1e-9 * expected.norm());
            let rest: f64 = c.data().iter().skip(1).map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            assert!(rest < 1e-9 * expected.norm());
        }
    }

    #[test]
    fn transplant_round_trip() {
        let (_, basis) = setup();
        let t = Transplant::new(&basis).unwrap();
        let mut c = SphereCoefficients::zeros(&basis);
        for (i, v) in c.data_mut().iter_mut().enumerate() {
            *v = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let u = t.untransplant(&c, Frame::unit(5)).unwrap();
        let back = t.transplant(&u).unwrap();
        let err: f64 = back.data().iter().zip(c.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let nrm: f64 = c.data().iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-9 * nrm, "{err}");
    }

    #[test]
    fn kernel_has_dimension_n_plus_two() {
        let (_, basis) = setup();
        let h = BlockDiagonalHessian::new(&basis).unwrap();
        let k = h.kernel_dimension_check();
        assert_eq!(k, KernelCounts { imag_kernel: 1, real_kernel: 6 });
        assert_relative_eq!(h.inverse_norm(Some(Block::Imag)), (5.0 + 3.75) / 5.0, max_relative = 1e-6);
    }

    #[test]
    fn linearized_solve_of_translation_source() {
        let (d, basis) = setup();
        let h = BlockDiagonalHessian::new(&basis).unwrap();
        let b = Bubble::unit(d);
        let p = UnitProfile::new(d);
        let a = [0.3, -0.5, 0.2, 0.0, 1.0];
        // (2/i) grad z0 . a
        let k = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Dual, |y| {
            let r = crate::instanton::norm(y);
            let dot: f64 = y.iter().zip(&a).map(|(y, a)| y * a).sum();
            Complex64::new(0.0, -2.0 * p.d1_over_r(r) * dot)
        });
        let sol = h.apply_lz(&b, &k).unwrap();
        let exact = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Primal, |y| {
            let r = crate::instanton::norm(y);
            let dot: f64 = y.iter().zip(&a).map(|(y, a)| y * a).sum();
            Complex64::new(0.0, p.value(r) * dot)
        });
        let diff = sol.phi.axpy(Complex64::new(-1.0, 0.0), &exact).unwrap();
        assert!(diff.e_norm().unwrap() < 1e-4 * exact.e_norm().unwrap());
        assert!(!sol.kernel_dominated());
    }

    #[test]
    fn lz_residual_and_orthogonality() {
        let (_, basis) = setup();
        let h = BlockDiagonalHessian::new(&basis).unwrap();
        let b = Bubble::new(0.9, 2.0, vec![0.5, 0.0, -0.3, 0.0, 0.0]).unwrap();
        let k = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Dual, |y| {
            let q = 1.0 + y.iter().map(|c| c * c).sum::<f64>();
            Complex64::new(1.0 + y[0] - y[1] * y[2], y[3] + 0.5) / q.powi(4)
        });
        let sol = h.apply_lz(&b, &k).unwrap();
        let res = hessian_f0_apply(&b, &sol.phi).unwrap();
        let target = h.project_perp(&b, &k.riesz().unwrap()).unwrap();
        let diff = res.axpy(Complex64::new(-1.0, 0.0), &target).unwrap();
        assert!(diff.e_norm().unwrap() < 1e-6 * target.e_norm().unwrap());
        let tb = tangent_basis(&b, &basis).unwrap();
        let scale = sol.phi.e_norm().unwrap();
        for t in tb.vectors() {
            assert!(sol.phi.e_inner(t).unwrap().abs() < 1e-6 * scale * t.e_norm().unwrap());
        }
        assert_relative_eq!(sol.quadratic, k.pair(&sol.phi).unwrap(), max_relative = 1e-9);
        // tangent input is annihilated
        let only_kernel = h.apply_lz(&b, &phase_density(&b, &basis)).unwrap();
        assert!(only_kernel.phi.e_norm().unwrap() < 1e-6);
        assert!(only_kernel.kernel_dominated());
    }

    fn phase_density(b: &Bubble, basis: &Arc<FieldBasis>) -> ComplexField {
        // -Delta (i z) as a density
        let p = UnitProfile::new(basis.dim());
        let ph = b.phase() * Complex64::i();
        ComplexField::from_unit_fn(basis, b.frame(), FieldKind::Dual, |y| {
            ph * (-p.laplacian(crate::instanton::norm(y)))
        })
    }
}
