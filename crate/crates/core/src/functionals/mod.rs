//! The energy f_eps = f0 + eps G1 + eps^2 G2 and its derivatives on the
//! critical manifold.

pub mod field;

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use field::{ComplexField, FieldBasis, FieldError, FieldKind, Frame, Shell};

use crate::instanton::{Bubble, UnitProfile};
use crate::potentials::{ElectricPotential, MagneticPotential, PotentialPair};
use crate::quadrature::{integrate_peaked, integrate_rn, Chart, QuadMode, QuadratureError};

/// Potentials sampled at the grid of a frame: A_eff = mu A(mu y + xi),
/// div_eff = mu^2 div A, v_eff = mu^2 V, indexed by point p = i * n_angular + a.
#[derive(Debug, Clone)]
pub struct PotentialSamples {
    n: usize,
    frame: Frame,
    a: Vec<f64>,
    div: Vec<f64>,
    v: Vec<f64>,
}

impl PotentialSamples {
    pub fn new(basis: &Arc<FieldBasis>, frame: &Frame, pot: &PotentialPair) -> Self {
        let n = basis.dim().n();
        let na = basis.n_angular();
        let nr = basis.n_radial();
        let mu = frame.mu;
        let rule = basis.harmonics().rule();
        let shells: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..nr)
            .into_par_iter()
            .map(|i| {
                let r = basis.radial().nodes()[i];
                let mut a = vec![0.0; na * n];
                let mut div = vec![0.0; na];
                let mut v = vec![0.0; na];
                let mut x = vec![0.0; n];
                for p in 0..na {
                    for (k, w) in rule.point(p).iter().enumerate() {
                        x[k] = mu * r * w + frame.xi[k];
                    }
                    if !pot.a.is_zero() {
                        let out = &mut a[p * n..(p + 1) * n];
                        div[p] = mu * mu * pot.a.eval_into(&x, out);
                        out.iter_mut().for_each(|c| *c *= mu);
                    }
                    if !pot.v.is_zero() {
                        v[p] = mu * mu * pot.v.eval(&x);
                    }
                }
                (a, div, v)
            })
            .collect();
        let mut a = Vec::with_capacity(nr * na * n);
        let mut div = Vec::with_capacity(nr * na);
        let mut v = Vec::with_capacity(nr * na);
        for (sa, sd, sv) in shells {
            a.extend(sa);
            div.extend(sd);
            v.extend(sv);
        }
        Self {
            n,
            frame: frame.clone(),
            a,
            div,
            v,
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn a_eff(&self, p: usize) -> &[f64] {
        &self.a[p * self.n..(p + 1) * self.n]
    }

    pub fn div_eff(&self, p: usize) -> f64 {
        self.div[p]
    }

    pub fn v_eff(&self, p: usize) -> f64 {
        self.v[p]
    }
}

/// Sum over the field grid of per-shell contributions.
fn grid_sum<F>(u: &ComplexField, with_grad: bool, f: F) -> f64
where
    F: Fn(&Shell, usize, f64) -> f64 + Sync,
{
    let b = u.basis();
    let na = b.n_angular();
    let aw = b.angular_weights();
    let mass = b.mass();
    (0..b.n_radial())
        .into_par_iter()
        .map(|i| {
            let sh = u.shell(i, with_grad);
            let mut acc = 0.0;
            for a in 0..na {
                acc += aw[a] * f(&sh, i * na + a, 0.0);
            }
            mass[i] * acc
        })
        .sum()
}

fn check_samples(u: &ComplexField, s: &PotentialSamples) -> Result<(), FieldError> {
    if u.frame() != s.frame() {
        return Err(FieldError::FrameMismatch(u.frame().clone(), s.frame().clone()));
    }
    Ok(())
}

/// int |u|^{2*}.
pub fn critical_norm(u: &ComplexField) -> Result<f64, FieldError> {
    u.require_kind(FieldKind::Primal)?;
    let ts = u.basis().dim().two_star();
    let na = u.basis().n_angular();
    Ok(grid_sum(u, false, |sh, p, _| sh.values[p % na].norm().powf(ts)))
}

/// f0(u) = 1/2 int |grad u|^2 - 1/2* int |u|^{2*}.
pub fn f0(u: &ComplexField) -> Result<f64, FieldError> {
    let ts = u.basis().dim().two_star();
    Ok(0.5 * u.e_inner(u)? - critical_norm(u)? / ts)
}

/// G1(u) = -Re (1/i) int grad u . A conj(u).
pub fn g1(u: &ComplexField, s: &PotentialSamples) -> Result<f64, FieldError> {
    u.require_kind(FieldKind::Primal)?;
    check_samples(u, s)?;
    let n = u.basis().dim().n();
    let na = u.basis().n_angular();
    Ok(grid_sum(u, true, |sh, p, _| {
        let a = p % na;
        let ae = s.a_eff(p);
        let mut dot = Complex64::new(0.0, 0.0);
        for k in 0..n {
            dot += sh.grad[a * n + k] * ae[k];
        }
        -(dot * sh.values[a].conj()).im
    }))
}

/// The two halves of G2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Parts {
    /// 1/2 int |A|^2 |u|^2.
    pub magnetic: f64,
    /// 1/2 int V |u|^2.
    pub electric: f64,
}

impl G2Parts {
    pub fn total(&self) -> f64 {
        self.magnetic + self.electric
    }
}

/// G2 on the field grid.
pub fn g2(u: &ComplexField, s: &PotentialSamples) -> Result<G2Parts, FieldError> {
    u.require_kind(FieldKind::Primal)?;
    check_samples(u, s)?;
    let na = u.basis().n_angular();
    let magnetic = grid_sum(u, false, |sh, p, _| {
        0.5 * s.a_eff(p).iter().map(|c| c * c).sum::<f64>() * sh.values[p % na].norm_sqr()
    });
    let electric = grid_sum(u, false, |sh, p, _| 0.5 * s.v_eff(p) * sh.values[p % na].norm_sqr());
    Ok(G2Parts { magnetic, electric })
}

/// Energy split at one u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub f0: f64,
    pub g1: f64,
    pub g2: f64,
    pub g2_magnetic: f64,
    pub g2_electric: f64,
    pub f_eps: f64,
    pub eps: f64,
    pub alpha: f64,
}

/// f_eps(u) with the V term weighted by eps^alpha.
pub fn energy(u: &ComplexField, s: &PotentialSamples, eps: f64, alpha: f64) -> Result<EnergyBreakdown, FieldError> {
    let f0v = f0(u)?;
    let g1v = g1(u, s)?;
    let g2v = g2(u, s)?;
    let f_eps = if alpha == 2.0 {
        f0v + eps * g1v + eps * eps * g2v.total()
    } else {
        f0v + eps * g1v + eps * eps * g2v.magnetic + eps.powf(alpha) * g2v.electric
    };
    Ok(EnergyBreakdown {
        f0: f0v,
        g1: g1v,
        g2: g2v.total(),
        g2_magnetic: g2v.magnetic,
        g2_electric: g2v.electric,
        f_eps,
        eps,
        alpha,
    })
}

/// (int |grad |u||^2, int |(grad/i - eps A) u|^2) on the field grid.
pub fn diamagnetic_pair(u: &ComplexField, s: &PotentialSamples, eps: f64) -> Result<(f64, f64), FieldError> {
    u.require_kind(FieldKind::Primal)?;
    check_samples(u, s)?;
    let n = u.basis().dim().n();
    let na = u.basis().n_angular();
    let lhs = grid_sum(u, true, |sh, p, _| {
        let a = p % na;
        let m = sh.values[a].norm();
        if m == 0.0 {
            return 0.0;
        }
        (0..n)
            .map(|k| ((sh.values[a].conj() * sh.grad[a * n + k]).re / m).powi(2))
            .sum()
    });
    let rhs = grid_sum(u, true, |sh, p, _| {
        let a = p % na;
        let ae = s.a_eff(p);
        (0..n)
            .map(|k| (sh.grad[a * n + k] * Complex64::new(0.0, -1.0) - sh.values[a] * (eps * ae[k])).norm_sqr())
            .sum()
    });
    Ok((lhs, rhs))
}

/// Density g of G1'(u): <G1'(u), v> = Re int g conj(v), g = 2i grad u . A + i div A u.
pub fn g1_density(u: &ComplexField, s: &PotentialSamples) -> Result<ComplexField, FieldError> {
    u.require_kind(FieldKind::Primal)?;
    check_samples(u, s)?;
    let n = u.basis().dim().n();
    let na = u.basis().n_angular();
    Ok(ComplexField::from_shell_fn(u.basis(), u.frame().clone(), FieldKind::Dual, |i, _, out| {
        let sh = u.shell(i, true);
        for a in 0..na {
            let p = i * na + a;
            let ae = s.a_eff(p);
            let mut dot = Complex64::new(0.0, 0.0);
            for k in 0..n {
                dot += sh.grad[a * n + k] * ae[k];
            }
            out[a] = Complex64::i() * (dot * 2.0 + sh.values[a] * s.div_eff(p));
        }
    }))
}

/// Density of G1' at a bubble, from the closed-form profile.
pub fn g1_source(b: &Bubble, basis: &Arc<FieldBasis>, s: &PotentialSamples) -> Result<ComplexField, FieldError> {
    let frame = b.frame();
    if &frame != s.frame() {
        return Err(FieldError::FrameMismatch(frame, s.frame().clone()));
    }
    let n = basis.dim().n();
    let na = basis.n_angular();
    let p = UnitProfile::new(basis.dim());
    let iph = Complex64::i() * b.phase();
    let rule = basis.harmonics().rule();
    Ok(ComplexField::from_shell_fn(basis, frame, FieldKind::Dual, |i, r, out| {
        let (z, dz) = (p.value(r), p.d1(r));
        for a in 0..na {
            let q = i * na + a;
            let om = rule.point(a);
            let ae = s.a_eff(q);
            let dot: f64 = (0..n).map(|k| om[k] * ae[k]).sum();
            out[a] = iph * (2.0 * dz * dot + z * s.div_eff(q));
        }
    }))
}

/// Riesz representative in E of G1' at a bubble.
pub fn grad_g1(b: &Bubble, basis: &Arc<FieldBasis>, s: &PotentialSamples) -> Result<ComplexField, FieldError> {
    g1_source(b, basis, s)?.riesz()
}

/// The field h with <h, w>_E = <f0''(z) v, w> for all w, z = e^{i sigma} z_{mu,xi}.
pub fn hessian_f0_apply(b: &Bubble, v: &ComplexField) -> Result<ComplexField, FieldError> {
    v.require_kind(FieldKind::Primal)?;
    let frame = b.frame();
    if &frame != v.frame() {
        return Err(FieldError::FrameMismatch(frame, v.frame().clone()));
    }
    let basis = v.basis();
    let nr = basis.n_radial();
    let ts = basis.dim().two_star();
    let mw: Vec<f64> = basis.mass().iter().zip(basis.bubble_weight()).map(|(m, w)| m * w).collect();
    let ph = b.phase();
    let back = ph;
    let fwd = ph.conj();
    let mut out = v.clone();
    let profiles: Vec<Vec<Complex64>> = (0..basis.n_channels())
        .into_par_iter()
        .map(|c| {
            let ch = basis.stiffness_cholesky(basis.harmonics().degree(c));
            let f: Vec<Complex64> = v.profile(c).iter().map(|x| x * fwd).collect();
            let re = ch.solve(&DVector::from_fn(nr, |i, _| (ts - 1.0) * mw[i] * f[i].re));
            let im = ch.solve(&DVector::from_fn(nr, |i, _| mw[i] * f[i].im));
            (0..nr).map(|i| (f[i] - Complex64::new(re[i], im[i])) * back).collect()
        })
        .collect();
    for (c, p) in profiles.into_iter().enumerate() {
        out.profile_mut(c).copy_from_slice(&p);
    }
    Ok(out)
}

fn partition(x: &[f64], xi: &[f64], rho: f64) -> f64 {
    let d2: f64 = x.iter().zip(xi).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (rho * rho)).exp()
}

/// Gauss-Legendre nodes per panel at each level of the peaked rule.
pub const PEAKED_NODES: [usize; 7] = [3, 4, 5, 6, 8, 10, 12];

/// Integral of w(x) |z_{mu,xi}(x)|^2; returns (value, error estimate).
fn bubble_weighted<W>(b: &Bubble, kappa: f64, w: W, pot_chart: &Chart, transverse: usize, rule: G2Rule) -> Result<(f64, f64), QuadratureError>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    let n = b.xi().len() as f64;
    let mu = b.mu();
    let xi = b.xi();
    let z2 = |x: &[f64]| {
        let d2: f64 = x.iter().zip(xi).map(|(a, c)| (a - c) * (a - c)).sum();
        let z = kappa * mu.powf((n - 2.0) / 2.0) * (mu * mu + d2).powf(-(n - 2.0) / 2.0);
        z * z
    };
    match rule {
        G2Rule::Level(level) => {
            let nodes = |lv: usize| {
                PEAKED_NODES
                    .get(lv)
                    .copied()
                    .ok_or_else(|| QuadratureError::InvalidRule(format!("peaked level {lv}")))
            };
            let f = |x: &[f64]| w(x) * z2(x);
            let peak = Chart::new(xi.to_vec(), mu);
            let hi = integrate_peaked(&f, &peak, pot_chart, nodes(level)?, transverse)?.0;
            let lo = if level > 0 {
                integrate_peaked(&f, &peak, pot_chart, nodes(level - 1)?, transverse)?.0
            } else {
                hi
            };
            Ok((hi, (hi - lo).abs()))
        }
        G2Rule::Qmc { rel_tol, seed } => {
            let rho = 0.5 * pot_chart.scale;
            let inner = |x: &[f64]| partition(x, xi, rho) * w(x) * z2(x);
            let outer = |x: &[f64]| (1.0 - partition(x, xi, rho)) * w(x) * z2(x);
            let bchart = Chart::new(xi.to_vec(), mu.min(rho));
            let a = integrate_rn(inner, &bchart, rel_tol, QuadMode::Qmc, seed)?;
            let b = integrate_rn(outer, pot_chart, rel_tol, QuadMode::Qmc, seed.wrapping_add(1))?;
            Ok((a.value + b.value, a.error + b.error))
        }
    }
}

/// Quadrature used for G2 at a bubble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum G2Rule {
    /// Peaked rule at a fixed level; the error is the change from the level below.
    Level(usize),
    /// Randomized Sobol estimate on both charts.
    Qmc { rel_tol: f64, seed: u64 },
}

impl Default for G2Rule {
    fn default() -> Self {
        G2Rule::Level(BUBBLE_G2_LEVEL)
    }
}

/// G2 at a bubble by direct quadrature on R^N at a fixed product level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleG2 {
    pub parts: G2Parts,
    pub error: f64,
}

pub const BUBBLE_G2_LEVEL: usize = 5;

/// Built-in weights are radial about their centre times a polynomial of
/// degree at most two; tables get a richer transverse rule.
fn transverse_exactness(family: &str) -> usize {
    if family == "user-table" {
        9
    } else {
        3
    }
}

pub fn g2_bubble(b: &Bubble, a: &MagneticPotential, v: &ElectricPotential, rule: G2Rule) -> Result<BubbleG2, QuadratureError> {
    let dim = crate::instanton::Dimension::new(b.xi().len()).map_err(|e| QuadratureError::InvalidRule(e.to_string()))?;
    let kappa = crate::instanton::kappa(dim);
    let (mut magnetic, mut electric, mut error) = (0.0, 0.0, 0.0);
    if !a.is_zero() {
        let (val, err) = bubble_weighted(
            b,
            kappa,
            |x: &[f64]| 0.5 * a.field(x).iter().map(|c| c * c).sum::<f64>(),
            &a.chart(),
            transverse_exactness(a.family_name()),
            rule,
        )?;
        magnetic = val;
        error += err;
    }
    if !v.is_zero() {
        let (val, err) = bubble_weighted(
            b,
            kappa,
            |x: &[f64]| 0.5 * v.eval(x),
            &v.chart(),
            transverse_exactness(v.family_name()),
            rule,
        )?;
        electric = val;
        error += err;
    }
    Ok(BubbleG2 {
        parts: G2Parts { magnetic, electric },
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instanton::{bubble_field, bubble_norms, tangent_basis, Dimension};
    use crate::potentials::PotentialSpec;
    use crate::quadrature::integrate_radial;
    use approx::assert_relative_eq;
    use std::path::Path;

    fn setup() -> (Dimension, Arc<FieldBasis>) {
        let d = Dimension::new(5).unwrap();
        (d, FieldBasis::new(d, 4, 48).unwrap())
    }

    fn gaussian_pair(d: Dimension) -> PotentialPair {
        let a = PotentialSpec {
            swirl: Some(0.5),
            ..PotentialSpec::family("gaussian-envelope")
        }
        .magnetic(d, Path::new("."))
        .unwrap();
        let v = PotentialSpec::family("gaussian").electric(d, Path::new(".")).unwrap();
        PotentialPair::new(a, v)
    }

    #[test]
    fn f0_of_bubble_is_critical_norm_over_n() {
        let (d, basis) = setup();
        let norms = bubble_norms(d).unwrap();
        for sigma in [0.0, std::f64::consts::FRAC_PI_3, std::f64::consts::PI] {
            let b = Bubble::new(sigma, 0.7, vec![0.2, 0.0, -0.1, 0.0, 0.4]).unwrap();
            let z = bubble_field(&b, &basis).unwrap();
            assert_relative_eq!(f0(&z).unwrap(), norms.l2star / 5.0, max_relative = 1e-7);
        }
        let zero = ComplexField::zeros(&basis, Frame::unit(5), FieldKind::Primal);
        assert_eq!(f0(&zero).unwrap(), 0.0);
    }

    #[test]
    fn g1_vanishes_on_bubbles() {
        let (d, basis) = setup();
        let pot = gaussian_pair(d);
        let b = Bubble::new(1.1, 0.6, vec![0.3, -0.2, 0.1, 0.0, 0.5]).unwrap();
        let s = PotentialSamples::new(&basis, &b.frame(), &pot);
        let z = bubble_field(&b, &basis).unwrap();
        assert!(g1(&z, &s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn g2_electric_matches_radial_oracle() {
        let (d, basis) = setup();
        let pot = PotentialPair::new(MagneticPotential::zero(d), gaussian_pair(d).v);
        let mu = 0.5;
        let b = Bubble::new(0.0, mu, vec![0.0; 5]).unwrap();
        let p = UnitProfile::new(d);
        // 1/2 mu^2 int e^{-mu^2 r^2} z0^2 dy
        let oracle = 0.5
            * mu
            * mu
            * d.sphere_area()
            * integrate_radial(|r| (-mu * mu * r * r).exp() * p.value(r).powi(2) * r.powi(4), 1.0, 1e-13)
                .unwrap()
                .value;
        let s = PotentialSamples::new(&basis, &b.frame(), &pot);
        let z = bubble_field(&b, &basis).unwrap();
        assert_relative_eq!(g2(&z, &s).unwrap().electric, oracle, max_relative = 1e-8);
        let direct = g2_bubble(&b, &pot.a, &pot.v, G2Rule::default()).unwrap();
        assert_relative_eq!(direct.parts.electric, oracle, max_relative = 1e-8);
        assert!(direct.error < 1e-6 * oracle);
        let qmc = g2_bubble(&b, &pot.a, &pot.v, G2Rule::Qmc { rel_tol: 1e-3, seed: 7 }).unwrap();
        assert_relative_eq!(qmc.parts.electric, oracle, max_relative = 5e-3);
    }

    #[test]
    fn riesz_of_g1_density_pairs_like_g1_derivative() {
        let (d, basis) = setup();
        let pot = gaussian_pair(d);
        let b = Bubble::new(0.0, 0.8, vec![0.4, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let s = PotentialSamples::new(&basis, &b.frame(), &pot);
        let src = g1_source(&b, &basis, &s).unwrap();
        let z = bubble_field(&b, &basis).unwrap();
        let via_field = g1_density(&z, &s).unwrap();
        let diff = src.axpy(Complex64::new(-1.0, 0.0), &via_field).unwrap();
        assert!(diff.l2_inner(&diff).unwrap().sqrt() < 1e-8 * src.l2_inner(&src).unwrap().sqrt());
        // tangent directions pair to zero
        let tb = tangent_basis(&b, &basis).unwrap();
        let r = src.riesz().unwrap();
        let scale = r.e_norm().unwrap();
        for t in tb.vectors() {
            assert!(src.pair(t).unwrap().abs() < 1e-6 * scale * t.e_norm().unwrap());
        }
        // sigma = 0: the representative is purely imaginary
        let re: f64 = r.data().iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let im: f64 = r.data().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        assert!(re < 1e-12 * im);
    }

    #[test]
    fn directional_derivative_of_g1() {
        let (d, basis) = setup();
        let pot = gaussian_pair(d);
        let b = Bubble::new(0.0, 1.0, vec![0.2, 0.1, 0.0, 0.0, 0.0]).unwrap();
        let s = PotentialSamples::new(&basis, &b.frame(), &pot);
        let z = bubble_field(&b, &basis).unwrap();
        let v = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Primal, |y| {
            let q = 1.0 + y.iter().map(|c| c * c).sum::<f64>();
            Complex64::new(y[0], 1.0 + y[1]) / q.powi(2)
        });
        let t = 1e-4;
        let up = z.axpy(Complex64::new(t, 0.0), &v).unwrap();
        let dn = z.axpy(Complex64::new(-t, 0.0), &v).unwrap();
        let fd = (g1(&up, &s).unwrap() - g1(&dn, &s).unwrap()) / (2.0 * t);
        let exact = g1_source(&b, &basis, &s).unwrap().pair(&v).unwrap();
        assert_relative_eq!(fd, exact, max_relative = 1e-6);
    }

    #[test]
    fn hessian_kills_tangent_vectors_and_is_symmetric() {
        let (d, basis) = setup();
        let b = Bubble::new(0.7, 1.3, vec![0.1, 0.0, 0.2, 0.0, 0.0]).unwrap();
        let tb = tangent_basis(&b, &basis).unwrap();
        for t in tb.vectors() {
            let h = hessian_f0_apply(&b, t).unwrap();
            assert!(h.e_norm().unwrap() < 1e-6 * t.e_norm().unwrap());
        }
        let v = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Primal, |y| {
            let q = 1.0 + y.iter().map(|c| c * c).sum::<f64>();
            Complex64::new(y[0] * y[1], 0.3 - y[2]) / q.powi(3)
        });
        let w = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Primal, |y| {
            let q = 1.0 + y.iter().map(|c| c * c).sum::<f64>();
            Complex64::new(1.0, y[3]) / q.powf(2.5)
        });
        let hv = hessian_f0_apply(&b, &v).unwrap().e_inner(&w).unwrap();
        let hw = hessian_f0_apply(&b, &w).unwrap().e_inner(&v).unwrap();
        assert_relative_eq!(hv, hw, max_relative = 1e-10);
        // <f0''(z) z, z> = (2 - 2*) int z^{2*}
        let z = bubble_field(&b, &basis).unwrap();
        let hz = hessian_f0_apply(&b, &z).unwrap().e_inner(&z).unwrap();
        let norms = bubble_norms(d).unwrap();
        assert_relative_eq!(hz, (2.0 - d.two_star()) * norms.l2star, max_relative = 1e-7);
        // second difference of f0
        let t = 1e-3;
        let f = |s: f64| f0(&z.axpy(Complex64::new(s, 0.0), &v).unwrap()).unwrap();
        let fd = (f(t) - 2.0 * f(0.0) + f(-t)) / (t * t);
        let exact = hessian_f0_apply(&b, &v).unwrap().e_inner(&v).unwrap();
        assert_relative_eq!(fd, exact, max_relative = 1e-4);
    }

    #[test]
    fn energy_splitting_and_diamagnetic_inequality() {
        let (d, basis) = setup();
        let pot = gaussian_pair(d);
        let b = Bubble::new(0.0, 1.0, vec![0.0; 5]).unwrap();
        let s = PotentialSamples::new(&basis, &b.frame(), &pot);
        let u = ComplexField::from_unit_fn(&basis, b.frame(), FieldKind::Primal, |y| {
            let q = 1.0 + y.iter().map(|c| c * c).sum::<f64>();
            Complex64::new(2.0 + y[0], y[1] - y[2]) / q.powf(1.5)
        });
        let e = energy(&u, &s, 0.3, 2.0).unwrap();
        assert_eq!(e.f_eps, e.f0 + 0.3 * e.g1 + 0.09 * e.g2);
        for eps in [0.1, 1.0] {
            let (lhs, rhs) = diamagnetic_pair(&u, &s, eps).unwrap();
            assert!(lhs <= rhs, "{lhs} {rhs}");
        }
    }
}
