//! Critical points of Gamma, assembly of u_eps = z + eps phi and residuals.

use argmin::core::{CostFunction, Error as ArgminError, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::functionals::{energy, ComplexField, EnergyBreakdown, FieldError, FieldKind, PotentialSamples};
use crate::instanton::{bubble_field, tangent_basis, Bubble, InstantonError};
use crate::melnikov::{GammaLandscape, Melnikov, MelnikovError, SliceGrid};
use crate::potentials::PotentialPair;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("Gamma is flat on the grid: max |Gamma| = {max_abs:.3e} below the noise floor {floor:.3e}")]
    FlatLandscape { max_abs: f64, floor: f64 },
    #[error("eps = {0} outside [0, {EPS_MAX}]")]
    EpsOutOfRange(f64),
    #[error("alpha must lie in [1, 2], got {0}")]
    Alpha(f64),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error(transparent)]
    Melnikov(#[from] MelnikovError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Instanton(#[from] InstantonError),
}

/// Largest eps for which the first-order correction is used.
pub const EPS_MAX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Min,
    Max,
    Saddle,
}

impl std::fmt::Display for PointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PointKind::Min => "min",
            PointKind::Max => "max",
            PointKind::Saddle => "saddle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub mu: f64,
    pub xi: Vec<f64>,
    /// Slice coordinate s with xi = origin + s * direction.
    pub s: f64,
    pub value: f64,
    pub kind: PointKind,
    /// Central-difference gradient in (log mu, xi).
    pub gradient_norm: f64,
    pub basin_radius: f64,
    /// Second derivatives: slice block eigenvalues, then transverse directions.
    pub curvature: Vec<f64>,
}

/// Settings of the critical point search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Gradient tolerance relative to max |Gamma| on the grid.
    pub grad_tol_rel: f64,
    /// Merge radius as a fraction of the grid diagonal in (log mu, s).
    pub merge_fraction: f64,
    pub fd_step: f64,
    pub max_starts: usize,
    pub simplex_iters: u64,
    pub newton_iters: usize,
    /// Also differentiate across the slice.
    pub transverse: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grad_tol_rel: 1e-5,
            merge_fraction: 0.05,
            fd_step: 1e-3,
            max_starts: 6,
            simplex_iters: 60,
            newton_iters: 8,
            transverse: true,
        }
    }
}

/// Critical points with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
    pub grad_tol: f64,
    pub merge_radius: f64,
}

struct Slice<'a> {
    m: &'a Melnikov,
    grid: &'a SliceGrid,
}

impl Slice<'_> {
    fn eval(&self, p: [f64; 2]) -> Result<f64, MelnikovError> {
        Ok(self.m.gamma(p[0].exp(), &self.grid.xi(p[1]))?.gamma)
    }

    fn eval_xi(&self, lmu: f64, xi: &[f64]) -> Result<f64, MelnikovError> {
        Ok(self.m.gamma(lmu.exp(), xi)?.gamma)
    }

    fn inside(&self, p: [f64; 2]) -> bool {
        let ((a, b), (c, d)) = self.grid.bounds();
        p[0] >= a && p[0] <= b && p[1] >= c && p[1] <= d
    }

    fn gradient(&self, p: [f64; 2], h: f64) -> Result<Vector2<f64>, MelnikovError> {
        let mut g = Vector2::zeros();
        for k in 0..2 {
            let (mut a, mut b) = (p, p);
            a[k] += h;
            b[k] -= h;
            g[k] = (self.eval(a)? - self.eval(b)?) / (2.0 * h);
        }
        Ok(g)
    }

    fn hessian(&self, p: [f64; 2], h: f64) -> Result<Matrix2<f64>, MelnikovError> {
        let f0 = self.eval(p)?;
        let mut m = Matrix2::zeros();
        for k in 0..2 {
            let (mut a, mut b) = (p, p);
            a[k] += h;
            b[k] -= h;
            m[(k, k)] = (self.eval(a)? - 2.0 * f0 + self.eval(b)?) / (h * h);
        }
        let at = |dx: f64, dy: f64| self.eval([p[0] + dx, p[1] + dy]);
        let cross = (at(h, h)? - at(h, -h)? - at(-h, h)? + at(-h, -h)?) / (4.0 * h * h);
        m[(0, 1)] = cross;
        m[(1, 0)] = cross;
        Ok(m)
    }
}

struct Objective<'a> {
    slice: &'a Slice<'a>,
    sign: f64,
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, ArgminError> {
        let q = [p[0], p[1]];
        if !self.slice.inside(q) {
            return Ok(f64::INFINITY);
        }
        Ok(self.sign * self.slice.eval(q)?)
    }
}

/// Orthonormal completion of `dir` in R^n.
fn transverse_basis(dir: &[f64]) -> Vec<Vec<f64>> {
    let n = dir.len();
    let mut basis: Vec<Vec<f64>> = vec![dir.to_vec()];
    for k in 0..n {
        let mut v: Vec<f64> = (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-8 && basis.len() < n {
            basis.push(v.iter().map(|x| x / nv).collect());
        }
    }
    basis.remove(0);
    basis
}

/// Grid cells that are local extrema among their neighbours: (i_mu, i_s, is_max).
fn grid_extrema(land: &GammaLandscape) -> Vec<(usize, usize, bool)> {
    let nm = land.grid.mus.len();
    let ns = land.grid.ss.len();
    let val = |i: usize, j: usize| {
        let s = land.sample(i, j);
        if s.is_ok() {
            Some(s.gamma)
        } else {
            None
        }
    };
    let mut out = Vec::new();
    for i in 0..nm {
        for j in 0..ns {
            let Some(v) = val(i, j) else { continue };
            let (mut is_min, mut is_max) = (true, true);
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= nm as i64 || b >= ns as i64 {
                        continue;
                    }
                    if let Some(w) = val(a as usize, b as usize) {
                        is_min &= v < w;
                        is_max &= v > w;
                    }
                }
            }
            if is_max && v > 0.0 {
                out.push((i, j, true));
            }
            if is_min && v < 0.0 {
                out.push((i, j, false));
            }
        }
    }
    out
}

/// Multistart search for critical points of Gamma on the landscape slice.
pub fn find_critical_points(m: &Melnikov, land: &GammaLandscape, opts: &SearchOptions) -> Result<SearchResult, ReductionError> {
    let max_abs = land.max_abs();
    let noise = land
        .samples
        .iter()
        .filter(|s| s.is_ok())
        .fold(0.0f64, |a, s| a.max(s.quadrature_error));
    let floor = (10.0 * noise).max(1e-12);
    if !(max_abs > floor) {
        return Err(ReductionError::FlatLandscape { max_abs, floor });
    }
    let grad_tol = opts.grad_tol_rel * max_abs;
    let merge_radius = opts.merge_fraction * land.grid.diagonal();
    let mut warnings = Vec::new();
    let mut starts = grid_extrema(land);
    if starts.iter().any(|&(i, _, _)| i == 0) {
        warnings.push(format!(
            "an extremum of the grid lies on the smallest scale mu = {:.3e}; critical points closer to mu = 0 are not resolved",
            land.grid.mus[0]
        ));
    }
    starts.sort_by(|a, b| {
        let va = land.sample(a.0, a.1).gamma.abs();
        let vb = land.sample(b.0, b.1).gamma.abs();
        vb.total_cmp(&va).then(a.cmp(b))
    });
    starts.truncate(opts.max_starts);
    let slice = Slice { m, grid: &land.grid };
    let spacing = [
        (land.grid.mus[1] / land.grid.mus[0]).ln(),
        land.grid.ss[1] - land.grid.ss[0],
    ];
    let refined: Vec<Result<Option<CriticalPoint>, ReductionError>> = starts
        .par_iter()
        .map(|&(i, j, is_max)| {
            let p0 = [land.grid.mus[i].ln(), land.grid.ss[j]];
            refine(&slice, p0, is_max, spacing, grad_tol, opts)
        })
        .collect();
    let mut found = Vec::new();
    for (r, &(i, j, _)) in refined.into_iter().zip(&starts) {
        match r? {
            Some(cp) if cp.gradient_norm < grad_tol => found.push(cp),
            Some(cp) => warnings.push(format!(
                "start at mu = {:.4}, s = {:.4} stopped with gradient {:.3e} above tolerance {:.3e}",
                land.grid.mus[i], land.grid.ss[j], cp.gradient_norm, grad_tol
            )),
            None => warnings.push(format!(
                "start at mu = {:.4}, s = {:.4} left the scanned box",
                land.grid.mus[i], land.grid.ss[j]
            )),
        }
    }
    let mut points = dedup(found, merge_radius);
    assign_basins(&mut points, &land.grid);
    points.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.mu.total_cmp(&b.mu)));
    Ok(SearchResult {
        points,
        warnings,
        grad_tol,
        merge_radius,
    })
}

fn refine(
    slice: &Slice,
    p0: [f64; 2],
    is_max: bool,
    spacing: [f64; 2],
    grad_tol: f64,
    opts: &SearchOptions,
) -> Result<Option<CriticalPoint>, ReductionError> {
    let h = opts.fd_step;
    let sign = if is_max { -1.0 } else { 1.0 };
    let simplex = vec![
        vec![p0[0], p0[1]],
        vec![p0[0] + 0.5 * spacing[0], p0[1]],
        vec![p0[0], p0[1] + 0.5 * spacing[1]],
    ];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(1e-12 * grad_tol.max(1e-300))
        .map_err(|e| ReductionError::Optimizer(e.to_string()))?;
    let res = Executor::new(Objective { slice, sign }, solver)
        .configure(|s| s.max_iters(opts.simplex_iters))
        .run()
        .map_err(|e| ReductionError::Optimizer(e.to_string()))?;
    let best = res.state.best_param.unwrap_or_else(|| vec![p0[0], p0[1]]);
    let mut p = [best[0], best[1]];
    for _ in 0..opts.newton_iters {
        let g = slice.gradient(p, h)?;
        if g.norm() < 0.1 * grad_tol {
            break;
        }
        let hm = slice.hessian(p, h)?;
        let Some(step) = hm.lu().solve(&(-g)) else { break };
        let cap = 0.5 * spacing[0].min(spacing[1]);
        let scale = if step.norm() > cap { cap / step.norm() } else { 1.0 };
        let q = [p[0] + scale * step[0], p[1] + scale * step[1]];
        if !slice.inside(q) {
            return Ok(None);
        }
        p = q;
    }
    if !slice.inside(p) {
        return Ok(None);
    }
    let value = slice.eval(p)?;
    let g = slice.gradient(p, h)?;
    let hm = slice.hessian(p, h)?;
    let eig = SymmetricEigen::new(hm);
    let mut curvature: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    curvature.sort_by(|a, b| a.total_cmp(b));
    let xi = slice.grid.xi(p[1]);
    let mut grad2 = g.norm_squared();
    if opts.transverse {
        for t in transverse_basis(&slice.grid.direction) {
            let shift = |s: f64| -> Vec<f64> { xi.iter().zip(&t).map(|(x, d)| x + s * d).collect() };
            let fp = slice.eval_xi(p[0], &shift(h))?;
            let fm = slice.eval_xi(p[0], &shift(-h))?;
            grad2 += ((fp - fm) / (2.0 * h)).powi(2);
            curvature.push((fp - 2.0 * value + fm) / (h * h));
        }
    }
    let kind = if curvature.iter().all(|c| *c > 0.0) {
        PointKind::Min
    } else if curvature.iter().all(|c| *c < 0.0) {
        PointKind::Max
    } else {
        PointKind::Saddle
    };
    Ok(Some(CriticalPoint {
        mu: p[0].exp(),
        xi,
        s: p[1],
        value,
        kind,
        gradient_norm: grad2.sqrt(),
        basin_radius: 0.0,
        curvature,
    }))
}

fn slice_dist(a: &CriticalPoint, b: &CriticalPoint) -> f64 {
    ((a.mu.ln() - b.mu.ln()).powi(2) + (a.s - b.s).powi(2)).sqrt()
}

/// Keeps one point per cluster: the most extreme value, then the smaller mu.
fn dedup(mut pts: Vec<CriticalPoint>, radius: f64) -> Vec<CriticalPoint> {
    pts.sort_by(|a, b| {
        b.value
            .abs()
            .total_cmp(&a.value.abs())
            .then(a.mu.total_cmp(&b.mu))
    });
    let mut out: Vec<CriticalPoint> = Vec::new();
    for p in pts {
        if out.iter().all(|q| q.kind != p.kind || slice_dist(&p, q) > radius) {
            out.push(p);
        }
    }
    out
}

/// Half the distance to the nearest other point, capped by the distance to the box edge.
fn assign_basins(pts: &mut [CriticalPoint], grid: &SliceGrid) {
    let ((a, b), (c, d)) = grid.bounds();
    let snapshot = pts.to_vec();
    for (i, p) in pts.iter_mut().enumerate() {
        let lm = p.mu.ln();
        let mut r = (lm - a).min(b - lm).min(p.s - c).min(d - p.s);
        for (j, q) in snapshot.iter().enumerate() {
            if i != j {
                r = r.min(0.5 * slice_dist(p, q));
            }
        }
        p.basin_radius = r.max(0.0);
    }
}

/// u_eps = z + eps phi at a point of Z with diagnostics.
#[derive(Debug, Clone)]
pub struct ReducedSolution {
    pub eps: f64,
    pub alpha: f64,
    pub bubble: Bubble,
    pub correction: ComplexField,
    pub solution: ComplexField,
    pub energy: EnergyBreakdown,
    pub gamma: f64,
    pub residual_perp: f64,
    pub residual_tangent: f64,
}

/// Components of the Riesz representative of f_eps'(u) along and across T_z Z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub perp: f64,
    pub tangent: f64,
}

fn check_eps(eps: f64) -> Result<(), ReductionError> {
    if !(0.0..=EPS_MAX).contains(&eps) {
        return Err(ReductionError::EpsOutOfRange(eps));
    }
    Ok(())
}

/// Assembles u_eps at a bubble of any phase. For alpha < 2 the reduced
/// value is 1/2 int V |z|^2 instead of Gamma.
pub fn assemble_at(m: &Melnikov, b: &Bubble, eps: f64, alpha: f64) -> Result<ReducedSolution, ReductionError> {
    check_eps(eps)?;
    if !(1.0..=2.0).contains(&alpha) {
        return Err(ReductionError::Alpha(alpha));
    }
    let basis = m.basis();
    let z = bubble_field(b, basis)?;
    let phi = if m.potentials().a.is_zero() {
        ComplexField::zeros(basis, b.frame(), FieldKind::Primal)
    } else {
        m.correction(b)?.phi
    };
    let u = if eps == 0.0 { z } else { z.axpy(Complex64::new(eps, 0.0), &phi)? };
    let samples = PotentialSamples::new(basis, &b.frame(), m.potentials());
    let en = energy(&u, &samples, eps, alpha)?;
    let res = pde_residual(&u, b, &samples, eps, alpha)?;
    let gamma = if alpha < 2.0 {
        m.gamma_alpha(b.mu(), b.xi(), alpha)?
    } else {
        m.gamma_at(b)?.gamma
    };
    Ok(ReducedSolution {
        eps,
        alpha,
        bubble: b.clone(),
        correction: phi,
        solution: u,
        energy: en,
        gamma,
        residual_perp: res.perp,
        residual_tangent: res.tangent,
    })
}

/// Assembles u_eps at a critical point (sigma = 0).
pub fn assemble_solution(m: &Melnikov, cp: &CriticalPoint, eps: f64, alpha: f64) -> Result<ReducedSolution, ReductionError> {
    let b = Bubble::new(0.0, cp.mu, cp.xi.clone())?;
    assemble_at(m, &b, eps, alpha)
}

/// Residual of (grad/i - eps A)^2 u + eps^alpha V u - |u|^{2*-2} u in the dual of E.
pub fn pde_residual(
    u: &ComplexField,
    b: &Bubble,
    samples: &PotentialSamples,
    eps: f64,
    alpha: f64,
) -> Result<Residuals, ReductionError> {
    u.require_kind(FieldKind::Primal)?;
    let basis = u.basis();
    let n = basis.dim().n();
    let na = basis.n_angular();
    let ts = basis.dim().two_star();
    let ea = eps.powf(alpha);
    let h = ComplexField::from_shell_fn(basis, u.frame().clone(), FieldKind::Dual, |i, _, out| {
        let sh = u.shell(i, eps != 0.0);
        for a in 0..na {
            let p = i * na + a;
            let v = sh.values[a];
            let mut acc = -v * v.norm().powf(ts - 2.0);
            if eps != 0.0 {
                let ae = samples.a_eff(p);
                let mut dot = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    dot += sh.grad[a * n + k] * ae[k];
                }
                acc += Complex64::i() * (dot * 2.0 + v * samples.div_eff(p)) * eps;
                acc += v * (eps * eps * ae.iter().map(|c| c * c).sum::<f64>() + ea * samples.v_eff(p));
            }
            out[a] = acc;
        }
    });
    let rho = u.axpy(Complex64::new(1.0, 0.0), &h.riesz()?)?;
    let tb = tangent_basis(b, basis)?;
    let gram = tb.gram();
    let rhs = nalgebra::DVector::from_iterator(
        tb.len(),
        tb.vectors().iter().map(|t| t.e_inner(&rho)).collect::<Result<Vec<_>, _>>()?,
    );
    let coef = gram
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .unwrap_or_else(|| nalgebra::DVector::zeros(tb.len()));
    let tangent = coef.dot(&(&gram * &coef)).max(0.0).sqrt();
    let mut perp = rho;
    for (c, t) in coef.iter().zip(tb.vectors()) {
        perp = perp.axpy(Complex64::new(-c, 0.0), t)?;
    }
    Ok(Residuals {
        perp: perp.e_norm()?,
        tangent,
    })
}

/// Residuals of a reduced solution recomputed for given potentials.
pub fn solution_residual(sol: &ReducedSolution, pot: &PotentialPair) -> Result<Residuals, ReductionError> {
    let samples = PotentialSamples::new(sol.solution.basis(), sol.solution.frame(), pot);
    pde_residual(&sol.solution, &sol.bubble, &samples, sol.eps, sol.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{FieldBasis, G2Rule};
    use crate::instanton::Dimension;
    use crate::potentials::{ElectricPotential, PotentialSpec};
    use std::path::Path;
    use std::sync::Arc;

    fn basis() -> Arc<FieldBasis> {
        FieldBasis::new(Dimension::new(5).unwrap(), 4, 48).unwrap()
    }

    #[test]
    fn transverse_basis_is_orthonormal_complement() {
        let t = transverse_basis(&[0.6, 0.8, 0.0]);
        assert_eq!(t.len(), 2);
        for v in &t {
            assert!((v[0] * 0.6 + v[1] * 0.8).abs() < 1e-12);
            assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_landscape_is_reported() {
        let b = basis();
        let d = b.dim();
        let m = Melnikov::new(&b, PotentialPair::zero(d), G2Rule::default()).unwrap();
        let grid = SliceGrid::new((0.5, 2.0), 3, (-1.0, 1.0), 3, vec![0.0; 5], vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let land = crate::melnikov::scan(&m, &grid);
        assert!(matches!(
            find_critical_points(&m, &land, &SearchOptions::default()),
            Err(ReductionError::FlatLandscape { .. })
        ));
    }

    #[test]
    fn unperturbed_bubble_has_no_residual() {
        let b = basis();
        let d = b.dim();
        let a = PotentialSpec::family("gaussian-envelope").magnetic(d, Path::new(".")).unwrap();
        let m = Melnikov::new(&b, PotentialPair::new(a, ElectricPotential::zero(d)), G2Rule::default()).unwrap();
        let bub = Bubble::new(0.4, 1.2, vec![0.2, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let sol = assemble_at(&m, &bub, 0.0, 2.0).unwrap();
        assert!(sol.residual_perp < 1e-7 && sol.residual_tangent < 1e-7, "{} {}", sol.residual_perp, sol.residual_tangent);
        assert!(assemble_at(&m, &bub, 0.2, 2.0).is_err());
        assert!(assemble_at(&m, &bub, 0.05, 0.5).is_err());
    }

    #[test]
    fn assembly_is_gauge_covariant() {
        let b = basis();
        let d = b.dim();
        let a = PotentialSpec::family("gaussian-envelope").magnetic(d, Path::new(".")).unwrap();
        let m = Melnikov::new(&b, PotentialPair::new(a, ElectricPotential::zero(d)), G2Rule::default()).unwrap();
        let xi = vec![0.3, 0.1, 0.0, 0.0, 0.0];
        let s0 = assemble_at(&m, &Bubble::new(0.5, 0.9, xi.clone()).unwrap(), 0.05, 2.0).unwrap();
        let s1 = assemble_at(&m, &Bubble::new(1.7, 0.9, xi).unwrap(), 0.05, 2.0).unwrap();
        let rot = s0.solution.scale(Complex64::from_polar(1.0, 1.2));
        let diff = rot.axpy(Complex64::new(-1.0, 0.0), &s1.solution).unwrap();
        assert!(diff.e_norm().unwrap() < 1e-10 * s1.solution.e_norm().unwrap());
    }

    #[test]
    fn sub_quadratic_alpha_reports_electric_reduced_value() {
        let b = basis();
        let d = b.dim();
        let a = PotentialSpec::family("gaussian-envelope").magnetic(d, Path::new(".")).unwrap();
        let v = PotentialSpec::family("gaussian").electric(d, Path::new(".")).unwrap();
        let m = Melnikov::new(&b, PotentialPair::new(a, v), G2Rule::default()).unwrap();
        let bub = Bubble::new(0.0, 0.8, vec![0.1, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let sol = assemble_at(&m, &bub, 0.05, 1.5).unwrap();
        let g = m.gamma_at(&bub).unwrap();
        assert_eq!(sol.alpha, 1.5);
        assert!((sol.gamma - g.g2_electric).abs() < 1e-12 * g.g2_electric);
        assert!((sol.energy.f_eps - assemble_at(&m, &bub, 0.05, 2.0).unwrap().energy.f_eps).abs() > 0.0);
    }
}
