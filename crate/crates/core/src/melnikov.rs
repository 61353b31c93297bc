//! The Melnikov function Gamma, the first-order correction phi and the
//! asymptotic checks on Gamma.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::functionals::{g1_source, g2_bubble, ComplexField, FieldBasis, FieldError, Frame, G2Rule, PotentialSamples};
use crate::instanton::{bubble_norms, Bubble, Dimension, InstantonError};
use crate::potentials::{ElectricPotential, MagneticPotential, PotentialPair};
use crate::quadrature::{integrate_rn, QuadMode, QuadratureError};
use crate::reduction::CriticalPoint;
use crate::spectral::{BlockDiagonalHessian, SpectralError};

#[derive(Debug, Error)]
pub enum MelnikovError {
    #[error("at mu = {mu}, xi = {xi:?}: {source}")]
    At {
        mu: f64,
        xi: Vec<f64>,
        #[source]
        source: Box<MelnikovError>,
    },
    #[error("the two forms of the correction term disagree: {first:.12e} vs {second:.12e}")]
    Inconsistent { first: f64, second: f64 },
    #[error("alpha must lie in [1, 2), got {0}")]
    Alpha(f64),
    #[error("centre has {got} components, expected {expected}")]
    CenterLength { expected: usize, got: usize },
    #[error("invalid slice: {0}")]
    Slice(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Instanton(#[from] InstantonError),
}

/// Relative agreement required between the two forms of the correction term.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-8;

/// One evaluation of Gamma.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSample {
    pub mu: f64,
    pub xi: Vec<f64>,
    pub gamma: f64,
    pub g2_part: f64,
    pub g2_magnetic: f64,
    pub g2_electric: f64,
    /// -1/2 <L_z G1'(z), G1'(z)>.
    pub correction_part: f64,
    pub quadrature_error: f64,
    /// ||phi||_E.
    pub correction_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GammaSample {
    fn failed(mu: f64, xi: Vec<f64>, msg: String) -> Self {
        Self {
            mu,
            xi,
            gamma: f64::NAN,
            g2_part: f64::NAN,
            g2_magnetic: f64::NAN,
            g2_electric: f64::NAN,
            correction_part: f64::NAN,
            quadrature_error: f64::NAN,
            correction_norm: f64::NAN,
            error: Some(msg),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// The correction phi = -L_z G1'(z) with the data it was built from.
#[derive(Debug, Clone)]
pub struct Correction {
    pub phi: ComplexField,
    /// Density of G1'(z).
    pub source: ComplexField,
    /// 1/2 <G1'(z), phi>.
    pub correction_part: f64,
    /// -1/2 <L_z G1'(z), G1'(z)> from the spectral coefficients.
    pub spectral_part: f64,
    pub kernel_fraction: f64,
}

/// Gamma at fixed potentials, with a per-(mu, xi) cache.
#[derive(Debug)]
pub struct Melnikov {
    basis: Arc<FieldBasis>,
    hessian: Arc<BlockDiagonalHessian>,
    pot: PotentialPair,
    a_only: PotentialPair,
    rule: G2Rule,
    cache: Mutex<HashMap<Vec<u64>, GammaSample>>,
}

impl Melnikov {
    pub fn new(basis: &Arc<FieldBasis>, pot: PotentialPair, rule: G2Rule) -> Result<Self, MelnikovError> {
        let hessian = Arc::new(BlockDiagonalHessian::new(basis)?);
        Ok(Self::with_hessian(hessian, pot, rule))
    }

    pub fn with_hessian(hessian: Arc<BlockDiagonalHessian>, pot: PotentialPair, rule: G2Rule) -> Self {
        let dim = hessian.basis().dim();
        let a_only = PotentialPair::new(pot.a.clone(), ElectricPotential::zero(dim));
        Self {
            basis: hessian.basis().clone(),
            hessian,
            pot,
            a_only,
            rule,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn dim(&self) -> Dimension {
        self.basis.dim()
    }

    pub fn basis(&self) -> &Arc<FieldBasis> {
        &self.basis
    }

    pub fn hessian(&self) -> &Arc<BlockDiagonalHessian> {
        &self.hessian
    }

    pub fn potentials(&self) -> &PotentialPair {
        &self.pot
    }

    pub fn rule(&self) -> G2Rule {
        self.rule
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }

    fn check_xi(&self, xi: &[f64]) -> Result<(), MelnikovError> {
        let n = self.dim().n();
        if xi.len() != n {
            return Err(MelnikovError::CenterLength {
                expected: n,
                got: xi.len(),
            });
        }
        Ok(())
    }

    /// phi = -L_z G1'(z) and both forms of 1/2 <G1'(z), phi>.
    pub fn correction(&self, b: &Bubble) -> Result<Correction, MelnikovError> {
        self.check_xi(b.xi())?;
        let frame = b.frame();
        let samples = PotentialSamples::new(&self.basis, &frame, &self.a_only);
        let source = g1_source(b, &self.basis, &samples)?;
        let sol = self.hessian.apply_lz(b, &source)?;
        let phi = sol.phi.scale(Complex64::new(-1.0, 0.0));
        let correction_part = 0.5 * source.pair(&phi)?;
        let spectral_part = -0.5 * sol.quadratic;
        let scale = correction_part.abs().max(spectral_part.abs());
        if (correction_part - spectral_part).abs() > CONSISTENCY_TOLERANCE * scale {
            return Err(MelnikovError::Inconsistent {
                first: correction_part,
                second: spectral_part,
            });
        }
        Ok(Correction {
            phi,
            source,
            correction_part,
            spectral_part,
            kernel_fraction: sol.kernel_fraction,
        })
    }

    pub fn correction_field(&self, b: &Bubble) -> Result<ComplexField, MelnikovError> {
        Ok(self.correction(b)?.phi)
    }

    /// Gamma at a bubble of any phase; not cached.
    pub fn gamma_at(&self, b: &Bubble) -> Result<GammaSample, MelnikovError> {
        let wrap = |e: MelnikovError| MelnikovError::At {
            mu: b.mu(),
            xi: b.xi().to_vec(),
            source: Box::new(e),
        };
        self.check_xi(b.xi()).map_err(wrap)?;
        let g2 = g2_bubble(b, &self.pot.a, &self.pot.v, self.rule).map_err(|e| wrap(e.into()))?;
        let (correction_part, norm, trunc) = if self.pot.a.is_zero() {
            (0.0, 0.0, 0.0)
        } else {
            let c = self.correction(b).map_err(wrap)?;
            let norm = c.phi.e_norm().map_err(|e| wrap(e.into()))?;
            let trunc = c.phi.truncation_fraction().map_err(|e| wrap(e.into()))?;
            (c.correction_part, norm, trunc)
        };
        Ok(GammaSample {
            mu: b.mu(),
            xi: b.xi().to_vec(),
            gamma: g2.parts.total() + correction_part,
            g2_part: g2.parts.total(),
            g2_magnetic: g2.parts.magnetic,
            g2_electric: g2.parts.electric,
            correction_part,
            quadrature_error: g2.error + correction_part.abs() * trunc,
            correction_norm: norm,
            error: None,
        })
    }

    /// Gamma(mu, xi) at sigma = 0, cached.
    pub fn gamma(&self, mu: f64, xi: &[f64]) -> Result<GammaSample, MelnikovError> {
        let key: Vec<u64> = std::iter::once(mu.to_bits()).chain(xi.iter().map(|x| x.to_bits())).collect();
        if let Some(s) = self.cache.lock().ok().and_then(|c| c.get(&key).cloned()) {
            return Ok(s);
        }
        let b = Bubble::new(0.0, mu, xi.to_vec()).map_err(|e| MelnikovError::At {
            mu,
            xi: xi.to_vec(),
            source: Box::new(e.into()),
        })?;
        let s = self.gamma_at(&b)?;
        if let Ok(mut c) = self.cache.lock() {
            c.insert(key, s.clone());
        }
        Ok(s)
    }

    /// Reduced function 1/2 int V |z|^2 for alpha in [1, 2).
    pub fn gamma_alpha(&self, mu: f64, xi: &[f64], alpha: f64) -> Result<f64, MelnikovError> {
        if !(1.0..2.0).contains(&alpha) {
            return Err(MelnikovError::Alpha(alpha));
        }
        self.check_xi(xi)?;
        let b = Bubble::new(0.0, mu, xi.to_vec())?;
        let zero = MagneticPotential::zero(self.dim());
        Ok(g2_bubble(&b, &zero, &self.pot.v, self.rule)?.parts.electric)
    }
}

/// lim Gamma / mu^2 = 1/2 V(xi) int z0^2.
pub fn gamma_smallmu_closed_form(xi: &[f64], v: &ElectricPotential, dim: Dimension) -> Result<f64, MelnikovError> {
    Ok(0.5 * v.eval(xi) * bubble_norms(dim)?.l2)
}

/// 1/2 |A(xi)|^2 int z0^2, the small-mu limit of H2 / mu^2 and of -correction / mu^2.
pub fn magnetic_smallmu_limit(xi: &[f64], a: &MagneticPotential, dim: Dimension) -> Result<f64, MelnikovError> {
    let f = a.field(xi);
    Ok(0.5 * f.iter().map(|c| c * c).sum::<f64>() * bubble_norms(dim)?.l2)
}

/// Two-level Richardson extrapolation to mu = 0 of a quantity with error
/// c1 mu + c2 mu^2, from values at mu, 2 mu and 4 mu.
pub fn richardson(f_mu: f64, f_2mu: f64, f_4mu: f64) -> f64 {
    let r1 = 2.0 * f_mu - f_2mu;
    let r1_coarse = 2.0 * f_2mu - f_4mu;
    (4.0 * r1 - r1_coarse) / 3.0
}

/// Constants in ||phi||_E <= ||L_z|| S^{-1/2} (2 ||A||_{L^N} ||z0||_E + ||div A||_{L^{N/2}} ||z0||_{2*}),
/// a bound uniform in (mu, xi).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionBound {
    pub constant: f64,
    pub lz_norm: f64,
    /// Best constant S in S ||u||_{2*}^2 <= ||u||_E^2.
    pub sobolev: f64,
    pub a_norm: f64,
    pub div_norm: f64,
}

pub fn correction_bound(m: &Melnikov) -> Result<CorrectionBound, MelnikovError> {
    let dim = m.dim();
    let n = dim.n() as f64;
    let norms = bubble_norms(dim)?;
    let z_e = norms.dirichlet.sqrt();
    let z_crit = norms.l2star.powf(1.0 / dim.two_star());
    let sobolev = norms.dirichlet / (z_crit * z_crit);
    let a = &m.pot.a;
    let (a_norm, div_norm) = if a.is_zero() {
        (0.0, 0.0)
    } else {
        let chart = a.chart();
        let an = integrate_rn(
            |x: &[f64]| a.field(x).iter().map(|c| c * c).sum::<f64>().powf(n / 2.0),
            &chart,
            BOUND_REL_TOL,
            QuadMode::Product,
            0,
        )?;
        let dn = integrate_rn(|x: &[f64]| a.div(x).abs().powf(n / 2.0), &chart, BOUND_REL_TOL, QuadMode::Product, 0)?;
        (an.value.powf(1.0 / n), dn.value.powf(2.0 / n))
    };
    let lz_norm = m.hessian.inverse_norm(None);
    Ok(CorrectionBound {
        constant: lz_norm / sobolev.sqrt() * (2.0 * a_norm * z_e + div_norm * z_crit),
        lz_norm,
        sobolev,
        a_norm,
        div_norm,
    })
}

const BOUND_REL_TOL: f64 = 1e-3;

/// Where ||phi||_E and ||phi*||_E are probed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionOptions {
    pub xi_ref: Vec<f64>,
    pub direction: Vec<f64>,
    pub grid_mu: Vec<f64>,
    pub grid_s: Vec<f64>,
    pub rescaled_mu: Vec<f64>,
    pub rescaled_s: f64,
}

impl CorrectionOptions {
    pub fn defaults(dim: Dimension) -> Self {
        let n = dim.n();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        Self {
            xi_ref: vec![0.0; n],
            direction: e1,
            grid_mu: vec![0.1, 0.3, 1.0, 3.0, 10.0],
            grid_s: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            rescaled_mu: vec![1.0, 0.3, 0.1, 0.03],
            rescaled_s: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionReport {
    pub points: Vec<(f64, Vec<f64>)>,
    pub norms: Vec<f64>,
    pub max_norm: f64,
    pub bound: CorrectionBound,
    pub bounded: bool,
    pub rescaled_mu: Vec<f64>,
    /// ||phi*||_E with phi*(y) = mu^{N/2-1} phi(mu y + xi).
    pub rescaled_norms: Vec<f64>,
    pub decreasing: bool,
    pub pass: bool,
}

/// ||phi||_E over a grid against the uniform bound, and ||phi*||_E as mu -> 0.
pub fn correction_check(m: &Melnikov, opts: &CorrectionOptions) -> Result<CorrectionReport, MelnikovError> {
    let bound = correction_bound(m)?;
    let points: Vec<(f64, Vec<f64>)> = opts
        .grid_mu
        .iter()
        .flat_map(|&mu| opts.grid_s.iter().map(move |&s| (mu, s)))
        .map(|(mu, s)| (mu, along(&opts.xi_ref, &opts.direction, s)))
        .collect();
    let norms: Vec<f64> = points
        .par_iter()
        .map(|(mu, xi)| m.gamma(*mu, xi).map(|g| g.correction_norm))
        .collect::<Result<_, _>>()?;
    let max_norm = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let xi = along(&opts.xi_ref, &opts.direction, opts.rescaled_s);
    let n = m.dim().n();
    let rescaled_norms: Vec<f64> = opts
        .rescaled_mu
        .par_iter()
        .map(|&mu| -> Result<f64, MelnikovError> {
            let phi = m.correction_field(&Bubble::new(0.0, mu, xi.clone())?)?;
            let star = ComplexField::from_data(&m.basis, Frame::unit(n), phi.kind(), phi.data().to_vec())?;
            Ok(star.e_norm()?)
        })
        .collect::<Result<_, _>>()?;
    let bounded = max_norm <= bound.constant;
    let decreasing = rescaled_norms.windows(2).all(|w| w[1] < w[0]);
    Ok(CorrectionReport {
        points,
        norms,
        max_norm,
        bounded,
        bound,
        rescaled_mu: opts.rescaled_mu.clone(),
        rescaled_norms,
        decreasing,
        pass: bounded && decreasing,
    })
}

/// |Gamma| along one ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRay {
    pub name: String,
    pub parameter: Vec<f64>,
    pub values: Vec<f64>,
    pub monotone: bool,
    /// Last |Gamma| over the interior maximum.
    pub final_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub interior_max: f64,
    pub interior_argmax: (f64, Vec<f64>),
    pub rays: Vec<DecayRay>,
    pub corner: (f64, Vec<f64>),
    pub corner_value: f64,
    pub corner_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Where the decay of Gamma is probed.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayOptions {
    pub xi_ref: Vec<f64>,
    pub direction: Vec<f64>,
    pub interior_mu: Vec<f64>,
    pub interior_s: Vec<f64>,
    pub small_mu: Vec<f64>,
    pub far_xi: Vec<f64>,
    pub large_mu: Vec<f64>,
    pub corner_mu: f64,
    pub corner_xi: f64,
    pub tolerance: f64,
}

impl DecayOptions {
    pub fn defaults(dim: Dimension) -> Self {
        let n = dim.n();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        Self {
            xi_ref: vec![0.0; n],
            direction: e1,
            interior_mu: vec![0.3, 0.6, 1.0, 2.0],
            interior_s: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            small_mu: vec![1e-1, 1e-2, 1e-3],
            far_xi: vec![5.0, 10.0, 20.0],
            large_mu: vec![10.0, 20.0, 40.0],
            corner_mu: 10.0,
            corner_xi: 20.0,
            tolerance: 1e-3,
        }
    }
}

fn along(origin: &[f64], dir: &[f64], s: f64) -> Vec<f64> {
    origin.iter().zip(dir).map(|(o, d)| o + s * d).collect()
}

/// Probes |Gamma| as mu -> 0, |xi| -> infinity and mu -> infinity.
pub fn boundary_decay_check(m: &Melnikov, opts: &DecayOptions) -> Result<DecayReport, MelnikovError> {
    let interior: Vec<(f64, Vec<f64>)> = opts
        .interior_mu
        .iter()
        .flat_map(|&mu| opts.interior_s.iter().map(move |&s| (mu, s)))
        .map(|(mu, s)| (mu, along(&opts.xi_ref, &opts.direction, s)))
        .collect();
    let vals: Vec<f64> = interior
        .par_iter()
        .map(|(mu, xi)| m.gamma(*mu, xi).map(|g| g.gamma.abs()))
        .collect::<Result<_, _>>()?;
    let (imax, interior_max) = vals
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let ray = |name: &str, points: Vec<(f64, Vec<f64>)>, param: Vec<f64>| -> Result<DecayRay, MelnikovError> {
        let values: Vec<f64> = points
            .par_iter()
            .map(|(mu, xi)| m.gamma(*mu, xi).map(|g| g.gamma.abs()))
            .collect::<Result<_, _>>()?;
        let monotone = values.windows(2).all(|w| w[1] < w[0]);
        let final_ratio = values.last().copied().unwrap_or(0.0) / interior_max;
        Ok(DecayRay {
            name: name.to_string(),
            parameter: param,
            monotone,
            pass: monotone && final_ratio < opts.tolerance,
            final_ratio,
            values,
        })
    };
    let rays = vec![
        ray(
            "mu_to_zero",
            opts.small_mu.iter().map(|&mu| (mu, opts.xi_ref.clone())).collect(),
            opts.small_mu.clone(),
        )?,
        ray(
            "xi_to_infinity",
            opts.far_xi
                .iter()
                .map(|&s| (1.0, along(&opts.xi_ref, &opts.direction, s)))
                .collect(),
            opts.far_xi.clone(),
        )?,
        ray(
            "mu_to_infinity",
            opts.large_mu.iter().map(|&mu| (mu, opts.xi_ref.clone())).collect(),
            opts.large_mu.clone(),
        )?,
    ];
    let corner_xi = along(&opts.xi_ref, &opts.direction, opts.corner_xi);
    let corner_value = m.gamma(opts.corner_mu, &corner_xi)?.gamma.abs();
    let corner_ratio = corner_value / interior_max;
    let pass = corner_ratio < opts.tolerance && rays.iter().all(|r| r.pass);
    Ok(DecayReport {
        interior_max,
        interior_argmax: interior[imax].clone(),
        rays,
        corner: (opts.corner_mu, corner_xi),
        corner_value,
        corner_ratio,
        tolerance: opts.tolerance,
        pass,
    })
}

/// A (log mu, s) grid on the slice xi = origin + s * direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceGrid {
    pub mus: Vec<f64>,
    pub ss: Vec<f64>,
    pub origin: Vec<f64>,
    pub direction: Vec<f64>,
}

impl SliceGrid {
    pub fn new(
        mu_range: (f64, f64),
        n_mu: usize,
        s_range: (f64, f64),
        n_s: usize,
        origin: Vec<f64>,
        direction: Vec<f64>,
    ) -> Result<Self, MelnikovError> {
        let (lo, hi) = mu_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(MelnikovError::Slice(format!("mu range [{lo}, {hi}]")));
        }
        if !(s_range.1 > s_range.0) {
            return Err(MelnikovError::Slice(format!("s range [{}, {}]", s_range.0, s_range.1)));
        }
        if n_mu < 2 || n_s < 2 {
            return Err(MelnikovError::Slice(format!("grid {n_mu} x {n_s} needs at least 2 x 2 points")));
        }
        if origin.len() != direction.len() {
            return Err(MelnikovError::Slice("origin and direction lengths differ".into()));
        }
        let norm = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(MelnikovError::Slice("direction must be a nonzero vector".into()));
        }
        let direction = direction.iter().map(|d| d / norm).collect();
        let mus = (0..n_mu)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n_mu - 1) as f64).exp())
            .collect();
        let ss = (0..n_s)
            .map(|j| s_range.0 + (s_range.1 - s_range.0) * j as f64 / (n_s - 1) as f64)
            .collect();
        Ok(Self {
            mus,
            ss,
            origin,
            direction,
        })
    }

    pub fn xi(&self, s: f64) -> Vec<f64> {
        along(&self.origin, &self.direction, s)
    }

    pub fn len(&self) -> usize {
        self.mus.len() * self.ss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Extent in (log mu, s).
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.mus[0].ln(), self.mus[self.mus.len() - 1].ln()),
            (self.ss[0], self.ss[self.ss.len() - 1]),
        )
    }

    pub fn diagonal(&self) -> f64 {
        let ((a, b), (c, d)) = self.bounds();
        ((b - a).powi(2) + (d - c).powi(2)).sqrt()
    }
}

/// Gamma sampled on a slice grid, row-major in mu.
#[derive(Debug, Clone, Serialize)]
pub struct GammaLandscape {
    pub grid: SliceGrid,
    pub samples: Vec<GammaSample>,
    pub critical_points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

impl GammaLandscape {
    pub fn sample(&self, i_mu: usize, i_s: usize) -> &GammaSample {
        &self.samples[i_mu * self.grid.ss.len() + i_s]
    }

    /// Largest |Gamma| over successful samples.
    pub fn max_abs(&self) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.is_ok())
            .fold(0.0f64, |m, s| m.max(s.gamma.abs()))
    }
}

/// Evaluates Gamma over the grid; failures are recorded per sample.
pub fn scan(m: &Melnikov, grid: &SliceGrid) -> GammaLandscape {
    let points: Vec<(f64, Vec<f64>)> = grid
        .mus
        .iter()
        .flat_map(|&mu| grid.ss.iter().map(move |&s| (mu, s)))
        .map(|(mu, s)| (mu, grid.xi(s)))
        .collect();
    let samples: Vec<GammaSample> = points
        .par_iter()
        .map(|(mu, xi)| match m.gamma(*mu, xi) {
            Ok(s) => s,
            Err(e) => GammaSample::failed(*mu, xi.clone(), e.to_string()),
        })
        .collect();
    let failed = samples.iter().filter(|s| !s.is_ok()).count();
    let mut warnings = Vec::new();
    if failed > 0 {
        warnings.push(format!("{failed} of {} samples failed", samples.len()));
    }
    GammaLandscape {
        grid: grid.clone(),
        samples,
        critical_points: Vec::new(),
        warnings,
    }
}
