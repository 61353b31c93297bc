//! Randomized quasi-Monte Carlo on R^N with scrambled Sobol replicas.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{Chart, Estimate, QuadratureError};
use crate::instanton::sphere_area;

pub const REPLICAS: usize = 8;
const START_LOG2: u32 = 10;
const MAX_LOG2: u32 = 18;

fn unit(index: u32, dim: u32, seed: u32) -> f64 {
    // keep strictly inside (0, 1)
    sobol_burley::sample(index, dim, seed) as f64 + 2f64.powi(-25)
}

fn replica<F>(f: &F, chart: &Chart, count: u32, seed: u32, normal: &Normal) -> Result<f64, QuadratureError>
where
    F: Fn(&[f64]) -> f64,
{
    let n = chart.center.len();
    let area = sphere_area(n - 1);
    let mut x = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut sum = 0.0;
    for i in 0..count {
        let t = unit(i, 0, seed).min(1.0 - 2f64.powi(-25));
        let r = chart.scale * t / (1.0 - t);
        let jac = chart.scale / ((1.0 - t) * (1.0 - t)) * r.powi(n as i32 - 1) * area;
        let mut nn = 0.0;
        for k in 0..n {
            dir[k] = normal.inverse_cdf(unit(i, k as u32 + 1, seed).min(1.0 - 2f64.powi(-25)));
            nn += dir[k] * dir[k];
        }
        let nn = nn.sqrt();
        for k in 0..n {
            x[k] = chart.center[k] + r * dir[k] / nn;
        }
        let v = f(&x);
        if !v.is_finite() {
            return Err(QuadratureError::IntegrandFailure(x));
        }
        sum += v * jac;
    }
    Ok(sum / count as f64)
}

/// Mean of scrambled replicas; error is three standard errors.
pub fn integrate_rn_qmc<F>(f: &F, chart: &Chart, rel_tol: f64, seed: u64) -> Result<Estimate, QuadratureError>
where
    F: Fn(&[f64]) -> f64,
{
    let normal = Normal::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u32> = (0..REPLICAS).map(|_| rng.next_u32()).collect();
    let mut evals = 0;
    let mut last = (0.0, f64::INFINITY);
    for lg in START_LOG2..=MAX_LOG2 {
        let count = 1u32 << lg;
        let mut vals = Vec::with_capacity(REPLICAS);
        for &s in &seeds {
            vals.push(replica(f, chart, count, s, &normal)?);
        }
        evals += count as usize * REPLICAS;
        let mean = vals.iter().sum::<f64>() / REPLICAS as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (REPLICAS - 1) as f64;
        let err = 3.0 * (var / REPLICAS as f64).sqrt();
        last = (mean, err);
        if err <= rel_tol * mean.abs().max(f64::MIN_POSITIVE) {
            return Ok(Estimate {
                value: mean,
                error: err,
                evaluations: evals,
            });
        }
    }
    Err(QuadratureError::ToleranceNotMet {
        achieved: last.1,
        estimate: last.0,
    })
}
