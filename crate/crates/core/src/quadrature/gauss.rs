//! One-dimensional Gauss rules used as building blocks.

use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};

use super::QuadratureError;

/// Gauss-Legendre nodes and weights on (0, 1), nodes ascending.
pub fn legendre_unit(n: usize) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
    let deg = NonZeroUsize::new(n).ok_or(QuadratureError::InvalidRule("zero nodes".into()))?;
    let rule = GaussLegendre::new(deg);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss nodes u in (-1, 1) for the weight (1 - u^2)^alpha, nodes ascending.
pub fn gegenbauer(n: usize, alpha: f64) -> Result<(Vec<f64>, Vec<f64>), QuadratureError> {
    let deg = NonZeroUsize::new(n).ok_or(QuadratureError::InvalidRule("zero nodes".into()))?;
    let a = FiniteAboveNegOneF64::new(alpha)
        .ok_or_else(|| QuadratureError::InvalidRule(format!("weight exponent {alpha}")))?;
    let rule = GaussJacobi::new(deg, a, a);
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Barycentric weights for polynomial interpolation through `nodes`.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= nodes[j] - nodes[k];
            }
        }
    }
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.iter().map(|v| v / scale).collect()
}

/// Lagrange differentiation matrix D with (Dp)(t_q) = p'(t_q).
pub fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> nalgebra::DMatrix<f64> {
    let n = nodes.len();
    let mut d = nalgebra::DMatrix::zeros(n, n);
    for q in 0..n {
        let mut diag = 0.0;
        for i in 0..n {
            if i != q {
                let v = bary[i] / bary[q] / (nodes[q] - nodes[i]);
                d[(q, i)] = v;
                diag -= v;
            }
        }
        d[(q, q)] = diag;
    }
    d
}

/// Barycentric interpolation of nodal values at `t`.
pub fn interpolate<T>(nodes: &[f64], bary: &[f64], values: &[T], t: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + std::ops::Div<f64, Output = T> + Default,
{
    let mut num = T::default();
    let mut den = 0.0;
    for i in 0..nodes.len() {
        let dt = t - nodes[i];
        if dt == 0.0 {
            return values[i];
        }
        let c = bary[i] / dt;
        num = num + values[i] * c;
        den += c;
    }
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = legendre_unit(8).unwrap();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(15)).sum();
        assert_relative_eq!(s, 1.0 / 16.0, max_relative = 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gegenbauer_weight_mass() {
        let (u, w) = gegenbauer(6, 1.5).unwrap();
        let s: f64 = w.iter().sum();
        // int_{-1}^{1} (1-u^2)^{3/2} du = 3 pi / 8
        assert_relative_eq!(s, 3.0 * std::f64::consts::PI / 8.0, max_relative = 1e-13);
        let m: f64 = u.iter().zip(&w).map(|(u, w)| w * u.powi(10)).sum();
        assert!(m > 0.0);
    }

    #[test]
    fn differentiation_exact_on_polynomials() {
        let (t, _) = legendre_unit(12).unwrap();
        let b = barycentric_weights(&t);
        let d = differentiation_matrix(&t, &b);
        let f: Vec<f64> = t.iter().map(|x| x.powi(7) - 2.0 * x).collect();
        for q in 0..t.len() {
            let s: f64 = (0..t.len()).map(|i| d[(q, i)] * f[i]).sum();
            assert_relative_eq!(s, 7.0 * t[q].powi(6) - 2.0, epsilon = 1e-10);
        }
        let v = interpolate(&t, &b, &f, 0.37);
        assert_relative_eq!(v, 0.37f64.powi(7) - 0.74, epsilon = 1e-13);
    }
}
