use super::gauss::legendre_unit;
use super::QuadratureError;

/// Mapped Gauss-Legendre rule on (0, inf) with r = L t / (1 - t).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    t: Vec<f64>,
    t_weights: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    map_scale: f64,
}

pub const MIN_RADIAL_NODES: usize = 16;

impl RadialGrid {
    pub fn new(count: usize, map_scale: f64) -> Result<Self, QuadratureError> {
        if count < MIN_RADIAL_NODES {
            return Err(QuadratureError::InvalidRule(format!(
                "radial grid needs at least {MIN_RADIAL_NODES} nodes, got {count}"
            )));
        }
        Self::build(count, map_scale)
    }

    pub(crate) fn build(count: usize, map_scale: f64) -> Result<Self, QuadratureError> {
        if !(map_scale > 0.0 && map_scale.is_finite()) {
            return Err(QuadratureError::InvalidRule(format!("map scale {map_scale}")));
        }
        let (t, t_weights) = legendre_unit(count)?;
        let nodes = t.iter().map(|t| map_scale * t / (1.0 - t)).collect();
        let weights = t
            .iter()
            .zip(&t_weights)
            .map(|(t, w)| w * map_scale / ((1.0 - t) * (1.0 - t)))
            .collect();
        Ok(Self {
            t,
            t_weights,
            nodes,
            weights,
            map_scale,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes of the underlying rule on (0, 1).
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn t_weights(&self) -> &[f64] {
        &self.t_weights
    }

    pub fn map_scale(&self) -> f64 {
        self.map_scale
    }

    pub fn t_of_r(&self, r: f64) -> f64 {
        r / (self.map_scale + r)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * f(*r)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_decaying_functions() {
        let g = RadialGrid::new(64, 1.0).unwrap();
        let v = g.integrate(|r| (-r).exp());
        assert_relative_eq!(v, 1.0, max_relative = 1e-10);
        let v = g.integrate(|r| 1.0 / (1.0 + r * r));
        assert_relative_eq!(v, std::f64::consts::FRAC_PI_2, max_relative = 1e-12);
        assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn too_few_nodes() {
        assert!(RadialGrid::new(8, 1.0).is_err());
    }
}
