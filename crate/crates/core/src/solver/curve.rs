use std::f64::consts::PI;

use super::SolverError;

/// Subdomains thinner than this fraction of `L` count as collapsed.
pub const MAP_EPS_FRACTION: f64 = 1e-3;

/// Periodic height function `y = h(x)` sampled at `x_i = 2πi/N`, with `h'`
/// and `h''` from central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceCurve {
    heights: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
    length: f64,
}

impl InterfaceCurve {
    pub fn new(heights: Vec<f64>, length: f64) -> Result<Self, SolverError> {
        let n = heights.len();
        if n < 4 {
            return Err(SolverError::InvalidConfig(format!(
                "need at least 4 interface nodes, got {n}"
            )));
        }
        let eps = MAP_EPS_FRACTION * length;
        if let Some((index, &height)) = heights
            .iter()
            .enumerate()
            .find(|(_, &h)| !(h > eps && h < length - eps))
        {
            return Err(SolverError::MappingSingular { index, height });
        }
        let dx = 2.0 * PI / n as f64;
        let at = |i: isize| heights[i.rem_euclid(n as isize) as usize];
        let slopes = (0..n as isize)
            .map(|i| (at(i + 1) - at(i - 1)) / (2.0 * dx))
            .collect();
        let curvatures = (0..n as isize)
            .map(|i| (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (dx * dx))
            .collect();
        Ok(InterfaceCurve {
            heights,
            slopes,
            curvatures,
            length,
        })
    }

    pub fn flat(n: usize, height: f64, length: f64) -> Result<Self, SolverError> {
        Self::new(vec![height; n], length)
    }

    pub fn from_fn(n: usize, length: f64, h: impl Fn(f64) -> f64) -> Result<Self, SolverError> {
        Self::new((0..n).map(|i| h(node_x(n, i))).collect(), length)
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        node_x(self.len(), i)
    }

    /// `h ← h + Δt·R`: the residual is applied as a vertical velocity.
    pub fn evolve(&self, residual: &[f64], dt: f64) -> Result<Self, SolverError> {
        if residual.len() != self.len() {
            return Err(SolverError::InvalidConfig(format!(
                "residual has {} samples, curve has {}",
                residual.len(),
                self.len()
            )));
        }
        if residual.iter().any(|r| !r.is_finite()) {
            return Err(SolverError::NonFiniteResidual);
        }
        let heights = self
            .heights
            .iter()
            .zip(residual)
            .map(|(h, r)| h + dt * r)
            .collect();
        Self::new(heights, self.length)
    }
}

pub(crate) fn node_x(n: usize, i: usize) -> f64 {
    2.0 * PI * i as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_a_sine_bump() {
        let n = 64;
        let curve = InterfaceCurve::from_fn(n, 2.0, |x| 1.0 + 0.1 * x.sin()).unwrap();
        for i in 0..n {
            let x = curve.x(i);
            assert!((curve.slopes()[i] - 0.1 * x.cos()).abs() < 2e-4);
            assert!((curve.curvatures()[i] + 0.1 * x.sin()).abs() < 2e-4);
        }
    }

    #[test]
    fn zero_residual_leaves_curve_unchanged() {
        let curve = InterfaceCurve::from_fn(8, 2.0, |x| 1.0 + 0.2 * x.cos()).unwrap();
        assert_eq!(curve.evolve(&[0.0; 8], 0.3).unwrap(), curve);
    }

    #[test]
    fn constant_residual_shifts_uniformly() {
        let curve = InterfaceCurve::from_fn(8, 2.0, |x| 1.0 + 0.2 * x.cos()).unwrap();
        let moved = curve.evolve(&[0.5; 8], 0.2).unwrap();
        for (a, b) in moved.heights().iter().zip(curve.heights()) {
            assert!((a - b - 0.1).abs() < 1e-15);
        }
        for (a, b) in moved.slopes().iter().zip(curve.slopes()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn collapse_is_detected() {
        assert!(matches!(
            InterfaceCurve::flat(8, 2.0, 2.0),
            Err(SolverError::MappingSingular { index: 0, .. })
        ));
        assert!(InterfaceCurve::flat(8, 0.0005, 2.0).is_err());
        let curve = InterfaceCurve::flat(8, 1.0, 2.0).unwrap();
        let mut r = vec![0.0; 8];
        r[3] = 10.0;
        assert!(matches!(
            curve.evolve(&r, 0.1),
            Err(SolverError::MappingSingular { index: 3, .. })
        ));
        assert!(matches!(
            curve.evolve(&[f64::NAN; 8], 0.1),
            Err(SolverError::NonFiniteResidual)
        ));
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(matches!(
            InterfaceCurve::flat(3, 1.0, 2.0),
            Err(SolverError::InvalidConfig(_))
        ));
    }
}
