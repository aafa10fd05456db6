//! Voltage mesh and gridded density profiles.

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Uniform voltage mesh on `[v_min, V_F]` with `V_F` as the last node and
/// `V_R` exactly on node `i_vr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub v_min: f64,
    pub dv: f64,
    pub n_v: usize,
    pub i_vr: usize,
    pub v_reset: f64,
    pub v_thresh: f64,
}

impl Grid {
    /// Node coordinate. `V_R` and `V_F` are returned exactly.
    #[inline]
    pub fn v(&self, i: usize) -> f64 {
        if i == self.i_vr {
            self.v_reset
        } else if i == self.n_v {
            self.v_thresh
        } else {
            self.v_min + i as f64 * self.dv
        }
    }

    /// Number of nodes (n_v + 1).
    #[inline]
    pub fn len(&self) -> usize {
        self.n_v + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.v(i))
    }
}

/// Builds the mesh for the given parameters, snapping `dv` minimally so that
/// both `V_R` and `V_F` land on nodes. `v_min` may move down by less than one
/// cell for the same reason.
pub fn make_grid(params: &ModelParams, v_min: f64, dv: f64) -> Result<Grid> {
    params.validate()?;
    if v_min >= params.v_reset {
        return Err(Error::Grid(format!(
            "v_min = {} must lie below V_R = {}",
            v_min, params.v_reset
        )));
    }
    if !(dv > 0.0) {
        return Err(Error::Grid(format!("dv = {} must be positive", dv)));
    }
    let span_rf = params.v_thresh - params.v_reset;
    let n_rf = (span_rf / dv).round().max(1.0) as usize;
    let dv = span_rf / n_rf as f64;
    let n_lo = ((params.v_reset - v_min) / dv - 1e-9).ceil().max(1.0) as usize;
    let v_min = params.v_reset - n_lo as f64 * dv;
    Ok(Grid {
        v_min,
        dv,
        n_v: n_lo + n_rf,
        i_vr: n_lo,
        v_reset: params.v_reset,
        v_thresh: params.v_thresh,
    })
}

/// Default mesh: dv = 0.02, with v_min pushed further left for strongly
/// inhibitory drift.
pub fn default_grid(params: &ModelParams) -> Result<Grid> {
    let v_min = if params.b < -5.0 { -10.0 } else { -6.0 };
    make_grid(params, v_min, 0.02)
}

/// A nonnegative, unit-mass voltage density on the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl DensityProfile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len());
        DensityProfile { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        DensityProfile { grid, values: vec![0.0; n] }
    }

    /// Trapezoid mass on the mesh.
    pub fn mass(&self) -> f64 {
        trapezoid_mass(&self.values, self.grid.dv)
    }

    /// Scales the profile so the trapezoid mass is exactly 1.
    pub fn renormalize(&mut self) {
        let m = self.mass();
        if m > 0.0 {
            for p in &mut self.values {
                *p /= m;
            }
        }
    }

    pub fn sup_distance(&self, other: &DensityProfile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn trapezoid_mass(values: &[f64], dv: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        s += v;
    }
    s * dv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_dimensions() {
        let p = ModelParams::with_b(1.5);
        let g = make_grid(&p, -6.0, 0.02).unwrap();
        assert_eq!(g.n_v, 400);
        assert_eq!(g.i_vr, 350);
        assert_eq!(g.v(g.i_vr), 1.0);
        assert_eq!(g.v(g.n_v), 2.0);
        assert!((g.v_min - -6.0).abs() < 1e-12);
    }

    #[test]
    fn snapping_keeps_reset_on_node() {
        let p = ModelParams::with_b(0.0);
        let g = make_grid(&p, -6.0, 0.03).unwrap();
        // dv becomes a divisor of the total span with V_R on a node
        assert_eq!(g.v(g.i_vr), 1.0);
        assert_eq!(g.v(g.n_v), 2.0);
        let cells_per_unit = (1.0 / g.dv).round();
        assert!((g.dv * cells_per_unit - 1.0).abs() < 1e-12);
        assert!((g.dv - 0.03).abs() < 0.5 * 0.03);
    }

    #[test]
    fn rejects_v_min_above_reset() {
        let p = ModelParams::with_b(0.0);
        assert!(make_grid(&p, 1.5, 0.02).is_err());
    }

    #[test]
    fn trapezoid_of_constant() {
        let p = ModelParams::with_b(0.0);
        let g = make_grid(&p, -6.0, 0.02).unwrap();
        let prof = DensityProfile::new(g, vec![1.0; g.len()]);
        assert!((prof.mass() - 8.0).abs() < 1e-12);
    }
}
