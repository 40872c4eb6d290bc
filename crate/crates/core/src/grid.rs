//! Momentum grids and their dual position grids.
//!
//! Axis values are `p_k = (k - N/2)·Δp` with `Δp = 2 p_max / N` and
//! `x_j = (j - N/2)·Δx` with `Δx = π / p_max`, so `Δp·Δx = 2π/N` and the
//! centered discrete Fourier transform is unitary between the two.
//! Multi-dimensional arrays are row-major with axis 0 slowest.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub p_max: f64,
    pub mass: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            dim: 3,
            n: 64,
            p_max: 8.0,
            mass: 1.0,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<MomentumGrid>> {
        MomentumGrid::new(*self).map(Arc::new)
    }
}

#[derive(Debug)]
pub struct MomentumGrid {
    spec: GridSpec,
    axis: Vec<f64>,
    energy: Vec<f64>,
}

pub fn energy(p: &[f64], mass: f64) -> f64 {
    (p.iter().map(|c| c * c).sum::<f64>() + mass * mass).sqrt()
}

impl MomentumGrid {
    pub fn new(spec: GridSpec) -> Result<MomentumGrid> {
        if !(1..=3).contains(&spec.dim) {
            return Err(Error::InvalidGrid(format!("dim {} not in 1..=3", spec.dim)));
        }
        if spec.n < 4 || !spec.n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {} must be a power of two ≥ 4",
                spec.n
            )));
        }
        if !(spec.p_max > 0.0 && spec.p_max.is_finite()) {
            return Err(Error::InvalidGrid("p_max must be positive".into()));
        }
        if !(spec.mass > 0.0 && spec.mass.is_finite()) {
            return Err(Error::InvalidGrid("mass must be positive".into()));
        }
        let dp = 2.0 * spec.p_max / spec.n as f64;
        let axis: Vec<f64> = (0..spec.n)
            .map(|k| (k as f64 - (spec.n / 2) as f64) * dp)
            .collect();
        let total = spec.n.pow(spec.dim as u32);
        let mut grid = MomentumGrid {
            spec,
            axis,
            energy: Vec::with_capacity(total),
        };
        grid.energy = (0..total)
            .map(|i| energy(&grid.momentum(i)[..spec.dim], spec.mass))
            .collect();
        Ok(grid)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn mass(&self) -> f64 {
        self.spec.mass
    }

    pub fn p_max(&self) -> f64 {
        self.spec.p_max
    }

    pub fn len(&self) -> usize {
        self.energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energy.is_empty()
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.spec.p_max / self.spec.n as f64
    }

    /// `Δp^d`, the momentum cell volume.
    pub fn cell(&self) -> f64 {
        self.dp().powi(self.spec.dim as i32)
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn energies(&self) -> &[f64] {
        &self.energy
    }

    pub fn multi_index(&self, mut i: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.spec.dim).rev() {
            idx[a] = i % self.spec.n;
            i /= self.spec.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        (0..self.spec.dim).fold(0, |acc, a| acc * self.spec.n + idx[a])
    }

    /// Spatial momentum of flat point `i`; unused components are zero.
    pub fn momentum(&self, i: usize) -> Vec3 {
        let idx = self.multi_index(i);
        let mut p = [0.0; 3];
        for a in 0..self.spec.dim {
            p[a] = self.axis[idx[a]];
        }
        p
    }

    /// True when flat point `i` lies on the outermost layer of the grid.
    pub fn on_boundary(&self, i: usize) -> bool {
        let idx = self.multi_index(i);
        (0..self.spec.dim).any(|a| idx[a] == 0 || idx[a] == self.spec.n - 1)
    }

    pub fn same_as(&self, other: &MomentumGrid) -> bool {
        self.spec == other.spec
    }

    pub fn position(&self) -> PositionGrid {
        PositionGrid {
            dim: self.spec.dim,
            n: self.spec.n,
            dx: std::f64::consts::PI / self.spec.p_max,
        }
    }

    /// Aliasing guard: `p_max ≥ 6·(m + scale)`. Returns a warning message
    /// when violated.
    pub fn aliasing_warning(&self, momentum_scale: f64) -> Option<String> {
        let need = 6.0 * (self.spec.mass + momentum_scale);
        (self.spec.p_max < need).then(|| {
            format!(
                "p_max = {} below the aliasing guideline {need} for mass {} and momentum scale {momentum_scale}",
                self.spec.p_max, self.spec.mass
            )
        })
    }
}

/// The position grid dual to a momentum grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionGrid {
    pub dim: usize,
    pub n: usize,
    pub dx: f64,
}

impl PositionGrid {
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cell(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.dx
    }

    pub fn box_length(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn multi_index(&self, mut i: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dim).rev() {
            idx[a] = i % self.n;
            i /= self.n;
        }
        idx
    }

    pub fn point(&self, i: usize) -> Vec3 {
        let idx = self.multi_index(i);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coordinate(idx[a]);
        }
        x
    }

    pub fn on_boundary(&self, i: usize) -> bool {
        let idx = self.multi_index(i);
        (0..self.dim).any(|a| idx[a] == 0 || idx[a] == self.n - 1)
    }

    /// Whether every index of point `i` is even: the sub-lattice used for
    /// the coarse (2Δx) half of refinement estimates.
    pub fn on_coarse_lattice(&self, i: usize) -> bool {
        let idx = self.multi_index(i);
        (0..self.dim).all(|a| idx[a] % 2 == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&[0.0, 0.0, 0.0], 1.0), 1.0);
        assert!((energy(&[3.0, 0.0, 0.0], 1.0) - 10f64.sqrt()).abs() < 1e-15);
        assert!((energy(&[0.0, 4.0, 3.0], 0.5) - 25.25f64.sqrt()).abs() < 1e-15);
        assert!((energy(&[0.0, 4.0, 3.0], 0.5) - 5.02494).abs() < 1e-5);
    }

    #[test]
    fn grid_geometry() {
        let g = MomentumGrid::new(GridSpec {
            dim: 2,
            n: 8,
            p_max: 4.0,
            mass: 1.0,
        })
        .unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.dp(), 1.0);
        assert_eq!(g.axis()[4], 0.0);
        let i = g.flat_index([5, 2, 0]);
        assert_eq!(g.multi_index(i), [5, 2, 0]);
        assert_eq!(g.momentum(i), [1.0, -2.0, 0.0]);
        let x = g.position();
        assert!((g.dp() * x.dx - 2.0 * std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert!(g.aliasing_warning(0.0).is_some());
        let wide = MomentumGrid::new(GridSpec {
            p_max: 12.0,
            ..*g.spec()
        })
        .unwrap();
        assert!(wide.aliasing_warning(0.5).is_none());
        assert!(g.aliasing_warning(1.0).is_some());
    }

    #[test]
    fn rejects_bad_specs() {
        let base = GridSpec::default();
        assert!(MomentumGrid::new(GridSpec { n: 48, ..base }).is_err());
        assert!(MomentumGrid::new(GridSpec { dim: 4, ..base }).is_err());
        assert!(MomentumGrid::new(GridSpec { mass: 0.0, ..base }).is_err());
    }
}
