//! Region quadrature on the position grid.
//!
//! Each grid point carries the fraction of its cell that lies in the
//! region. Cells farther than half a diagonal from the boundary (measured
//! with the region's signed distance) get 0 or 1 directly; the rest are
//! subsampled. A coarse companion rule on the even sub-lattice with cells
//! of side `2Δx` gives the `h` versus `2h` refinement estimate.

use crate::geometry::Region;
use crate::grid::PositionGrid;

/// Subsamples per axis inside a boundary cell, by dimension.
pub const BOUNDARY_SUBSAMPLES: [usize; 3] = [256, 16, 4];

#[derive(Clone, Debug)]
pub struct RegionWeights {
    pos: PositionGrid,
    fine: Vec<f64>,
    /// Weights of the `2Δx` rule; zero off the even sub-lattice.
    coarse: Vec<f64>,
}

/// A weighted sum with its coarse companion and magnitude.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub coarse: f64,
    /// `Σ |w f| cell`, for the roundoff floor.
    pub abs_sum: f64,
    pub points: usize,
}

impl Integral {
    /// `|I_h - I_2h|` plus a floating-point floor.
    pub fn err_est(&self) -> f64 {
        (self.value - self.coarse).abs() + roundoff_floor(self.abs_sum, self.points)
    }
}

/// `64 ε log₂(N) Σ|terms|`: rounding in the transforms and the sum.
pub fn roundoff_floor(abs_sum: f64, points: usize) -> f64 {
    let lg = (points.max(2) as f64).log2();
    64.0 * f64::EPSILON * lg * abs_sum
}

fn cell_fraction(region: &Region, center: [f64; 3], h: f64, dim: usize) -> f64 {
    let sd = region.signed_distance(center);
    let reach = region.lipschitz() * 0.5 * h * (dim as f64).sqrt();
    if sd < -reach {
        return 1.0;
    }
    if sd > reach {
        return 0.0;
    }
    let k = BOUNDARY_SUBSAMPLES[dim - 1];
    let total = k.pow(dim as u32);
    let mut inside = 0usize;
    for s in 0..total {
        let mut y = center;
        let mut rest = s;
        for c in y.iter_mut().take(dim) {
            let o = rest % k;
            rest /= k;
            *c += ((o as f64 + 0.5) / k as f64 - 0.5) * h;
        }
        if region.contains(y) {
            inside += 1;
        }
    }
    inside as f64 / total as f64
}

impl RegionWeights {
    pub fn new(region: &Region, pos: PositionGrid) -> Self {
        let n = pos.len();
        let mut fine = vec![0.0; n];
        let mut coarse = vec![0.0; n];
        if matches!(region, Region::Whole) {
            fine.iter_mut().for_each(|w| *w = 1.0);
            for (j, w) in coarse.iter_mut().enumerate() {
                if pos.on_coarse_lattice(j) {
                    *w = 1.0;
                }
            }
            return RegionWeights { pos, fine, coarse };
        }
        for j in 0..n {
            let x = pos.point(j);
            fine[j] = cell_fraction(region, x, pos.dx, pos.dim);
            if pos.on_coarse_lattice(j) {
                coarse[j] = cell_fraction(region, x, 2.0 * pos.dx, pos.dim);
            }
        }
        RegionWeights { pos, fine, coarse }
    }

    pub fn position_grid(&self) -> &PositionGrid {
        &self.pos
    }

    pub fn fine(&self) -> &[f64] {
        &self.fine
    }

    /// Cells lying entirely inside the region.
    pub fn interior(&self) -> impl Iterator<Item = bool> + '_ {
        self.fine.iter().map(|w| *w == 1.0)
    }

    /// Cell volume covered, `Σ w Δx^d`.
    pub fn volume(&self) -> f64 {
        self.fine.iter().sum::<f64>() * self.pos.cell()
    }

    pub fn integrate(&self, density: &[f64]) -> Integral {
        assert_eq!(density.len(), self.fine.len());
        let cell = self.pos.cell();
        let mut value = 0.0;
        let mut coarse = 0.0;
        let mut abs_sum = 0.0;
        for ((f, w), wc) in density.iter().zip(&self.fine).zip(&self.coarse) {
            value += w * f;
            abs_sum += (w * f).abs();
            coarse += wc * f;
        }
        Integral {
            value: value * cell,
            coarse: coarse * cell * 2f64.powi(self.pos.dim as i32),
            abs_sum: abs_sum * cell,
            points: density.len(),
        }
    }

    /// `Σ w g(x) f(x) Δx^d` with the coarse companion.
    pub fn integrate_with(&self, density: &[f64], g: impl Fn([f64; 3]) -> f64) -> Integral {
        let weighted: Vec<f64> = density
            .iter()
            .enumerate()
            .map(|(j, f)| f * g(self.pos.point(j)))
            .collect();
        self.integrate(&weighted)
    }
}

/// Share of `Σ ρ` sitting on the outermost layer of the position box.
pub fn edge_mass(pos: &PositionGrid, density: &[f64]) -> f64 {
    let n = pos.n;
    density
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let idx = pos.multi_index(*j);
            (0..pos.dim).any(|a| idx[a] == 0 || idx[a] == n - 1)
        })
        .map(|(_, r)| r.abs())
        .sum::<f64>()
        * pos.cell()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(dim: usize, n: usize, dx: f64) -> PositionGrid {
        PositionGrid { dim, n, dx }
    }

    #[test]
    fn whole_and_volume() {
        let p = pos(2, 16, 0.5);
        let w = RegionWeights::new(&Region::Whole, p);
        assert_eq!(w.volume(), 64.0);
        let ones = vec![1.0; p.len()];
        let i = w.integrate(&ones);
        assert!((i.value - 64.0).abs() < 1e-12);
        assert!((i.coarse - 64.0).abs() < 1e-12);
    }

    #[test]
    fn ball_volume_converges() {
        let p = pos(3, 64, 0.125);
        let w = RegionWeights::new(&Region::ball([0.1, 0.0, -0.2], 1.5), p);
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 1.5f64.powi(3);
        let ones = vec![1.0; p.len()];
        let i = w.integrate(&ones);
        assert!((i.value - exact).abs() / exact < 2e-3, "{}", i.value);
        assert!((i.value - exact).abs() <= 3.0 * i.err_est());
    }

    #[test]
    fn box_aligned_with_cells_is_exact() {
        let p = pos(1, 32, 0.25);
        // cell faces sit at half-integer multiples of dx
        let r = Region::cuboid([-1.125, -1.0, -1.0], [0.875, 1.0, 1.0]);
        let w = RegionWeights::new(&r, p);
        assert!((w.volume() - 2.0).abs() < 1e-12);
        assert_eq!(w.interior().filter(|b| *b).count(), 8);
    }
}
