//! Centered, unitary discrete Fourier transforms between a momentum grid
//! and its dual position grid.
//!
//! Convention (one table, used everywhere):
//!
//! | direction          | kernel                    | prefactor per axis |
//! |--------------------|---------------------------|--------------------|
//! | momentum → position | `e^{+i p·x}`             | `Δp / √(2π)`       |
//! | position → momentum | `e^{-i p·x}`             | `Δx / √(2π)`       |
//!
//! Combined with `p·x = -E t + p⃗·x⃗` this reproduces the continuum
//! transforms on the grid. Because `Δp Δx = 2π/N` the pair is exactly
//! inverse and `Σ|Ψ|² Δx^d = Σ|f|² Δp^d`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::MomentumGrid;

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            FftPlanner::new().plan_fft(n, dir)
        })
        .clone()
}

/// Unnormalised DFT along one axis of a row-major cube of side `n`.
fn dft_axis(data: &mut [Complex64], dim: usize, n: usize, axis: usize, inverse: bool) {
    let fft = plan(n, inverse);
    let total = data.len();
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let stride = n.pow((dim - 1 - axis) as u32);
    if stride == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    // gather lines of this axis contiguously, transform, scatter back
    let mut line_buf = vec![Complex64::default(); total];
    let block = stride * n;
    let mut w = 0;
    for outer in (0..total).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for k in 0..n {
                line_buf[w + k] = data[base + k * stride];
            }
            w += n;
        }
    }
    fft.process_with_scratch(&mut line_buf, &mut scratch);
    let mut r = 0;
    for outer in (0..total).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for k in 0..n {
                data[base + k * stride] = line_buf[r + k];
            }
            r += n;
        }
    }
}

/// Unnormalised d-dimensional DFT over a row-major cube of side `n`.
fn dft_nd(data: &mut [Complex64], dim: usize, n: usize, inverse: bool) {
    for axis in 0..dim {
        dft_axis(data, dim, n, axis, inverse);
    }
}

/// `(-1)^{Σ idx}` for the flat index `i` of a cube of side `n`.
fn checker(mut i: usize, dim: usize, n: usize) -> f64 {
    let mut parity = 0;
    for _ in 0..dim {
        parity += i % n;
        i /= n;
    }
    if parity % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn centered(data: &mut [Complex64], dim: usize, n: usize, inverse: bool, scale: f64) {
    for (i, v) in data.iter_mut().enumerate() {
        *v *= checker(i, dim, n);
    }
    dft_nd(data, dim, n, inverse);
    // (-1)^{N/2} per axis from expanding (k - N/2)(j - N/2)
    let half_sign: f64 = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let global = scale * half_sign.powi(dim as i32);
    for (i, v) in data.iter_mut().enumerate() {
        *v *= checker(i, dim, n) * global;
    }
}

/// `Ψ(x_j) = (2π)^{-d/2} Σ_k f(p_k) e^{i p_k·x_j} Δp^d`.
pub fn to_position(grid: &MomentumGrid, f: &[Complex64]) -> Vec<Complex64> {
    let mut out = f.to_vec();
    to_position_in_place(grid, &mut out);
    out
}

pub fn to_position_in_place(grid: &MomentumGrid, data: &mut [Complex64]) {
    assert_eq!(data.len(), grid.len());
    let s = (grid.dp() / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.dim() as i32);
    centered(data, grid.dim(), grid.n(), true, s);
}

/// Centered momentum → position transform along `axis` only, with the
/// one-axis prefactor `Δp/√(2π)`.
pub fn to_position_axis(grid: &MomentumGrid, data: &mut [Complex64], axis: usize) {
    assert_eq!(data.len(), grid.len());
    let (dim, n) = (grid.dim(), grid.n());
    let stride = n.pow((dim - 1 - axis) as u32);
    let parity = |i: usize| if (i / stride) % n % 2 == 0 { 1.0 } else { -1.0 };
    for (i, v) in data.iter_mut().enumerate() {
        *v *= parity(i);
    }
    dft_axis(data, dim, n, axis, true);
    let half_sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let s = half_sign * grid.dp() / (2.0 * std::f64::consts::PI).sqrt();
    for (i, v) in data.iter_mut().enumerate() {
        *v *= parity(i) * s;
    }
}

/// `f(p_k) = (2π)^{-d/2} Σ_j Ψ(x_j) e^{-i p_k·x_j} Δx^d`.
pub fn to_momentum(grid: &MomentumGrid, psi: &[Complex64]) -> Vec<Complex64> {
    let mut out = psi.to_vec();
    to_momentum_in_place(grid, &mut out);
    out
}

pub fn to_momentum_in_place(grid: &MomentumGrid, data: &mut [Complex64]) {
    assert_eq!(data.len(), grid.len());
    let dx = grid.position().dx;
    let s = (dx / (2.0 * std::f64::consts::PI).sqrt()).powi(grid.dim() as i32);
    centered(data, grid.dim(), grid.n(), false, s);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(dim: usize, n: usize) -> MomentumGrid {
        MomentumGrid::new(GridSpec {
            dim,
            n,
            p_max: 4.0,
            mass: 1.0,
        })
        .unwrap()
    }

    /// Direct O(N²) evaluation of the centered sum.
    fn brute_to_position(g: &MomentumGrid, f: &[Complex64]) -> Vec<Complex64> {
        let x = g.position();
        let pref = (g.dp() / (2.0 * std::f64::consts::PI).sqrt()).powi(g.dim() as i32);
        (0..x.len())
            .map(|j| {
                let xj = x.point(j);
                (0..g.len())
                    .map(|k| {
                        let p = g.momentum(k);
                        let ph = p[0] * xj[0] + p[1] * xj[1] + p[2] * xj[2];
                        f[k] * Complex64::from_polar(1.0, ph)
                    })
                    .sum::<Complex64>()
                    * pref
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum() {
        for (dim, n) in [(1, 16), (2, 8), (3, 4)] {
            let g = grid(dim, n);
            let f: Vec<Complex64> = (0..g.len())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let fast = to_position(&g, &f);
            let slow = brute_to_position(&g, &f);
            let err = fast
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "dim {dim}: {err}");
        }
    }

    #[test]
    fn axis_transforms_compose_to_full() {
        let g = grid(3, 8);
        let f: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.21).cos(), (i as f64 * 0.7).sin()))
            .collect();
        let full = to_position(&g, &f);
        let mut part = f.clone();
        for axis in [2, 0, 1] {
            to_position_axis(&g, &mut part, axis);
        }
        let err = full
            .iter()
            .zip(&part)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn round_trip_and_plancherel() {
        let g = grid(3, 8);
        let f: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64).sqrt().sin(), (i as f64 * 0.3).cos()))
            .collect();
        let x = to_position(&g, &f);
        let back = to_momentum(&g, &x);
        let err = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
        let pn: f64 = f.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.cell();
        let xn: f64 = x.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.position().cell();
        assert!((pn - xn).abs() < 1e-12 * pn);
    }
}
