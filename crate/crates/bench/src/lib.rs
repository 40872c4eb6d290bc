//! Fixtures shared by the benchmarks in `benches/`.

use kgpovm_core::{Frame, GridSpec, MassShellState, StateSpec};

/// A unit-mass grid with `p_max = 8`.
pub fn grid(dim: usize, n: usize) -> GridSpec {
    GridSpec {
        dim,
        n,
        p_max: 8.0,
        mass: 1.0,
    }
}

/// An off-centre Gaussian at rest on `spec`.
pub fn gaussian(spec: GridSpec) -> MassShellState {
    let g = spec.build().expect("valid bench grid");
    StateSpec::Gaussian {
        center: [0.3, -0.2, 0.1],
        width: 0.8,
        position: [0.5, 0.0, -0.25],
    }
    .build(&g, Frame::rest())
    .expect("gaussian fits the bench grid")
}
