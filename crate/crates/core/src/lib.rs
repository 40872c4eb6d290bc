//! Localization observables for a free massive Klein-Gordon particle.
//!
//! States live on a momentum grid over the mass shell. From them the crate
//! builds position-space amplitudes and fields on spacelike slices, and
//! evaluates three localization observables on regions of those slices:
//! the Newton-Wigner projection-valued measure, the stress-energy based
//! POVM, and its two-frame variant. The probability current and its flux
//! through light-cone mantles are available for causality checks, and the
//! [`harness`] module runs seeded scenario suites over all of it.

// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::manual_is_multiple_of)]

pub mod error;
pub mod fft;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod harness;
pub mod mantle;
pub mod observables;
pub mod quadrature;
pub mod state;

pub use error::{Error, Result};
pub use geometry::{
    classify_causal, cone_expand, minkowski_dot, CausalClass, FourVector, Frame, Lorentz,
    PoincareTransform, Region, SliceRef, Vec3,
};
pub use grid::{GridSpec, MomentumGrid, PositionGrid};
pub use state::{inner_product, MassShellState, MultiplierKind, StateSpec};
