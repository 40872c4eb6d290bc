//! Minkowski vector algebra, Poincaré transforms, rest slices and regions.
//!
//! Signature is (-,+,+,+), units with c = 1, and the origin event sits at
//! coordinate zero. Every frame `n` carries a canonical co-moving coordinate
//! system obtained from the *pure* boost that takes `(1,0,0,0)` to `n`; the
//! spatial coordinates of a rest slice `Σ_{n,t}` are the spatial coordinates
//! of that system.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative width of the null band used by [`classify_causal`].
pub const DEFAULT_CAUSAL_TOL: f64 = 1e-10;

const FRAME_TOL: f64 = 1e-12;
const LORENTZ_TOL: f64 = 1e-10;

pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    pub fn from_parts(t: f64, s: Vec3) -> Self {
        FourVector([t, s[0], s[1], s[2]])
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> Vec3 {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        minkowski_dot(self, other)
    }

    /// Largest absolute component; used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_diff(&self, other: &FourVector) -> f64 {
        (0..4).fold(0.0_f64, |m, i| m.max((self.0[i] - other.0[i]).abs()))
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, rhs: FourVector) -> FourVector {
        FourVector(rhs.0.map(|c| self * c))
    }
}

/// `-u⁰v⁰ + Σ uᵏvᵏ`.
pub fn minkowski_dot(u: &FourVector, v: &FourVector) -> f64 {
    -u.0[0] * v.0[0] + u.0[1] * v.0[1] + u.0[2] * v.0[2] + u.0[3] * v.0[3]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalClass {
    Zero,
    TimelikeFuture,
    TimelikePast,
    NullFuture,
    NullPast,
    Spacelike,
}

impl CausalClass {
    pub fn is_causal(self) -> bool {
        !matches!(self, CausalClass::Spacelike)
    }

    pub fn is_past_or_zero(self) -> bool {
        matches!(
            self,
            CausalClass::Zero | CausalClass::TimelikePast | CausalClass::NullPast
        )
    }
}

/// Classify `v` by the sign of `v·v` and of `v⁰`. The null band is
/// `|v·v| ≤ rel_tol · scale²` with `scale` the largest component.
pub fn classify_causal(v: &FourVector, rel_tol: f64) -> CausalClass {
    let scale = v.scale();
    if scale == 0.0 {
        return CausalClass::Zero;
    }
    let band = rel_tol * scale * scale;
    let s = v.dot(v);
    let future = v.0[0] > 0.0;
    if s < -band {
        if future {
            CausalClass::TimelikeFuture
        } else {
            CausalClass::TimelikePast
        }
    } else if s <= band {
        if future {
            CausalClass::NullFuture
        } else {
            CausalClass::NullPast
        }
    } else {
        CausalClass::Spacelike
    }
}

/// A 4×4 real matrix acting on contravariant components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lorentz(pub [[f64; 4]; 4]);

impl Lorentz {
    pub const IDENTITY: Lorentz = Lorentz([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    /// Passive boost into a frame moving with velocity `v`: the event
    /// `(1,0,0,0)` acquires spatial coordinates `-γv`.
    pub fn boost(v: Vec3) -> Result<Lorentz> {
        let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        if v2 >= 1.0 || !v2.is_finite() {
            return Err(Error::InvalidFrame(format!(
                "boost speed² {v2} must be < 1"
            )));
        }
        let gamma = 1.0 / (1.0 - v2).sqrt();
        let mut m = Lorentz::IDENTITY.0;
        m[0][0] = gamma;
        for i in 0..3 {
            m[0][i + 1] = -gamma * v[i];
            m[i + 1][0] = -gamma * v[i];
            for j in 0..3 {
                let k = if v2 > 0.0 {
                    (gamma - 1.0) * v[i] * v[j] / v2
                } else {
                    0.0
                };
                m[i + 1][j + 1] = if i == j { 1.0 + k } else { k };
            }
        }
        Ok(Lorentz(m))
    }

    /// Spatial rotation by the orthogonal 3×3 matrix `r`.
    pub fn rotation(r: [[f64; 3]; 3]) -> Lorentz {
        let mut m = Lorentz::IDENTITY.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i + 1][j + 1] = r[i][j];
            }
        }
        Lorentz(m)
    }

    /// Right-handed rotation by `angle` about coordinate axis `axis` (0=x).
    pub fn axis_rotation(axis: usize, angle: f64) -> Lorentz {
        let (s, c) = angle.sin_cos();
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (2, 0),
            _ => (0, 1),
        };
        let mut r = [[0.0; 3]; 3];
        r[axis][axis] = 1.0;
        r[a][a] = c;
        r[a][b] = -s;
        r[b][a] = s;
        r[b][b] = c;
        // exact zeros/ones for right angles keep permutations exact
        for row in r.iter_mut() {
            for x in row.iter_mut() {
                if x.abs() < 1e-15 {
                    *x = 0.0;
                }
                if (x.abs() - 1.0).abs() < 1e-15 {
                    *x = x.signum();
                }
            }
        }
        Lorentz::rotation(r)
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| {
            (0..4).map(|j| self.0[i][j] * v.0[j]).sum()
        }))
    }

    pub fn compose(&self, rhs: &Lorentz) -> Lorentz {
        Lorentz(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
        }))
    }

    /// `η Λᵀ η`, exact for Lorentz matrices.
    pub fn inverse(&self) -> Lorentz {
        let eta = [-1.0, 1.0, 1.0, 1.0];
        Lorentz(std::array::from_fn(|i| {
            std::array::from_fn(|j| eta[i] * self.0[j][i] * eta[j])
        }))
    }

    /// Max deviation of `ΛᵀηΛ` from `η`.
    pub fn metric_defect(&self) -> f64 {
        let eta = [-1.0, 1.0, 1.0, 1.0];
        let mut worst = 0.0_f64;
        for a in 0..4 {
            for b in 0..4 {
                let g: f64 = (0..4).map(|k| self.0[k][a] * eta[k] * self.0[k][b]).sum();
                let target = if a == b { eta[a] } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    pub fn is_orthochronous(&self) -> bool {
        self.0[0][0] > 0.0
    }

    pub fn max_abs_diff(&self, other: &Lorentz) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }

    /// True when the matrix is a spatial signed permutation (Λ⁰₀ = 1).
    pub fn is_signed_permutation(&self) -> bool {
        self.0.iter().all(|row| {
            let nonzero: Vec<f64> = row.iter().copied().filter(|x| *x != 0.0).collect();
            nonzero.len() == 1 && nonzero[0].abs() == 1.0
        }) && self.0[0][0] == 1.0
    }
}

/// A future-directed unit timelike vector, in native coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FourVector", into = "FourVector")]
pub struct Frame {
    n: FourVector,
}

impl TryFrom<FourVector> for Frame {
    type Error = Error;
    fn try_from(n: FourVector) -> Result<Frame> {
        Frame::new(n)
    }
}

impl From<Frame> for FourVector {
    fn from(f: Frame) -> FourVector {
        f.n
    }
}

impl Frame {
    pub fn new(n: FourVector) -> Result<Frame> {
        let norm = n.dot(&n);
        if (norm + 1.0).abs() > FRAME_TOL {
            return Err(Error::InvalidFrame(format!("n·n = {norm}, expected -1")));
        }
        if n.0[0] <= 0.0 {
            return Err(Error::InvalidFrame("n must be future-directed".into()));
        }
        Ok(Frame { n })
    }

    pub fn rest() -> Frame {
        Frame {
            n: FourVector::new(1.0, 0.0, 0.0, 0.0),
        }
    }

    /// Frame moving with velocity `v` relative to native coordinates.
    pub fn from_velocity(v: Vec3) -> Result<Frame> {
        let v2: f64 = v.iter().map(|c| c * c).sum();
        if v2 >= 1.0 {
            return Err(Error::InvalidFrame(format!("speed² {v2} must be < 1")));
        }
        let g = 1.0 / (1.0 - v2).sqrt();
        Ok(Frame {
            n: FourVector::new(g, g * v[0], g * v[1], g * v[2]),
        })
    }

    pub fn n(&self) -> FourVector {
        self.n
    }

    pub fn velocity(&self) -> Vec3 {
        let s = self.n.spatial();
        [s[0] / self.n.0[0], s[1] / self.n.0[0], s[2] / self.n.0[0]]
    }

    /// Active map from co-moving coordinates to native coordinates; takes
    /// `(1,0,0,0)` to `n`.
    pub fn comoving(&self) -> Lorentz {
        let v = self.velocity();
        Lorentz::boost([-v[0], -v[1], -v[2]]).expect("frame velocity is subluminal")
    }

    pub fn approx_eq(&self, other: &Frame, tol: f64) -> bool {
        self.n.max_abs_diff(&other.n) <= tol
    }

    /// `E_n(p) = -n·p`.
    pub fn energy_of(&self, p: &FourVector) -> f64 {
        -self.n.dot(p)
    }
}

/// The rest slice `Σ_{n,t} = { e : -e·n = t }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRef {
    pub frame: Frame,
    pub time: f64,
}

impl SliceRef {
    pub fn new(frame: Frame, time: f64) -> SliceRef {
        SliceRef { frame, time }
    }

    pub fn rest(time: f64) -> SliceRef {
        SliceRef::new(Frame::rest(), time)
    }

    /// Event with slice-spatial coordinates `y`.
    pub fn event(&self, y: Vec3) -> FourVector {
        self.frame
            .comoving()
            .apply(&FourVector::from_parts(self.time, y))
    }

    /// Co-moving coordinates (time, spatial) of a native event.
    pub fn coordinates_of(&self, e: &FourVector) -> (f64, Vec3) {
        let c = self.frame.comoving().inverse().apply(e);
        (c.time(), c.spatial())
    }

    pub fn contains_event(&self, e: &FourVector, tol: f64) -> bool {
        (-e.dot(&self.frame.n()) - self.time).abs() <= tol
    }

    pub fn approx_eq(&self, other: &SliceRef, tol: f64) -> bool {
        self.frame.approx_eq(&other.frame, tol) && (self.time - other.time).abs() <= tol
    }
}

/// An element `(Λ, a)` of the orthochronous Poincaré group acting as
/// `e ↦ a + Λe`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareTransform {
    pub lambda: Lorentz,
    pub a: FourVector,
}

impl PoincareTransform {
    pub fn new(lambda: Lorentz, a: FourVector) -> Result<Self> {
        let defect = lambda.metric_defect();
        if defect > LORENTZ_TOL {
            return Err(Error::InvalidTransform(format!(
                "ΛᵀηΛ deviates from η by {defect:e}"
            )));
        }
        if !lambda.is_orthochronous() {
            return Err(Error::InvalidTransform("Λ⁰₀ must be positive".into()));
        }
        Ok(PoincareTransform { lambda, a })
    }

    pub fn identity() -> Self {
        PoincareTransform {
            lambda: Lorentz::IDENTITY,
            a: FourVector::ZERO,
        }
    }

    pub fn translation(a: FourVector) -> Self {
        PoincareTransform {
            lambda: Lorentz::IDENTITY,
            a,
        }
    }

    /// Translation by `τ n`.
    pub fn time_translation(frame: &Frame, tau: f64) -> Self {
        PoincareTransform::translation(tau * frame.n())
    }

    pub fn lorentz(lambda: Lorentz) -> Result<Self> {
        PoincareTransform::new(lambda, FourVector::ZERO)
    }

    pub fn apply_event(&self, e: &FourVector) -> FourVector {
        self.a + self.lambda.apply(e)
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &PoincareTransform) -> PoincareTransform {
        PoincareTransform {
            lambda: self.lambda.compose(&rhs.lambda),
            a: self.a + self.lambda.apply(&rhs.a),
        }
    }

    pub fn inverse(&self) -> PoincareTransform {
        let li = self.lambda.inverse();
        PoincareTransform {
            lambda: li,
            a: -li.apply(&self.a),
        }
    }

    /// True for translations and spatial signed permutations, whose action
    /// on grid states involves no interpolation.
    pub fn is_grid_exact(&self) -> bool {
        self.lambda.is_signed_permutation()
    }
}

pub fn apply_poincare_event(h: &PoincareTransform, e: &FourVector) -> FourVector {
    h.apply_event(e)
}

/// Image of `s` under `h`: `(Λn, t - a·Λn)`.
pub fn transformed_slice(h: &PoincareTransform, s: &SliceRef) -> SliceRef {
    let n2 = h.lambda.apply(&s.frame.n());
    // renormalise away roundoff so the frame invariant holds to 1e-12
    let norm = (-n2.dot(&n2)).sqrt();
    let n2 = (1.0 / norm) * n2;
    let frame = Frame::new(n2).expect("orthochronous Λ maps frames to frames");
    let out = SliceRef::new(frame, s.time - h.a.dot(&n2));
    debug_assert!({
        let e1 = s.event([0.0; 3]);
        let e2 = s.event([0.7, -1.3, 0.4]);
        let tol = 1e-9 * (1.0 + s.time.abs() + h.a.scale());
        out.contains_event(&h.apply_event(&e1), tol) && out.contains_event(&h.apply_event(&e2), tol)
    });
    out
}

/// Affine isometry `y ↦ R y + s` between slice-spatial coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub rotation: [[f64; 3]; 3],
    pub shift: Vec3,
}

impl Isometry {
    pub fn apply(&self, y: Vec3) -> Vec3 {
        std::array::from_fn(|i| {
            (0..3).map(|j| self.rotation[i][j] * y[j]).sum::<f64>() + self.shift[i]
        })
    }

    pub fn apply_inverse(&self, y: Vec3) -> Vec3 {
        let d: Vec3 = std::array::from_fn(|i| y[i] - self.shift[i]);
        std::array::from_fn(|i| (0..3).map(|j| self.rotation[j][i] * d[j]).sum())
    }
}

/// The spatial isometry induced by `h` from `Σ_{n,t}` to its image slice.
pub fn slice_isometry(h: &PoincareTransform, s: &SliceRef) -> (Isometry, SliceRef) {
    let target = transformed_slice(h, s);
    let m = target
        .frame
        .comoving()
        .inverse()
        .compose(&h.lambda)
        .compose(&s.frame.comoving());
    let a_local = target.frame.comoving().inverse().apply(&h.a);
    let rotation = std::array::from_fn(|i| std::array::from_fn(|j| m.0[i + 1][j + 1]));
    (
        Isometry {
            rotation,
            shift: a_local.spatial(),
        },
        target,
    )
}

fn norm3(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Membership is causal: `y` on `target` belongs iff some point of `source`
/// on `source_slice` is causally related to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSection {
    pub source: Region,
    pub source_slice: SliceRef,
    pub target: SliceRef,
}

impl ConeSection {
    /// `dist(x, source) - |Δt|` in source co-moving coordinates; ≤ 0 iff
    /// the point is in the expansion. Exact when the source distance is.
    fn defect(&self, y: Vec3) -> f64 {
        let e = self.target.event(y);
        let (t, x) = self.source_slice.coordinates_of(&e);
        self.source.signed_distance(x) - (t - self.source_slice.time).abs()
    }

    fn lipschitz(&self) -> f64 {
        let m = self
            .source_slice
            .frame
            .comoving()
            .inverse()
            .compose(&self.target.frame.comoving());
        let mut spatial = 0.0;
        let mut temporal = 0.0;
        for j in 1..4 {
            temporal += m.0[0][j] * m.0[0][j];
            for i in 1..4 {
                spatial += m.0[i][j] * m.0[i][j];
            }
        }
        self.source.lipschitz() * spatial.sqrt() + temporal.sqrt()
    }
}

/// A measurable spatial set on a rest slice, given in that slice's
/// co-moving spatial coordinates. Unused trailing coordinates are zero in
/// reduced dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Whole,
    Ball {
        center: Vec3,
        radius: f64,
    },
    /// Half-open box `min ≤ y < max` so that adjacent boxes partition.
    Box {
        min: Vec3,
        max: Vec3,
    },
    /// `{ y : normal·y ≤ offset }` with `normal` normalised on use.
    HalfSpace {
        normal: Vec3,
        offset: f64,
    },
    Union {
        members: Vec<Region>,
    },
    Complement {
        inner: std::boxed::Box<Region>,
    },
    Mapped {
        inner: std::boxed::Box<Region>,
        map: Isometry,
    },
    /// `{ y : dist(y, inner) ≤ reach }`; the same-frame cone expansion.
    Neighborhood {
        inner: std::boxed::Box<Region>,
        reach: f64,
    },
    ConeSection(std::boxed::Box<ConeSection>),
}

impl Region {
    pub fn ball(center: Vec3, radius: f64) -> Region {
        Region::Ball { center, radius }
    }

    pub fn cuboid(min: Vec3, max: Vec3) -> Region {
        Region::Box { min, max }
    }

    pub fn union(members: Vec<Region>) -> Region {
        Region::Union { members }
    }

    pub fn complement(self) -> Region {
        Region::Complement {
            inner: std::boxed::Box::new(self),
        }
    }

    pub fn contains(&self, y: Vec3) -> bool {
        match self {
            Region::Whole => true,
            Region::Ball { center, radius } => {
                let d = [y[0] - center[0], y[1] - center[1], y[2] - center[2]];
                d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= radius * radius
            }
            Region::Box { min, max } => (0..3).all(|i| min[i] <= y[i] && y[i] < max[i]),
            Region::HalfSpace { normal, offset } => {
                let n = norm3(*normal);
                (normal[0] * y[0] + normal[1] * y[1] + normal[2] * y[2]) / n <= *offset
            }
            Region::Union { members } => members.iter().any(|r| r.contains(y)),
            Region::Complement { inner } => !inner.contains(y),
            Region::Mapped { inner, map } => inner.contains(map.apply_inverse(y)),
            Region::Neighborhood { inner, reach } => {
                inner.contains(y) || inner.signed_distance(y) <= *reach
            }
            Region::ConeSection(c) => c.defect(y) <= 0.0,
        }
    }

    /// A signed distance-like function: negative inside, positive outside,
    /// Lipschitz with constant [`Region::lipschitz`]. Exact Euclidean
    /// distance outside primitives and unions of primitives.
    pub fn signed_distance(&self, y: Vec3) -> f64 {
        match self {
            Region::Whole => f64::NEG_INFINITY,
            Region::Ball { center, radius } => {
                norm3([y[0] - center[0], y[1] - center[1], y[2] - center[2]]) - radius
            }
            Region::Box { min, max } => {
                let mut outside = [0.0; 3];
                let mut inside = f64::INFINITY;
                for i in 0..3 {
                    outside[i] = (min[i] - y[i]).max(y[i] - max[i]).max(0.0);
                    inside = inside.min((y[i] - min[i]).min(max[i] - y[i]));
                }
                let o = norm3(outside);
                if o > 0.0 {
                    o
                } else {
                    -inside
                }
            }
            Region::HalfSpace { normal, offset } => {
                let n = norm3(*normal);
                (normal[0] * y[0] + normal[1] * y[1] + normal[2] * y[2]) / n - offset
            }
            Region::Union { members } => members
                .iter()
                .map(|r| r.signed_distance(y))
                .fold(f64::INFINITY, f64::min),
            Region::Complement { inner } => -inner.signed_distance(y),
            Region::Mapped { inner, map } => inner.signed_distance(map.apply_inverse(y)),
            Region::Neighborhood { inner, reach } => inner.signed_distance(y) - reach,
            Region::ConeSection(c) => c.defect(y),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Region::Union { members } => members.iter().map(Region::lipschitz).fold(1.0, f64::max),
            Region::Complement { inner }
            | Region::Mapped { inner, .. }
            | Region::Neighborhood { inner, .. } => inner.lipschitz(),
            Region::ConeSection(c) => c.lipschitz(),
            _ => 1.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Ball { radius, .. } => !(*radius > 0.0),
            Region::Box { min, max } => (0..3).any(|i| !(min[i] < max[i])),
            Region::Union { members } => members.iter().all(Region::is_empty),
            Region::Complement { inner } => matches!(**inner, Region::Whole),
            Region::Mapped { inner, .. } => inner.is_empty(),
            Region::Neighborhood { inner, reach } => inner.is_empty() || *reach < 0.0,
            _ => false,
        }
    }

    /// Short human-readable descriptor for reports.
    pub fn describe(&self) -> String {
        match self {
            Region::Whole => "whole".into(),
            Region::Ball { center, radius } => format!(
                "ball(c=[{:.3},{:.3},{:.3}],r={:.3})",
                center[0], center[1], center[2], radius
            ),
            Region::Box { min, max } => format!("box({min:?},{max:?})"),
            Region::HalfSpace { normal, offset } => format!("half({normal:?},{offset})"),
            Region::Union { members } => format!(
                "union[{}]",
                members
                    .iter()
                    .map(Region::describe)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Region::Complement { inner } => format!("not({})", inner.describe()),
            Region::Mapped { inner, .. } => format!("mapped({})", inner.describe()),
            Region::Neighborhood { inner, reach } => {
                format!("nbhd({},{:.3})", inner.describe(), reach)
            }
            Region::ConeSection(c) => format!(
                "cone({} @t={:.3} -> t'={:.3})",
                c.source.describe(),
                c.source_slice.time,
                c.target.time
            ),
        }
    }

    /// Image under `h` of this region on slice `s`.
    pub fn transform(&self, h: &PoincareTransform, s: &SliceRef) -> (Region, SliceRef) {
        let (iso, target) = slice_isometry(h, s);
        let region = match self {
            Region::Whole => Region::Whole,
            Region::Ball { center, radius } => Region::Ball {
                center: iso.apply(*center),
                radius: *radius,
            },
            other => Region::Mapped {
                inner: std::boxed::Box::new(other.clone()),
                map: iso,
            },
        };
        (region, target)
    }
}

/// `(J⁺(Δ) ∪ J⁻(Δ)) ∩ dst` for `Δ = src` on `src_slice`.
pub fn cone_expand(src: &Region, src_slice: &SliceRef, dst: &SliceRef) -> Result<Region> {
    if src.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let same_frame = src_slice.frame.approx_eq(&dst.frame, 1e-14);
    let dt = (dst.time - src_slice.time).abs();
    if same_frame && dt == 0.0 {
        return Ok(src.clone());
    }
    if same_frame {
        return Ok(match src {
            Region::Whole => Region::Whole,
            Region::Ball { center, radius } => Region::Ball {
                center: *center,
                radius: radius + dt,
            },
            Region::Union { members } => Region::Union {
                members: members
                    .iter()
                    .map(|m| cone_expand(m, src_slice, dst))
                    .collect::<Result<Vec<_>>>()?,
            },
            Region::Neighborhood { inner, reach } => Region::Neighborhood {
                inner: inner.clone(),
                reach: reach + dt,
            },
            Region::ConeSection(_) => {
                return Err(Error::Unsupported(
                    "re-expanding a cone section taken across non-parallel slices".into(),
                ))
            }
            other => Region::Neighborhood {
                inner: std::boxed::Box::new(other.clone()),
                reach: dt,
            },
        });
    }
    if matches!(src, Region::ConeSection(_)) {
        return Err(Error::Unsupported(
            "nested cone expansion across non-parallel slices".into(),
        ));
    }
    Ok(Region::ConeSection(std::boxed::Box::new(ConeSection {
        source: src.clone(),
        source_slice: *src_slice,
        target: *dst,
    })))
}

/// Range of `n'`-times covered by `region` on `slice`, for balls and
/// unions of balls. Used to keep target slices clear of the source.
pub fn time_extent(region: &Region, slice: &SliceRef, target: &Frame) -> Option<(f64, f64)> {
    match region {
        Region::Ball { center, radius } => {
            let e = slice.event(*center);
            let tc = -target.n().dot(&e);
            // gradient of -n'·e(y) with respect to y
            let l = slice.frame.comoving();
            let g: Vec3 = std::array::from_fn(|j| {
                let col = FourVector(std::array::from_fn(|i| l.0[i][j + 1]));
                -target.n().dot(&col)
            });
            let w = radius * norm3(g);
            Some((tc - w, tc + w))
        }
        Region::Union { members } => members
            .iter()
            .try_fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| {
                time_extent(m, slice, target).map(|(a, b)| (lo.min(a), hi.max(b)))
            }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dot_products() {
        let e0 = FourVector::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(minkowski_dot(&e0, &e0), -1.0);
        let l = FourVector::new(1.0, 1.0, 0.0, 0.0);
        assert_eq!(minkowski_dot(&l, &l), 0.0);
        let x = FourVector::new(0.0, 1.0, 0.0, 0.0);
        let y = FourVector::new(0.0, 0.0, 1.0, 0.0);
        assert_eq!(minkowski_dot(&x, &y), 0.0);
    }

    #[test]
    fn causal_classes() {
        let tol = DEFAULT_CAUSAL_TOL;
        assert_eq!(
            classify_causal(&FourVector::new(2.0, 1.0, 0.0, 0.0), tol),
            CausalClass::TimelikeFuture
        );
        assert_eq!(
            classify_causal(&FourVector::new(-1.0, 1.0, 0.0, 0.0), tol),
            CausalClass::NullPast
        );
        assert_eq!(classify_causal(&FourVector::ZERO, tol), CausalClass::Zero);
        assert_eq!(
            classify_causal(&FourVector::new(0.5, 1.0, 0.0, 0.0), tol),
            CausalClass::Spacelike
        );
        assert_eq!(
            classify_causal(&FourVector::new(-3.0, 1.0, 1.0, 0.0), tol),
            CausalClass::TimelikePast
        );
    }

    #[test]
    fn boost_of_rest_event() {
        let b = Lorentz::boost([0.6, 0.0, 0.0]).unwrap();
        let h = PoincareTransform::lorentz(b).unwrap();
        let out = apply_poincare_event(&h, &FourVector::new(1.0, 0.0, 0.0, 0.0));
        assert!(out.max_abs_diff(&FourVector::new(1.25, -0.75, 0.0, 0.0)) < 1e-14);
    }

    #[test]
    fn identity_and_translation() {
        let e = FourVector::new(0.3, -1.0, 2.0, 0.5);
        assert_eq!(apply_poincare_event(&PoincareTransform::identity(), &e), e);
        let a = FourVector::new(1.0, 2.0, 3.0, 4.0);
        let h = PoincareTransform::translation(a);
        assert_eq!(apply_poincare_event(&h, &FourVector::ZERO), a);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Frame::new(FourVector::new(-1.0, 0.0, 0.0, 0.0)).is_err());
        assert!(Frame::new(FourVector::new(1.0, 0.1, 0.0, 0.0)).is_err());
        let mut m = Lorentz::IDENTITY;
        m.0[0][0] = -1.0;
        assert!(PoincareTransform::new(m, FourVector::ZERO).is_err());
        m.0[0][0] = 1.1;
        assert!(PoincareTransform::new(m, FourVector::ZERO).is_err());
    }

    #[test]
    fn slices_transform() {
        let s = SliceRef::new(Frame::from_velocity([0.2, -0.1, 0.3]).unwrap(), 0.7);
        let id = transformed_slice(&PoincareTransform::identity(), &s);
        assert!(id.approx_eq(&s, 1e-14));

        let tau = 1.3;
        let tt = transformed_slice(&PoincareTransform::time_translation(&s.frame, tau), &s);
        assert!(tt.frame.approx_eq(&s.frame, 1e-14));
        assert!(close(tt.time, s.time + tau, 1e-13));

        let rest = SliceRef::rest(0.4);
        let rot = PoincareTransform::lorentz(Lorentz::axis_rotation(2, 0.37)).unwrap();
        let r = transformed_slice(&rot, &rest);
        assert!(r.approx_eq(&rest, 1e-14));
    }

    #[test]
    fn comoving_map_sends_rest_to_frame() {
        let f = Frame::from_velocity([0.3, 0.4, -0.2]).unwrap();
        let n = f.comoving().apply(&FourVector::new(1.0, 0.0, 0.0, 0.0));
        assert!(n.max_abs_diff(&f.n()) < 1e-14);
        assert!(f.comoving().metric_defect() < 1e-14);
        let s = SliceRef::new(f, -0.8);
        let e = s.event([1.0, 2.0, -0.5]);
        assert!(s.contains_event(&e, 1e-12));
        let (t, y) = s.coordinates_of(&e);
        assert!(close(t, -0.8, 1e-12));
        assert!(close(y[1], 2.0, 1e-12));
    }

    #[test]
    fn ball_cone_expansion_same_frame() {
        let s0 = SliceRef::rest(0.0);
        let s2 = SliceRef::rest(2.0);
        let b = Region::ball([0.5, 0.0, 0.0], 1.0);
        assert_eq!(
            cone_expand(&b, &s0, &s2).unwrap(),
            Region::ball([0.5, 0.0, 0.0], 3.0)
        );
        assert_eq!(cone_expand(&b, &s0, &s0).unwrap(), b);
        assert!(matches!(
            cone_expand(&Region::ball([0.0; 3], 0.0), &s0, &s2),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn nested_same_frame_box_matches_direct() {
        let s0 = SliceRef::rest(0.0);
        let s1 = SliceRef::rest(0.5);
        let s2 = SliceRef::rest(1.5);
        let b = Region::cuboid([-1.0, -0.5, -0.2], [0.3, 0.5, 0.2]);
        let once = cone_expand(&b, &s0, &s1).unwrap();
        let twice = cone_expand(&once, &s1, &s2).unwrap();
        let direct = cone_expand(&b, &s0, &s2).unwrap();
        for i in 0..200 {
            let y = [
                -3.0 + 0.03 * i as f64,
                (i as f64 * 0.7).sin() * 2.0,
                (i as f64 * 1.3).cos() * 1.5,
            ];
            assert_eq!(twice.contains(y), direct.contains(y), "y={y:?}");
        }
    }

    #[test]
    fn half_open_boxes_partition() {
        let a = Region::cuboid([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = Region::cuboid([1.0, 0.0, 0.0], [2.0, 1.0, 1.0]);
        let y = [1.0, 0.5, 0.5];
        assert!(!a.contains(y) && b.contains(y));
    }

    #[test]
    fn region_transform_of_ball_is_ball() {
        let s = SliceRef::rest(0.0);
        let h = PoincareTransform::new(
            Lorentz::boost([0.3, 0.0, 0.1]).unwrap(),
            FourVector::new(0.2, 1.0, 0.0, 0.0),
        )
        .unwrap();
        let (r, s2) = Region::ball([0.5, 0.0, 0.0], 1.0).transform(&h, &s);
        let Region::Ball { center, radius } = r else {
            panic!()
        };
        assert_eq!(radius, 1.0);
        // the mapped center event is h(e_center)
        let e = h.apply_event(&s.event([0.5, 0.0, 0.0]));
        let (t, y) = s2.coordinates_of(&e);
        assert!(close(t, s2.time, 1e-12));
        assert!((0..3).all(|i| close(y[i], center[i], 1e-12)));
    }
}
