//! One-particle states `ψ(p)` sampled on the mass shell over a momentum
//! grid, with the invariant inner product `Σ ψ̄ φ Δ^d p / E`.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::fields;
use crate::geometry::{FourVector, Frame, Lorentz, PoincareTransform, Region, SliceRef, Vec3};
use crate::grid::{GridSpec, MomentumGrid};
use crate::quadrature::RegionWeights;

const EXACT_TOL: f64 = 1e-14;

/// Boundary-layer share of the norm above which a constructor refuses.
pub const SUPPORT_OVERFLOW: f64 = 1e-6;
/// Boundary amplitude relative to the peak above which a state is flagged.
pub const DECAY_WARN: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arg", rename_all = "kebab-case")]
pub enum MultiplierKind {
    Energy,
    InvEnergy,
    /// `p_k / E` for spatial axis `k` (0-based).
    MomOverEnergy(usize),
    MassOverEnergy,
    /// `e^{iτE}`, the translation by `τ n`.
    EvolvePhase(f64),
    /// `e^{-ip·a}`.
    TranslatePhase(FourVector),
    SqrtEnergy,
    InvSqrtEnergy,
}

impl MultiplierKind {
    pub fn value(&self, p: Vec3, e: f64, mass: f64) -> Complex64 {
        match *self {
            MultiplierKind::Energy => e.into(),
            MultiplierKind::InvEnergy => (1.0 / e).into(),
            MultiplierKind::MomOverEnergy(k) => (p[k] / e).into(),
            MultiplierKind::MassOverEnergy => (mass / e).into(),
            MultiplierKind::EvolvePhase(tau) => Complex64::from_polar(1.0, tau * e),
            MultiplierKind::TranslatePhase(a) => {
                let pa = -e * a.0[0] + p[0] * a.0[1] + p[1] * a.0[2] + p[2] * a.0[3];
                Complex64::from_polar(1.0, -pa)
            }
            MultiplierKind::SqrtEnergy => e.sqrt().into(),
            MultiplierKind::InvSqrtEnergy => (1.0 / e.sqrt()).into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MassShellState {
    grid: Arc<MomentumGrid>,
    amps: Vec<Complex64>,
    frame: Frame,
    /// Accumulated resampling error estimate, in state norm.
    interp_err: f64,
}

impl MassShellState {
    pub fn new(grid: Arc<MomentumGrid>, amps: Vec<Complex64>, frame: Frame) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for a grid of {} points",
                amps.len(),
                grid.len()
            )));
        }
        Ok(MassShellState {
            grid,
            amps,
            frame,
            interp_err: 0.0,
        })
    }

    pub fn zeros(grid: Arc<MomentumGrid>, frame: Frame) -> Self {
        let n = grid.len();
        MassShellState {
            grid,
            amps: vec![Complex64::default(); n],
            frame,
            interp_err: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn interp_err(&self) -> f64 {
        self.interp_err
    }

    pub fn norm_sqr(&self) -> f64 {
        let e = self.grid.energies();
        self.amps
            .iter()
            .zip(e)
            .map(|(a, e)| a.norm_sqr() / e)
            .sum::<f64>()
            * self.grid.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.amps.iter_mut().for_each(|a| *a *= c);
        out
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidParameter(
                "cannot normalise the zero state".into(),
            ));
        }
        Ok(self.scaled((1.0 / n).into()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.amps.iter_mut().zip(&other.amps) {
            *a += b;
        }
        out.interp_err += other.interp_err;
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) || !self.frame.approx_eq(&other.frame, 1e-14) {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Largest boundary amplitude relative to the peak.
    pub fn boundary_decay(&self) -> f64 {
        let peak = self.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = (0..self.grid.len())
            .filter(|&i| self.grid.on_boundary(i))
            .map(|i| self.amps[i].norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    /// Share of `‖ψ‖²` carried by the outermost grid layer.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let e = self.grid.energies();
        let edge: f64 = (0..self.grid.len())
            .filter(|&i| self.grid.on_boundary(i))
            .map(|i| self.amps[i].norm_sqr() / e[i])
            .sum::<f64>()
            * self.grid.cell();
        edge / total
    }

    /// Pointwise multiplication by `w(p⃗, E)`.
    pub fn apply_weights(&self, w: impl Fn(Vec3, f64) -> Complex64) -> Self {
        let g = &self.grid;
        let e = g.energies();
        let mut out = self.clone();
        for (i, a) in out.amps.iter_mut().enumerate() {
            *a *= w(g.momentum(i), e[i]);
        }
        out
    }

    pub fn apply_multiplier(&self, kind: MultiplierKind) -> Self {
        let m = self.grid.mass();
        self.apply_weights(|p, e| kind.value(p, e, m))
    }

    /// A Poincaré transform expressed in this state's co-moving coordinates.
    fn local_transform(&self, h: &PoincareTransform) -> PoincareTransform {
        let l = self.frame.comoving();
        let li = l.inverse();
        PoincareTransform {
            lambda: li.compose(&h.lambda).compose(&l),
            a: li.apply(&h.a),
        }
    }

    /// `(U_h ψ)(p) = e^{-ip·a} ψ(Λ⁻¹p)`, with `h` in native coordinates.
    /// Translations and spatial signed permutations are exact; anything
    /// else is resampled by separable cubic convolution and the estimated
    /// resampling error is accumulated in [`MassShellState::interp_err`].
    /// No renormalisation is applied.
    pub fn apply_poincare(&self, h: &PoincareTransform) -> Result<Self> {
        let local = self.local_transform(h);
        let moved = self.pull_back(&local.lambda)?;
        Ok(moved.apply_multiplier(MultiplierKind::TranslatePhase(local.a)))
    }

    /// The same abstract state written in the co-moving coordinates of
    /// `frame`.
    pub fn in_frame(&self, frame: &Frame) -> Result<Self> {
        if frame.approx_eq(&self.frame, 1e-14) {
            return Ok(self.clone());
        }
        // amplitude at new coordinates p' is ψ(L p'), L: new → current
        let l = self.frame.comoving().inverse().compose(&frame.comoving());
        let mut out = self.pull_back(&l.inverse())?;
        out.frame = *frame;
        Ok(out)
    }

    /// `p ↦ ψ(Λ⁻¹ p)` in local coordinates.
    fn pull_back(&self, lambda: &Lorentz) -> Result<Self> {
        if lambda.max_abs_diff(&Lorentz::IDENTITY) == 0.0 {
            return Ok(self.clone());
        }
        let inv = lambda.inverse();
        if lambda.is_signed_permutation() {
            return self.permute(&inv);
        }
        let g = &self.grid;
        let dim = g.dim();
        for row in 1..4 {
            for col in 0..4 {
                let mixes_unused = (row > dim || col > dim) && row != col;
                if mixes_unused && inv.0[row][col].abs() > EXACT_TOL {
                    return Err(Error::Unsupported(format!(
                        "transform leaves the {dim}-dimensional momentum space"
                    )));
                }
            }
        }
        let mixed: Vec<usize> = (1..=dim)
            .filter(|&b| {
                (0..4).any(|c| (inv.0[b][c] - if c == b { 1.0 } else { 0.0 }).abs() > EXACT_TOL)
            })
            .collect();
        if mixed.len() == 1 {
            return Ok(self.resample_axis(&inv, mixed[0] - 1));
        }
        let e = g.energies();
        let mut amps = vec![Complex64::default(); g.len()];
        let mut diff2 = 0.0;
        for (i, out) in amps.iter_mut().enumerate() {
            let p = FourVector::from_parts(e[i], g.momentum(i));
            let q = inv.apply(&p).spatial();
            let fine = self.interpolate(q, 1);
            let coarse = self.interpolate(q, 2);
            diff2 += (fine - coarse).norm_sqr() / e[i];
            *out = fine;
        }
        // cubic convolution is third order: |I_h - I_2h| ≈ 7 |I_h - I|
        let err = (diff2 * g.cell()).sqrt() / 7.0;
        Ok(MassShellState {
            grid: self.grid.clone(),
            amps,
            frame: self.frame,
            interp_err: self.interp_err + err,
        })
    }

    /// Exact band-limited resampling when only axis `a` mixes with time:
    /// go to position space along `a`, then evaluate the Fourier sum at
    /// the off-grid momenta. Momenta beyond the grid band are set to zero.
    /// The error is the periodisation of the position box along `a`,
    /// estimated from the edge mass there.
    fn resample_axis(&self, inv: &Lorentz, a: usize) -> Self {
        let g = &self.grid;
        let n = g.n();
        let dim = g.dim();
        let pos = g.position();
        let stride = n.pow((dim - 1 - a) as u32);
        // g(x_a) along a, weighted so that Σ|g|² Δx is ‖ψ‖²
        let e = g.energies();
        let mut line: Vec<Complex64> = self.amps.iter().zip(e).map(|(v, e)| v / e.sqrt()).collect();
        fft::to_position_axis(g, &mut line, a);
        let total: f64 = line.iter().map(|v| v.norm_sqr()).sum();
        let edge: f64 = (0..g.len())
            .filter(|&i| {
                let k = g.multi_index(i)[a];
                k == 0 || k == n - 1
            })
            .map(|i| line[i].norm_sqr())
            .sum();
        let pref = pos.dx / (2.0 * std::f64::consts::PI).sqrt();
        let x0 = pos.coordinate(0);
        let p_max = g.p_max();
        let amps: Vec<Complex64> = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let p = FourVector::from_parts(e[i], g.momentum(i));
                let q = inv.apply(&p);
                let qa = q.0[a + 1];
                if qa.abs() >= p_max {
                    return Complex64::default();
                }
                let k = g.multi_index(i)[a];
                let column = i - k * stride;
                let step = Complex64::from_polar(1.0, -qa * pos.dx);
                let mut w = Complex64::from_polar(pref, -qa * x0);
                let mut acc = Complex64::default();
                for j in 0..n {
                    acc += line[column + j * stride] * w;
                    w *= step;
                }
                // back to the amplitude convention at the new energy
                let eq = q.0[0];
                acc * eq.sqrt()
            })
            .collect();
        let err = if total > 0.0 {
            (edge / total).sqrt() * self.norm()
        } else {
            0.0
        };
        MassShellState {
            grid: self.grid.clone(),
            amps,
            frame: self.frame,
            interp_err: self.interp_err + err,
        }
    }

    fn permute(&self, inv: &Lorentz) -> Result<Self> {
        let g = &self.grid;
        let n = g.n();
        let dim = g.dim();
        let mut amps = vec![Complex64::default(); g.len()];
        for (i, out) in amps.iter_mut().enumerate() {
            let idx = g.multi_index(i);
            let mut src = [0usize; 3];
            for (r, s) in src.iter_mut().enumerate().take(dim) {
                let (c, sign) = (1..4)
                    .find_map(|c| {
                        let v = inv.0[r + 1][c];
                        (v != 0.0).then_some((c - 1, v))
                    })
                    .expect("permutation row");
                if c >= dim {
                    return Err(Error::Unsupported(
                        "rotation leaves the reduced momentum space".into(),
                    ));
                }
                // p ↦ -p maps index k to n - k (mod n)
                *s = if sign > 0.0 { idx[c] } else { (n - idx[c]) % n };
            }
            *out = self.amps[g.flat_index(src)];
        }
        Ok(MassShellState {
            grid: self.grid.clone(),
            amps,
            frame: self.frame,
            interp_err: self.interp_err,
        })
    }

    /// Separable cubic convolution (Keys, a = -1/2) at spatial momentum `q`
    /// using every `stride`-th sample; zero outside the grid.
    fn interpolate(&self, q: Vec3, stride: usize) -> Complex64 {
        let g = &self.grid;
        let dim = g.dim();
        let n = g.n() as isize;
        let h = g.dp() * stride as f64;
        let half = (g.n() / 2) as f64;
        let mut base = [0isize; 3];
        let mut wts = [[0.0; 4]; 3];
        for a in 0..dim {
            // index in units of the (possibly coarse) lattice anchored at p = 0
            let u = q[a] / h;
            let b = u.floor();
            let t = u - b;
            base[a] = b as isize;
            wts[a] = keys_weights(t);
        }
        let mut acc = Complex64::default();
        let taps = 4usize.pow(dim as u32);
        'tap: for tap in 0..taps {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            let mut rest = tap;
            for a in 0..dim {
                let o = (rest % 4) as isize;
                rest /= 4;
                let k = (base[a] + o - 1) * stride as isize + half as isize;
                if k < 0 || k >= n {
                    continue 'tap;
                }
                idx[a] = k as usize;
                w *= wts[a][o as usize];
            }
            acc += self.amps[g.flat_index(idx)] * w;
        }
        acc
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let spec = self.grid.spec();
        w.write_all(b"KGPS")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(spec.dim as u32).to_le_bytes())?;
        w.write_all(&(spec.n as u32).to_le_bytes())?;
        w.write_all(&spec.p_max.to_le_bytes())?;
        w.write_all(&spec.mass.to_le_bytes())?;
        for c in self.frame.n().0 {
            w.write_all(&c.to_le_bytes())?;
        }
        w.write_all(&self.interp_err.to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        fn f64_of<R: Read>(r: &mut R) -> Result<f64> {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        }
        fn u32_of<R: Read>(r: &mut R) -> Result<u32> {
            let mut b = [0u8; 4];
            r.read_exact(&mut b)?;
            Ok(u32::from_le_bytes(b))
        }
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"KGPS" {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32_of(&mut r)?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let spec = GridSpec {
            dim: u32_of(&mut r)? as usize,
            n: u32_of(&mut r)? as usize,
            p_max: f64_of(&mut r)?,
            mass: f64_of(&mut r)?,
        };
        let grid = spec.build()?;
        let mut n = [0.0; 4];
        for c in n.iter_mut() {
            *c = f64_of(&mut r)?;
        }
        let frame = Frame::new(FourVector(n))?;
        let interp_err = f64_of(&mut r)?;
        let mut amps = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64_of(&mut r)?;
            let im = f64_of(&mut r)?;
            amps.push(Complex64::new(re, im));
        }
        let mut s = MassShellState::new(grid, amps, frame)?;
        s.interp_err = interp_err;
        Ok(s)
    }
}

fn keys_weights(t: f64) -> [f64; 4] {
    const A: f64 = -0.5;
    let near = |x: f64| ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0;
    let far = |x: f64| ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A;
    [far(1.0 + t), near(t), near(1.0 - t), far(2.0 - t)]
}

/// `⟨ψ|φ⟩ = Σ ψ̄ φ Δ^d p / E`.
pub fn inner_product(psi: &MassShellState, phi: &MassShellState) -> Result<Complex64> {
    psi.check_compatible(phi)?;
    let e = psi.grid.energies();
    let s: Complex64 = psi
        .amps
        .iter()
        .zip(&phi.amps)
        .zip(e)
        .map(|((a, b), e)| a.conj() * b / e)
        .sum();
    Ok(s * psi.grid.cell())
}

pub fn apply_multiplier(psi: &MassShellState, kind: MultiplierKind) -> MassShellState {
    psi.apply_multiplier(kind)
}

pub fn apply_poincare_state(psi: &MassShellState, h: &PoincareTransform) -> Result<MassShellState> {
    psi.apply_poincare(h)
}

fn finish_constructed(state: MassShellState) -> Result<MassShellState> {
    let state = state.normalized()?;
    let frac = state.boundary_mass_fraction();
    if frac > SUPPORT_OVERFLOW {
        return Err(Error::SupportOverflow(format!(
            "{frac:e} of the norm sits on the grid boundary"
        )));
    }
    if state.boundary_decay() > DECAY_WARN {
        log::warn!(
            "state amplitude at the grid boundary is {:e} of its peak",
            state.boundary_decay()
        );
    }
    Ok(state)
}

/// `ψ(p) ∝ exp(-|p⃗-p⃗₀|²/(4σ²)) e^{-ip⃗·x⃗₀}`, normalised. `x₀` centres
/// the packet in position space.
pub fn make_gaussian(
    grid: &Arc<MomentumGrid>,
    frame: Frame,
    center: Vec3,
    width: f64,
    position: Vec3,
) -> Result<MassShellState> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(
            "gaussian width must be positive".into(),
        ));
    }
    let amps = (0..grid.len())
        .map(|i| {
            let p = grid.momentum(i);
            let d2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum();
            let phase = -(p[0] * position[0] + p[1] * position[1] + p[2] * position[2]);
            Complex64::from_polar((-d2 / (4.0 * width * width)).exp(), phase)
        })
        .collect();
    finish_constructed(MassShellState::new(grid.clone(), amps, frame)?)
}

/// Compactly supported smooth bump in momentum space,
/// `exp(-1/(1-|p-p₀|²/w²))` inside `|p-p₀| < w`.
pub fn make_bump(
    grid: &Arc<MomentumGrid>,
    frame: Frame,
    center: Vec3,
    width: f64,
    position: Vec3,
) -> Result<MassShellState> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(
            "bump width must be positive".into(),
        ));
    }
    let amps = (0..grid.len())
        .map(|i| {
            let p = grid.momentum(i);
            let r2: f64 = (0..3).map(|a| (p[a] - center[a]).powi(2)).sum::<f64>() / (width * width);
            let phase = -(p[0] * position[0] + p[1] * position[1] + p[2] * position[2]);
            if r2 < 1.0 {
                Complex64::from_polar((-1.0 / (1.0 - r2)).exp(), phase)
            } else {
                Complex64::default()
            }
        })
        .collect();
    finish_constructed(MassShellState::new(grid.clone(), amps, frame)?)
}

/// Smooth position-space profile `χ` supported in a ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub center: Vec3,
    pub radius: f64,
}

impl BumpProfile {
    pub fn value(&self, x: Vec3) -> f64 {
        let r2: f64 = (0..3).map(|a| (x[a] - self.center[a]).powi(2)).sum::<f64>()
            / (self.radius * self.radius);
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    }

    /// `χ̂(k)`, normalised in flat `L²`, sampled on the momentum grid.
    pub fn transform(&self, grid: &MomentumGrid, shift: Vec3) -> Vec<Complex64> {
        let pos = grid.position();
        let mut chi: Vec<Complex64> = (0..pos.len())
            .map(|j| {
                let x = pos.point(j);
                let ph = shift[0] * x[0] + shift[1] * x[1] + shift[2] * x[2];
                Complex64::from_polar(self.value(x), ph)
            })
            .collect();
        let norm: f64 = chi.iter().map(|c| c.norm_sqr()).sum::<f64>() * pos.cell();
        chi.iter_mut().for_each(|c| *c /= norm.sqrt());
        fft::to_momentum(grid, &chi)
    }
}

/// `ψ_j(k) = √E(k) χ̂(k - j a)`, renormalised on the grid.
pub fn almost_localized_sequence(
    grid: &Arc<MomentumGrid>,
    frame: Frame,
    profile: &BumpProfile,
    a: Vec3,
    j: u32,
) -> Result<MassShellState> {
    if a.iter().all(|c| *c == 0.0) {
        return Err(Error::InvalidParameter(
            "shift vector a must be non-zero".into(),
        ));
    }
    if !(profile.radius > 0.0) {
        return Err(Error::InvalidParameter(
            "profile radius must be positive".into(),
        ));
    }
    let shift = a.map(|c| c * j as f64);
    let chi_hat = profile.transform(grid, shift);
    let e = grid.energies();
    let amps = chi_hat.iter().zip(e).map(|(c, e)| c * e.sqrt()).collect();
    finish_constructed(MassShellState::new(grid.clone(), amps, frame)?)
}

/// Normalised image of `ψ` under the Newton-Wigner projector of `region`
/// on `slice`. The projector keeps the position cells lying entirely in
/// the region, so it is exactly idempotent on the grid.
pub fn nw_project(
    psi: &MassShellState,
    region: &Region,
    slice: &SliceRef,
) -> Result<MassShellState> {
    if !slice.frame.approx_eq(&psi.frame, 1e-12) {
        return Err(Error::FrameMismatch);
    }
    let grid = psi.grid.clone();
    let t = slice.time;
    let mut amp = fields::nw_amplitude(psi, t).values;
    let weights = RegionWeights::new(region, grid.position());
    for (v, inside) in amp.iter_mut().zip(weights.interior()) {
        if !inside {
            *v = Complex64::default();
        }
    }
    let f = fft::to_momentum(&grid, &amp);
    let e = grid.energies();
    let amps: Vec<Complex64> = f
        .iter()
        .zip(e)
        .map(|(f, e)| f * e.sqrt() * Complex64::from_polar(1.0, e * t))
        .collect();
    let out = MassShellState {
        grid,
        amps,
        frame: psi.frame,
        interp_err: psi.interp_err,
    };
    let n = out.norm();
    if n < 1e-10 {
        return Err(Error::ProjectionAnnihilates(n));
    }
    out.normalized()
}

/// Declarative state description, as used in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Gaussian {
        center: Vec3,
        width: f64,
        #[serde(default)]
        position: Vec3,
    },
    Bump {
        center: Vec3,
        width: f64,
        #[serde(default)]
        position: Vec3,
    },
    AlmostLocalized {
        profile: BumpProfile,
        shift: Vec3,
        j: u32,
    },
    NwProjected {
        base: Box<StateSpec>,
        region: Region,
        #[serde(default)]
        time: f64,
    },
    Superposition {
        terms: Vec<(f64, f64, StateSpec)>,
    },
}

impl StateSpec {
    pub fn build(&self, grid: &Arc<MomentumGrid>, frame: Frame) -> Result<MassShellState> {
        match self {
            StateSpec::Gaussian {
                center,
                width,
                position,
            } => make_gaussian(grid, frame, *center, *width, *position),
            StateSpec::Bump {
                center,
                width,
                position,
            } => make_bump(grid, frame, *center, *width, *position),
            StateSpec::AlmostLocalized { profile, shift, j } => {
                almost_localized_sequence(grid, frame, profile, *shift, *j)
            }
            StateSpec::NwProjected { base, region, time } => {
                let b = base.build(grid, frame)?;
                nw_project(&b, region, &SliceRef::new(frame, *time))
            }
            StateSpec::Superposition { terms } => {
                let mut acc = MassShellState::zeros(grid.clone(), frame);
                for (re, im, spec) in terms {
                    let s = spec.build(grid, frame)?;
                    acc = acc.add(&s.scaled(Complex64::new(*re, *im)))?;
                }
                finish_constructed(acc)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(dim: usize, n: usize, p_max: f64) -> Arc<MomentumGrid> {
        GridSpec {
            dim,
            n,
            p_max,
            mass: 1.0,
        }
        .build()
        .unwrap()
    }

    #[test]
    fn gaussian_is_normalised_and_centred() {
        let g = grid(3, 32, 8.0);
        let s = make_gaussian(&g, Frame::rest(), [0.5, -0.3, 0.0], 0.6, [0.0; 3]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        // ⟨p_k⟩ in the measure |ψ|²/E leans toward the centre
        let e = g.energies();
        let mean: f64 = (0..g.len())
            .map(|i| g.momentum(i)[0] * s.amplitudes()[i].norm_sqr() / e[i])
            .sum::<f64>()
            * g.cell();
        assert!((mean - 0.5).abs() < 3.0 * 0.6 * 0.2, "{mean}");
    }

    #[test]
    fn hermitian_and_linear() {
        let g = grid(2, 32, 8.0);
        let a = make_gaussian(&g, Frame::rest(), [0.5, 0.0, 0.0], 0.7, [0.3, 0.0, 0.0]).unwrap();
        let b = make_gaussian(&g, Frame::rest(), [-0.2, 0.4, 0.0], 0.5, [0.0, 1.0, 0.0]).unwrap();
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        assert_eq!(ab, ba.conj());
        let i_a = a.scaled(Complex64::i());
        let v = inner_product(&a, &i_a).unwrap();
        assert!((v - Complex64::i() * a.norm_sqr()).norm() < 1e-15);
    }

    #[test]
    fn disjoint_support_is_orthogonal() {
        let g = grid(1, 256, 16.0);
        let a = make_bump(&g, Frame::rest(), [-5.0, 0.0, 0.0], 2.0, [0.0; 3]).unwrap();
        let b = make_bump(&g, Frame::rest(), [5.0, 0.0, 0.0], 2.0, [0.0; 3]).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::default());
        let c = make_gaussian(&g, Frame::rest(), [-8.0, 0.0, 0.0], 0.4, [0.0; 3]).unwrap();
        let d = make_gaussian(&g, Frame::rest(), [8.0, 0.0, 0.0], 0.4, [0.0; 3]).unwrap();
        assert!(inner_product(&c, &d).unwrap().norm() < 1e-8);
    }

    #[test]
    fn multiplier_identities() {
        let g = grid(3, 16, 6.0);
        let s = make_gaussian(&g, Frame::rest(), [0.3, 0.1, -0.2], 0.5, [0.0; 3]).unwrap();
        let back = s
            .apply_multiplier(MultiplierKind::InvEnergy)
            .apply_multiplier(MultiplierKind::Energy);
        let diff = s
            .amplitudes()
            .iter()
            .zip(back.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-14);
        let same = s.apply_multiplier(MultiplierKind::EvolvePhase(0.0));
        assert_eq!(same.amplitudes(), s.amplitudes());
        for k in 0..3 {
            let v = s.apply_multiplier(MultiplierKind::MomOverEnergy(k));
            assert!(v.norm() <= s.norm());
        }
    }

    #[test]
    fn rejects_overflow_and_mismatch() {
        let g = grid(1, 64, 4.0);
        assert!(matches!(
            make_gaussian(&g, Frame::rest(), [3.5, 0.0, 0.0], 1.0, [0.0; 3]),
            Err(Error::SupportOverflow(_))
        ));
        let h = grid(1, 32, 4.0);
        let a = make_gaussian(&g, Frame::rest(), [0.0; 3], 0.3, [0.0; 3]).unwrap();
        let b = make_gaussian(&h, Frame::rest(), [0.0; 3], 0.3, [0.0; 3]).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn time_translation_is_evolve_phase() {
        let g = grid(2, 32, 8.0);
        let s = make_gaussian(&g, Frame::rest(), [0.3, 0.1, 0.0], 0.5, [0.0; 3]).unwrap();
        let h = PoincareTransform::time_translation(&Frame::rest(), 0.8);
        let a = s.apply_poincare(&h).unwrap();
        let b = s.apply_multiplier(MultiplierKind::EvolvePhase(0.8));
        let diff = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn right_angle_rotation_is_exact_permutation() {
        let g = grid(2, 32, 8.0);
        let s = make_gaussian(&g, Frame::rest(), [1.0, 0.0, 0.0], 0.5, [0.0; 3]).unwrap();
        let rot =
            PoincareTransform::lorentz(Lorentz::axis_rotation(2, std::f64::consts::FRAC_PI_2))
                .unwrap();
        let r = s.apply_poincare(&rot).unwrap();
        assert_eq!(r.interp_err(), 0.0);
        assert!((r.norm_sqr() - s.norm_sqr()).abs() < 1e-13);
        // the packet now sits at p = (0, 1)
        let reference = make_gaussian(&g, Frame::rest(), [0.0, 1.0, 0.0], 0.5, [0.0; 3]).unwrap();
        let diff = r
            .amplitudes()
            .iter()
            .zip(reference.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn boost_preserves_norm_approximately() {
        let g = grid(3, 64, 8.0);
        let s = make_gaussian(&g, Frame::rest(), [0.0; 3], 0.8, [0.0; 3]).unwrap();
        let h = PoincareTransform::lorentz(Lorentz::boost([0.3, 0.0, 0.0]).unwrap()).unwrap();
        let b = s.apply_poincare(&h).unwrap();
        assert!((b.norm() - 1.0).abs() < 1e-3, "{}", b.norm());
        assert!(b.interp_err() > 0.0 && b.interp_err() < 1e-2);
    }

    #[test]
    fn axis_boost_resampling_is_spectrally_accurate() {
        let g = grid(2, 64, 8.0);
        let s = make_gaussian(&g, Frame::rest(), [0.3, -0.2, 0.0], 0.5, [0.0; 3]).unwrap();
        let h = PoincareTransform::lorentz(Lorentz::boost([0.0, 0.4, 0.0]).unwrap()).unwrap();
        let b = s.apply_poincare(&h).unwrap();
        assert!((b.norm() - 1.0).abs() < 1e-8, "{}", b.norm());
        assert!(b.interp_err() < 1e-5, "{}", b.interp_err());
        // the residual is set by the e^{-m|x|} tail of ψ/√E at the box edge
        let back = b.apply_poincare(&h.inverse()).unwrap();
        let diff = back
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 3.0 * (b.interp_err() + back.interp_err()), "{diff}");
    }

    #[test]
    fn binary_round_trip() {
        let g = grid(2, 16, 6.0);
        let s = make_gaussian(
            &g,
            Frame::from_velocity([0.1, 0.0, 0.0]).unwrap(),
            [0.2, 0.0, 0.0],
            0.6,
            [0.0; 3],
        )
        .unwrap();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 * 3 + 8 * 2 + 8 * 4 + 8 + 16 * g.len());
        let r = MassShellState::read_binary(&buf[..]).unwrap();
        assert_eq!(r.amplitudes(), s.amplitudes());
        assert_eq!(r.frame(), s.frame());
        assert!(MassShellState::read_binary(&b"XXXX"[..]).is_err());
    }
}
