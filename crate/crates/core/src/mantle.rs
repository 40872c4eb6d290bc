//! Probability flux through the light-cone mantle swept by a ball (or a
//! finite union of balls) between two times of the state's frame.
//!
//! For a source region `Δ₁` on `t₁` and its cone expansion `Δ₂` on `t₂`,
//! conservation of the current gives
//!
//! `P_A(Δ₂, t₂) - P_A(Δ₁, t₁) = -∫ dt ∮ R^{d-1} dΩ (J^t - s J^r)`
//!
//! with `s = sign(t₂ - t₁)` and `R(t) = r₁ + |t - t₁|`. The integrand
//! `J^t - s J^r` is the lightlike component of the current transverse to
//! the mantle, which is non-positive for a causal past-directed current,
//! so the flux is non-negative. In `d = 1` the sphere is the two
//! endpoints of an interval; in `d = 2` a circle.
//!
//! The field is evaluated at mantle points by direct sums over the
//! momentum grid, which is exact in time and needs no spatial
//! interpolation.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{current_at, stress_energy_at};
use crate::geometry::{FourVector, Region, SliceRef, Vec3, DEFAULT_CAUSAL_TOL};
use crate::observables::{terno_probability, ProbabilityValue};
use crate::quadrature::roundoff_floor;
use crate::state::MassShellState;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MantleBall {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MantleSpec {
    pub balls: Vec<MantleBall>,
    pub t1: f64,
    pub t2: f64,
    pub n_u: usize,
    #[serde(default = "default_angular")]
    pub n_theta: usize,
    #[serde(default = "default_angular")]
    pub n_phi: usize,
}

fn default_angular() -> usize {
    16
}

impl MantleSpec {
    pub fn ball(center: Vec3, radius: f64, t1: f64, t2: f64) -> Self {
        MantleSpec {
            balls: vec![MantleBall { center, radius }],
            t1,
            t2,
            n_u: 16,
            n_theta: 16,
            n_phi: 32,
        }
    }

    /// The same mantle on a grid half as fine in every direction.
    pub fn halved(&self) -> Self {
        MantleSpec {
            n_u: (self.n_u / 2).max(1),
            n_theta: (self.n_theta / 2).max(1),
            n_phi: (self.n_phi / 2).max(1),
            ..self.clone()
        }
    }

    pub fn source_region(&self) -> Region {
        self.region_at(0.0)
    }

    /// The union of balls expanded by `dt`.
    pub fn region_at(&self, dt: f64) -> Region {
        let balls: Vec<Region> = self
            .balls
            .iter()
            .map(|b| Region::ball(b.center, b.radius + dt))
            .collect();
        if balls.len() == 1 {
            balls.into_iter().next().expect("one ball")
        } else {
            Region::union(balls)
        }
    }

    pub fn target_region(&self) -> Region {
        self.region_at((self.t2 - self.t1).abs())
    }

    fn validate(&self, psi: &MassShellState) -> Result<()> {
        if self.balls.is_empty() || self.balls.iter().any(|b| !(b.radius > 0.0)) {
            return Err(Error::InvalidParameter(
                "mantle needs balls of positive radius".into(),
            ));
        }
        if self.n_u == 0 || self.n_theta == 0 || self.n_phi == 0 {
            return Err(Error::InvalidParameter(
                "mantle grid sizes must be positive".into(),
            ));
        }
        let pos = psi.grid().position();
        let limit = 0.5 * pos.box_length() - 2.0 * pos.dx;
        let reach = (self.t2 - self.t1).abs();
        for b in &self.balls {
            for a in 0..pos.dim {
                if b.center[a].abs() + b.radius + reach > limit {
                    return Err(Error::MantleOutsideGrid(format!(
                        "ball at {:?} with outer radius {} passes |x| = {limit}",
                        b.center,
                        b.radius + reach
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One quadrature node on the mantle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MantleSample {
    pub ball: usize,
    pub t: f64,
    /// Lightlike coordinate measured from the cone apex, `u = 2R`.
    pub u: f64,
    pub theta: f64,
    pub phi: f64,
    pub radius: f64,
    pub x: Vec3,
    /// `J^t - s J^r`.
    pub jw: f64,
    /// `|J|` scale for tolerance bands.
    pub scale: f64,
    pub weight: f64,
}

struct Node {
    ball: usize,
    theta: f64,
    phi: f64,
    x: Vec3,
    normal: Vec3,
    weight: f64,
}

fn angular_nodes(dim: usize, n_theta: usize, n_phi: usize) -> Vec<(f64, f64, Vec3, f64)> {
    match dim {
        1 => vec![
            (0.0, 0.0, [1.0, 0.0, 0.0], 1.0),
            (PI, 0.0, [-1.0, 0.0, 0.0], 1.0),
        ],
        2 => (0..n_phi)
            .map(|k| {
                let phi = -PI + (k as f64 + 0.5) * 2.0 * PI / n_phi as f64;
                (
                    0.5 * PI,
                    phi,
                    [phi.cos(), phi.sin(), 0.0],
                    2.0 * PI / n_phi as f64,
                )
            })
            .collect(),
        _ => {
            let dth = PI / n_theta as f64;
            let dph = 2.0 * PI / n_phi as f64;
            let mut v = Vec::with_capacity(n_theta * n_phi);
            for j in 0..n_theta {
                let th = (j as f64 + 0.5) * dth;
                for k in 0..n_phi {
                    let ph = -PI + (k as f64 + 0.5) * dph;
                    let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                    v.push((th, ph, n, th.sin() * dth * dph));
                }
            }
            v
        }
    }
}

/// Direct evaluation of `Φ` and `∂_μΦ` at arbitrary points of a time
/// level, summing only over momenta carrying amplitude.
struct Probe {
    dim: usize,
    mass: f64,
    axis: Vec<f64>,
    idx: Vec<[usize; 3]>,
    energy: Vec<f64>,
    coef: Vec<Complex64>,
}

impl Probe {
    fn new(psi: &MassShellState) -> Self {
        let g = psi.grid();
        let dim = g.dim();
        let e = g.energies();
        let peak = psi
            .amplitudes()
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max);
        let pref = (g.dp() / (2.0 * PI).sqrt()).powi(dim as i32);
        let mut probe = Probe {
            dim,
            mass: g.mass(),
            axis: g.axis().to_vec(),
            idx: Vec::new(),
            energy: Vec::new(),
            coef: Vec::new(),
        };
        for (i, a) in psi.amplitudes().iter().enumerate() {
            if a.norm() > 1e-13 * peak {
                probe.idx.push(g.multi_index(i));
                probe.energy.push(e[i]);
                probe.coef.push(a * pref / (e[i] * e[i].sqrt()));
            }
        }
        probe
    }

    /// `(Φ, ∂_μΦ)` at each point of the level `t`.
    fn eval(&self, t: f64, points: &[Vec3]) -> Vec<(Complex64, [Complex64; 4])> {
        let g: Vec<Complex64> = self
            .coef
            .iter()
            .zip(&self.energy)
            .map(|(c, e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        let n = self.axis.len();
        points
            .par_iter()
            .map(|x| {
                let tables: Vec<Vec<Complex64>> = (0..self.dim)
                    .map(|a| {
                        (0..n)
                            .map(|k| Complex64::from_polar(1.0, self.axis[k] * x[a]))
                            .collect()
                    })
                    .collect();
                let mut phi = Complex64::default();
                let mut se = Complex64::default();
                let mut sp = [Complex64::default(); 3];
                for (i, gi) in g.iter().enumerate() {
                    let k = self.idx[i];
                    let mut w = tables[0][k[0]];
                    for a in 1..self.dim {
                        w *= tables[a][k[a]];
                    }
                    let v = gi * w;
                    phi += v;
                    se += v * self.energy[i];
                    for a in 0..self.dim {
                        sp[a] += v * self.axis[k[a]];
                    }
                }
                let i = Complex64::i();
                let d = [-i * se, i * sp[0], i * sp[1], i * sp[2]];
                (phi, d)
            })
            .collect()
    }
}

fn inside_other(spec: &MantleSpec, ball: usize, x: Vec3, dt: f64) -> bool {
    spec.balls.iter().enumerate().any(|(c, b)| {
        if c == ball {
            return false;
        }
        let r = b.radius + dt;
        let d2: f64 = (0..3).map(|a| (x[a] - b.center[a]).powi(2)).sum();
        d2 < r * r
    })
}

/// Current samples on the mantle.
pub fn mantle_samples(psi: &MassShellState, spec: &MantleSpec) -> Result<Vec<MantleSample>> {
    spec.validate(psi)?;
    let span = spec.t2 - spec.t1;
    if span == 0.0 {
        return Ok(Vec::new());
    }
    let dim = psi.grid().dim();
    let s = span.signum();
    let probe = Probe::new(psi);
    let ang = angular_nodes(dim, spec.n_theta, spec.n_phi);
    let dt = span.abs() / spec.n_u as f64;
    let mut out = Vec::new();
    for level in 0..spec.n_u {
        let tau = (level as f64 + 0.5) * dt;
        let t = spec.t1 + s * tau;
        let mut nodes = Vec::new();
        for (b, ball) in spec.balls.iter().enumerate() {
            let r = ball.radius + tau;
            for &(theta, phi, normal, w) in &ang {
                let x: Vec3 = std::array::from_fn(|a| ball.center[a] + r * normal[a]);
                if inside_other(spec, b, x, tau) {
                    continue;
                }
                nodes.push(Node {
                    ball: b,
                    theta,
                    phi,
                    x,
                    normal,
                    weight: dt * w * r.powi(dim as i32 - 1),
                });
            }
        }
        let points: Vec<Vec3> = nodes.iter().map(|n| n.x).collect();
        let fields = probe.eval(t, &points);
        let rest = FourVector::new(1.0, 0.0, 0.0, 0.0);
        for (node, (phi, d)) in nodes.iter().zip(fields) {
            let tmn = stress_energy_at(&d, phi, probe.mass);
            let j = current_at(&tmn, &rest);
            let jr: f64 = (0..3).map(|a| j.0[a + 1] * node.normal[a]).sum();
            let radius = spec.balls[node.ball].radius + tau;
            out.push(MantleSample {
                ball: node.ball,
                t,
                u: 2.0 * radius,
                theta: node.theta,
                phi: node.phi,
                radius,
                x: node.x,
                jw: j.0[0] - s * jr,
                scale: j.scale(),
                weight: node.weight,
            });
        }
    }
    Ok(out)
}

fn flux_of(samples: &[MantleSample]) -> (f64, f64) {
    let flux = -samples.iter().map(|s| s.weight * s.jw).sum::<f64>();
    let abs = samples.iter().map(|s| (s.weight * s.jw).abs()).sum::<f64>();
    (flux, abs)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MantleReport {
    pub flux: f64,
    /// `|F - F_coarse|` against the halved mantle grid, plus roundoff.
    pub flux_err: f64,
    pub p_source: ProbabilityValue,
    pub p_target: ProbabilityValue,
    /// `|P(Δ₂,t₂) - P(Δ₁,t₁) - flux|`.
    pub balance_residual: f64,
    pub combined_err: f64,
    pub samples: usize,
    /// Sign of the transverse current on the fine mantle grid.
    pub causality: CausalityReport,
}

/// Flux through the mantle and the probability balance it must satisfy.
pub fn mantle_flux(psi: &MassShellState, spec: &MantleSpec) -> Result<MantleReport> {
    let frame = psi.frame();
    let p_source = terno_probability(psi, &SliceRef::new(frame, spec.t1), &spec.source_region())?;
    let p_target = terno_probability(psi, &SliceRef::new(frame, spec.t2), &spec.target_region())?;
    let fine = mantle_samples(psi, spec)?;
    let coarse = mantle_samples(psi, &spec.halved())?;
    let (flux, abs) = flux_of(&fine);
    let (flux_coarse, _) = flux_of(&coarse);
    let flux_err = (flux - flux_coarse).abs() + roundoff_floor(abs, psi.grid().len());
    let balance_residual = (p_target.value - p_source.value - flux).abs();
    let combined_err = flux_err + p_source.err_est + p_target.err_est;
    Ok(MantleReport {
        flux,
        flux_err,
        p_source,
        p_target,
        balance_residual,
        combined_err,
        samples: fine.len(),
        causality: causality_of(&fine),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalityReport {
    /// Share of samples with `J^t - s J^r ≤ τ_c`.
    pub fraction: f64,
    pub tau_c: f64,
    /// Largest `J^t - s J^r` seen.
    pub max_jw: f64,
    /// Threshold used for strict negativity, `10⁻⁸ max |J^w|`.
    pub delta: f64,
    /// Share of samples with `J^t - s J^r < -δ`.
    pub strict_fraction: f64,
}

pub fn causality_of(samples: &[MantleSample]) -> CausalityReport {
    if samples.is_empty() {
        return CausalityReport {
            fraction: 1.0,
            tau_c: 0.0,
            max_jw: 0.0,
            delta: 0.0,
            strict_fraction: 0.0,
        };
    }
    let scale = samples.iter().map(|s| s.scale).fold(0.0, f64::max);
    let tau_c = DEFAULT_CAUSAL_TOL * scale;
    let n = samples.len() as f64;
    let ok = samples.iter().filter(|s| s.jw <= tau_c).count() as f64;
    let max_jw = samples
        .iter()
        .map(|s| s.jw)
        .fold(f64::NEG_INFINITY, f64::max);
    let big = samples.iter().map(|s| s.jw.abs()).fold(0.0, f64::max);
    let delta = 1e-8 * big;
    let strict = samples.iter().filter(|s| s.jw < -delta).count() as f64;
    CausalityReport {
        fraction: ok / n,
        tau_c,
        max_jw,
        delta,
        strict_fraction: strict / n,
    }
}

pub fn pointwise_mantle_causality(
    psi: &MassShellState,
    spec: &MantleSpec,
) -> Result<CausalityReport> {
    Ok(causality_of(&mantle_samples(psi, spec)?))
}

/// CSV of `ball, t, u, theta, phi, jw` per mantle sample.
pub fn write_mantle_csv<W: Write>(samples: &[MantleSample], w: W) -> Result<()> {
    let mut out = std::io::BufWriter::new(w);
    writeln!(out, "ball,t,u,theta,phi,jw")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.ball, s.t, s.u, s.theta, s.phi, s.jw
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Frame;
    use crate::grid::GridSpec;
    use crate::state::make_gaussian;

    fn state(dim: usize, n: usize, p_max: f64) -> MassShellState {
        let g = GridSpec {
            dim,
            n,
            p_max,
            mass: 1.0,
        }
        .build()
        .unwrap();
        make_gaussian(&g, Frame::rest(), [0.4, 0.0, 0.0], 0.6, [0.5, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn degenerate_span_has_no_flux() {
        let s = state(2, 32, 6.0);
        let r = mantle_flux(&s, &MantleSpec::ball([0.0; 3], 1.0, 0.5, 0.5)).unwrap();
        assert_eq!(r.flux, 0.0);
        assert!(r.balance_residual < 1e-12);
    }

    #[test]
    fn balance_in_one_dimension() {
        let s = state(1, 1024, 16.0);
        for (t1, t2) in [(0.0, 2.0), (1.0, -0.5)] {
            let spec = MantleSpec {
                n_u: 64,
                ..MantleSpec::ball([0.2, 0.0, 0.0], 0.8, t1, t2)
            };
            let r = mantle_flux(&s, &spec).unwrap();
            assert!(r.flux >= -3.0 * r.flux_err, "{r:?}");
            assert!(r.balance_residual <= 3.0 * r.combined_err, "{r:?}");
            assert_eq!(pointwise_mantle_causality(&s, &spec).unwrap().fraction, 1.0);
        }
    }

    #[test]
    fn balance_in_two_dimensions_with_union() {
        let s = state(2, 64, 8.0);
        let spec = MantleSpec {
            balls: vec![
                MantleBall {
                    center: [-0.5, 0.0, 0.0],
                    radius: 0.8,
                },
                MantleBall {
                    center: [0.7, 0.3, 0.0],
                    radius: 0.6,
                },
            ],
            t1: 0.0,
            t2: 1.0,
            n_u: 24,
            n_theta: 1,
            n_phi: 64,
        };
        let r = mantle_flux(&s, &spec).unwrap();
        assert!(r.flux >= -3.0 * r.flux_err, "{r:?}");
        assert!(r.balance_residual <= 3.0 * r.combined_err, "{r:?}");
    }

    #[test]
    fn rejects_mantle_outside_box() {
        let s = state(1, 64, 8.0);
        let spec = MantleSpec::ball([10.0, 0.0, 0.0], 1.0, 0.0, 1.0);
        assert!(matches!(
            mantle_flux(&s, &spec),
            Err(Error::MantleOutsideGrid(_))
        ));
    }
}
