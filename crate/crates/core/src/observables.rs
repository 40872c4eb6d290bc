//! Localization probabilities for the Newton-Wigner PVM `Q`, the
//! energy-density POVM `A` and its two-frame variant `M`, together with
//! moments, the corrected Heisenberg inequality and the mean velocity.
//!
//! `Q` and `A` are evaluated on slices of the state's own frame; express
//! the state in another frame with [`MassShellState::in_frame`] first, or
//! use `M` with the generator equal to the slice frame, which needs no
//! resampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{self, weighted_amplitude};
use crate::geometry::{minkowski_dot, Frame, Region, SliceRef, Vec3};
use crate::grid::PositionGrid;
use crate::quadrature::{edge_mass, roundoff_floor, Integral, RegionWeights};
use crate::state::MassShellState;

/// Resampling error above which a two-frame result is flagged.
pub const RESAMPLE_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    Q,
    A,
    M,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityValue {
    /// Raw value; never clipped.
    pub value: f64,
    pub err_est: f64,
    pub observable: Observable,
    pub slice: SliceRef,
    pub region: String,
    /// Set when `value` leaves `[0, 1]` by more than `err_est`.
    pub clamped: bool,
    /// Position cell side used by the quadrature.
    pub h: f64,
}

impl ProbabilityValue {
    fn new(
        value: f64,
        err_est: f64,
        observable: Observable,
        slice: &SliceRef,
        region: &Region,
        h: f64,
    ) -> Self {
        let clamped = value < -err_est || value > 1.0 + err_est;
        if clamped {
            log::warn!("{observable:?} probability {value} outside [0,1] beyond err {err_est:e}");
        }
        ProbabilityValue {
            value,
            err_est,
            observable,
            slice: *slice,
            region: region.describe(),
            clamped,
            h,
        }
    }

    /// Value clipped to `[0, 1]` for display.
    pub fn clipped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

fn check_native(psi: &MassShellState, slice: &SliceRef) -> Result<()> {
    if slice.frame.approx_eq(&psi.frame(), 1e-12) {
        Ok(())
    } else {
        Err(Error::FrameMismatch)
    }
}

/// Error contributions that do not come from the quadrature rule: mass
/// outside the momentum grid, mass at the edge of the periodic position
/// box, and resampling.
fn tail_err(psi: &MassShellState, pos: &PositionGrid, density: &[f64]) -> f64 {
    psi.boundary_mass_fraction() * psi.norm_sqr() + edge_mass(pos, density) + 2.0 * psi.interp_err()
}

fn region_integral(region: &Region, pos: PositionGrid, density: &[f64]) -> Integral {
    if matches!(region, Region::Whole) {
        // Plancherel: no rule error, only roundoff
        let value = density.iter().sum::<f64>() * pos.cell();
        let abs_sum = density.iter().map(|d| d.abs()).sum::<f64>() * pos.cell();
        return Integral {
            value,
            coarse: value,
            abs_sum,
            points: density.len(),
        };
    }
    RegionWeights::new(region, pos).integrate(density)
}

fn probability_from_density(
    psi: &MassShellState,
    slice: &SliceRef,
    region: &Region,
    density: &[f64],
    obs: Observable,
) -> ProbabilityValue {
    let pos = psi.grid().position();
    let integral = region_integral(region, pos, density);
    let err = integral.err_est() + tail_err(psi, &pos, density);
    ProbabilityValue::new(integral.value, err, obs, slice, region, pos.dx)
}

/// `|Ψ_t|²`.
pub fn nw_density(psi: &MassShellState, t: f64) -> Vec<f64> {
    fields::nw_amplitude(psi, t).density()
}

/// `½[|Ψ|² + Σ_k |Ψ[p_k/E · ψ]|² + |Ψ[m/E · ψ]|²]`, the `A` density read
/// off the multiplier decomposition.
pub fn terno_density(psi: &MassShellState, t: f64) -> Vec<f64> {
    let dim = psi.grid().dim();
    let m = psi.grid().mass();
    let mut rho = nw_density(psi, t);
    let mut add = |w: &(dyn Fn(Vec3, f64) -> f64 + Sync)| {
        let amp = weighted_amplitude(psi, t, |p, e| (w(p, e) / e.sqrt()).into());
        for (r, a) in rho.iter_mut().zip(amp) {
            *r += a.norm_sqr();
        }
    };
    for k in 0..dim {
        add(&move |p, e| p[k] / e);
    }
    add(&move |_, e| m / e);
    rho.iter_mut().for_each(|r| *r *= 0.5);
    rho
}

/// `T_μν n^μ n^ν` from the field `Φ`.
pub fn terno_energy_density(psi: &MassShellState, t: f64) -> Vec<f64> {
    let slab = fields::terno_field(psi, t);
    fields::current(&slab, &psi.frame()).density()
}

pub fn nw_probability(
    psi: &MassShellState,
    slice: &SliceRef,
    region: &Region,
) -> Result<ProbabilityValue> {
    check_native(psi, slice)?;
    let rho = nw_density(psi, slice.time);
    Ok(probability_from_density(
        psi,
        slice,
        region,
        &rho,
        Observable::Q,
    ))
}

pub fn terno_probability(
    psi: &MassShellState,
    slice: &SliceRef,
    region: &Region,
) -> Result<ProbabilityValue> {
    check_native(psi, slice)?;
    let rho = terno_density(psi, slice.time);
    Ok(probability_from_density(
        psi,
        slice,
        region,
        &rho,
        Observable::A,
    ))
}

pub fn terno_probability_energy_form(
    psi: &MassShellState,
    slice: &SliceRef,
    region: &Region,
) -> Result<ProbabilityValue> {
    check_native(psi, slice)?;
    let rho = terno_energy_density(psi, slice.time);
    Ok(probability_from_density(
        psi,
        slice,
        region,
        &rho,
        Observable::A,
    ))
}

/// Both evaluations of the two-frame observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MProbability {
    /// Flux of the current generated by `n₀` through the region; exact
    /// field evaluation on the slice, no resampling.
    pub current: ProbabilityValue,
    /// Operator form in the slice frame's momentum representation;
    /// includes the resampling error.
    pub operator: ProbabilityValue,
    pub resample_err: f64,
    /// The routes disagree beyond their errors, or resampling is too
    /// inaccurate.
    pub flagged: bool,
}

impl MProbability {
    pub fn difference(&self) -> f64 {
        (self.current.value - self.operator.value).abs()
    }

    pub fn combined_err(&self) -> f64 {
        self.current.err_est + self.operator.err_est
    }
}

/// Current form of the two-frame observable only.
pub fn m_povm_current(
    psi: &MassShellState,
    generator: &Frame,
    slice: &SliceRef,
    region: &Region,
) -> Result<ProbabilityValue> {
    let slab = fields::slice_field(psi, slice, generator)?;
    let rho = fields::current(&slab, &psi.frame()).density();
    Ok(probability_from_density(
        psi,
        slice,
        region,
        &rho,
        Observable::M,
    ))
}

/// Operator form: in the slice frame's representation with `E'` the slice
/// energy and `E₀ = -n₀·p`,
/// `⟨M⟩ = Re⟨√(E'/E₀)ψ|Q √(E₀/E')ψ⟩ + (n₀⁰/2)[-q(C₀) + Σ_k q(C_k) + q(C_m)]`
/// with `C_μ = √(E'/E₀)(p_μ/E')ψ` and `C_m = √(E'/E₀)(m/E')ψ`.
pub fn m_povm_operator(
    psi: &MassShellState,
    generator: &Frame,
    slice: &SliceRef,
    region: &Region,
) -> Result<ProbabilityValue> {
    let local = psi.in_frame(&slice.frame)?;
    let rho = m_operator_density(&local, generator, slice.time);
    Ok(probability_from_density(
        &local,
        slice,
        region,
        &rho,
        Observable::M,
    ))
}

fn m_operator_density(psi: &MassShellState, generator: &Frame, t: f64) -> Vec<f64> {
    let dim = psi.grid().dim();
    let m = psi.grid().mass();
    let n0 = psi.frame().comoving().inverse().apply(&generator.n());
    let e0 = move |p: Vec3, e: f64| n0.0[0] * e - n0.0[1] * p[0] - n0.0[2] * p[1] - n0.0[3] * p[2];
    let a = weighted_amplitude(psi, t, |p, e| (1.0 / e0(p, e).sqrt()).into());
    let b = weighted_amplitude(psi, t, |p, e| (e0(p, e).sqrt() / e).into());
    let coef = 0.5 * n0.0[0];
    let mut rho: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x.conj() * y).re - coef * x.norm_sqr())
        .collect();
    let mut add = |w: &(dyn Fn(Vec3, f64) -> f64 + Sync)| {
        let c = weighted_amplitude(psi, t, |p, e| (w(p, e) / (e * e0(p, e).sqrt())).into());
        for (r, v) in rho.iter_mut().zip(c) {
            *r += coef * v.norm_sqr();
        }
    };
    for k in 0..dim {
        add(&move |p, _| p[k]);
    }
    add(&move |_, _| m);
    rho
}

pub fn m_povm_probability(
    psi: &MassShellState,
    generator: &Frame,
    slice: &SliceRef,
    region: &Region,
) -> Result<MProbability> {
    let current = m_povm_current(psi, generator, slice, region)?;
    let operator = m_povm_operator(psi, generator, slice, region)?;
    let local_err = if slice.frame.approx_eq(&psi.frame(), 1e-14) {
        0.0
    } else {
        psi.in_frame(&slice.frame)?.interp_err() - psi.interp_err()
    };
    let flagged = local_err > RESAMPLE_TOL
        || (current.value - operator.value).abs() > 3.0 * (current.err_est + operator.err_est);
    if flagged {
        log::warn!(
            "two-frame routes differ by {:e} (errors {:e}, {:e}; resampling {:e})",
            (current.value - operator.value).abs(),
            current.err_est,
            operator.err_est,
            local_err
        );
    }
    Ok(MProbability {
        current,
        operator,
        resample_err: local_err,
        flagged,
    })
}

/// A scalar with its error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
}

fn moment(psi: &MassShellState, density: &[f64], power: i32, axis: usize) -> Estimate {
    let pos = psi.grid().position();
    let w = RegionWeights::new(&Region::Whole, pos);
    let i = w.integrate_with(density, |x| x[axis - 1].powi(power));
    let half = 0.5 * pos.box_length();
    let tail = (psi.boundary_mass_fraction() * psi.norm_sqr() + edge_mass(&pos, density))
        * half.powi(power);
    Estimate {
        value: i.value,
        err_est: i.err_est() + tail,
    }
}

fn check_axis(psi: &MassShellState, axis: usize, allow_time: bool) -> Result<()> {
    let lo = if allow_time { 0 } else { 1 };
    if axis < lo || axis > psi.grid().dim() {
        return Err(Error::InvalidParameter(format!(
            "axis {axis} outside {lo}..={}",
            psi.grid().dim()
        )));
    }
    Ok(())
}

/// `∫ x^k d⟨ψ|A(x)ψ⟩`; axis 0 is time, spatial axes are 1..=d.
pub fn first_moment(psi: &MassShellState, slice: &SliceRef, axis: usize) -> Result<Estimate> {
    check_native(psi, slice)?;
    check_axis(psi, axis, true)?;
    let rho = terno_density(psi, slice.time);
    if axis == 0 {
        let total = rho.iter().sum::<f64>() * psi.grid().position().cell();
        return Ok(Estimate {
            value: slice.time * total,
            err_est: roundoff_floor(slice.time.abs(), rho.len()),
        });
    }
    Ok(moment(psi, &rho, 1, axis))
}

/// `∫ x^k |Ψ_t|²`.
pub fn nw_expectation(psi: &MassShellState, slice: &SliceRef, axis: usize) -> Result<Estimate> {
    check_native(psi, slice)?;
    check_axis(psi, axis, true)?;
    if axis == 0 {
        return Ok(Estimate {
            value: slice.time * psi.norm_sqr(),
            err_est: 0.0,
        });
    }
    Ok(moment(psi, &nw_density(psi, slice.time), 1, axis))
}

/// `⟨f(p⃗, E)⟩ = Σ f |ψ|²/E Δ^d p / ‖ψ‖²`.
pub fn momentum_expectation(psi: &MassShellState, f: impl Fn(Vec3, f64) -> f64) -> f64 {
    let g = psi.grid();
    let e = g.energies();
    let s: f64 = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| f(g.momentum(i), e[i]) * a.norm_sqr() / e[i])
        .sum();
    s * g.cell() / psi.norm_sqr()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMoment {
    pub terno_second: f64,
    pub nw_second: f64,
    /// `⟨(E² - p_k²)/(2E⁴)⟩`.
    pub correction: f64,
    pub err_est: f64,
}

impl SecondMoment {
    pub fn residual(&self) -> f64 {
        (self.terno_second - self.nw_second - self.correction).abs()
    }
}

pub fn second_moment(psi: &MassShellState, slice: &SliceRef, axis: usize) -> Result<SecondMoment> {
    check_native(psi, slice)?;
    check_axis(psi, axis, false)?;
    let a = terno_density(psi, slice.time);
    let q = nw_density(psi, slice.time);
    Ok(second_from(psi, &a, &q, axis))
}

fn second_from(psi: &MassShellState, terno: &[f64], nw: &[f64], axis: usize) -> SecondMoment {
    let a = moment(psi, terno, 2, axis);
    let q = moment(psi, nw, 2, axis);
    let k = axis - 1;
    let correction = momentum_expectation(psi, |p, e| (e * e - p[k] * p[k]) / (2.0 * e.powi(4)))
        * psi.norm_sqr();
    SecondMoment {
        terno_second: a.value,
        nw_second: q.value,
        correction,
        err_est: a.err_est + q.err_est + roundoff_floor(correction, psi.grid().len()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergReport {
    /// `Δ_ψX · Δ_ψP` with the spread from `A`.
    pub lhs: f64,
    /// `½ √(1 + 2 Δ_ψP² ⟨(E² - p²)/E⁴⟩)`.
    pub rhs: f64,
    pub err_est: f64,
    /// `Δ_ψN · Δ_ψP` with the Newton-Wigner spread.
    pub nw_lhs: f64,
}

impl HeisenbergReport {
    /// `lhs - rhs`, negative when the bound is violated.
    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }
}

pub fn heisenberg_check(
    psi: &MassShellState,
    slice: &SliceRef,
    axis: usize,
) -> Result<HeisenbergReport> {
    check_native(psi, slice)?;
    check_axis(psi, axis, false)?;
    let a = terno_density(psi, slice.time);
    let q = nw_density(psi, slice.time);
    Ok(axis_moments(psi, &a, &q, axis).heisenberg)
}

fn heisenberg_from(
    psi: &MassShellState,
    first: Estimate,
    nw_first: Estimate,
    second: &SecondMoment,
    axis: usize,
) -> HeisenbergReport {
    let k = axis - 1;
    let mean_p = momentum_expectation(psi, |p, _| p[k]);
    let var_p = (momentum_expectation(psi, |p, _| p[k] * p[k]) - mean_p * mean_p).max(0.0);
    let dp = var_p.sqrt();
    let var_x = second.terno_second - first.value * first.value;
    let var_n = second.nw_second - nw_first.value * nw_first.value;
    let dx = var_x.max(0.0).sqrt();
    let lhs = dx * dp;
    let corr = momentum_expectation(psi, |p, e| (e * e - p[k] * p[k]) / e.powi(4));
    let rhs = 0.5 * (1.0 + 2.0 * var_p * corr).sqrt();
    let var_err = second.err_est + 2.0 * first.value.abs() * first.err_est;
    let err_est = if dx > 0.0 {
        dp * var_err / (2.0 * dx)
    } else {
        dp * var_err.sqrt()
    };
    HeisenbergReport {
        lhs,
        rhs,
        err_est,
        nw_lhs: var_n.max(0.0).sqrt() * dp,
    }
}

/// `v_k = ⟨p_k / E⟩` for each spatial axis.
pub fn velocity(psi: &MassShellState) -> Vec<f64> {
    (0..psi.grid().dim())
        .map(|k| momentum_expectation(psi, |p, e| p[k] / e))
        .collect()
}

/// Everything known about one spatial axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisMoments {
    pub first: Estimate,
    pub nw_first: Estimate,
    pub second: SecondMoment,
    pub heisenberg: HeisenbergReport,
}

fn axis_moments(psi: &MassShellState, terno: &[f64], nw: &[f64], axis: usize) -> AxisMoments {
    let first = moment(psi, terno, 1, axis);
    let nw_first = moment(psi, nw, 1, axis);
    let second = second_from(psi, terno, nw, axis);
    let heisenberg = heisenberg_from(psi, first, nw_first, &second, axis);
    AxisMoments {
        first,
        nw_first,
        second,
        heisenberg,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub time: f64,
    /// One entry per spatial axis.
    pub axes: Vec<AxisMoments>,
    pub velocity: Vec<f64>,
}

/// Spatial moments on every axis, from one evaluation of each density.
pub fn moment_report(psi: &MassShellState, slice: &SliceRef) -> Result<MomentReport> {
    check_native(psi, slice)?;
    let terno = terno_density(psi, slice.time);
    let nw = nw_density(psi, slice.time);
    let axes = (1..=psi.grid().dim())
        .map(|axis| axis_moments(psi, &terno, &nw, axis))
        .collect();
    Ok(MomentReport {
        time: slice.time,
        axes,
        velocity: velocity(psi),
    })
}

/// First moments of `A` on every spatial axis at time `t`.
pub fn first_moments(psi: &MassShellState, slice: &SliceRef) -> Result<Vec<Estimate>> {
    check_native(psi, slice)?;
    let terno = terno_density(psi, slice.time);
    Ok((1..=psi.grid().dim())
        .map(|axis| moment(psi, &terno, 1, axis))
        .collect())
}

/// `J·n'` density of the current generated by `generator` on `slice`.
pub fn current_density(
    psi: &MassShellState,
    generator: &Frame,
    slice: &SliceRef,
) -> Result<Vec<f64>> {
    let slab = fields::slice_field(psi, slice, generator)?;
    let cur = fields::current(&slab, &psi.frame());
    Ok(cur
        .j
        .iter()
        .map(|j| minkowski_dot(j, &cur.normal))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PoincareTransform;
    use crate::grid::GridSpec;
    use crate::state::{make_gaussian, nw_project};

    fn state(dim: usize, n: usize) -> MassShellState {
        let g = GridSpec {
            dim,
            n,
            p_max: 8.0,
            mass: 1.0,
        }
        .build()
        .unwrap();
        make_gaussian(&g, Frame::rest(), [0.3, -0.2, 0.1], 0.6, [0.2, 0.0, -0.1]).unwrap()
    }

    #[test]
    fn whole_slice_is_one() {
        let s = state(3, 32);
        let sl = SliceRef::rest(0.7);
        for p in [
            nw_probability(&s, &sl, &Region::Whole).unwrap(),
            terno_probability(&s, &sl, &Region::Whole).unwrap(),
            terno_probability_energy_form(&s, &sl, &Region::Whole).unwrap(),
        ] {
            assert!((p.value - 1.0).abs() < 1e-9, "{p:?}");
            assert!(!p.clamped);
        }
    }

    #[test]
    fn complement_additivity() {
        let s = state(2, 64);
        let sl = SliceRef::rest(0.0);
        let ball = Region::ball([0.3, 0.1, 0.0], 1.2);
        let a = nw_probability(&s, &sl, &ball).unwrap();
        let b = nw_probability(&s, &sl, &ball.clone().complement()).unwrap();
        assert!((a.value + b.value - 1.0).abs() < 1e-9);
        let a = terno_probability(&s, &sl, &ball).unwrap();
        let b = terno_probability(&s, &sl, &ball.complement()).unwrap();
        assert!((a.value + b.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projected_state_is_localized_for_q_not_a() {
        let s = state(2, 64);
        let sl = SliceRef::rest(0.0);
        let ball = Region::ball([0.0; 3], 1.0);
        let p = nw_project(&s, &ball, &sl).unwrap();
        let q = nw_probability(&p, &sl, &ball).unwrap();
        assert!((q.value - 1.0).abs() < 1e-9, "{q:?}");
        let a = terno_probability(&p, &sl, &ball).unwrap();
        assert!(a.value < 1.0 - a.err_est, "{a:?}");
    }

    #[test]
    fn m_reduces_to_a_when_frames_agree() {
        let s = state(2, 64);
        let sl = SliceRef::rest(0.3);
        let ball = Region::ball([0.2, 0.0, 0.0], 1.0);
        let a = terno_probability(&s, &sl, &ball).unwrap();
        let m = m_povm_probability(&s, &Frame::rest(), &sl, &ball).unwrap();
        assert!((m.current.value - a.value).abs() < 1e-9);
        assert!((m.operator.value - a.value).abs() < 1e-9);
        assert!(!m.flagged);
    }

    #[test]
    fn m_routes_agree_with_moving_generator() {
        let s = state(2, 64);
        let n0 = Frame::from_velocity([0.2, 0.0, 0.0]).unwrap();
        let ball = Region::ball([0.2, 0.0, 0.0], 1.0);
        // native slice: both routes are exact and agree pointwise
        let m = m_povm_probability(&s, &n0, &SliceRef::rest(0.3), &ball).unwrap();
        assert!(m.difference() < 1e-12, "{m:?}");
        // boosted slice: the operator route resamples
        let sl = SliceRef::new(Frame::from_velocity([0.0, 0.3, 0.0]).unwrap(), 0.3);
        let m = m_povm_probability(&s, &n0, &sl, &ball).unwrap();
        assert!(m.difference() <= 3.0 * m.combined_err(), "{m:?}");
        let whole = m_povm_probability(&s, &n0, &sl, &Region::Whole).unwrap();
        assert!((whole.current.value - 1.0).abs() < 1e-6, "{whole:?}");
    }

    #[test]
    fn moments_and_heisenberg() {
        let s = state(3, 32);
        let sl = SliceRef::rest(0.5);
        for axis in 1..=3 {
            let a = first_moment(&s, &sl, axis).unwrap();
            let q = nw_expectation(&s, &sl, axis).unwrap();
            // the small box leaves multiplier tails; 64³ is needed for 1e-6
            assert!(
                (a.value - q.value).abs() <= 3.0 * (a.err_est + q.err_est),
                "{a:?} {q:?}"
            );
            let m2 = second_moment(&s, &sl, axis).unwrap();
            assert!(m2.correction > 0.0);
            assert!(m2.residual() <= 3.0 * m2.err_est + 1e-12, "{m2:?}");
            let h = heisenberg_check(&s, &sl, axis).unwrap();
            assert!(h.rhs >= 0.5);
            assert!(h.lhs >= h.rhs - 3.0 * h.err_est, "{h:?}");
        }
        assert!((first_moment(&s, &sl, 0).unwrap().value - 0.5).abs() < 1e-12);
        let v = velocity(&s);
        assert!(v.iter().map(|x| x * x).sum::<f64>() < 1.0);
    }

    #[test]
    fn translation_covariance_is_exact() {
        let s = state(2, 64);
        let sl = SliceRef::rest(0.0);
        let ball = Region::ball([0.0; 3], 1.0);
        // shifts by whole cells keep the quadrature weights aligned
        let dx = s.grid().position().dx;
        let h = PoincareTransform::translation(crate::geometry::FourVector::new(
            0.0,
            2.0 * dx,
            -dx,
            0.0,
        ));
        let moved = s.apply_poincare(&h).unwrap();
        let (hball, hsl) = ball.transform(&h, &sl);
        let a = terno_probability(&s, &sl, &ball).unwrap();
        let b = terno_probability(&moved, &hsl, &hball).unwrap();
        assert!((a.value - b.value).abs() < 1e-9, "{} {}", a.value, b.value);
    }
}
