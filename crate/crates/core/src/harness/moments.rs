//! Moments of `A`, the corrected uncertainty relation, the mean velocity,
//! and the almost-localized sequence.

use rand::Rng;

use super::*;
use crate::geometry::{Lorentz, PoincareTransform};
use crate::observables::{
    first_moment, first_moments, heisenberg_check, moment_report, nw_expectation, nw_probability,
    second_moment, terno_probability, velocity,
};
use crate::state::BumpProfile;

pub(super) fn moments(cfg: &HarnessConfig) -> Result<SuiteOutput> {
    let c = &cfg.moments;
    let spec = c.grid.unwrap_or(cfg.grid);
    let grid = spec.build()?;
    let ctx = Ctx::new(Suite::Moments, cfg);
    let mut cases = run_cases(c.cases, |i| {
        let mut rng = ctx.rng(i);
        let state = if i % 4 == 3 {
            StateSpec::Superposition {
                terms: vec![
                    (1.0, 0.0, random_gaussian(&mut rng, spec.dim)),
                    (
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        random_gaussian(&mut rng, spec.dim),
                    ),
                ],
            }
        } else {
            random_gaussian(&mut rng, spec.dim)
        };
        let mut sc = ctx.scenario(i, "random", spec, state);
        sc.slices = vec![SliceRef::rest(rng.gen_range(-1.0..1.0))];
        sc.params.insert("dt".into(), c.ehrenfest_dt);
        if i < c.boosted_copies {
            let mut v = [0.0; 3];
            v[rng.gen_range(0..spec.dim)] = rng.gen_range(-c.max_boost..c.max_boost);
            sc.params.insert("vx".into(), v[0]);
            sc.params.insert("vy".into(), v[1]);
            sc.params.insert("vz".into(), v[2]);
        }
        evaluate(sc, |sc, rec| random_case(sc, rec, &grid, c, ctx.mult))
    });
    let base = c.cases;
    cases.push(evaluate(
        ctx.scenario(
            base,
            "tight-packet",
            c.tight_grid,
            StateSpec::Gaussian {
                center: [0.0; 3],
                width: c.tight_width,
                position: [0.0; 3],
            },
        ),
        |sc, rec| {
            let g = sc.grid.build()?;
            let psi = sc.state.build(&g, sc.state_frame)?;
            let m = sc.grid.mass;
            let s = second_moment(&psi, &SliceRef::rest(0.0), 1)?;
            rec.check(Check::within(
                "tight correction",
                anchors::SECOND_MOMENT,
                s.correction,
                0.5 / (m * m),
                s.err_est,
                c.tight_tolerance,
            ));
            rec.check(Check::le(
                "second-moment residual",
                anchors::SECOND_MOMENT,
                s.residual(),
                0.0,
                s.err_est,
                ctx.mult,
            ));
            rec.value("correction", s.correction);
            Ok(())
        },
    ));
    cases.push(evaluate(
        ctx.scenario(
            base + 1,
            "mass-sweep",
            c.sweep_grid,
            StateSpec::Gaussian {
                center: [0.0; 3],
                width: 1.0,
                position: [0.0; 3],
            },
        ),
        |sc, rec| mass_sweep(sc, rec, c, ctx.mult),
    ));
    Ok((cases, vec![]))
}

fn random_case(
    sc: &Scenario,
    rec: &mut CaseRecord,
    grid: &std::sync::Arc<crate::grid::MomentumGrid>,
    c: &MomentsConfig,
    mult: f64,
) -> Result<()> {
    let psi = sc.state.build(grid, sc.state_frame)?;
    let slice = sc.slices[0];
    let report = moment_report(&psi, &slice)?;
    let t0 = first_moment(&psi, &slice, 0)?;
    let n0 = nw_expectation(&psi, &slice, 0)?;
    rec.check(Check::within(
        "first moment t",
        anchors::FIRST_MOMENT,
        t0.value,
        n0.value,
        t0.err_est,
        c.width_tolerance,
    ));
    for (k, ax) in report.axes.iter().enumerate() {
        let axis = ["x", "y", "z"][k];
        let width = (ax.second.nw_second - ax.nw_first.value.powi(2))
            .max(0.0)
            .sqrt();
        rec.check(Check::within(
            format!("first moment {axis}"),
            anchors::FIRST_MOMENT,
            ax.first.value,
            ax.nw_first.value,
            ax.first.err_est + ax.nw_first.err_est,
            c.width_tolerance * width,
        ));
        rec.check(Check::le(
            format!("second moment {axis}"),
            anchors::SECOND_MOMENT,
            ax.second.residual(),
            0.0,
            ax.second.err_est,
            mult,
        ));
        rec.check(Check::below(
            format!("correction positive {axis}"),
            anchors::SECOND_MOMENT,
            0.0,
            ax.second.correction,
        ));
        let h = ax.heisenberg;
        rec.check(Check::le(
            format!("heisenberg {axis}"),
            anchors::HEISENBERG,
            h.rhs,
            h.lhs,
            h.err_est,
            mult,
        ));
        rec.value(&format!("width_{axis}"), width);
        rec.value(&format!("heisenberg_slack_{axis}"), h.slack());
    }
    // ⟨X⟩ is linear in t, so the central difference is exact up to roundoff
    let dt = sc.param("dt");
    let plus = first_moments(&psi, &SliceRef::rest(slice.time + dt))?;
    let minus = first_moments(&psi, &SliceRef::rest(slice.time - dt))?;
    for (k, v) in report.velocity.iter().enumerate() {
        let fd = (plus[k].value - minus[k].value) / (2.0 * dt);
        let err = (plus[k].err_est + minus[k].err_est) / (2.0 * dt);
        let d = (fd - v).abs();
        rec.check(Check::new(
            format!("ehrenfest {}", ["x", "y", "z"][k]),
            anchors::EHRENFEST,
            fd,
            *v,
            d - dt * dt,
            err,
            mult * err,
        ));
    }
    let v2: f64 = report.velocity.iter().map(|v| v * v).sum();
    rec.check(Check::below("subluminal", anchors::WORLDLINE, v2, 1.0));
    rec.value("v2", v2);
    if sc.params.contains_key("vx") {
        let v = [sc.param("vx"), sc.param("vy"), sc.param("vz")];
        let h = PoincareTransform::lorentz(Lorentz::boost(v)?)?;
        let moved = psi.apply_poincare(&h)?;
        let v2b: f64 = velocity(&moved).iter().map(|v| v * v).sum();
        rec.check(Check::below(
            "subluminal boosted",
            anchors::WORLDLINE,
            v2b,
            1.0,
        ));
        rec.value("v2_boosted", v2b);
    }
    Ok(())
}

/// Gaussians at rest for increasing mass: the bound tends to 1/2 and the
/// Newton-Wigner spread obeys the ordinary relation.
fn mass_sweep(sc: &Scenario, rec: &mut CaseRecord, c: &MomentsConfig, mult: f64) -> Result<()> {
    let mut prev: Option<f64> = None;
    for (i, m) in c.masses.iter().enumerate() {
        let g = GridSpec {
            mass: *m,
            ..sc.grid
        }
        .build()?;
        let psi = sc.state.build(&g, sc.state_frame)?;
        let h = heisenberg_check(&psi, &SliceRef::rest(0.0), 1)?;
        let tag = format!("m={m}");
        rec.check(Check::le(
            format!("heisenberg {tag}"),
            anchors::HEISENBERG,
            h.rhs,
            h.lhs,
            h.err_est,
            mult,
        ));
        rec.check(Check::le(
            format!("nw heisenberg {tag}"),
            anchors::HEISENBERG,
            0.5,
            h.nw_lhs,
            h.err_est,
            mult,
        ));
        if let Some(p) = prev {
            rec.check(Check::le(
                format!("bound decreasing {tag}"),
                anchors::HEISENBERG,
                h.rhs,
                p,
                0.0,
                mult,
            ));
        }
        if i + 1 == c.masses.len() {
            rec.check(Check::within(
                format!("heavy limit {tag}"),
                anchors::HEISENBERG,
                h.rhs,
                0.5,
                h.err_est,
                c.heavy_tolerance,
            ));
        }
        rec.value(&format!("rhs_{tag}"), h.rhs);
        rec.value(&format!("lhs_{tag}"), h.lhs);
        prev = Some(h.rhs);
    }
    Ok(())
}

/// One case per step of `ψ_j = √E χ̂(· - j a)`; monotonicity is checked
/// against the previous step.
pub(super) fn almost_localized(cfg: &HarnessConfig) -> Result<SuiteOutput> {
    let c = &cfg.almost_localized;
    let grid = c.grid.build()?;
    let ctx = Ctx::new(Suite::AlmostLocalized, cfg);
    let profile = BumpProfile {
        center: [0.0; 3],
        radius: c.radius,
    };
    let region = Region::ball([0.0; 3], c.radius);
    let slice = SliceRef::rest(0.0);
    let mut cases: Vec<CaseRecord> = run_cases(c.steps.len(), |i| {
        let state = StateSpec::AlmostLocalized {
            profile,
            shift: c.shift,
            j: c.steps[i],
        };
        let mut sc = ctx.scenario(i, &format!("j={}", c.steps[i]), c.grid, state);
        sc.region = Some(region.clone());
        sc.slices = vec![slice];
        evaluate(sc, |sc, rec| {
            let psi = sc.state.build(&grid, sc.state_frame)?;
            let a = terno_probability(&psi, &slice, &region)?;
            let q = nw_probability(&psi, &slice, &region)?;
            rec.check(Check::close(
                "NW localized",
                anchors::ALMOST_LOCALIZED,
                q.value,
                1.0,
                q.err_est,
                ctx.mult,
            ));
            rec.value("A", a.value);
            rec.value("A_err", a.err_est);
            rec.value("Q", q.value);
            rec.value("correction", q.value - a.value);
            rec.value("correction_err", a.err_est + q.err_est);
            Ok(())
        })
    });
    let get = |r: &CaseRecord, k: &str| r.values.get(k).copied();
    for i in 1..cases.len() {
        let (Some(prev), Some(prev_err)) = (
            get(&cases[i - 1], "correction"),
            get(&cases[i - 1], "correction_err"),
        ) else {
            continue;
        };
        let (Some(cur), Some(err)) = (
            get(&cases[i], "correction"),
            get(&cases[i], "correction_err"),
        ) else {
            continue;
        };
        cases[i].check(Check::le(
            "correction monotone",
            anchors::ALMOST_LOCALIZED,
            cur,
            prev,
            err + prev_err,
            ctx.mult,
        ));
    }
    let n = cases.len();
    if n >= 2 {
        if let (Some(a0), Some(c0), Some(al), Some(cl)) = (
            get(&cases[0], "A"),
            get(&cases[0], "correction"),
            get(&cases[n - 1], "A"),
            get(&cases[n - 1], "correction"),
        ) {
            let last = &mut cases[n - 1];
            last.check(Check::below(
                "final above threshold",
                anchors::ALMOST_LOCALIZED,
                c.threshold,
                al,
            ));
            last.check(Check::below(
                "final exceeds first",
                anchors::ALMOST_LOCALIZED,
                a0,
                al,
            ));
            last.check(Check::below(
                "correction shrinks",
                anchors::ALMOST_LOCALIZED,
                cl,
                c0,
            ));
        }
    }
    Ok((cases, vec![]))
}
