//! Pointwise causality and conservation of the current, and the flux
//! through light-cone mantles.

use rand::Rng;

use super::*;
use crate::fields::{current, current_divergence, terno_field_generated};
use crate::geometry::minkowski_dot;
use crate::mantle::{mantle_flux as flux_report, MantleBall};

pub(super) fn current_causality(cfg: &HarnessConfig) -> Result<SuiteOutput> {
    let c = &cfg.current_causality;
    let spec = c.grid.unwrap_or(cfg.grid);
    let grid = spec.build()?;
    let ctx = Ctx::new(Suite::CurrentCausality, cfg);
    let tol = cfg.causal_tol;
    let cases = run_cases(c.cases, |i| {
        let mut rng = ctx.rng(i);
        let state = random_state(&mut rng, spec.dim);
        let mut sc = ctx.scenario(i, "random", spec, state);
        let gen = match random_frame(&mut rng, spec.dim, c.max_boost) {
            Ok(g) => g,
            Err(e) => return evaluate(sc, |_, _| Err(e)),
        };
        sc.generator = Some(gen);
        sc.slices = vec![SliceRef::rest(rng.gen_range(-1.0..1.0))];
        evaluate(sc, |sc, rec| {
            let psi = sc.state.build(&grid, sc.state_frame)?;
            let t = sc.slices[0].time;
            let slab = terno_field_generated(&psi, t, &gen);
            let cur = current(&slab, &psi.frame());
            let n = psi.frame().comoving().inverse().apply(&gen.n());
            let scale = cur.j.iter().map(|j| j.scale()).fold(0.0, f64::max);
            let tau = tol * scale;
            let tau2 = tol * scale * scale;
            let mut max_g = f64::NEG_INFINITY;
            let mut min_energy = f64::INFINITY;
            let mut min_density = f64::INFINITY;
            let mut max_time = f64::NEG_INFINITY;
            let mut causal = 0usize;
            for j in &cur.j {
                let g = minkowski_dot(j, j);
                if g <= tau2 {
                    causal += 1;
                }
                max_g = max_g.max(g);
                min_energy = min_energy.min(minkowski_dot(j, &n));
                min_density = min_density.min(minkowski_dot(j, &cur.normal));
                max_time = max_time.max(j.time());
            }
            let fraction = causal as f64 / cur.j.len() as f64;
            let a = anchors::CURRENT_CAUSAL;
            rec.check(Check::new(
                "causal fraction",
                a,
                fraction,
                1.0,
                1.0 - fraction,
                0.0,
                0.0,
            ));
            rec.check(Check::new("g(J,J)", a, max_g, 0.0, max_g, 0.0, tau2));
            rec.check(Check::new(
                "energy density",
                a,
                min_energy,
                0.0,
                -min_energy,
                0.0,
                tau,
            ));
            rec.check(Check::new(
                "slice density",
                a,
                min_density,
                0.0,
                -min_density,
                0.0,
                tau,
            ));
            rec.check(Check::new(
                "past-directed",
                a,
                max_time,
                0.0,
                max_time,
                0.0,
                tau,
            ));
            let div = current_divergence(&psi, t, &gen);
            rec.check(Check::new(
                "conservation",
                a,
                div.max_residual,
                0.0,
                div.relative(),
                0.0,
                c.conservation_tol,
            ));
            rec.value("scale", scale);
            rec.value("tau_c", tau);
            Ok(())
        })
    });
    Ok((cases, vec![]))
}

pub(super) fn mantle_flux(cfg: &HarnessConfig) -> Result<SuiteOutput> {
    let c = &cfg.mantle_flux;
    let spec = c.grid;
    let grid = spec.build()?;
    let ctx = Ctx::new(Suite::MantleFlux, cfg);
    let cases = run_cases(c.cases, |i| {
        let mut rng = ctx.rng(i);
        let state = StateSpec::Gaussian {
            center: rand_vec(&mut rng, spec.dim, 1.0),
            width: rng.gen_range(0.6..1.2),
            position: rand_vec(&mut rng, spec.dim, 0.5),
        };
        let union = i % c.union_every == c.union_every - 1;
        let balls = if union {
            let axis = rng.gen_range(0..spec.dim);
            let off = rng.gen_range(0.6..1.0);
            [-off, off]
                .iter()
                .map(|s| {
                    let mut center = [0.0; 3];
                    center[axis] = *s;
                    MantleBall {
                        center,
                        radius: rng.gen_range(0.5..1.0),
                    }
                })
                .collect()
        } else {
            vec![MantleBall {
                center: rand_vec(&mut rng, spec.dim, 0.8),
                radius: rng.gen_range(0.5..1.5),
            }]
        };
        let t1 = rng.gen_range(-0.5..0.5);
        let dt = rng.gen_range(0.3..1.5);
        let t2 = if i % 2 == 0 { t1 + dt } else { t1 - dt };
        let mut sc = ctx.scenario(i, if union { "union" } else { "ball" }, spec, state);
        sc.slices = vec![SliceRef::rest(t1), SliceRef::rest(t2)];
        sc.mantle = Some(MantleSpec {
            balls,
            t1,
            t2,
            n_u: c.n_u,
            n_theta: c.n_theta,
            n_phi: c.n_phi,
        });
        evaluate(sc, |sc, rec| {
            let psi = sc.state.build(&grid, sc.state_frame)?;
            let m = sc.mantle.as_ref().expect("mantle set");
            let r = flux_report(&psi, m)?;
            let a = anchors::MANTLE;
            rec.check(Check::le(
                "flux non-negative",
                a,
                -r.flux,
                0.0,
                r.flux_err,
                ctx.mult,
            ));
            rec.check(Check::new(
                "balance",
                a,
                r.p_target.value - r.p_source.value,
                r.flux,
                r.balance_residual,
                r.combined_err,
                ctx.mult * r.combined_err,
            ));
            let cz = r.causality;
            rec.check(Check::new(
                "pointwise J^v",
                a,
                cz.fraction,
                1.0,
                1.0 - cz.fraction,
                0.0,
                0.0,
            ));
            rec.check(
                Check::new(
                    "strict negativity",
                    a,
                    cz.strict_fraction,
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                )
                .expecting(Expect::Report),
            );
            rec.value("flux", r.flux);
            rec.value("flux_err", r.flux_err);
            rec.value("p_source", r.p_source.value);
            rec.value("p_target", r.p_target.value);
            rec.value("max_jv", cz.max_jw);
            rec.value("delta", cz.delta);
            rec.value("strict_fraction", cz.strict_fraction);
            Ok(())
        })
    });
    let notes = vec![
        "strict negativity of J^v is reported only; on a finite grid every state has compact momentum support".into(),
    ];
    Ok((cases, notes))
}
