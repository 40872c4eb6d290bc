use kgpovm_core::geometry::time_extent;
use kgpovm_core::*;
use proptest::prelude::*;

fn velocity(max: f64) -> impl Strategy<Value = [f64; 3]> {
    ([-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64], 0.0..max).prop_filter_map(
        "zero direction",
        |(d, s)| {
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            (n > 1e-3).then(|| d.map(|x| x / n * s))
        },
    )
}

proptest! {
    #[test]
    fn frames_are_unit_timelike_and_future(v in velocity(0.95)) {
        let f = Frame::from_velocity(v).unwrap();
        let n = f.n();
        prop_assert!((minkowski_dot(&n, &n) + 1.0).abs() < 1e-12);
        prop_assert!(n.time() > 0.0);
        let back = f.velocity();
        for a in 0..3 {
            prop_assert!((back[a] - v[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn boosts_preserve_the_metric(v in velocity(0.9), w in velocity(0.9)) {
        let a = Lorentz::boost(v).unwrap();
        let b = Lorentz::boost(w).unwrap();
        let ab = a.compose(&b);
        prop_assert!(ab.metric_defect() < 1e-10);
        prop_assert!(ab.is_orthochronous());
        prop_assert!(ab.compose(&ab.inverse()).max_abs_diff(&Lorentz::IDENTITY) < 1e-10);
    }

    #[test]
    fn comoving_map_sends_rest_to_frame(v in velocity(0.9)) {
        let f = Frame::from_velocity(v).unwrap();
        let rest = Frame::rest().n();
        let mapped = f.comoving().apply(&rest);
        prop_assert!(mapped.max_abs_diff(&f.n()) < 1e-12);
    }

    #[test]
    fn cone_expansion_contains_the_shrunk_ball(c in [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64],
                                               r in 0.2..1.5f64, dt in 0.0..2.0f64, t in -1.0..1.0f64) {
        let src = SliceRef::rest(t);
        let dst = SliceRef::rest(t + dt);
        let cone = cone_expand(&Region::ball(c, r), &src, &dst).unwrap();
        // within one frame the expansion of a ball is the ball grown by dt
        prop_assert!(cone.contains(c));
        let edge = [c[0] + r + dt - 1e-9, c[1], c[2]];
        let out = [c[0] + r + dt + 1e-6, c[1], c[2]];
        prop_assert!(cone.contains(edge));
        prop_assert!(!cone.contains(out));
    }

    #[test]
    fn time_extent_of_a_ball_brackets_its_center(v in velocity(0.6), c in [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64],
                                                 r in 0.2..1.5f64, t in -1.0..1.0f64) {
        let f = Frame::from_velocity(v).unwrap();
        let slice = SliceRef::new(Frame::rest(), t);
        let (lo, hi) = time_extent(&Region::ball(c, r), &slice, &f).unwrap();
        let (tc, _) = SliceRef::new(f, 0.0).coordinates_of(&slice.event(c));
        prop_assert!(lo <= tc + 1e-12 && tc <= hi + 1e-12);
        let gamma = 1.0 / (1.0 - (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).sqrt();
        let speed = (gamma * gamma - 1.0).sqrt();
        prop_assert!((hi - lo - 2.0 * r * speed).abs() < 1e-9);
    }
}
