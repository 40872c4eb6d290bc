//! Closed-form values the observables must reproduce.

use kgpovm_core::fields::nw_amplitude;
use kgpovm_core::observables::{
    first_moment, m_povm_probability, nw_expectation, nw_probability, terno_probability,
};
use kgpovm_core::state::{nw_project, BumpProfile};
use kgpovm_core::*;

fn line(n: usize, p_max: f64, mass: f64) -> std::sync::Arc<MomentumGrid> {
    GridSpec {
        dim: 1,
        n,
        p_max,
        mass,
    }
    .build()
    .unwrap()
}

#[test]
fn plancherel_on_every_slice() {
    let g = line(1024, 8.0, 1.0);
    let psi = StateSpec::Gaussian {
        center: [0.7, 0.0, 0.0],
        width: 0.9,
        position: [-1.0, 0.0, 0.0],
    }
    .build(&g, Frame::rest())
    .unwrap();
    for t in [-3.0, 0.0, 0.5, 4.0] {
        assert!((nw_amplitude(&psi, t).norm_sqr() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn nw_projection_is_localized_for_q_only() {
    let g = line(4096, 64.0, 1.0);
    let ball = Region::ball([0.0; 3], 1.0);
    let base = StateSpec::Gaussian {
        center: [0.0; 3],
        width: 2.0,
        position: [0.3, 0.0, 0.0],
    }
    .build(&g, Frame::rest())
    .unwrap();
    let psi = nw_project(&base, &ball, &SliceRef::rest(0.0)).unwrap();
    let q = nw_probability(&psi, &SliceRef::rest(0.0), &ball).unwrap();
    assert!((q.value - 1.0).abs() < 1e-9, "{}", q.value);
    // A is a smeared version of Q, so some probability leaves the ball
    let a = terno_probability(&psi, &SliceRef::rest(0.0), &ball).unwrap();
    assert!(
        a.value + 3.0 * a.err_est < 1.0,
        "{} ± {}",
        a.value,
        a.err_est
    );
}

#[test]
fn gaussian_at_rest_has_its_centre_as_mean_position() {
    let g = line(1024, 8.0, 1.0);
    let psi = StateSpec::Gaussian {
        center: [0.0; 3],
        width: 0.8,
        position: [1.25, 0.0, 0.0],
    }
    .build(&g, Frame::rest())
    .unwrap();
    let s = SliceRef::rest(0.0);
    let x = first_moment(&psi, &s, 1).unwrap();
    let nw = nw_expectation(&psi, &s, 1).unwrap();
    assert!((x.value - 1.25).abs() < 1e-8, "{}", x.value);
    assert!((nw.value - 1.25).abs() < 1e-8, "{}", nw.value);
}

#[test]
fn m_is_normalized_on_boosted_whole_slices() {
    let g = GridSpec {
        dim: 2,
        n: 64,
        p_max: 8.0,
        mass: 1.0,
    }
    .build()
    .unwrap();
    let psi = StateSpec::Gaussian {
        center: [0.2, -0.3, 0.0],
        width: 0.7,
        position: [0.5, 0.0, 0.0],
    }
    .build(&g, Frame::rest())
    .unwrap();
    let gen = Frame::from_velocity([0.1, 0.3, 0.0]).unwrap();
    let slice = SliceRef::new(Frame::from_velocity([0.4, 0.0, 0.0]).unwrap(), 0.2);
    let m = m_povm_probability(&psi, &gen, &slice, &Region::Whole).unwrap();
    assert!((m.current.value - 1.0).abs() < 1e-6, "{}", m.current.value);
    assert!(
        (m.operator.value - 1.0).abs() < 1e-6,
        "{}",
        m.operator.value
    );
}

#[test]
fn almost_localized_sequence_concentrates_a() {
    let g = line(4096, 64.0, 1.0);
    let ball = Region::ball([0.0; 3], 1.0);
    let s = SliceRef::rest(0.0);
    let profile = BumpProfile {
        center: [0.0; 3],
        radius: 1.0,
    };
    let a = |j| {
        let psi = StateSpec::AlmostLocalized {
            profile,
            shift: [1.0, 0.0, 0.0],
            j,
        }
        .build(&g, Frame::rest())
        .unwrap();
        terno_probability(&psi, &s, &ball).unwrap().value
    };
    let (a0, a16) = (a(0), a(16));
    assert!(a16 > 0.95 && a16 > a0, "{a0} -> {a16}");
}
