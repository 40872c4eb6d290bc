use std::sync::Arc;

use kgpovm_core::observables::{m_povm_current, nw_probability, terno_probability};
use kgpovm_core::*;
use proptest::prelude::*;

fn grid3() -> Arc<MomentumGrid> {
    GridSpec {
        dim: 3,
        n: 32,
        p_max: 8.0,
        mass: 1.0,
    }
    .build()
    .unwrap()
}

fn grid2() -> Arc<MomentumGrid> {
    GridSpec {
        dim: 2,
        n: 32,
        p_max: 8.0,
        mass: 1.0,
    }
    .build()
    .unwrap()
}

fn gaussian(grid: &Arc<MomentumGrid>, c: [f64; 3], w: f64, x: [f64; 3]) -> MassShellState {
    let mut center = [0.0; 3];
    let mut position = [0.0; 3];
    let d = grid.spec().dim;
    center[..d].copy_from_slice(&c[..d]);
    position[..d].copy_from_slice(&x[..d]);
    StateSpec::Gaussian {
        center,
        width: w,
        position,
    }
    .build(grid, Frame::rest())
    .unwrap()
}

fn vec3(r: f64) -> impl Strategy<Value = [f64; 3]> {
    [-r..r, -r..r, -r..r]
}

/// All three observables as functions of the region.
fn probabilities(psi: &MassShellState, gen: &Frame, slice: &SliceRef, r: &Region) -> [f64; 3] {
    [
        nw_probability(psi, slice, r).unwrap().value,
        terno_probability(psi, slice, r).unwrap().value,
        m_povm_current(psi, gen, slice, r).unwrap().value,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eight_sub_boxes_sum_to_the_box(c in vec3(0.5), x in vec3(0.5), lo in vec3(1.5), w in 0.5..0.9f64,
                                      split in [0.2..0.8f64, 0.2..0.8f64, 0.2..0.8f64], t in -0.5..0.5f64) {
        let grid = grid3();
        let psi = gaussian(&grid, c, w, x);
        let gen = Frame::from_velocity([0.2, -0.1, 0.1]).unwrap();
        let slice = SliceRef::rest(t);
        let min = lo.map(|v| v - 1.0);
        let max = [min[0] + 2.0, min[1] + 2.0, min[2] + 2.0];
        let mid: Vec<f64> = (0..3).map(|a| min[a] + split[a] * (max[a] - min[a])).collect();
        let whole = probabilities(&psi, &gen, &slice, &Region::cuboid(min, max));
        let mut sum = [0.0; 3];
        for k in 0..8 {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for ax in 0..3 {
                if k >> ax & 1 == 0 {
                    a[ax] = min[ax];
                    b[ax] = mid[ax];
                } else {
                    a[ax] = mid[ax];
                    b[ax] = max[ax];
                }
            }
            let p = probabilities(&psi, &gen, &slice, &Region::cuboid(a, b));
            for i in 0..3 {
                sum[i] += p[i];
            }
        }
        for i in 0..3 {
            prop_assert!((sum[i] - whole[i]).abs() < 1e-9, "observable {i}: {} vs {}", sum[i], whole[i]);
        }
    }

    #[test]
    fn region_and_complement_sum_to_one(c in vec3(1.0), x in vec3(1.0), center in vec3(1.5),
                                        r in 0.3..2.0f64, w in 0.6..1.2f64) {
        let grid = grid2();
        let psi = gaussian(&grid, c, w, x);
        let gen = Frame::rest();
        let slice = SliceRef::rest(0.3);
        let ball = Region::ball([center[0], center[1], 0.0], r);
        let inside = probabilities(&psi, &gen, &slice, &ball);
        let outside = probabilities(&psi, &gen, &slice, &ball.clone().complement());
        for i in 0..3 {
            prop_assert!((inside[i] + outside[i] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn probabilities_are_monotone_in_the_region(c in vec3(1.0), x in vec3(1.0), center in vec3(1.0),
                                                r in 0.3..1.5f64, grow in 0.0..1.0f64, w in 0.6..1.2f64) {
        let grid = grid2();
        let psi = gaussian(&grid, c, w, x);
        let slice = SliceRef::rest(-0.2);
        let small = Region::ball([center[0], center[1], 0.0], r);
        let big = Region::ball([center[0], center[1], 0.0], r + grow);
        for (f, name) in [(nw_probability as fn(_, _, _) -> _, "Q"), (terno_probability, "A")] {
            let a = f(&psi, &slice, &small).unwrap();
            let b = f(&psi, &slice, &big).unwrap();
            prop_assert!(a.value <= b.value + 3.0 * (a.err_est + b.err_est), "{name}: {} > {}", a.value, b.value);
            prop_assert!(a.value >= -3.0 * a.err_est && b.value <= 1.0 + 3.0 * b.err_est);
        }
    }

    #[test]
    fn inner_product_is_hermitian(c1 in vec3(1.0), c2 in vec3(1.0), x1 in vec3(1.0), x2 in vec3(1.0),
                                  w1 in 0.6..1.2f64, w2 in 0.6..1.2f64) {
        let grid = grid2();
        let a = gaussian(&grid, c1, w1, x1);
        let b = gaussian(&grid, c2, w2, x2);
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-14);
        prop_assert!(ab.norm() <= 1.0 + 1e-12);
        prop_assert!((inner_product(&a, &a).unwrap().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn m_reduces_to_a_in_a_single_frame() {
    let grid = grid2();
    let psi = gaussian(&grid, [0.3, -0.2, 0.0], 0.8, [0.4, 0.1, 0.0]);
    let slice = SliceRef::rest(0.7);
    let ball = Region::ball([0.5, 0.0, 0.0], 1.2);
    let a = terno_probability(&psi, &slice, &ball).unwrap();
    let m = m_povm_current(&psi, &Frame::rest(), &slice, &ball).unwrap();
    assert!(
        (a.value - m.value).abs() < 1e-9,
        "{} vs {}",
        a.value,
        m.value
    );
}
