//! A state localized in a ball by Newton-Wigner, followed in time: its NW
//! probability leaks out of the light cone of the ball, its stress-energy
//! probability does not.

use kgpovm_core::observables::{nw_probability, terno_probability};
use kgpovm_core::state::BumpProfile;
use kgpovm_core::{cone_expand, Frame, GridSpec, Region, SliceRef, StateSpec};

fn main() -> kgpovm_core::Result<()> {
    let grid = GridSpec {
        dim: 1,
        n: 4096,
        p_max: 64.0,
        mass: 1.0,
    }
    .build()?;
    let ball = Region::ball([0.0; 3], 1.0);
    let psi = StateSpec::NwProjected {
        base: Box::new(StateSpec::AlmostLocalized {
            profile: BumpProfile {
                center: [0.0; 3],
                radius: 0.9,
            },
            shift: [1.0, 0.0, 0.0],
            j: 0,
        }),
        region: ball.clone(),
        time: 0.0,
    }
    .build(&grid, Frame::rest())?;
    let start = SliceRef::rest(0.0);
    println!(
        "{:>5} {:>12} {:>10} {:>12} {:>10}",
        "t", "Q(cone)", "±", "A(cone)", "±"
    );
    for t in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let slice = SliceRef::rest(t);
        let cone = cone_expand(&ball, &start, &slice)?;
        let q = nw_probability(&psi, &slice, &cone)?;
        let a = terno_probability(&psi, &slice, &cone)?;
        println!(
            "{t:>5} {:>12.8} {:>10.1e} {:>12.8} {:>10.1e}",
            q.value, q.err_est, a.value, a.err_est
        );
    }
    Ok(())
}
