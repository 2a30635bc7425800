//! Reduction of an adjacent-weight height (`d = 1`) to a Kummer-type
//! height (`d = 2`) for an extension of `Z(0)` by a weight -1 piece.

use heightlab::fixtures::symplectic_extension;
use heightlab::hodge::HodgeContext;
use heightlab::motives::{beilinson_bloch_reduction, BbLift};
use heightlab::qlinalg::{q, Q};

fn main() -> Result<(), heightlab::HeightError> {
    let ctx = HodgeContext::default();
    let half = Q::new(1.into(), 2.into());
    // Finite monodromy vanishes, so only the real place contributes.
    let m = symplectic_extension([q(0), q(0)], (q(0), q(0)), q(0))?;
    for y in [(q(0), half.clone()), (Q::new((-7).into(), 3.into()), half.clone()), (q(0), q(0))] {
        let lift = BbLift { alpha: vec![], y: vec![("inf".into(), y.0.clone(), y.1.clone())] };
        let red = beilinson_bloch_reduction(&m, 0, None, &lift, &ctx)?;
        println!("y = {} + {} i: R has type {:?}, h = {}", y.0, y.1, red.r.type_signature(), red.height);
    }
    // With monodromy on H the finite place enters too: here
    // h_5 = |x0^2 / nh - alpha| log 5.
    let m = symplectic_extension([q(3), q(0)], (Q::new(1.into(), 3.into()), Q::new(2.into(), 5.into())), q(2))?;
    let lift = BbLift { alpha: vec![("5".into(), q(1))], y: vec![] };
    let red = beilinson_bloch_reduction(&m, 0, None, &lift, &ctx)?;
    for r in &red.rows {
        println!("  {:<4} {}", r.place, r.value);
    }
    println!("h = {}", red.height);
    Ok(())
}
