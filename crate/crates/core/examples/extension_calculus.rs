//! Direct sums, duals and Tate twists of Kummer motives, and how the
//! heights of the pieces combine.

use heightlab::hodge::HodgeContext;
use heightlab::motives::{direct_sum, dual, global_height_wd, kummer_motive, same_realizations, tate_twist};
use heightlab::qlinalg::q;

fn main() -> Result<(), heightlab::HeightError> {
    let ctx = HodgeContext::default();
    let a = kummer_motive(&q(4))?;
    let b = kummer_motive(&q(9))?;
    let h = |m| global_height_wd(m, 0, 2, &ctx).map(|(v, _)| v);
    println!("h(K4)        = {}", h(&a)?);
    println!("h(K9)        = {}", h(&b)?);
    // Per place the squares add.
    println!("h(K4 + K9)   = {}", h(&direct_sum(&a, &b)?)?);
    let d = dual(&a)?;
    println!("h(K4 dual)   = {}", global_height_wd(&d, 2, 2, &ctx)?.0);
    println!("dual dual    = K4: {}", same_realizations(&dual(&d)?, &a));
    let t = tate_twist(&a, 1)?;
    println!("K4(1) type   {:?}", t.type_signature());
    println!("h(K4(1))     = {}", global_height_wd(&t, -2, 2, &ctx)?.0);
    Ok(())
}
