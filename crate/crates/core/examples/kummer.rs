//! Local and global heights of the Kummer motive of a rational number.

use heightlab::hodge::HodgeContext;
use heightlab::motives::{global_height_wd, kummer_motive};
use heightlab::qlinalg::parse_rational;

fn main() -> Result<(), heightlab::HeightError> {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "36/25".into());
    let a = parse_rational(&arg).ok_or_else(|| heightlab::HeightError::Parse(format!("not a rational: {arg}")))?;
    let m = kummer_motive(&a)?;
    let (total, rows) = global_height_wd(&m, 0, 2, &HodgeContext::default())?;
    for r in &rows {
        println!("{:<6} {}", r.place, r.value);
    }
    println!("total  {total}");
    Ok(())
}
