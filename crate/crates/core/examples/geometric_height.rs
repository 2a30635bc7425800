//! Geometric heights of Kummer families over the projective line: each
//! zero or pole of order `k` contributes `|k|`.

use heightlab::geoheight::global_geometric_height;
use heightlab::motives::kummer_variation;
use heightlab::poly::RatFn;

fn main() -> Result<(), heightlab::HeightError> {
    for family in ["T", "T*(T-1)^2", "(T^2-2)/(T+1)^3", "7"] {
        let a = RatFn::parse(family)?;
        let gv = kummer_variation(&a)?;
        let g = global_geometric_height(&gv, 0, 2)?;
        println!("a = {a}");
        for (label, degree, h) in &g.terms {
            println!("  {label:<12} degree {degree}  local {}", h.value().to_decimal(6));
        }
        println!("  total {}", g.exact.map_or_else(|| g.value.to_decimal(12), |x| x.to_string()));
    }
    Ok(())
}
