//! Local heights near a degeneration point: `h_v(M_t) = g_x · h_{x,v}(t)`
//! along `t → x` in the `v`-adic or real topology. At 5 the residuals are
//! exact zeros; at the real place the unit factor `T - 1` leaves a residual
//! that decays like `|t|`.

use heightlab::experiments::{ga2_experiment, BasePoint, ExperimentConfig, LocalPlace, Sweep};
use heightlab::hodge::HodgeContext;
use heightlab::poly::RatFn;
use heightlab::qlinalg::q;

fn main() -> Result<(), heightlab::HeightError> {
    for place in [LocalPlace::Prime(5u32.into()), LocalPlace::Real] {
        let mut cfg = ExperimentConfig::new(RatFn::parse("T^2*(T-1)")?);
        cfg.place = Some(place);
        cfg.base = Some(BasePoint::Finite(q(0)));
        let res = ga2_experiment(&cfg.sweep(&Sweep::Converge(5))?, 0, 2, &HodgeContext::default())?;
        println!("place {}, base {}, geometric local height {}", res.place, res.base.label(), res.geometric_local);
        for r in &res.rows {
            println!("  t = {:<12} local {:<24} h_xv {:<12} residual {}", r.t.to_string(), r.local.to_string(), r.h_xv.to_string(), r.residual);
        }
        println!("  residuals vanish: {}", res.residuals_vanish());
    }
    Ok(())
}
