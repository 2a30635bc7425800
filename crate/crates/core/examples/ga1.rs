//! Heights along a Kummer family against the naive height of the
//! parameter: the fitted slope approaches the geometric height.

use heightlab::experiments::{ga1_experiment, ExperimentConfig, Sweep};
use heightlab::hodge::HodgeContext;
use heightlab::poly::RatFn;

fn main() -> Result<(), heightlab::HeightError> {
    let family = std::env::args().nth(1).unwrap_or_else(|| "T*(T-1)^2".into());
    let cfg = ExperimentConfig::new(RatFn::parse(&family)?)
        .sweep(&Sweep::Farey(20))?
        .sweep(&"large:200:10000:1000000:1".parse()?)?;
    let fit = ga1_experiment(&cfg, 0, 2, &HodgeContext::default())?;
    for r in fit.rows.iter().step_by(40) {
        println!("t = {:<16} h(t) = {:>10.4}  h(M_t) = {:>10.4}", r.t.to_string(), r.h_t.eval().to_f64(), r.h_m.to_f64());
    }
    println!("samples     {}", fit.sample_count);
    println!("geometric   {}", fit.geometric);
    println!("slope       {:.4}", fit.slope);
    println!("band        [{:.4}, {:.4}]", fit.min_residual, fit.max_residual);
    Ok(())
}
