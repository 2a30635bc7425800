//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Criteria carry their own runtime budgets.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use heightlab::arith::LogLinear;
use heightlab::experiments::{ga1_experiment, ga2_experiment, BasePoint, ExperimentConfig, LocalPlace, Sweep};
use heightlab::fixtures::{
    bigraded_fixture, polarized_fixture, random_compatible_pair, random_mhs, symplectic_extension, FixtureShape,
    MhsShape,
};
use heightlab::geoheight::{local_height_of, local_radicand, pure_geometric_height};
use heightlab::hodge::{archimedean_height, delta_splitting, max_abs, HodgeContext, ZetaTable};
use heightlab::monodromy::{
    hom_filtration_check, relative_monodromy_filtration, verify_rmf_axioms, GradedSplitting, NbarContext,
    NilpotentMap, SplittingFamily,
};
use heightlab::motives::{
    archimedean_place_height, beilinson_bloch_reduction, direct_sum, finite_local_height, kummer_motive, BbLift,
};
use heightlab::numeric::{with_precision, ComplexScalar, Real};
use heightlab::poly::RatFn;
use heightlab::qlinalg::{q, Filtration, Matrix, Scalar, Subspace, Tol, Q};
use heightlab::HeightError;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn qq(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Trial division; independent of the library's factorization.
fn prime_orders(a: &Q) -> Vec<(u64, i64)> {
    let split = |mut n: u64, sign: i64, out: &mut Vec<(u64, i64)>| {
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, sign * e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, sign));
        }
    };
    let num: u64 = a.numer().magnitude().try_into().unwrap();
    let den: u64 = a.denom().magnitude().try_into().unwrap();
    let mut out = Vec::new();
    split(num, 1, &mut out);
    split(den, -1, &mut out);
    out.sort();
    out
}

fn kummer_oracle() -> Check {
    let ctx = HodgeContext::default();
    let mut checked = 0;
    for a in [q(4), qq(5, 3), q(7), qq(1, 2), qq(36, 25)] {
        let m = kummer_motive(&a).map_err(err)?;
        let orders = prime_orders(&a);
        ensure(m.finite_places().len() == orders.len(), || format!("a = {a}: wrong number of finite places"))?;
        for (p, ord) in orders {
            let v = m
                .finite_places()
                .iter()
                .find(|v| v.residue_norm == BigUint::from(p))
                .ok_or_else(|| format!("a = {a}: no place at {p}"))?;
            let h = finite_local_height(&m, v, 0, 2).map_err(err)?;
            let expect = LogLinear::log_int(&BigUint::from(p), &q(ord.abs()));
            ensure(h.exact.as_ref() == Some(&expect), || format!("a = {a} at {p}: {h} vs {expect}"))?;
            checked += 1;
        }
        let v = &m.arch_places()[0];
        let h = archimedean_place_height(&m, v, 0, 2, &ctx).map_err(err)?.to_f64();
        let af = a.numer().to_string().parse::<f64>().unwrap() / a.denom().to_string().parse::<f64>().unwrap();
        let expect = af.abs().ln().abs();
        ensure((h - expect).abs() < 1e-12, || format!("a = {a} at inf: {h} vs {expect}"))?;
        checked += 1;
    }
    Ok(format!("{checked} local heights"))
}

fn line(n: usize, i: usize) -> Subspace<Q> {
    let v: Vec<Q> = (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect();
    Subspace::span(&[v], n, Tol::Exact)
}

fn rmf_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut existing, mut absent) = (0, 0);
    let mut cases: Vec<(Filtration<Q>, NilpotentMap, Option<Filtration<Q>>)> = Vec::new();
    for i in 0..150 {
        let shape = FixtureShape { max_dim: 6, exact_degree: i % 3 != 0, scramble: i % 5 != 0, ..Default::default() };
        let fx = bigraded_fixture(&mut rng, shape);
        cases.push((fx.w, fx.n, Some(fx.wp)));
    }
    for _ in 0..100 {
        let (w, n) = random_compatible_pair(&mut rng, 6);
        cases.push((w, n, None));
    }
    for (w, n, known) in &cases {
        match relative_monodromy_filtration(n, w) {
            Ok(wp) => {
                verify_rmf_axioms(n, w, &wp)?;
                if let Some(k) = known {
                    ensure(k == &wp, || "W' differs from the planted filtration".into())?;
                }
                ensure(hom_filtration_check(n, w, &wp).map_err(err)?, || "Hom filtration check failed".into())?;
                existing += 1;
            }
            Err(HeightError::NonExistence(_)) => {
                ensure(known.is_none(), || "planted W' reported missing".into())?;
                absent += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    let w = Filtration::new(2, vec![(-1, line(2, 0)), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).map_err(err)?;
    let mut m = Matrix::<Q>::zeros(2, 2);
    m[(0, 1)] = q(1);
    let n = NilpotentMap::new(m).map_err(err)?;
    ensure(matches!(relative_monodromy_filtration(&n, &w), Err(HeightError::NonExistence(_))), || {
        "adjacent-weight fixture did not report NonExistence".into()
    })?;
    Ok(format!("{} fixtures: {existing} with W', {absent} without; rank-2 fixture NonExistence", cases.len()))
}

fn nbar_independence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut fixtures = 0;
    let mut distinct = 0;
    for _ in 0..2000 {
        if fixtures == 12 {
            break;
        }
        let fx = bigraded_fixture(&mut rng, FixtureShape::default());
        let family = SplittingFamily::new(&fx.n, &fx.w, &fx.wp).map_err(err)?;
        let ws = fx.w.weights();
        let span = ws.last().unwrap() - ws.first().unwrap();
        if family.dimension() == 0 || span < 2 {
            continue;
        }
        fixtures += 1;
        let base = family.particular();
        let ctx = NbarContext::new(&fx.n, &fx.w, &fx.wp).map_err(err)?;
        let classes = |u: &GradedSplitting| -> Result<Vec<Vec<Q>>, HeightError> {
            (-span..=-2).map(|k| ctx.class(k, u)).collect()
        };
        let reference = classes(&base).map_err(err)?;
        for _ in 0..20 {
            let u = family.random(&mut rng, 3);
            if u.basis() != base.basis() {
                distinct += 1;
            }
            let c = classes(&u).map_err(err)?;
            ensure(c == reference, || format!("N̄ changed with the splitting: {c:?} vs {reference:?}"))?;
        }
    }
    ensure(fixtures >= 10, || format!("only {fixtures} fixtures with free splittings"))?;
    Ok(format!("{fixtures} fixtures x 20 splittings ({distinct} distinct from the base) give identical N̄"))
}

fn positivity_homogeneity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut radicands = 0;
    let mut scaled = 0;
    let tol = Real::from_f64(1e-12);
    for _ in 0..120 {
        let (data, fx) = polarized_fixture(&mut rng, 6);
        let ws = fx.w.weights();
        for &w in &ws {
            for &lo in ws.iter().filter(|&&k| k <= w - 2) {
                let d = w - lo;
                let r = local_radicand(&data, &fx.n, &fx.wp, w, d).map_err(err)?;
                ensure(r >= Q::zero(), || format!("negative radicand {r} at (w, d) = ({w}, {d})"))?;
                radicands += 1;
                let h = local_height_of(&data, &fx.n, &fx.wp, w, d).map_err(err)?.value();
                for c in [q(2), q(3), qq(1, 2)] {
                    let hc = local_height_of(&data, &fx.n.scaled(&c), &fx.wp, w, d).map_err(err)?.value();
                    let diff = hc.sub_r(&Real::from_q(&c).mul_r(&h)).abs();
                    ensure(diff < tol, || format!("h(cN) - c h(N) = {} for c = {c}", diff.to_sci()))?;
                    scaled += 1;
                }
            }
        }
    }
    Ok(format!("{radicands} radicands >= 0, {scaled} scalings exact to 1e-12"))
}

fn delta_reconstruction() -> Check {
    with_precision(128, || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ctx = HodgeContext::default();
        let bound = Real::parse("1e-20").unwrap();
        let mut worst = Real::zero();
        let mut nonzero = 0;
        for _ in 0..120 {
            let fx = random_mhs(&mut rng, MhsShape::default());
            let h = fx.h.map_scalars(|x| x.to_cx());
            let sd = delta_splitting(&h, &ctx).map_err(err)?;
            ensure(sd.residual < bound, || format!("residual {}", sd.residual.to_sci()))?;
            let planted = fx.delta.map(|x| x.to_cx());
            let gap = max_abs(&sd.delta.sub(&planted));
            ensure(gap < bound, || format!("delta differs from the planted one by {}", gap.to_sci()))?;
            for (p, qd) in sd.delta_components.keys() {
                ensure(*p < 0 && *qd < 0, || format!("delta has a ({p},{qd}) component"))?;
            }
            if !sd.delta_components.is_empty() {
                nonzero += 1;
            }
            if sd.residual > worst {
                worst = sd.residual.clone();
            }
        }
        for _ in 0..40 {
            let fx = random_mhs(&mut rng, MhsShape { split: true, ..Default::default() });
            let sd = delta_splitting(&fx.h, &ctx).map_err(err)?;
            ensure(sd.delta.is_zero(), || "split input gave a nonzero exact delta".into())?;
        }
        Ok(format!("120 fixtures ({nonzero} with delta != 0), worst residual {}; 40 split inputs give delta = 0", worst.to_sci()))
    })
}

fn zeta_independence() -> Check {
    let ctx = HodgeContext::default();
    let zeroed = ctx.clone().with_zeta(ZetaTable::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut count = 0;
    let mut worst = 0f64;
    let mut attempts = 0;
    while count < 40 && attempts < 5000 {
        attempts += 1;
        let fx = random_mhs(&mut rng, MhsShape { max_weights: 2, ..Default::default() });
        let ws = fx.h.weight().weights();
        if ws.len() != 2 || ws[1] - ws[0] < 2 {
            continue;
        }
        let (w, d) = (ws[1], ws[1] - ws[0]);
        let h = fx.h.map_scalars(|x| x.to_cx());
        let a = archimedean_height(&h, &fx.pols, w, d, &ctx).map_err(err)?.to_f64();
        let b = archimedean_height(&h, &fx.pols, w, d, &zeroed).map_err(err)?.to_f64();
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() < 1e-12, || format!("height {a} vs {b} with zeroed table"))?;
        count += 1;
    }
    ensure(count >= 40, || format!("only {count} two-jump fixtures"))?;
    for a in [q(4), qq(5, 3), q(7), qq(1, 2), qq(36, 25), qq(-12, 7)] {
        let m = kummer_motive(&a).map_err(err)?;
        let v = &m.arch_places()[0];
        let x = archimedean_place_height(&m, v, 0, 2, &ctx).map_err(err)?.to_f64();
        let y = archimedean_place_height(&m, v, 0, 2, &zeroed).map_err(err)?.to_f64();
        worst = worst.max((x - y).abs());
        ensure((x - y).abs() < 1e-12, || format!("Kummer {a}: {x} vs {y}"))?;
        count += 1;
    }
    Ok(format!("{count} fixtures, largest change {worst:e}"))
}

fn ga1_identity() -> Check {
    let ctx = HodgeContext::default();
    let mut cfg = ExperimentConfig::new(RatFn::parse("T").map_err(err)?)
        .sweep(&"farey:30".parse::<Sweep>().map_err(err)?)
        .map_err(err)?
        .sweep(&"large:300:1000:10000:11".parse::<Sweep>().map_err(err)?)
        .map_err(err)?;
    let negatives: Vec<Q> = cfg.samples.iter().take(200).map(|t| -t.clone()).collect();
    let inverses: Vec<Q> = cfg.samples.iter().take(200).map(|t| t.recip()).collect();
    cfg = cfg.points(&negatives).points(&inverses);
    let cap = num_bigint::BigInt::from(10_000);
    ensure(cfg.samples.iter().all(|t| t.numer().magnitude() <= cap.magnitude() && t.denom() <= &cap), || {
        "a sample exceeds the height cap".into()
    })?;
    let fit = ga1_experiment(&cfg, 0, 2, &ctx).map_err(err)?;
    ensure(fit.geometric == q(2), || format!("geometric height {}", fit.geometric))?;
    let eps = Real::from_f64(2f64.powi(-64));
    let worst = fit.rows.iter().map(|r| r.geometric_residual.abs()).max_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
    ensure(worst <= eps, || format!("residual {} for a = T", worst.to_sci()))?;
    ensure((fit.slope - 2.0).abs() < 1e-9, || format!("slope {} for a = T", fit.slope))?;
    let n_identity = fit.sample_count;

    let cfg = ExperimentConfig::new(RatFn::parse("T*(T-1)^2").map_err(err)?)
        .sweep(&"large:200:10000:1000000".parse::<Sweep>().map_err(err)?)
        .map_err(err)?;
    let fit = ga1_experiment(&cfg, 0, 2, &ctx).map_err(err)?;
    ensure(fit.geometric == q(6), || format!("geometric height {}", fit.geometric))?;
    ensure((fit.slope - 6.0).abs() <= 0.05 * 6.0, || format!("slope {}", fit.slope))?;
    ensure(fit.band_width().is_finite(), || "unbounded residual band".into())?;
    Ok(format!(
        "a = T: {n_identity} samples, max |residual| {}; a = T(T-1)^2: slope {:.6} over {} samples, band width {:.3}",
        worst.to_sci(),
        fit.slope,
        fit.sample_count,
        fit.band_width()
    ))
}

fn ga2_exact() -> Check {
    let ctx = HodgeContext::default();
    let mut lines = Vec::new();
    for (family, place, g) in [("T", "5", q(1)), ("T", "real", q(1)), ("T^2", "5", q(2))] {
        let place: LocalPlace = place.parse().map_err(err)?;
        let base = BasePoint::Finite(q(0));
        let mut cfg = ExperimentConfig::new(RatFn::parse(family).map_err(err)?);
        cfg.place = Some(place.clone());
        cfg.base = Some(base);
        let cfg = cfg.sweep(&Sweep::Converge(6)).map_err(err)?;
        let res = ga2_experiment(&cfg, 0, 2, &ctx).map_err(err)?;
        ensure(res.geometric_local == g, || format!("{family} at {place}: geometric local {}", res.geometric_local))?;
        ensure(res.rows.len() == 6, || "expected six samples".into())?;
        ensure(res.residuals_vanish(), || format!("{family} at {place}: nonzero residual"))?;
        let exact = res.rows.iter().filter(|r| r.residual.exact.is_some()).count();
        lines.push(format!("{family} at {place}: 6 zero residuals ({exact} exact)"));
    }
    Ok(lines.join("; "))
}

fn bb_reduction() -> Check {
    let ctx = HodgeContext::default();
    let m = symplectic_extension([q(3), q(0)], (qq(1, 3), qq(2, 5)), q(1)).map_err(err)?;
    let doubled = direct_sum(&m, &m).map_err(err)?;
    for (name, fx) in [("rank 3", &m), ("rank 6", &doubled)] {
        let rank_p = (fx.weight().graded_dim(0) * fx.weight().graded_dim(-1)) as usize;
        let red = beilinson_bloch_reduction(fx, 0, None, &BbLift::default(), &ctx).map_err(err)?;
        let sig = red.r.type_signature();
        ensure(sig == vec![(-2, 1), (-1, rank_p), (0, 1)], || format!("{name}: graded ranks {sig:?}"))?;
    }
    let arch_only = symplectic_extension([q(0), q(0)], (qq(1, 3), q(0)), q(0))
        .and_then(|m| m.with_finite(vec![]))
        .map_err(err)?;
    let at = |re: Q| -> Result<f64, String> {
        let lift = BbLift { alpha: vec![], y: vec![("inf".into(), re, qq(1, 2))] };
        Ok(beilinson_bloch_reduction(&arch_only, 0, None, &lift, &ctx).map_err(err)?.height.to_f64())
    };
    let (h1, h2) = (at(q(0))?, at(qq(-7, 3))?);
    ensure(h1 > 0.0, || "lift comparison is degenerate".into())?;
    ensure((h1 - h2).abs() < 1e-12, || format!("lifts give {h1} and {h2}"))?;
    let split = symplectic_extension([q(0), q(0)], (q(0), q(0)), q(0)).map_err(err)?;
    let red = beilinson_bloch_reduction(&split, 0, None, &BbLift::default(), &ctx).map_err(err)?;
    ensure(red.height.value.is_zero() && red.height.exact == Some(LogLinear::zero()), || {
        format!("split input gives {}", red.height)
    })?;
    Ok(format!("graded ranks (1, rank P, 1); two lifts give {h1:.15} and {h2:.15}; split input gives exactly 0"))
}

fn pure_heights() -> Check {
    let cases: [(&[(i64, i64)], i64); 4] = [
        (&[(1, 3), (0, -3)], 3),
        (&[(2, 1), (1, 0), (0, -1)], 2),
        (&[(3, 2), (1, 5), (4, -1)], 3 * 2 + 5 - 4),
        (&[(5, 0), (2, 0)], 0),
    ];
    for (list, expect) in cases {
        let got = pure_geometric_height(list);
        ensure(got == expect, || format!("{list:?}: {got} vs {expect}"))?;
    }
    Ok(format!("{} lists", cases.len()))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Duration, fn() -> Check)> = vec![
        ("Kummer local heights", Duration::from_secs(1), kummer_oracle),
        ("relative monodromy filtration", Duration::from_secs(30), rmf_correctness),
        ("N̄ independent of the graded splitting", Duration::from_secs(10), nbar_independence),
        ("positivity and homogeneity", Duration::from_secs(60), positivity_homogeneity),
        ("delta reconstruction", Duration::from_secs(120), delta_reconstruction),
        ("zeta independence on two-step weights", Duration::from_secs(120), zeta_independence),
        ("GA1 slopes", Duration::from_secs(60), ga1_identity),
        ("GA2 exact cases", Duration::from_secs(30), ga2_exact),
        ("Beilinson-Bloch reduction", Duration::from_secs(30), bb_reduction),
        ("pure geometric height", Duration::from_secs(1), pure_heights),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > budget => Err(format!("took {elapsed:.2?}, budget {budget:?}")),
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
