//! Height comparison along a Kummer family `t ↦ Kummer(a(t))` over the
//! projective line, for rational `t` only.
//!
//! GA1 fits `h_{0,2}(M(t))` against `h(t) = log max(|n|, |m|)`; the slope
//! should be the geometric height `Σ_x deg(x)·|ord_x a|`. GA2 compares the
//! local height at one place `v` with `h_{0,2,x}(M)·h_{x,v}(t)` as `t → x`
//! `v`-adically, where `h_{x,v}(t) = -log |q(t)|_v` and `q` is `T - x`, or
//! `1/T` at infinity.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{height_bound, rational_height, valuation, LogLinear};
use crate::error::HeightError;
use crate::geoheight::{global_geometric_height, local_geometric_height, GeometricVariation};
use crate::hodge::HodgeContext;
use crate::motives::kummer::ARCH_LABEL;
use crate::motives::{archimedean_place_height, finite_local_height, global_height_wd, kummer_motive, kummer_variation, HeightValue};
use crate::numeric::{with_precision, working_bits, Real};
use crate::poly::RatFn;
use crate::qlinalg::{format_rational, parse_rational, Q};

/// The place `v` of GA2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalPlace {
    Prime(BigUint),
    Real,
}

impl FromStr for LocalPlace {
    type Err = HeightError;

    fn from_str(s: &str) -> Result<Self, HeightError> {
        match s.trim() {
            "real" | "inf" | "infinity" => Ok(LocalPlace::Real),
            p => {
                let n: BigUint = p.parse().map_err(|_| HeightError::Parse(format!("place '{p}' is neither a prime nor 'real'")))?;
                if !crate::arith::is_probable_prime(&n) {
                    return Err(HeightError::Parse(format!("place {n} is not prime")));
                }
                Ok(LocalPlace::Prime(n))
            }
        }
    }
}

impl fmt::Display for LocalPlace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalPlace::Prime(p) => write!(f, "{p}"),
            LocalPlace::Real => f.write_str("real"),
        }
    }
}

/// The degeneration point `x` of GA2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasePoint {
    Finite(Q),
    Infinity,
}

impl BasePoint {
    /// The local coordinate `q(t)`: `t - x`, or `1/t` at infinity.
    pub fn coordinate(&self, t: &Q) -> Option<Q> {
        match self {
            BasePoint::Finite(x) => Some(t - x).filter(|d| !d.is_zero()),
            BasePoint::Infinity => (!t.is_zero()).then(|| t.recip()),
        }
    }

    /// Label the Kummer family gives this point.
    pub fn label(&self) -> String {
        match self {
            BasePoint::Finite(x) => format!("T={}", format_rational(x)),
            BasePoint::Infinity => "T=inf".into(),
        }
    }
}

impl FromStr for BasePoint {
    type Err = HeightError;

    fn from_str(s: &str) -> Result<Self, HeightError> {
        match s.trim() {
            "inf" | "infinity" => Ok(BasePoint::Infinity),
            x => parse_rational(x).map(BasePoint::Finite).ok_or_else(|| HeightError::Parse(format!("bad base point '{x}'"))),
        }
    }
}

/// Deterministic sample generators.
#[derive(Clone, Debug, PartialEq)]
pub enum Sweep {
    /// Farey fractions `n/m` with `1 <= n <= m <= N`, ascending.
    Farey(u64),
    /// `count` seeded draws with `lo <= max(|n|, |m|) <= hi`.
    Large { count: usize, lo: u64, hi: u64, seed: u64 },
    /// `x + s^k` for `k = 1..=K`, with `s = p` at a prime and `s = 1/10`
    /// at the real place; `s^{-k}` at infinity.
    Converge(u32),
}

impl FromStr for Sweep {
    type Err = HeightError;

    fn from_str(s: &str) -> Result<Self, HeightError> {
        let bad = || HeightError::Parse(format!("bad sweep '{s}'; expected farey:N, large:COUNT:LO:HI[:SEED] or converge:K"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| parts.get(i).and_then(|x| x.parse::<u64>().ok()).ok_or_else(bad);
        match parts[0] {
            "farey" if parts.len() == 2 => Ok(Sweep::Farey(num(1)?)),
            "large" if parts.len() == 4 || parts.len() == 5 => {
                let seed = if parts.len() == 5 { num(4)? } else { 0 };
                let (lo, hi) = (num(2)?, num(3)?);
                if lo == 0 || lo > hi {
                    return Err(bad());
                }
                Ok(Sweep::Large { count: num(1)? as usize, lo, hi, seed })
            }
            "converge" if parts.len() == 2 => Ok(Sweep::Converge(num(1)? as u32)),
            _ => Err(bad()),
        }
    }
}

pub fn farey(n: u64) -> Vec<Q> {
    // Next-term recurrence of the Farey sequence, starting after 0/1.
    let mut out = Vec::new();
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n.max(1));
    while c <= n && n > 0 {
        out.push(Q::new(BigInt::from(c), BigInt::from(d)));
        let k = (n + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
        if a == 1 && b == 1 {
            break;
        }
    }
    out
}

fn large(count: usize, lo: u64, hi: u64, seed: u64) -> Vec<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = rng.gen_range(1..=hi) as i64;
        let n = rng.gen_range(-(hi as i64)..=hi as i64);
        if n == 0 {
            continue;
        }
        let t = Q::new(BigInt::from(n), BigInt::from(m));
        if height_bound(&t) >= BigUint::from(lo) {
            out.push(t);
        }
    }
    out
}

fn converge(k: u32, place: &LocalPlace, base: &BasePoint) -> Vec<Q> {
    let step = match place {
        LocalPlace::Prime(p) => Q::from_integer(BigInt::from(p.clone())),
        LocalPlace::Real => Q::new(BigInt::one(), BigInt::from(10)),
    };
    (1..=k as i32)
        .map(|i| {
            let s = num_traits::pow(step.clone(), i as usize);
            match base {
                BasePoint::Finite(x) => x + s,
                BasePoint::Infinity => s.recip(),
            }
        })
        .collect()
}

/// Family, samples and the GA2 data.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub family: RatFn,
    pub samples: Vec<Q>,
    pub place: Option<LocalPlace>,
    pub base: Option<BasePoint>,
    /// Samples with `max(|n|, |m|)` above the cap are dropped.
    pub height_cap: Option<BigUint>,
}

impl ExperimentConfig {
    pub fn new(family: RatFn) -> Self {
        ExperimentConfig { family, samples: vec![], place: None, base: None, height_cap: None }
    }

    /// Appends generated samples. Generated points at zeros or poles of the
    /// family are skipped; explicit points are kept and rejected later.
    pub fn sweep(mut self, s: &Sweep) -> Result<Self, HeightError> {
        let pts = match s {
            Sweep::Farey(n) => farey(*n),
            Sweep::Large { count, lo, hi, seed } => large(*count, *lo, *hi, *seed),
            Sweep::Converge(k) => {
                let (Some(p), Some(b)) = (&self.place, &self.base) else {
                    return Err(HeightError::Experiment("converge sweeps need a place and a base point".into()));
                };
                converge(*k, p, b)
            }
        };
        let fam = &self.family;
        self.samples.extend(pts.into_iter().filter(|t| fam.eval(t).is_some_and(|v| !v.is_zero())));
        Ok(self)
    }

    pub fn points(mut self, pts: &[Q]) -> Self {
        self.samples.extend_from_slice(pts);
        self
    }

    fn checked_samples(&self) -> Result<Vec<Q>, HeightError> {
        let mut out = Vec::with_capacity(self.samples.len());
        for t in &self.samples {
            if let Some(cap) = &self.height_cap {
                if &height_bound(t) > cap {
                    continue;
                }
            }
            match self.family.eval(t) {
                Some(v) if !v.is_zero() => out.push(t.clone()),
                _ => {
                    return Err(HeightError::Experiment(format!(
                        "sample t = {} is a zero or pole of the family",
                        format_rational(t)
                    )))
                }
            }
        }
        if out.is_empty() {
            return Err(HeightError::Experiment("no sample points".into()));
        }
        Ok(out)
    }
}

/// Maps `f` over `items` on scoped threads, keeping input order and the
/// caller's working precision.
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync) -> Vec<U> {
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(&f).collect();
    }
    let bits = working_bits();
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                s.spawn(move || with_precision(bits, || c.iter().map(f).collect::<Vec<U>>()))
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sample worker panicked")).collect()
    })
}

#[derive(Clone, Debug)]
pub struct Ga1Row {
    pub t: Q,
    pub h_t: LogLinear,
    pub h_m: HeightValue,
    /// `h_m - slope·h(t)` against the fitted slope.
    pub residual: f64,
    /// `h_m - g·h(t)` against the geometric height `g`, at working precision.
    pub geometric_residual: Real,
}

/// LAD line `y ≈ slope·x + c`; the intercept is reported as the residual
/// band.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub slope: f64,
    pub min_residual: f64,
    pub max_residual: f64,
    pub sample_count: usize,
    /// Geometric height of the family.
    pub geometric: Q,
    pub geometric_band: (Real, Real),
    pub rows: Vec<Ga1Row>,
}

impl FitResult {
    pub fn band_width(&self) -> f64 {
        self.max_residual - self.min_residual
    }
}

fn lad_cost(xs: &[f64], ys: &[f64], s: f64) -> f64 {
    let mut r: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - s * x).collect();
    r.sort_by(f64::total_cmp);
    let c = r[r.len() / 2];
    r.iter().map(|v| (v - c).abs()).sum()
}

/// Least-absolute-deviation slope with a free intercept. The profiled cost
/// is convex in the slope, so a golden-section search over the range of
/// pairwise slopes converges.
pub fn lad_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let spread = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - xs.iter().cloned().fold(f64::INFINITY, f64::min);
    if xs.len() < 2 || spread <= 0.0 {
        let tot: f64 = xs.iter().sum();
        return if tot == 0.0 { 0.0 } else { ys.iter().sum::<f64>() / tot };
    }
    let ymax = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    let bound = 2.0 * ymax / spread + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if lad_cost(xs, ys, a) <= lad_cost(xs, ys, b) {
            hi = b;
        } else {
            lo = a;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    (lo + hi) / 2.0
}

/// The geometric height `h_{w,d}` of the family.
pub fn family_height(gv: &GeometricVariation, w: i64, d: i64) -> Result<Q, HeightError> {
    global_geometric_height(gv, w, d)?
        .exact
        .ok_or_else(|| HeightError::Experiment("geometric height is irrational".into()))
}

pub fn ga1_experiment(cfg: &ExperimentConfig, w: i64, d: i64, ctx: &HodgeContext) -> Result<FitResult, HeightError> {
    let samples = cfg.checked_samples()?;
    let gv = kummer_variation(&cfg.family)?;
    let geometric = family_height(&gv, w, d)?;
    let g = Real::from_q(&geometric);
    let values = par_map(&samples, |t| -> Result<(LogLinear, HeightValue), HeightError> {
        let a = cfg.family.eval(t).expect("checked sample");
        let (h, _) = global_height_wd(&kummer_motive(&a)?, w, d, ctx)?;
        Ok((rational_height(t), h))
    });
    let values = values.into_iter().collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = values.iter().map(|(h, _)| h.eval().to_f64()).collect();
    let ys: Vec<f64> = values.iter().map(|(_, h)| h.to_f64()).collect();
    let slope = lad_slope(&xs, &ys);
    let mut rows = Vec::with_capacity(samples.len());
    for ((t, (h_t, h_m)), (x, y)) in samples.into_iter().zip(values).zip(xs.iter().zip(&ys)) {
        let geometric_residual = h_m.value.sub_r(&g.mul_r(&h_t.eval()));
        rows.push(Ga1Row { t, h_t, h_m, residual: y - slope * x, geometric_residual });
    }
    let min_residual = rows.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let max_residual = rows.iter().map(|r| r.residual).fold(f64::NEG_INFINITY, f64::max);
    let gmin = rows.iter().map(|r| &r.geometric_residual).min_by(|a, b| a.partial_cmp(b).expect("finite")).expect("nonempty").clone();
    let gmax = rows.iter().map(|r| &r.geometric_residual).max_by(|a, b| a.partial_cmp(b).expect("finite")).expect("nonempty").clone();
    Ok(FitResult { slope, min_residual, max_residual, sample_count: rows.len(), geometric, geometric_band: (gmin, gmax), rows })
}

#[derive(Clone, Debug)]
pub struct Ga2Row {
    pub t: Q,
    /// `h_{w,d,v}(M(t))`.
    pub local: HeightValue,
    /// `h_{x,v}(t)`, always exact.
    pub h_xv: LogLinear,
    pub residual: HeightValue,
}

#[derive(Clone, Debug)]
pub struct Ga2Result {
    pub place: LocalPlace,
    pub base: BasePoint,
    /// `h_{w,d,x}(M)`.
    pub geometric_local: Q,
    pub rows: Vec<Ga2Row>,
}

impl Ga2Result {
    /// Whether every residual is exactly zero, or below `2^{-bits/2}` when it
    /// involves an archimedean height.
    pub fn residuals_vanish(&self) -> bool {
        let eps = Real::from_f64(2f64.powi(-(working_bits() as i32) / 2));
        self.rows.iter().all(|r| match &r.residual.exact {
            Some(e) => e.is_zero(),
            None => r.residual.value.abs() <= eps,
        })
    }
}

fn local_coordinate_height(place: &LocalPlace, qt: &Q) -> LogLinear {
    match place {
        LocalPlace::Prime(p) => LogLinear::log_int(p, &Q::from_integer(BigInt::from(valuation(qt, p)))),
        LocalPlace::Real => LogLinear::log_abs(qt).scale(&-Q::one()),
    }
}

pub fn ga2_experiment(cfg: &ExperimentConfig, w: i64, d: i64, ctx: &HodgeContext) -> Result<Ga2Result, HeightError> {
    let (Some(place), Some(base)) = (cfg.place.clone(), cfg.base.clone()) else {
        return Err(HeightError::Experiment("GA2 needs a place and a base point".into()));
    };
    let samples = cfg.checked_samples()?;
    let gv = kummer_variation(&cfg.family)?;
    let geometric_local = match gv.points().iter().find(|x| x.label() == base.label()) {
        Some(x) => local_geometric_height(&gv, x, w, d)?
            .exact()
            .cloned()
            .ok_or_else(|| HeightError::Experiment("geometric local height is irrational".into()))?,
        None => Q::zero(),
    };
    let rows = par_map(&samples, |t| -> Result<Ga2Row, HeightError> {
        let qt = base
            .coordinate(t)
            .ok_or_else(|| HeightError::Experiment(format!("sample t = {} equals the base point", format_rational(t))))?;
        let h_xv = local_coordinate_height(&place, &qt);
        let m = kummer_motive(&cfg.family.eval(t).expect("checked sample"))?;
        let local = match &place {
            LocalPlace::Prime(p) => match m.finite_places().iter().find(|v| &v.residue_norm == p) {
                Some(v) => finite_local_height(&m, v, w, d)?,
                None => HeightValue::zero(),
            },
            LocalPlace::Real => {
                let v = m.arch_places().iter().find(|v| v.label == ARCH_LABEL).expect("Kummer real place");
                archimedean_place_height(&m, v, w, d, ctx)?
            }
        };
        let predicted = HeightValue::exact(h_xv.scale(&geometric_local));
        let residual = match (&local.exact, &predicted.exact) {
            (Some(a), Some(b)) => HeightValue::exact(a.sub(b)),
            _ => HeightValue::approximate(local.value.sub_r(&predicted.value)),
        };
        Ok(Ga2Row { t: t.clone(), local, h_xv, residual })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Ga2Result { place, base, geometric_local, rows })
}

/// Whether `t` sits on a zero or pole of `a`.
pub fn is_degenerate(a: &RatFn, t: &Q) -> bool {
    a.eval(t).is_none_or(|v| v.is_zero())
}
