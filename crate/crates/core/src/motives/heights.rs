//! Local, global and total heights of motives, and the report they fill.

use std::collections::BTreeSet;

use super::bb::{beilinson_bloch_reduction, BbLift};
use super::{ArchHodge, ArchPlaceData, FinitePlaceData, MotiveData};
use crate::arith::LogLinear;
use crate::error::HeightError;
use crate::geoheight::local_height_of;
use crate::hodge::{archimedean_height, HodgeContext};
use crate::monodromy::relative_monodromy_filtration;
use crate::numeric::Real;
use crate::qlinalg::Scalar;

/// A height with its exact value as `Σ c_p log p` when one is known.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightValue {
    pub value: Real,
    pub exact: Option<LogLinear>,
}

impl HeightValue {
    pub fn zero() -> Self {
        HeightValue { value: Real::zero(), exact: Some(LogLinear::zero()) }
    }

    pub fn exact(e: LogLinear) -> Self {
        HeightValue { value: e.eval(), exact: Some(e) }
    }

    pub fn approximate(value: Real) -> Self {
        if value.is_zero() {
            return Self::zero();
        }
        HeightValue { value, exact: None }
    }

    pub fn add(&self, o: &Self) -> Self {
        let exact = match (&self.exact, &o.exact) {
            (Some(a), Some(b)) => Some(a.add(b)),
            _ => None,
        };
        match &exact {
            Some(e) => HeightValue { value: e.eval(), exact },
            None => HeightValue { value: self.value.add_r(&o.value), exact: None },
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

impl std::fmt::Display for HeightValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let digits = f.precision().unwrap_or(20);
        match &self.exact {
            Some(e) if !e.is_zero() => write!(f, "{} = {}", self.value.to_decimal(digits), e),
            _ => write!(f, "{}", self.value.to_decimal(digits)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PlaceHeight {
    pub place: String,
    pub w: i64,
    pub d: i64,
    pub value: HeightValue,
}

#[derive(Clone, Debug)]
pub struct WdHeight {
    pub w: i64,
    pub d: i64,
    pub value: HeightValue,
    /// Set when the value is a placeholder rather than a computation.
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct HeightReport {
    pub per_place: Vec<PlaceHeight>,
    pub per_wd: Vec<WdHeight>,
    pub total: HeightValue,
}

/// `log N(v)` times the geometric local height of `N_v`.
pub fn finite_local_height(m: &MotiveData, v: &FinitePlaceData, w: i64, d: i64) -> Result<HeightValue, HeightError> {
    if d < 2 {
        return Err(HeightError::Precondition("local heights need d >= 2".into()));
    }
    let wf = m.weight();
    if v.n.matrix().is_zero() || wf.graded_dim(w) == 0 || wf.graded_dim(w - d) == 0 {
        return Ok(HeightValue::zero());
    }
    let wp = relative_monodromy_filtration(&v.n, wf)?;
    let root = local_height_of(m.polarized(), &v.n, &wp, w, d)?;
    Ok(match root.exact() {
        Some(r) => HeightValue::exact(LogLinear::log_int(&v.residue_norm, r)),
        None => HeightValue::approximate(Real::from_bigint(&v.residue_norm.clone().into()).ln().mul_r(&root.value())),
    })
}

/// Archimedean local height, doubled at complex places.
pub fn archimedean_place_height(
    m: &MotiveData,
    v: &ArchPlaceData,
    w: i64,
    d: i64,
    ctx: &HodgeContext,
) -> Result<HeightValue, HeightError> {
    let wf = m.weight();
    if wf.graded_dim(w) == 0 || wf.graded_dim(w - d) == 0 {
        return Ok(HeightValue::zero());
    }
    let h = match &v.hodge {
        ArchHodge::Exact(h) => archimedean_height(h, m.polarized(), w, d, ctx)?,
        ArchHodge::Float(h) => archimedean_height(h, m.polarized(), w, d, ctx)?,
    };
    Ok(HeightValue::approximate(h.mul_r(&Real::from_i64(v.kind.factor()))))
}

/// `h_{w,d}(M) = Σ_v h_{w,d,v}(M)` with one row per place.
pub fn global_height_wd(
    m: &MotiveData,
    w: i64,
    d: i64,
    ctx: &HodgeContext,
) -> Result<(HeightValue, Vec<PlaceHeight>), HeightError> {
    let mut rows = Vec::new();
    for v in m.finite_places() {
        rows.push(PlaceHeight { place: v.label.clone(), w, d, value: finite_local_height(m, v, w, d)? });
    }
    for v in m.arch_places() {
        rows.push(PlaceHeight { place: v.label.clone(), w, d, value: archimedean_place_height(m, v, w, d, ctx)? });
    }
    let total = rows.iter().fold(HeightValue::zero(), |acc, r| acc.add(&r.value));
    Ok((total, rows))
}

pub type PureHeightFn<'a> = &'a dyn Fn(&MotiveData, i64) -> Result<HeightValue, HeightError>;

/// How `total_height` treats `d = 0` and `d = 1`.
#[derive(Clone, Copy, Default)]
pub struct TotalOptions<'a> {
    /// Height of the pure object `gr_w`. Without one, `d = 0` terms are 0
    /// and flagged.
    pub pure: Option<PureHeightFn<'a>>,
    /// Skip `d = 1` terms instead of reducing them to `d = 2`.
    pub skip_d1: bool,
}

const PURE_NOTE: &str = "pure height out of scope; counted as 0";

/// `h(M) = Σ_{w, d >= 0} h_{w,d}(M)` over the pairs of weights present.
pub fn total_height(m: &MotiveData, opts: &TotalOptions, ctx: &HodgeContext) -> Result<HeightReport, HeightError> {
    let weights: BTreeSet<i64> = m.weight().weights().into_iter().collect();
    let mut per_place = Vec::new();
    let mut per_wd = Vec::new();
    for &w in weights.iter().rev() {
        for &lower in weights.iter().rev().filter(|&&k| k <= w) {
            let d = w - lower;
            let (value, note) = match d {
                0 => match opts.pure {
                    Some(f) => (f(m, w)?, None),
                    None => (HeightValue::zero(), Some(PURE_NOTE.to_string())),
                },
                1 if opts.skip_d1 => (HeightValue::zero(), Some("d = 1 skipped".to_string())),
                1 => {
                    let red = beilinson_bloch_reduction(m, w, None, &BbLift::default(), ctx)?;
                    for r in red.rows {
                        per_place.push(PlaceHeight { place: r.place, w, d, value: r.value });
                    }
                    (red.height, Some("via the weight (0, -1, -2) reduction".to_string()))
                }
                _ => {
                    let (v, rows) = global_height_wd(m, w, d, ctx)?;
                    per_place.extend(rows);
                    (v, None)
                }
            };
            per_wd.push(WdHeight { w, d, value, note });
        }
    }
    let total = per_wd.iter().fold(HeightValue::zero(), |acc, r| acc.add(&r.value));
    Ok(HeightReport { per_place, per_wd, total })
}
