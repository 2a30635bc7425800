//! The Kummer motive `0 → Z(1) → M → Z → 0` of a nonzero rational `a`, and
//! the Kummer family of a rational function `a(T)`.
//!
//! Coordinates: `e1` spans `Z(1)` (weight -2, type (-1,-1)), `e2` lifts the
//! generator of `Z` (weight 0). Both graded pieces carry the unit form, and
//! the Betti generator of `Z(1)` is `2πi`. With these choices the extension
//! coordinate at an archimedean place is `log(a) / 2πi` and every local
//! height `h_{0,2,v}` equals `|log |a|_v|`.

use num_traits::Signed;

use super::{ArchHodge, ArchPlaceData, FinitePlaceData, MotiveData};
use crate::arith::{support, valuation};
use crate::error::HeightError;
use crate::geoheight::{DegenerationPoint, GeometricVariation, Polarization, PolarizedFiltration};
use crate::hodge::{default_tol, HodgeFiltration, MixedHodgeStructure, PlaceKind};
use crate::monodromy::NilpotentMap;
use crate::numeric::{Cx, Real};
use crate::poly::RatFn;
use crate::qlinalg::{q, Filtration, Matrix, Scalar, Subspace, Tol, Q};

pub const ARCH_LABEL: &str = "inf";

pub(crate) fn kummer_filtration() -> Filtration<Q> {
    let e1 = vec![q(1), q(0)];
    Filtration::new(2, vec![(-2, Subspace::span(&[e1], 2, Tol::Exact)), (0, Subspace::full(2, Tol::Exact))], Tol::Exact)
        .expect("nested")
}

pub(crate) fn kummer_polarized() -> PolarizedFiltration {
    PolarizedFiltration::new(
        kummer_filtration(),
        vec![Polarization::unit(-2, 1).expect("unit"), Polarization::unit(0, 1).expect("unit")],
    )
    .expect("one form per weight")
}

/// `m · (e2 ↦ e1)`.
pub(crate) fn elementary_n(m: i64) -> NilpotentMap {
    let mut n = Matrix::<Q>::zeros(2, 2);
    n[(0, 1)] = q(m);
    NilpotentMap::new(n).expect("strictly upper triangular")
}

/// `F^0 = span(e2 + c e1)`, `F^{-1} = V`.
pub fn kummer_hodge(c: Cx) -> Result<MixedHodgeStructure<Cx>, HeightError> {
    let tol = default_tol::<Cx>();
    let f0 = Subspace::span(&[vec![c, Cx::one()]], 2, tol);
    let f = HodgeFiltration::new(2, vec![(0, f0), (-1, Subspace::full(2, tol))], tol)?;
    MixedHodgeStructure::new(kummer_filtration(), f)
}

/// `log(a) / 2πi` with the principal logarithm.
pub fn kummer_coordinate(a: &Q) -> Cx {
    let two_pi = super::two_pi();
    let ln_abs = Real::from_q(&a.abs()).ln();
    let re = if a.is_negative() { Real::from_f64(0.5) } else { Real::zero() };
    Cx::new(re, ln_abs.div_r(&two_pi).neg_r())
}

pub fn kummer_motive(a: &Q) -> Result<MotiveData, HeightError> {
    if a.is_zero() {
        return Err(HeightError::Precondition("the Kummer motive needs a nonzero parameter".into()));
    }
    let mut finite = Vec::new();
    for p in support(a) {
        let ord = valuation(a, &p);
        finite.push(FinitePlaceData::new(p.to_string(), p.clone(), elementary_n(ord))?);
    }
    let hodge = ArchHodge::Float(kummer_hodge(kummer_coordinate(a))?);
    let arch = vec![ArchPlaceData { label: ARCH_LABEL.into(), kind: PlaceKind::Real, hodge }];
    MotiveData::new(kummer_polarized(), finite, arch)
}

/// The family `t ↦ Kummer(a(t))` over the projective line: a degeneration
/// point at every zero and pole of `a`, including infinity, with
/// `N = ord · (e2 ↦ e1)`. Zeros and poles are grouped by squarefree factor,
/// each counted with its degree.
pub fn kummer_variation(a: &RatFn) -> Result<GeometricVariation, HeightError> {
    if a.is_zero() {
        return Err(HeightError::Precondition("the Kummer family needs a nonzero function".into()));
    }
    let w = kummer_filtration();
    let mut points = Vec::new();
    for (poly, sign) in [(a.num(), 1i64), (a.den(), -1i64)] {
        for (g, m) in poly.squarefree() {
            let label = if g.degree() == 1 {
                let root = -g.coeffs()[0].clone() / g.coeffs()[1].clone();
                format!("T={}", crate::qlinalg::format_rational(&root))
            } else {
                format!("{g}=0")
            };
            let pt = DegenerationPoint::new(label, elementary_n(sign * m as i64), &w)?.with_degree(g.degree() as u32);
            points.push(pt);
        }
    }
    let inf = a.ord_at_infinity();
    if inf != 0 {
        points.push(DegenerationPoint::new("T=inf", elementary_n(inf), &w)?);
    }
    GeometricVariation::new(kummer_polarized(), points)
}
