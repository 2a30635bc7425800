//! Polarized graded pieces, the paired space `P = Hom(gr_w, gr_{w-d})`, and
//! geometric heights at degeneration points.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::HeightError;
use crate::monodromy::{deligne_splitting, find_graded_splitting, relative_monodromy_filtration, NilpotentMap};
use crate::numeric::Real;
use crate::qlinalg::hom::ad_pair;
use crate::qlinalg::{Filtration, Matrix, RationalMatrix, Tol, Q};

/// Nondegenerate `(-1)^w`-symmetric form on `gr^W_w`, in the canonical lift
/// coordinates of that graded piece.
#[derive(Clone, Debug, PartialEq)]
pub struct Polarization {
    weight: i64,
    form: RationalMatrix,
}

impl Polarization {
    pub fn new(weight: i64, form: RationalMatrix) -> Result<Self, HeightError> {
        if !form.is_square() {
            return Err(HeightError::InvalidPolarization(format!("form of weight {weight} is not square")));
        }
        if form.rows() > 0 && form.determinant().is_zero() {
            return Err(HeightError::InvalidPolarization(format!("form of weight {weight} is degenerate")));
        }
        let t = form.transpose();
        let expected = if weight % 2 == 0 { t } else { t.neg() };
        if expected != form {
            let kind = if weight % 2 == 0 { "symmetric" } else { "antisymmetric" };
            return Err(HeightError::InvalidPolarization(format!("form of weight {weight} is not {kind}")));
        }
        Ok(Polarization { weight, form })
    }

    /// `<e_i, e_i> = 1` on a piece of even weight.
    pub fn unit(weight: i64, dim: usize) -> Result<Self, HeightError> {
        Self::new(weight, Matrix::identity(dim))
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn form(&self) -> &RationalMatrix {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.form.rows()
    }

    pub fn scaled(&self, c: &Q) -> Result<Self, HeightError> {
        Self::new(self.weight, self.form.scale(c))
    }
}

/// A weight filtration on `Q^n` with one polarization per nonzero graded piece.
#[derive(Clone, Debug)]
pub struct PolarizedFiltration {
    w: Filtration<Q>,
    pols: BTreeMap<i64, Polarization>,
}

impl PolarizedFiltration {
    pub fn new(w: Filtration<Q>, pols: Vec<Polarization>) -> Result<Self, HeightError> {
        let mut map = BTreeMap::new();
        for p in pols {
            let k = p.weight();
            let g = w.graded_dim(k);
            if g == 0 {
                return Err(HeightError::InvalidPolarization(format!("weight {k} has no graded piece")));
            }
            if p.dim() != g {
                return Err(HeightError::DimensionMismatch { expected: g, found: p.dim() });
            }
            if map.insert(k, p).is_some() {
                return Err(HeightError::InvalidPolarization(format!("weight {k} is polarized twice")));
            }
        }
        for k in w.weights() {
            if !map.contains_key(&k) {
                return Err(HeightError::MissingPolarization(k));
            }
        }
        Ok(PolarizedFiltration { w, pols: map })
    }

    pub fn filtration(&self) -> &Filtration<Q> {
        &self.w
    }

    pub fn ambient(&self) -> usize {
        self.w.ambient()
    }

    pub fn polarization(&self, k: i64) -> Result<&Polarization, HeightError> {
        self.pols.get(&k).ok_or(HeightError::MissingPolarization(k))
    }

    pub fn polarizations(&self) -> impl Iterator<Item = &Polarization> {
        self.pols.values()
    }

    /// Ranks of the nonzero graded pieces, by weight.
    pub fn type_signature(&self) -> Vec<(i64, usize)> {
        self.w.weights().into_iter().map(|k| (k, self.w.graded_dim(k))).collect()
    }
}

/// Point where the variation degenerates, with the logarithm of its local
/// monodromy and the relative monodromy filtration (which must exist).
///
/// A closed point of degree `e` stands for `e` geometric points with the
/// same local monodromy and counts `e` times in global sums.
#[derive(Clone, Debug)]
pub struct DegenerationPoint {
    label: String,
    n: NilpotentMap,
    wp: Filtration<Q>,
    degree: u32,
}

impl DegenerationPoint {
    pub fn new(label: impl Into<String>, n: NilpotentMap, w: &Filtration<Q>) -> Result<Self, HeightError> {
        let n = n.compatible_with(w)?;
        let wp = relative_monodromy_filtration(&n, w)?;
        Ok(DegenerationPoint { label: label.into(), n, wp, degree: 1 })
    }

    pub fn with_degree(mut self, degree: u32) -> Self {
        assert!(degree >= 1, "closed points have positive degree");
        self.degree = degree;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monodromy(&self) -> &NilpotentMap {
        &self.n
    }

    pub fn relative_filtration(&self) -> &Filtration<Q> {
        &self.wp
    }
}

/// Finite model of a variation of mixed Hodge structure over a curve: the
/// polarized weight data and the points of bad reduction.
#[derive(Clone, Debug)]
pub struct GeometricVariation {
    data: PolarizedFiltration,
    points: Vec<DegenerationPoint>,
}

impl GeometricVariation {
    pub fn new(data: PolarizedFiltration, points: Vec<DegenerationPoint>) -> Result<Self, HeightError> {
        for p in &points {
            if p.n.dim() != data.ambient() {
                return Err(HeightError::DimensionMismatch { expected: data.ambient(), found: p.n.dim() });
            }
        }
        Ok(GeometricVariation { data, points })
    }

    pub fn data(&self) -> &PolarizedFiltration {
        &self.data
    }

    pub fn points(&self) -> &[DegenerationPoint] {
        &self.points
    }

    pub fn push_point(&mut self, label: impl Into<String>, n: NilpotentMap) -> Result<(), HeightError> {
        let p = DegenerationPoint::new(label, n, self.data.filtration())?;
        self.points.push(p);
        Ok(())
    }
}

/// `P = Hom(gr_w, gr_{w-d})` as row-major `b x a` matrices with the form
/// `<E_rc, E_r'c'> = Q_{w-d}[r][r'] · (Q_w^{-1})^T[c][c']`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedSpaceP {
    pub w: i64,
    pub d: i64,
    src_dim: usize,
    dst_dim: usize,
    form: RationalMatrix,
}

impl PairedSpaceP {
    pub fn dim(&self) -> usize {
        self.src_dim * self.dst_dim
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// `(dim gr_{w-d}, dim gr_w)`: the shape of an element as a matrix.
    pub fn shape(&self) -> (usize, usize) {
        (self.dst_dim, self.src_dim)
    }

    pub fn form(&self) -> &RationalMatrix {
        &self.form
    }

    pub fn pairing(&self, x: &[Q], y: &[Q]) -> Q {
        let fy = self.form.mul_vec(y);
        x.iter().zip(&fy).fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    /// `Ad(N)` on `P` for the maps `N` induces on `gr_w` and `gr_{w-d}`.
    pub fn graded_ad(&self, n: &NilpotentMap, w: &Filtration<Q>) -> Result<RationalMatrix, HeightError> {
        if self.is_zero() {
            return Ok(Matrix::zeros(0, 0));
        }
        let src = w.graded_piece(self.w);
        let dst = w.graded_piece(self.w - self.d);
        let n1 = src.induced_map(n.matrix(), &src)?;
        let n2 = dst.induced_map(n.matrix(), &dst)?;
        Ok(ad_pair(&n1, &n2))
    }

    /// Monodromy filtration of `ad` on the pure space `P` of weight `-d`.
    pub fn monodromy_filtration(&self, ad: &RationalMatrix) -> Result<Filtration<Q>, HeightError> {
        let n = NilpotentMap::new(ad.clone())?;
        relative_monodromy_filtration(&n, &Filtration::trivial(self.dim(), -self.d, Tol::Exact))
    }
}

pub fn build_p(data: &PolarizedFiltration, w: i64, d: i64) -> Result<PairedSpaceP, HeightError> {
    if d < 0 {
        return Err(HeightError::Precondition("d must be nonnegative".into()));
    }
    let fw = data.filtration();
    let (a, b) = (fw.graded_dim(w), fw.graded_dim(w - d));
    if a == 0 || b == 0 {
        return Ok(PairedSpaceP { w, d, src_dim: a, dst_dim: b, form: Matrix::zeros(0, 0) });
    }
    let qw = data.polarization(w)?.form();
    let qd = data.polarization(w - d)?.form();
    let qwinv_t = qw.inverse(Tol::Exact).expect("nondegenerate").transpose();
    let form = Matrix::from_fn(a * b, a * b, |i, j| {
        let (r, c) = (i / a, i % a);
        let (r2, c2) = (j / a, j % a);
        &qd[(r, r2)] * &qwinv_t[(c, c2)]
    });
    Ok(PairedSpaceP { w, d, src_dim: a, dst_dim: b, form })
}

/// `<Ad^{d-2} u, v>` for `u, v` in `W'_{-2} P`.
pub fn pairing_d_minus_2(p: &PairedSpaceP, ad: &RationalMatrix, u: &[Q], v: &[Q]) -> Result<Q, HeightError> {
    if p.is_zero() {
        return Ok(Q::zero());
    }
    if p.d < 2 {
        return Err(HeightError::Precondition("the paired form needs d >= 2".into()));
    }
    if u.len() != p.dim() || v.len() != p.dim() {
        return Err(HeightError::DimensionMismatch { expected: p.dim(), found: u.len().max(v.len()) });
    }
    let wp = p.monodromy_filtration(ad)?;
    let step = wp.step(-2);
    if !step.contains_vector(u) || !step.contains_vector(v) {
        return Err(HeightError::Containment("arguments must lie in W'_-2 P".into()));
    }
    let au = ad.pow((p.d - 2) as usize).mul_vec(u);
    Ok(p.pairing(&au, v))
}

/// `r^{1/d}` for a nonnegative rational `r`, exact when `r` is a perfect power.
#[derive(Clone, Debug)]
pub struct RootHeight {
    radicand: Q,
    d: u32,
    exact: Option<Q>,
}

impl RootHeight {
    pub fn new(radicand: Q, d: u32) -> Result<Self, HeightError> {
        if radicand.is_negative() {
            return Err(HeightError::NegativePairing(format!(
                "the pairing evaluates to {} < 0",
                crate::qlinalg::format_rational(&radicand)
            )));
        }
        let exact = exact_root(&radicand, d);
        Ok(RootHeight { radicand, d, exact })
    }

    pub fn zero() -> Self {
        RootHeight { radicand: Q::zero(), d: 1, exact: Some(Q::zero()) }
    }

    pub fn radicand(&self) -> &Q {
        &self.radicand
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn exact(&self) -> Option<&Q> {
        self.exact.as_ref()
    }

    pub fn value(&self) -> Real {
        match &self.exact {
            Some(q) => Real::from_q(q),
            None => Real::from_q(&self.radicand).nth_root(self.d),
        }
    }
}

fn exact_root(r: &Q, d: u32) -> Option<Q> {
    let root = |n: &BigInt| {
        let s = n.nth_root(d);
        (s.pow(d) == *n).then_some(s)
    };
    Some(Q::new(root(r.numer())?, root(r.denom())?))
}

/// Class `φ ∈ P` of the `(w, d)` block of the weight `-d` component of `N`
/// for the Deligne splitting built on the deterministic splitting of `W'`.
pub fn monodromy_component(
    data: &PolarizedFiltration,
    n: &NilpotentMap,
    wp: &Filtration<Q>,
    w: i64,
    d: i64,
) -> Result<Vec<Q>, HeightError> {
    let fw = data.filtration();
    let src = fw.graded_piece(w);
    let dst = fw.graded_piece(w - d);
    if src.dim() == 0 || dst.dim() == 0 {
        return Ok(vec![]);
    }
    let uprime = find_graded_splitting(n, fw, wp)?;
    let split = deligne_splitting(n, fw, wp, &uprime)?;
    let nd = split.component(-d);
    let cols = src
        .lifts()
        .iter()
        .map(|l| {
            dst.class_coordinates(&nd.mul_vec(l))
                .ok_or_else(|| HeightError::Precondition("N_-d does not lower weights by d".into()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_columns(&cols, dst.dim()).vectorize())
}

/// Radicand `(-1)^d <Ad^{d-2} φ, φ> = <φ, Ad^{d-2} φ>` of the local height.
pub fn local_radicand(
    data: &PolarizedFiltration,
    n: &NilpotentMap,
    wp: &Filtration<Q>,
    w: i64,
    d: i64,
) -> Result<Q, HeightError> {
    if d < 2 {
        return Err(HeightError::Precondition("geometric heights need d >= 2".into()));
    }
    let p = build_p(data, w, d)?;
    if p.is_zero() {
        return Ok(Q::zero());
    }
    let phi = monodromy_component(data, n, wp, w, d)?;
    let ad = p.graded_ad(n, data.filtration())?;
    let val = p.pairing(&ad.pow((d - 2) as usize).mul_vec(&phi), &phi);
    Ok(if d % 2 == 0 { val } else { -val })
}

/// `h_{w,d}` for one monodromy logarithm on polarized data.
pub fn local_height_of(
    data: &PolarizedFiltration,
    n: &NilpotentMap,
    wp: &Filtration<Q>,
    w: i64,
    d: i64,
) -> Result<RootHeight, HeightError> {
    let r = local_radicand(data, n, wp, w, d)?;
    RootHeight::new(r, d as u32)
}

pub fn local_geometric_height(
    gv: &GeometricVariation,
    x: &DegenerationPoint,
    w: i64,
    d: i64,
) -> Result<RootHeight, HeightError> {
    local_height_of(gv.data(), &x.n, &x.wp, w, d)
}

/// Degree-weighted sum of local heights over the degeneration points, in
/// point order.
#[derive(Clone, Debug)]
pub struct GeometricHeight {
    pub value: Real,
    /// Exact rational value when every summand is a rational root.
    pub exact: Option<Q>,
    /// `(label, degree, local height)`.
    pub terms: Vec<(String, u32, RootHeight)>,
}

pub fn global_geometric_height(gv: &GeometricVariation, w: i64, d: i64) -> Result<GeometricHeight, HeightError> {
    let mut terms = Vec::with_capacity(gv.points.len());
    for x in &gv.points {
        terms.push((x.label.clone(), x.degree, local_geometric_height(gv, x, w, d)?));
    }
    let value = terms
        .iter()
        .fold(Real::from_f64(0.0), |acc, (_, e, h)| acc.add_r(&h.value().mul_r(&Real::from_f64(*e as f64))));
    let exact = terms
        .iter()
        .try_fold(Q::zero(), |acc, (_, e, h)| h.exact().map(|x| acc + x * Q::from_integer(BigInt::from(*e))));
    Ok(GeometricHeight { value, exact, terms })
}

/// `Σ r · deg gr^r` over the Hodge-graded pieces.
pub fn pure_geometric_height(degrees: &[(i64, i64)]) -> i64 {
    degrees.iter().map(|(r, deg)| r * deg).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{q, qf, Subspace};

    fn kummer_data() -> PolarizedFiltration {
        let line = Subspace::span(&[vec![q(1), q(0)]], 2, Tol::Exact);
        let w = Filtration::new(2, vec![(-2, line), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).unwrap();
        PolarizedFiltration::new(w, vec![Polarization::unit(-2, 1).unwrap(), Polarization::unit(0, 1).unwrap()])
            .unwrap()
    }

    fn e12(k: Q) -> NilpotentMap {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = k;
        NilpotentMap::new(m).unwrap()
    }

    #[test]
    fn polarization_symmetry_follows_weight_parity() {
        let j = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
        assert!(Polarization::new(-1, j.clone()).is_ok());
        assert!(Polarization::new(0, j).is_err());
        assert!(Polarization::new(0, Matrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn kummer_point_height_is_the_order() {
        let data = kummer_data();
        let n = e12(q(-3));
        let x = DegenerationPoint::new("0", n, data.filtration()).unwrap();
        let gv = GeometricVariation::new(data, vec![x]).unwrap();
        let h = local_geometric_height(&gv, &gv.points()[0], 0, 2).unwrap();
        assert_eq!(h.exact(), Some(&q(3)));
        let p = build_p(gv.data(), 0, 2).unwrap();
        assert_eq!(p.pairing(&[q(1)], &[q(1)]), q(1));
    }

    #[test]
    fn irrational_roots_fall_back_to_floats() {
        let h = RootHeight::new(q(2), 2).unwrap();
        assert!(h.exact().is_none());
        assert!((h.value().to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(RootHeight::new(qf(8, 27), 3).unwrap().exact(), Some(&qf(2, 3)));
        assert!(matches!(RootHeight::new(q(-1), 2), Err(HeightError::NegativePairing(_))));
    }

    #[test]
    fn pure_heights_are_weighted_sums() {
        assert_eq!(pure_geometric_height(&[(1, 3), (0, -3)]), 3);
        assert_eq!(pure_geometric_height(&[(2, 1), (1, 0), (0, -1)]), 2);
        assert_eq!(pure_geometric_height(&[]), 0);
    }
}
