//! Weil operators, Hodge metrics and archimedean heights.

use super::bigrading::Bigrading;
use super::splitting::{delta_component, SplittingData};
use super::{conj_transpose, default_tol, magnitude, HodgeContext, MixedHodgeStructure};
use crate::error::HeightError;
use crate::geoheight::{build_p, PolarizedFiltration};
use crate::numeric::{ComplexScalar, Real};
use crate::qlinalg::{Matrix, Scalar, Q};

/// Pure Hodge structure of weight `k`, given by its Weil operator
/// `C = i^{p-q}` on `I^{p,q}` in some fixed coordinates.
#[derive(Clone, Debug)]
pub struct PureHodgeStructure<C> {
    pub weight: i64,
    pub weil: Matrix<C>,
}

fn i_power<C: ComplexScalar>(e: i64) -> C {
    match e.rem_euclid(4) {
        0 => C::one(),
        1 => C::i(),
        2 => C::one().neg(),
        _ => C::i().neg(),
    }
}

impl<C: ComplexScalar> PureHodgeStructure<C> {
    /// The structure induced on `gr_k`, in the canonical lift coordinates.
    pub fn graded(h: &MixedHodgeStructure<C>, bigrading: &Bigrading<C>, k: i64) -> Result<Self, HeightError> {
        let piece = h.weight_c().graded_piece(k);
        let mut weil = Matrix::zeros(h.dim(), h.dim());
        for ((p, q), _) in bigrading.pieces().iter().filter(|((p, q), _)| p + q == k) {
            weil = weil.add(&bigrading.projector((*p, *q)).scale(&i_power(p - q)));
        }
        let m = piece
            .induced_map(&weil, &piece)
            .map_err(|_| HeightError::MhsAxiomViolation(format!("Weil operator does not preserve W_{k}")))?;
        Ok(PureHodgeStructure { weight: k, weil: m })
    }

    pub fn dim(&self) -> usize {
        self.weil.rows()
    }

    /// `Hom(src, dst)` on row-major vectorized matrices:
    /// `X ↦ C_dst X C_src^{-1}`.
    pub fn hom(src: &Self, dst: &Self) -> Self {
        let inv_t = src.weil.inverse(default_tol::<C>()).expect("Weil operators are invertible").transpose();
        let (a, b) = (src.dim(), dst.dim());
        let weil = Matrix::from_fn(a * b, a * b, |i, j| dst.weil[(i / a, j / a)].mul(&inv_t[(i % a, j % a)]));
        PureHodgeStructure { weight: dst.weight - src.weight, weil }
    }
}

/// Hermitian form `(x, y) = Q(Cx, conj y)`, with matrix `C^T Q`.
#[derive(Clone, Debug)]
pub struct HodgeMetric<C> {
    matrix: Matrix<C>,
}

impl<C: ComplexScalar> HodgeMetric<C> {
    pub fn matrix(&self) -> &Matrix<C> {
        &self.matrix
    }

    pub fn value(&self, x: &[C], y: &[C]) -> C {
        let yb: Vec<C> = y.iter().map(|v| v.conj()).collect();
        let my = self.matrix.mul_vec(&yb);
        x.iter().zip(&my).fold(C::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
    }

    /// `D` of the Hermitian factorization `L D L^*`.
    pub fn pivots(&self) -> Vec<Real> {
        ldl_pivots(&self.matrix)
    }
}

fn ldl_pivots<C: ComplexScalar>(m: &Matrix<C>) -> Vec<Real> {
    let n = m.rows();
    let mut l = Matrix::<C>::identity(n);
    let mut d: Vec<C> = Vec::with_capacity(n);
    for j in 0..n {
        let mut dj = m[(j, j)].clone();
        for k in 0..j {
            dj = dj.sub(&l[(j, k)].mul(&l[(j, k)].conj()).mul(&d[k]));
        }
        d.push(dj.clone());
        for i in j + 1..n {
            let mut s = m[(i, j)].clone();
            for k in 0..j {
                s = s.sub(&l[(i, k)].mul(&l[(j, k)].conj()).mul(&d[k]));
            }
            l[(i, j)] = if dj.is_zero() { C::zero() } else { s.div(&dj) };
        }
    }
    d.iter().map(|x| x.to_cx().re).collect()
}

/// The Hodge metric of a polarized pure structure. Fails unless the form is
/// Hermitian positive definite.
pub fn hodge_metric<C: ComplexScalar>(pure: &PureHodgeStructure<C>, form: &Matrix<Q>) -> Result<HodgeMetric<C>, HeightError> {
    if form.rows() != pure.dim() || form.cols() != pure.dim() {
        return Err(HeightError::DimensionMismatch { expected: pure.dim(), found: form.rows() });
    }
    let matrix = pure.weil.transpose().mul(&form.map(C::from_q));
    let tol = default_tol::<C>();
    let scale = matrix.max_log2_magnitude();
    let skew = matrix.sub(&conj_transpose(&matrix));
    if !skew.entries().iter().all(|e| tol.negligible(e, scale)) {
        return Err(HeightError::NotPositiveDefinite("the form is not Hermitian against the Weil operator".into()));
    }
    let floor = match (tol, scale) {
        (crate::qlinalg::Tol::RelBits(bits), Some(s)) => {
            Real::from_i64(2).ln().mul_r(&Real::from_i64(s - bits as i64)).exp()
        }
        _ => Real::zero(),
    };
    let metric = HodgeMetric { matrix };
    if let Some((i, p)) = metric.pivots().into_iter().enumerate().find(|(_, p)| *p <= floor) {
        return Err(HeightError::NotPositiveDefinite(format!("pivot {i} is {}", p.to_sci())));
    }
    Ok(metric)
}

/// Real places count once, complex places twice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PlaceKind {
    Real,
    Complex,
}

impl PlaceKind {
    pub fn factor(self) -> i64 {
        match self {
            PlaceKind::Real => 1,
            PlaceKind::Complex => 2,
        }
    }
}

/// `((2π)^d (δ_{w,d}, δ_{w,d}))^{1/d}` with the Hodge metric on
/// `P = Hom(gr_w, gr_{w-d})`. The factor `(2π)^d` accounts for the Betti
/// generator `2πi` of `Z(1)` and makes the Kummer structure of `a` have
/// height `|log a|`.
pub fn archimedean_height<C: ComplexScalar>(
    h: &MixedHodgeStructure<C>,
    pols: &PolarizedFiltration,
    w: i64,
    d: i64,
    ctx: &HodgeContext,
) -> Result<Real, HeightError> {
    let sd = SplittingData::compute(h, ctx)?;
    archimedean_height_from(h, &sd, pols, w, d)
}

/// As [`archimedean_height`], reusing a computed splitting.
pub fn archimedean_height_from<C: ComplexScalar>(
    h: &MixedHodgeStructure<C>,
    sd: &SplittingData<C>,
    pols: &PolarizedFiltration,
    w: i64,
    d: i64,
) -> Result<Real, HeightError> {
    if d < 2 {
        return Err(HeightError::Precondition("archimedean heights need d >= 2".into()));
    }
    if pols.filtration() != h.weight() {
        return Err(HeightError::Incompatible("polarized filtration differs from the weight filtration".into()));
    }
    let phi = delta_component(h, sd, w, d)?;
    if phi.rows() == 0 || phi.cols() == 0 || phi.is_zero() {
        return Ok(Real::zero());
    }
    let src = PureHodgeStructure::graded(h, &sd.bigrading, w)?;
    let dst = PureHodgeStructure::graded(h, &sd.bigrading, w - d)?;
    let p = build_p(pols, w, d)?;
    let metric = hodge_metric(&PureHodgeStructure::hom(&src, &dst), p.form())?;
    let v = phi.vectorize();
    let norm = metric.value(&v, &v).to_cx();
    if norm.re.is_negative() {
        return Err(HeightError::NotPositiveDefinite(format!("metric value {}", norm.re.to_sci())));
    }
    let two_pi = Real::pi().mul_r(&Real::from_i64(2));
    let mut scaled = norm.re;
    for _ in 0..d {
        scaled = scaled.mul_r(&two_pi);
    }
    Ok(scaled.nth_root(d as u32))
}

pub fn archimedean_local_height<C: ComplexScalar>(
    h: &MixedHodgeStructure<C>,
    pols: &PolarizedFiltration,
    place: PlaceKind,
    w: i64,
    d: i64,
    ctx: &HodgeContext,
) -> Result<Real, HeightError> {
    Ok(archimedean_height(h, pols, w, d, ctx)?.mul_r(&Real::from_i64(place.factor())))
}

/// Largest entry modulus of a vector.
pub fn vector_norm<C: ComplexScalar>(v: &[C]) -> Real {
    v.iter().map(magnitude).fold(Real::zero(), |a, b| if b > a { b } else { a })
}
