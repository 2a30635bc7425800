//! Archimedean data: mixed Hodge structures, the Deligne bigrading, the
//! `(δ, F̃)` and `(ζ, F̂)` splittings, Hodge metrics and archimedean heights.
//!
//! Everything is generic over [`ComplexScalar`]: [`Gq`](crate::numeric::Gq)
//! gives an exact path for Hodge filtrations with Gaussian rational
//! generators, [`Cx`](crate::numeric::Cx) the multiprecision one.

pub mod bigrading;
pub mod metric;
pub mod splitting;
pub mod zeta;

pub use bigrading::{deligne_bigrading, Bigrading};
pub use metric::{archimedean_height, archimedean_local_height, hodge_metric, HodgeMetric, PlaceKind};
pub use splitting::{delta_component, delta_splitting, zeta_and_canonical_splitting, SplittingData};
pub use zeta::ZetaTable;

use crate::error::HeightError;
use crate::numeric::{working_bits, ComplexScalar, Real};
use crate::qlinalg::{Filtration, Matrix, Scalar, Subspace, Tol, Q};

/// Rank tolerance for the scalar type at the current working precision.
pub fn default_tol<C: Scalar>() -> Tol {
    if C::EXACT {
        Tol::Exact
    } else {
        Tol::RelBits((working_bits() * 3 / 4) as u32)
    }
}

/// Computation context: precision, residual tolerance, and the ζ table.
#[derive(Clone, Debug)]
pub struct HodgeContext {
    pub bits: usize,
    /// Bound on subspace residuals, as a power of ten.
    pub residual_exponent: i32,
    pub zeta: ZetaTable,
}

impl Default for HodgeContext {
    fn default() -> Self {
        HodgeContext { bits: crate::numeric::DEFAULT_BITS, residual_exponent: -20, zeta: ZetaTable::transcribed() }
    }
}

impl HodgeContext {
    pub fn with_zeta(mut self, zeta: ZetaTable) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn residual_bound(&self) -> Real {
        Real::parse(&format!("1e{}", self.residual_exponent)).expect("decimal literal")
    }
}

/// Decreasing filtration `F^p`, stored as the increasing filtration with
/// index `-p`.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeFiltration<C> {
    inc: Filtration<C>,
}

impl<C: ComplexScalar> HodgeFiltration<C> {
    /// From `(p, F^p)` in any order; the smallest `p` must give the full space.
    pub fn new(ambient: usize, steps: Vec<(i64, Subspace<C>)>, tol: Tol) -> Result<Self, HeightError> {
        let inc = Filtration::new(ambient, steps.into_iter().map(|(p, s)| (-p, s)).collect(), tol)
            .map_err(|e| HeightError::MhsAxiomViolation(format!("Hodge filtration: {e}")))?;
        Ok(HodgeFiltration { inc })
    }

    pub fn ambient(&self) -> usize {
        self.inc.ambient()
    }

    pub fn step(&self, p: i64) -> Subspace<C> {
        self.inc.step(-p)
    }

    /// `(p_min, p_max)` with `F^{p_min} = V` and `F^{p_max} != 0`.
    pub fn range(&self) -> Option<(i64, i64)> {
        Some((-self.inc.max_weight()?, -self.inc.min_weight()?))
    }

    /// Nonzero jumps `(p, F^p)` in decreasing `p`.
    pub fn jumps(&self) -> Vec<(i64, Subspace<C>)> {
        self.inc.jumps().iter().map(|(a, s)| (-a, s.clone())).collect()
    }

    pub fn conjugate(&self) -> Self {
        let tol = self.inc.tol();
        let steps = self.jumps().into_iter().map(|(p, s)| (p, s.map_scalars(|x| x.conj(), tol))).collect();
        Self::new(self.ambient(), steps, tol).expect("conjugation preserves nesting")
    }

    /// `g F^p` for invertible `g`.
    pub fn transform(&self, g: &Matrix<C>) -> Self {
        HodgeFiltration { inc: self.inc.transform(g) }
    }

    pub fn map_scalars<D: ComplexScalar>(&self, f: impl Fn(&C) -> D, tol: Tol) -> HodgeFiltration<D> {
        let steps = self.jumps().into_iter().map(|(p, s)| (p, s.map_scalars(&f, tol))).collect();
        HodgeFiltration::new(self.ambient(), steps, tol).expect("same nesting")
    }
}

/// `(V_Q, W, F)` with `F` on `V_C`.
#[derive(Clone, Debug)]
pub struct MixedHodgeStructure<C> {
    w: Filtration<Q>,
    wc: Filtration<C>,
    f: HodgeFiltration<C>,
    tol: Tol,
}

pub fn complexify<C: ComplexScalar>(w: &Filtration<Q>, tol: Tol) -> Filtration<C> {
    let steps = w.jumps().iter().map(|(k, s)| (*k, s.map_scalars(C::from_q, tol))).collect();
    Filtration::new(w.ambient(), steps, tol).expect("same nesting")
}

impl<C: ComplexScalar> MixedHodgeStructure<C> {
    /// Checks the axiom by computing the Deligne bigrading.
    pub fn new(w: Filtration<Q>, f: HodgeFiltration<C>) -> Result<Self, HeightError> {
        if w.ambient() != f.ambient() {
            return Err(HeightError::DimensionMismatch { expected: w.ambient(), found: f.ambient() });
        }
        let tol = default_tol::<C>();
        let wc = complexify(&w, tol);
        let h = MixedHodgeStructure { w, wc, f, tol };
        deligne_bigrading(&h)?;
        Ok(h)
    }

    pub fn dim(&self) -> usize {
        self.w.ambient()
    }

    pub fn weight(&self) -> &Filtration<Q> {
        &self.w
    }

    pub fn weight_c(&self) -> &Filtration<C> {
        &self.wc
    }

    pub fn hodge(&self) -> &HodgeFiltration<C> {
        &self.f
    }

    pub fn tol(&self) -> Tol {
        self.tol
    }

    pub fn with_hodge(&self, f: HodgeFiltration<C>) -> Self {
        MixedHodgeStructure { w: self.w.clone(), wc: self.wc.clone(), f, tol: self.tol }
    }

    pub fn map_scalars<D: ComplexScalar>(&self, f: impl Fn(&C) -> D) -> MixedHodgeStructure<D> {
        let tol = default_tol::<D>();
        MixedHodgeStructure { w: self.w.clone(), wc: complexify(&self.w, tol), f: self.f.map_scalars(f, tol), tol }
    }
}

pub fn conj_transpose<C: ComplexScalar>(m: &Matrix<C>) -> Matrix<C> {
    Matrix::from_fn(m.cols(), m.rows(), |r, c| m[(c, r)].conj())
}

pub fn conj_matrix<C: ComplexScalar>(m: &Matrix<C>) -> Matrix<C> {
    m.map(|x| x.conj())
}

pub fn magnitude<C: ComplexScalar>(x: &C) -> Real {
    x.to_cx().abs2().sqrt()
}

/// Largest entry modulus.
pub fn max_abs<C: ComplexScalar>(m: &Matrix<C>) -> Real {
    m.entries().iter().map(magnitude).fold(Real::zero(), |a, b| if b > a { b } else { a })
}

/// Orthogonal projector onto a subspace.
pub fn orthogonal_projector<C: ComplexScalar>(s: &Subspace<C>) -> Matrix<C> {
    let n = s.ambient();
    if s.is_zero() {
        return Matrix::zeros(n, n);
    }
    let a = s.basis().clone();
    let ah = conj_transpose(&a);
    let gram = a.mul(&ah).inverse(Tol::Exact).expect("Gram matrix of a basis");
    ah.mul(&gram).mul(&a)
}

/// Distance between subspaces: largest entry of the difference of their
/// orthogonal projectors.
pub fn subspace_distance<C: ComplexScalar>(a: &Subspace<C>, b: &Subspace<C>) -> Real {
    max_abs(&orthogonal_projector(a).sub(&orthogonal_projector(b)))
}

/// Largest [`subspace_distance`] over the steps of two Hodge filtrations.
pub fn filtration_distance<C: ComplexScalar>(a: &HodgeFiltration<C>, b: &HodgeFiltration<C>) -> Real {
    let mut ps: Vec<i64> = a.jumps().iter().chain(b.jumps().iter()).map(|(p, _)| *p).collect();
    ps.sort();
    ps.dedup();
    ps.iter().map(|&p| subspace_distance(&a.step(p), &b.step(p))).fold(Real::zero(), |x, y| if y > x { y } else { x })
}

/// Whether every entry is real within `tol`.
pub fn is_real<C: ComplexScalar>(m: &Matrix<C>, tol: Tol) -> bool {
    let scale = m.max_log2_magnitude();
    m.entries().iter().all(|x| tol.negligible(&x.sub(&x.conj()), scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geoheight::{Polarization, PolarizedFiltration};
    use crate::numeric::{Cx, Gq};
    use crate::qlinalg::{q, qf};

    fn kummer_w() -> Filtration<Q> {
        let e1 = vec![q(1), q(0)];
        Filtration::new(2, vec![(-2, Subspace::span(&[e1], 2, Tol::Exact)), (0, Subspace::full(2, Tol::Exact))], Tol::Exact)
            .unwrap()
    }

    fn extension<C: ComplexScalar>(c: C) -> MixedHodgeStructure<C> {
        let tol = default_tol::<C>();
        let f0 = Subspace::span(&[vec![c, C::one()]], 2, tol);
        let f = HodgeFiltration::new(2, vec![(0, f0), (-1, Subspace::full(2, tol))], tol).unwrap();
        MixedHodgeStructure::new(kummer_w(), f).unwrap()
    }

    fn kummer_cx(a: i64) -> MixedHodgeStructure<Cx> {
        let l = Real::from_i64(a).ln().div_r(&Real::pi().mul_r(&Real::from_i64(2)));
        extension(Cx::new(Real::zero(), l.neg_r()))
    }

    fn kummer_pols() -> PolarizedFiltration {
        PolarizedFiltration::new(kummer_w(), vec![Polarization::unit(-2, 1).unwrap(), Polarization::unit(0, 1).unwrap()])
            .unwrap()
    }

    #[test]
    fn split_extension_has_two_hodge_tate_pieces() {
        let h = extension(Gq::from_q(&q(0)));
        let b = deligne_bigrading(&h).unwrap();
        assert_eq!(b.hodge_numbers(), vec![(-1, -1, 1), (0, 0, 1)]);
        assert!(b.is_conjugation_stable());
    }

    #[test]
    fn real_extension_class_is_split_exactly() {
        let h = extension(Gq::from_q(&qf(3, 2)));
        let sd = SplittingData::compute(&h, &HodgeContext::default()).unwrap();
        assert!(sd.delta.is_zero());
        assert!(sd.zeta.unwrap().is_zero());
    }

    #[test]
    fn imaginary_extension_class_gives_exact_delta() {
        let h = extension(Gq::new(q(0), qf(1, 2)));
        let sd = SplittingData::compute(&h, &HodgeContext::default()).unwrap();
        let mut expect = Matrix::<Gq>::zeros(2, 2);
        expect[(0, 1)] = Gq::from_q(&qf(1, 2));
        assert_eq!(sd.delta, expect);
        assert_eq!(sd.delta_components.keys().copied().collect::<Vec<_>>(), vec![(-1, -1)]);
    }

    #[test]
    fn kummer_delta_is_log_over_two_pi() {
        let h = kummer_cx(4);
        let sd = SplittingData::compute(&h, &HodgeContext::default()).unwrap();
        let expect = -(4f64.ln()) / (2.0 * std::f64::consts::PI);
        assert!((sd.delta[(0, 1)].re.to_f64() - expect).abs() < 1e-15);
        let phi = delta_component(&h, &sd, 0, 2).unwrap();
        assert!((phi[(0, 0)].re.to_f64() - expect).abs() < 1e-15);
    }

    #[test]
    fn kummer_height_is_log_a() {
        let h = kummer_cx(4);
        let ctx = HodgeContext::default();
        let v = archimedean_height(&h, &kummer_pols(), 0, 2, &ctx).unwrap();
        assert!((v.to_f64() - 4f64.ln()).abs() < 1e-12);
        let c = archimedean_local_height(&h, &kummer_pols(), PlaceKind::Complex, 0, 2, &ctx).unwrap();
        assert!((c.to_f64() - 2.0 * 4f64.ln()).abs() < 1e-12);
        let zeroed = ctx.clone().with_zeta(ZetaTable::zero());
        let z = archimedean_height(&h, &kummer_pols(), 0, 2, &zeroed).unwrap();
        assert!(z.sub_r(&v).abs().to_f64() < 1e-30);
    }

    fn weight_minus_one() -> metric::PureHodgeStructure<Gq> {
        let tol = Tol::Exact;
        let f0 = Subspace::span(&[vec![Gq::one(), Gq::i()]], 2, tol);
        let f = HodgeFiltration::new(2, vec![(0, f0), (-1, Subspace::full(2, tol))], tol).unwrap();
        let w = Filtration::trivial(2, -1, Tol::Exact);
        let h = MixedHodgeStructure::new(w, f).unwrap();
        let b = deligne_bigrading(&h).unwrap();
        assert_eq!(b.hodge_numbers(), vec![(-1, 0, 1), (0, -1, 1)]);
        metric::PureHodgeStructure::graded(&h, &b, -1).unwrap()
    }

    #[test]
    fn symplectic_form_polarizes_weight_minus_one() {
        let pure = weight_minus_one();
        let j = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
        let m = hodge_metric(&pure, &j).unwrap();
        assert!(m.pivots().iter().all(|p| !p.is_negative() && !p.is_zero()));
        assert!(matches!(hodge_metric(&pure, &j.neg()), Err(HeightError::NotPositiveDefinite(_))));
    }

    #[test]
    fn non_mixed_filtration_is_rejected() {
        // F^0 = W_{-2} violates purity of gr_{-2}.
        let tol = Tol::Exact;
        let f0 = Subspace::span(&[vec![Gq::one(), Gq::zero()]], 2, tol);
        let f = HodgeFiltration::new(2, vec![(0, f0), (-1, Subspace::full(2, tol))], tol).unwrap();
        assert!(matches!(MixedHodgeStructure::new(kummer_w(), f), Err(HeightError::MhsAxiomViolation(_))));
    }

    #[test]
    fn shipped_table_round_trips() {
        let t = ZetaTable::transcribed();
        assert_eq!(ZetaTable::parse(&t.to_text()).unwrap(), t);
        assert_eq!(t.max_weight, 4);
        let (z, warn) = ZetaTable::load(std::path::Path::new("/nonexistent/zeta.txt")).unwrap();
        assert_eq!(z, ZetaTable::zero());
        assert!(warn.is_some());
    }
}
