use super::matrix::{combine, Matrix};
use super::scalar::{Scalar, Tol};
use crate::error::HeightError;

/// Subspace of `F^n`, stored as the nonzero rows of its reduced row echelon
/// form. Over exact fields equal subspaces have identical representations.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<F> {
    ambient: usize,
    basis: Matrix<F>,
    pivots: Vec<usize>,
    tol: Tol,
}

impl<F: Scalar> Subspace<F> {
    pub fn zero(ambient: usize, tol: Tol) -> Self {
        Subspace { ambient, basis: Matrix::zeros(0, ambient), pivots: vec![], tol }
    }

    pub fn full(ambient: usize, tol: Tol) -> Self {
        Subspace { ambient, basis: Matrix::identity(ambient), pivots: (0..ambient).collect(), tol }
    }

    pub fn span(vectors: &[Vec<F>], ambient: usize, tol: Tol) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient, tol);
        }
        Self::row_space(&Matrix::from_rows_with_cols(vectors.to_vec(), ambient), tol)
    }

    pub fn row_space(m: &Matrix<F>, tol: Tol) -> Self {
        let (r, pivots) = m.rref(tol);
        let basis = r.select_rows(&(0..pivots.len()).collect::<Vec<_>>());
        Subspace { ambient: m.cols(), basis, pivots, tol }
    }

    pub fn column_space(m: &Matrix<F>, tol: Tol) -> Self {
        Self::row_space(&m.transpose(), tol)
    }

    pub fn kernel_of(m: &Matrix<F>, tol: Tol) -> Self {
        Self::span(&m.kernel(tol), m.cols(), tol)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn tol(&self) -> Tol {
        self.tol
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Canonical basis as a `dim x ambient` matrix.
    pub fn basis(&self) -> &Matrix<F> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<F>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check(&self, other: &Self) -> Result<(), HeightError> {
        if self.ambient != other.ambient {
            return Err(HeightError::DimensionMismatch { expected: self.ambient, found: other.ambient });
        }
        Ok(())
    }

    pub fn sum(&self, other: &Self) -> Result<Self, HeightError> {
        self.check(other)?;
        Ok(Self::row_space(&self.basis.vstack(&other.basis), self.tol))
    }

    /// Vectors annihilated by every row of this basis, as a subspace of the
    /// dual (identified with `F^n` by the standard pairing).
    pub fn annihilator(&self) -> Self {
        Self::span(&self.basis.kernel(self.tol), self.ambient, self.tol)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, HeightError> {
        self.check(other)?;
        if self.is_full() {
            return Ok(other.clone());
        }
        if other.is_full() {
            return Ok(self.clone());
        }
        let stacked = self.annihilator().basis.vstack(&other.annihilator().basis);
        Ok(Self::span(&stacked.kernel(self.tol), self.ambient, self.tol))
    }

    pub fn contains_vector(&self, v: &[F]) -> bool {
        assert_eq!(v.len(), self.ambient);
        self.coordinates(v).is_some()
    }

    pub fn contains(&self, other: &Self) -> Result<bool, HeightError> {
        self.check(other)?;
        if other.dim() > self.dim() {
            return Ok(false);
        }
        Ok(other.basis.row_vecs().iter().all(|v| self.contains_vector(v)))
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        let coeffs: Vec<F> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let back = combine(&coeffs, &self.basis.row_vecs(), self.ambient);
        let scale = v.iter().chain(&back).filter_map(F::log2_magnitude).max();
        let ok = back.iter().zip(v).all(|(a, b)| self.tol.negligible(&a.sub(b), scale));
        ok.then_some(coeffs)
    }

    /// Lift basis of `self / (self ∩ other)` inside `self`: the vectors of
    /// `self` vanishing on the pivot columns of the intersection, reduced.
    pub fn quotient_basis(&self, other: &Self) -> Result<Vec<Vec<F>>, HeightError> {
        Ok(QuotientSpace::new(self, &self.intersect(other)?)?.lifts().to_vec())
    }

    /// Image under `m` (acting on column vectors).
    pub fn image(&self, m: &Matrix<F>) -> Self {
        assert_eq!(m.cols(), self.ambient);
        let imgs: Vec<Vec<F>> = self.basis.row_vecs().iter().map(|v| m.mul_vec(v)).collect();
        Self::span(&imgs, m.rows(), self.tol)
    }

    /// Preimage under `m` of `self`.
    pub fn preimage(&self, m: &Matrix<F>) -> Self {
        assert_eq!(m.rows(), self.ambient);
        let ann = self.annihilator();
        if ann.is_zero() {
            return Self::full(m.cols(), self.tol);
        }
        Self::kernel_of(&ann.basis.mul(m), self.tol)
    }

    pub fn map_scalars<G: Scalar>(&self, f: impl Fn(&F) -> G, tol: Tol) -> Subspace<G> {
        Subspace::row_space(&self.basis.map(f), tol)
    }
}

/// Quotient `S / T` with `T ⊆ S`, with a canonical lift basis and class
/// coordinates.
#[derive(Clone, Debug)]
pub struct QuotientSpace<F> {
    sub: Subspace<F>,
    lower: Subspace<F>,
    lifts: Vec<Vec<F>>,
    lift_pivots: Vec<usize>,
}

impl<F: Scalar> QuotientSpace<F> {
    pub fn new(sub: &Subspace<F>, lower: &Subspace<F>) -> Result<Self, HeightError> {
        if !sub.contains(lower)? {
            return Err(HeightError::Containment("quotient by a subspace not contained in the numerator".into()));
        }
        let tol = sub.tol;
        let n = sub.ambient;
        // Vectors of `sub` with zero entries at the pivot columns of `lower`.
        let constraints: Vec<Vec<F>> = lower
            .pivots
            .iter()
            .map(|&p| sub.basis.col(p))
            .collect();
        let coeff_space = if constraints.is_empty() {
            (0..sub.dim()).map(|i| super::matrix::unit_vector(sub.dim(), i)).collect()
        } else {
            Matrix::from_rows_with_cols(constraints, sub.dim()).kernel(tol)
        };
        let vecs: Vec<Vec<F>> =
            coeff_space.iter().map(|c| combine(c, &sub.basis.row_vecs(), n)).collect();
        let space = Subspace::span(&vecs, n, tol);
        debug_assert_eq!(space.dim() + lower.dim(), sub.dim());
        Ok(QuotientSpace {
            sub: sub.clone(),
            lower: lower.clone(),
            lift_pivots: space.pivots.clone(),
            lifts: space.basis.row_vecs(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lifts.len()
    }

    pub fn lifts(&self) -> &[Vec<F>] {
        &self.lifts
    }

    pub fn numerator(&self) -> &Subspace<F> {
        &self.sub
    }

    pub fn denominator(&self) -> &Subspace<F> {
        &self.lower
    }

    /// Coordinates of the class of `v` in the lift basis; `None` when `v`
    /// is not in the numerator.
    pub fn class_coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.sub.contains_vector(v) {
            return None;
        }
        // Reduce v modulo `lower` on its pivot columns, then read off the
        // lift pivots.
        let mut r = v.to_vec();
        for (row, &p) in self.lower.basis.row_vecs().iter().zip(&self.lower.pivots) {
            let c = r[p].clone();
            if !c.is_zero() {
                r = super::matrix::axpy(&c.neg(), row, &r);
            }
        }
        Some(self.lift_pivots.iter().map(|&p| r[p].clone()).collect())
    }

    pub fn lift(&self, coords: &[F]) -> Vec<F> {
        combine(coords, &self.lifts, self.sub.ambient)
    }

    /// Matrix, in lift coordinates, of the map `self -> target` induced by
    /// `m`. Fails when `m` does not carry the numerator into the target's.
    pub fn induced_map(&self, m: &Matrix<F>, target: &QuotientSpace<F>) -> Result<Matrix<F>, HeightError> {
        let cols = self
            .lifts
            .iter()
            .map(|v| {
                target.class_coordinates(&m.mul_vec(v)).ok_or_else(|| {
                    HeightError::Containment("map does not respect the subquotients".into())
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::from_columns(&cols, target.dim()))
    }
}

#[cfg(test)]
mod tests {
    use super::super::scalar::{q, Q};
    use super::*;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn complementary_lines_sum_to_plane() {
        let a = Subspace::span(&[v(&[1, 0])], 2, Tol::Exact);
        let b = Subspace::span(&[v(&[0, 1])], 2, Tol::Exact);
        assert!(a.sum(&b).unwrap().is_full());
        assert!(a.intersect(&b).unwrap().is_zero());
    }

    #[test]
    fn scaled_generator_is_contained() {
        let a = Subspace::span(&[v(&[1, 1])], 2, Tol::Exact);
        let b = Subspace::span(&[v(&[2, 2])], 2, Tol::Exact);
        assert!(a.contains(&b).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn quotient_coordinates_ignore_lower_part() {
        let s = Subspace::full(3, Tol::Exact);
        let t = Subspace::span(&[v(&[1, 1, 0])], 3, Tol::Exact);
        let qs = QuotientSpace::new(&s, &t).unwrap();
        assert_eq!(qs.dim(), 2);
        let c1 = qs.class_coordinates(&v(&[3, 5, 7])).unwrap();
        let c2 = qs.class_coordinates(&v(&[4, 6, 7])).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let a = Subspace::<Q>::full(2, Tol::Exact);
        let b = Subspace::<Q>::full(3, Tol::Exact);
        assert!(a.sum(&b).is_err());
    }
}
