//! The Deligne bigrading `I^{p,q}` of a mixed Hodge structure.

use std::collections::BTreeMap;

use super::{conj_matrix, HodgeFiltration, MixedHodgeStructure};
use crate::error::HeightError;
use crate::numeric::ComplexScalar;
use crate::qlinalg::{Filtration, Matrix, Subspace, Tol};

pub type Bidegree = (i64, i64);

/// Splitting `V_C = ⊕ I^{p,q}` with an adapted basis.
#[derive(Clone, Debug)]
pub struct Bigrading<C> {
    pieces: Vec<(Bidegree, Subspace<C>)>,
    /// Columns are the piece bases in order.
    basis: Matrix<C>,
    inverse: Matrix<C>,
    tags: Vec<Bidegree>,
    tol: Tol,
}

impl<C: ComplexScalar> Bigrading<C> {
    /// From independent pieces spanning the whole space.
    pub fn from_pieces(pieces: Vec<(Bidegree, Subspace<C>)>, ambient: usize, tol: Tol) -> Result<Self, HeightError> {
        let mut cols = Vec::new();
        let mut tags = Vec::new();
        let pieces: Vec<_> = pieces.into_iter().filter(|(_, s)| !s.is_zero()).collect();
        for (pq, s) in &pieces {
            for v in s.basis_vectors() {
                cols.push(v);
                tags.push(*pq);
            }
        }
        if cols.len() != ambient {
            return Err(HeightError::MhsAxiomViolation(format!(
                "Hodge pieces have total dimension {} in a space of dimension {ambient}",
                cols.len()
            )));
        }
        let basis = Matrix::from_columns(&cols, ambient);
        let inverse = basis
            .inverse(tol)
            .ok_or_else(|| HeightError::MhsAxiomViolation("Hodge pieces are not independent".into()))?;
        Ok(Bigrading { pieces, basis, inverse, tags, tol })
    }

    pub fn pieces(&self) -> &[(Bidegree, Subspace<C>)] {
        &self.pieces
    }

    pub fn piece(&self, pq: Bidegree) -> Subspace<C> {
        self.pieces
            .iter()
            .find(|(t, _)| *t == pq)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| Subspace::zero(self.dim(), self.tol))
    }

    /// Hodge numbers `(p, q, h^{p,q})`.
    pub fn hodge_numbers(&self) -> Vec<(i64, i64, usize)> {
        self.pieces.iter().map(|((p, q), s)| (*p, *q, s.dim())).collect()
    }

    pub fn dim(&self) -> usize {
        self.tags.len()
    }

    pub fn basis(&self) -> &Matrix<C> {
        &self.basis
    }

    pub fn tags(&self) -> &[Bidegree] {
        &self.tags
    }

    fn conj_in_basis(&self, keep: impl Fn(usize, usize) -> bool) -> Matrix<C> {
        let n = self.dim();
        let d = Matrix::from_fn(n, n, |r, c| if r == c && keep(r, c) { C::one() } else { C::zero() });
        self.basis.mul(&d).mul(&self.inverse)
    }

    /// Projector onto `I^{p,q}` along the other pieces.
    pub fn projector(&self, pq: Bidegree) -> Matrix<C> {
        self.conj_in_basis(|r, _| self.tags[r] == pq)
    }

    /// Projector onto `⊕_{p+q=k} I^{p,q}`.
    pub fn weight_projector(&self, k: i64) -> Matrix<C> {
        self.conj_in_basis(|r, _| self.tags[r].0 + self.tags[r].1 == k)
    }

    /// Semisimple endomorphism acting by `p + q` on `I^{p,q}`.
    pub fn weight_grading(&self) -> Matrix<C> {
        let n = self.dim();
        let d = Matrix::from_fn(n, n, |r, c| {
            if r == c {
                C::from_i64(self.tags[r].0 + self.tags[r].1)
            } else {
                C::zero()
            }
        });
        self.basis.mul(&d).mul(&self.inverse)
    }

    /// Weights `p + q` that occur, ascending.
    pub fn weights(&self) -> Vec<i64> {
        let mut ks: Vec<i64> = self.tags.iter().map(|(p, q)| p + q).collect();
        ks.sort();
        ks.dedup();
        ks
    }

    /// Components `X_{a,b}` of an endomorphism, sending `I^{p,q}` to
    /// `I^{p+a,q+b}`. Zero components are omitted.
    pub fn decompose(&self, x: &Matrix<C>) -> BTreeMap<Bidegree, Matrix<C>> {
        let t = self.inverse.mul(x).mul(&self.basis);
        let n = self.dim();
        let mut blocks: BTreeMap<Bidegree, Matrix<C>> = BTreeMap::new();
        for r in 0..n {
            for c in 0..n {
                if t[(r, c)].is_zero() {
                    continue;
                }
                let deg = (self.tags[r].0 - self.tags[c].0, self.tags[r].1 - self.tags[c].1);
                blocks.entry(deg).or_insert_with(|| Matrix::zeros(n, n))[(r, c)] = t[(r, c)].clone();
            }
        }
        let scale = t.max_log2_magnitude();
        blocks
            .into_iter()
            .filter(|(_, b)| !b.entries().iter().all(|e| self.tol.negligible(e, scale)))
            .map(|(deg, b)| (deg, self.basis.mul(&b).mul(&self.inverse)))
            .collect()
    }

    /// Whether `conj(I^{p,q}) = I^{q,p}` for all `p, q`.
    pub fn is_conjugation_stable(&self) -> bool {
        self.pieces.iter().all(|((p, q), s)| {
            let other = self.piece((*q, *p));
            let c = Subspace::row_space(&conj_matrix(s.basis()), self.tol);
            c.dim() == other.dim() && other.contains(&c).unwrap_or(false)
        })
    }

    /// `g I^{p,q}` for invertible `g`.
    pub fn transform(&self, g: &Matrix<C>) -> Self {
        let pieces = self.pieces.iter().map(|(pq, s)| (*pq, s.image(g))).collect();
        Self::from_pieces(pieces, self.dim(), self.tol).expect("invertible image of a splitting")
    }
}

/// `I^{p,q} = F^p ∩ W_k ∩ (F̄^q ∩ W_k + Σ_{j≥1} F̄^{q-j} ∩ W_{k-j-1})`, with
/// `k = p + q`. Fails with `MhsAxiomViolation` when the pieces do not split
/// the space, which happens exactly when `(W, F)` is not mixed Hodge.
pub fn deligne_bigrading<C: ComplexScalar>(h: &MixedHodgeStructure<C>) -> Result<Bigrading<C>, HeightError> {
    let n = h.dim();
    let tol = h.tol();
    if n == 0 {
        return Bigrading::from_pieces(vec![], 0, tol);
    }
    let f = h.hodge();
    let fbar = f.conjugate();
    let w = h.weight_c();
    let Some((_, pmax)) = f.range() else {
        return Err(HeightError::MhsAxiomViolation("empty Hodge filtration".into()));
    };
    let wmin = w.min_weight().unwrap_or(0);
    let mut pieces = Vec::new();
    for k in h.weight().weights() {
        let wk = w.step(k);
        for p in (k - pmax)..=pmax {
            let q = k - p;
            let a = f.step(p).intersect(&wk)?;
            if a.is_zero() {
                continue;
            }
            let mut b = fbar.step(q).intersect(&wk)?;
            let mut j = 1;
            while k - j - 1 >= wmin {
                b = b.sum(&fbar.step(q - j).intersect(&w.step(k - j - 1))?)?;
                j += 1;
            }
            let i = a.intersect(&b)?;
            if !i.is_zero() {
                pieces.push(((p, q), i));
            }
        }
    }
    Bigrading::from_pieces(pieces, n, tol)
}

/// Hodge filtration `F^p = ⊕_{p' ≥ p} I^{p',q}` of a bigrading.
pub fn hodge_filtration_of<C: ComplexScalar>(b: &Bigrading<C>, tol: Tol) -> HodgeFiltration<C> {
    let mut ps: Vec<i64> = b.tags().iter().map(|t| t.0).collect();
    ps.sort();
    ps.dedup();
    let steps = ps
        .iter()
        .map(|&p| {
            let vs: Vec<Vec<C>> = b
                .pieces()
                .iter()
                .filter(|((pp, _), _)| *pp >= p)
                .flat_map(|(_, s)| s.basis_vectors())
                .collect();
            (p, Subspace::span(&vs, b.dim(), tol))
        })
        .collect();
    HodgeFiltration::new(b.dim(), steps, tol).expect("nested sums")
}

/// Weight filtration `W_k = ⊕_{p+q ≤ k} I^{p,q}`.
pub fn weight_filtration_of<C: ComplexScalar>(b: &Bigrading<C>, tol: Tol) -> Filtration<C> {
    let steps = b
        .weights()
        .iter()
        .map(|&k| {
            let vs: Vec<Vec<C>> = b
                .pieces()
                .iter()
                .filter(|((p, q), _)| p + q <= k)
                .flat_map(|(_, s)| s.basis_vectors())
                .collect();
            (k, Subspace::span(&vs, b.dim(), tol))
        })
        .collect();
    Filtration::new(b.dim(), steps, tol).expect("nested sums")
}
