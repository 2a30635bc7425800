use super::matrix::Matrix;
use super::scalar::{Scalar, Tol};
use super::subspace::{QuotientSpace, Subspace};
use crate::error::HeightError;

/// Finite increasing filtration, stored by its jumps.
///
/// `jumps` lists `(w, F_w)` for exactly those `w` with `F_{w-1} != F_w`, in
/// increasing order; the last entry is the ambient space. Queries below the
/// first jump return zero, above the last return the full space.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration<F> {
    ambient: usize,
    jumps: Vec<(i64, Subspace<F>)>,
    tol: Tol,
}

impl<F: Scalar> Filtration<F> {
    /// Builds a filtration from arbitrary steps `(w, F_w)`. Steps need not be
    /// listed at every index; missing indices inherit the step below.
    /// Redundant entries are dropped.
    pub fn new(ambient: usize, steps: Vec<(i64, Subspace<F>)>, tol: Tol) -> Result<Self, HeightError> {
        let mut steps = steps;
        steps.sort_by_key(|(w, _)| *w);
        for pair in steps.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(HeightError::InvalidFiltration(format!("index {} listed twice", pair[0].0)));
            }
        }
        let mut jumps: Vec<(i64, Subspace<F>)> = Vec::new();
        let mut prev = Subspace::zero(ambient, tol);
        for (w, s) in steps {
            if s.ambient() != ambient {
                return Err(HeightError::DimensionMismatch { expected: ambient, found: s.ambient() });
            }
            if !s.contains(&prev)? {
                return Err(HeightError::InvalidFiltration(format!("step {w} does not contain the step below it")));
            }
            if s.dim() > prev.dim() {
                jumps.push((w, s.clone()));
                prev = s;
            }
        }
        if prev.dim() != ambient {
            return Err(HeightError::InvalidFiltration("top step is not the whole space".into()));
        }
        Ok(Filtration { ambient, jumps, tol })
    }

    /// `0 = F_{w0-1} ⊂ F_{w0} = V`.
    pub fn trivial(ambient: usize, w0: i64, tol: Tol) -> Self {
        let jumps = if ambient == 0 { vec![] } else { vec![(w0, Subspace::full(ambient, tol))] };
        Filtration { ambient, jumps, tol }
    }

    /// Filtration with `F_w` spanned by the basis vectors of weight `<= w`.
    pub fn from_graded_basis(basis: &[(i64, Vec<F>)], ambient: usize, tol: Tol) -> Result<Self, HeightError> {
        let mut weights: Vec<i64> = basis.iter().map(|(w, _)| *w).collect();
        weights.sort();
        weights.dedup();
        let steps = weights
            .iter()
            .map(|&w| {
                let vs: Vec<Vec<F>> = basis.iter().filter(|(u, _)| *u <= w).map(|(_, v)| v.clone()).collect();
                (w, Subspace::span(&vs, ambient, tol))
            })
            .collect();
        Self::new(ambient, steps, tol)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn tol(&self) -> Tol {
        self.tol
    }

    pub fn jumps(&self) -> &[(i64, Subspace<F>)] {
        &self.jumps
    }

    /// Indices with a nonzero graded piece.
    pub fn weights(&self) -> Vec<i64> {
        self.jumps.iter().map(|(w, _)| *w).collect()
    }

    pub fn min_weight(&self) -> Option<i64> {
        self.jumps.first().map(|(w, _)| *w)
    }

    pub fn max_weight(&self) -> Option<i64> {
        self.jumps.last().map(|(w, _)| *w)
    }

    pub fn step(&self, w: i64) -> Subspace<F> {
        match self.jumps.iter().rev().find(|(u, _)| *u <= w) {
            Some((_, s)) => s.clone(),
            None => Subspace::zero(self.ambient, self.tol),
        }
    }

    pub fn graded_dim(&self, w: i64) -> usize {
        self.step(w).dim() - self.step(w - 1).dim()
    }

    /// `F_w / F_{w-1}` with its canonical lift basis.
    pub fn graded_piece(&self, w: i64) -> QuotientSpace<F> {
        QuotientSpace::new(&self.step(w), &self.step(w - 1)).expect("filtration steps are nested")
    }

    /// Basis adapted to the filtration: lifts of each graded piece in
    /// increasing weight, each tagged with its weight.
    pub fn adapted_basis(&self) -> Vec<(i64, Vec<F>)> {
        let mut out = Vec::with_capacity(self.ambient);
        for w in self.weights() {
            for v in self.graded_piece(w).lifts() {
                out.push((w, v.clone()));
            }
        }
        out
    }

    /// `F_w ∩ S`, in the coordinates of the canonical basis of `S`.
    pub fn restrict(&self, s: &Subspace<F>) -> Result<Self, HeightError> {
        if s.ambient() != self.ambient {
            return Err(HeightError::DimensionMismatch { expected: self.ambient, found: s.ambient() });
        }
        let mut steps = Vec::new();
        for (w, step) in &self.jumps {
            let meet = step.intersect(s)?;
            let coords: Vec<Vec<F>> =
                meet.basis_vectors().iter().map(|v| s.coordinates(v).expect("meet lies in S")).collect();
            steps.push((*w, Subspace::span(&coords, s.dim(), self.tol)));
        }
        Self::new(s.dim(), steps, self.tol)
    }

    /// Image of `F_w` in `V / S`, in the coordinates of the canonical lift
    /// basis of the quotient.
    pub fn quotient(&self, s: &Subspace<F>) -> Result<Self, HeightError> {
        if s.ambient() != self.ambient {
            return Err(HeightError::DimensionMismatch { expected: self.ambient, found: s.ambient() });
        }
        let qs = QuotientSpace::new(&Subspace::full(self.ambient, self.tol), s)?;
        let mut steps = Vec::new();
        for (w, step) in &self.jumps {
            let coords: Vec<Vec<F>> =
                step.basis_vectors().iter().map(|v| qs.class_coordinates(v).expect("ambient vector")).collect();
            steps.push((*w, Subspace::span(&coords, qs.dim(), self.tol)));
        }
        Self::new(qs.dim(), steps, self.tol)
    }

    /// Re-indexed copy with `shift(k).step(w) == step(w - k)`.
    pub fn shift(&self, k: i64) -> Self {
        Filtration {
            ambient: self.ambient,
            jumps: self.jumps.iter().map(|(w, s)| (w + k, s.clone())).collect(),
            tol: self.tol,
        }
    }

    /// `m F_w ⊆ F_{w+k}` for every `w`.
    pub fn maps_into_shifted(&self, m: &Matrix<F>, k: i64) -> bool {
        self.jumps.iter().all(|(w, s)| self.step(w + k).contains(&s.image(m)).unwrap())
    }

    pub fn is_stable_under(&self, m: &Matrix<F>) -> bool {
        self.maps_into_shifted(m, 0)
    }

    /// Transport along an invertible change of coordinates `g` (new = g old).
    pub fn transform(&self, g: &Matrix<F>) -> Self {
        Filtration {
            ambient: self.ambient,
            jumps: self.jumps.iter().map(|(w, s)| (*w, s.image(g))).collect(),
            tol: self.tol,
        }
    }
}
