//! `Hom(V1, V2)` as the row-major vectorization of `dim V2 x dim V1` matrices.

use super::filtration::Filtration;
use super::matrix::Matrix;
use super::scalar::Scalar;
use crate::error::HeightError;

/// Basis matrix (columns = adapted basis) and the weight of each column.
pub fn adapted_frame<F: Scalar>(w: &Filtration<F>) -> (Matrix<F>, Vec<i64>) {
    let basis = w.adapted_basis();
    let cols: Vec<Vec<F>> = basis.iter().map(|(_, v)| v.clone()).collect();
    let weights = basis.iter().map(|(k, _)| *k).collect();
    (Matrix::from_columns(&cols, w.ambient()), weights)
}

/// Induced filtration `W_k Hom = { f : f W1_a ⊆ W2_{a+k} }`.
pub fn hom_filtration<F: Scalar>(src: &Filtration<F>, dst: &Filtration<F>) -> Result<Filtration<F>, HeightError> {
    let (n1, n2) = (src.ambient(), dst.ambient());
    let tol = src.tol();
    if n1 == 0 || n2 == 0 {
        return Ok(Filtration::trivial(0, 0, tol));
    }
    let (b1, wt1) = adapted_frame(src);
    let (b2, wt2) = adapted_frame(dst);
    let b1inv = b1.inverse(tol).expect("adapted basis is a basis");
    let mut gens = Vec::with_capacity(n1 * n2);
    for r in 0..n2 {
        for c in 0..n1 {
            let g = Matrix::from_fn(n2, n1, |i, j| b2[(i, r)].mul(&b1inv[(c, j)]));
            gens.push((wt2[r] - wt1[c], g.vectorize()));
        }
    }
    Filtration::from_graded_basis(&gens, n1 * n2, tol)
}

/// Matrix of `f ↦ n2 f - f n1` on row-major `Hom(V1, V2)`.
pub fn ad_pair<F: Scalar>(n1: &Matrix<F>, n2: &Matrix<F>) -> Matrix<F> {
    let (a, b) = (n1.rows(), n2.rows());
    let mut ad = Matrix::<F>::zeros(a * b, a * b);
    for r in 0..b {
        for c in 0..a {
            let row = r * a + c;
            for k in 0..b {
                if !n2[(r, k)].is_zero() {
                    let v = ad[(row, k * a + c)].add(&n2[(r, k)]);
                    ad[(row, k * a + c)] = v;
                }
            }
            for k in 0..a {
                if !n1[(k, c)].is_zero() {
                    let v = ad[(row, r * a + k)].sub(&n1[(k, c)]);
                    ad[(row, r * a + k)] = v;
                }
            }
        }
    }
    ad
}

/// `Ad(N)` on `Hom(V, V)`.
pub fn ad<F: Scalar>(n: &Matrix<F>) -> Matrix<F> {
    ad_pair(n, n)
}

#[cfg(test)]
mod tests {
    use super::super::scalar::{q, Q, Tol};
    use super::super::subspace::Subspace;
    use super::*;

    #[test]
    fn ad_matches_commutator() {
        let n = Matrix::from_rows(vec![vec![q(0), q(1), q(2)], vec![q(0), q(0), q(3)], vec![q(0), q(0), q(0)]]);
        let x = Matrix::from_fn(3, 3, |r, c| q((r * 3 + c) as i64 - 4));
        let lhs = ad(&n).mul_vec(&x.vectorize());
        assert_eq!(lhs, n.commutator(&x).vectorize());
    }

    #[test]
    fn hom_weights_are_differences() {
        let line = Subspace::span(&[vec![q(1), q(0)]], 2, Tol::Exact);
        let w = Filtration::<Q>::new(2, vec![(-2, line), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).unwrap();
        let h = hom_filtration(&w, &w).unwrap();
        assert_eq!(h.weights(), vec![-2, 0, 2]);
        assert_eq!(h.graded_dim(0), 2);
        // e2 -> e1 lowers weight by 2
        let e12 = vec![q(0), q(1), q(0), q(0)];
        assert!(h.step(-2).contains_vector(&e12));
    }
}
