//! Relative monodromy filtrations, primitive components, graded splittings
//! of `W'` and the Deligne splitting of `W`, and the invariant classes `N̄_w`.

use rand::Rng;

use crate::error::HeightError;
use crate::qlinalg::hom::{ad, hom_filtration};
use crate::qlinalg::{Filtration, Matrix, QuotientSpace, RationalMatrix, Scalar, Subspace, Tol, Q};

/// Nilpotent endomorphism of `Q^n` together with its nilpotency index.
#[derive(Clone, Debug, PartialEq)]
pub struct NilpotentMap {
    matrix: RationalMatrix,
    index: usize,
}

impl NilpotentMap {
    pub fn new(matrix: RationalMatrix) -> Result<Self, HeightError> {
        if !matrix.is_square() {
            return Err(HeightError::InvalidNilpotent("matrix is not square".into()));
        }
        let n = matrix.rows();
        let mut power = Matrix::identity(n);
        for k in 0..=n {
            if power.is_zero() {
                return Ok(NilpotentMap { matrix, index: k });
            }
            power = power.mul(&matrix);
        }
        Err(HeightError::InvalidNilpotent("matrix is not nilpotent".into()))
    }

    pub fn zero(n: usize) -> Self {
        NilpotentMap { matrix: Matrix::zeros(n, n), index: usize::from(n > 0) }
    }

    /// Checks `N W_w ⊆ W_w` for every `w`.
    pub fn compatible_with(self, w: &Filtration<Q>) -> Result<Self, HeightError> {
        if w.ambient() != self.dim() {
            return Err(HeightError::DimensionMismatch { expected: self.dim(), found: w.ambient() });
        }
        if !w.is_stable_under(&self.matrix) {
            return Err(HeightError::InvalidNilpotent("N does not preserve the weight filtration".into()));
        }
        Ok(self)
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    /// Smallest `m` with `N^m = 0`.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn scaled(&self, c: &Q) -> Self {
        if Scalar::is_zero(c) {
            return Self::zero(self.dim());
        }
        NilpotentMap { matrix: self.matrix.scale(c), index: self.index }
    }

    /// `g N g^{-1}`.
    pub fn conjugate(&self, g: &RationalMatrix) -> Self {
        let gi = g.inverse(Tol::Exact).expect("invertible change of basis");
        NilpotentMap { matrix: g.mul(&self.matrix).mul(&gi), index: self.index }
    }
}

/// `gr^{W'}_j gr^W_k = (W'_j ∩ W_k) / (W'_{j-1} ∩ W_k + W'_j ∩ W_{k-1})`.
pub fn bigraded_piece<F: Scalar>(wp: &Filtration<F>, w: &Filtration<F>, j: i64, k: i64) -> QuotientSpace<F> {
    let num = wp.step(j).intersect(&w.step(k)).unwrap();
    let den = wp
        .step(j - 1)
        .intersect(&w.step(k))
        .unwrap()
        .sum(&wp.step(j).intersect(&w.step(k - 1)).unwrap())
        .unwrap();
    QuotientSpace::new(&num, &den).expect("bigraded denominators are nested")
}

/// Kernel of `N^j` on `Q^g`, for the Jordan analysis of one graded piece.
fn kernel_of_power(n: &RationalMatrix, j: usize) -> Subspace<Q> {
    Subspace::kernel_of(&n.pow(j), Tol::Exact)
}

/// Heads of Jordan chains of the nilpotent `n` on `Q^g`, as `(length - 1, vector)`.
fn jordan_heads(n: &RationalMatrix) -> Vec<(usize, Vec<Q>)> {
    let g = n.rows();
    let kernels: Vec<Subspace<Q>> = (0..=g + 1).map(|j| kernel_of_power(n, j)).collect();
    let mut heads = Vec::new();
    for l in (0..g).rev() {
        let lower = kernels[l].sum(&kernels[l + 2].image(n)).unwrap();
        let q = QuotientSpace::new(&kernels[l + 1], &lower).expect("nested kernels");
        for v in q.lifts() {
            heads.push((l, v.clone()));
        }
    }
    heads
}

/// The relative monodromy filtration `W'` of `(N, W)`.
///
/// Built weight by weight from the bottom of `W`: on `gr^W_k` the Jordan
/// chains of the induced map are lifted so that each head `ỹ` of length
/// `l + 1` satisfies `N^{l+1} ỹ ∈ W'_{k-l-2} ∩ W_{k-1}`. No such lift means
/// no `W'` exists. The candidate is always checked against both axioms.
pub fn relative_monodromy_filtration(n: &NilpotentMap, w: &Filtration<Q>) -> Result<Filtration<Q>, HeightError> {
    let dim = n.dim();
    if w.ambient() != dim {
        return Err(HeightError::DimensionMismatch { expected: dim, found: w.ambient() });
    }
    if !w.is_stable_under(n.matrix()) {
        return Err(HeightError::InvalidNilpotent("N does not preserve the weight filtration".into()));
    }
    if dim == 0 {
        return Ok(Filtration::trivial(0, 0, Tol::Exact));
    }
    let nm = n.matrix();
    // (k, j, vector) for every basis vector built so far.
    let mut assigned: Vec<(i64, i64, Vec<Q>)> = Vec::with_capacity(dim);
    for k in w.weights() {
        let piece = w.graded_piece(k);
        let nk = piece.induced_map(nm, &piece)?;
        let below = w.step(k - 1);
        let done = assigned.len();
        let mut annihilators: std::collections::HashMap<i64, Subspace<Q>> = Default::default();
        for (l, head) in jordan_heads(&nk) {
            let y0 = piece.lift(&head);
            let power = nm.pow(l + 1);
            let target_idx = k - l as i64 - 2;
            let ann = annihilators.entry(target_idx).or_insert_with(|| {
                let gens: Vec<Vec<Q>> =
                    assigned[..done].iter().filter(|(_, j, _)| *j <= target_idx).map(|(_, _, v)| v.clone()).collect();
                Subspace::span(&gens, dim, Tol::Exact).annihilator()
            });
            let mut lifted = y0.clone();
            if !ann.is_zero() {
                let a = ann.basis().mul(&power);
                let rhs: Vec<Q> = a.mul_vec(&y0).iter().map(|x| -x).collect();
                if below.is_zero() {
                    if rhs.iter().any(|x| !Scalar::is_zero(x)) {
                        return Err(non_existence(k, l));
                    }
                } else {
                    let b = below.basis().transpose();
                    let c = a.mul(&b).solve(&rhs, Tol::Exact).ok_or_else(|| non_existence(k, l))?;
                    lifted = crate::qlinalg::matrix::axpy(&Q::from_i64(1), &b.mul_vec(&c), &y0);
                }
            }
            let mut v = lifted;
            for i in 0..=l {
                assigned.push((k, k + l as i64 - 2 * i as i64, v.clone()));
                v = nm.mul_vec(&v);
            }
        }
    }
    let tagged: Vec<(i64, Vec<Q>)> = assigned.iter().map(|(_, j, v)| (*j, v.clone())).collect();
    let wp = Filtration::from_graded_basis(&tagged, dim, Tol::Exact)?;
    let tags: Vec<(i64, i64)> = assigned.iter().map(|(k, j, _)| (*k, *j)).collect();
    let cols: Vec<Vec<Q>> = assigned.into_iter().map(|(_, _, v)| v).collect();
    verify_in_adapted_basis(n, w, &Matrix::from_columns(&cols, dim), &tags).map_err(HeightError::NonExistence)?;
    Ok(wp)
}

/// Checks both axioms for the filtration spanned by the columns of `basis`
/// tagged `(k, j)`. The basis must span each `W_k` by its columns with tag
/// `k' <= k`; this is checked, after which every `gr^{W'}_j gr^W_k` is the
/// span of the columns tagged `(k, j)` and the axioms become block ranks of
/// `N` in this basis.
fn verify_in_adapted_basis(n: &NilpotentMap, w: &Filtration<Q>, basis: &RationalMatrix, tags: &[(i64, i64)]) -> Result<(), String> {
    let dim = n.dim();
    let inv = basis.inverse(Tol::Exact).ok_or("the constructed vectors are dependent")?;
    for k in w.weights() {
        let vs: Vec<Vec<Q>> = (0..dim).filter(|&c| tags[c].0 <= k).map(|c| basis.col(c)).collect();
        if Subspace::span(&vs, dim, Tol::Exact) != w.step(k) {
            return Err(format!("the constructed basis is not adapted to W_{k}"));
        }
    }
    let m = inv.mul(n.matrix()).mul(basis);
    for r in 0..dim {
        for c in 0..dim {
            if !Scalar::is_zero(&m[(r, c)]) && tags[r].1 > tags[c].1 - 2 {
                return Err("N does not lower W' by two".into());
            }
        }
    }
    let mut power: RationalMatrix = Matrix::identity(dim);
    let span = tags.iter().map(|t| t.1).max().unwrap_or(0) - tags.iter().map(|t| t.1).min().unwrap_or(0);
    for l in 0..=span {
        for k in w.weights() {
            let src: Vec<usize> = (0..dim).filter(|&c| tags[c] == (k, k + l)).collect();
            let dst: Vec<usize> = (0..dim).filter(|&c| tags[c] == (k, k - l)).collect();
            if src.len() != dst.len() {
                return Err(format!("gr^W'_{} gr^W_{k} and gr^W'_{} gr^W_{k} differ in dimension", k + l, k - l));
            }
            if src.is_empty() {
                continue;
            }
            let block = Matrix::from_fn(dst.len(), src.len(), |r, c| power[(dst[r], src[c])].clone());
            if block.rank(Tol::Exact) != src.len() {
                return Err(format!("N^{l} is not injective on gr^W'_{} gr^W_{k}", k + l));
            }
        }
        power = power.mul(&m);
    }
    Ok(())
}

fn non_existence(k: i64, l: usize) -> HeightError {
    HeightError::NonExistence(format!(
        "a Jordan chain of length {} on gr^W_{k} has no lift whose image under N^{} lies in W'_{}",
        l + 1,
        l + 1,
        k - l as i64 - 2
    ))
}

/// Checks `N W'_j ⊆ W'_{j-2}` and that `N^l : gr^{W'}_{k+l} gr^W_k -> gr^{W'}_{k-l} gr^W_k`
/// is an isomorphism for all `k` and `l >= 0`.
pub fn verify_rmf_axioms(n: &NilpotentMap, w: &Filtration<Q>, wp: &Filtration<Q>) -> Result<(), String> {
    if wp.ambient() != n.dim() {
        return Err("W' has the wrong ambient dimension".into());
    }
    if !wp.maps_into_shifted(n.matrix(), -2) {
        return Err("N does not lower W' by two".into());
    }
    let (Some(lo), Some(hi)) = (wp.min_weight(), wp.max_weight()) else {
        return Ok(());
    };
    let span = hi - lo;
    for k in w.weights() {
        let mut power = Matrix::identity(n.dim());
        for l in 0..=span.max(0) {
            let src = bigraded_piece(wp, w, k + l, k);
            let dst = bigraded_piece(wp, w, k - l, k);
            if src.dim() != dst.dim() {
                return Err(format!("gr^W'_{} gr^W_{k} and gr^W'_{} gr^W_{k} differ in dimension", k + l, k - l));
            }
            if src.dim() > 0 {
                let m = src.induced_map(&power, &dst).map_err(|e| e.to_string())?;
                if m.rank(Tol::Exact) != src.dim() {
                    return Err(format!("N^{l} is not injective on gr^W'_{} gr^W_{k}", k + l));
                }
            }
            power = power.mul(n.matrix());
        }
    }
    Ok(())
}

/// Primitive summand `A = ker N^{m+1}` of `gr^{W'}_{w+m} gr^W_w`, with its
/// complement `B = N gr^{W'}_{w+m+2} gr^W_w`. Subspaces are in the lift
/// coordinates of `quotient`.
#[derive(Clone, Debug)]
pub struct PrimitivePart {
    pub w: i64,
    pub m: i64,
    pub quotient: QuotientSpace<Q>,
    pub primitive: Subspace<Q>,
    pub image: Subspace<Q>,
}

pub fn primitive_component(
    n: &NilpotentMap,
    w: &Filtration<Q>,
    wp: &Filtration<Q>,
    weight: i64,
    m: i64,
) -> Result<PrimitivePart, HeightError> {
    if m < 0 {
        return Err(HeightError::Precondition("m must be nonnegative".into()));
    }
    let g = bigraded_piece(wp, w, weight + m, weight);
    let below = bigraded_piece(wp, w, weight - m - 2, weight);
    let above = bigraded_piece(wp, w, weight + m + 2, weight);
    let power = n.matrix().pow(m as usize + 1);
    let down = g.induced_map(&power, &below)?;
    let primitive = Subspace::kernel_of(&down, Tol::Exact);
    let up = above.induced_map(n.matrix(), &g)?;
    let image = Subspace::column_space(&up, Tol::Exact);
    let (image, primitive) = if g.dim() == 0 {
        (Subspace::zero(0, Tol::Exact), Subspace::zero(0, Tol::Exact))
    } else {
        (image, primitive)
    };
    if !primitive.intersect(&image)?.is_zero() || primitive.dim() + image.dim() != g.dim() {
        return Err(HeightError::Precondition(format!(
            "gr^W'_{} gr^W_{weight} is not the direct sum of its primitive part and the image of N",
            weight + m
        )));
    }
    Ok(PrimitivePart { w: weight, m, quotient: g, primitive, image })
}

/// A splitting `V = ⊕ U_n` of a filtration, remembered through a basis whose
/// columns are homogeneous.
#[derive(Clone, Debug)]
pub struct GradedSplitting {
    basis: RationalMatrix,
    weights: Vec<i64>,
    components: Vec<(i64, Subspace<Q>)>,
}

impl PartialEq for GradedSplitting {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components
    }
}

impl GradedSplitting {
    /// From a basis (columns) and the weight of each column.
    pub fn from_basis(basis: RationalMatrix, weights: Vec<i64>) -> Self {
        let n = basis.rows();
        let mut ws = weights.clone();
        ws.sort();
        ws.dedup();
        let components = ws
            .iter()
            .map(|&k| {
                let vs: Vec<Vec<Q>> =
                    (0..basis.cols()).filter(|&c| weights[c] == k).map(|c| basis.col(c)).collect();
                (k, Subspace::span(&vs, n, Tol::Exact))
            })
            .collect();
        GradedSplitting { basis, weights, components }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Nonzero components in increasing weight.
    pub fn components(&self) -> &[(i64, Subspace<Q>)] {
        &self.components
    }

    pub fn component(&self, k: i64) -> Subspace<Q> {
        self.components
            .iter()
            .find(|(w, _)| *w == k)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| Subspace::zero(self.dim(), Tol::Exact))
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    /// Grading operator acting by `k` on `U_k`.
    pub fn grading(&self) -> RationalMatrix {
        let d = Matrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                Q::from_i64(self.weights[r])
            } else {
                Q::from_i64(0)
            }
        });
        let inv = self.basis.inverse(Tol::Exact).expect("splitting basis");
        self.basis.mul(&d).mul(&inv)
    }

    /// Projection onto `U_k` along the other components.
    pub fn projector(&self, k: i64) -> RationalMatrix {
        let d = Matrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c && self.weights[r] == k {
                Q::from_i64(1)
            } else {
                Q::from_i64(0)
            }
        });
        let inv = self.basis.inverse(Tol::Exact).expect("splitting basis");
        self.basis.mul(&d).mul(&inv)
    }

    /// `F_w = ⊕_{n <= w} U_n` for every `w`.
    pub fn splits(&self, f: &Filtration<Q>) -> bool {
        if f.ambient() != self.dim() {
            return false;
        }
        let mut ws: Vec<i64> = f.weights();
        ws.extend(self.components.iter().map(|(k, _)| *k));
        ws.sort();
        ws.dedup();
        ws.iter().all(|&k| {
            let vs: Vec<Vec<Q>> =
                (0..self.basis.cols()).filter(|&c| self.weights[c] <= k).map(|c| self.basis.col(c)).collect();
            Subspace::span(&vs, self.dim(), Tol::Exact) == f.step(k)
        })
    }
}

/// Basis adapted simultaneously to `W'` and `W`: columns lift the bigraded
/// pieces `gr^{W'}_j gr^W_k`. Returns `(basis, k per column, j per column)`.
pub fn bigraded_basis(w: &Filtration<Q>, wp: &Filtration<Q>) -> (RationalMatrix, Vec<i64>, Vec<i64>) {
    let n = w.ambient();
    let mut cols = Vec::with_capacity(n);
    let (mut ks, mut js) = (Vec::new(), Vec::new());
    for k in w.weights() {
        for j in wp.weights() {
            for v in bigraded_piece(wp, w, j, k).lifts() {
                cols.push(v.clone());
                ks.push(k);
                js.push(j);
            }
        }
    }
    (Matrix::from_columns(&cols, n), ks, js)
}

/// All splittings `U'` of `W'` compatible with `W` and with `N U'_j ⊆ U'_{j-2}`,
/// as an affine family over the rationals.
///
/// A member has grading operator `B (D + Z) B^{-1}` where `B` is the
/// bigraded basis, `D` the diagonal of `W'`-indices, and `Z` is supported on
/// entries that strictly lower `W'` and do not raise `W`; `[D + Z, B^{-1} N B] = -2 B^{-1} N B`
/// is the linear constraint.
#[derive(Clone, Debug)]
pub struct SplittingFamily {
    basis: RationalMatrix,
    js: Vec<i64>,
    unknowns: Vec<(usize, usize)>,
    particular: Vec<Q>,
    kernel: Vec<Vec<Q>>,
}

impl SplittingFamily {
    pub fn new(n: &NilpotentMap, w: &Filtration<Q>, wp: &Filtration<Q>) -> Result<Self, HeightError> {
        let dim = n.dim();
        let (basis, ks, js) = bigraded_basis(w, wp);
        if basis.cols() != dim {
            return Err(HeightError::NotFound("W and W' admit no common adapted basis".into()));
        }
        let binv = basis.inverse(Tol::Exact).expect("bigraded basis");
        let nb = binv.mul(n.matrix()).mul(&basis);
        let unknowns: Vec<(usize, usize)> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .filter(|&(r, c)| js[r] < js[c] && ks[r] <= ks[c])
            .collect();
        // [Z, nb] = -2 nb - [D, nb]; entrywise: [D, nb]_{rc} = (j_r - j_c) nb_{rc}.
        let rhs: Vec<Q> = (0..dim * dim)
            .map(|e| {
                let (r, c) = (e / dim, e % dim);
                let coeff = Q::from_i64(-2 - (js[r] - js[c]));
                coeff * &nb[(r, c)]
            })
            .collect();
        let mut sys = Matrix::<Q>::zeros(dim * dim, unknowns.len());
        for (u, &(a, b)) in unknowns.iter().enumerate() {
            // [E_ab, nb] = E_ab nb - nb E_ab
            for c in 0..dim {
                let x = &nb[(b, c)];
                if !Scalar::is_zero(x) {
                    let v = &sys[(a * dim + c, u)] + x;
                    sys[(a * dim + c, u)] = v;
                }
            }
            for r in 0..dim {
                let x = &nb[(r, a)];
                if !Scalar::is_zero(x) {
                    let v = &sys[(r * dim + b, u)] - x;
                    sys[(r * dim + b, u)] = v;
                }
            }
        }
        let particular = if unknowns.is_empty() {
            if rhs.iter().any(|x| !Scalar::is_zero(x)) {
                return Err(HeightError::NotFound("N does not lower the W'-grading by two".into()));
            }
            vec![]
        } else {
            sys.solve(&rhs, Tol::Exact)
                .ok_or_else(|| HeightError::NotFound("the splitting constraints are inconsistent".into()))?
        };
        let kernel = if unknowns.is_empty() { vec![] } else { sys.kernel(Tol::Exact) };
        Ok(SplittingFamily { basis, js, unknowns, particular, kernel })
    }

    /// Number of free parameters.
    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }

    /// Member `particular + Σ coeffs[i] kernel[i]`.
    pub fn member(&self, coeffs: &[Q]) -> GradedSplitting {
        assert_eq!(coeffs.len(), self.kernel.len());
        let dim = self.basis.rows();
        let mut z = self.particular.clone();
        for (c, k) in coeffs.iter().zip(&self.kernel) {
            for (zi, ki) in z.iter_mut().zip(k) {
                *zi = &*zi + c * ki;
            }
        }
        let mut m = Matrix::from_fn(dim, dim, |r, c| {
            if r == c {
                Q::from_i64(self.js[r])
            } else {
                Q::from_i64(0)
            }
        });
        for (&(r, c), v) in self.unknowns.iter().zip(&z) {
            m[(r, c)] = v.clone();
        }
        // D + Z is triangular for the W'-order with diagonal D; its
        // eigenvectors, pushed through B, are the splitting.
        let mut cols = Vec::with_capacity(dim);
        let mut weights = Vec::with_capacity(dim);
        let mut distinct = self.js.clone();
        distinct.sort();
        distinct.dedup();
        for &j in &distinct {
            let shifted = m.sub(&Matrix::identity(dim).scale(&Q::from_i64(j)));
            for v in shifted.kernel(Tol::Exact) {
                cols.push(self.basis.mul_vec(&v));
                weights.push(j);
            }
        }
        GradedSplitting::from_basis(Matrix::from_columns(&cols, dim), weights)
    }

    /// The member with every free parameter zero.
    pub fn particular(&self) -> GradedSplitting {
        self.member(&vec![Q::from_i64(0); self.kernel.len()])
    }

    /// A member with integer parameters drawn uniformly from `[-bound, bound]`.
    pub fn random<R: Rng>(&self, rng: &mut R, bound: i64) -> GradedSplitting {
        let coeffs: Vec<Q> = (0..self.kernel.len()).map(|_| Q::from_i64(rng.gen_range(-bound..=bound))).collect();
        self.member(&coeffs)
    }
}

/// Deterministic graded splitting of `W'`: the member of the splitting family
/// with all free parameters set to zero.
pub fn find_graded_splitting(
    n: &NilpotentMap,
    w: &Filtration<Q>,
    wp: &Filtration<Q>,
) -> Result<GradedSplitting, HeightError> {
    Ok(SplittingFamily::new(n, w, wp)?.particular())
}

/// Deligne's splitting `U` of `W` relative to a splitting `U'` of `W'`, with
/// the components `N_w` of `N` for the `U`-grading.
#[derive(Clone, Debug)]
pub struct DeligneSplitting {
    pub u: GradedSplitting,
    pub uprime: GradedSplitting,
    /// `N` in the joint basis `u.basis()`.
    n_coords: RationalMatrix,
    js: Vec<i64>,
}

impl DeligneSplitting {
    /// Component of `N` mapping `U_m` into `U_{m+w}`, in ambient coordinates.
    pub fn component(&self, w: i64) -> RationalMatrix {
        let ks = self.u.weights();
        let part = Matrix::from_fn(self.n_coords.rows(), self.n_coords.cols(), |r, c| {
            if ks[r] - ks[c] == w {
                self.n_coords[(r, c)].clone()
            } else {
                Q::from_i64(0)
            }
        });
        let b = self.u.basis();
        b.mul(&part).mul(&b.inverse(Tol::Exact).unwrap())
    }

    /// `U'`-index of each joint basis column.
    pub fn uprime_weights(&self) -> &[i64] {
        &self.js
    }
}

fn weight_component(m: &RationalMatrix, ks: &[i64], w: i64) -> RationalMatrix {
    Matrix::from_fn(m.rows(), m.cols(), |r, c| if ks[r] - ks[c] == w { m[(r, c)].clone() } else { Q::from_i64(0) })
}

fn ad_power(n0: &RationalMatrix, x: &RationalMatrix, k: usize) -> RationalMatrix {
    let mut y = x.clone();
    for _ in 0..k {
        y = n0.commutator(&y);
    }
    y
}

pub fn deligne_splitting(
    n: &NilpotentMap,
    w: &Filtration<Q>,
    wp: &Filtration<Q>,
    uprime: &GradedSplitting,
) -> Result<DeligneSplitting, HeightError> {
    let dim = n.dim();
    if !uprime.splits(wp) {
        return Err(HeightError::Precondition("U' does not split W'".into()));
    }
    // Joint basis: inside each U'_j, a basis adapted to W ∩ U'_j.
    let mut cols = Vec::with_capacity(dim);
    let (mut ks, mut js) = (Vec::new(), Vec::new());
    for (j, s) in uprime.components() {
        let restricted = w.restrict(s)?;
        let sb = s.basis_vectors();
        for (k, coords) in restricted.adapted_basis() {
            cols.push(crate::qlinalg::matrix::combine(&coords, &sb, dim));
            ks.push(k);
            js.push(*j);
        }
    }
    let mut basis = Matrix::from_columns(&cols, dim);
    if basis.cols() != dim || basis.rank(Tol::Exact) != dim || !GradedSplitting::from_basis(basis.clone(), ks.clone()).splits(w) {
        return Err(HeightError::Precondition("U' is not compatible with W".into()));
    }
    let binv = basis.inverse(Tol::Exact).unwrap();
    let mut nc = binv.mul(n.matrix()).mul(&basis);
    for (r, c) in (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c))) {
        if !Scalar::is_zero(&nc[(r, c)]) && js[r] - js[c] > -2 {
            return Err(HeightError::Precondition("N does not map U'_j into U'_{j-2}".into()));
        }
    }
    let span = match (w.min_weight(), w.max_weight()) {
        (Some(a), Some(b)) => b - a,
        _ => 0,
    };
    for k in 1..=span {
        let n0 = weight_component(&nc, &ks, 0);
        let nk = weight_component(&nc, &ks, -k);
        let ku = k as usize;
        let rhs = ad_power(&n0, &nk, ku - 1).neg().vectorize();
        let unknowns: Vec<(usize, usize)> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .filter(|&(r, c)| ks[r] - ks[c] == -k && js[r] == js[c])
            .collect();
        if unknowns.is_empty() {
            if rhs.iter().any(|x| !Scalar::is_zero(x)) {
                return Err(HeightError::Precondition(format!("no correction of weight -{k} normalizes N")));
            }
            continue;
        }
        let sys_cols: Vec<Vec<Q>> = unknowns
            .iter()
            .map(|&(r, c)| {
                let mut e = Matrix::<Q>::zeros(dim, dim);
                e[(r, c)] = Q::from_i64(1);
                ad_power(&n0, &e, ku).vectorize()
            })
            .collect();
        let sys = Matrix::from_columns(&sys_cols, dim * dim);
        let sol = sys
            .solve(&rhs, Tol::Exact)
            .ok_or_else(|| HeightError::Precondition(format!("the weight -{k} normalization has no solution")))?;
        let mut z = Matrix::<Q>::zeros(dim, dim);
        for (&(r, c), v) in unknowns.iter().zip(sol) {
            z[(r, c)] = v;
        }
        if z.is_zero() {
            continue;
        }
        let g = z.exp_nilpotent();
        let gi = z.neg().exp_nilpotent();
        basis = basis.mul(&g);
        nc = gi.mul(&nc).mul(&g);
    }
    let split = DeligneSplitting {
        u: GradedSplitting::from_basis(basis.clone(), ks.clone()),
        uprime: GradedSplitting::from_basis(basis, js.clone()),
        n_coords: nc,
        js,
    };
    verify_deligne(&split, w, span)?;
    Ok(split)
}

fn verify_deligne(s: &DeligneSplitting, w: &Filtration<Q>, span: i64) -> Result<(), HeightError> {
    if !s.u.splits(w) {
        return Err(HeightError::Precondition("U does not split W".into()));
    }
    let ks = s.u.weights();
    let n0 = weight_component(&s.n_coords, ks, 0);
    if !weight_component(&s.n_coords, ks, -1).is_zero() {
        return Err(HeightError::Precondition("the weight -1 component of N is nonzero".into()));
    }
    for k in 2..=span {
        let nk = weight_component(&s.n_coords, ks, -k);
        if !ad_power(&n0, &nk, (k - 1) as usize).is_zero() {
            return Err(HeightError::Precondition(format!("N_-{k} is not primitive")));
        }
    }
    for (r, c) in (0..s.js.len()).flat_map(|r| (0..s.js.len()).map(move |c| (r, c))) {
        if !Scalar::is_zero(&s.n_coords[(r, c)]) && s.js[r] - s.js[c] != -2 {
            return Err(HeightError::Precondition("N is not homogeneous of U'-degree -2".into()));
        }
    }
    Ok(())
}

/// Precomputed Hom filtrations for evaluating `N̄_w`.
#[derive(Clone, Debug)]
pub struct NbarContext {
    n: NilpotentMap,
    w: Filtration<Q>,
    wp: Filtration<Q>,
    whom: Filtration<Q>,
    wphom: Filtration<Q>,
}

impl NbarContext {
    pub fn new(n: &NilpotentMap, w: &Filtration<Q>, wp: &Filtration<Q>) -> Result<Self, HeightError> {
        Ok(NbarContext {
            n: n.clone(),
            w: w.clone(),
            wp: wp.clone(),
            whom: hom_filtration(w, w)?,
            wphom: hom_filtration(wp, wp)?,
        })
    }

    /// `gr^{W'}_{-2} gr^W_w Hom(V, V)` with canonical lift coordinates.
    pub fn space(&self, weight: i64) -> QuotientSpace<Q> {
        bigraded_piece(&self.wphom, &self.whom, -2, weight)
    }

    /// Class of `N_w` for the Deligne splitting attached to `uprime`.
    pub fn class(&self, weight: i64, uprime: &GradedSplitting) -> Result<Vec<Q>, HeightError> {
        let split = deligne_splitting(&self.n, &self.w, &self.wp, uprime)?;
        self.class_of(weight, &split)
    }

    pub fn class_of(&self, weight: i64, split: &DeligneSplitting) -> Result<Vec<Q>, HeightError> {
        let space = self.space(weight);
        space
            .class_coordinates(&split.component(weight).vectorize())
            .ok_or_else(|| HeightError::Precondition(format!("N_{weight} does not lie in W_{weight} ∩ W'_-2 of Hom")))
    }
}

/// The class `N̄_w ∈ gr^{W'}_{-2} gr^W_w Hom(V, V)` (for `w <= -2`), in the
/// canonical coordinates of that quotient. It does not depend on `uprime`.
pub fn nbar(
    n: &NilpotentMap,
    w: &Filtration<Q>,
    wp: &Filtration<Q>,
    weight: i64,
    uprime: Option<&GradedSplitting>,
) -> Result<Vec<Q>, HeightError> {
    if weight > -2 {
        return Err(HeightError::Precondition("N̄_w is defined for w <= -2".into()));
    }
    let ctx = NbarContext::new(n, w, wp)?;
    match uprime {
        Some(u) => ctx.class(weight, u),
        None => ctx.class(weight, &find_graded_splitting(n, w, wp)?),
    }
}

/// Compares the relative monodromy filtration of `Ad(N)` on `Hom(V, V)`
/// (relative to the filtration induced by `W`) with the filtration induced
/// by `W'`.
pub fn hom_filtration_check(n: &NilpotentMap, w: &Filtration<Q>, wp: &Filtration<Q>) -> Result<bool, HeightError> {
    let whom = hom_filtration(w, w)?;
    let wphom = hom_filtration(wp, wp)?;
    let adn = NilpotentMap::new(ad(n.matrix()))?;
    match relative_monodromy_filtration(&adn, &whom) {
        Ok(m) => Ok(m == wphom),
        Err(HeightError::NonExistence(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::q;

    fn e12(n: usize, k: i64) -> NilpotentMap {
        let mut m = Matrix::zeros(n, n);
        m[(0, 1)] = q(k);
        NilpotentMap::new(m).unwrap()
    }

    fn line(n: usize, i: usize) -> Subspace<Q> {
        Subspace::span(&[crate::qlinalg::matrix::unit_vector(n, i)], n, Tol::Exact)
    }

    fn kummer_w() -> Filtration<Q> {
        Filtration::new(2, vec![(-2, line(2, 0)), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).unwrap()
    }

    #[test]
    fn jordan_block_pure_weight() {
        let w = Filtration::trivial(2, 0, Tol::Exact);
        let wp = relative_monodromy_filtration(&e12(2, 1), &w).unwrap();
        assert!(wp.step(-2).is_zero());
        assert_eq!(wp.step(-1), line(2, 0));
        assert_eq!(wp.step(0), line(2, 0));
        assert!(wp.step(1).is_full());
    }

    #[test]
    fn adjacent_weights_have_no_rmf() {
        let w = Filtration::new(2, vec![(-1, line(2, 0)), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).unwrap();
        let r = relative_monodromy_filtration(&e12(2, 1), &w);
        assert!(matches!(r, Err(HeightError::NonExistence(_))));
    }

    #[test]
    fn kummer_splittings() {
        let w = kummer_w();
        let n = e12(2, 3);
        let wp = relative_monodromy_filtration(&n, &w).unwrap();
        assert_eq!(wp, w);
        let up = find_graded_splitting(&n, &w, &wp).unwrap();
        assert_eq!(up.component(0), line(2, 1));
        assert_eq!(up.component(-2), line(2, 0));
        let d = deligne_splitting(&n, &w, &wp, &up).unwrap();
        assert_eq!(d.component(-2), n.matrix().clone());
        let class = nbar(&n, &w, &wp, -2, None).unwrap();
        assert_eq!(class, vec![q(3)]);
        assert!(hom_filtration_check(&n, &w, &wp).unwrap());
    }

    #[test]
    fn primitive_parts_of_jordan_blocks() {
        let w = Filtration::trivial(3, 0, Tol::Exact);
        let mut m = Matrix::zeros(3, 3);
        m[(0, 1)] = q(1);
        m[(1, 2)] = q(1);
        let n = NilpotentMap::new(m).unwrap();
        let wp = relative_monodromy_filtration(&n, &w).unwrap();
        let p = primitive_component(&n, &w, &wp, 0, 0).unwrap();
        assert_eq!(p.quotient.dim(), 1);
        assert!(p.primitive.is_zero());
        let p2 = primitive_component(&n, &w, &wp, 0, 2).unwrap();
        assert_eq!(p2.primitive.dim(), 1);
    }
}
