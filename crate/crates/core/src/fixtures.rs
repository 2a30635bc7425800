//! Random test data with known answers.
//!
//! A bigraded fixture starts from a basis tagged by `(k, j)`: `k` is the
//! weight and `j` the index of the relative monodromy filtration. On each
//! `gr^W_k` the map is a sum of Jordan chains centered at `k`, and the rest of
//! `N` lowers `k` and lowers `j` by exactly two (or at least two, see
//! [`FixtureShape::exact_degree`]). The `j`-filtration is then the relative
//! monodromy filtration, which the generator returns alongside.
//!
//! A mixed Hodge fixture starts from a bigrading split over the reals, in a
//! random rational basis, and moves it by `exp(iδ)` for a planted real `δ`
//! whose components all have bidegree `(a, b)` with `a, b < 0`.

use num_bigint::BigUint;
use rand::Rng;

use crate::error::HeightError;
use crate::geoheight::{Polarization, PolarizedFiltration};
use crate::hodge::{HodgeFiltration, MixedHodgeStructure, PlaceKind};
use crate::monodromy::NilpotentMap;
use crate::motives::{ArchHodge, ArchPlaceData, FinitePlaceData, MotiveData};
use crate::numeric::{ComplexScalar, Gq};
use crate::qlinalg::{Filtration, Matrix, RationalMatrix, Scalar, Subspace, Tol, Q};

/// Random data with a known relative monodromy filtration.
#[derive(Clone, Debug)]
pub struct BigradedFixture {
    pub w: Filtration<Q>,
    pub n: NilpotentMap,
    pub wp: Filtration<Q>,
    /// `(k, j)` of each column of `basis`.
    pub tags: Vec<(i64, i64)>,
    pub basis: RationalMatrix,
    /// Chains on each graded piece as `(k, first column, length)`.
    pub chains: Vec<(i64, usize, usize)>,
}

/// Shape options for [`bigraded_fixture`].
#[derive(Clone, Copy, Debug)]
pub struct FixtureShape {
    pub max_dim: usize,
    /// Chain length `l + 1` must satisfy `l ≡ k (mod 2)`.
    pub hodge_tate: bool,
    /// Apply a random change of basis at the end.
    pub scramble: bool,
    /// Entry bound for the random integers.
    pub bound: i64,
    /// Off-diagonal parts of `N` lower `j` by exactly two, so the tag
    /// grading is an `N`-graded splitting. Otherwise by at least two.
    pub exact_degree: bool,
}

impl Default for FixtureShape {
    fn default() -> Self {
        FixtureShape { max_dim: 6, hodge_tate: false, scramble: true, bound: 2, exact_degree: true }
    }
}

fn q(n: i64) -> Q {
    Q::from_i64(n)
}

fn span_of(cols: &Matrix<Q>, idx: &[usize]) -> Subspace<Q> {
    let vs: Vec<Vec<Q>> = idx.iter().map(|&c| cols.col(c)).collect();
    Subspace::span(&vs, cols.rows(), Tol::Exact)
}

fn filtration_by<F: Fn(usize) -> i64>(basis: &Matrix<Q>, tag: F) -> Filtration<Q> {
    let n = basis.cols();
    let mut ws: Vec<i64> = (0..n).map(&tag).collect();
    ws.sort();
    ws.dedup();
    let steps = ws
        .iter()
        .map(|&k| {
            let idx: Vec<usize> = (0..n).filter(|&c| tag(c) <= k).collect();
            (k, span_of(basis, &idx))
        })
        .collect();
    Filtration::new(basis.rows(), steps, Tol::Exact).expect("nested spans")
}

/// Random invertible integer matrix: product of a unit lower and a unit
/// upper triangular matrix with a permutation.
pub fn random_unimodular<R: Rng>(rng: &mut R, n: usize, bound: i64) -> RationalMatrix {
    let l = Matrix::from_fn(n, n, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Equal => q(1),
        std::cmp::Ordering::Greater => q(rng.gen_range(-bound..=bound)),
        std::cmp::Ordering::Less => q(0),
    });
    let u = Matrix::from_fn(n, n, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Equal => q(1),
        std::cmp::Ordering::Less => q(rng.gen_range(-bound..=bound)),
        std::cmp::Ordering::Greater => q(0),
    });
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let p = Matrix::from_fn(n, n, |r, c| if perm[r] == c { q(1) } else { q(0) });
    p.mul(&l).mul(&u)
}

pub fn bigraded_fixture<R: Rng>(rng: &mut R, shape: FixtureShape) -> BigradedFixture {
    let dim = rng.gen_range(1..=shape.max_dim.max(1));
    // Weights: ascending with gaps of 1 or 2.
    let mut tags: Vec<(i64, i64)> = Vec::with_capacity(dim);
    let mut chains = Vec::new();
    let mut k = rng.gen_range(-3..=0);
    while tags.len() < dim {
        let room = dim - tags.len();
        let piece = rng.gen_range(1..=room.min(3));
        let mut used = 0;
        while used < piece {
            let mut len = rng.gen_range(1..=piece - used);
            if shape.hodge_tate && (len as i64 - 1 - k).rem_euclid(2) != 0 {
                len -= 1;
                if len == 0 {
                    // a single vector needs k even; skip to the next weight
                    break;
                }
            }
            let l = len as i64 - 1;
            chains.push((k, tags.len(), len));
            for i in 0..len as i64 {
                tags.push((k, k + l - 2 * i));
            }
            used += len;
        }
        k += rng.gen_range(1..=2);
    }
    let n = tags.len();
    let mut nm = Matrix::<Q>::zeros(n, n);
    for &(_, start, len) in &chains {
        for i in 0..len - 1 {
            nm[(start + i + 1, start + i)] = q(1);
        }
    }
    for c in 0..n {
        for r in 0..n {
            let (kc, jc) = tags[c];
            let (kr, jr) = tags[r];
            let degree_ok = if shape.exact_degree { jr == jc - 2 } else { jr <= jc - 2 };
            if kr < kc && degree_ok && rng.gen_bool(0.6) {
                nm[(r, c)] = q(rng.gen_range(-shape.bound..=shape.bound));
            }
        }
    }
    // Unipotent change preserving both filtrations.
    let g = Matrix::from_fn(n, n, |r, c| {
        if r == c {
            q(1)
        } else if tags[r].0 < tags[c].0 && tags[r].1 < tags[c].1 && rng.gen_bool(0.5) {
            q(rng.gen_range(-shape.bound..=shape.bound))
        } else {
            q(0)
        }
    });
    let h = if shape.scramble { random_unimodular(rng, n, 1).mul(&g) } else { g };
    let hinv = h.inverse(Tol::Exact).expect("unimodular");
    let basis = h.clone();
    let n_amb = h.mul(&nm).mul(&hinv);
    let w = filtration_by(&basis, |c| tags[c].0);
    let wp = filtration_by(&basis, |c| tags[c].1);
    BigradedFixture {
        w,
        n: NilpotentMap::new(n_amb).expect("strictly lowers the bigrading"),
        wp,
        tags,
        basis,
        chains,
    }
}

/// Random `(W, N)` with `N W_k ⊆ W_k` and no further structure. The
/// relative monodromy filtration often fails to exist.
pub fn random_compatible_pair<R: Rng>(rng: &mut R, max_dim: usize) -> (Filtration<Q>, NilpotentMap) {
    let n = rng.gen_range(2..=max_dim.max(2));
    let mut weights: Vec<i64> = Vec::with_capacity(n);
    let mut k = rng.gen_range(-3..=0);
    while weights.len() < n {
        let piece = rng.gen_range(1..=(n - weights.len()).min(3));
        weights.extend(std::iter::repeat_n(k, piece));
        k += rng.gen_range(1..=2);
    }
    // Upper triangular in a basis ordered by weight: W-compatible and nilpotent.
    let nm = Matrix::from_fn(n, n, |r, c| if r < c && rng.gen_bool(0.5) { q(rng.gen_range(-2..=2)) } else { q(0) });
    let h = random_unimodular(rng, n, 1);
    let hinv = h.inverse(Tol::Exact).unwrap();
    let w = filtration_by(&h, |c| weights[c]);
    (w, NilpotentMap::new(h.mul(&nm).mul(&hinv)).expect("strictly upper triangular"))
}

/// Hodge–Tate polarized fixture in a coordinate basis: each chain
/// `v_i = N^i e` of length `l + 1` on `gr_k` carries
/// `<v_i, v_{l-i}> = (-1)^i c` with `c > 0`, so the polarization is positive
/// in the sense of limit mixed Hodge structures.
pub fn polarized_fixture<R: Rng>(rng: &mut R, max_dim: usize) -> (PolarizedFiltration, BigradedFixture) {
    let shape = FixtureShape { max_dim, hodge_tate: true, scramble: false, bound: 2, exact_degree: true };
    let fx = bigraded_fixture(rng, shape);
    let mut pols = Vec::new();
    for k in fx.w.weights() {
        let cols: Vec<usize> = (0..fx.tags.len()).filter(|&c| fx.tags[c].0 == k).collect();
        let off = cols[0];
        let mut form = Matrix::<Q>::zeros(cols.len(), cols.len());
        for &(ck, start, len) in &fx.chains {
            if ck != k {
                continue;
            }
            let c = q(rng.gen_range(1..=3));
            for i in 0..len {
                let sign = if i % 2 == 0 { c.clone() } else { -c.clone() };
                form[(start - off + i, start - off + len - 1 - i)] = sign;
            }
        }
        pols.push(Polarization::new(k, form).expect("chain forms are (-1)^k-symmetric"));
    }
    let data = PolarizedFiltration::new(fx.w.clone(), pols).expect("one form per weight");
    (data, fx)
}

/// Random polarized mixed Hodge structure with a known `δ`.
#[derive(Clone, Debug)]
pub struct MhsFixture {
    pub h: MixedHodgeStructure<Gq>,
    pub pols: PolarizedFiltration,
    /// Planted `δ`, real.
    pub delta: Matrix<Gq>,
    /// Real basis; `(p, q)` per column. A pair `p > q` occupies two columns
    /// `u, u'` with `u + iu'` of type `(p, q)`.
    pub basis: RationalMatrix,
    pub tags: Vec<(i64, i64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct MhsShape {
    pub max_dim: usize,
    /// Number of distinct weights, at most.
    pub max_weights: usize,
    /// Only `p = q` pieces.
    pub hodge_tate: bool,
    /// Plant `δ = 0`.
    pub split: bool,
}

impl Default for MhsShape {
    fn default() -> Self {
        MhsShape { max_dim: 5, max_weights: 3, hodge_tate: false, split: false }
    }
}

fn gq(x: &Q) -> Gq {
    Gq::from_q(x)
}

pub fn random_mhs<R: Rng>(rng: &mut R, shape: MhsShape) -> MhsFixture {
    // Pieces as (p, q, real form block); pairs take two columns.
    let mut pieces: Vec<(i64, i64)> = Vec::new();
    let mut used = 0;
    let mut k = rng.gen_range(-4..=0);
    let nweights = rng.gen_range(1..=shape.max_weights.max(1));
    for _ in 0..nweights {
        if used >= shape.max_dim {
            break;
        }
        let mut in_weight = 0;
        let want = rng.gen_range(1..=2);
        while in_weight < want && used < shape.max_dim {
            let room = shape.max_dim - used;
            let pair = !shape.hodge_tate && room >= 2 && (k % 2 != 0 || rng.gen_bool(0.3));
            if pair {
                let m = if k % 2 != 0 { [1, 3][rng.gen_range(0..2)] } else { 2 };
                pieces.push(((k + m) / 2, (k - m) / 2));
                used += 2;
            } else if k % 2 == 0 {
                pieces.push((k / 2, k / 2));
                used += 1;
            } else {
                break;
            }
            in_weight += 1;
        }
        k += rng.gen_range(1..=3);
        if shape.hodge_tate && k % 2 != 0 {
            k += 1;
        }
    }
    if pieces.is_empty() {
        pieces.push((0, 0));
    }
    let mut tags = Vec::new();
    for &(p, q) in &pieces {
        tags.push((p, q));
        if p != q {
            tags.push((q, p));
        }
    }
    let n = tags.len();
    let basis = random_unimodular(rng, n, 1);
    let bc = basis.map(gq);
    // Complex adapted basis of the split bigrading.
    let mut cols: Vec<Vec<Gq>> = Vec::with_capacity(n);
    let mut c = 0;
    for &(p, q) in &pieces {
        if p == q {
            cols.push(bc.col(c));
            c += 1;
        } else {
            let u = bc.col(c);
            let v = bc.col(c + 1);
            cols.push(u.iter().zip(&v).map(|(a, b)| a.add(&b.mul(&Gq::i()))).collect());
            cols.push(u.iter().zip(&v).map(|(a, b)| a.sub(&b.mul(&Gq::i()))).collect());
            c += 2;
        }
    }
    let adapted = Matrix::from_columns(&cols, n);
    let adapted_inv = adapted.inverse(Tol::Exact).expect("basis");
    let delta = if shape.split {
        Matrix::zeros(n, n)
    } else {
        let t = Matrix::from_fn(n, n, |r, c| {
            let (pr, qr) = tags[r];
            let (pc, qc) = tags[c];
            if pr < pc && qr < qc && rng.gen_bool(0.7) {
                Gq::new(q(rng.gen_range(-2..=2)), q(rng.gen_range(-2..=2)))
            } else {
                Gq::zero()
            }
        });
        let d = adapted.mul(&t).mul(&adapted_inv);
        d.map(|x| x.re())
    };
    let tol = Tol::Exact;
    let mut ps: Vec<i64> = tags.iter().map(|t| t.0).collect();
    ps.sort();
    ps.dedup();
    let ftilde_steps = ps
        .iter()
        .map(|&p| {
            let vs: Vec<Vec<Gq>> = (0..n).filter(|&i| tags[i].0 >= p).map(|i| cols[i].clone()).collect();
            (p, Subspace::span(&vs, n, tol))
        })
        .collect();
    let ftilde = HodgeFiltration::new(n, ftilde_steps, tol).expect("nested");
    let f = ftilde.transform(&delta.scale(&Gq::i()).exp_nilpotent());
    let w = filtration_by(&basis, |i| tags[i].0 + tags[i].1);
    // Polarization block per piece, in the real basis.
    let mut qb = Matrix::<Q>::zeros(n, n);
    let mut c = 0;
    for &(p, q_) in &pieces {
        let s = q(rng.gen_range(1..=3));
        if p == q_ {
            qb[(c, c)] = s;
            c += 1;
        } else {
            let m = p - q_;
            if m % 2 != 0 {
                // i^m Q(x, x̄) = -2 i^{m+1} Q(u, u') > 0.
                let sign = if m.rem_euclid(4) == 1 { s } else { -s };
                qb[(c, c + 1)] = sign.clone();
                qb[(c + 1, c)] = -sign;
            } else {
                // Q(u, u) = Q(u', u') = t with i^m 2t > 0.
                let sign = if m.rem_euclid(4) == 0 { s } else { -s };
                qb[(c, c)] = sign.clone();
                qb[(c + 1, c + 1)] = sign;
            }
            c += 2;
        }
    }
    let mut pols = Vec::new();
    for k in w.weights() {
        let idx: Vec<usize> = (0..n).filter(|&i| tags[i].0 + tags[i].1 == k).collect();
        let piece = w.graded_piece(k);
        let s_cols: Vec<Vec<Q>> = idx.iter().map(|&i| piece.class_coordinates(&basis.col(i)).expect("in W_k")).collect();
        let s = Matrix::from_columns(&s_cols, idx.len());
        let sinv = s.inverse(Tol::Exact).expect("graded basis");
        let block = Matrix::from_fn(idx.len(), idx.len(), |r, c| qb[(idx[r], idx[c])].clone());
        let form = sinv.transpose().mul(&block).mul(&sinv);
        pols.push(Polarization::new(k, form).expect("(-1)^k symmetric block"));
    }
    let pols = PolarizedFiltration::new(w.clone(), pols).expect("one form per weight");
    let h = MixedHodgeStructure::new(w, f).expect("moved split structure is mixed");
    MhsFixture { h, pols, delta, basis, tags }
}

/// Rank-3 extension `0 → H → M → Z(0) → 0` with `H` of weight -1, rank 2,
/// polarized by `J = [[0, 1], [-1, 0]]` and Hodge line spanned by `e1 + i e2`.
///
/// One finite place `"5"` (residue norm 5) with `N e3 = x0 e1 + x1 e2` and
/// `N e2 = nh e1`; one real place `"inf"` where the Hodge section of `e3` is
/// `e3 + e0 e1 + e1 e2` with `e = (e0, e1)` rational.
pub fn symplectic_extension(x: [Q; 2], e: (Q, Q), nh: Q) -> Result<MotiveData, HeightError> {
    let unit = |i: usize| -> Vec<Q> { (0..3).map(|j| if i == j { q(1) } else { q(0) }).collect() };
    let w = Filtration::new(
        3,
        vec![(-1, Subspace::span(&[unit(0), unit(1)], 3, Tol::Exact)), (0, Subspace::full(3, Tol::Exact))],
        Tol::Exact,
    )?;
    let j = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
    let pols = PolarizedFiltration::new(w.clone(), vec![Polarization::new(-1, j)?, Polarization::unit(0, 1)?])?;
    let [x0, x1] = x;
    let mut n = Matrix::<Q>::zeros(3, 3);
    n[(0, 2)] = x0;
    n[(1, 2)] = x1;
    n[(0, 1)] = nh;
    let finite = vec![FinitePlaceData::new("5", BigUint::from(5u32), NilpotentMap::new(n)?)?];
    let tau = vec![Gq::one(), Gq::i(), Gq::zero()];
    let sec = vec![Gq::from_q(&e.0), Gq::from_q(&e.1), Gq::one()];
    let f0 = Subspace::span(&[tau, sec], 3, Tol::Exact);
    let f = HodgeFiltration::new(3, vec![(0, f0), (-1, Subspace::full(3, Tol::Exact))], Tol::Exact)?;
    let h = MixedHodgeStructure::new(w, f)?;
    let arch = vec![ArchPlaceData { label: "inf".into(), kind: PlaceKind::Real, hodge: ArchHodge::Exact(h) }];
    MotiveData::new(pols, finite, arch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fixtures_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let fx = bigraded_fixture(&mut rng, FixtureShape::default());
            assert!(fx.w.is_stable_under(fx.n.matrix()));
            assert!(fx.wp.maps_into_shifted(fx.n.matrix(), -2));
            let (data, _) = polarized_fixture(&mut rng, 5);
            assert_eq!(data.ambient(), data.type_signature().iter().map(|x| x.1).sum::<usize>());
            let m = random_mhs(&mut rng, MhsShape::default());
            assert_eq!(m.h.dim(), m.tags.len());
        }
    }
}
