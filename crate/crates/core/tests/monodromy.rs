use heightlab::fixtures::{bigraded_fixture, random_compatible_pair, random_unimodular, FixtureShape};
use heightlab::monodromy::*;
use heightlab::qlinalg::{q, Filtration, Matrix, RationalMatrix, Scalar, Subspace, Tol, Q};
use heightlab::HeightError;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(n: usize, i: usize) -> Vec<Q> {
    (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()
}

fn span(n: usize, idx: &[usize]) -> Subspace<Q> {
    Subspace::span(&idx.iter().map(|&i| unit(n, i)).collect::<Vec<_>>(), n, Tol::Exact)
}

fn map_from(n: usize, entries: &[(usize, usize, i64)]) -> NilpotentMap {
    let mut m = Matrix::<Q>::zeros(n, n);
    for &(r, c, v) in entries {
        m[(r, c)] = q(v);
    }
    NilpotentMap::new(m).unwrap()
}

/// Coordinate filtration with `e_i` in weight `ws[i]`.
fn coordinate_w(ws: &[i64]) -> Filtration<Q> {
    let n = ws.len();
    let mut ks = ws.to_vec();
    ks.sort();
    ks.dedup();
    let steps = ks.iter().map(|&k| (k, span(n, &(0..n).filter(|&i| ws[i] <= k).collect::<Vec<_>>()))).collect();
    Filtration::new(n, steps, Tol::Exact).unwrap()
}

fn jordan2() -> (NilpotentMap, Filtration<Q>) {
    (map_from(2, &[(0, 1, 1)]), Filtration::trivial(2, 0, Tol::Exact))
}

#[test]
fn zero_map_keeps_the_weight_filtration() {
    let w = coordinate_w(&[-2, -1, -1, 0]);
    let n = NilpotentMap::zero(4);
    let wp = relative_monodromy_filtration(&n, &w).unwrap();
    assert_eq!(wp, w);
    assert!(hom_filtration_check(&n, &w, &wp).unwrap());
    for k in -6..=-2 {
        assert!(nbar(&n, &w, &wp, k, None).unwrap().iter().all(|x| x.is_zero()));
    }
    let p = primitive_component(&n, &w, &wp, -1, 0).unwrap();
    assert_eq!(p.primitive.dim(), 2);
    assert!(p.image.is_zero());
    // Pivot complements of W: the coordinate lines here.
    let u = find_graded_splitting(&n, &w, &wp).unwrap();
    assert_eq!(u.component(-1), span(4, &[1, 2]));
    assert_eq!(u.component(0), span(4, &[3]));
}

#[test]
fn jordan_block_of_two() {
    let (n, w) = jordan2();
    let wp = relative_monodromy_filtration(&n, &w).unwrap();
    let p = primitive_component(&n, &w, &wp, 0, 1).unwrap();
    assert_eq!(p.quotient.dim(), 1);
    assert_eq!(p.primitive.dim(), 1);
    let u = find_graded_splitting(&n, &w, &wp).unwrap();
    assert_eq!(u.component(1), span(2, &[1]));
    assert_eq!(u.component(-1), span(2, &[0]));
    assert!(hom_filtration_check(&n, &w, &wp).unwrap());
}

#[test]
fn splitting_already_adapted_to_n_is_kept() {
    // Two Jordan chains in different weights and no mixing.
    let w = coordinate_w(&[-2, -2, 0, 0]);
    let n = map_from(4, &[(0, 1, 1), (2, 3, 1)]);
    let wp = relative_monodromy_filtration(&n, &w).unwrap();
    let u = find_graded_splitting(&n, &w, &wp).unwrap();
    let d = deligne_splitting(&n, &w, &wp, &u).unwrap();
    assert!(d.component(-2).is_zero());
    assert!(d.component(-1).is_zero());
    assert_eq!(d.component(0), n.matrix().clone());
}

/// `e1, e2, e3` in weights -2, -1, 0 and `N = c (e3 ↦ e1)`.
fn rank_three(c: i64) -> (NilpotentMap, Filtration<Q>) {
    (map_from(3, &[(0, 2, c)]), coordinate_w(&[-2, -1, 0]))
}

/// Splitting of the coordinate filtration `U_{-2} = <e1>`, `U_{-1} = <e2 + z e1>`,
/// `U_0 = <e3 + x e2 + y e1>`.
fn unipotent_splitting(x: i64, y: i64, z: i64) -> GradedSplitting {
    let b = Matrix::from_rows(vec![vec![q(1), q(z), q(y)], vec![q(0), q(1), q(x)], vec![q(0), q(0), q(1)]]);
    GradedSplitting::from_basis(b, vec![-2, -1, 0])
}

/// Component of `n` sending `U_m` to `U_{m+k}`, in the coordinates of `u`.
fn graded_component(n: &RationalMatrix, u: &GradedSplitting, k: i64) -> RationalMatrix {
    let b = u.basis();
    let nc = b.inverse(Tol::Exact).unwrap().mul(n).mul(b);
    let ws = u.weights();
    Matrix::from_fn(3, 3, |r, c| if ws[r] - ws[c] == k { nc[(r, c)].clone() } else { q(0) })
}

/// Checked directly from the defining conditions over a grid of candidates.
fn satisfies_deligne_conditions(n: &NilpotentMap, up: &GradedSplitting, u: &GradedSplitting) -> bool {
    let bigraded = up.components().iter().all(|(_, s)| {
        let pieces = u.components().iter().fold(Subspace::zero(3, Tol::Exact), |acc, (_, um)| acc.sum(&um.intersect(s).unwrap()).unwrap());
        pieces == *s
    });
    let n0 = graded_component(n.matrix(), u, 0);
    let n2 = graded_component(n.matrix(), u, -2);
    bigraded && graded_component(n.matrix(), u, -1).is_zero() && n0.commutator(&n2).is_zero()
}

#[test]
fn rank_three_deligne_splitting_matches_brute_force() {
    let (n, w) = rank_three(5);
    let wp = relative_monodromy_filtration(&n, &w).unwrap();
    assert_eq!(wp, w);
    for (a, b, c) in [(0, 0, 0), (1, -1, 2), (-2, 3, 1)] {
        let up = unipotent_splitting(a, b, c);
        assert!(up.splits(&wp));
        let got = deligne_splitting(&n, &w, &wp, &up).unwrap();
        let mut winners = Vec::new();
        for x in -3..=3 {
            for y in -3..=3 {
                for z in -3..=3 {
                    let u = unipotent_splitting(x, y, z);
                    if satisfies_deligne_conditions(&n, &up, &u) {
                        winners.push((x, y, z));
                    }
                }
            }
        }
        assert_eq!(winners, vec![(a, b, c)]);
        let u = unipotent_splitting(a, b, c);
        let back = u.basis().inverse(Tol::Exact).unwrap();
        for k in [-2, -1, 0] {
            let expect = u.basis().mul(&graded_component(n.matrix(), &u, k)).mul(&back);
            assert_eq!(got.component(k), expect);
        }
    }
}

#[test]
fn rank_three_nbar_is_independent_of_the_splitting() {
    let (n, w) = rank_three(5);
    let wp = relative_monodromy_filtration(&n, &w).unwrap();
    let first = nbar(&n, &w, &wp, -2, Some(&unipotent_splitting(0, 0, 0))).unwrap();
    let second = nbar(&n, &w, &wp, -2, Some(&unipotent_splitting(2, -1, 3))).unwrap();
    assert_eq!(first, second);
    assert_eq!(first, vec![q(5)]);
    assert!(hom_filtration_check(&n, &w, &wp).unwrap());
}

#[test]
fn mixing_into_the_adjacent_weight_has_no_rmf() {
    let (_, w) = rank_three(1);
    let n = map_from(3, &[(1, 2, 1)]);
    assert!(matches!(relative_monodromy_filtration(&n, &w), Err(HeightError::NonExistence(_))));
}

#[test]
fn literal_axiom_check_rejects_a_wrong_candidate() {
    let (n, w) = jordan2();
    assert!(verify_rmf_axioms(&n, &w, &w).is_err());
    let wp = relative_monodromy_filtration(&n, &w).unwrap();
    assert!(verify_rmf_axioms(&n, &w, &wp).is_ok());
}

fn seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn planted_filtration_is_recovered(s in seed(), exact in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let fx = bigraded_fixture(&mut rng, FixtureShape { max_dim: 5, exact_degree: exact, ..Default::default() });
        let wp = relative_monodromy_filtration(&fx.n, &fx.w).unwrap();
        prop_assert_eq!(&wp, &fx.wp);
        prop_assert!(verify_rmf_axioms(&fx.n, &fx.w, &wp).is_ok());
    }

    #[test]
    fn rmf_commutes_with_change_of_basis(s in seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (w, n) = random_compatible_pair(&mut rng, 5);
        let g = random_unimodular(&mut rng, n.dim(), 2);
        let moved = relative_monodromy_filtration(&n.conjugate(&g), &w.transform(&g));
        match relative_monodromy_filtration(&n, &w) {
            Ok(wp) => prop_assert_eq!(moved.unwrap(), wp.transform(&g)),
            Err(HeightError::NonExistence(_)) => prop_assert!(matches!(moved, Err(HeightError::NonExistence(_)))),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn primitive_decomposition_is_direct(s in seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let fx = bigraded_fixture(&mut rng, FixtureShape { max_dim: 5, ..Default::default() });
        for k in fx.w.weights() {
            for m in 0..=4 {
                let p = primitive_component(&fx.n, &fx.w, &fx.wp, k, m).unwrap();
                let d = p.quotient.dim();
                prop_assert!(p.primitive.intersect(&p.image).unwrap().is_zero());
                prop_assert_eq!(p.primitive.sum(&p.image).unwrap().dim(), d);
            }
        }
    }

    #[test]
    fn graded_splittings_satisfy_their_contract(s in seed()) {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let fx = bigraded_fixture(&mut rng, FixtureShape { max_dim: 5, ..Default::default() });
        let family = SplittingFamily::new(&fx.n, &fx.w, &fx.wp).unwrap();
        let u = family.random(&mut rng, 3);
        prop_assert!(u.splits(&fx.wp));
        let n = fx.n.matrix();
        for (j, c) in u.components() {
            prop_assert!(u.component(j - 2).contains(&c.image(n)).unwrap());
        }
        // W_k is the sum of its intersections with the U'_j.
        for k in fx.w.weights() {
            let wk = fx.w.step(k);
            let sum = u.components().iter().fold(Subspace::zero(fx.n.dim(), Tol::Exact), |a, (_, c)| a.sum(&c.intersect(&wk).unwrap()).unwrap());
            prop_assert_eq!(sum, wk);
        }
    }
}
