use heightlab::fixtures::random_unimodular;
use heightlab::qlinalg::hom::{ad, hom_filtration};
use heightlab::qlinalg::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 4;

fn unit(n: usize, i: usize) -> Vec<Q> {
    (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()
}

fn sp(vs: &[Vec<Q>]) -> Subspace<Q> {
    Subspace::span(vs, vs.first().map_or(N, |v| v.len()), Tol::Exact)
}

fn vector() -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec(-3i64..=3, N).prop_map(|v| v.into_iter().map(q).collect())
}

fn subspace() -> impl Strategy<Value = Subspace<Q>> {
    prop::collection::vec(vector(), 0..=3).prop_map(|vs| Subspace::span(&vs, N, Tol::Exact))
}

fn square(n: usize) -> impl Strategy<Value = RationalMatrix> {
    prop::collection::vec(-3i64..=3, n * n).prop_map(move |v| Matrix::from_fn(n, n, |r, c| q(v[r * n + c])))
}

fn filtration() -> impl Strategy<Value = Filtration<Q>> {
    (any::<u64>(), prop::collection::vec(-2i64..=2, N)).prop_map(|(s, ws)| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let g = random_unimodular(&mut rng, N, 2);
        let basis: Vec<(i64, Vec<Q>)> = ws.iter().enumerate().map(|(i, &w)| (w, g.col(i))).collect();
        Filtration::from_graded_basis(&basis, N, Tol::Exact).unwrap()
    })
}

#[test]
fn lattice_examples() {
    let (e1, e2) = (unit(2, 0), unit(2, 1));
    assert!(sp(&[e1.clone()]).sum(&sp(&[e2.clone()])).unwrap().is_full());
    let v = sp(&[e1.clone(), vec![q(1), q(1)]]);
    assert_eq!(v.intersect(&v).unwrap(), v);
    let diag = sp(&[vec![q(1), q(1)]]);
    assert!(diag.contains(&sp(&[vec![q(2), q(2)]])).unwrap());
    // Reduced forms agree.
    assert_eq!(diag.basis(), sp(&[vec![q(-3), q(-3)]]).basis());
}

#[test]
fn filtration_examples() {
    let e1 = sp(&[unit(2, 0)]);
    let w = Filtration::new(2, vec![(-1, e1.clone()), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).unwrap();
    assert_eq!(w.restrict(&Subspace::full(2, Tol::Exact)).unwrap(), w);
    assert_eq!(w.quotient(&Subspace::zero(2, Tol::Exact)).unwrap(), w);
    let r = w.restrict(&e1).unwrap();
    assert_eq!(r.ambient(), 1);
    assert!(r.step(-1).is_full());
    assert!(r.step(-2).is_zero());
    assert_eq!((w.graded_dim(-1), w.graded_dim(0)), (1, 1));
    let t = Filtration::<Q>::trivial(3, 2, Tol::Exact);
    assert_eq!(t.graded_piece(2).dim(), 3);
    assert_eq!(t.graded_piece(1).dim(), 0);
    assert_eq!(t.graded_piece(5).dim(), 0);
}

#[test]
fn hom_filtration_of_a_two_step_filtration() {
    let e1 = sp(&[unit(2, 0)]);
    let w = Filtration::new(2, vec![(-2, e1), (0, Subspace::full(2, Tol::Exact))], Tol::Exact).unwrap();
    let h = hom_filtration(&w, &w).unwrap();
    assert_eq!((h.graded_dim(-2), h.graded_dim(0), h.graded_dim(2)), (1, 2, 1));
    let mut n = Matrix::<Q>::zeros(2, 2);
    n[(0, 1)] = q(1);
    // Ad(N) kills N itself.
    assert!(ad(&n).mul_vec(&n.vectorize()).iter().all(|x| x.is_zero()));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn dimension_formula(a in subspace(), b in subspace()) {
        let s = a.sum(&b).unwrap();
        let i = a.intersect(&b).unwrap();
        prop_assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
        prop_assert!(s.contains(&a).unwrap() && a.contains(&i).unwrap() && b.contains(&i).unwrap());
    }

    #[test]
    fn annihilator_is_an_order_reversing_involution(a in subspace(), b in subspace()) {
        let ann = a.annihilator();
        prop_assert_eq!(ann.dim() + a.dim(), N);
        prop_assert_eq!(&ann.annihilator(), &a);
        let lhs = a.sum(&b).unwrap().annihilator();
        prop_assert_eq!(lhs, ann.intersect(&b.annihilator()).unwrap());
    }

    #[test]
    fn canonical_basis_does_not_depend_on_generators(vs in prop::collection::vec(vector(), 1..=3), c in 1i64..=4) {
        let scaled: Vec<Vec<Q>> = vs.iter().rev().map(|v| v.iter().map(|x| x * q(c)).collect()).collect();
        prop_assert_eq!(sp(&vs), sp(&scaled));
        for v in &vs {
            prop_assert!(sp(&vs).contains_vector(v));
        }
    }

    #[test]
    fn rank_nullity_and_solve(m in square(N), x in vector()) {
        let kernel = m.kernel(Tol::Exact);
        prop_assert_eq!(m.rank(Tol::Exact) + kernel.len(), N);
        for k in &kernel {
            prop_assert!(m.mul_vec(k).iter().all(|v| v.is_zero()));
        }
        let b = m.mul_vec(&x);
        let y = m.solve(&b, Tol::Exact).unwrap();
        prop_assert_eq!(m.mul_vec(&y), b);
    }

    #[test]
    fn determinant_is_multiplicative(a in square(3), b in square(3)) {
        prop_assert_eq!(a.mul(&b).determinant(), a.determinant() * b.determinant());
        match a.inverse(Tol::Exact) {
            Some(inv) => prop_assert_eq!(a.mul(&inv), Matrix::identity(3)),
            None => prop_assert!(a.determinant().is_zero()),
        }
    }

    #[test]
    fn exp_and_log_are_inverse_on_nilpotents(v in prop::collection::vec(-3i64..=3, N * N)) {
        let n = Matrix::from_fn(N, N, |r, c| if r < c { q(v[r * N + c]) } else { q(0) });
        let g = n.exp_nilpotent();
        prop_assert_eq!(g.log_unipotent(), n.clone());
        prop_assert_eq!(g.mul(&n.neg().exp_nilpotent()), Matrix::identity(N));
    }

    #[test]
    fn graded_pieces_add_up(w in filtration(), k in -3i64..=3) {
        let total: usize = w.weights().iter().map(|&j| w.graded_dim(j)).sum();
        prop_assert_eq!(total, N);
        prop_assert_eq!(w.shift(k).shift(-k), w.clone());
        prop_assert_eq!(w.shift(k).step(0), w.step(-k));
        for (j, v) in w.adapted_basis() {
            prop_assert!(w.step(j).contains_vector(&v));
            prop_assert!(!w.step(j - 1).contains_vector(&v));
        }
    }

    #[test]
    fn change_of_basis_round_trips(w in filtration(), s in any::<u64>()) {
        let g = random_unimodular(&mut ChaCha8Rng::seed_from_u64(s), N, 2);
        let gi = g.inverse(Tol::Exact).unwrap();
        prop_assert_eq!(w.transform(&g).transform(&gi), w.clone());
        for k in w.weights() {
            prop_assert_eq!(w.transform(&g).graded_dim(k), w.graded_dim(k));
        }
    }

    #[test]
    fn hom_filtration_graded_dimensions(w in filtration()) {
        let h = hom_filtration(&w, &w).unwrap();
        let ws = w.weights();
        for &k in &h.weights() {
            let expect: usize = ws.iter().flat_map(|&a| ws.iter().map(move |&b| (a, b)))
                .filter(|(a, b)| b - a == k)
                .map(|(a, b)| w.graded_dim(a) * w.graded_dim(b))
                .sum();
            prop_assert_eq!(h.graded_dim(k), expect);
        }
    }
}
