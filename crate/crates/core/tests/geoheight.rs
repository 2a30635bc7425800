use heightlab::fixtures::polarized_fixture;
use heightlab::geoheight::*;
use heightlab::monodromy::{relative_monodromy_filtration, NilpotentMap};
use heightlab::motives::kummer_variation;
use heightlab::poly::RatFn;
use heightlab::qlinalg::{q, Filtration, Matrix, Scalar, Subspace, Tol, Q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit(n: usize, i: usize) -> Vec<Q> {
    (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect()
}

fn coordinate_w(ws: &[i64]) -> Filtration<Q> {
    let n = ws.len();
    let mut ks = ws.to_vec();
    ks.sort();
    ks.dedup();
    let steps = ks
        .iter()
        .map(|&k| {
            let vs: Vec<Vec<Q>> = (0..n).filter(|&i| ws[i] <= k).map(|i| unit(n, i)).collect();
            (k, Subspace::span(&vs, n, Tol::Exact))
        })
        .collect();
    Filtration::new(n, steps, Tol::Exact).unwrap()
}

fn two_by_two(rows: [[i64; 2]; 2]) -> Matrix<Q> {
    Matrix::from_fn(2, 2, |r, c| q(rows[r][c]))
}

#[test]
fn paired_space_of_unit_forms() {
    let w = coordinate_w(&[-2, 0]);
    let data = PolarizedFiltration::new(w, vec![Polarization::unit(-2, 1).unwrap(), Polarization::unit(0, 1).unwrap()])
        .unwrap();
    let p = build_p(&data, 0, 2).unwrap();
    assert_eq!(p.dim(), 1);
    assert_eq!(p.pairing(&[q(1)], &[q(1)]), q(1));
    assert!(build_p(&data, 0, 1).unwrap().is_zero());
    assert!(build_p(&data, 3, 2).unwrap().is_zero());
    assert!(build_p(&data, 0, 5).unwrap().is_zero());
    let ad = p.graded_ad(&NilpotentMap::zero(2), data.filtration()).unwrap();
    assert_eq!(pairing_d_minus_2(&p, &ad, &[q(1)], &[q(1)]).unwrap(), q(1));
    assert_eq!(pairing_d_minus_2(&p, &ad, &[q(0)], &[q(1)]).unwrap(), q(0));
}

/// `e1, e2` of weight -3 with `N e2 = e1`, and `e3` of weight 0.
fn chain_data() -> (PolarizedFiltration, NilpotentMap) {
    let w = coordinate_w(&[-3, -3, 0]);
    let q3 = two_by_two([[0, 1], [-1, 0]]);
    let data = PolarizedFiltration::new(w, vec![Polarization::new(-3, q3).unwrap(), Polarization::unit(0, 1).unwrap()])
        .unwrap();
    let mut n = Matrix::<Q>::zeros(3, 3);
    n[(0, 1)] = q(1);
    (data, NilpotentMap::new(n).unwrap())
}

/// `(N U)^T Q_{-3} V` for column vectors `U, V`, since `N` kills weight 0 and `Q_0 = 1`.
fn dense_oracle(u: &[Q], v: &[Q]) -> Q {
    let nu = [u[1].clone(), q(0)];
    let q3 = [[0, 1], [-1, 0]];
    let mut total = Q::zero();
    for r in 0..2 {
        for r2 in 0..2 {
            total += nu[r].clone() * q(q3[r][r2]) * v[r2].clone();
        }
    }
    total
}

#[test]
fn odd_pairing_matches_dense_arithmetic() {
    let (data, n) = chain_data();
    let p = build_p(&data, 0, 3).unwrap();
    assert_eq!(p.dim(), 2);
    let ad = p.graded_ad(&n, data.filtration()).unwrap();
    let wp = p.monodromy_filtration(&ad).unwrap();
    assert_eq!((wp.graded_dim(-4), wp.graded_dim(-2)), (1, 1));
    let mut nonzero = 0;
    for u in [vec![q(1), q(0)], vec![q(0), q(1)], vec![q(2), q(-3)]] {
        for v in [vec![q(1), q(0)], vec![q(0), q(1)], vec![q(5), q(7)]] {
            let got = pairing_d_minus_2(&p, &ad, &u, &v).unwrap();
            assert_eq!(got, dense_oracle(&u, &v));
            nonzero += usize::from(!got.is_zero());
        }
    }
    assert!(nonzero > 0);
}

#[test]
fn kummer_point_heights() {
    let w = coordinate_w(&[-2, 0]);
    let data = PolarizedFiltration::new(w, vec![Polarization::unit(-2, 1).unwrap(), Polarization::unit(0, 1).unwrap()])
        .unwrap();
    let mut gv = GeometricVariation::new(data, vec![]).unwrap();
    assert_eq!(global_geometric_height(&gv, 0, 2).unwrap().exact, Some(q(0)));
    for k in [-4, 0, 7] {
        let mut m = Matrix::<Q>::zeros(2, 2);
        m[(0, 1)] = q(k);
        gv.push_point(format!("k={k}"), NilpotentMap::new(m).unwrap()).unwrap();
    }
    let g = global_geometric_height(&gv, 0, 2).unwrap();
    let locals: Vec<Q> = g.terms.iter().map(|(_, _, h)| h.exact().unwrap().clone()).collect();
    assert_eq!(locals, vec![q(4), q(0), q(7)]);
    assert_eq!(g.exact, Some(q(11)));
}

#[test]
fn kummer_family_heights_count_zeros_and_poles() {
    for (family, expect) in [("T", 2), ("1/T", 2), ("T*(T-1)^2", 6), ("5", 0), ("(T^2-2)/(T+1)^3", 6)] {
        let gv = kummer_variation(&RatFn::parse(family).unwrap()).unwrap();
        let g = global_geometric_height(&gv, 0, 2).unwrap();
        assert_eq!(g.exact, Some(q(expect)), "{family}");
    }
}

fn fixture() -> impl Strategy<Value = (PolarizedFiltration, heightlab::fixtures::BigradedFixture)> {
    any::<u64>().prop_map(|s| polarized_fixture(&mut ChaCha8Rng::seed_from_u64(s), 6))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn radicands_are_nonnegative_and_homogeneous((data, fx) in fixture(), c in (1i64..=5, 1i64..=5)) {
        let c = Q::new(c.0.into(), c.1.into());
        let ws = fx.w.weights();
        for &w in &ws {
            for &lo in ws.iter().filter(|&&k| k <= w - 2) {
                let d = w - lo;
                let r = local_radicand(&data, &fx.n, &fx.wp, w, d).unwrap();
                prop_assert!(r >= Q::zero());
                let rc = local_radicand(&data, &fx.n.scaled(&c), &fx.wp, w, d).unwrap();
                prop_assert_eq!(rc, r * num_traits::pow(c.clone(), d as usize));
            }
        }
    }

    #[test]
    fn points_add_with_their_degrees((data, fx) in fixture(), deg in 1u32..=4) {
        let ws = fx.w.weights();
        let (w, d) = (*ws.last().unwrap(), ws.last().unwrap() - ws.first().unwrap());
        prop_assume!(d >= 2);
        let one = DegenerationPoint::new("x", fx.n.clone(), &fx.w).unwrap();
        let gv = GeometricVariation::new(data.clone(), vec![one.clone(), one.clone().with_degree(deg)]).unwrap();
        let g = global_geometric_height(&gv, w, d).unwrap();
        let local = local_geometric_height(&gv, &one, w, d).unwrap();
        let expect = local.value().mul_r(&heightlab::numeric::Real::from_f64(f64::from(deg + 1)));
        prop_assert!(g.value.sub_r(&expect).abs().to_f64() < 1e-25);
        prop_assert_eq!(relative_monodromy_filtration(&fx.n, &fx.w).unwrap(), one.relative_filtration().clone());
    }
}
