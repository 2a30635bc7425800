use heightlab::fixtures::{random_mhs, MhsShape};
use heightlab::geoheight::{Polarization, PolarizedFiltration};
use heightlab::hodge::metric::PureHodgeStructure;
use heightlab::hodge::*;
use heightlab::HeightError;
use heightlab::numeric::{with_precision, ComplexScalar, Cx, Gq, Real};
use heightlab::qlinalg::{q, Filtration, Matrix, Scalar, Subspace, Tol, Q};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit<C: Scalar>(n: usize, i: usize) -> Vec<C> {
    (0..n).map(|j| if i == j { C::one() } else { C::zero() }).collect()
}

/// `Z(1)` in weight -2 extended by `Z(0)`, with `F^0` spanned by `e2 + c e1`.
fn kummer_mhs<C: ComplexScalar>(c: C) -> (MixedHodgeStructure<C>, PolarizedFiltration) {
    let w = Filtration::new(
        2,
        vec![(-2, Subspace::span(&[unit::<Q>(2, 0)], 2, Tol::Exact)), (0, Subspace::full(2, Tol::Exact))],
        Tol::Exact,
    )
    .unwrap();
    let tol = default_tol::<C>();
    let f = HodgeFiltration::new(
        2,
        vec![(-1, Subspace::full(2, tol)), (0, Subspace::span(&[vec![c, C::one()]], 2, tol))],
        tol,
    )
    .unwrap();
    let pols = PolarizedFiltration::new(w.clone(), vec![Polarization::unit(-2, 1).unwrap(), Polarization::unit(0, 1).unwrap()])
        .unwrap();
    (MixedHodgeStructure::new(w, f).unwrap(), pols)
}

/// Period `log a / 2πi` of the Kummer structure of `a > 0`.
fn kummer_period(log_a: &Real) -> Cx {
    let two_pi = Real::pi().mul_r(&Real::from_i64(2));
    Cx::new(Real::zero(), log_a.div_r(&two_pi).neg_r())
}

fn close(a: &Real, b: &Real, eps: f64) -> bool {
    a.sub_r(b).abs().to_f64() < eps
}

#[test]
fn single_hodge_tate_piece() {
    let w = Filtration::<Q>::trivial(1, 0, Tol::Exact);
    let f = HodgeFiltration::new(1, vec![(0, Subspace::<Gq>::full(1, Tol::Exact))], Tol::Exact).unwrap();
    let h = MixedHodgeStructure::new(w, f).unwrap();
    let b = deligne_bigrading(&h).unwrap();
    assert_eq!(b.hodge_numbers(), vec![(0, 0, 1)]);
    let sd = SplittingData::compute(&h, &HodgeContext::default()).unwrap();
    assert!(sd.is_split());
    assert!(sd.zeta.unwrap().is_zero());
}

#[test]
fn real_period_is_already_split() {
    let (h, pols) = kummer_mhs(Gq::from_q(&q(3)));
    let sd = delta_splitting(&h, &HodgeContext::default()).unwrap();
    assert!(sd.is_split());
    assert!(sd.bigrading.is_conjugation_stable());
    assert_eq!(archimedean_height(&h, &pols, 0, 2, &HodgeContext::default()).unwrap().to_f64(), 0.0);
}

#[test]
fn kummer_of_e_to_two_pi_has_unit_delta() {
    // log a / 2πi = -i.
    let (h, pols) = kummer_mhs(Gq::new(q(0), q(-1)));
    let ctx = HodgeContext::default();
    let sd = SplittingData::compute(&h, &ctx).unwrap();
    assert_eq!(sd.delta_components.keys().copied().collect::<Vec<_>>(), vec![(-1, -1)]);
    let comp = delta_component(&h, &sd, 0, 2).unwrap();
    assert_eq!(comp.rows(), 1);
    assert!(comp[(0, 0)] == Gq::one() || comp[(0, 0)] == Gq::one().neg());
    let two_pi = Real::pi().mul_r(&Real::from_i64(2));
    assert!(close(&archimedean_height(&h, &pols, 0, 2, &ctx).unwrap(), &two_pi, 1e-30));
    // Outside the span of W the component has no rows or no columns.
    let far = delta_component(&h, &sd, 0, 7).unwrap();
    assert_eq!(far.rows() * far.cols(), 0);
}

#[test]
fn kummer_delta_is_log_over_two_pi() {
    with_precision(160, || {
        let ctx = HodgeContext::default();
        for a in [q(4), Q::new(5.into(), 3.into()), Q::new(1.into(), 7.into())] {
            let log_a = Real::from_q(&a).ln();
            let (h, pols) = kummer_mhs(kummer_period(&log_a));
            let sd = SplittingData::compute(&h, &ctx).unwrap();
            let comp = delta_component(&h, &sd, 0, 2).unwrap();
            let two_pi = Real::pi().mul_r(&Real::from_i64(2));
            assert!(close(&comp[(0, 0)].re.abs(), &log_a.abs().div_r(&two_pi), 1e-35), "{a}");
            let real = archimedean_local_height(&h, &pols, PlaceKind::Real, 0, 2, &ctx).unwrap();
            let complex = archimedean_local_height(&h, &pols, PlaceKind::Complex, 0, 2, &ctx).unwrap();
            assert!(close(&real, &log_a.abs(), 1e-35));
            assert!(close(&complex, &log_a.abs().mul_r(&Real::from_i64(2)), 1e-35));
        }
    })
}

#[test]
fn metric_of_a_weight_one_curve_piece() {
    // H^{1,0} spanned by e1 + i e2, polarized by J = [[0, 1], [-1, 0]].
    let w = Filtration::<Q>::trivial(2, 1, Tol::Exact);
    let f = HodgeFiltration::new(
        2,
        vec![(0, Subspace::full(2, Tol::Exact)), (1, Subspace::span(&[vec![Gq::one(), Gq::i()]], 2, Tol::Exact))],
        Tol::Exact,
    )
    .unwrap();
    let h = MixedHodgeStructure::new(w, f).unwrap();
    let b = deligne_bigrading(&h).unwrap();
    assert_eq!(b.hodge_numbers(), vec![(0, 1, 1), (1, 0, 1)]);
    let pure = PureHodgeStructure::graded(&h, &b, 1).unwrap();
    let j = Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(-1), q(0)]]);
    let metric = hodge_metric(&pure, &j).unwrap();
    // Q(C e1, e1) with C = i^{p-q}: the standard metric.
    assert_eq!(metric.value(&unit(2, 0), &unit(2, 0)), Gq::one());
    assert_eq!(metric.value(&unit(2, 0), &unit(2, 1)), Gq::zero());
    assert!(hodge_metric(&pure, &j.scale(&q(-1))).is_err());
}

fn mhs_fixture(weights: usize) -> impl Strategy<Value = heightlab::fixtures::MhsFixture> {
    any::<u64>().prop_map(move |s| random_mhs(&mut ChaCha8Rng::seed_from_u64(s), MhsShape { max_weights: weights, ..Default::default() }))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn hodge_numbers_are_symmetric(fx in mhs_fixture(3)) {
        let b = deligne_bigrading(&fx.h).unwrap();
        let numbers = b.hodge_numbers();
        for &(p, qd, n) in &numbers {
            prop_assert!(numbers.contains(&(qd, p, n)));
        }
        prop_assert_eq!(numbers.iter().map(|t| t.2).sum::<usize>(), fx.h.dim());
    }

    #[test]
    fn exact_splitting_recovers_delta(fx in mhs_fixture(3)) {
        let ctx = HodgeContext::default();
        let sd = delta_splitting(&fx.h, &ctx).unwrap();
        prop_assert_eq!(&sd.delta, &fx.delta);
        prop_assert!(sd.tilde_bigrading.is_conjugation_stable());
        prop_assert!(sd.residual.to_f64() == 0.0);
        let zeta = match zeta_and_canonical_splitting(sd, &ctx) {
            Ok(sd) => sd.zeta.unwrap(),
            // The table stops at weight 4.
            Err(HeightError::CoefficientTableMissing(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert!(zeta.entries().iter().all(|z| z.im().is_zero()));
        let n = zeta.rows();
        let mut power = Matrix::identity(n);
        for _ in 0..n {
            power = power.mul(&zeta);
        }
        prop_assert!(power.is_zero());
    }

    #[test]
    fn doubling_delta_scales_the_height(fx in mhs_fixture(2)) {
        let ws = fx.h.weight().weights();
        prop_assume!(ws.len() == 2 && ws[1] - ws[0] >= 2);
        let (w, d) = (ws[1], ws[1] - ws[0]);
        let ctx = HodgeContext::default();
        let sd = delta_splitting(&fx.h, &ctx).unwrap();
        let doubled = fx.h.with_hodge(sd.ftilde.transform(&sd.delta.scale(&Gq::new(q(0), q(2))).exp_nilpotent()));
        let h1 = archimedean_height(&fx.h, &fx.pols, w, d, &ctx).unwrap();
        let h2 = archimedean_height(&doubled, &fx.pols, w, d, &ctx).unwrap();
        let factor = Real::from_i64(4).nth_root(d as u32);
        prop_assert!(close(&h2, &h1.mul_r(&factor), 1e-25), "{} vs {} at d = {d}", h2.to_sci(), h1.mul_r(&factor).to_sci());
    }
}
