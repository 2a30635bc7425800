//! Relative monodromy filtration and Deligne splitting of a rank-3 example:
//! `e1, e2, e3` in weights -2, -1, 0 and `N e3 = 5 e1`.

use heightlab::monodromy::{
    deligne_splitting, find_graded_splitting, nbar, relative_monodromy_filtration, verify_rmf_axioms, NilpotentMap,
};
use heightlab::qlinalg::{format_rational, q, Filtration, Matrix, Subspace, Tol, Q};

fn show(m: &Matrix<Q>) -> String {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| format_rational(&m[(r, c)])).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(" | ")
}

fn main() -> Result<(), heightlab::HeightError> {
    let e = |i: usize| -> Vec<Q> { (0..3).map(|j| q((i == j) as i64)).collect() };
    let w = Filtration::new(
        3,
        vec![
            (-2, Subspace::span(&[e(0)], 3, Tol::Exact)),
            (-1, Subspace::span(&[e(0), e(1)], 3, Tol::Exact)),
            (0, Subspace::full(3, Tol::Exact)),
        ],
        Tol::Exact,
    )?;
    let mut m = Matrix::<Q>::zeros(3, 3);
    m[(0, 2)] = q(5);
    let n = NilpotentMap::new(m)?;

    let wp = relative_monodromy_filtration(&n, &w)?;
    for k in wp.weights() {
        println!("W'_{k}: dim {}", wp.step(k).dim());
    }
    verify_rmf_axioms(&n, &w, &wp).map_err(heightlab::HeightError::NonExistence)?;
    println!("axioms hold");

    let u = find_graded_splitting(&n, &w, &wp)?;
    let split = deligne_splitting(&n, &w, &wp, &u)?;
    for k in [-2, -1, 0] {
        println!("N_{k}: {}", show(&split.component(k)));
    }
    println!("nbar_-2 = {:?}", nbar(&n, &w, &wp, -2, None)?.iter().map(format_rational).collect::<Vec<_>>());

    // Mixing adjacent weights has no relative monodromy filtration.
    let mut bad = Matrix::<Q>::zeros(3, 3);
    bad[(1, 2)] = q(1);
    match relative_monodromy_filtration(&NilpotentMap::new(bad)?, &w) {
        Err(e) => println!("adjacent mixing: {e}"),
        Ok(_) => unreachable!("gr_0 -> gr_-1 admits no W'"),
    }
    Ok(())
}
