//! The `δ`-splitting of a Kummer structure with period `i/2`, in exact
//! Gaussian arithmetic, and its archimedean height `π`.

use heightlab::document::gaussian_text;
use heightlab::geoheight::{Polarization, PolarizedFiltration};
use heightlab::hodge::{archimedean_height, HodgeContext, HodgeFiltration, MixedHodgeStructure, SplittingData};
use heightlab::numeric::Gq;
use heightlab::qlinalg::{q, Filtration, Matrix, Scalar, Subspace, Tol, Q};

fn show(m: &Matrix<Gq>) -> String {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| gaussian_text(&m[(r, c)])).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join(" | ")
}

fn main() -> Result<(), heightlab::HeightError> {
    let e1: Vec<Q> = vec![q(1), q(0)];
    let w = Filtration::new(2, vec![(-2, Subspace::span(&[e1], 2, Tol::Exact)), (0, Subspace::full(2, Tol::Exact))], Tol::Exact)?;
    let half_i = Gq::new(q(0), Q::new(1.into(), 2.into()));
    let f = HodgeFiltration::new(
        2,
        vec![(-1, Subspace::full(2, Tol::Exact)), (0, Subspace::span(&[vec![half_i, Gq::one()]], 2, Tol::Exact))],
        Tol::Exact,
    )?;
    let h = MixedHodgeStructure::new(w.clone(), f)?;

    let ctx = HodgeContext::default();
    let sd = SplittingData::compute(&h, &ctx)?;
    println!("Hodge numbers: {:?}", sd.bigrading.hodge_numbers());
    println!("delta = {}", show(&sd.delta));
    for (pq, m) in &sd.delta_components {
        println!("delta_{pq:?} = {}", show(m));
    }
    println!("residual = {}", sd.residual.to_sci());
    println!("zeta = {}", show(sd.zeta.as_ref().expect("computed")));
    println!("exp(-i delta) F split over R: {}", sd.tilde_bigrading.is_conjugation_stable());

    let pols = PolarizedFiltration::new(w, vec![Polarization::unit(-2, 1)?, Polarization::unit(0, 1)?])?;
    println!("height = {}", archimedean_height(&h, &pols, 0, 2, &ctx)?.to_decimal(30));
    Ok(())
}
