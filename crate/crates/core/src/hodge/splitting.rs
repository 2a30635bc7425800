//! The pair `(δ, F̃)` with `F = exp(iδ) F̃` and `(W, F̃)` split over the
//! reals, then `ζ`, `F̂ = exp(ζ) F̃` and the real splitting of `W`.
//!
//! With `I` the bigrading of `(W, F)`, conjugation satisfies
//! `conj(I^{p,q}) = exp(-2iδ) I^{q,p}`. Summing the weight projectors gives
//! `Σ_k conj(P_k) P_k = exp(-2iδ)` because `δ` lowers `W` strictly, so `δ`
//! is read off with a finite logarithm.

use std::collections::BTreeMap;

use super::bigrading::{deligne_bigrading, Bidegree, Bigrading};
use super::{conj_matrix, filtration_distance, is_real, HodgeContext, HodgeFiltration, MixedHodgeStructure};
use crate::error::HeightError;
use crate::numeric::{ComplexScalar, Real};
use crate::qlinalg::Matrix;

#[derive(Clone, Debug)]
pub struct SplittingData<C> {
    pub bigrading: Bigrading<C>,
    pub delta: Matrix<C>,
    pub ftilde: HodgeFiltration<C>,
    /// Bigrading of `(W, F̃)`; conjugation-stable.
    pub tilde_bigrading: Bigrading<C>,
    /// `δ_{p,q}` with respect to `F̃`.
    pub delta_components: BTreeMap<Bidegree, Matrix<C>>,
    /// Distance between `F` and `exp(iδ) F̃`.
    pub residual: Real,
    pub zeta: Option<Matrix<C>>,
    pub fhat: Option<HodgeFiltration<C>>,
    pub hat_bigrading: Option<Bigrading<C>>,
}

impl<C: ComplexScalar> SplittingData<C> {
    /// Both stages.
    pub fn compute(h: &MixedHodgeStructure<C>, ctx: &HodgeContext) -> Result<Self, HeightError> {
        zeta_and_canonical_splitting(delta_splitting(h, ctx)?, ctx)
    }

    pub fn is_split(&self) -> bool {
        self.delta.is_zero()
    }

    /// Projector onto the weight-`k` part of the real splitting of `W`.
    pub fn real_projector(&self, k: i64) -> Result<Matrix<C>, HeightError> {
        let b = self
            .hat_bigrading
            .as_ref()
            .ok_or_else(|| HeightError::Precondition("zeta stage has not run".into()))?;
        Ok(b.weight_projector(k))
    }

    /// Semisimple endomorphism of the real splitting: `k` on the weight-`k`
    /// part.
    pub fn real_grading(&self) -> Result<Matrix<C>, HeightError> {
        let b = self
            .hat_bigrading
            .as_ref()
            .ok_or_else(|| HeightError::Precondition("zeta stage has not run".into()))?;
        Ok(b.weight_grading())
    }
}

fn non_convergence(what: &str) -> HeightError {
    HeightError::NonConvergence(format!("{what}; raise the working precision"))
}

pub fn delta_splitting<C: ComplexScalar>(
    h: &MixedHodgeStructure<C>,
    ctx: &HodgeContext,
) -> Result<SplittingData<C>, HeightError> {
    let n = h.dim();
    let tol = h.tol();
    let bigrading = deligne_bigrading(h)?;
    let delta = if bigrading.is_conjugation_stable() {
        Matrix::zeros(n, n)
    } else {
        let mut g = Matrix::zeros(n, n);
        for k in bigrading.weights() {
            let pk = bigrading.weight_projector(k);
            g = g.add(&conj_matrix(&pk).mul(&pk));
        }
        let half_i = C::i().div(&C::from_i64(2));
        let d = g.log_unipotent().scale(&half_i);
        if !is_real(&d, tol) {
            return Err(non_convergence("delta has an imaginary part"));
        }
        d.map(|x| x.re())
    };
    let minus_i = C::i().neg();
    let ftilde = h.hodge().transform(&delta.scale(&minus_i).exp_nilpotent());
    let back = ftilde.transform(&delta.scale(&C::i()).exp_nilpotent());
    let residual = filtration_distance(h.hodge(), &back);
    if residual > ctx.residual_bound() {
        return Err(non_convergence(&format!("reconstruction residual {}", residual.to_sci())));
    }
    let tilde_bigrading = deligne_bigrading(&h.with_hodge(ftilde.clone()))?;
    if !tilde_bigrading.is_conjugation_stable() {
        return Err(non_convergence("exp(-i delta) F is not split over the reals"));
    }
    let delta_components = tilde_bigrading.decompose(&delta);
    if let Some(((p, q), _)) = delta_components.iter().find(|((p, q), _)| *p >= 0 || *q >= 0) {
        return Err(non_convergence(&format!("delta has a ({p},{q}) component")));
    }
    Ok(SplittingData {
        bigrading,
        delta,
        ftilde,
        tilde_bigrading,
        delta_components,
        residual,
        zeta: None,
        fhat: None,
        hat_bigrading: None,
    })
}

pub fn zeta_and_canonical_splitting<C: ComplexScalar>(
    mut sd: SplittingData<C>,
    ctx: &HodgeContext,
) -> Result<SplittingData<C>, HeightError> {
    let n = sd.delta.rows();
    let zeta = if sd.delta.is_zero() {
        Matrix::zeros(n, n)
    } else {
        let z = ctx.zeta.evaluate(&sd.delta_components, n)?;
        // δ_{p,q} and δ_{q,p} are conjugate, so ζ is real up to rounding.
        z.map(|x| x.re())
    };
    let e = zeta.exp_nilpotent();
    sd.fhat = Some(sd.ftilde.transform(&e));
    sd.hat_bigrading = Some(sd.tilde_bigrading.transform(&e));
    sd.zeta = Some(zeta);
    Ok(sd)
}

/// `δ_{w,d}`: the weight `-d` part of `δ` in the real splitting, as a
/// matrix from `gr_w` to `gr_{w-d}` in the canonical lift coordinates.
pub fn delta_component<C: ComplexScalar>(
    h: &MixedHodgeStructure<C>,
    sd: &SplittingData<C>,
    w: i64,
    d: i64,
) -> Result<Matrix<C>, HeightError> {
    let wc = h.weight_c();
    let src = wc.graded_piece(w);
    let dst = wc.graded_piece(w - d);
    if src.dim() == 0 || dst.dim() == 0 {
        return Ok(Matrix::zeros(dst.dim(), src.dim()));
    }
    let m = sd.real_projector(w - d)?.mul(&sd.delta).mul(&sd.real_projector(w)?);
    let tol = h.tol();
    let scale = sd.delta.max_log2_magnitude().max(Some(0));
    let cols = src
        .lifts()
        .iter()
        .map(|l| {
            // Rounding noise would otherwise fail the containment test.
            let v: Vec<C> =
                m.mul_vec(l).into_iter().map(|x| if tol.negligible(&x, scale) { C::zero() } else { x }).collect();
            dst.class_coordinates(&v)
                .ok_or_else(|| non_convergence("weight component of delta leaves W"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_columns(&cols, dst.dim()).map(|x| x.re()))
}
