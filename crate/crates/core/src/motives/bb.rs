//! Reduction of `h_{w,1}` to `h_{0,2}` of a motive `R` with graded pieces
//! `Z(1)`, `P = Hom(gr_w, gr_{w-1})` and `Z`.
//!
//! `R` has coordinates `(z1, P, z0)`. The extension `Q` of `Z` by `P` comes
//! from `W_w / W_{w-2}`; its class is `x` (the `z0 → P` part of `N`) at a
//! finite place and `e` (the difference between a Hodge section and the
//! rational section) at an archimedean place. Dualizing, twisting and pulling
//! back along the polarization `G` of `P` gives the sub `Q'` of `R`:
//!
//! ```text
//! N_R = [ 0  -(Gx)^T  α ]        F^p R ∋ f - (f^T G e) z1   for f ∈ F^p P
//!       [ 0     Ad    x ]        F^p R ∋ z0 + e + y z1      for p <= 0
//!       [ 0     0     0 ]        F^p R ∋ z1                 for p <= -1
//! ```
//!
//! The lift is the choice of `α` at each finite place and `y` at each
//! archimedean place. Real changes of `y` are isomorphisms of real mixed
//! Hodge structures and leave the height unchanged.

use super::heights::{global_height_wd, HeightValue, PlaceHeight};
use super::{ArchHodge, ArchPlaceData, FinitePlaceData, MotiveData};
use crate::error::HeightError;
use crate::geoheight::{build_p, Polarization, PolarizedFiltration};
use crate::hodge::{deligne_bigrading, HodgeContext, HodgeFiltration, MixedHodgeStructure};
use crate::monodromy::NilpotentMap;
use crate::numeric::{ComplexScalar, Cx, Gq};
use crate::qlinalg::hom::ad_pair;
use crate::qlinalg::{q, Filtration, Matrix, QuotientSpace, RationalMatrix, Scalar, Subspace, Tol, Q};

/// Choice of the class `a` lifting `Q` along `Q' → P`.
#[derive(Clone, Debug, Default)]
pub struct BbLift {
    /// `z0 ↦ z1` entry of `N_R` by finite place label; 0 when absent.
    pub alpha: Vec<(String, Q)>,
    /// `z1` coordinate `y = re + im·i` of the Hodge lift by archimedean place
    /// label; 0 when absent.
    pub y: Vec<(String, Q, Q)>,
}

impl BbLift {
    fn alpha_at(&self, label: &str) -> Q {
        self.alpha.iter().find(|(l, _)| l == label).map(|(_, a)| a.clone()).unwrap_or_else(Q::zero)
    }

    fn y_at(&self, label: &str) -> (Q, Q) {
        self.y
            .iter()
            .find(|(l, _, _)| l == label)
            .map(|(_, a, b)| (a.clone(), b.clone()))
            .unwrap_or_else(|| (Q::zero(), Q::zero()))
    }
}

#[derive(Clone, Debug)]
pub struct BbReduction {
    pub r: MotiveData,
    /// `h_{w,1}(M) = h_{0,2}(R)`.
    pub height: HeightValue,
    pub rows: Vec<PlaceHeight>,
}

fn r_filtration(p_dim: usize) -> Filtration<Q> {
    let n = p_dim + 2;
    let unit = |i: usize| -> Vec<Q> { (0..n).map(|j| if i == j { q(1) } else { q(0) }).collect() };
    let step = |k: usize| Subspace::span(&(0..k).map(unit).collect::<Vec<_>>(), n, Tol::Exact);
    let mut steps = vec![(-2, step(1)), (0, step(n))];
    if p_dim > 0 {
        steps.push((-1, step(p_dim + 1)));
    }
    Filtration::new(n, steps, Tol::Exact).expect("nested coordinate spans")
}

fn finite_place_r(
    v: &FinitePlaceData,
    src: &QuotientSpace<Q>,
    dst: &QuotientSpace<Q>,
    g: &RationalMatrix,
    alpha: Q,
) -> Result<FinitePlaceData, HeightError> {
    let n = v.n.matrix();
    let n1 = src.induced_map(n, src)?;
    let n2 = dst.induced_map(n, dst)?;
    let ad = ad_pair(&n1, &n2);
    if !g.mul(&ad).add(&ad.transpose().mul(g)).is_zero() {
        return Err(HeightError::Incompatible(format!(
            "at {} the graded monodromy is not skew for the polarization of P",
            v.label
        )));
    }
    let (a, b) = (src.dim(), dst.dim());
    let lifts = src.lifts();
    let mut cols = Vec::with_capacity(a);
    for j in 0..a {
        let mut v_ = n.mul_vec(&lifts[j]);
        for (k, l) in lifts.iter().enumerate() {
            let c = n1[(k, j)].clone();
            if !c.is_zero() {
                v_ = v_.iter().zip(l).map(|(x, y)| x - &c * y).collect();
            }
        }
        cols.push(dst.class_coordinates(&v_).ok_or_else(|| HeightError::Containment("N does not preserve W".into()))?);
    }
    let x = Matrix::from_columns(&cols, b).vectorize();
    let r = a * b;
    let gx = g.mul_vec(&x);
    let mut nr = Matrix::<Q>::zeros(r + 2, r + 2);
    for i in 0..r {
        nr[(0, i + 1)] = -gx[i].clone();
        nr[(i + 1, r + 1)] = x[i].clone();
        for j in 0..r {
            nr[(i + 1, j + 1)] = ad[(i, j)].clone();
        }
    }
    nr[(0, r + 1)] = alpha;
    FinitePlaceData::new(v.label.clone(), v.residue_norm.clone(), NilpotentMap::new(nr)?)
}

/// Hodge bigrading of `gr_k` in lift coordinates: basis columns with tags.
fn graded_bigrading<C: ComplexScalar>(
    bigrading: &crate::hodge::Bigrading<C>,
    piece: &QuotientSpace<C>,
    k: i64,
) -> Result<(Matrix<C>, Vec<(i64, i64)>), HeightError> {
    let mut cols = Vec::new();
    let mut tags = Vec::new();
    for ((p, q_), s) in bigrading.pieces().iter().filter(|((p, q_), _)| p + q_ == k) {
        for v in s.basis_vectors() {
            cols.push(
                piece.class_coordinates(&v).ok_or_else(|| HeightError::MhsAxiomViolation("Hodge piece outside W".into()))?,
            );
            tags.push((*p, *q_));
        }
    }
    Ok((Matrix::from_columns(&cols, piece.dim()), tags))
}

fn arch_place_r<C: ComplexScalar>(
    h: &MixedHodgeStructure<C>,
    w: i64,
    g: &RationalMatrix,
    y: C,
    wr: &Filtration<Q>,
) -> Result<MixedHodgeStructure<C>, HeightError> {
    let tol = h.tol();
    let bigrading = deligne_bigrading(h)?;
    let wc = h.weight_c();
    let src = wc.graded_piece(w);
    let dst = wc.graded_piece(w - 1);
    let (a, b) = (src.dim(), dst.dim());
    let r = a * b;
    let n = r + 2;
    // e = s_F - s_Q with s_F the section through the Deligne bigrading.
    let pw = bigrading.weight_projector(w);
    let scale = Some(0);
    let mut cols = Vec::with_capacity(a);
    for l in src.lifts() {
        let v: Vec<C> = pw
            .mul_vec(l)
            .iter()
            .zip(l)
            .map(|(s, t)| s.sub(t))
            .map(|x| if tol.negligible(&x, scale) { C::zero() } else { x })
            .collect();
        cols.push(dst.class_coordinates(&v).ok_or_else(|| HeightError::MhsAxiomViolation("Hodge section leaves W".into()))?);
    }
    let e = Matrix::from_columns(&cols, b).vectorize();
    let gc = g.map(C::from_q);
    let ge = gc.mul_vec(&e);
    // F^p P from the bigradings of the two graded pieces.
    let (bw, tw) = graded_bigrading(&bigrading, &src, w)?;
    let (bd, td) = graded_bigrading(&bigrading, &dst, w - 1)?;
    let bw_inv = bw.inverse(tol).ok_or_else(|| HeightError::MhsAxiomViolation("graded Hodge pieces".into()))?;
    let mut hom: Vec<(i64, Vec<C>)> = Vec::with_capacity(r);
    for (i, (p2, _)) in td.iter().enumerate() {
        for (j, (p1, _)) in tw.iter().enumerate() {
            let m = Matrix::from_fn(b, a, |rr, cc| bd[(rr, i)].mul(&bw_inv[(j, cc)]));
            hom.push((p2 - p1, m.vectorize()));
        }
    }
    let mut ps: Vec<i64> = hom.iter().map(|(p, _)| *p).chain([-1, 0]).collect();
    ps.sort();
    ps.dedup();
    let embed = |f: &[C]| -> Vec<C> {
        let lam = f.iter().zip(&ge).fold(C::zero(), |acc, (x, z)| acc.add(&x.mul(z))).neg();
        let mut v = vec![lam];
        v.extend(f.iter().cloned());
        v.push(C::zero());
        v
    };
    let mut steps = Vec::new();
    for &p in &ps {
        let mut gens: Vec<Vec<C>> = hom.iter().filter(|(pp, _)| *pp >= p).map(|(_, f)| embed(f)).collect();
        if p <= 0 {
            let mut v = vec![y.clone()];
            v.extend(e.iter().cloned());
            v.push(C::one());
            gens.push(v);
        }
        if p <= -1 {
            gens.push((0..n).map(|i| if i == 0 { C::one() } else { C::zero() }).collect());
        }
        steps.push((p, Subspace::span(&gens, n, tol)));
    }
    let f = HodgeFiltration::new(n, steps, tol)?;
    MixedHodgeStructure::new(wr.clone(), f)
}

/// Builds `R` and returns `h_{w,1}(M) = h_{0,2}(R)`. `pol_p` defaults to
/// the form `P` inherits from the polarizations of `gr_w` and `gr_{w-1}`.
pub fn beilinson_bloch_reduction(
    m: &MotiveData,
    w: i64,
    pol_p: Option<&Polarization>,
    lift: &BbLift,
    ctx: &HodgeContext,
) -> Result<BbReduction, HeightError> {
    let wf = m.weight();
    let src = wf.graded_piece(w);
    let dst = wf.graded_piece(w - 1);
    let r = src.dim() * dst.dim();
    let g = match pol_p {
        Some(p) => {
            if p.weight() != -1 || p.dim() != r {
                return Err(HeightError::Incompatible(format!(
                    "the polarization of P must have weight -1 and rank {r}"
                )));
            }
            p.form().clone()
        }
        None if r == 0 => Matrix::zeros(0, 0),
        None => build_p(m.polarized(), w, 1)?.form().clone(),
    };
    let wr = r_filtration(r);
    let mut pols = vec![Polarization::unit(-2, 1)?, Polarization::unit(0, 1)?];
    if r > 0 {
        pols.push(Polarization::new(-1, g.clone())?);
    }
    let pols = PolarizedFiltration::new(wr.clone(), pols)?;
    let mut finite = Vec::new();
    for v in m.finite_places() {
        finite.push(finite_place_r(v, &src, &dst, &g, lift.alpha_at(&v.label))?);
    }
    let mut arch = Vec::new();
    for v in m.arch_places() {
        let (yr, yi) = lift.y_at(&v.label);
        let hodge = match &v.hodge {
            ArchHodge::Exact(h) => ArchHodge::Exact(arch_place_r(h, w, &g, Gq::from_parts(&yr, &yi), &wr)?),
            ArchHodge::Float(h) => ArchHodge::Float(arch_place_r(h, w, &g, Cx::from_parts(&yr, &yi), &wr)?),
        };
        arch.push(ArchPlaceData { label: v.label.clone(), kind: v.kind, hodge });
    }
    let rm = MotiveData::new(pols, finite, arch)?;
    let (height, rows) = global_height_wd(&rm, 0, 2, ctx)?;
    Ok(BbReduction { r: rm, height, rows })
}
