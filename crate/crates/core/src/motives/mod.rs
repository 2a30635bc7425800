//! Motives as explicit realization data: a rational space with a polarized
//! weight filtration, a tame-inertia logarithm at each finite place, and a
//! mixed Hodge structure at each archimedean place.

pub mod bb;
pub mod extension;
pub mod heights;
pub mod kummer;

pub use bb::{beilinson_bloch_reduction, BbLift, BbReduction};
pub use extension::{direct_sum, dual, same_realizations, tate_twist, ArchBlock, BlockExtension};
pub use heights::{
    archimedean_place_height, finite_local_height, global_height_wd, total_height, HeightReport, HeightValue,
    PlaceHeight, TotalOptions, WdHeight,
};
pub use kummer::{kummer_motive, kummer_variation};

use num_bigint::BigUint;

use crate::error::HeightError;
use crate::geoheight::PolarizedFiltration;
use crate::hodge::{HodgeContext, MixedHodgeStructure, PlaceKind, SplittingData};
use crate::monodromy::NilpotentMap;
use crate::numeric::{ComplexScalar, Cx, Gq, Real};
use crate::qlinalg::{Filtration, Q};

#[derive(Clone, Debug)]
pub struct FinitePlaceData {
    pub label: String,
    pub residue_norm: BigUint,
    pub n: NilpotentMap,
}

impl FinitePlaceData {
    pub fn new(label: impl Into<String>, residue_norm: BigUint, n: NilpotentMap) -> Result<Self, HeightError> {
        if residue_norm < BigUint::from(2u32) {
            return Err(HeightError::Precondition("residue norm must be at least 2".into()));
        }
        Ok(FinitePlaceData { label: label.into(), residue_norm, n })
    }
}

/// Hodge data at an archimedean place: exact over `Q(i)` or floating.
#[derive(Clone, Debug)]
pub enum ArchHodge {
    Exact(MixedHodgeStructure<Gq>),
    Float(MixedHodgeStructure<Cx>),
}

impl ArchHodge {
    pub fn weight(&self) -> &Filtration<Q> {
        match self {
            ArchHodge::Exact(h) => h.weight(),
            ArchHodge::Float(h) => h.weight(),
        }
    }

    pub fn dim(&self) -> usize {
        self.weight().ambient()
    }

    pub fn to_float(&self) -> MixedHodgeStructure<Cx> {
        match self {
            ArchHodge::Exact(h) => h.map_scalars(|x| x.to_cx()),
            ArchHodge::Float(h) => h.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ArchHodge::Exact(_))
    }

    /// Whether `δ = 0`.
    pub fn is_split(&self, ctx: &HodgeContext) -> Result<bool, HeightError> {
        Ok(match self {
            ArchHodge::Exact(h) => SplittingData::compute(h, ctx)?.is_split(),
            ArchHodge::Float(h) => SplittingData::compute(h, ctx)?.is_split(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct ArchPlaceData {
    pub label: String,
    pub kind: PlaceKind,
    pub hodge: ArchHodge,
}

/// Realization data of a mixed motive over a number field.
#[derive(Clone, Debug)]
pub struct MotiveData {
    pols: PolarizedFiltration,
    finite: Vec<FinitePlaceData>,
    arch: Vec<ArchPlaceData>,
}

impl MotiveData {
    pub fn new(
        pols: PolarizedFiltration,
        finite: Vec<FinitePlaceData>,
        arch: Vec<ArchPlaceData>,
    ) -> Result<Self, HeightError> {
        let n = pols.ambient();
        let w = pols.filtration();
        for v in &finite {
            if v.n.dim() != n {
                return Err(HeightError::DimensionMismatch { expected: n, found: v.n.dim() });
            }
            if !w.is_stable_under(v.n.matrix()) {
                return Err(HeightError::InvalidNilpotent(format!("N at {} does not preserve W", v.label)));
            }
        }
        for v in &arch {
            if v.hodge.weight() != w {
                return Err(HeightError::Incompatible(format!(
                    "weight filtration of the Hodge structure at {} differs from W",
                    v.label
                )));
            }
        }
        let mut labels: Vec<&str> = finite.iter().map(|v| v.label.as_str()).chain(arch.iter().map(|v| v.label.as_str())).collect();
        labels.sort();
        if labels.windows(2).any(|p| p[0] == p[1]) {
            return Err(HeightError::Precondition("place labels must be distinct".into()));
        }
        Ok(MotiveData { pols, finite, arch })
    }

    /// The zero motive.
    pub fn zero() -> Self {
        let w = Filtration::trivial(0, 0, crate::qlinalg::Tol::Exact);
        MotiveData { pols: PolarizedFiltration::new(w, vec![]).expect("no pieces"), finite: vec![], arch: vec![] }
    }

    pub fn dim(&self) -> usize {
        self.pols.ambient()
    }

    pub fn weight(&self) -> &Filtration<Q> {
        self.pols.filtration()
    }

    pub fn polarized(&self) -> &PolarizedFiltration {
        &self.pols
    }

    pub fn finite_places(&self) -> &[FinitePlaceData] {
        &self.finite
    }

    pub fn arch_places(&self) -> &[ArchPlaceData] {
        &self.arch
    }

    /// Ranks of `gr^W_w`.
    pub fn type_signature(&self) -> Vec<(i64, usize)> {
        self.pols.type_signature()
    }

    pub fn with_finite(&self, finite: Vec<FinitePlaceData>) -> Result<Self, HeightError> {
        Self::new(self.pols.clone(), finite, self.arch.clone())
    }

    pub fn with_arch(&self, arch: Vec<ArchPlaceData>) -> Result<Self, HeightError> {
        Self::new(self.pols.clone(), self.finite.clone(), arch)
    }
}

/// `2π` at the working precision.
pub(crate) fn two_pi() -> Real {
    Real::pi().mul_r(&Real::from_f64(2.0))
}
