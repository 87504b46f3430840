//! Rational linear maps between ambient spaces: subspace images, height distortion
//! through compound matrices, and paired record scans in an intrinsic and an ambient
//! space.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::angles::{AngleError, ExactTarget};
use crate::enumeration::{EnumSpec, EnumerationError};
use crate::estimation::{
    estimate_exponent, scan_records, ApproximationRecord, EstimationError, ExponentEstimate, ScanOptions, Target,
};
use crate::exact::{compound_matrix, sqrt_upper, ExactError, ExactMatrix, RationalSubspace};
use crate::exec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorphismError {
    #[error("image has dimension {rank}, expected {expected}")]
    DimensionCollapse { rank: usize, expected: usize },
    #[error("map is not invertible on F")]
    NotInvertible,
    #[error("no exact enumeration strategy for ({n}, {e}); the harness does not compare heuristic scans")]
    HeuristicEnumeration { n: usize, e: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Angle(#[from] AngleError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

impl From<EnumerationError> for MorphismError {
    fn from(e: EnumerationError) -> Self {
        MorphismError::Estimation(e.into())
    }
}

/// x ↦ Sx with S rational (codomain × domain) and k the least positive integer making
/// kS integral.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    s: ExactMatrix,
    denominator_clearing: BigInt,
}

impl RationalMap {
    pub fn new(s: ExactMatrix) -> Self {
        let denominator_clearing = s.denominator_lcm();
        Self { s, denominator_clearing }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(ExactMatrix::identity(n))
    }

    /// ℝᵏ → ℝⁿ appending n − k zero coordinates.
    pub fn coordinate_embedding(k: usize, n: usize) -> Self {
        let mut s = ExactMatrix::zeros(n, k);
        for i in 0..k.min(n) {
            s.set(i, i, BigRational::one());
        }
        Self::new(s)
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.s
    }

    pub fn denominator_clearing(&self) -> &BigInt {
        &self.denominator_clearing
    }

    pub fn domain_dim(&self) -> usize {
        self.s.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.s.rows()
    }

    pub fn apply_to_subspace(&self, b: &RationalSubspace) -> Result<RationalSubspace, MorphismError> {
        if b.n() != self.domain_dim() {
            return Err(MorphismError::ShapeMismatch(format!(
                "subspace of R^{} under a map from R^{}",
                b.n(),
                self.domain_dim()
            )));
        }
        let image = self.s.mul(b.basis())?;
        let rank = image.rank();
        if rank != b.e() {
            return Err(MorphismError::DimensionCollapse { rank, expected: b.e() });
        }
        Ok(RationalSubspace::from_rational_basis(&image)?)
    }
}

/// c with H(φ(B)) ≤ c·H(B) for every e-dimensional B whose dimension φ preserves:
/// the denominator clearing of Λᵉ(S) times an upper bound for its Frobenius norm.
pub fn height_distortion_constant(map: &RationalMap, e: usize) -> Result<BigRational, MorphismError> {
    let compound = compound_matrix(map.matrix(), e)?;
    let k = compound.denominator_lcm();
    Ok(BigRational::from_integer(k) * sqrt_upper(&compound.frobenius_squared(), 64))
}

/// A bound on the condition number σ_max/σ_min of an injective L: exactly 1 when LᵀL is
/// a multiple of the identity, otherwise √(‖L‖_F^{2k} / det(LᵀL)) rounded up.
fn condition_bound(l: &ExactMatrix) -> Result<BigRational, MorphismError> {
    let gram = l.gram();
    let k = gram.rows();
    let d0 = gram.get(0, 0).clone();
    let scalar =
        (0..k).all(|i| (0..k).all(|j| *gram.get(i, j) == if i == j { d0.clone() } else { BigRational::zero() }));
    if scalar {
        return Ok(BigRational::one());
    }
    let det = gram.determinant()?;
    if det.is_zero() {
        return Err(MorphismError::NotInvertible);
    }
    let f = l.frobenius_squared();
    let num = num_traits::pow(f, k);
    Ok(sqrt_upper(&(num / det), 64))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecordPair {
    pub intrinsic_pluecker: Vec<String>,
    pub intrinsic_height_squared: String,
    pub image_pluecker: Vec<String>,
    pub image_height_squared: String,
    /// Index of the image among the ambient records, if it is one.
    pub ambient_record: Option<usize>,
    /// H(image)² ≤ c²·H(record)² for the lifting map.
    pub distortion_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HarnessReport {
    pub mu_intrinsic: ExponentEstimate,
    pub mu_ambient: ExponentEstimate,
    #[serde(serialize_with = "crate::report::finite::serialize")]
    pub delta: f64,
    pub record_pairs: Vec<RecordPair>,
    #[serde(skip)]
    pub intrinsic_records: Vec<ApproximationRecord>,
    #[serde(skip)]
    pub ambient_records: Vec<ApproximationRecord>,
}

impl HarnessReport {
    pub fn all_images_are_records(&self) -> bool {
        self.record_pairs.iter().all(|p| p.ambient_record.is_some())
    }

    pub fn matched_heights(&self) -> bool {
        self.record_pairs.iter().all(|p| p.image_height_squared == p.intrinsic_height_squared)
    }
}

/// Inputs to [`embedding_harness`]: Ã ⊂ ℝᵏ, F ⊂ ℝⁿ of dimension k and φ: ℝⁿ → ℝᵏ
/// invertible on F.
#[derive(Clone, Debug)]
pub struct HarnessSetup {
    pub intrinsic_target: ExactTarget,
    pub f: RationalSubspace,
    pub phi: RationalMap,
    pub e: usize,
    pub j: usize,
    pub height_squared_max: u64,
}

impl HarnessSetup {
    /// Ã ⊂ ℝᵏ placed in the first k coordinates of ℝⁿ.
    pub fn coordinate(
        intrinsic_target: ExactTarget,
        n: usize,
        e: usize,
        j: usize,
        height_squared_max: u64,
    ) -> Result<Self, MorphismError> {
        let k = intrinsic_target.n();
        let embed = RationalMap::coordinate_embedding(k, n);
        let f = RationalSubspace::from_rational_basis(embed.matrix())?;
        Ok(Self { intrinsic_target, f, phi: RationalMap::new(embed.matrix().transpose()), e, j, height_squared_max })
    }

    /// L = M_F (S M_F)⁻¹, the inverse of φ on F as a map ℝᵏ → ℝⁿ.
    pub fn lifting_map(&self) -> Result<RationalMap, MorphismError> {
        let m_f = self.f.basis();
        let restricted = self.phi.matrix().mul(m_f)?;
        if !restricted.is_square() || restricted.determinant()?.is_zero() {
            return Err(MorphismError::NotInvertible);
        }
        Ok(RationalMap::new(m_f.mul(&restricted.inverse()?)?))
    }

    /// A = L·Ã with its perturbation bound scaled by the condition bound of L.
    pub fn ambient_target(&self) -> Result<ExactTarget, MorphismError> {
        let l = self.lifting_map()?;
        let kappa = condition_bound(l.matrix())?;
        let gens = l.matrix().mul(self.intrinsic_target.generators())?;
        Ok(ExactTarget::new(gens, kappa * self.intrinsic_target.perturbation())?)
    }
}

/// Record scans of Ã in ℝᵏ and of A = φ⁻¹(Ã) in ℝⁿ over the same height bound, with
/// the images of intrinsic records matched against the ambient records.
pub fn embedding_harness(setup: &HarnessSetup, opts: &ScanOptions) -> Result<HarnessReport, MorphismError> {
    let k = setup.intrinsic_target.n();
    let n = setup.f.n();
    if setup.f.e() != k || setup.phi.domain_dim() != n || setup.phi.codomain_dim() != k {
        return Err(MorphismError::ShapeMismatch(format!("need dim F = {k} in R^{n} and phi: R^{n} -> R^{k}")));
    }
    if setup.intrinsic_target.d() + setup.e > k {
        return Err(MorphismError::ShapeMismatch(format!("d + e must be at most {k}")));
    }
    let spec_for = |dim: usize| {
        EnumSpec::exact(dim, setup.e, setup.height_squared_max)
            .map_err(|_| MorphismError::HeuristicEnumeration { n: dim, e: setup.e })
    };
    let (intrinsic_spec, ambient_spec) = (spec_for(k)?, spec_for(n)?);
    let lift = setup.lifting_map()?;
    let intrinsic = Target::new(setup.intrinsic_target.clone(), &opts.ctx)?;
    let ambient = Target::new(setup.ambient_target()?, &opts.ctx)?;
    let (a, b) = exec::join(
        opts.exec,
        || scan_records(&intrinsic, &intrinsic_spec, setup.j, opts),
        || scan_records(&ambient, &ambient_spec, setup.j, opts),
    );
    let (intrinsic_records, ambient_records) = (a?.records, b?.records);
    let mu_intrinsic = estimate_exponent(&intrinsic_records)?;
    let mu_ambient = estimate_exponent(&ambient_records)?;
    let c = height_distortion_constant(&lift, setup.e)?;
    let c_sq = &c * &c;
    let record_pairs = intrinsic_records
        .iter()
        .map(|r| {
            let image = lift.apply_to_subspace(&r.subspace)?;
            let ambient_record = ambient_records.iter().position(|a| a.subspace == image);
            let distortion_holds = BigRational::from_integer(image.height_squared().clone())
                <= &c_sq * BigRational::from_integer(r.height_squared().clone());
            Ok(RecordPair {
                intrinsic_pluecker: r.subspace.pluecker().to_strings(),
                intrinsic_height_squared: r.height_squared().to_string(),
                image_pluecker: image.pluecker().to_strings(),
                image_height_squared: image.height_squared().to_string(),
                ambient_record,
                distortion_holds,
            })
        })
        .collect::<Result<Vec<_>, MorphismError>>()?;
    Ok(HarnessReport {
        delta: (mu_intrinsic.mu_hat - mu_ambient.mu_hat).abs(),
        mu_intrinsic,
        mu_ambient,
        record_pairs,
        intrinsic_records,
        ambient_records,
    })
}

#[cfg(test)]
mod tests;
