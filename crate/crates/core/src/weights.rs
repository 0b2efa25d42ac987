//! Curvature weight functions and the two-/three-body Euler-form integrands.
//!
//! Every weight is a geometric density on the body: a volume indicator or a
//! surface density built from the principal frame. With `n` the outward
//! normal, `ν₁, ν₂` the principal directions, `κ₁, κ₂` the principal
//! curvatures, `κ̄ = (κ₁+κ₂)/2`, and the curvature deviator
//!
//! ```text
//! Δ = ((κ₁ − κ₂)/2) (ν₁⊗ν₁ − ν₂⊗ν₂),
//! ```
//!
//! the basis is (the 1/4π normalization absorbs the total solid angle):
//!
//! ```text
//! ω_χ      = (1/4π) κ₁κ₂            δ(∂D)      scaling dimension 3
//! ω_{κL}   = (1/4π) κ̄  n^⊗L        δ(∂D)      scaling dimension 2
//! ω_{ΔL}   = (1/4π) Δ ⊗ n^⊗(L−2)   δ(∂D)      scaling dimension 2
//! ω_{σL}   =        n^⊗L           δ(∂D)      scaling dimension 1
//! ω_v      =        Θ(D)                      scaling dimension 0
//! ```
//!
//! Dilating the body by λ multiplies the *integrated* measure of class `A`
//! by `λ^(3−dim A)`.
//!
//! The two-body Euler line density for surfaces crossing at angle
//! `φ₁₂` (`c = n₁·n₂`, `s = |n₁×n₂|`) has two algebraically identical
//! closed forms: the angle form along the intersection tangent
//! `t = n₂×n₁/s`,
//!
//! ```text
//! W₂ = (1−c)/s · (t·𝕂₁t + t·𝕂₂t),        𝕂 = κ̄(𝕀 − n⊗n) + Δ,
//! ```
//!
//! and the tensor form obtained by resolving the tangent against the
//! principal frames,
//!
//! ```text
//! W₂ = (1−c)(κ̄₁+κ̄₂) − [n₁·Δ₂n₁ + n₂·Δ₁n₂]/(1+c).
//! ```
//!
//! The quotient `1/(1+c)` expands as the geometric series
//! `Σ_L (−1)^L c^L`, which yields the truncated curvature-deviator series
//! implemented by [`two_body_weight_expansion`]: the rank-(L+2) deviator
//! weight of body 1 fully contracted against the rank-L normal tensor of
//! body 2 produces `(n₂·Δ₁n₂)·c^L`, with the alternating sign from the
//! series. The three-body Euler form is the pure normal-tensor polynomial
//! `(1−c₁₂)(1−c₁₃)(1−c₂₃)`.

use crate::geometry::SurfacePatch;
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Degeneracy threshold on `|n₁×n₂|` below which the angle form is
/// ill-conditioned and on `1+n₁·n₂` below which the tensor form diverges.
pub const EPS_PARALLEL: f64 = 1e-9;

/// Weight-function classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightTag {
    /// Euler weight `κ₁κ₂/4π · δ(∂D)`.
    Chi,
    /// Mean-curvature weights `κ̄ n^⊗L/4π · δ(∂D)`.
    Kappa,
    /// Curvature-deviator weights `Δ ⊗ n^⊗(L−2)/4π · δ(∂D)`.
    Delta,
    /// Normal-tensor weights `n^⊗L · δ(∂D)`.
    Sigma,
    /// Volume indicator `Θ(D)`.
    Volume,
}

/// A weight selector: class tag plus total tensor rank.
///
/// `Chi` and `Volume` are scalars (`rank = 0`). `Kappa`/`Sigma` support
/// ranks 0–2 as stored values. `Delta` has minimum rank 2 (the deviator
/// itself); higher ranks exist only as on-the-fly contractions inside the
/// series expansion and cannot be materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightIndex {
    pub tag: WeightTag,
    pub rank: usize,
}

impl WeightIndex {
    pub const fn new(tag: WeightTag, rank: usize) -> Self {
        WeightIndex { tag, rank }
    }

    /// Scaling dimension of the class: integrated measures scale as
    /// `λ^(3 − dim)` under body dilation by λ.
    pub fn scaling_dimension(&self) -> i32 {
        match self.tag {
            WeightTag::Chi => 3,
            WeightTag::Kappa | WeightTag::Delta => 2,
            WeightTag::Sigma => 1,
            WeightTag::Volume => 0,
        }
    }
}

/// A stored weight value of rank 0, 1, or 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightValue {
    Scalar(f64),
    Vector(Vector3<f64>),
    Tensor(Matrix3<f64>),
}

impl WeightValue {
    pub fn rank(&self) -> usize {
        match self {
            WeightValue::Scalar(_) => 0,
            WeightValue::Vector(_) => 1,
            WeightValue::Tensor(_) => 2,
        }
    }

    /// Scalar content, if rank 0.
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            WeightValue::Scalar(s) => Some(*s),
            _ => None,
        }
    }

    /// Vector content, if rank 1.
    pub fn as_vector(&self) -> Option<Vector3<f64>> {
        match self {
            WeightValue::Vector(v) => Some(*v),
            _ => None,
        }
    }

    /// Tensor content, if rank 2.
    pub fn as_tensor(&self) -> Option<Matrix3<f64>> {
        match self {
            WeightValue::Tensor(t) => Some(*t),
            _ => None,
        }
    }
}

/// Weight-evaluation failures.
#[derive(Debug, Clone, Error)]
pub enum WeightError {
    #[error("weight {tag:?} does not support rank {rank} as a stored value")]
    UnsupportedRank { tag: WeightTag, rank: usize },
    #[error("the volume weight is an indicator over the body, not a surface density")]
    VolumeWeightOnSurface,
    #[error(
        "normals nearly parallel (|n1 × n2| = {cross_norm:.3e} ≤ {EPS_PARALLEL:.0e}); the angle \
         form is ill-conditioned here — use the tensor form"
    )]
    NearParallel { cross_norm: f64 },
    #[error(
        "normals nearly antipodal (1 + n1·n2 = {one_plus_dot:.3e} ≤ {EPS_PARALLEL:.0e}); blocking \
         configuration, the line density diverges"
    )]
    Antipodal { one_plus_dot: f64 },
    #[error("intersection determinant defined for 2 or 3 normals, got {count}")]
    BadNormalCount { count: usize },
}

/// Curvature deviator `Δ = ((κ₁−κ₂)/2)(ν₁⊗ν₁ − ν₂⊗ν₂)` of a patch
/// (no 1/4π; that normalization belongs to the weight, not the tensor).
pub fn curvature_deviator(patch: &SurfacePatch) -> Matrix3<f64> {
    let half_diff = 0.5 * (patch.kappa1 - patch.kappa2);
    let d1 = patch.dir1;
    let d2 = patch.dir2;
    half_diff * (d1 * d1.transpose() - d2 * d2.transpose())
}

/// Curvature tensor `𝕂 = κ̄(𝕀 − n⊗n) + Δ` (the shape operator extended by
/// zero along the normal).
pub fn curvature_tensor(patch: &SurfacePatch) -> Matrix3<f64> {
    let n = patch.normal;
    patch.kappa_mean() * (Matrix3::identity() - n * n.transpose()) + curvature_deviator(patch)
}

/// Evaluate a surface weight density on a patch. Multiply by `patch.area`
/// and sum to integrate.
///
/// # Errors
///
/// - `Volume`: the volume weight has no surface density ([`WeightError::VolumeWeightOnSurface`]).
/// - `Chi`/`Volume` with rank > 0, `Kappa`/`Sigma` with rank > 2, `Delta`
///   with rank ≠ 2: [`WeightError::UnsupportedRank`].
pub fn weight_at(patch: &SurfacePatch, index: WeightIndex) -> Result<WeightValue, WeightError> {
    let n = patch.normal;
    let unsupported = || WeightError::UnsupportedRank {
        tag: index.tag,
        rank: index.rank,
    };
    match index.tag {
        WeightTag::Chi => match index.rank {
            0 => Ok(WeightValue::Scalar(patch.kappa_gauss() / (4.0 * PI))),
            _ => Err(unsupported()),
        },
        WeightTag::Kappa => {
            let kbar = patch.kappa_mean() / (4.0 * PI);
            match index.rank {
                0 => Ok(WeightValue::Scalar(kbar)),
                1 => Ok(WeightValue::Vector(kbar * n)),
                2 => Ok(WeightValue::Tensor(kbar * n * n.transpose())),
                _ => Err(unsupported()),
            }
        }
        WeightTag::Delta => match index.rank {
            2 => Ok(WeightValue::Tensor(curvature_deviator(patch) / (4.0 * PI))),
            _ => Err(unsupported()),
        },
        WeightTag::Sigma => match index.rank {
            0 => Ok(WeightValue::Scalar(1.0)),
            1 => Ok(WeightValue::Vector(n)),
            2 => Ok(WeightValue::Tensor(n * n.transpose())),
            _ => Err(unsupported()),
        },
        WeightTag::Volume => Err(WeightError::VolumeWeightOnSurface),
    }
}

/// Integrated weight (fundamental measure) of a body at the default
/// quadrature resolution (8192 nodes).
///
/// Sum rules: `∫ω_χ = χ(D) = 1` for convex bodies, `∫ω_{κ0} = M/4π`,
/// `∫ω_{σ0} = S`, `∫ω_{σ1} = 0`, `∫ω_v = V`.
pub fn fundamental_measure(
    body: &crate::geometry::ConvexBody,
    index: WeightIndex,
) -> Result<WeightValue, FundamentalMeasureError> {
    fundamental_measure_with_resolution(body, index, 8192)
}

/// Errors from integrating a weight over a body.
#[derive(Debug, Clone, Error)]
pub enum FundamentalMeasureError {
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// As [`fundamental_measure`] with an explicit quadrature resolution.
pub fn fundamental_measure_with_resolution(
    body: &crate::geometry::ConvexBody,
    index: WeightIndex,
    resolution: usize,
) -> Result<WeightValue, FundamentalMeasureError> {
    if index.tag == WeightTag::Volume {
        if index.rank != 0 {
            return Err(WeightError::UnsupportedRank {
                tag: index.tag,
                rank: index.rank,
            }
            .into());
        }
        return Ok(WeightValue::Scalar(
            crate::geometry::minkowski_measures(body).volume,
        ));
    }
    let patches = crate::geometry::surface_quadrature(body, resolution)?;
    // Probe the first patch to fix the rank, then accumulate.
    let first = weight_at(&patches[0], index)?;
    match first {
        WeightValue::Scalar(_) => {
            let mut acc = 0.0;
            for p in &patches {
                acc += weight_at(p, index)?.as_scalar().unwrap() * p.area;
            }
            Ok(WeightValue::Scalar(acc))
        }
        WeightValue::Vector(_) => {
            let mut acc = Vector3::zeros();
            for p in &patches {
                acc += weight_at(p, index)?.as_vector().unwrap() * p.area;
            }
            Ok(WeightValue::Vector(acc))
        }
        WeightValue::Tensor(_) => {
            let mut acc = Matrix3::zeros();
            for p in &patches {
                acc += weight_at(p, index)?.as_tensor().unwrap() * p.area;
            }
            Ok(WeightValue::Tensor(acc))
        }
    }
}

/// Gram determinant of 2 or 3 unit normals:
///
/// ```text
/// k=2:  M₂ = 1 − c₁₂² = s₁₂² = sin²φ₁₂
/// k=3:  M₃ = 1 − c₁₂² − c₁₃² − c₂₃² + 2c₁₂c₁₃c₂₃ = (n₁·(n₂×n₃))²
/// ```
///
/// Degenerate configurations simply give 0.
pub fn intersection_determinant(normals: &[Vector3<f64>]) -> Result<f64, WeightError> {
    match normals {
        [n1, n2] => {
            let c = n1.dot(n2);
            Ok(1.0 - c * c)
        }
        [n1, n2, n3] => {
            let c12 = n1.dot(n2);
            let c13 = n1.dot(n3);
            let c23 = n2.dot(n3);
            Ok(1.0 - c12 * c12 - c13 * c13 - c23 * c23 + 2.0 * c12 * c13 * c23)
        }
        _ => Err(WeightError::BadNormalCount {
            count: normals.len(),
        }),
    }
}

/// Two-body Euler line density, angle form:
///
/// ```text
/// W₂ = (1−c)/s · (t·𝕂₁t + t·𝕂₂t),   t = n₂×n₁/s,
/// ```
///
/// evaluated with the stable half-angle identity `(1−c)/s = s/(1+c)
/// = tan(φ/2)`, so the prefactor vanishes smoothly as the normals align.
///
/// # Errors
///
/// Near-parallel normals (`s ≤ 1e−9`): the tangent direction is undefined;
/// callers should fall back to the tensor form, which is regular there.
pub fn two_body_euler_angle_form(
    patch1: &SurfacePatch,
    patch2: &SurfacePatch,
) -> Result<f64, WeightError> {
    let n1 = patch1.normal;
    let n2 = patch2.normal;
    let cross = n2.cross(&n1);
    let s = cross.norm();
    if s <= EPS_PARALLEL {
        return Err(WeightError::NearParallel { cross_norm: s });
    }
    let c = n1.dot(&n2);
    let t = cross / s;
    let tan_half = s / (1.0 + c);
    let k1 = curvature_tensor(patch1);
    let k2 = curvature_tensor(patch2);
    Ok(tan_half * (t.dot(&(k1 * t)) + t.dot(&(k2 * t))))
}

/// Two-body Euler line density, tensor form:
///
/// ```text
/// W₂ = (1−c)(κ̄₁+κ̄₂) − [n₁·Δ₂n₁ + n₂·Δ₁n₂]/(1+c),
/// ```
///
/// regular at parallel normals and identical to the angle form wherever both
/// are defined.
///
/// Because `Δᵢ` annihilates its own normal, the deviator contractions are
/// evaluated on the tangential projections `w₁ = n₂ − c·n₁` (length `s`) and
/// `w₂ = n₁ − c·n₂`, and the prefactor uses `1−c = s²/(1+c)` with `s²` taken
/// from the cross product. Contracting with `n₂` directly would cancel an
/// O(1) quadratic form down to O(s²) and the leftover rounding, divided by
/// `1+c`, would swamp the value near antipodal normals; the projected route
/// stays consistent with [`two_body_euler_angle_form`] to machine relative
/// precision there.
///
/// # Errors
///
/// Near-antipodal normals (`1+c ≤ 1e−9`): the deviator quotient diverges —
/// the surfaces block each other and the configuration carries divergent
/// line density.
pub fn two_body_euler_tensor_form(
    patch1: &SurfacePatch,
    patch2: &SurfacePatch,
) -> Result<f64, WeightError> {
    let n1 = patch1.normal;
    let n2 = patch2.normal;
    let c = n1.dot(&n2);
    if 1.0 + c <= EPS_PARALLEL {
        return Err(WeightError::Antipodal {
            one_plus_dot: 1.0 + c,
        });
    }
    let s_squared = n2.cross(&n1).norm_squared();
    let w1 = n2 - n1 * c;
    let w2 = n1 - n2 * c;
    let delta1 = curvature_deviator(patch1);
    let delta2 = curvature_deviator(patch2);
    let deviator_sum = w2.dot(&(delta2 * w2)) + w1.dot(&(delta1 * w1));
    let kappa_sum = patch1.kappa_mean() + patch2.kappa_mean();
    Ok((s_squared * kappa_sum - deviator_sum) / (1.0 + c))
}

/// Truncated deviator-series expansion of the two-body tensor form:
///
/// ```text
/// W₂(L_max) = (1−c)(κ̄₁+κ̄₂) − Σ_{L=0}^{L_max} (−1)^L c^L [n₂·Δ₁n₂ + n₁·Δ₂n₁].
/// ```
///
/// Each series term is the full contraction of the rank-(L+2) deviator
/// weight of one body with the rank-L normal weight of the other
/// (`Δ⊗n^⊗L : n^⊗(L+2) = (n₂·Δ₁n₂)(n₁·n₂)^L`); it is computed as that
/// scalar chain rather than materializing rank-L tensors. For `|c| < 1` the
/// series converges geometrically to [`two_body_euler_tensor_form`] with
/// remainder bounded by `|c|^(L_max+1)·|n₂·Δ₁n₂ + n₁·Δ₂n₁|/(1−|c|)`;
/// for spheres every `Δ` term vanishes and any truncation is exact.
pub fn two_body_weight_expansion(
    patch1: &SurfacePatch,
    patch2: &SurfacePatch,
    l_max: usize,
) -> f64 {
    let n1 = patch1.normal;
    let n2 = patch2.normal;
    let c = n1.dot(&n2);
    let delta1 = curvature_deviator(patch1);
    let delta2 = curvature_deviator(patch2);
    let deviator_sum = n2.dot(&(delta1 * n2)) + n1.dot(&(delta2 * n1));
    let mut series = 0.0;
    let mut power = 1.0; // (−c)^L
    for _ in 0..=l_max {
        series += power;
        power *= -c;
    }
    (1.0 - c) * (patch1.kappa_mean() + patch2.kappa_mean()) - series * deviator_sum
}

/// Three-body Euler form: the symmetric normal product
///
/// ```text
/// W₃ = (1 − n₁·n₂)(1 − n₁·n₃)(1 − n₂·n₃).
/// ```
///
/// The point-intersection Jacobian `1/|n₁·(n₂×n₃)| = 1/√M₃` and the overall
/// 1/2 for the orientation double cover are applied by callers, not here.
pub fn three_body_euler_form(n1: &Vector3<f64>, n2: &Vector3<f64>, n3: &Vector3<f64>) -> f64 {
    // The factors are multiplied in sorted order so any permutation of the
    // arguments reproduces the result bit-for-bit.
    let mut factors = [1.0 - n1.dot(n2), 1.0 - n1.dot(n3), 1.0 - n2.dot(n3)];
    factors.sort_unstable_by(f64::total_cmp);
    factors[0] * factors[1] * factors[2]
}

/// Three-body Euler form as the expanded eight-term normal-tensor
/// polynomial:
///
/// ```text
/// σ₀σ₀σ₀ − σ₀σ₁σ₁(pairs) + σ₂σ₁σ₁(slots) − σ₂σ₂σ₂(trace chain),
/// ```
///
/// i.e. `1 − (n₂·n₃) − (n₁·n₃) − (n₁·n₂) + n₂·(n₁⊗n₁)n₃ + n₁·(n₂⊗n₂)n₃
/// + n₁·(n₃⊗n₃)n₂ − tr[(n₁⊗n₁)(n₂⊗n₂)(n₃⊗n₃)]`. Every contraction of
/// outer-product normal tensors collapses to products of pairwise scalar
/// products (the slot-wise tensor evaluation is exercised in the tests);
/// summands and factors are combined in sorted order, which makes the value
/// bit-identical under any permutation of the three normals. Equals
/// [`three_body_euler_form`] identically.
pub fn three_body_weight_expansion(n1: &Vector3<f64>, n2: &Vector3<f64>, n3: &Vector3<f64>) -> f64 {
    let c12 = n1.dot(n2);
    let c13 = n1.dot(n3);
    let c23 = n2.dot(n3);
    let mut pair = [c12, c13, c23];
    pair.sort_unstable_by(f64::total_cmp);
    let triple = (pair[0] * pair[1]) * pair[2];
    let mut terms = [
        1.0,
        -c23,
        -c13,
        -c12,
        c12 * c13, // n₂·(n₁⊗n₁)·n₃
        c12 * c23, // n₁·(n₂⊗n₂)·n₃
        c13 * c23, // n₁·(n₃⊗n₃)·n₂
        -triple,   // tr[(n₁⊗n₁)(n₂⊗n₂)(n₃⊗n₃)]
    ];
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{surface_quadrature, ConvexBody};
    use nalgebra::Vector3;

    /// A patch with prescribed frame and curvatures at the origin.
    fn patch(normal: Vector3<f64>, dir1: Vector3<f64>, kappa1: f64, kappa2: f64) -> SurfacePatch {
        let n = normal.normalize();
        let d1 = (dir1 - n * n.dot(&dir1)).normalize();
        let d2 = n.cross(&d1);
        SurfacePatch {
            point: Vector3::zeros(),
            normal: n,
            kappa1,
            kappa2,
            dir1: d1,
            dir2: d2,
            area: 1.0,
        }
    }

    fn sphere_patch(normal: Vector3<f64>) -> SurfacePatch {
        patch(normal, Vector3::new(0.3, 0.9, -0.1), 1.0, 1.0)
    }

    #[test]
    fn chi_weight_of_unit_sphere_patch_is_quarter_inverse_pi() {
        let p = sphere_patch(Vector3::z());
        let w = weight_at(&p, WeightIndex::new(WeightTag::Chi, 0)).unwrap();
        assert!(
            (w.as_scalar().unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15,
            "unit-sphere Euler weight should be 1/4π"
        );
    }

    #[test]
    fn delta_weight_vanishes_on_umbilic_patches() {
        let p = sphere_patch(Vector3::new(0.2, -0.4, 0.89).normalize());
        let w = weight_at(&p, WeightIndex::new(WeightTag::Delta, 2)).unwrap();
        assert!(
            w.as_tensor().unwrap().norm() < 1e-15,
            "κ₁ = κ₂ must give a vanishing deviator"
        );
    }

    #[test]
    fn sigma1_weight_is_the_normal_itself() {
        let n = Vector3::new(-0.5, 0.7, 0.3).normalize();
        let p = patch(n, Vector3::x(), 2.0, 0.5);
        let w = weight_at(&p, WeightIndex::new(WeightTag::Sigma, 1)).unwrap();
        assert!((w.as_vector().unwrap() - n).norm() < 1e-15);
    }

    #[test]
    fn unsupported_ranks_are_errors() {
        let p = sphere_patch(Vector3::z());
        assert!(matches!(
            weight_at(&p, WeightIndex::new(WeightTag::Chi, 1)),
            Err(WeightError::UnsupportedRank { .. })
        ));
        assert!(matches!(
            weight_at(&p, WeightIndex::new(WeightTag::Delta, 3)),
            Err(WeightError::UnsupportedRank { .. })
        ));
        assert!(matches!(
            weight_at(&p, WeightIndex::new(WeightTag::Sigma, 3)),
            Err(WeightError::UnsupportedRank { .. })
        ));
        assert!(matches!(
            weight_at(&p, WeightIndex::new(WeightTag::Volume, 0)),
            Err(WeightError::VolumeWeightOnSurface)
        ));
    }

    #[test]
    fn fundamental_measures_of_unit_sphere_satisfy_sum_rules() {
        let body = ConvexBody::sphere(1.0).unwrap();
        let chi = fundamental_measure(&body, WeightIndex::new(WeightTag::Chi, 0)).unwrap();
        assert!(
            (chi.as_scalar().unwrap() - 1.0).abs() < 1e-10,
            "∫ω_χ should be χ(D) = 1, got {}",
            chi.as_scalar().unwrap()
        );
        let k0 = fundamental_measure(&body, WeightIndex::new(WeightTag::Kappa, 0)).unwrap();
        assert!(
            (k0.as_scalar().unwrap() - 1.0).abs() < 1e-10,
            "∫ω_κ0 = M/4π = 1 for the unit sphere"
        );
        let s1 = fundamental_measure(&body, WeightIndex::new(WeightTag::Sigma, 1)).unwrap();
        assert!(
            s1.as_vector().unwrap().norm() < 1e-10,
            "closed-surface normal integral must vanish, got {:?}",
            s1.as_vector().unwrap()
        );
        let s2 = fundamental_measure(&body, WeightIndex::new(WeightTag::Sigma, 2)).unwrap();
        let expected = Matrix3::identity() * (4.0 * PI / 3.0);
        assert!(
            (s2.as_tensor().unwrap() - expected).norm() < 1e-9,
            "∫n⊗n dS = (S/3)𝕀 on the sphere"
        );
        let v = fundamental_measure(&body, WeightIndex::new(WeightTag::Volume, 0)).unwrap();
        assert!((v.as_scalar().unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sigma2_trace_equals_surface_area_on_spheroid() {
        let body = ConvexBody::spheroid(1.0, 2.0).unwrap();
        let s2 = fundamental_measure(&body, WeightIndex::new(WeightTag::Sigma, 2))
            .unwrap()
            .as_tensor()
            .unwrap();
        let s = crate::geometry::minkowski_measures(&body).surface;
        assert!(
            (s2.trace() - s).abs() < 1e-8 * s,
            "tr ∫n⊗n dS = S: {} vs {}",
            s2.trace(),
            s
        );
    }

    #[test]
    fn delta_measure_vanishes_on_sphere_but_not_spheroid() {
        let sphere = ConvexBody::sphere(1.0).unwrap();
        let d = fundamental_measure(&sphere, WeightIndex::new(WeightTag::Delta, 2))
            .unwrap()
            .as_tensor()
            .unwrap();
        assert!(d.norm() < 1e-12, "sphere deviator integral must vanish");

        let spheroid = ConvexBody::spheroid(1.0, 2.0).unwrap();
        let d = fundamental_measure(&spheroid, WeightIndex::new(WeightTag::Delta, 2))
            .unwrap()
            .as_tensor()
            .unwrap();
        assert!(
            d.norm() > 1e-3,
            "prolate deviator integral should be nonzero, got norm {}",
            d.norm()
        );
        // By axial symmetry it must be diagonal diag(x, x, −2x)-traceless.
        assert!(d.trace().abs() < 1e-10, "deviator integral is traceless");
        assert!((d[(0, 0)] - d[(1, 1)]).abs() < 1e-10);
    }

    #[test]
    fn integrated_measures_scale_with_dimension_under_dilation() {
        let lambda = 1.7;
        let body = ConvexBody::spheroid(1.0, 2.0).unwrap();
        let dilated = ConvexBody::spheroid(lambda, 2.0 * lambda).unwrap();
        for (tag, rank) in [
            (WeightTag::Chi, 0),
            (WeightTag::Kappa, 0),
            (WeightTag::Sigma, 0),
            (WeightTag::Volume, 0),
        ] {
            let idx = WeightIndex::new(tag, rank);
            let base = fundamental_measure(&body, idx)
                .unwrap()
                .as_scalar()
                .unwrap();
            let big = fundamental_measure(&dilated, idx)
                .unwrap()
                .as_scalar()
                .unwrap();
            let expected = base * lambda.powi(3 - idx.scaling_dimension());
            assert!(
                (big - expected).abs() < 1e-9 * expected.abs().max(1.0),
                "{tag:?} should scale as λ^(3−{}): got {big}, expected {expected}",
                idx.scaling_dimension()
            );
        }
    }

    #[test]
    fn intersection_determinant_gram_values() {
        let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
        assert_eq!(intersection_determinant(&[x, y]).unwrap(), 1.0);
        assert_eq!(intersection_determinant(&[x, x]).unwrap(), 0.0);
        assert_eq!(intersection_determinant(&[x, y, z]).unwrap(), 1.0);
        assert!(matches!(
            intersection_determinant(&[x]),
            Err(WeightError::BadNormalCount { count: 1 })
        ));
        // M₃ equals the squared triple product for any unit triple.
        let n1 = Vector3::new(0.36, -0.48, 0.8).normalize();
        let n2 = Vector3::new(-0.1, 0.93, 0.2).normalize();
        let n3 = Vector3::new(0.7, 0.1, -0.6).normalize();
        let m3 = intersection_determinant(&[n1, n2, n3]).unwrap();
        let triple = n1.dot(&n2.cross(&n3));
        assert!(
            (m3 - triple * triple).abs() < 1e-14,
            "M₃ = (n₁·(n₂×n₃))²: {m3} vs {}",
            triple * triple
        );
    }

    #[test]
    fn angle_form_on_perpendicular_unit_spheres_is_two() {
        let p1 = sphere_patch(Vector3::z());
        let p2 = sphere_patch(Vector3::x());
        let w = two_body_euler_angle_form(&p1, &p2).unwrap();
        assert!(
            (w - 2.0).abs() < 1e-12,
            "perpendicular unit spheres: (1−0)/1·(1+1) = 2, got {w}"
        );
    }

    #[test]
    fn angle_form_vanishes_like_tan_half_angle_for_aligned_spheres() {
        let p1 = sphere_patch(Vector3::z());
        for phi in [1e-3f64, 1e-4, 1e-5] {
            let n2 = Vector3::new(phi.sin(), 0.0, phi.cos());
            let p2 = sphere_patch(n2);
            let w = two_body_euler_angle_form(&p1, &p2).unwrap();
            let expected = (phi / 2.0).tan() * 2.0;
            assert!(
                ((w - expected) / expected).abs() < 1e-6,
                "near-parallel limit should follow 2·tan(φ/2): {w} vs {expected}"
            );
        }
    }

    #[test]
    fn angle_form_rejects_parallel_normals() {
        let p1 = sphere_patch(Vector3::z());
        let p2 = sphere_patch(Vector3::z());
        assert!(matches!(
            two_body_euler_angle_form(&p1, &p2),
            Err(WeightError::NearParallel { .. })
        ));
    }

    #[test]
    fn tensor_form_on_spheres_is_one_minus_cosine_doubled() {
        let p1 = sphere_patch(Vector3::z());
        let phi: f64 = 1.234;
        let p2 = sphere_patch(Vector3::new(phi.sin(), 0.0, phi.cos()));
        let w = two_body_euler_tensor_form(&p1, &p2).unwrap();
        assert!(
            (w - 2.0 * (1.0 - phi.cos())).abs() < 1e-14,
            "spheres: W₂ = 2(1−cos φ), got {w}"
        );
    }

    #[test]
    fn tensor_form_rejects_antipodal_normals() {
        let p1 = sphere_patch(Vector3::z());
        let p2 = sphere_patch(-Vector3::z());
        assert!(matches!(
            two_body_euler_tensor_form(&p1, &p2),
            Err(WeightError::Antipodal { .. })
        ));
    }

    #[test]
    fn pure_deviator_patches_reduce_to_the_quotient_term() {
        // κ̄ = 0 (saddle patches): only the deviator quotient survives.
        let p1 = patch(Vector3::z(), Vector3::x(), 1.0, -1.0);
        let p2 = patch(Vector3::new(0.0, 0.6, 0.8), Vector3::x(), 0.5, -0.5);
        let w = two_body_euler_tensor_form(&p1, &p2).unwrap();
        let n1 = p1.normal;
        let n2 = p2.normal;
        let c = n1.dot(&n2);
        let expected = -(n1.dot(&(curvature_deviator(&p2) * n1))
            + n2.dot(&(curvature_deviator(&p1) * n2)))
            / (1.0 + c);
        assert!(
            (w - expected).abs() < 1e-14,
            "κ̄ = 0 leaves only the deviator term: {w} vs {expected}"
        );
    }

    /// Deterministic pseudo-random patch generator for identity tests.
    fn random_patch(rng: &mut impl rand::Rng) -> SurfacePatch {
        let n = loop {
            let v = Vector3::new(
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            );
            let norm = v.norm();
            if norm > 1e-3 && norm <= 1.0 {
                break v / norm;
            }
        };
        let helper = Vector3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        patch(
            n,
            helper,
            rng.gen::<f64>() * 4.0 - 2.0,
            rng.gen::<f64>() * 4.0 - 2.0,
        )
    }

    #[test]
    fn angle_and_tensor_forms_agree_via_the_crossing_jacobian() {
        // The angle form carries the codimension-2 line measure; the tensor
        // form is the same density before dividing by the crossing Jacobian
        // s = |n₁×n₂|. Their ratio is exactly s.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240811);
        for _ in 0..10_000 {
            let p1 = random_patch(&mut rng);
            let p2 = random_patch(&mut rng);
            let s = p1.normal.cross(&p2.normal).norm();
            if s <= 1e-6 || 1.0 + p1.normal.dot(&p2.normal) <= 1e-6 {
                continue;
            }
            let angle = two_body_euler_angle_form(&p1, &p2).unwrap();
            let tensor = two_body_euler_tensor_form(&p1, &p2).unwrap();
            let diff = (tensor - s * angle).abs();
            assert!(
                diff <= 1e-12 * tensor.abs().max(1.0),
                "tensor form must equal s × angle form: diff {diff} at s = {s}"
            );
        }
    }

    #[test]
    fn expansion_is_exact_for_spheres_at_any_truncation() {
        let p1 = sphere_patch(Vector3::z());
        let p2 = sphere_patch(Vector3::new(0.8, 0.0, 0.6));
        let tensor = two_body_euler_tensor_form(&p1, &p2).unwrap();
        for l_max in [0, 1, 2, 5] {
            let w = two_body_weight_expansion(&p1, &p2, l_max);
            assert!(
                (w - tensor).abs() < 1e-14,
                "sphere expansion at L_max={l_max} must be exact: {w} vs {tensor}"
            );
        }
    }

    #[test]
    fn expansion_error_shrinks_monotonically_with_l_max() {
        // Spheroid patches with genuinely anisotropic curvature.
        let body = ConvexBody::spheroid(1.0, 2.0).unwrap();
        let patches = surface_quadrature(&body, 128).unwrap();
        let (p1, p2) = (&patches[10], &patches[77]);
        let tensor = two_body_euler_tensor_form(p1, p2).unwrap();
        let mut last = f64::INFINITY;
        for l_max in [0usize, 2, 6] {
            let err = (two_body_weight_expansion(p1, p2, l_max) - tensor).abs();
            assert!(
                err <= last + 1e-15,
                "expansion error should shrink with L_max: {err} after {last}"
            );
            last = err;
        }
    }

    #[test]
    fn expansion_tail_respects_the_geometric_remainder_bound() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0usize;
        while checked < 2000 {
            let p1 = random_patch(&mut rng);
            let p2 = random_patch(&mut rng);
            let c = p1.normal.dot(&p2.normal);
            if c.abs() > 0.95 {
                continue; // stay inside the geometric-convergence region
            }
            let tensor = two_body_euler_tensor_form(&p1, &p2).unwrap();
            let deviator_sum = p2.normal.dot(&(curvature_deviator(&p1) * p2.normal))
                + p1.normal.dot(&(curvature_deviator(&p2) * p1.normal));
            for l_max in [0usize, 1, 2, 4] {
                let remainder = (two_body_weight_expansion(&p1, &p2, l_max) - tensor).abs();
                let bound =
                    c.abs().powi(l_max as i32 + 1) * deviator_sum.abs() / (1.0 - c.abs()) + 1e-13;
                assert!(
                    remainder <= bound,
                    "remainder {remainder} exceeds geometric bound {bound} at L_max={l_max}, c={c}"
                );
            }
            checked += 1;
        }
    }

    #[test]
    fn three_body_product_values() {
        let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
        assert_eq!(three_body_euler_form(&x, &y, &z), 1.0);
        assert_eq!(three_body_euler_form(&x, &x, &y), 0.0);
        assert_eq!(three_body_weight_expansion(&x, &y, &z), 1.0);
        let n = Vector3::new(0.6, 0.0, 0.8);
        assert!(
            three_body_weight_expansion(&n, &n, &z).abs() < 1e-15,
            "coincident normals must annihilate the expansion"
        );
    }

    #[test]
    fn three_body_expansion_matches_product_and_cyclic_symmetry() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let a = random_patch(&mut rng).normal;
            let b = random_patch(&mut rng).normal;
            let c = random_patch(&mut rng).normal;
            let product = three_body_euler_form(&a, &b, &c);
            let expansion = three_body_weight_expansion(&a, &b, &c);
            assert!(
                (product - expansion).abs() <= 1e-12 * product.abs().max(1.0),
                "product {product} vs expansion {expansion}"
            );
            let cycled = three_body_euler_form(&b, &c, &a);
            assert_eq!(product, cycled, "cyclic permutation must be exact");
            let cycled2 = three_body_weight_expansion(&c, &a, &b);
            assert_eq!(
                expansion, cycled2,
                "expansion cyclic invariance must be exact"
            );
        }
    }

    #[test]
    fn expansion_matches_slotwise_tensor_contraction() {
        // Oracle: evaluate every term through its explicit outer-product
        // tensor (rank-2 slots as 3x3 matrices) instead of collapsed
        // scalar products.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let n1 = random_patch(&mut rng).normal;
            let n2 = random_patch(&mut rng).normal;
            let n3 = random_patch(&mut rng).normal;
            let s2_1 = n1 * n1.transpose();
            let s2_2 = n2 * n2.transpose();
            let s2_3 = n3 * n3.transpose();
            let slotwise = 1.0 - n2.dot(&n3) - n1.dot(&n3) - n1.dot(&n2)
                + n2.dot(&(s2_1 * n3))
                + n1.dot(&(s2_2 * n3))
                + n1.dot(&(s2_3 * n2))
                - (s2_1 * s2_2 * s2_3).trace();
            let collapsed = three_body_weight_expansion(&n1, &n2, &n3);
            assert!(
                (slotwise - collapsed).abs() <= 1e-14,
                "slot-wise tensor value {slotwise} vs collapsed {collapsed}"
            );
        }
    }
}
