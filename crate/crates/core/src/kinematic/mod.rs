//! Kinematic-measure Monte Carlo: Haar-distributed rigid poses, convex
//! overlap tests, excluded volumes, and virial-coefficient estimators.
//!
//! The invariant (kinematic) measure over rigid motions factorizes into
//! Lebesgue measure for translations and normalized Haar measure for
//! rotations. Motion averages such as
//!
//! ```text
//! V_excl = (1/8π²) ∫dR ∫dt 1[A ∩ (RB + t) ≠ ∅],     B₂ = V_excl/2,
//! B₃     = (1/3)·⟨1₁₂·1₁₃·1₂₃⟩  over two independent poses,
//! ```
//!
//! are estimated by uniform sampling of translations in a covering box and
//! quaternion-based Haar rotations. Every estimator consumes one dedicated
//! counter-mode RNG stream per sample index, so results are bit-identical
//! for any thread count, and chunk sums are reduced in fixed order.
//!
//! The stack estimator replaces the pairwise-intersection B₃ integrand with
//! the common-point (stack) approximation: curvature-weighted surface terms
//! sampled from area-weighted quadrature patches plus a third-order
//! three-normal form, whose motion average reproduces the
//! `V² + MSV/2π + S³/12π` virial value of the zero-loop free energy.

mod intersect;

pub use intersect::intersects;

use crate::fmt_model::tarazona_phi3;
use crate::geometry::{
    contains_point, minkowski_measures, surface_quadrature, ConvexBody, GeometryError, SurfacePatch,
};
use crate::weights::curvature_deviator;
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Haar volume of the rotation group: `∫_SO(3) dR = 8π²`.
pub const ROTATION_GROUP_VOLUME: f64 = 8.0 * PI * PI;

/// Surface quadrature resolution used to tabulate patches for the stack
/// estimator.
const STACK_QUADRATURE_RESOLUTION: usize = 2048;

/// Samples per parallel chunk; chunk partial sums are combined sequentially
/// in index order so the reduction is associative-order-fixed.
const CHUNK: u64 = 4096;

/// Minimum sample count for a meaningful standard error.
const MIN_SAMPLES: u64 = 1000;

/// Rigid motion: rotate, then translate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Pose {
            rotation,
            translation,
        }
    }

    /// Image of a body-frame point under the motion.
    pub fn apply(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * point + self.translation
    }
}

/// Monte Carlo estimate with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Kinematic-module failures.
#[derive(Debug, Error)]
pub enum KinematicError {
    #[error("Monte Carlo estimate requires at least {MIN_SAMPLES} samples, got {n_samples}")]
    TooFewSamples { n_samples: u64 },
    #[error("sampling box half-width {half_width} is not a positive finite length")]
    BadSampleBox { half_width: f64 },
    #[error(
        "support iteration certified neither overlap nor separation within {iterations} iterations"
    )]
    NoConvergence { iterations: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Surface measure of the unit k-sphere `S^k ⊂ ℝ^(k+1)`:
///
/// ```text
/// O_k = 2π^((k+1)/2) / Γ((k+1)/2),   O_k = 2π·O_(k−2)/(k−1),
/// O_0 = 2, O_1 = 2π, O_2 = 4π, O_3 = 2π².
/// ```
pub fn sphere_volume_ok(k: u32) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI * sphere_volume_ok(k - 2) / (k as f64 - 1.0),
    }
}

/// Haar-uniform random rotation: four standard normals, normalized — the
/// push-forward of the uniform measure on the quaternion 3-sphere.
pub fn sample_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if q.norm_squared() > 1e-24 {
            return UnitQuaternion::from_quaternion(q);
        }
    }
}

/// Kinematic-measure pose sample: Haar rotation plus translation uniform in
/// the cube `[−translation_box, translation_box]³`. The rotation is drawn
/// before the translation (fixed stream layout).
pub fn sample_pose<R: Rng + ?Sized>(rng: &mut R, translation_box: f64) -> Pose {
    let rotation = sample_rotation(rng);
    let translation = Vector3::new(
        (2.0 * rng.gen::<f64>() - 1.0) * translation_box,
        (2.0 * rng.gen::<f64>() - 1.0) * translation_box,
        (2.0 * rng.gen::<f64>() - 1.0) * translation_box,
    );
    Pose::new(rotation, translation)
}

/// Deterministic parallel sample mean: sample `i` draws from the
/// counter-mode stream `i` of `seed`, chunks are processed in parallel, and
/// chunk sums are folded sequentially in index order, so the returned
/// `(mean, stderr)` is bit-identical for any thread count.
fn parallel_mc<F>(seed: u64, n_samples: u64, eval: F) -> Result<(f64, f64), KinematicError>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64, KinematicError> + Sync,
{
    let n_chunks = n_samples.div_ceil(CHUNK);
    let partials: Result<Vec<(f64, f64)>, KinematicError> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(n_samples);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for i in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let value = eval(&mut rng)?;
                sum += value;
                sum_sq += value * value;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let partials = partials?;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (s, q) in partials {
        sum += s;
        sum_sq += q;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let variance = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
    Ok((mean, (variance / n).sqrt()))
}

/// Motion-averaged excluded volume of two convex bodies in closed form:
///
/// ```text
/// V_excl = V_A + V_B + (M_A S_B + M_B S_A)/4π,
/// ```
///
/// the Isihara–Kihara / kinematic-formula pair average.
pub fn excluded_volume_analytic(body_a: &ConvexBody, body_b: &ConvexBody) -> f64 {
    let ma = minkowski_measures(body_a);
    let mb = minkowski_measures(body_b);
    ma.volume
        + mb.volume
        + (ma.mean_curvature_integral * mb.surface + mb.mean_curvature_integral * ma.surface)
            / (4.0 * PI)
}

/// Monte Carlo excluded volume: body A fixed at the origin, body B given a
/// Haar rotation and a translation uniform in a covering box; the estimate
/// is box volume × overlap fraction.
///
/// # Errors
///
/// `TooFewSamples` below the statistics floor; `NoConvergence` from the
/// overlap test on pathological inputs.
pub fn excluded_volume_mc(
    body_a: &ConvexBody,
    body_b: &ConvexBody,
    n_samples: u64,
    seed: u64,
) -> Result<MCEstimate, KinematicError> {
    if n_samples < MIN_SAMPLES {
        return Err(KinematicError::TooFewSamples { n_samples });
    }
    let half_width = body_a.circumradius() + body_b.circumradius() + 1e-6;
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(KinematicError::BadSampleBox { half_width });
    }
    let box_volume = (2.0 * half_width).powi(3);
    let identity = Pose::identity();
    let (mean, stderr) = parallel_mc(seed, n_samples, |rng| {
        let pose_b = sample_pose(rng, half_width);
        Ok(if intersects(body_a, &identity, body_b, &pose_b)? {
            box_volume
        } else {
            0.0
        })
    })?;
    Ok(MCEstimate {
        mean,
        stderr,
        n_samples,
        seed,
    })
}

/// How to evaluate a second virial coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondVirialMethod {
    Analytic,
    MonteCarlo { n_samples: u64, seed: u64 },
}

/// Second virial coefficient of the (possibly mixed) pair: `B₂ = V_excl/2`.
pub fn second_virial(
    body_a: &ConvexBody,
    body_b: &ConvexBody,
    method: SecondVirialMethod,
) -> Result<f64, KinematicError> {
    match method {
        SecondVirialMethod::Analytic => Ok(excluded_volume_analytic(body_a, body_b) / 2.0),
        SecondVirialMethod::MonteCarlo { n_samples, seed } => {
            Ok(excluded_volume_mc(body_a, body_b, n_samples, seed)?.mean / 2.0)
        }
    }
}

/// Exact third virial coefficient by Monte Carlo:
///
/// ```text
/// B₃ = (1/3) ∫dμ(2) ∫dμ(3) 1[1∩2] 1[1∩3] 1[2∩3],
/// ```
///
/// with body 1 fixed and poses 2, 3 sampled over Haar rotations and a box
/// covering all configurations that can overlap body 1.
pub fn third_virial_mc(
    body: &ConvexBody,
    n_samples: u64,
    seed: u64,
) -> Result<MCEstimate, KinematicError> {
    if n_samples < MIN_SAMPLES {
        return Err(KinematicError::TooFewSamples { n_samples });
    }
    let half_width = 2.0 * body.circumradius() + 1e-6;
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(KinematicError::BadSampleBox { half_width });
    }
    let box_volume = (2.0 * half_width).powi(3);
    let weight = box_volume * box_volume / 3.0;
    let identity = Pose::identity();
    let (mean, stderr) = parallel_mc(seed, n_samples, |rng| {
        let pose2 = sample_pose(rng, half_width);
        let pose3 = sample_pose(rng, half_width);
        let hit = intersects(body, &identity, body, &pose2)?
            && intersects(body, &identity, body, &pose3)?
            && intersects(body, &pose2, body, &pose3)?;
        Ok(if hit { weight } else { 0.0 })
    })?;
    Ok(MCEstimate {
        mean,
        stderr,
        n_samples,
        seed,
    })
}

/// Third-order form used by the stack estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StackThirdOrder {
    /// Scalar-vector polarization `(1 − c₁₂ − c₁₃ − c₂₃)/24π`.
    Rosenfeld,
    /// Tensor form `[(1−c₁₂)(1−c₁₃)(1−c₂₃) − M₃]/16π`.
    Tarazona,
}

/// Area-weighted alias table over quadrature patches.
struct PatchTable {
    patches: Vec<SurfacePatch>,
    cumulative: Vec<f64>,
    total_area: f64,
}

impl PatchTable {
    fn build(body: &ConvexBody) -> Result<Self, GeometryError> {
        let patches = surface_quadrature(body, STACK_QUADRATURE_RESOLUTION)?;
        let mut cumulative = Vec::with_capacity(patches.len());
        let mut acc = 0.0;
        for p in &patches {
            acc += p.area;
            cumulative.push(acc);
        }
        Ok(PatchTable {
            patches,
            total_area: acc,
            cumulative,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &SurfacePatch {
        let u = rng.gen::<f64>() * self.total_area;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u)
            .min(self.patches.len() - 1);
        &self.patches[idx]
    }
}

fn rotated_patch(patch: &SurfacePatch, rotation: &UnitQuaternion<f64>) -> SurfacePatch {
    SurfacePatch {
        point: rotation * patch.point,
        normal: rotation * patch.normal,
        dir1: rotation * patch.dir1,
        dir2: rotation * patch.dir2,
        ..*patch
    }
}

/// Stack (common-point) approximation to the third virial coefficient.
///
/// Each sample draws three area-weighted surface patches, Haar rotations
/// `Ω₂, Ω₃`, and translations placing copies 2 and 3 in a box centred on the
/// patch-1 point, then accumulates three terms whose motion averages are the
/// three bulk contributions:
///
/// ```text
/// T₁ = (S κ_G(p₁)/4π) · V_box² · 1[p₁∈D₂] 1[p₁∈D₃]     →  V²
/// T₂ = (S²/4π) · W₂(p₁, Ω₂p₂) · V_box · 1[p₁∈D₃]        →  MSV/2π
/// T₃ = 2S³ · C₃(n₁, Ω₂n₂, Ω₃n₃)                          →  S³/12π
/// ```
///
/// where `W₂` is the two-body curvature form (antipodal denominator clamped
/// at 1e−12) and `C₃` the selected third-order form. The sum estimates the
/// zero-loop `B₃ = V² + MSV/2π + S³/12π`; for spheres this equals the exact
/// `10v²`.
pub fn third_virial_stack_mc(
    body: &ConvexBody,
    n_samples: u64,
    seed: u64,
    third_order: StackThirdOrder,
) -> Result<MCEstimate, KinematicError> {
    if n_samples < MIN_SAMPLES {
        return Err(KinematicError::TooFewSamples { n_samples });
    }
    let table = PatchTable::build(body)?;
    let surface = minkowski_measures(body).surface;
    let half_width = body.circumradius() + 1e-6;
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(KinematicError::BadSampleBox { half_width });
    }
    let box_volume = (2.0 * half_width).powi(3);

    let (mean, stderr) = parallel_mc(seed, n_samples, |rng| {
        let p1 = *table.draw(rng);
        let p2 = *table.draw(rng);
        let p3 = *table.draw(rng);
        let omega2 = sample_rotation(rng);
        let t2 = p1.point
            + Vector3::new(
                (2.0 * rng.gen::<f64>() - 1.0) * half_width,
                (2.0 * rng.gen::<f64>() - 1.0) * half_width,
                (2.0 * rng.gen::<f64>() - 1.0) * half_width,
            );
        let omega3 = sample_rotation(rng);
        let t3 = p1.point
            + Vector3::new(
                (2.0 * rng.gen::<f64>() - 1.0) * half_width,
                (2.0 * rng.gen::<f64>() - 1.0) * half_width,
                (2.0 * rng.gen::<f64>() - 1.0) * half_width,
            );
        let in2 = contains_point(body, &(omega2.inverse() * (p1.point - t2)));
        let in3 = contains_point(body, &(omega3.inverse() * (p1.point - t3)));

        let t1 = if in2 && in3 {
            surface * p1.kappa_gauss() / (4.0 * PI) * box_volume * box_volume
        } else {
            0.0
        };

        let t2_term = if in3 {
            let p2r = rotated_patch(&p2, &omega2);
            let c = p1.normal.dot(&p2r.normal);
            let d1 = curvature_deviator(&p1);
            let d2 = curvature_deviator(&p2r);
            let dev = p2r.normal.dot(&(d1 * p2r.normal)) + p1.normal.dot(&(d2 * p1.normal));
            let w2 = (1.0 - c) * (p1.kappa_mean() + p2r.kappa_mean()) - dev / (1.0 + c).max(1e-12);
            surface * surface / (4.0 * PI) * w2 * box_volume
        } else {
            0.0
        };

        let n1 = p1.normal;
        let n2 = omega2 * p2.normal;
        let n3 = omega3 * p3.normal;
        let c3 = match third_order {
            StackThirdOrder::Rosenfeld => {
                (1.0 - n1.dot(&n2) - n1.dot(&n3) - n2.dot(&n3)) / (24.0 * PI)
            }
            StackThirdOrder::Tarazona => tarazona_phi3(&n1, &n2, &n3),
        };
        let t3_term = 2.0 * surface.powi(3) * c3;

        Ok(t1 + t2_term + t3_term)
    })?;
    Ok(MCEstimate {
        mean,
        stderr,
        n_samples,
        seed,
    })
}
