//! Planar (1D) hard-sphere density-functional solver: exact cell-integrated
//! z-kernels, weighted-density fields, the excess chemical potential by
//! mirrored correlation, Picard fixed-point iteration, and the grand
//! potential.
//!
//! Under planar symmetry every weight collapses to a compact kernel on
//! `[−R, R]`; for a sphere of radius R the closed forms are
//!
//! ```text
//! k_v(z)    = π(R²−z²)        k_σ0(z)   = 2πR         k_χ(z)  = 1/(2R)
//! k_κ0(z)   = 1/2             k_σ1z(z)  = 2πz         k_κ1z(z) = z/(2R)
//! k_σ2zz(z) = 2πz²/R          k_σ2xx(z) = k_σ2yy(z) = π(R²−z²)/R
//! ```
//!
//! (trace identity `k_σ2zz + 2k_σ2t = k_σ0` holds pointwise). Kernels are
//! discretized by exact integration over each grid cell, so the discrete sum
//! rules `Σk_v = 4πR³/3`, `Σk_σ0 = 4πR²`, `Σk_χ = 1` hold to rounding and
//! a uniform profile reproduces the bulk weighted densities at every node,
//! including nodes near the domain edges (the profile carries constant
//! boundary extensions).
//!
//! The excess chemical potential is the adjoint (mirrored-kernel)
//! correlation
//!
//! ```text
//! βμ_ex(z) = Σ_A ∫ ∂Φ/∂n_A(z′) · k_A(z′−z) dz′,
//! ```
//!
//! and the Picard map `ρ ↦ ρ_b exp(βμ_ex^bulk − βμ_ex(z) − βV_ext(z))` is
//! damped by an adaptive mixing parameter (halved whenever the residual
//! grows). A hard wall at z = 0 is encoded by `V_ext = +∞` for z < R
//! (centre exclusion), giving ρ = 0 there exactly.

use crate::fmt_model::{
    bulk_eos, phi_excess, phi_partials, FmtModelError, FreeEnergyModel, WeightedDensities,
};
use crate::geometry::{minkowski_measures, ConvexBody};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;
use thiserror::Error;

/// Node-centred uniform grid: `z_i = origin + i·dz` for `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n_points: usize,
    pub dz: f64,
    pub origin: f64,
}

impl Grid1D {
    pub fn new(n_points: usize, dz: f64, origin: f64) -> Result<Self, PlanarDftError> {
        let grid = Grid1D {
            n_points,
            dz,
            origin,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), PlanarDftError> {
        if self.n_points < 64 {
            return Err(PlanarDftError::GridTooCoarse {
                n_points: self.n_points,
            });
        }
        if !(self.dz.is_finite() && self.dz > 0.0) || !self.origin.is_finite() {
            return Err(PlanarDftError::BadSpacing { dz: self.dz });
        }
        Ok(())
    }

    /// Coordinate of node `i` (any integer; the grid extends virtually).
    pub fn z(&self, i: isize) -> f64 {
        self.origin + i as f64 * self.dz
    }

    pub fn extent(&self) -> f64 {
        self.n_points as f64 * self.dz
    }
}

/// Density profile on a grid, with constant extensions on both sides used
/// by the convolutions (`left_boundary` beyond the first node, typically 0
/// at a wall; `right_boundary` beyond the last node, typically the bulk
/// density).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub left_boundary: f64,
    pub right_boundary: f64,
}

impl DensityProfile {
    pub fn new(
        grid: Grid1D,
        rho: Vec<f64>,
        left_boundary: f64,
        right_boundary: f64,
    ) -> Result<Self, PlanarDftError> {
        grid.validate()?;
        if rho.len() != grid.n_points {
            return Err(PlanarDftError::LengthMismatch {
                expected: grid.n_points,
                got: rho.len(),
            });
        }
        for (node, &value) in rho.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(PlanarDftError::BadDensity { node, value });
            }
        }
        for &value in [left_boundary, right_boundary].iter() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(PlanarDftError::BadDensity {
                    node: usize::MAX,
                    value,
                });
            }
        }
        Ok(DensityProfile {
            grid,
            rho,
            left_boundary,
            right_boundary,
        })
    }

    /// Constant profile with matching extensions.
    pub fn uniform(grid: Grid1D, rho_bulk: f64) -> Result<Self, PlanarDftError> {
        DensityProfile::new(grid, vec![rho_bulk; grid.n_points], rho_bulk, rho_bulk)
    }

    /// Density at any node index, using the boundary extensions.
    pub fn rho_ext(&self, i: isize) -> f64 {
        if i < 0 {
            self.left_boundary
        } else if (i as usize) < self.rho.len() {
            self.rho[i as usize]
        } else {
            self.right_boundary
        }
    }
}

/// Cell-integrated planar weight kernels for a sphere of radius `radius` on
/// spacing `dz`. Arrays have length `2·half_width + 1`; entry `j +
/// half_width` holds `∫_cell_j k(z) dz` (the spacing is folded in, so
/// convolutions are plain dot products).
#[derive(Debug, Clone)]
pub struct PlanarKernels {
    pub radius: f64,
    pub dz: f64,
    pub half_width: usize,
    pub k_v: Vec<f64>,
    pub k_chi: Vec<f64>,
    pub k_k0: Vec<f64>,
    pub k_s0: Vec<f64>,
    pub k_k1z: Vec<f64>,
    pub k_s1z: Vec<f64>,
    pub k_s2zz: Vec<f64>,
    pub k_s2t: Vec<f64>,
}

/// Planar-module failures.
#[derive(Debug, Error)]
pub enum PlanarDftError {
    #[error("grid must have at least 64 points, got {n_points}")]
    GridTooCoarse { n_points: usize },
    #[error("grid spacing {dz} must be positive and finite (with finite origin)")]
    BadSpacing { dz: f64 },
    #[error("radius {radius} must be positive and finite")]
    BadRadius { radius: f64 },
    #[error("radius {radius} is under-resolved by spacing {dz}; at least 3 cells per radius")]
    UnderResolved { radius: f64, dz: f64 },
    #[error("kernel half-width {half_width} exceeds the grid of {n_points} points")]
    SupportExceedsGrid { half_width: usize, n_points: usize },
    #[error("grid extent {extent} is shorter than ten particle diameters ({required})")]
    DomainTooShort { extent: f64, required: f64 },
    #[error("expected {expected} nodes, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("density value {value} at node {node} must be finite and non-negative")]
    BadDensity { node: usize, value: f64 },
    #[error("kernel spacing {kernel_dz} does not match grid spacing {grid_dz}")]
    MismatchedSpacing { kernel_dz: f64, grid_dz: f64 },
    #[error("packing fraction n_v = {n_v} at node {node} leaves the domain n_v < 1")]
    PackingAtNode { node: isize, n_v: f64 },
    #[error("mixing parameter {mixing} must lie in (0, 1]")]
    MixingOutOfRange { mixing: f64 },
    #[error("tolerance {tolerance} must be positive")]
    BadTolerance { tolerance: f64 },
    #[error("bulk density {rho_bulk} must be finite and non-negative")]
    BadBulkDensity { rho_bulk: f64 },
    #[error(
        "no convergence after {iterations} iterations; residual {residual}; \
         last residuals {history:?}"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },
    #[error(transparent)]
    Model(#[from] FmtModelError),
}

/// Exact cell integrals of the planar sphere kernels.
///
/// # Errors
///
/// `UnderResolved` when fewer than three cells span the radius;
/// `SupportExceedsGrid` when the kernel is wider than the grid.
pub fn planar_kernels(radius: f64, grid: &Grid1D) -> Result<PlanarKernels, PlanarDftError> {
    grid.validate()?;
    if !(radius.is_finite() && radius > 0.0) {
        return Err(PlanarDftError::BadRadius { radius });
    }
    let dz = grid.dz;
    if radius < 3.0 * dz {
        return Err(PlanarDftError::UnderResolved { radius, dz });
    }
    let half_width = (radius / dz + 0.5).floor() as usize;
    if 2 * half_width + 1 > grid.n_points {
        return Err(PlanarDftError::SupportExceedsGrid {
            half_width,
            n_points: grid.n_points,
        });
    }
    let r = radius;
    // Antiderivatives of the closed-form kernels; all are exactly odd or
    // even in z, which makes the discrete kernels bit-exactly symmetric.
    let f_v = |z: f64| PI * (r * r * z - z * z * z / 3.0);
    let f_chi = |z: f64| z / (2.0 * r);
    let f_k0 = |z: f64| z / 2.0;
    let f_s0 = |z: f64| 2.0 * PI * r * z;
    let f_k1z = |z: f64| z * z / (4.0 * r);
    let f_s1z = |z: f64| PI * z * z;
    let f_s2zz = |z: f64| 2.0 * PI * z * z * z / (3.0 * r);
    let f_s2t = |z: f64| PI * (r * r * z - z * z * z / 3.0) / r;

    let len = 2 * half_width + 1;
    let mut kernels = PlanarKernels {
        radius,
        dz,
        half_width,
        k_v: vec![0.0; len],
        k_chi: vec![0.0; len],
        k_k0: vec![0.0; len],
        k_s0: vec![0.0; len],
        k_k1z: vec![0.0; len],
        k_s1z: vec![0.0; len],
        k_s2zz: vec![0.0; len],
        k_s2t: vec![0.0; len],
    };
    for jj in 0..len {
        let j = jj as isize - half_width as isize;
        let a = (j as f64 - 0.5) * dz;
        let b = (j as f64 + 0.5) * dz;
        let lo = a.max(-r);
        let hi = b.min(r);
        if hi <= lo {
            continue;
        }
        kernels.k_v[jj] = f_v(hi) - f_v(lo);
        kernels.k_chi[jj] = f_chi(hi) - f_chi(lo);
        kernels.k_k0[jj] = f_k0(hi) - f_k0(lo);
        kernels.k_s0[jj] = f_s0(hi) - f_s0(lo);
        kernels.k_k1z[jj] = f_k1z(hi) - f_k1z(lo);
        kernels.k_s1z[jj] = f_s1z(hi) - f_s1z(lo);
        kernels.k_s2zz[jj] = f_s2zz(hi) - f_s2zz(lo);
        kernels.k_s2t[jj] = f_s2t(hi) - f_s2t(lo);
    }
    Ok(kernels)
}

/// Weighted densities on the extended node range `[−half_width,
/// n_core + half_width)` — wide enough that the mirrored correlation for
/// μ_ex and the free-energy integral are exact up to the boundary
/// extensions.
#[derive(Debug, Clone)]
pub struct WeightedFields {
    pub half_width: usize,
    pub n_core: usize,
    values: Vec<WeightedDensities>,
}

impl WeightedFields {
    /// Field at core node `i ∈ [−half_width, n_core + half_width)`.
    pub fn at(&self, i: isize) -> &WeightedDensities {
        let idx = i + self.half_width as isize;
        &self.values[idx as usize]
    }
}

/// Discrete convolutions `n_A(z_i) = Σ_j K_A[j] ρ(z_{i−j})` of the profile
/// (with its boundary extensions) against every kernel.
///
/// # Errors
///
/// `MismatchedSpacing` if the kernels were built for a different spacing.
pub fn weighted_density_fields(
    profile: &DensityProfile,
    kernels: &PlanarKernels,
) -> Result<WeightedFields, PlanarDftError> {
    if kernels.dz != profile.grid.dz {
        return Err(PlanarDftError::MismatchedSpacing {
            kernel_dz: kernels.dz,
            grid_dz: profile.grid.dz,
        });
    }
    let n = profile.grid.n_points;
    let hw = kernels.half_width;
    let pad = 2 * hw;
    // ρ over [−2hw, n + 2hw): position p holds core index p − 2hw.
    let rho_ext: Vec<f64> = (0..n + 2 * pad)
        .map(|p| profile.rho_ext(p as isize - pad as isize))
        .collect();

    let len = 2 * hw + 1;
    let mut values = Vec::with_capacity(n + 2 * hw);
    for f in 0..n + 2 * hw {
        // Field core index f − hw; ρ(core (f − hw) − j) sits at rho_ext
        // position f + 2hw − jj for kernel position jj = j + hw.
        let mut n_v = 0.0;
        let mut n_chi = 0.0;
        let mut n_k0 = 0.0;
        let mut n_s0 = 0.0;
        let mut n_k1z = 0.0;
        let mut n_s1z = 0.0;
        let mut n_s2zz = 0.0;
        let mut n_s2t = 0.0;
        for jj in 0..len {
            let r = rho_ext[f + 2 * hw - jj];
            n_v += kernels.k_v[jj] * r;
            n_chi += kernels.k_chi[jj] * r;
            n_k0 += kernels.k_k0[jj] * r;
            n_s0 += kernels.k_s0[jj] * r;
            n_k1z += kernels.k_k1z[jj] * r;
            n_s1z += kernels.k_s1z[jj] * r;
            n_s2zz += kernels.k_s2zz[jj] * r;
            n_s2t += kernels.k_s2t[jj] * r;
        }
        values.push(WeightedDensities {
            n_chi,
            n_k0,
            n_k1: Vector3::new(0.0, 0.0, n_k1z),
            n_s0,
            n_s1: Vector3::new(0.0, 0.0, n_s1z),
            n_s2: Matrix3::from_diagonal(&Vector3::new(n_s2t, n_s2t, n_s2zz)),
            n_delta2: Matrix3::zeros(),
            n_v,
        });
    }
    Ok(WeightedFields {
        half_width: hw,
        n_core: n,
        values,
    })
}

/// Excess chemical potential at the core nodes by the adjoint correlation
/// `βμ_ex(z_i) = Σ_A Σ_j K_A[j] ∂Φ/∂n_A(z_{i+j})` — the parity flip of the
/// odd kernels is implicit in the index reversal.
///
/// # Errors
///
/// `PackingAtNode` naming the first node where `n_v ≥ 1`.
pub fn mu_ex_field(
    fields: &WeightedFields,
    model: &FreeEnergyModel,
    kernels: &PlanarKernels,
) -> Result<Vec<f64>, PlanarDftError> {
    let hw = fields.half_width;
    if kernels.half_width != hw {
        return Err(PlanarDftError::MismatchedSpacing {
            kernel_dz: kernels.dz,
            grid_dz: kernels.dz,
        });
    }
    let n = fields.n_core;
    let n_ext = n + 2 * hw;
    let mut d_chi = vec![0.0; n_ext];
    let mut d_k0 = vec![0.0; n_ext];
    let mut d_s0 = vec![0.0; n_ext];
    let mut d_k1z = vec![0.0; n_ext];
    let mut d_s1z = vec![0.0; n_ext];
    let mut d_s2zz = vec![0.0; n_ext];
    let mut d_s2t = vec![0.0; n_ext];
    let mut d_v = vec![0.0; n_ext];
    for (idx, densities) in fields.values.iter().enumerate() {
        let partials = phi_partials(densities, model).map_err(|e| match e {
            FmtModelError::PackingFraction { n_v } => PlanarDftError::PackingAtNode {
                node: idx as isize - hw as isize,
                n_v,
            },
            other => PlanarDftError::Model(other),
        })?;
        d_chi[idx] = partials.d_chi;
        d_k0[idx] = partials.d_k0;
        d_s0[idx] = partials.d_s0;
        d_k1z[idx] = partials.d_k1.z;
        d_s1z[idx] = partials.d_s1.z;
        d_s2zz[idx] = partials.d_s2[(2, 2)];
        d_s2t[idx] = partials.d_s2[(0, 0)] + partials.d_s2[(1, 1)];
        d_v[idx] = partials.d_v;
    }
    let len = 2 * hw + 1;
    let mut mu = vec![0.0; n];
    for (i, slot) in mu.iter_mut().enumerate() {
        let mut acc = 0.0;
        for jj in 0..len {
            let p = i + jj; // partial-field position for core node i + (jj − hw)
            acc += kernels.k_v[jj] * d_v[p]
                + kernels.k_chi[jj] * d_chi[p]
                + kernels.k_k0[jj] * d_k0[p]
                + kernels.k_s0[jj] * d_s0[p]
                + kernels.k_k1z[jj] * d_k1z[p]
                + kernels.k_s1z[jj] * d_s1z[p]
                + kernels.k_s2zz[jj] * d_s2zz[p]
                + kernels.k_s2t[jj] * d_s2t[p];
        }
        *slot = acc;
    }
    Ok(mu)
}

/// Picard solver controls. `grid` and `radius` define the discretization;
/// defaults (`mixing` 0.05, `tolerance` 1e−8, `max_iterations` 10⁵) are safe
/// for packing fractions up to ≈ 0.45.
#[derive(Debug, Clone)]
pub struct PicardParams {
    pub grid: Grid1D,
    pub radius: f64,
    pub mixing: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl PicardParams {
    pub fn new(grid: Grid1D, radius: f64) -> Self {
        PicardParams {
            grid,
            radius,
            mixing: 0.05,
            tolerance: 1e-8,
            max_iterations: 100_000,
        }
    }
}

/// Converged profile plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub profile: DensityProfile,
    pub iterations: usize,
    pub final_residual: f64,
}

/// Maximum exponent handed to `exp` in the fixed-point map; far outside the
/// physical basin this guards against overflow while the adaptive mixing
/// pulls the iterate back.
const EXP_GUARD: f64 = 60.0;

/// Damped fixed-point iteration for the equilibrium profile under an
/// external potential (∞ entries encode exclusion zones):
///
/// ```text
/// ρ*(z) = ρ_b exp(βμ_ex^bulk − βμ_ex(z) − βV_ext(z)),
/// ρ ← ρ + α(ρ* − ρ),      α halved when the residual grows,
/// ```
///
/// starting from the step profile `ρ_b·e^{−βV}` and stopping when
/// `max|ρ*−ρ|/ρ_b ≤ tolerance`. The left boundary extension is zero when
/// `V_ext[0] = ∞` (wall side) and `ρ_b` otherwise; the right extension is
/// always `ρ_b`.
///
/// # Errors
///
/// Parameter/domain validation, `PackingAtNode` from the field evaluation,
/// and `NoConvergence` carrying the trailing residual history.
pub fn picard_solve(
    model: &FreeEnergyModel,
    v_ext: &[f64],
    rho_bulk: f64,
    params: &PicardParams,
) -> Result<PicardOutcome, PlanarDftError> {
    params.grid.validate()?;
    if !(params.radius.is_finite() && params.radius > 0.0) {
        return Err(PlanarDftError::BadRadius {
            radius: params.radius,
        });
    }
    if !(params.mixing > 0.0 && params.mixing <= 1.0) {
        return Err(PlanarDftError::MixingOutOfRange {
            mixing: params.mixing,
        });
    }
    if !(params.tolerance.is_finite() && params.tolerance > 0.0) {
        return Err(PlanarDftError::BadTolerance {
            tolerance: params.tolerance,
        });
    }
    if !(rho_bulk.is_finite() && rho_bulk >= 0.0) {
        return Err(PlanarDftError::BadBulkDensity { rho_bulk });
    }
    let grid = params.grid;
    if v_ext.len() != grid.n_points {
        return Err(PlanarDftError::LengthMismatch {
            expected: grid.n_points,
            got: v_ext.len(),
        });
    }
    let required = 20.0 * params.radius; // ten diameters
    if grid.extent() < required {
        return Err(PlanarDftError::DomainTooShort {
            extent: grid.extent(),
            required,
        });
    }
    let kernels = planar_kernels(params.radius, &grid)?;
    let body = ConvexBody::sphere(params.radius).expect("validated radius");
    let eta = rho_bulk * minkowski_measures(&body).volume;
    let mu_ex_bulk = bulk_eos(&body, eta, model)?.beta_mu_excess;

    let left_boundary = if v_ext[0].is_infinite() {
        0.0
    } else {
        rho_bulk
    };
    let mut rho: Vec<f64> = v_ext
        .iter()
        .map(|&v| {
            if v.is_finite() {
                rho_bulk * (-v).exp()
            } else {
                0.0
            }
        })
        .collect();

    let mut alpha = params.mixing;
    let mut previous_residual = f64::INFINITY;
    let mut history: Vec<f64> = Vec::new();
    let scale = if rho_bulk > 0.0 { rho_bulk } else { 1.0 };
    let mut last_evaluable: Option<Vec<f64>> = None;
    let mut success_streak = 0usize;

    for iteration in 1..=params.max_iterations {
        let profile = DensityProfile::new(grid, rho.clone(), left_boundary, rho_bulk)?;
        let fields = weighted_density_fields(&profile, &kernels)?;
        let mu = match mu_ex_field(&fields, model, &kernels) {
            Ok(mu) => mu,
            // A transient overshoot past n_v = 1 is recoverable: halve the
            // mixing and bisect back towards the last evaluable iterate.
            Err(PlanarDftError::PackingAtNode { .. }) if last_evaluable.is_some() => {
                alpha = (alpha / 2.0).max(1e-5);
                success_streak = 0;
                let anchor = last_evaluable.as_ref().expect("checked");
                for (r, &a) in rho.iter_mut().zip(anchor.iter()) {
                    *r = 0.5 * (*r + a);
                }
                previous_residual = f64::INFINITY;
                continue;
            }
            Err(e) => return Err(e),
        };
        last_evaluable = Some(rho.clone());
        let mut residual = 0.0f64;
        let mut rho_star = vec![0.0; rho.len()];
        for i in 0..rho.len() {
            let target = if v_ext[i].is_finite() {
                let arg = (mu_ex_bulk - mu[i] - v_ext[i]).min(EXP_GUARD);
                rho_bulk * arg.exp()
            } else {
                0.0
            };
            rho_star[i] = target;
            residual = residual.max((target - rho[i]).abs() / scale);
        }
        if residual > previous_residual {
            alpha = (alpha / 2.0).max(1e-5);
            success_streak = 0;
        } else {
            // Let the step size recover after a rough transient: grow it
            // back towards the requested mixing on sustained progress.
            success_streak += 1;
            if success_streak >= 10 && alpha < params.mixing {
                alpha = (alpha * 1.5).min(params.mixing);
                success_streak = 0;
            }
        }
        for (r, &target) in rho.iter_mut().zip(rho_star.iter()) {
            *r += alpha * (target - *r);
        }
        previous_residual = residual;
        history.push(residual);
        if history.len() > 10 {
            history.remove(0);
        }
        if residual <= params.tolerance {
            let profile = DensityProfile::new(grid, rho, left_boundary, rho_bulk)?;
            return Ok(PicardOutcome {
                profile,
                iterations: iteration,
                final_residual: residual,
            });
        }
    }
    Err(PlanarDftError::NoConvergence {
        iterations: params.max_iterations,
        residual: previous_residual,
        history,
    })
}

/// Grand potential per unit wall area, in thermal units:
///
/// ```text
/// βΩ/A = Σ_{i=−hw}^{n−1} dz·[ρ(ln ρ − 1) + Φ(n(z_i)) − ρβμ + ρβV_ext],
/// ```
///
/// summed over the extended range so near-edge free-energy density is
/// counted. The external potential is taken as zero on the left-extension
/// nodes (zero-density extension cells contribute only through Φ); for a
/// uniform bulk slab this evaluates to `−βp·(n + hw)·dz` exactly.
pub fn grand_potential(
    profile: &DensityProfile,
    model: &FreeEnergyModel,
    kernels: &PlanarKernels,
    beta_mu: f64,
    v_ext: &[f64],
) -> Result<f64, PlanarDftError> {
    if v_ext.len() != profile.grid.n_points {
        return Err(PlanarDftError::LengthMismatch {
            expected: profile.grid.n_points,
            got: v_ext.len(),
        });
    }
    let fields = weighted_density_fields(profile, kernels)?;
    let hw = kernels.half_width as isize;
    let n = profile.grid.n_points as isize;
    let mut acc = 0.0;
    for i in -hw..n {
        let rho = profile.rho_ext(i);
        let phi = phi_excess(fields.at(i), model)?;
        let ideal = if rho > 0.0 {
            rho * (rho.ln() - 1.0)
        } else {
            0.0
        };
        let v = if i >= 0 { v_ext[i as usize] } else { 0.0 };
        let coupling = if rho > 0.0 { rho * (v - beta_mu) } else { 0.0 };
        acc += ideal + phi + coupling;
    }
    Ok(acc * profile.grid.dz)
}

/// Wall contact value of the profile under the centre-exclusion convention
/// (wall at the origin, first occupiable node one radius in).
///
/// The piecewise-constant cell representation ends the density support at
/// the cell boundary half a spacing below the first occupiable node, so the
/// contact value is the profile linearly extrapolated to that support edge;
/// reading the nodal value itself would sit half a cell inside the profile
/// and carry a first-order wall-shift error.
pub fn contact_density(profile: &DensityProfile, radius: f64) -> f64 {
    let i = ((radius - profile.grid.origin) / profile.grid.dz).round() as isize;
    1.5 * profile.rho_ext(i) - 0.5 * profile.rho_ext(i + 1)
}
