//! Convex-body geometry: shapes, surface quadrature, and integral measures.
//!
//! A convex body `D ⊂ ℝ³` is described either analytically (sphere,
//! spheroid of revolution) or by a closed, consistently oriented, convex
//! triangle mesh. Every body exposes:
//!
//! - a surface quadrature: patches carrying position, outward normal,
//!   principal curvatures `κ₁, κ₂`, principal directions `ν₁, ν₂`, and an
//!   area weight, so that `Σ f(patch)·area → ∫_∂D f dS`;
//! - its Minkowski measures
//!
//! ```text
//! V = ∫_D dV,   S = ∫_∂D dS,   M = ∫_∂D κ̄ dS,   χ(∂D),
//! ```
//!
//!   with `κ̄ = (κ₁+κ₂)/2` the mean curvature and `χ(∂D) = 2χ(D)` the Euler
//!   characteristic of the boundary surface;
//! - its support function `h(u) = max_{p ∈ D} p·u`.
//!
//! Analytic bodies evaluate curvatures exactly; meshes use discrete
//! estimators (angle defect for Gaussian curvature, cotangent Laplacian for
//! mean curvature) and are therefore first-order accurate per patch while
//! keeping the Gauss–Bonnet sum `Σ defect = 2πχ` combinatorially exact.

mod gauss;
pub mod io;
pub mod mesh;

pub use mesh::TriMesh;

use nalgebra::Vector3;
use thiserror::Error;

/// Principal-frame sample of a body surface with a quadrature weight.
///
/// The frame `(dir1, dir2, normal)` is right-handed and orthonormal:
/// `dir1 × dir2 = normal`. Curvatures are signed with the convention that a
/// convex body seen from outside has `κ₁, κ₂ ≥ 0` (sphere of radius `R`:
/// both equal `1/R`).
#[derive(Debug, Clone, Copy)]
pub struct SurfacePatch {
    /// Surface point (length).
    pub point: Vector3<f64>,
    /// Outward unit normal.
    pub normal: Vector3<f64>,
    /// First principal curvature (1/length), paired with `dir1`.
    pub kappa1: f64,
    /// Second principal curvature (1/length), paired with `dir2`.
    pub kappa2: f64,
    /// Unit principal direction of `kappa1`.
    pub dir1: Vector3<f64>,
    /// Unit principal direction of `kappa2`.
    pub dir2: Vector3<f64>,
    /// Quadrature weight (length²); the sum over all patches approaches `S`.
    pub area: f64,
}

impl SurfacePatch {
    /// Mean curvature `κ̄ = (κ₁ + κ₂)/2`.
    pub fn kappa_mean(&self) -> f64 {
        0.5 * (self.kappa1 + self.kappa2)
    }

    /// Gaussian curvature `κ_G = κ₁ κ₂`.
    pub fn kappa_gauss(&self) -> f64 {
        self.kappa1 * self.kappa2
    }
}

/// Scalar Minkowski measures of a convex body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiMeasures {
    /// Volume `V` (length³).
    pub volume: f64,
    /// Surface area `S` (length²).
    pub surface: f64,
    /// Integrated mean curvature `M = ∫ κ̄ dS` (length).
    pub mean_curvature_integral: f64,
    /// Euler characteristic of the boundary surface, `χ(∂D) = 2χ(D)`;
    /// exactly 2 for every convex body.
    pub euler_surface: f64,
}

/// A convex body in its reference frame (centroid/axis aligned with z).
#[derive(Debug, Clone)]
pub enum ConvexBody {
    /// Ball of the given radius centered at the origin.
    Sphere { radius: f64 },
    /// Spheroid `x²/a² + y²/a² + z²/c² ≤ 1` (equatorial semi-axis `a`,
    /// polar semi-axis `c`). `a < c` is prolate, `a > c` oblate.
    Spheroid { a: f64, c: f64 },
    /// Closed, consistently outward-oriented, convex triangle mesh.
    Mesh(TriMesh),
}

/// Geometry construction and evaluation failures.
#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("body dimension must be strictly positive, got {value}")]
    NonPositiveDimension { value: f64 },
    #[error("quadrature resolution {resolution} too coarse; need at least {min}")]
    ResolutionTooCoarse { resolution: usize, min: usize },
    #[error("direction vector has near-zero norm {norm:.3e}")]
    ZeroDirection { norm: f64 },
    #[error("mesh face {face} references vertex {vertex} out of range ({n_vertices} vertices)")]
    FaceIndexOutOfRange {
        face: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("mesh face {face} is degenerate (repeated vertex index {vertex})")]
    DegenerateFace { face: usize, vertex: usize },
    #[error("vertex {vertex} is not referenced by any face")]
    UnreferencedVertex { vertex: usize },
    #[error(
        "mesh is not closed: directed edge ({v0}, {v1}) appears {count} times (expected exactly 1 \
         with its reverse present)"
    )]
    NotClosed { v0: usize, v1: usize, count: usize },
    #[error(
        "mesh orientation inconsistent: edge ({v0}, {v1}) traversed in the same direction by two \
         faces"
    )]
    InconsistentOrientation { v0: usize, v1: usize },
    #[error("mesh is oriented inward (signed volume {volume:.6e} ≤ 0); flip face winding")]
    InwardOrientation { volume: f64 },
    #[error(
        "mesh is not convex: vertex {vertex} lies {excess:.3e} above the plane of face {face} \
         (tolerance {tolerance:.3e})"
    )]
    NotConvex {
        vertex: usize,
        face: usize,
        excess: f64,
        tolerance: f64,
    },
    #[error("angle-defect sum {total:.12} is not within 1e-9 of 2π·integer; mesh is inconsistent")]
    NonIntegerEulerCharacteristic { total: f64 },
    #[error("mesh file error: {0}")]
    MeshIo(String),
}

/// Relative tolerance below which a spheroid with `a ≈ c` is treated as a
/// sphere, so the degenerate principal directions never enter any formula.
const SPHEROID_DEGENERACY_TOL: f64 = 1e-12;

/// Minimum accepted quadrature resolution hint.
const MIN_RESOLUTION: usize = 32;

impl ConvexBody {
    /// Sphere of radius `radius > 0`.
    pub fn sphere(radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::NonPositiveDimension { value: radius });
        }
        Ok(ConvexBody::Sphere { radius })
    }

    /// Spheroid with semi-axes `a, c > 0`. A degenerate spheroid with
    /// `|a − c| ≤ 1e−12·max(a,c)` is routed to the sphere representation,
    /// since the curvature deviator vanishes identically there and the
    /// principal directions are undefined.
    pub fn spheroid(a: f64, c: f64) -> Result<Self, GeometryError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(GeometryError::NonPositiveDimension { value: a });
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(GeometryError::NonPositiveDimension { value: c });
        }
        if (a - c).abs() <= SPHEROID_DEGENERACY_TOL * a.max(c) {
            return Ok(ConvexBody::Sphere {
                radius: 0.5 * (a + c),
            });
        }
        Ok(ConvexBody::Spheroid { a, c })
    }

    /// Validated convex mesh body. The mesh must be closed, consistently
    /// outward-oriented, and convex within `ε = 1e−8·(bounding-box diagonal)`.
    pub fn mesh(mesh: TriMesh) -> Result<Self, GeometryError> {
        mesh.validate_closed_oriented()?;
        mesh.validate_convex()?;
        Ok(ConvexBody::Mesh(mesh))
    }

    /// Radius of the smallest origin-centered ball containing the body.
    pub fn circumradius(&self) -> f64 {
        match self {
            ConvexBody::Sphere { radius } => *radius,
            ConvexBody::Spheroid { a, c } => a.max(*c),
            ConvexBody::Mesh(mesh) => mesh
                .vertices
                .iter()
                .map(|v| v.norm())
                .fold(0.0f64, f64::max),
        }
    }
}

/// Surface quadrature of a body.
///
/// For analytic bodies the rule is a product of Gauss–Legendre nodes in
/// `cos θ` and a uniform (trapezoidal) grid in `φ`, which is spectrally
/// accurate for the smooth closed surfaces involved; `resolution` is a hint
/// for the total node count (`n_θ·n_φ` with `n_φ = 2n_θ`). Meshes return one
/// patch per vertex with discrete curvature estimates and mixed Voronoi
/// areas; their `resolution` argument is ignored.
///
/// # Errors
///
/// `ResolutionTooCoarse` below 32 nodes; mesh validation errors propagate.
pub fn surface_quadrature(
    body: &ConvexBody,
    resolution: usize,
) -> Result<Vec<SurfacePatch>, GeometryError> {
    if resolution < MIN_RESOLUTION {
        return Err(GeometryError::ResolutionTooCoarse {
            resolution,
            min: MIN_RESOLUTION,
        });
    }
    match body {
        ConvexBody::Sphere { radius } => Ok(spheroid_quadrature(*radius, *radius, resolution)),
        ConvexBody::Spheroid { a, c } => Ok(spheroid_quadrature(*a, *c, resolution)),
        ConvexBody::Mesh(mesh) => mesh.vertex_patches(),
    }
}

/// Product quadrature for the surface `x²/a² + y²/a² + z²/c² = 1`.
///
/// Parametrized by polar angle θ and azimuth φ:
///
/// ```text
/// p(θ,φ) = (a sinθ cosφ, a sinθ sinφ, c cosθ),
/// n      = (c sinθ cosφ, c sinθ sinφ, a cosθ)/w,   w = √(a²cos²θ + c²sin²θ),
/// dS     = a·w·sinθ dθ dφ,
/// κ_merid = a c / w³  (direction ∂θ),   κ_azim = c/(a w)  (direction ∂φ).
/// ```
///
/// Gauss–Legendre in `u = cosθ` never places nodes at the poles, so the
/// azimuthal direction is always well-defined.
fn spheroid_quadrature(a: f64, c: f64, resolution: usize) -> Vec<SurfacePatch> {
    let n_theta = ((resolution as f64 / 2.0).sqrt().floor() as usize).max(4);
    let n_phi = 2 * n_theta;
    let (nodes, weights) = gauss::gauss_legendre(n_theta);
    let dphi = std::f64::consts::TAU / n_phi as f64;

    let mut patches = Vec::with_capacity(n_theta * n_phi);
    for (&u, &wu) in nodes.iter().zip(weights.iter()) {
        let sin_t = (1.0 - u * u).sqrt();
        let cos_t = u;
        let w = (a * a * cos_t * cos_t + c * c * sin_t * sin_t).sqrt();
        let kappa_merid = a * c / (w * w * w);
        let kappa_azim = c / (a * w);
        // dS = a·w·sinθ dθ dφ = a·w du dφ  (du = sinθ dθ).
        let darea = a * w * wu * dphi;
        for j in 0..n_phi {
            let phi = (j as f64 + 0.5) * dphi;
            let (sin_p, cos_p) = phi.sin_cos();
            let point = Vector3::new(a * sin_t * cos_p, a * sin_t * sin_p, c * cos_t);
            let normal = Vector3::new(c * sin_t * cos_p, c * sin_t * sin_p, a * cos_t) / w;
            // Meridional tangent ∂p/∂θ, normalized.
            let t_theta = Vector3::new(a * cos_t * cos_p, a * cos_t * sin_p, -c * sin_t);
            let dir1 = t_theta / t_theta.norm();
            // Azimuthal tangent ∂p/∂φ, normalized; (dir1, dir2, n) right-handed.
            let dir2 = Vector3::new(-sin_p, cos_p, 0.0);
            patches.push(SurfacePatch {
                point,
                normal,
                kappa1: kappa_merid,
                kappa2: kappa_azim,
                dir1,
                dir2,
                area: darea,
            });
        }
    }
    patches
}

/// Minkowski measures `(V, S, M, χ(∂D))` of a body.
///
/// Sphere and spheroid use closed forms for `V` and `S`; the spheroid `M`
/// integrates `κ̄ dS` with a 256-node Gauss–Legendre rule (machine precision
/// for this smooth integrand). Mesh measures are fully discrete: signed
/// tetrahedron volumes, triangle areas, cotangent mean curvature × mixed
/// Voronoi area, and the angle-defect Euler characteristic.
pub fn minkowski_measures(body: &ConvexBody) -> MinkowskiMeasures {
    use std::f64::consts::PI;
    match body {
        ConvexBody::Sphere { radius } => {
            let r = *radius;
            MinkowskiMeasures {
                volume: 4.0 * PI * r * r * r / 3.0,
                surface: 4.0 * PI * r * r,
                mean_curvature_integral: 4.0 * PI * r,
                euler_surface: 2.0,
            }
        }
        ConvexBody::Spheroid { a, c } => MinkowskiMeasures {
            volume: 4.0 * PI * a * a * c / 3.0,
            surface: spheroid_surface_area(*a, *c),
            mean_curvature_integral: spheroid_mean_curvature_integral(*a, *c),
            euler_surface: 2.0,
        },
        ConvexBody::Mesh(mesh) => mesh.measures(),
    }
}

/// Closed-form spheroid surface area.
///
/// ```text
/// prolate (c > a):  S = 2πa² (1 + (c/(a e)) asin e),   e = √(1 − a²/c²)
/// oblate  (c < a):  S = 2πa² (1 + ((1−e²)/e) atanh e), e = √(1 − c²/a²)
/// ```
fn spheroid_surface_area(a: f64, c: f64) -> f64 {
    use std::f64::consts::PI;
    if c > a {
        let e = (1.0 - (a * a) / (c * c)).sqrt();
        2.0 * PI * a * a * (1.0 + (c / (a * e)) * e.asin())
    } else {
        let e = (1.0 - (c * c) / (a * a)).sqrt();
        2.0 * PI * a * a * (1.0 + ((1.0 - e * e) / e) * e.atanh())
    }
}

/// `M = ∫ κ̄ dS` for the spheroid by 256-node Gauss–Legendre quadrature in
/// `u = cosθ`:
///
/// ```text
/// M = 2πa ∫_{-1}^{1} ½(ac/w³ + c/(aw)) · w du,   w(u) = √(a²u² + c²(1−u²)).
/// ```
fn spheroid_mean_curvature_integral(a: f64, c: f64) -> f64 {
    use std::f64::consts::PI;
    let (nodes, weights) = gauss::gauss_legendre(256);
    let mut m = 0.0;
    for (&u, &wu) in nodes.iter().zip(weights.iter()) {
        let w = (a * a * u * u + c * c * (1.0 - u * u)).sqrt();
        let kbar = 0.5 * (a * c / (w * w * w) + c / (a * w));
        m += kbar * a * w * wu;
    }
    2.0 * PI * m
}

/// Euler characteristic `χ(∂D)` of a closed oriented triangle mesh by the
/// angle-defect Gauss–Bonnet sum,
///
/// ```text
/// 2π χ = Σ_vertices (2π − Σ_incident triangle angles),
/// ```
///
/// which is combinatorially exact. Returns the nearest integer; errors if the
/// pre-rounding value deviates from an integer by more than 1e−9.
pub fn euler_characteristic(mesh: &TriMesh) -> Result<i64, GeometryError> {
    mesh.validate_closed_oriented()?;
    let chi = mesh.angle_defect_total() / std::f64::consts::TAU;
    let rounded = chi.round();
    if (chi - rounded).abs() > 1e-9 {
        return Err(GeometryError::NonIntegerEulerCharacteristic {
            total: mesh.angle_defect_total(),
        });
    }
    Ok(rounded as i64)
}

/// Support function `h(u) = max_{p ∈ D} p·u` in the body frame.
///
/// The direction is normalized internally; a near-zero direction is an
/// error. Sphere: `R`. Spheroid: `√(a²(uₓ²+u_y²) + c²u_z²)`. Mesh: maximum
/// vertex projection.
pub fn support_function(body: &ConvexBody, direction: &Vector3<f64>) -> Result<f64, GeometryError> {
    let norm = direction.norm();
    if norm < 1e-14 {
        return Err(GeometryError::ZeroDirection { norm });
    }
    let u = direction / norm;
    Ok(match body {
        ConvexBody::Sphere { radius } => *radius,
        ConvexBody::Spheroid { a, c } => {
            (a * a * (u.x * u.x + u.y * u.y) + c * c * u.z * u.z).sqrt()
        }
        ConvexBody::Mesh(mesh) => mesh
            .vertices
            .iter()
            .map(|v| v.dot(&u))
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Surface point achieving the support maximum in direction `u`; the
/// gradient of the support function. Scale-invariant in `u` (any nonzero
/// direction). Used by the separating-direction intersection test.
pub(crate) fn support_point(body: &ConvexBody, u: &Vector3<f64>) -> Vector3<f64> {
    match body {
        ConvexBody::Sphere { radius } => u.normalize() * *radius,
        ConvexBody::Spheroid { a, c } => {
            let h = (a * a * (u.x * u.x + u.y * u.y) + c * c * u.z * u.z).sqrt();
            Vector3::new(a * a * u.x, a * a * u.y, c * c * u.z) / h
        }
        ConvexBody::Mesh(mesh) => {
            let mut best = mesh.vertices[0];
            let mut best_dot = f64::NEG_INFINITY;
            for v in &mesh.vertices {
                let d = v.dot(u);
                if d > best_dot {
                    best_dot = d;
                    best = *v;
                }
            }
            best
        }
    }
}

/// Whether `point` lies inside (or on) the body in body coordinates.
///
/// Meshes use the outward face-plane test, valid because convexity is
/// validated at construction.
pub(crate) fn contains_point(body: &ConvexBody, point: &Vector3<f64>) -> bool {
    match body {
        ConvexBody::Sphere { radius } => point.norm_squared() <= radius * radius,
        ConvexBody::Spheroid { a, c } => {
            (point.x * point.x + point.y * point.y) / (a * a) + point.z * point.z / (c * c) <= 1.0
        }
        ConvexBody::Mesh(mesh) => mesh.triangles.iter().all(|tri| {
            let a = mesh.vertices[tri[0]];
            let normal = (mesh.vertices[tri[1]] - a).cross(&(mesh.vertices[tri[2]] - a));
            (point - a).dot(&normal) <= 0.0
        }),
    }
}
