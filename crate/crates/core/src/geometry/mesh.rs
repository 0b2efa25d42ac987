//! Closed triangle meshes: validation, discrete curvature, and measures.
//!
//! A mesh is a vertex list plus CCW-from-outside triangles. Validation
//! enforces the closed-manifold contract (every directed edge appears exactly
//! once, together with its reverse), outward orientation (positive signed
//! volume), and — for bodies used in physics runs — convexity within a
//! floating-point plane tolerance.
//!
//! Discrete curvature follows the standard estimators:
//!
//! ```text
//! Gaussian:  K_v = (2π − Σ incident angles) / A_v        (angle defect)
//! mean:      κ̄_v = ±|Σ_j (cot α_ij + cot β_ij)(p_j − p_v)| / (4 A_v)
//! ```
//!
//! with `A_v` the mixed Voronoi area (obtuse-safe), and the mean-curvature
//! sign taken positive when the Laplacian points against the outward normal
//! (convex). Both estimators are first-order accurate per vertex; the angle
//! defect sum is exactly `2πχ` at any resolution, so topology is exact even
//! where curvature is approximate.

use super::{GeometryError, MinkowskiMeasures, SurfacePatch};
use nalgebra::Vector3;
use std::collections::HashMap;

/// Triangle mesh with shared vertices.
#[derive(Debug, Clone)]
pub struct TriMesh {
    /// Vertex positions.
    pub vertices: Vec<Vector3<f64>>,
    /// Vertex index triples, counter-clockwise seen from outside.
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Build a mesh without validating; call `validate_closed_oriented` /
    /// `validate_convex` or construct a `ConvexBody` to validate.
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>) -> Self {
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Checks index sanity, closedness, and consistent outward orientation.
    ///
    /// Every directed edge must appear exactly once and its reverse exactly
    /// once (shared edge traversed in opposite directions by its two
    /// faces), and the signed volume must be positive.
    pub fn validate_closed_oriented(&self) -> Result<(), GeometryError> {
        let n = self.vertices.len();
        let mut referenced = vec![false; n];
        for (f, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(GeometryError::FaceIndexOutOfRange {
                        face: f,
                        vertex: v,
                        n_vertices: n,
                    });
                }
                referenced[v] = true;
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                let repeated = if tri[0] == tri[1] || tri[0] == tri[2] {
                    tri[0]
                } else {
                    tri[1]
                };
                return Err(GeometryError::DegenerateFace {
                    face: f,
                    vertex: repeated,
                });
            }
        }
        if let Some(v) = referenced.iter().position(|r| !r) {
            return Err(GeometryError::UnreferencedVertex { vertex: v });
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        for (&(v0, v1), &count) in &directed {
            if count > 1 {
                return Err(GeometryError::InconsistentOrientation { v0, v1 });
            }
            match directed.get(&(v1, v0)) {
                Some(1) => {}
                Some(_) => return Err(GeometryError::InconsistentOrientation { v0: v1, v1: v0 }),
                None => return Err(GeometryError::NotClosed { v0, v1, count }),
            }
        }

        let volume = self.signed_volume();
        if volume <= 0.0 {
            return Err(GeometryError::InwardOrientation { volume });
        }
        Ok(())
    }

    /// Convexity within `ε = 1e−8 × bounding-box diagonal`: every vertex must
    /// lie on or below the plane of every face.
    pub fn validate_convex(&self) -> Result<(), GeometryError> {
        let tolerance = 1e-8 * self.bounding_box_diagonal();
        for (f, tri) in self.triangles.iter().enumerate() {
            let p0 = self.vertices[tri[0]];
            let n = (self.vertices[tri[1]] - p0).cross(&(self.vertices[tri[2]] - p0));
            let norm = n.norm();
            if norm == 0.0 {
                return Err(GeometryError::DegenerateFace {
                    face: f,
                    vertex: tri[0],
                });
            }
            let n = n / norm;
            for (v, p) in self.vertices.iter().enumerate() {
                let excess = n.dot(&(p - p0));
                if excess > tolerance {
                    return Err(GeometryError::NotConvex {
                        vertex: v,
                        face: f,
                        excess,
                        tolerance,
                    });
                }
            }
        }
        Ok(())
    }

    /// Diagonal of the axis-aligned bounding box.
    pub fn bounding_box_diagonal(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm()
    }

    /// Signed volume by the divergence theorem: `Σ det(p₀, p₁, p₂)/6` over
    /// faces; positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                );
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Total surface area.
    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let (a, b, c) = (
                    self.vertices[t[0]],
                    self.vertices[t[1]],
                    self.vertices[t[2]],
                );
                (b - a).cross(&(c - a)).norm() * 0.5
            })
            .sum()
    }

    /// Sum of angle defects `Σ_v (2π − Σ incident angles)`; equals `2πχ(∂D)`
    /// exactly for a closed mesh.
    pub fn angle_defect_total(&self) -> f64 {
        self.angle_defects().iter().sum()
    }

    /// Per-vertex angle defects.
    fn angle_defects(&self) -> Vec<f64> {
        let mut defect = vec![std::f64::consts::TAU; self.vertices.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let v = tri[k];
                let a = self.vertices[tri[(k + 1) % 3]] - self.vertices[v];
                let b = self.vertices[tri[(k + 2) % 3]] - self.vertices[v];
                let angle = a.cross(&b).norm().atan2(a.dot(&b));
                defect[v] -= angle;
            }
        }
        defect
    }

    /// Mixed Voronoi vertex areas (obtuse-safe). The areas partition the
    /// surface: they sum to the total area exactly, which keeps both the
    /// area sum rule and the discrete Gauss–Bonnet weight consistent.
    fn mixed_voronoi_areas(&self) -> Vec<f64> {
        let mut area = vec![0.0; self.vertices.len()];
        for tri in &self.triangles {
            let p = [
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            ];
            let full = (p[1] - p[0]).cross(&(p[2] - p[0])).norm() * 0.5;
            // cot of the angle at each corner
            let mut cot = [0.0; 3];
            let mut obtuse = None;
            for k in 0..3 {
                let a = p[(k + 1) % 3] - p[k];
                let b = p[(k + 2) % 3] - p[k];
                let cross = a.cross(&b).norm();
                let dot = a.dot(&b);
                cot[k] = dot / cross.max(f64::MIN_POSITIVE);
                if dot < 0.0 {
                    obtuse = Some(k);
                }
            }
            match obtuse {
                Some(k) => {
                    // Obtuse triangle: half the area to the obtuse corner,
                    // a quarter to each of the others.
                    for j in 0..3 {
                        area[tri[j]] += if j == k { full * 0.5 } else { full * 0.25 };
                    }
                }
                None => {
                    // Non-obtuse: true Voronoi split
                    // A_k = (|e_a|² cot(angle opposite e_a) + |e_b|² cot(...))/8.
                    for k in 0..3 {
                        let e_next = (p[(k + 1) % 3] - p[k]).norm_squared();
                        let e_prev = (p[(k + 2) % 3] - p[k]).norm_squared();
                        area[tri[k]] +=
                            (e_next * cot[(k + 2) % 3] + e_prev * cot[(k + 1) % 3]) / 8.0;
                    }
                }
            }
        }
        area
    }

    /// Area-weighted outward vertex normals.
    fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut normals = vec![Vector3::zeros(); self.vertices.len()];
        for tri in &self.triangles {
            let (a, b, c) = (
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            );
            let n = (b - a).cross(&(c - a)); // area-weighted
            for &v in tri {
                normals[v] += n;
            }
        }
        for n in &mut normals {
            let norm = n.norm();
            if norm > 0.0 {
                *n /= norm;
            }
        }
        normals
    }

    /// Cotangent-Laplacian vector `Σ_j (cot α + cot β)(p_j − p_v)` per vertex.
    fn cotan_laplacians(&self) -> Vec<Vector3<f64>> {
        let mut lap = vec![Vector3::zeros(); self.vertices.len()];
        for tri in &self.triangles {
            let p = [
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            ];
            for k in 0..3 {
                // Angle at corner k is opposite edge (k+1, k+2); its cot
                // weights that edge for both endpoints.
                let a = p[(k + 1) % 3] - p[k];
                let b = p[(k + 2) % 3] - p[k];
                let cot = a.dot(&b) / a.cross(&b).norm().max(f64::MIN_POSITIVE);
                let i = tri[(k + 1) % 3];
                let j = tri[(k + 2) % 3];
                lap[i] += cot * (p[(k + 2) % 3] - p[(k + 1) % 3]);
                lap[j] += cot * (p[(k + 1) % 3] - p[(k + 2) % 3]);
            }
        }
        lap
    }

    /// One surface patch per vertex with discrete curvature estimates.
    ///
    /// `κ̄` comes from the cotangent Laplacian (signed by normal agreement),
    /// `κ_G` from the angle defect over the mixed Voronoi area, and the
    /// principal values from `κ̄ ± √(max(κ̄² − κ_G, 0))`. Principal
    /// *directions* are an arbitrary right-handed tangent frame: per-vertex
    /// direction estimation is not attempted, so curvature-deviator weights
    /// on meshes are indicative only (documented first-order accuracy class);
    /// high-accuracy paths use analytic bodies.
    pub fn vertex_patches(&self) -> Result<Vec<SurfacePatch>, GeometryError> {
        self.validate_closed_oriented()?;
        let areas = self.mixed_voronoi_areas();
        let normals = self.vertex_normals();
        let laplacians = self.cotan_laplacians();
        let defects = self.angle_defects();

        let mut patches = Vec::with_capacity(self.vertices.len());
        for v in 0..self.vertices.len() {
            let area = areas[v];
            let normal = normals[v];
            let h_mag = laplacians[v].norm() / (4.0 * area.max(f64::MIN_POSITIVE));
            // Convex: Laplacian points inward, against the outward normal.
            let kappa_mean = if laplacians[v].dot(&normal) > 0.0 {
                -h_mag
            } else {
                h_mag
            };
            let kappa_gauss = defects[v] / area.max(f64::MIN_POSITIVE);
            let disc = (kappa_mean * kappa_mean - kappa_gauss).max(0.0).sqrt();
            let (dir1, dir2) = tangent_frame(&normal);
            patches.push(SurfacePatch {
                point: self.vertices[v],
                normal,
                kappa1: kappa_mean + disc,
                kappa2: kappa_mean - disc,
                dir1,
                dir2,
                area,
            });
        }
        Ok(patches)
    }

    /// Discrete Minkowski measures: exact `V`, `S`, `χ`, and the cotangent
    /// estimate of `M = Σ κ̄_v A_v`.
    pub fn measures(&self) -> MinkowskiMeasures {
        let areas = self.mixed_voronoi_areas();
        let normals = self.vertex_normals();
        let laplacians = self.cotan_laplacians();
        let mut m = 0.0;
        for v in 0..self.vertices.len() {
            let h_mag = laplacians[v].norm() / (4.0 * areas[v].max(f64::MIN_POSITIVE));
            let sign = if laplacians[v].dot(&normals[v]) > 0.0 {
                -1.0
            } else {
                1.0
            };
            m += sign * h_mag * areas[v];
        }
        MinkowskiMeasures {
            volume: self.signed_volume(),
            surface: self.surface_area(),
            mean_curvature_integral: m,
            euler_surface: self.angle_defect_total() / std::f64::consts::TAU,
        }
    }

    /// Icosphere: icosahedron subdivided `subdivisions` times, vertices
    /// projected onto the sphere of the given radius. Vertex count is
    /// `10·4^subdivisions + 2`.
    pub fn icosphere(radius: f64, subdivisions: u32) -> TriMesh {
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let mut vertices: Vec<Vector3<f64>> = vec![
            Vector3::new(-1.0, phi, 0.0),
            Vector3::new(1.0, phi, 0.0),
            Vector3::new(-1.0, -phi, 0.0),
            Vector3::new(1.0, -phi, 0.0),
            Vector3::new(0.0, -1.0, phi),
            Vector3::new(0.0, 1.0, phi),
            Vector3::new(0.0, -1.0, -phi),
            Vector3::new(0.0, 1.0, -phi),
            Vector3::new(phi, 0.0, -1.0),
            Vector3::new(phi, 0.0, 1.0),
            Vector3::new(-phi, 0.0, -1.0),
            Vector3::new(-phi, 0.0, 1.0),
        ];
        let mut triangles: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(triangles.len() * 4);
            for tri in &triangles {
                let mut mid = [0usize; 3];
                for k in 0..3 {
                    let (i, j) = (tri[k], tri[(k + 1) % 3]);
                    let key = (i.min(j), i.max(j));
                    mid[k] = *midpoint.entry(key).or_insert_with(|| {
                        vertices.push((vertices[i] + vertices[j]) * 0.5);
                        vertices.len() - 1
                    });
                }
                next.push([tri[0], mid[0], mid[2]]);
                next.push([tri[1], mid[1], mid[0]]);
                next.push([tri[2], mid[2], mid[1]]);
                next.push([mid[0], mid[1], mid[2]]);
            }
            triangles = next;
        }
        for v in &mut vertices {
            *v = *v / v.norm() * radius;
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Torus of revolution (major radius, tube radius) on an `n_u × n_v`
    /// quad grid split into triangles; closed and consistently oriented.
    /// A test fixture for Euler-characteristic checks (χ(T²) = 0), not a
    /// convex body.
    pub fn torus(major: f64, minor: f64, n_u: usize, n_v: usize) -> TriMesh {
        let mut vertices = Vec::with_capacity(n_u * n_v);
        for i in 0..n_u {
            let u = std::f64::consts::TAU * i as f64 / n_u as f64;
            for j in 0..n_v {
                let v = std::f64::consts::TAU * j as f64 / n_v as f64;
                let ring = major + minor * v.cos();
                vertices.push(Vector3::new(
                    ring * u.cos(),
                    ring * u.sin(),
                    minor * v.sin(),
                ));
            }
        }
        let idx = |i: usize, j: usize| (i % n_u) * n_v + (j % n_v);
        let mut triangles = Vec::with_capacity(2 * n_u * n_v);
        for i in 0..n_u {
            for j in 0..n_v {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Disjoint union of two meshes (vertex indices of `other` shifted).
    pub fn disjoint_union(&self, other: &TriMesh) -> TriMesh {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(
            other
                .triangles
                .iter()
                .map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]),
        );
        TriMesh {
            vertices,
            triangles,
        }
    }

    /// Copy with every vertex translated by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| v + offset).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Copy with every vertex scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
            triangles: self.triangles.clone(),
        }
    }
}

/// Deterministic right-handed orthonormal tangent frame for a unit normal.
pub(crate) fn tangent_frame(normal: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if normal.x.abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let dir1 = normal.cross(&helper).normalize();
    let dir2 = normal.cross(&dir1);
    // (dir1, dir2, n): dir1 × dir2 = dir1 × (n × dir1) = n.
    (dir1, dir2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::euler_characteristic;
    use std::f64::consts::PI;

    #[test]
    fn icosphere_is_closed_oriented_convex() {
        let mesh = TriMesh::icosphere(1.0, 3);
        assert!(mesh.validate_closed_oriented().is_ok());
        assert!(mesh.validate_convex().is_ok());
        assert_eq!(mesh.vertices.len(), 10 * 4usize.pow(3) + 2);
    }

    #[test]
    fn euler_characteristic_sphere_torus_union() {
        let sphere = TriMesh::icosphere(1.0, 2);
        assert_eq!(euler_characteristic(&sphere).unwrap(), 2);

        let torus = TriMesh::torus(2.0, 0.5, 48, 24);
        assert_eq!(euler_characteristic(&torus).unwrap(), 0);

        let second = TriMesh::icosphere(0.5, 2).translated(Vector3::new(5.0, 0.0, 0.0));
        let union = sphere.disjoint_union(&second);
        assert_eq!(
            euler_characteristic(&union).unwrap(),
            4,
            "χ is additive over disjoint components"
        );
    }

    #[test]
    fn angle_defect_sum_is_combinatorially_exact() {
        for mesh in [TriMesh::icosphere(1.0, 1), TriMesh::icosphere(2.5, 4)] {
            let total = mesh.angle_defect_total();
            assert!(
                (total - 4.0 * PI).abs() < 1e-9,
                "defect sum should equal 4π exactly (got deviation {})",
                (total - 4.0 * PI).abs()
            );
        }
        let torus = TriMesh::torus(3.0, 1.0, 64, 32);
        assert!(
            torus.angle_defect_total().abs() < 1e-9,
            "torus defect sum should vanish, got {}",
            torus.angle_defect_total()
        );
    }

    #[test]
    fn icosphere_measures_converge_to_sphere_values() {
        let mesh = TriMesh::icosphere(1.0, 5); // 10242 vertices
        let m = mesh.measures();
        let (v_exact, s_exact, m_exact) = (4.0 * PI / 3.0, 4.0 * PI, 4.0 * PI);
        assert!(
            ((m.volume - v_exact) / v_exact).abs() < 5e-3,
            "icosphere volume {} vs {}",
            m.volume,
            v_exact
        );
        assert!(
            ((m.surface - s_exact) / s_exact).abs() < 5e-3,
            "icosphere area {} vs {}",
            m.surface,
            s_exact
        );
        assert!(
            ((m.mean_curvature_integral - m_exact) / m_exact).abs() < 5e-3,
            "icosphere M {} vs {}",
            m.mean_curvature_integral,
            m_exact
        );
        assert!((m.euler_surface - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_voronoi_areas_partition_the_surface() {
        let mesh = TriMesh::icosphere(1.3, 3);
        let total: f64 = mesh.mixed_voronoi_areas().iter().sum();
        let area = mesh.surface_area();
        assert!(
            ((total - area) / area).abs() < 1e-12,
            "vertex areas must sum to the exact surface area: {total} vs {area}"
        );
    }

    #[test]
    fn vertex_patches_estimate_unit_curvatures() {
        let mesh = TriMesh::icosphere(1.0, 4);
        let patches = mesh.vertex_patches().unwrap();
        for p in &patches {
            assert!(
                (p.kappa_mean() - 1.0).abs() < 0.05,
                "discrete mean curvature {} should approximate 1",
                p.kappa_mean()
            );
            assert!(
                (p.kappa_gauss() - 1.0).abs() < 0.05,
                "discrete Gaussian curvature {} should approximate 1",
                p.kappa_gauss()
            );
            let cross = p.dir1.cross(&p.dir2);
            assert!(
                (cross - p.normal).norm() < 1e-10,
                "frame must be right-handed"
            );
        }
    }

    #[test]
    fn open_mesh_is_rejected_naming_the_edge() {
        let mut mesh = TriMesh::icosphere(1.0, 0);
        mesh.triangles.pop();
        let err = mesh.validate_closed_oriented().unwrap_err();
        assert!(
            matches!(
                err,
                GeometryError::NotClosed { .. } | GeometryError::UnreferencedVertex { .. }
            ),
            "expected a closure error, got {err:?}"
        );
    }

    #[test]
    fn flipped_face_is_rejected_as_inconsistent() {
        let mut mesh = TriMesh::icosphere(1.0, 0);
        let t = mesh.triangles[0];
        mesh.triangles[0] = [t[0], t[2], t[1]];
        let err = mesh.validate_closed_oriented().unwrap_err();
        assert!(
            matches!(err, GeometryError::InconsistentOrientation { .. }),
            "expected an orientation error, got {err:?}"
        );
    }

    #[test]
    fn inward_oriented_mesh_is_rejected() {
        let mut mesh = TriMesh::icosphere(1.0, 1);
        for t in &mut mesh.triangles {
            t.swap(1, 2);
        }
        let err = mesh.validate_closed_oriented().unwrap_err();
        assert!(matches!(err, GeometryError::InwardOrientation { .. }));
    }

    #[test]
    fn dented_mesh_is_rejected_as_nonconvex() {
        let mut mesh = TriMesh::icosphere(1.0, 2);
        mesh.vertices[7] *= 0.8; // push one vertex inside
        assert!(mesh.validate_closed_oriented().is_ok());
        let err = mesh.validate_convex().unwrap_err();
        match err {
            GeometryError::NotConvex {
                excess, tolerance, ..
            } => {
                assert!(excess > tolerance, "violation should exceed the tolerance");
            }
            other => panic!("expected NotConvex, got {other:?}"),
        }
    }

    #[test]
    fn torus_is_not_convex() {
        let torus = TriMesh::torus(2.0, 0.5, 24, 12);
        assert!(torus.validate_closed_oriented().is_ok());
        assert!(torus.validate_convex().is_err());
    }
}
