//! Convex overlap test through support functions.
//!
//! Two convex bodies intersect iff the origin lies in their Minkowski
//! difference `A ⊖ B = {a − b}`, itself convex with support map
//! `s(u) = s_A(u) − s_B(−u)`. The test runs the distance-flavoured
//! Gilbert–Johnson–Keerthi iteration: maintain a simplex of support points,
//! take `v` = point of the simplex hull closest to the origin, probe the
//! support in direction `−v`, and stop on one of two certificates:
//!
//! ```text
//! v·s(−v) > 0            →  a separating plane exists (disjoint),
//! origin ∈ simplex hull  →  overlap,
//! ```
//!
//! with `|v|` below a relative tolerance counted as touching (overlap).
//! Sphere pairs short-circuit to the exact centre-distance test.

use super::{KinematicError, Pose};
use crate::geometry::{support_point, ConvexBody};
use nalgebra::Vector3;

const MAX_ITERATIONS: usize = 1000;
/// Relative tolerance under which the origin counts as on the boundary.
const TOUCH_TOLERANCE: f64 = 1e-12;

/// Support point of a posed body in world coordinates.
fn posed_support(body: &ConvexBody, pose: &Pose, direction: &Vector3<f64>) -> Vector3<f64> {
    let local = pose.rotation.inverse() * direction;
    pose.rotation * support_point(body, &local) + pose.translation
}

/// Whether the posed bodies overlap (touching counts as overlap).
///
/// # Errors
///
/// `NoConvergence` if the support iteration exhausts its budget without
/// either certificate — not expected for well-conditioned smooth bodies or
/// validated meshes.
pub fn intersects(
    body_a: &ConvexBody,
    pose_a: &Pose,
    body_b: &ConvexBody,
    pose_b: &Pose,
) -> Result<bool, KinematicError> {
    if let (ConvexBody::Sphere { radius: ra }, ConvexBody::Sphere { radius: rb }) = (body_a, body_b)
    {
        let gap = (pose_a.translation - pose_b.translation).norm_squared();
        let reach = ra + rb;
        return Ok(gap <= reach * reach);
    }

    let scale = body_a.circumradius()
        + body_b.circumradius()
        + (pose_a.translation - pose_b.translation).norm();
    let touch2 = (TOUCH_TOLERANCE * scale) * (TOUCH_TOLERANCE * scale);
    let support = |dir: &Vector3<f64>| {
        posed_support(body_a, pose_a, dir) - posed_support(body_b, pose_b, &-dir)
    };

    let mut first_dir = pose_a.translation - pose_b.translation;
    if first_dir.norm_squared() < 1e-30 {
        first_dir = Vector3::x();
    }
    let mut simplex: Vec<Vector3<f64>> = vec![support(&first_dir)];

    for _ in 0..MAX_ITERATIONS {
        let v = match closest_on_simplex(&mut simplex) {
            None => return Ok(true), // origin enclosed by a tetrahedron
            Some(v) => v,
        };
        if v.norm_squared() <= touch2 {
            return Ok(true); // origin on the hull boundary: touching
        }
        let a = support(&-v);
        if v.dot(&a) > 0.0 {
            // Every point x of the difference has x·v ≥ a·v > 0: the plane
            // {x·v = a·v} separates the origin.
            return Ok(false);
        }
        if simplex
            .iter()
            .any(|s| (s - a).norm_squared() <= touch2 * 1e-4)
        {
            // Support repeats without either certificate: stalled.
            break;
        }
        simplex.push(a);
    }
    Err(KinematicError::NoConvergence {
        iterations: MAX_ITERATIONS,
    })
}

/// Closest point of the simplex hull to the origin; reduces the simplex to
/// the supporting face. `None` means a tetrahedron encloses the origin.
fn closest_on_simplex(simplex: &mut Vec<Vector3<f64>>) -> Option<Vector3<f64>> {
    match simplex.len() {
        1 => Some(simplex[0]),
        2 => {
            let (v, keep) = closest_on_segment(simplex[0], simplex[1]);
            *simplex = keep;
            Some(v)
        }
        3 => {
            let (v, keep) = closest_on_triangle(simplex[0], simplex[1], simplex[2]);
            *simplex = keep;
            Some(v)
        }
        _ => {
            let (a, b, c, d) = (simplex[0], simplex[1], simplex[2], simplex[3]);
            let scale3 = simplex
                .iter()
                .map(|p| p.norm())
                .fold(0.0f64, f64::max)
                .powi(3);
            let faces = [[a, b, c, d], [a, c, d, b], [a, b, d, c], [b, c, d, a]];
            let mut inside = true;
            for [p, q, r, opposite] in faces {
                let n = (q - p).cross(&(r - p));
                let vol_side = n.dot(&(opposite - p));
                let origin_side = -n.dot(&p);
                // Origin inside requires it on the same side as the opposite
                // vertex for every face of a non-degenerate tetrahedron.
                if vol_side.abs() <= 1e-14 * scale3 || vol_side * origin_side < 0.0 {
                    inside = false;
                    break;
                }
            }
            if inside {
                return None;
            }
            let mut best: Option<(f64, Vector3<f64>, Vec<Vector3<f64>>)> = None;
            for [p, q, r, _] in faces {
                let (v, keep) = closest_on_triangle(p, q, r);
                let d2 = v.norm_squared();
                if best.as_ref().is_none_or(|(bd, _, _)| d2 < *bd) {
                    best = Some((d2, v, keep));
                }
            }
            let (_, v, keep) = best.expect("four candidate faces evaluated");
            *simplex = keep;
            Some(v)
        }
    }
}

fn closest_on_segment(a: Vector3<f64>, b: Vector3<f64>) -> (Vector3<f64>, Vec<Vector3<f64>>) {
    let ab = b - a;
    let denom = ab.norm_squared();
    if denom == 0.0 {
        return (a, vec![a]);
    }
    let t = -a.dot(&ab) / denom;
    if t <= 0.0 {
        (a, vec![a])
    } else if t >= 1.0 {
        (b, vec![b])
    } else {
        (a + ab * t, vec![a, b])
    }
}

/// Closest point of triangle `abc` to the origin with Voronoi-region
/// classification; the returned set is the supporting vertex/edge/face.
fn closest_on_triangle(
    a: Vector3<f64>,
    b: Vector3<f64>,
    c: Vector3<f64>,
) -> (Vector3<f64>, Vec<Vector3<f64>>) {
    let ab = b - a;
    let ac = c - a;
    let ap = -a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, vec![a]);
    }
    let bp = -b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, vec![b]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return (a + ab * t, vec![a, b]);
    }
    let cp = -c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, vec![c]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return (a + ac * t, vec![a, c]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * t, vec![b, c]);
    }
    let denom = va + vb + vc;
    let v = vb / denom;
    let w = vc / denom;
    (a + ab * v + ac * w, vec![a, b, c])
}
