//! Cross-module integration checks through the public API: analytic bodies,
//! triangulated surrogates, file round-trips, kinematic averages, bulk
//! thermodynamics, and the planar solver all telling one consistent story.

use fmt_core::fmt_model::{bulk_eos, virial_series_bulk, FreeEnergyModel};
use fmt_core::geometry::{
    io::{read_mesh, write_off},
    minkowski_measures, ConvexBody, TriMesh,
};
use fmt_core::kinematic::excluded_volume_analytic;
use fmt_core::planar_dft::{
    mu_ex_field, planar_kernels, weighted_density_fields, DensityProfile, Grid1D,
};
use nalgebra::Vector3;

const PI: f64 = std::f64::consts::PI;

#[test]
fn triangulated_spheroid_approaches_the_closed_form_measures() {
    // Stretch a fine sphere triangulation into the spheroid a = 1, c = 2 and
    // push it through the discrete pipeline.
    let body = ConvexBody::spheroid(1.0, 2.0).unwrap();
    let exact = minkowski_measures(&body);
    let mut mesh = TriMesh::icosphere(1.0, 5);
    for v in &mut mesh.vertices {
        v.z *= 2.0;
    }
    let discrete = mesh.measures();
    assert!(((discrete.volume - exact.volume) / exact.volume).abs() < 5e-3);
    assert!(((discrete.surface - exact.surface) / exact.surface).abs() < 5e-3);
    assert!(
        ((discrete.mean_curvature_integral - exact.mean_curvature_integral)
            / exact.mean_curvature_integral)
            .abs()
            < 5e-3
    );
    assert!((discrete.euler_surface - 2.0).abs() < 1e-10);
}

#[test]
fn off_round_trip_preserves_the_mesh_exactly() {
    let mesh = TriMesh::icosphere(1.3, 3).translated(Vector3::new(0.5, -0.25, 2.0));
    let dir = std::env::temp_dir().join(format!("fmt_core_pipeline_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("body.off");
    write_off(&mesh, &path).unwrap();
    let back = read_mesh(&path).unwrap();
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(mesh.triangles, back.triangles);
    for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
        // Vertices are written with shortest round-trip formatting.
        assert_eq!(a, b);
    }
    let m1 = mesh.measures();
    let m2 = back.measures();
    assert_eq!(m1.volume.to_bits(), m2.volume.to_bits());
    assert_eq!(m1.surface.to_bits(), m2.surface.to_bits());
}

#[test]
fn motion_averaged_pair_volume_matches_the_bulk_series() {
    // The motion average behind the pair coefficient and the bulk series
    // derived from the free-energy tables must agree analytically for any
    // convex body: B2 = V + MS/4π both ways.
    for body in [
        ConvexBody::sphere(0.8).unwrap(),
        ConvexBody::spheroid(1.0, 2.0).unwrap(),
        ConvexBody::spheroid(1.5, 0.6).unwrap(),
    ] {
        let volume = minkowski_measures(&body).volume;
        let kinematic_b2 = excluded_volume_analytic(&body, &body) / (2.0 * volume);
        for model in [
            FreeEnergyModel::RosenfeldOriginal,
            FreeEnergyModel::TarazonaTensor,
        ] {
            let series = virial_series_bulk(&body, &model).unwrap();
            assert!(
                (series.b2_over_v - kinematic_b2).abs() < 1e-10 * kinematic_b2,
                "B2/v mismatch: series {} vs kinematic {}",
                series.b2_over_v,
                kinematic_b2
            );
        }
    }
}

#[test]
fn uniform_planar_state_reproduces_bulk_thermodynamics() {
    let radius = 1.0;
    let body = ConvexBody::sphere(radius).unwrap();
    let eta = 0.25;
    let rho = eta / (4.0 * PI / 3.0);
    let grid = Grid1D::new(512, 0.02, 0.0).unwrap();
    let kernels = planar_kernels(radius, &grid).unwrap();
    let profile = DensityProfile::uniform(grid, rho).unwrap();
    let model = FreeEnergyModel::TarazonaTensor;
    let fields = weighted_density_fields(&profile, &kernels).unwrap();
    let mu = mu_ex_field(&fields, &model, &kernels).unwrap();
    let bulk = bulk_eos(&body, eta, &model).unwrap();
    let mid = mu[256];
    assert!(
        (mid - bulk.beta_mu_excess).abs() < 1e-10 * bulk.beta_mu_excess,
        "uniform-profile chemical potential {mid} vs bulk {}",
        bulk.beta_mu_excess
    );
}
