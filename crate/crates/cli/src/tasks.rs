//! Task implementations. Every task is a pure function from the validated
//! configuration to a list of named artifacts; file contents depend only on
//! the config (never on wall clock, thread count, or environment), which is
//! what makes reruns byte-identical.

use crate::config::{ModelKind, RunConfig, TaskKind};
use crate::CliError;
use fmt_core::fmt_model::{
    bulk_eos, phi_excess, spt_residual, virial_series_bulk, FreeEnergyModel, WeightedDensities,
};
use fmt_core::geometry::{minkowski_measures, ConvexBody, SurfacePatch};
use fmt_core::kinematic::{
    excluded_volume_analytic, excluded_volume_mc, third_virial_mc, third_virial_stack_mc,
    KinematicError, StackThirdOrder,
};
use fmt_core::planar_dft::{
    contact_density, mu_ex_field, picard_solve, planar_kernels, weighted_density_fields, Grid1D,
    PicardParams, PlanarDftError,
};
use fmt_core::weights::{
    curvature_deviator, three_body_euler_form, three_body_weight_expansion,
    two_body_euler_angle_form, two_body_euler_tensor_form, two_body_weight_expansion,
};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

/// Artifacts plus an optional recorded check failure (artifacts are still
/// written so the failure can be inspected).
pub struct TaskOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub failure: Option<String>,
}

impl TaskOutput {
    fn ok(files: Vec<(String, Vec<u8>)>) -> Self {
        TaskOutput {
            files,
            failure: None,
        }
    }
}

pub fn execute(
    task: TaskKind,
    config: &RunConfig,
    base_dir: &Path,
) -> Result<TaskOutput, CliError> {
    match task {
        TaskKind::Measures => measures(config, base_dir),
        TaskKind::WeightsCheck => weights_check(config),
        TaskKind::ExcludedVolume => excluded_volume(config, base_dir),
        TaskKind::Virial => virial(config, base_dir),
        TaskKind::Eos => eos(config, base_dir),
        TaskKind::Profile => profile(config, base_dir),
        TaskKind::IdentitySuite => identity_suite(config),
    }
}

fn kinematic_error(e: KinematicError) -> CliError {
    match e {
        KinematicError::NoConvergence { .. } => CliError::Numeric(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn planar_error(e: PlanarDftError) -> CliError {
    match e {
        PlanarDftError::PackingAtNode { .. } | PlanarDftError::NoConvergence { .. } => {
            CliError::Numeric(e.to_string())
        }
        other => CliError::Validation(other.to_string()),
    }
}

/// CSV document with `\n` line endings; floats are rendered by `Display`
/// (shortest round-trip form), so identical numbers give identical bytes.
fn csv_document(header: &str, rows: &[Vec<String>]) -> Vec<u8> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let _ = writeln!(text, "{}", row.join(","));
    }
    text.into_bytes()
}

fn json_document<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Io(format!("JSON serialization: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn body_label(body: &ConvexBody) -> String {
    match body {
        ConvexBody::Sphere { radius } => format!("sphere(r={radius})"),
        // No comma: the label lands in an unquoted CSV field.
        ConvexBody::Spheroid { a, c } => format!("spheroid(a={a} c={c})"),
        ConvexBody::Mesh(_) => "mesh".to_string(),
    }
}

// ---------------------------------------------------------------- measures

fn measures(config: &RunConfig, base_dir: &Path) -> Result<TaskOutput, CliError> {
    let bodies = config.build_bodies(base_dir)?;
    let rows: Vec<Vec<String>> = bodies
        .iter()
        .enumerate()
        .map(|(i, body)| {
            let m = minkowski_measures(body);
            vec![
                i.to_string(),
                body_label(body),
                m.volume.to_string(),
                m.surface.to_string(),
                m.mean_curvature_integral.to_string(),
                m.euler_surface.to_string(),
            ]
        })
        .collect();
    let csv = csv_document(
        "body,kind,volume,surface,mean_curvature_integral,euler_surface",
        &rows,
    );
    Ok(TaskOutput::ok(vec![("measures.csv".to_string(), csv)]))
}

// ----------------------------------------------------------- weights-check

/// A synthetic surface patch with a random orthonormal frame and random
/// positive principal curvatures.
fn random_patch<R: Rng>(rng: &mut R) -> SurfacePatch {
    let normal = random_unit(rng);
    let seed_dir = random_unit(rng);
    let d1 = (seed_dir - normal * normal.dot(&seed_dir)).normalize();
    let d2 = normal.cross(&d1);
    SurfacePatch {
        point: Vector3::zeros(),
        normal,
        kappa1: rng.gen_range(0.1..3.0),
        kappa2: rng.gen_range(0.1..3.0),
        dir1: d1,
        dir2: d2,
        area: 1.0,
    }
}

fn random_unit<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
            rng.gen::<f64>() * 2.0 - 1.0,
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

#[derive(Serialize)]
struct WeightsCheckSummary {
    n_samples: u64,
    seed: u64,
    two_body_max_rel_deviation: f64,
    three_body_max_rel_deviation: f64,
    cyclic_permutation_exact: bool,
    expansion_bound_violations: u64,
}

fn weights_check(config: &RunConfig) -> Result<TaskOutput, CliError> {
    let mc = config.mc.expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let l_levels: Vec<usize> = (0..=8).collect();
    let mut max_remainder = vec![0.0f64; l_levels.len()];
    let mut max_bound = vec![0.0f64; l_levels.len()];
    let mut two_body_dev = 0.0f64;
    let mut three_body_dev = 0.0f64;
    let mut cyclic_exact = true;
    let mut bound_violations = 0u64;

    for _ in 0..mc.n_samples {
        let p1 = random_patch(&mut rng);
        let p2 = random_patch(&mut rng);
        let c = p1.normal.dot(&p2.normal);
        let s = p1.normal.cross(&p2.normal).norm();
        if s <= 1e-6 || 1.0 + c <= 1e-6 {
            // Within 1e-6 of the parallel/antipodal singular sets one of
            // the two forms is undefined or catastrophically cancelled.
            continue;
        }
        let tensor =
            two_body_euler_tensor_form(&p1, &p2).map_err(|e| CliError::Numeric(e.to_string()))?;
        let angle =
            two_body_euler_angle_form(&p1, &p2).map_err(|e| CliError::Numeric(e.to_string()))?;
        let scaled = s * angle;
        two_body_dev = two_body_dev.max((scaled - tensor).abs() / tensor.abs().max(1.0));
        // Deviator-series remainders against the analytic geometric bound.
        // The series limit is evaluated in closed form over the same
        // directly-contracted deviator sum the truncations use, so the
        // remainder isolates pure truncation error; the independently
        // routed tensor form is what the identity check above compares.
        let n1 = p1.normal;
        let n2 = p2.normal;
        let deviator_sum =
            n2.dot(&(curvature_deviator(&p1) * n2)) + n1.dot(&(curvature_deviator(&p2) * n1));
        let limit = (1.0 - c) * (p1.kappa_mean() + p2.kappa_mean()) - deviator_sum / (1.0 + c);
        for (k, &l) in l_levels.iter().enumerate() {
            let truncated = two_body_weight_expansion(&p1, &p2, l);
            let remainder = (truncated - limit).abs();
            let bound = c.abs().powi(l as i32 + 1) * deviator_sum.abs() / (1.0 - c.abs()).max(1e-9);
            max_remainder[k] = max_remainder[k].max(remainder);
            max_bound[k] = max_bound[k].max(bound);
            if remainder > bound * (1.0 + 1e-9) + 1e-13 {
                bound_violations += 1;
            }
        }
        // Three-body identity and exact permutation invariance.
        let n1 = random_unit(&mut rng);
        let n2 = random_unit(&mut rng);
        let n3 = random_unit(&mut rng);
        let product = three_body_euler_form(&n1, &n2, &n3);
        let expansion = three_body_weight_expansion(&n1, &n2, &n3);
        three_body_dev = three_body_dev.max((product - expansion).abs() / product.abs().max(1.0));
        let rotated = three_body_euler_form(&n2, &n3, &n1);
        let swapped = three_body_weight_expansion(&n3, &n1, &n2);
        if product.to_bits() != rotated.to_bits() || expansion.to_bits() != swapped.to_bits() {
            cyclic_exact = false;
        }
    }

    let rows: Vec<Vec<String>> = l_levels
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            vec![
                l.to_string(),
                max_remainder[k].to_string(),
                max_bound[k].to_string(),
            ]
        })
        .collect();
    let csv = csv_document("l_max,max_abs_remainder,max_analytic_bound", &rows);
    let summary = WeightsCheckSummary {
        n_samples: mc.n_samples,
        seed: mc.seed,
        two_body_max_rel_deviation: two_body_dev,
        three_body_max_rel_deviation: three_body_dev,
        cyclic_permutation_exact: cyclic_exact,
        expansion_bound_violations: bound_violations,
    };
    let json = json_document(&summary)?;
    let failure = if two_body_dev <= 1e-12
        && three_body_dev <= 1e-12
        && cyclic_exact
        && bound_violations == 0
    {
        None
    } else {
        Some(format!(
            "identity deviation out of tolerance: two-body {two_body_dev:.3e}, three-body \
             {three_body_dev:.3e}, cyclic_exact {cyclic_exact}, bound violations \
             {bound_violations}"
        ))
    };
    Ok(TaskOutput {
        files: vec![
            ("weights_check.csv".to_string(), csv),
            ("weights_check.json".to_string(), json),
        ],
        failure,
    })
}

// --------------------------------------------------------- excluded-volume

fn excluded_volume(config: &RunConfig, base_dir: &Path) -> Result<TaskOutput, CliError> {
    let bodies = config.build_bodies(base_dir)?;
    let mc = config.mc.expect("validated");
    let mut rows = Vec::new();
    for i in 0..bodies.len() {
        for j in i..bodies.len() {
            let analytic = excluded_volume_analytic(&bodies[i], &bodies[j]);
            let estimate = excluded_volume_mc(&bodies[i], &bodies[j], mc.n_samples, mc.seed)
                .map_err(kinematic_error)?;
            rows.push(vec![
                i.to_string(),
                j.to_string(),
                analytic.to_string(),
                estimate.mean.to_string(),
                estimate.stderr.to_string(),
                estimate.n_samples.to_string(),
                estimate.seed.to_string(),
            ]);
        }
    }
    let csv = csv_document(
        "body_a,body_b,analytic,mc_mean,mc_stderr,n_samples,seed",
        &rows,
    );
    Ok(TaskOutput::ok(vec![(
        "excluded_volume.csv".to_string(),
        csv,
    )]))
}

// ------------------------------------------------------------------ virial

fn virial(config: &RunConfig, base_dir: &Path) -> Result<TaskOutput, CliError> {
    let bodies = config.build_bodies(base_dir)?;
    let mc = config.mc.expect("validated");
    let model_kind = config.model.as_ref().expect("validated").kind;
    let model = model_kind.to_model();
    let stack_order = match model_kind {
        ModelKind::Rosenfeld => StackThirdOrder::Rosenfeld,
        ModelKind::Tarazona => StackThirdOrder::Tarazona,
    };
    let mut rows = Vec::new();
    for (i, body) in bodies.iter().enumerate() {
        let v = minkowski_measures(body).volume;
        let b2_analytic = excluded_volume_analytic(body, body) / 2.0;
        let b2_mc =
            excluded_volume_mc(body, body, mc.n_samples, mc.seed).map_err(kinematic_error)?;
        let b3_mc = third_virial_mc(body, mc.n_samples, mc.seed).map_err(kinematic_error)?;
        let series =
            virial_series_bulk(body, &model).map_err(|e| CliError::Validation(e.to_string()))?;
        let b3_stack = third_virial_stack_mc(body, mc.n_samples, mc.seed, stack_order)
            .map_err(kinematic_error)?;
        rows.push(vec![
            i.to_string(),
            body_label(body),
            (b2_analytic / v).to_string(),
            (b2_mc.mean / 2.0 / v).to_string(),
            (b2_mc.stderr / 2.0 / v).to_string(),
            (b3_mc.mean / (v * v)).to_string(),
            (b3_mc.stderr / (v * v)).to_string(),
            series.b2_over_v.to_string(),
            series.b3_over_v2.to_string(),
            (b3_stack.mean / (v * v)).to_string(),
            (b3_stack.stderr / (v * v)).to_string(),
        ]);
    }
    let csv = csv_document(
        "body,kind,b2_over_v_analytic,b2_over_v_mc,b2_over_v_mc_stderr,b3_over_v2_mc,\
         b3_over_v2_mc_stderr,b2_over_v_series,b3_over_v2_series,b3_over_v2_stack,\
         b3_over_v2_stack_stderr",
        &rows,
    );
    Ok(TaskOutput::ok(vec![("virial.csv".to_string(), csv)]))
}

// --------------------------------------------------------------------- eos

fn eos(config: &RunConfig, base_dir: &Path) -> Result<TaskOutput, CliError> {
    let bodies = config.build_bodies(base_dir)?;
    let model = config.model.as_ref().expect("validated").kind.to_model();
    let etas = &config.eos.as_ref().expect("validated").eta_values;
    // Independent state points evaluate in parallel; ordered collect keeps
    // the output deterministic.
    let rows: Vec<Vec<String>> = etas
        .par_iter()
        .map(|&eta| {
            let state = bulk_eos(&bodies[0], eta, &model)
                .map_err(|e| CliError::Validation(format!("eta {eta}: {e}")))?;
            Ok(vec![
                eta.to_string(),
                state.z.to_string(),
                state.beta_pressure.to_string(),
                state.beta_mu_excess.to_string(),
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let csv = csv_document("eta,z,beta_pressure,beta_mu_excess", &rows);
    Ok(TaskOutput::ok(vec![("eos.csv".to_string(), csv)]))
}

// ----------------------------------------------------------------- profile

#[derive(Serialize)]
struct ProfileMeta {
    model: String,
    eta: f64,
    radius: f64,
    grid: ProfileGridMeta,
    wall: &'static str,
    contact_density: f64,
    beta_pressure_bulk: f64,
    beta_mu_excess_bulk: f64,
    iterations: usize,
    final_residual: f64,
}

#[derive(Serialize)]
struct ProfileGridMeta {
    n_points: usize,
    dz: f64,
    origin: f64,
}

fn profile(config: &RunConfig, base_dir: &Path) -> Result<TaskOutput, CliError> {
    let bodies = config.build_bodies(base_dir)?;
    let radius = match &bodies[0] {
        ConvexBody::Sphere { radius } => *radius,
        other => {
            return Err(CliError::Validation(format!(
                "profile task requires bodies[0] to be a sphere, got {}",
                body_label(other)
            )))
        }
    };
    let model_kind = config.model.as_ref().expect("validated").kind;
    let model = model_kind.to_model();
    let grid_cfg = config.grid.expect("validated");
    let eta = config.state.expect("validated").eta;
    if !(0.0..1.0).contains(&eta) {
        return Err(CliError::Validation(format!(
            "state.eta = {eta} must lie in [0, 1)"
        )));
    }
    let grid =
        Grid1D::new(grid_cfg.n_points, grid_cfg.dz, grid_cfg.origin).map_err(planar_error)?;
    let mut params = PicardParams::new(grid, radius);
    if let Some(solver) = config.solver {
        if let Some(mixing) = solver.mixing {
            params.mixing = mixing;
        }
        if let Some(tolerance) = solver.tolerance {
            params.tolerance = tolerance;
        }
        if let Some(max_iterations) = solver.max_iterations {
            params.max_iterations = max_iterations;
        }
    }
    let rho_bulk = eta / minkowski_measures(&bodies[0]).volume;
    // Hard wall at z = 0: centre exclusion empties every node within one
    // radius of the wall.
    let v_ext: Vec<f64> = (0..grid.n_points)
        .map(|i| {
            if grid.z(i as isize) < radius {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    let outcome = picard_solve(&model, &v_ext, rho_bulk, &params).map_err(planar_error)?;
    let kernels = planar_kernels(radius, &grid).map_err(planar_error)?;
    let fields = weighted_density_fields(&outcome.profile, &kernels).map_err(planar_error)?;
    let mu = mu_ex_field(&fields, &model, &kernels).map_err(planar_error)?;
    let rows: Vec<Vec<String>> = (0..grid.n_points)
        .map(|i| {
            vec![
                grid.z(i as isize).to_string(),
                outcome.profile.rho[i].to_string(),
                fields.at(i as isize).n_v.to_string(),
                mu[i].to_string(),
            ]
        })
        .collect();
    let csv = csv_document("z,rho,n_v,mu_ex", &rows);
    let bulk =
        bulk_eos(&bodies[0], eta, &model).map_err(|e| CliError::Validation(e.to_string()))?;
    let meta = ProfileMeta {
        model: format!("{model_kind:?}").to_lowercase(),
        eta,
        radius,
        grid: ProfileGridMeta {
            n_points: grid.n_points,
            dz: grid.dz,
            origin: grid.origin,
        },
        wall: "hard wall at z = 0; density is zero for z < radius (centre exclusion)",
        contact_density: contact_density(&outcome.profile, radius),
        beta_pressure_bulk: bulk.beta_pressure,
        beta_mu_excess_bulk: bulk.beta_mu_excess,
        iterations: outcome.iterations,
        final_residual: outcome.final_residual,
    };
    let json = json_document(&meta)?;
    Ok(TaskOutput::ok(vec![
        ("profile.csv".to_string(), csv),
        ("profile_meta.json".to_string(), json),
    ]))
}

// ---------------------------------------------------------- identity-suite

#[derive(Serialize)]
struct IdentityCheck {
    check: String,
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
}

#[derive(Serialize)]
struct IdentitySuiteReport {
    n_samples: u64,
    seed: u64,
    checks: Vec<IdentityCheck>,
    overall_pass: bool,
}

fn random_densities<R: Rng>(rng: &mut R) -> WeightedDensities {
    let sym = |rng: &mut R| {
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let x = rng.gen::<f64>() * 0.4 - 0.2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    };
    let vec = |rng: &mut R| {
        Vector3::new(
            rng.gen::<f64>() * 0.4 - 0.2,
            rng.gen::<f64>() * 0.4 - 0.2,
            rng.gen::<f64>() * 0.4 - 0.2,
        )
    };
    WeightedDensities {
        n_chi: rng.gen::<f64>() * 0.5,
        n_k0: rng.gen::<f64>() * 0.5,
        n_k1: vec(rng),
        n_s0: rng.gen::<f64>() * 2.0,
        n_s1: vec(rng),
        n_s2: sym(rng),
        n_delta2: sym(rng),
        n_v: rng.gen::<f64>() * 0.9,
    }
}

fn identity_suite(config: &RunConfig) -> Result<TaskOutput, CliError> {
    let mc = config.mc.expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let mut checks = Vec::new();
    let push = |checks: &mut Vec<IdentityCheck>, name: &str, dev: f64, tol: f64| {
        checks.push(IdentityCheck {
            check: name.to_string(),
            max_deviation: dev,
            tolerance: tol,
            pass: dev <= tol,
        });
    };

    // Two- and three-body identities on the configured sample count.
    let mut two_dev = 0.0f64;
    let mut three_dev = 0.0f64;
    let mut cyclic_break = 0.0f64;
    for _ in 0..mc.n_samples {
        let p1 = random_patch(&mut rng);
        let p2 = random_patch(&mut rng);
        let c = p1.normal.dot(&p2.normal);
        let s = p1.normal.cross(&p2.normal).norm();
        if s > 1e-6 && 1.0 + c > 1e-6 {
            if let (Ok(angle), Ok(tensor)) = (
                two_body_euler_angle_form(&p1, &p2),
                two_body_euler_tensor_form(&p1, &p2),
            ) {
                two_dev = two_dev.max((s * angle - tensor).abs() / tensor.abs().max(1.0));
            }
        }
        let n1 = random_unit(&mut rng);
        let n2 = random_unit(&mut rng);
        let n3 = random_unit(&mut rng);
        let product = three_body_euler_form(&n1, &n2, &n3);
        let expansion = three_body_weight_expansion(&n1, &n2, &n3);
        three_dev = three_dev.max((product - expansion).abs() / product.abs().max(1.0));
        let rotated = three_body_euler_form(&n3, &n1, &n2);
        if product.to_bits() != rotated.to_bits() {
            cyclic_break = 1.0;
        }
    }
    push(&mut checks, "two_body_angle_vs_tensor", two_dev, 1e-12);
    push(
        &mut checks,
        "three_body_product_vs_expansion",
        three_dev,
        1e-12,
    );
    push(
        &mut checks,
        "three_body_cyclic_invariance",
        cyclic_break,
        0.0,
    );

    // Scaled-particle differential residual over random admissible tuples.
    for (name, model) in [
        ("spt_residual_rosenfeld", FreeEnergyModel::RosenfeldOriginal),
        ("spt_residual_tarazona", FreeEnergyModel::TarazonaTensor),
    ] {
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let n = random_densities(&mut rng);
            let residual =
                spt_residual(&n, &model).map_err(|e| CliError::Numeric(e.to_string()))?;
            let phi = phi_excess(&n, &model).map_err(|e| CliError::Numeric(e.to_string()))?;
            worst = worst.max(residual.abs() / phi.abs().max(1.0));
        }
        push(&mut checks, name, worst, 1e-12);
    }

    // Bulk EOS against the closed compressibility form, both models.
    let sphere = ConvexBody::sphere(1.0).expect("unit radius");
    let mut eos_dev = 0.0f64;
    for model in [
        FreeEnergyModel::RosenfeldOriginal,
        FreeEnergyModel::TarazonaTensor,
    ] {
        for k in 1..=9 {
            let eta = 0.05 * k as f64;
            let z = bulk_eos(&sphere, eta, &model)
                .map_err(|e| CliError::Numeric(e.to_string()))?
                .z;
            let exact = (1.0 + eta + eta * eta) / (1.0 - eta).powi(3);
            eos_dev = eos_dev.max((z - exact).abs());
        }
    }
    push(&mut checks, "eos_compressibility_form", eos_dev, 1e-10);

    // Virial coefficients from the bulk series, both models.
    let mut virial_dev = 0.0f64;
    for model in [
        FreeEnergyModel::RosenfeldOriginal,
        FreeEnergyModel::TarazonaTensor,
    ] {
        let v =
            virial_series_bulk(&sphere, &model).map_err(|e| CliError::Numeric(e.to_string()))?;
        virial_dev = virial_dev.max((v.b2_over_v - 4.0).abs());
        virial_dev = virial_dev.max((v.b3_over_v2 - 10.0).abs());
    }
    push(&mut checks, "virial_series_hard_sphere", virial_dev, 1e-10);

    // Planar kernel sum rules at a representative resolution.
    let grid = Grid1D::new(256, 0.02, 0.0).map_err(planar_error)?;
    let kernels = planar_kernels(1.0, &grid).map_err(planar_error)?;
    let volume_sum: f64 = kernels.k_v.iter().sum();
    let surface_sum: f64 = kernels.k_s0.iter().sum();
    let kernel_dev = ((volume_sum - 4.0 * PI / 3.0) / (4.0 * PI / 3.0))
        .abs()
        .max(((surface_sum - 4.0 * PI) / (4.0 * PI)).abs());
    push(&mut checks, "planar_kernel_sum_rules", kernel_dev, 1e-12);

    let overall = checks.iter().all(|c| c.pass);
    let report = IdentitySuiteReport {
        n_samples: mc.n_samples,
        seed: mc.seed,
        checks,
        overall_pass: overall,
    };
    let json = json_document(&report)?;
    let failure = if overall {
        None
    } else {
        Some("identity suite recorded failing checks (see identity_suite.json)".to_string())
    };
    Ok(TaskOutput {
        files: vec![("identity_suite.json".to_string(), json)],
        failure,
    })
}
