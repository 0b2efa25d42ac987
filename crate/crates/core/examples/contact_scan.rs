//! Prints the hard-wall contact-theorem error across packing fractions and
//! grid resolutions (development diagnostic).

use fmt_core::fmt_model::{bulk_eos, FreeEnergyModel};
use fmt_core::geometry::ConvexBody;
use fmt_core::planar_dft::{contact_density, picard_solve, Grid1D, PicardParams};
use std::f64::consts::PI;
use std::time::Instant;

fn main() {
    let r = 1.0;
    let model = FreeEnergyModel::RosenfeldOriginal;
    for eta in [0.1, 0.2, 0.3, 0.4] {
        for cells in [50usize, 100] {
            let dz = r / cells as f64;
            let grid = Grid1D::new(20 * cells, dz, 0.0).unwrap();
            let v_ext: Vec<f64> = (0..grid.n_points)
                .map(|i| {
                    if (i as f64) * dz < r {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                })
                .collect();
            let rho_b = eta / (4.0 * PI / 3.0);
            let mut params = PicardParams::new(grid, r);
            params.mixing = 0.05;
            let start = Instant::now();
            let outcome = picard_solve(&model, &v_ext, rho_b, &params).unwrap();
            let elapsed = start.elapsed().as_secs_f64();
            let beta_p = bulk_eos(&ConvexBody::sphere(r).unwrap(), eta, &model)
                .unwrap()
                .beta_pressure;
            let ic = (r / dz).round() as usize;
            let rho0 = outcome.profile.rho[ic];
            let rho1 = outcome.profile.rho[ic + 1];
            let rho2 = outcome.profile.rho[ic + 2];
            // Extrapolations to the support edge z = R - dz/2.
            let lin = 1.5 * rho0 - 0.5 * rho1;
            let quad = 1.875 * rho0 - 1.25 * rho1 + 0.375 * rho2;
            let api = contact_density(&outcome.profile, r);
            let far = (0..grid.n_points)
                .filter(|&i| (i as f64) * dz > 8.0 * r)
                .map(|i| ((outcome.profile.rho[i] - rho_b) / rho_b).abs())
                .fold(0.0f64, f64::max);
            println!(
                "eta {eta:4} dz R/{cells:<4} node {:+.3e} lin {:+.3e} quad {:+.3e} api {:+.3e} \
                 far {far:.3e} iters {:6} ({elapsed:.1} s)",
                (rho0 - beta_p) / beta_p,
                (lin - beta_p) / beta_p,
                (quad - beta_p) / beta_p,
                (api - beta_p) / beta_p,
                outcome.iterations
            );
        }
    }
}
