//! Eigendata of the two poles and seeds on the unstable manifold of `P0`.

use soliton_lab::equilibria::{flat_shape, seed_shape, theta_for_shape, DEFAULT_DELTA};
use soliton_lab::{equilibrium_points, phi, SolitonParams};

fn main() -> soliton_lab::Result<()> {
    for n in 2..=4 {
        let params = SolitonParams::new(n, 1.0)?;
        let (p0, p1) = equilibrium_points(&params);
        for e in [&p0, &p1] {
            println!(
                "n = {n} {:?} at {:?}: eigenvalues {:?}, residual {:.1e}, |phi| = {}",
                e.pole,
                e.point.to_array(),
                e.eigenvalues,
                e.max_residual(),
                phi(&params, &e.point)?.norm()
            );
        }
        let k = flat_shape(&params);
        let theta = theta_for_shape(&params, k, DEFAULT_DELTA);
        println!(
            "  flat trajectory leaves P0 at theta = {theta:.6e} (shape {k:.4}, recovered {:.4})",
            seed_shape(&params, theta, DEFAULT_DELTA)
        );
    }
    Ok(())
}
