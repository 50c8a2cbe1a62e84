//! Classifies seeds on the unstable manifold of `P0` across the seeding angle.
//! Seeds between the blow-up side and the flat trajectory collapse; the
//! heteroclinic sits at the switch.

use soliton_lab::analyze::{sweep_unstable, OrbitOptions};
use soliton_lab::equilibria::{flat_shape, theta_for_shape, DEFAULT_DELTA};
use soliton_lab::SolitonParams;

fn main() -> soliton_lab::Result<()> {
    let params = SolitonParams::new(2, 1.0)?;
    let hi = theta_for_shape(&params, 1.2 * flat_shape(&params), DEFAULT_DELTA);
    let entries = sweep_unstable(&params, (-hi, hi), 25, DEFAULT_DELTA, &OrbitOptions::default())?;
    for e in entries {
        println!("theta = {:+.4e}  {}", e.theta, e.classification.tag);
    }
    Ok(())
}
