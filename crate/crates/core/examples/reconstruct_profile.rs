//! Recovers the round-sphere metric from its phase trajectory and checks the
//! soliton equations, the conserved identity and smoothness at the pole.

use soliton_lab::reconstruct::{
    hamilton_identity, reconstruct_profile, smoothness_check, soliton_residual,
};
use soliton_lab::{integrate, IntegrationOptions, PhasePoint, SolitonParams};

fn main() -> soliton_lab::Result<()> {
    let params = SolitonParams::new(2, 1.0)?;
    let opts = IntegrationOptions::default().with_max_step(0.01);
    let start = PhasePoint::new(params.sphere_radius(), 0.0, 0.0);

    let traj = integrate(&params, start, (0.0, 3.0), &opts, &[])?;
    let profile = reconstruct_profile(&traj, 0.0)?;
    let worst = profile
        .r
        .iter()
        .zip(&profile.omega)
        .map(|(r, w)| (w - 2f64.sqrt() * (r / 2f64.sqrt()).cos()).abs())
        .fold(0.0, f64::max);
    println!("{} points, max |omega - sqrt2 cos(r / sqrt2)| = {worst:.2e}", profile.len());
    println!("nu1 = {:.6}, nu2 = {:.6} at the equator", profile.nu1[0], profile.nu2[0]);
    println!("soliton residual {:.2e}", soliton_residual(&params, &profile)?.max_abs());
    let id = hamilton_identity(&params, &profile);
    let spread = id.iter().cloned().fold(f64::MIN, f64::max) - id.iter().cloned().fold(f64::MAX, f64::min);
    println!("identity R + f'^2 - 2 lambda f = {:.12} (spread {spread:.1e})", id[0]);

    // out to the pole: the run collapses onto P1
    let long = integrate(&params, start, (0.0, 40.0), &IntegrationOptions::default(), &[])?;
    let s = smoothness_check(&long);
    println!(
        "forward end: omega -> {:.1e}, x -> {:.6}, {:?}",
        s.omega_limit, s.x_limit, s.verdict
    );
    Ok(())
}
