//! Checks the growth rates near a finite-time blow-up of `x`.

use soliton_lab::analyze::{blowup_starts, check_blowup_bound, DEFAULT_SEED};
use soliton_lab::{integrate, IntegrationOptions, SolitonParams};

fn main() -> soliton_lab::Result<()> {
    let params = SolitonParams::new(2, 1.0)?;
    let opts = IntegrationOptions::default();
    for p in blowup_starts(&params, 5, DEFAULT_SEED) {
        let traj = integrate(&params, p, (0.0, 100.0), &opts, &[])?;
        let rep = check_blowup_bound(&traj);
        println!(
            "start {:?}: T = {:.6}, x ~ {:.4}/(T - t)^{:.3}, sup x (T - t) = {:.4}, r(T) = {:.4}, {:?}",
            p.to_array(),
            rep.t_blowup,
            rep.fitted_constant,
            -rep.fitted_exponent,
            rep.max_scaled_x,
            rep.r_terminal,
            rep.verdict
        );
    }
    println!("expected constant 1/(1 + sqrt n) = {:.4}", 1.0 / (1.0 + 2f64.sqrt()));
    Ok(())
}
