//! Integrates the three explicit solutions and compares with their formulas,
//! then locates an event on a generic run.

use soliton_lab::{integrate, Crossing, EventSpec, IntegrationOptions, PhasePoint, SolitonParams};

fn main() -> soliton_lab::Result<()> {
    let params = SolitonParams::new(2, 1.0)?;
    let opts = IntegrationOptions::default();

    let cyl = integrate(&params, PhasePoint::new(1.0, 0.0, 0.0), (0.0, 10.0), &opts, &[])?;
    let end = cyl.last();
    println!("cylinder at t = 10: y = {} (exact -10)", end.y());

    let flat = integrate(&params, PhasePoint::new(1.0, 1.0, 1.0), (0.0, 3.0), &opts, &[])?;
    let worst = flat
        .samples()
        .iter()
        .map(|s| (s.omega() / s.t.exp() - 1.0).abs())
        .fold(0.0, f64::max);
    println!("flat: max relative error of omega = e^t is {worst:.2e}");

    let w = params.sphere_radius();
    let sphere = integrate(&params, PhasePoint::new(w, 0.0, 0.0), (0.0, 5.0), &opts, &[])?;
    let worst = sphere
        .samples()
        .iter()
        .map(|s| (s.x() + s.t.tanh()).abs())
        .fold(0.0, f64::max);
    println!("sphere: max |x + tanh t| = {worst:.2e}, {} steps", sphere.stats().accepted);

    let ev = EventSpec::x_crosses(0.0, Crossing::Falling).terminal();
    let run = integrate(&params, PhasePoint::new(1.0, 0.5, 5.0), (0.0, 10.0), &opts, &[ev])?;
    if let Some(e) = run.events().first() {
        println!("x falls through 0 at t* = {:.12} (x = {:.1e})", e.t, e.point.x);
    }
    Ok(())
}
