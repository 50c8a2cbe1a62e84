//! Classifies standard starts, their reflections, and reports completeness
//! of each end.

use soliton_lab::analyze::{classify, estimate_completeness, integrate_orbit, OrbitOptions};
use soliton_lab::{reflect, PhasePoint, SolitonParams};

fn main() -> soliton_lab::Result<()> {
    let params = SolitonParams::new(2, 1.0)?;
    let opts = OrbitOptions::default();
    let starts = [
        ("cylinder", PhasePoint::new(1.0, 0.0, 0.0)),
        ("flat", PhasePoint::new(1.0, 1.0, 1.0)),
        ("sphere", PhasePoint::new(2f64.sqrt(), 0.0, 0.0)),
        ("blow-up", PhasePoint::new(0.1, 1.5, -1.0)),
    ];
    for (name, p) in starts {
        for (label, q) in [("", p), (" reflected", reflect(&p))] {
            let orbit = integrate_orbit(&params, q, &opts)?;
            let c = classify(&orbit);
            let f = estimate_completeness(&orbit.forward);
            let b = estimate_completeness(&orbit.backward);
            println!(
                "{name}{label}: {} (forward {:?}, backward {:?})",
                c.tag, f.verdict, b.verdict
            );
        }
    }
    Ok(())
}
