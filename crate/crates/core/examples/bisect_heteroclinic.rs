//! Bisects for the orbit joining the poles and compares it with the ellipse
//! `{y = n x, n x^2 + lambda omega^2 = n}`.
//!
//! `P1` repels at rate `n - 1` across the orbit and attracts at rate 1 along
//! it, so for `n > 2` double precision runs out before the `rho`-ball is
//! reached; the closest approach is printed instead.

use std::time::Instant;

use soliton_lab::analyze::{bisect_heteroclinic, classify, suggested_bracket, BisectOptions};
use soliton_lab::SolitonParams;

fn main() -> soliton_lab::Result<()> {
    for n in [2, 3, 5] {
        let params = SolitonParams::new(n, 1.0)?;
        let opts = BisectOptions::default();
        let (lo, hi) = suggested_bracket(&params, opts.delta);
        let clock = Instant::now();
        let res = bisect_heteroclinic(&params, lo, hi, &opts)?;
        println!(
            "n = {n}: theta* = {:.10e} after {} iterations ({:.2} s); line {:.1e}, ellipse {:.1e}, \
             reached P1: {} (closest {:.1e}); tag {}",
            res.theta,
            res.iterations,
            clock.elapsed().as_secs_f64(),
            res.max_line_deviation,
            res.max_ellipse_deviation,
            res.reached_p1,
            res.min_distance_p1,
            classify(&res.orbit()).tag
        );
    }
    Ok(())
}
