use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::integrate::{integrate, IntegrationOptions};
use crate::phase::{backward_preserved_regions, forward_preserved_regions, PhasePoint, SolitonParams};

use super::lemmas::*;
use super::{estimate_completeness, Completeness, OrbitOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub params: SolitonParams,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

fn check(name: impl Into<String>, passed: bool, detail: Value) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail,
    }
}

/// Starts with `x > 1` and `dx/dt > 0`, which blow up in finite time.
pub fn blowup_starts(params: &SolitonParams, count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.nf();
    (0..count)
        .map(|_| {
            let w = rng.gen_range(0.1..=2.0);
            let x: f64 = rng.gen_range(1.05..=3.0);
            let y_max = (x * x + n - 1.0 - params.lambda() * w * w) / x;
            let y = rng.gen_range((-5.0f64).min(y_max - 1.0)..=y_max - 0.1);
            PhasePoint::new(w, x, y)
        })
        .collect()
}

/// Every invariant, monotonicity and duality check with its default size.
pub fn run_lemma_suite(
    params: &SolitonParams,
    seed: u64,
    options: &IntegrationOptions,
) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let n = params.nf();

    let region_cfg = RegionCheckConfig {
        seed,
        options: *options,
        ..Default::default()
    };
    for region in forward_preserved_regions()
        .iter()
        .chain(backward_preserved_regions().iter())
    {
        let rep = check_region_preserved(params, region, &region_cfg)?;
        checks.push(check(
            format!("region_preserved[{:?} {}]", rep.direction, rep.region),
            rep.passed(),
            json!({"starts": rep.starts, "exits": rep.exits.len(), "terminations": rep.terminations}),
        ));
    }

    let q = check_q_monotone_random(params, 100, seed, 5.0, options)?;
    checks.push(check(
        "q_strictly_decreasing",
        q.violations == 0,
        serde_json::to_value(q).unwrap_or(Value::Null),
    ));

    let sphere = PhasePoint::new(params.sphere_radius(), 0.0, 0.0);
    let back = integrate(params, sphere, (0.0, -40.0), options, &[])?;
    let qb = check_q_monotone(&back)?;
    checks.push(check(
        "q_diverges_backward_into_origin_pole",
        qb.passed() && qb.q_end > 1e3,
        serde_json::to_value(qb).unwrap_or(Value::Null),
    ));

    let sp = check_x_sign_propagation(params, 50, seed, options)?;
    checks.push(check(
        "x_sign_propagation",
        sp.passed(),
        serde_json::to_value(sp).unwrap_or(Value::Null),
    ));

    let w0 = params.cylinder_radius();
    let t_y = 100.0 / (n - 1.0);
    let cyl_f = integrate(params, PhasePoint::new(w0, 0.0, 0.0), (0.0, t_y), options, &[])?;
    let cyl_b = integrate(params, PhasePoint::new(w0, 0.0, 0.0), (0.0, -t_y), options, &[])?;
    let yf = check_y_divergence(&cyl_f, 50.0);
    let yb = check_y_divergence(&cyl_b, 50.0);
    checks.push(check(
        "y_divergence",
        yf.passed && yb.passed,
        json!({"forward": yf, "backward": yb}),
    ));

    let starts = blowup_starts(params, 20, seed);
    let blow: Vec<Result<BlowupReport>> = starts
        .par_iter()
        .map(|p| {
            integrate(params, *p, (0.0, 100.0), options, &[]).map(|t| check_blowup_bound(&t))
        })
        .collect();
    let blow = blow.into_iter().collect::<Result<Vec<_>>>()?;
    let worst = blow
        .iter()
        .map(|b| b.max_scaled_x)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(check(
        "blowup_bound",
        blow.iter().all(|b| b.verdict == CheckVerdict::Pass),
        json!({"runs": blow.len(), "max_scaled_x": worst,
               "passed": blow.iter().filter(|b| b.verdict == CheckVerdict::Pass).count()}),
    ));

    let mut loci = Vec::new();
    for (level, arg) in [(-1.0, 1.0), (0.0, 1.0), (1.0, 1.0)] {
        loci.push(check_invariant_locus(params, level, arg, 5.0, 1e-8, options)?);
    }
    checks.push(check(
        "invariant_x_levels",
        loci.iter().all(|l| l.passed),
        serde_json::to_value(&loci).unwrap_or(Value::Null),
    ));

    let long_cyl = integrate(
        params,
        PhasePoint::new(w0, 0.0, 0.0),
        (0.0, 1.01e3 / w0),
        options,
        &[],
    )?;
    let flat = PhasePoint::new(1.0, 1.0, n - params.lambda());
    let flat_t = (1e3f64).ln() + 1.0;
    let flat_f = integrate(params, flat, (0.0, flat_t), options, &[])?;
    let flat_b = integrate(params, flat, (0.0, -80.0), options, &[])?;
    let c_cyl = estimate_completeness(&long_cyl);
    let c_flat_f = estimate_completeness(&flat_f);
    let c_flat_b = estimate_completeness(&flat_b);
    checks.push(check(
        "completeness",
        c_cyl.verdict == Completeness::InfiniteLength
            && c_flat_f.verdict == Completeness::InfiniteLength
            && c_flat_b.verdict == Completeness::FiniteLengthPole,
        json!({"cylinder_forward": c_cyl, "flat_forward": c_flat_f, "flat_backward": c_flat_b}),
    ));

    let lim: Vec<LimsupReport> = [&long_cyl, &flat_f]
        .iter()
        .map(|t| check_limsup_x(t, 0.05))
        .collect();
    checks.push(check(
        "limsup_x_nonnegative",
        lim.iter().all(|l| l.passed),
        serde_json::to_value(&lim).unwrap_or(Value::Null),
    ));

    let orbit = OrbitOptions {
        t_forward: 3.0,
        t_backward: 3.0,
        integration: *options,
    };
    let dual = check_reflection_duality(params, 50, seed, &orbit)?;
    checks.push(check(
        "reflection_duality",
        dual.passed(1e-7),
        serde_json::to_value(dual).unwrap_or(Value::Null),
    ));

    let blowups_terminate = blow.iter().all(|b| b.r_terminal.is_finite());
    checks.push(check(
        "blowup_length_finite",
        blowups_terminate,
        json!({"runs": blow.len()}),
    ));

    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport {
        params: *params,
        seed,
        checks,
        passed,
    })
}
