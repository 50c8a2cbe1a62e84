use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{flat_shape, theta_for_shape, unstable_seed, Pole};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate, Crossing, EventSpec, IntegrationOptions, Start, Termination, Trajectory,
};
use crate::phase::SolitonParams;

use super::{classify, integrate_orbit, pole_distance, Classification, Orbit, OrbitOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub theta: f64,
    pub classification: Classification,
}

/// Seeds `count` trajectories on the unstable manifold of `P0` at evenly
/// spaced `theta`, integrates each both ways and classifies it.
pub fn sweep_unstable(
    params: &SolitonParams,
    theta_range: (f64, f64),
    count: usize,
    delta: f64,
    orbit: &OrbitOptions,
) -> Result<Vec<SweepEntry>> {
    if count < 2 {
        return Err(Error::InvalidRequest(format!(
            "a sweep needs at least 2 seeds, got {count}"
        )));
    }
    let (lo, hi) = theta_range;
    let thetas: Vec<f64> = (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    let seeds = thetas
        .iter()
        .map(|&th| unstable_seed(params, th, delta))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<SweepEntry>> = thetas
        .par_iter()
        .zip(seeds.par_iter())
        .map(|(&theta, seed)| {
            let o = integrate_orbit(params, *seed, orbit)?;
            Ok(SweepEntry {
                theta,
                classification: classify(&o),
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Which way a seed trajectory leaves the sphere heteroclinic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Enters `{x >= 1, dx/dt >= 0}` and blows up.
    Blowup,
    /// Enters `{x <= -1, dx/dt <= 0}` and collapses.
    Collapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectOptions {
    pub delta: f64,
    pub iters: usize,
    /// Forward horizon of each shot.
    pub horizon: f64,
    /// Radius of the terminal ball about `P1` for the final run.
    pub rho: f64,
    pub integration: IntegrationOptions,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            delta: crate::equilibria::DEFAULT_DELTA,
            iters: 60,
            horizon: 400.0,
            rho: 1e-4,
            integration: IntegrationOptions::default(),
        }
    }
}

/// A bracket `[0, theta_hi]` around the sphere heteroclinic. `theta = 0` lies
/// on the blow-up side; `theta_hi` is 0.9 of the way to the flat trajectory,
/// on the collapse side.
pub fn suggested_bracket(params: &SolitonParams, delta: f64) -> (f64, f64) {
    (0.0, theta_for_shape(params, 0.9 * flat_shape(params), delta))
}

fn side_events() -> [EventSpec; 2] {
    [
        EventSpec::x_crosses(-1.0, Crossing::Falling).terminal(),
        EventSpec::x_crosses(1.0, Crossing::Rising).terminal(),
    ]
}

fn side_of(traj: &Trajectory) -> Option<Side> {
    if let Some(ev) = traj.events().first() {
        return Some(if ev.index == 0 {
            Side::Collapse
        } else {
            Side::Blowup
        });
    }
    match traj.termination() {
        Termination::BlowupDetected => Some(if traj.last().x() > 0.0 {
            Side::Blowup
        } else {
            Side::Collapse
        }),
        _ => None,
    }
}

/// Integrates the seed at `theta` forward until it commits to a side.
///
/// Crossing `x = -1` downward enters a forward-invariant region that
/// collapses; crossing `x = 1` upward enters one that blows up.
pub fn shoot(params: &SolitonParams, theta: f64, opts: &BisectOptions) -> Result<(Option<Side>, Trajectory)> {
    let seed = unstable_seed(params, theta, opts.delta)?;
    let integ = opts.integration.without_collapse_guard();
    let traj = integrate(params, seed, (0.0, opts.horizon), &integ, &side_events())?;
    Ok((side_of(&traj), traj))
}

#[derive(Debug, Clone)]
pub struct BisectionResult {
    pub theta: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Forward run from the final seed, stopped on entering the `rho`-ball
    /// about `P1` when it gets there.
    pub trajectory: Trajectory,
    /// Backward run from the same seed, stopped inside a tenth of the seed
    /// radius about `P0`.
    pub backward: Trajectory,
    pub reached_p1: bool,
    pub min_distance_p1: f64,
    /// `sup |y - n x|` along the forward run.
    pub max_line_deviation: f64,
    /// `sup |n x^2 + lambda omega^2 - n|` along the forward run.
    pub max_ellipse_deviation: f64,
}

impl BisectionResult {
    pub fn orbit(&self) -> Orbit {
        Orbit {
            forward: self.trajectory.clone(),
            backward: self.backward.clone(),
        }
    }
}

/// Bisects on the seeding angle between a blow-up-side and a collapse-side
/// seed; the boundary trajectory is the heteroclinic from `P0` to `P1`.
pub fn bisect_heteroclinic(
    params: &SolitonParams,
    theta_lo: f64,
    theta_hi: f64,
    opts: &BisectOptions,
) -> Result<BisectionResult> {
    let (s_lo, _) = shoot(params, theta_lo, opts)?;
    let (s_hi, _) = shoot(params, theta_hi, opts)?;
    let (s_lo, s_hi) = match (s_lo, s_hi) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => {
            return Err(Error::Bracket(format!(
                "endpoints must lie on opposite sides, got {s_lo:?} at {theta_lo} and {s_hi:?} at {theta_hi}"
            )))
        }
    };
    let (mut lo, mut hi) = (theta_lo, theta_hi);
    let mut iterations = 0;
    while iterations < opts.iters {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        iterations += 1;
        match shoot(params, mid, opts)?.0 {
            Some(s) if s == s_lo => lo = mid,
            Some(s) if s == s_hi => hi = mid,
            _ => {
                return Err(Error::Numerical(format!(
                    "seed at theta = {mid} did not commit to a side within t = {}",
                    opts.horizon
                )))
            }
        }
    }
    let theta = 0.5 * (lo + hi);
    let seed = unstable_seed(params, theta, opts.delta)?;
    let integ = opts.integration.without_collapse_guard();
    let mut events = side_events().to_vec();
    events.push(EventSpec::near(Pole::P1, opts.rho).terminal());
    let trajectory = integrate(params, seed, (0.0, opts.horizon), &integ, &events)?;
    // The seed is off the manifold by O(delta^2) along the stable direction
    // of P0, which grows backward; stop once the run is well inside the seed
    // radius instead of following that error out.
    let into_p0 = EventSpec::near(Pole::P0, 0.1 * opts.delta.min(opts.rho)).terminal();
    let backward = integrate(
        params,
        Start::from(seed),
        (0.0, -opts.horizon),
        &opts.integration,
        &[into_p0],
    )?;
    let reached_p1 = trajectory.events().iter().any(|e| e.index == 2);
    let min_distance_p1 = trajectory
        .samples()
        .iter()
        .map(|s| pole_distance(params, s, Pole::P1))
        .fold(f64::INFINITY, f64::min);
    let max_line_deviation = trajectory
        .samples()
        .iter()
        .map(|s| s.y_minus_nx.abs())
        .fold(0.0, f64::max);
    let max_ellipse_deviation = trajectory
        .samples()
        .iter()
        .map(|s| s.ellipse_gap.abs())
        .fold(0.0, f64::max);
    Ok(BisectionResult {
        theta,
        bracket: (lo, hi),
        iterations,
        trajectory,
        backward,
        reached_p1,
        min_distance_p1,
        max_line_deviation,
        max_ellipse_deviation,
    })
}
