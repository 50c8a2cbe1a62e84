//! Completeness estimates, classification of two-sided orbits, invariant and
//! monotonicity checks, and the shooting search for the sphere heteroclinic.

mod lemmas;
mod shooting;
mod suite;

use serde::{Deserialize, Serialize};

use crate::equilibria::Pole;
use crate::error::Result;
use crate::integrate::{integrate, IntegrationOptions, Sample, Start, Termination, Trajectory};
use crate::phase::{SolitonParams, TimeDirection};

pub use lemmas::*;
pub use shooting::*;
pub use suite::*;

/// A solution integrated both ways from a common start at `t = 0`.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub forward: Trajectory,
    pub backward: Trajectory,
}

impl Orbit {
    /// Image under reflection composed with time reversal.
    pub fn reflected(&self) -> Orbit {
        Orbit {
            forward: self.backward.reflected(),
            backward: self.forward.reflected(),
        }
    }

    pub fn params(&self) -> &SolitonParams {
        self.forward.params()
    }

    /// Samples of both halves.
    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.backward.samples().iter().chain(self.forward.samples())
    }

    pub fn end(&self, direction: TimeDirection) -> &Trajectory {
        match direction {
            TimeDirection::Forward => &self.forward,
            TimeDirection::Backward => &self.backward,
        }
    }
}

/// Horizons for [`integrate_orbit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub t_forward: f64,
    pub t_backward: f64,
    pub integration: IntegrationOptions,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            t_forward: 40.0,
            t_backward: 40.0,
            integration: IntegrationOptions::default(),
        }
    }
}

pub fn integrate_orbit(
    params: &SolitonParams,
    start: impl Into<Start>,
    options: &OrbitOptions,
) -> Result<Orbit> {
    let start = start.into();
    let forward = integrate(params, start, (0.0, options.t_forward), &options.integration, &[])?;
    let backward = integrate(
        params,
        start,
        (0.0, -options.t_backward),
        &options.integration,
        &[],
    )?;
    Ok(Orbit { forward, backward })
}

/// Distance from a sample to an equilibrium, using the chart-precise
/// differences carried by the sample.
pub fn pole_distance(params: &SolitonParams, s: &Sample, pole: Pole) -> f64 {
    let sigma = pole.sign();
    let x = s.x();
    // x - sigma from 1 - x^2 = (1 - sigma x)(1 + sigma x) when x is near sigma
    let dx = if (x - sigma).abs() < 0.5 {
        -sigma * s.one_minus_x_sq / (1.0 + sigma * x)
    } else {
        x - sigma
    };
    let dy = s.y_minus_nx + params.nf() * dx;
    (s.omega() * s.omega() + dx * dx + dy * dy).sqrt()
}

fn nearest_pole_distance(params: &SolitonParams, s: &Sample) -> f64 {
    pole_distance(params, s, Pole::P0).min(pole_distance(params, s, Pole::P1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    RoundSphere,
    GaussianFlat,
    ReversedGaussian,
    Cylinder,
    IncompleteBlowup,
    IncompleteCollapse,
    Undetermined,
}

impl Tag {
    /// The tag of the reflected, time-reversed orbit.
    pub fn reflect(self) -> Tag {
        match self {
            Tag::GaussianFlat => Tag::ReversedGaussian,
            Tag::ReversedGaussian => Tag::GaussianFlat,
            t => t,
        }
    }
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: Tag,
    pub evidence: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Sup-norm tolerance for the cylinder and flat loci.
    pub locus_tol: f64,
    /// Radius for "approaches an equilibrium".
    pub rho: f64,
    /// Curvature signs are checked only at this distance from both poles.
    pub pole_exclusion: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            locus_tol: 1e-6,
            rho: 1e-4,
            pole_exclusion: 1e-3,
        }
    }
}

pub fn classify(orbit: &Orbit) -> Classification {
    classify_with(orbit, &ClassifyOptions::default())
}

/// Decision list; the first matching rule wins.
///
/// 1. `Cylinder`: `|x|` and `|omega - omega0|` below `locus_tol` throughout.
/// 2. `GaussianFlat` / `ReversedGaussian`: `|x -+ 1|` below `locus_tol`.
/// 3. `RoundSphere`: the backward half comes within `rho` of `P0`, the forward
///    half within `rho` of `P1`, and `nu1, nu2 > 0` away from the poles.
/// 4. `IncompleteBlowup`: `omega -> inf` at an end (`x -> +inf` forward or
///    `x -> -inf` backward).
/// 5. `IncompleteCollapse`: `omega -> 0` at an end away from both poles.
/// 6. `Undetermined`.
pub fn classify_with(orbit: &Orbit, opts: &ClassifyOptions) -> Classification {
    let params = *orbit.params();
    let mut ev: Vec<(String, f64)> = Vec::new();

    let w0 = params.cylinder_radius();
    let sup_x = orbit.samples().map(|s| s.x().abs()).fold(0.0, f64::max);
    let sup_w = orbit
        .samples()
        .map(|s| (s.omega() - w0).abs())
        .fold(0.0, f64::max);
    if sup_x < opts.locus_tol && sup_w < opts.locus_tol {
        ev.push(("sup|x|".into(), sup_x));
        ev.push(("sup|omega-omega0|".into(), sup_w));
        return Classification {
            tag: Tag::Cylinder,
            evidence: ev,
        };
    }

    for (tag, sigma) in [(Tag::GaussianFlat, 1.0), (Tag::ReversedGaussian, -1.0)] {
        let sup = orbit
            .samples()
            .map(|s| (s.x() - sigma).abs())
            .fold(0.0, f64::max);
        if sup < opts.locus_tol {
            ev.push((format!("sup|x-({sigma})|"), sup));
            return Classification { tag, evidence: ev };
        }
    }

    let d0 = orbit
        .backward
        .samples()
        .iter()
        .map(|s| pole_distance(&params, s, Pole::P0))
        .fold(f64::INFINITY, f64::min);
    let d1 = orbit
        .forward
        .samples()
        .iter()
        .map(|s| pole_distance(&params, s, Pole::P1))
        .fold(f64::INFINITY, f64::min);
    if d0 <= opts.rho && d1 <= opts.rho {
        let (min_nu1, min_nu2) = orbit
            .samples()
            .filter(|s| s.omega() > 0.0 && nearest_pole_distance(&params, s) >= opts.pole_exclusion)
            .map(|s| {
                let w2 = s.omega() * s.omega();
                (-s.dx_dt / w2, s.one_minus_x_sq / w2)
            })
            .fold((f64::INFINITY, f64::INFINITY), |(a, b), (c, d)| {
                (a.min(c), b.min(d))
            });
        if min_nu1 > 0.0 && min_nu2 > 0.0 {
            ev.push(("min dist to P0 (backward)".into(), d0));
            ev.push(("min dist to P1 (forward)".into(), d1));
            ev.push(("min nu1".into(), min_nu1));
            ev.push(("min nu2".into(), min_nu2));
            return Classification {
                tag: Tag::RoundSphere,
                evidence: ev,
            };
        }
    }

    let fwd = &orbit.forward;
    let bwd = &orbit.backward;
    let blows = |t: &Trajectory, sigma: f64| {
        t.termination() == Termination::BlowupDetected && sigma * t.last().x() > 0.0
    };
    if blows(fwd, 1.0) || blows(bwd, -1.0) {
        ev.push(("forward final x".into(), fwd.last().x()));
        ev.push(("backward final x".into(), bwd.last().x()));
        return Classification {
            tag: Tag::IncompleteBlowup,
            evidence: ev,
        };
    }

    let collapses = |t: &Trajectory, sigma: f64| {
        (t.termination() == Termination::CollapseDetected
            && nearest_pole_distance(&params, t.last()) >= opts.pole_exclusion)
            || blows(t, sigma)
    };
    if collapses(fwd, -1.0) || collapses(bwd, 1.0) {
        ev.push(("forward final omega".into(), fwd.last().omega()));
        ev.push(("backward final omega".into(), bwd.last().omega()));
        ev.push(("forward final x".into(), fwd.last().x()));
        ev.push(("backward final x".into(), bwd.last().x()));
        return Classification {
            tag: Tag::IncompleteCollapse,
            evidence: ev,
        };
    }

    Classification {
        tag: Tag::Undetermined,
        evidence: ev,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Completeness {
    InfiniteLength,
    FiniteLengthPole,
    FiniteLengthBlowup,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessVerdict {
    pub direction: TimeDirection,
    pub verdict: Completeness,
    /// Length `|r_end - r_start|`; infinite for `InfiniteLength`.
    pub r_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessOptions {
    pub r_bound: f64,
    pub pole_radius: f64,
}

impl Default for CompletenessOptions {
    fn default() -> Self {
        Self {
            r_bound: 1e3,
            pole_radius: 1e-3,
        }
    }
}

pub fn estimate_completeness(traj: &Trajectory) -> CompletenessVerdict {
    estimate_completeness_with(traj, &CompletenessOptions::default())
}

/// Length of `traj` toward its terminal end.
///
/// `InfiniteLength` needs `|r|` past `r_bound` with the increment over the
/// last unit of `t` at least 0.9 of the one before it.
pub fn estimate_completeness_with(
    traj: &Trajectory,
    opts: &CompletenessOptions,
) -> CompletenessVerdict {
    let params = traj.params();
    let first = traj.first();
    let last = traj.last();
    let length = (last.r() - first.r()).abs();
    let near_pole = nearest_pole_distance(params, last) < opts.pole_radius;
    let mk = |verdict, r_estimate| CompletenessVerdict {
        direction: traj.direction(),
        verdict,
        r_estimate,
    };
    match traj.termination() {
        Termination::BlowupDetected if length.is_finite() => {
            return mk(Completeness::FiniteLengthBlowup, length)
        }
        Termination::CollapseDetected => return mk(Completeness::FiniteLengthPole, length),
        _ => {}
    }
    if near_pole {
        return mk(Completeness::FiniteLengthPole, length);
    }
    if matches!(
        traj.termination(),
        Termination::HorizonReached | Termination::EventStop
    ) && length >= opts.r_bound
    {
        let sign = traj.direction().sign();
        let t_end = last.t;
        let at = |k: f64| traj.eval(t_end - sign * k).map(|s| s.r());
        if let (Some(r2), Some(r1)) = (at(2.0), at(1.0)) {
            let inc_last = (last.r() - r1).abs();
            let inc_prev = (r1 - r2).abs();
            if inc_last >= 0.9 * inc_prev {
                return mk(Completeness::InfiniteLength, f64::INFINITY);
            }
        }
    }
    mk(Completeness::Undetermined, length)
}
