use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{
    integrate, Crossing, EventSpec, IntegrationOptions, Sample, Start, Trajectory,
};
use crate::phase::{reflect, PhasePoint, PreservedRegion, Quantity, SolitonParams, TimeDirection};
use crate::reconstruct::fd_weights;

use super::{classify, integrate_orbit, OrbitOptions};

/// Default seed for randomized checks.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Axis-aligned box of phase points used for random starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub omega: (f64, f64),
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Default for SampleBox {
    fn default() -> Self {
        Self {
            omega: (0.1, 2.0),
            x: (-3.0, 3.0),
            y: (-5.0, 5.0),
        }
    }
}

impl SampleBox {
    pub fn draw(&self, rng: &mut impl Rng) -> PhasePoint {
        PhasePoint::new(
            rng.gen_range(self.omega.0..=self.omega.1),
            rng.gen_range(self.x.0..=self.x.1),
            rng.gen_range(self.y.0..=self.y.1),
        )
    }
}

/// Draws `count` points from `bx`, reproducibly from `seed`.
pub fn random_points(bx: &SampleBox, count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| bx.draw(&mut rng)).collect()
}

fn quantity(s: &Sample, q: Quantity) -> f64 {
    match q {
        Quantity::Omega => s.omega(),
        Quantity::X => s.x(),
        Quantity::Y => s.y(),
        Quantity::DxDt => s.dx_dt,
    }
}

/// Smallest atom slack at `s`, each scaled by `max(1, |value|)`.
fn scaled_margin(region: &PreservedRegion, s: &Sample) -> f64 {
    region
        .region
        .atoms
        .iter()
        .map(|a| {
            let v = quantity(s, a.quantity);
            a.slack(v) / v.abs().max(1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCheckConfig {
    pub starts: usize,
    pub horizon: f64,
    pub seed: u64,
    pub bounds: SampleBox,
    pub options: IntegrationOptions,
    /// A sample counts as outside when its scaled margin is below `-exit_tol`.
    pub exit_tol: f64,
}

impl Default for RegionCheckConfig {
    fn default() -> Self {
        Self {
            starts: 100,
            horizon: 5.0,
            seed: DEFAULT_SEED,
            bounds: SampleBox::default(),
            options: IntegrationOptions::default(),
            exit_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionExit {
    pub start: PhasePoint,
    pub t: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub region: String,
    pub direction: TimeDirection,
    pub starts: usize,
    pub seed: u64,
    pub exits: Vec<RegionExit>,
    pub terminations: BTreeMap<String, usize>,
}

impl RegionReport {
    pub fn passed(&self) -> bool {
        self.exits.is_empty()
    }
}

/// Integrates random starts drawn inside `region` in its preserved direction
/// and records every sample found outside it.
pub fn check_region_preserved(
    params: &SolitonParams,
    region: &PreservedRegion,
    cfg: &RegionCheckConfig,
) -> Result<RegionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = Vec::with_capacity(cfg.starts);
    let mut attempts = 0usize;
    while starts.len() < cfg.starts {
        attempts += 1;
        if attempts > 10_000_000 {
            return Err(Error::InvalidRequest(format!(
                "could not draw starts inside {} from the sampling box",
                region.region.name
            )));
        }
        let p = cfg.bounds.draw(&mut rng);
        if region.region.margin(params, &p) > 1e-6 {
            starts.push(p);
        }
    }
    let t1 = region.direction.sign() * cfg.horizon;
    let runs: Vec<Result<(PhasePoint, Trajectory)>> = starts
        .par_iter()
        .map(|p| integrate(params, *p, (0.0, t1), &cfg.options, &[]).map(|t| (*p, t)))
        .collect();
    let mut exits = Vec::new();
    let mut terminations = BTreeMap::new();
    for run in runs {
        let (p, traj) = run?;
        *terminations
            .entry(traj.termination().to_string())
            .or_insert(0) += 1;
        if let Some(s) = traj
            .samples()
            .iter()
            .find(|s| scaled_margin(region, s) < -cfg.exit_tol)
        {
            exits.push(RegionExit {
                start: p,
                t: s.t,
                margin: scaled_margin(region, s),
            });
        }
    }
    Ok(RegionReport {
        region: region.region.name.clone(),
        direction: region.direction,
        starts: cfg.starts,
        seed: cfg.seed,
        exits,
        terminations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub direction: TimeDirection,
    pub samples: usize,
    /// Consecutive sample pairs along which `Q = y / omega` fails to decrease
    /// in `t` by more than the slack.
    pub violations: usize,
    pub max_violation: f64,
    /// Largest `|dQ/dt_fd - dQ/dt|` over interior samples, relative to
    /// `max(1, |dQ/dt|)`.
    pub fd_max_error: f64,
    pub q_start: f64,
    pub q_end: f64,
}

impl QReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Slack for monotonicity, relative to `max(1, |Q|)`.
pub const Q_SLACK: f64 = 1e-12;

/// Checks that `Q = y / omega` is strictly decreasing in `t` along `traj` and
/// compares finite differences of `Q` with `dQ/dt = -n x^2 / omega - lambda omega`.
///
/// For backward runs this is the statement that `Q` increases as `t`
/// decreases toward the left end.
pub fn check_q_monotone(traj: &Trajectory) -> Result<QReport> {
    let params = traj.params();
    let s = traj.samples();
    if let Some(bad) = s.iter().find(|s| !(s.omega() > 0.0)) {
        return Err(Error::Domain(format!(
            "Q = y/omega needs omega > 0, got {} at t = {}",
            bad.omega(),
            bad.t
        )));
    }
    let q: Vec<f64> = s.iter().map(|s| s.y() / s.omega()).collect();
    let mut violations = 0;
    let mut max_violation = 0.0f64;
    for i in 1..s.len() {
        let dt = s[i].t - s[i - 1].t;
        let rise = (q[i] - q[i - 1]) * dt.signum();
        let slack = Q_SLACK * q[i].abs().max(q[i - 1].abs()).max(1.0);
        if rise >= slack {
            violations += 1;
            max_violation = max_violation.max(rise);
        }
    }
    let n = params.nf();
    let lambda = params.lambda();
    let mut fd_max_error = 0.0f64;
    if s.len() >= 5 {
        for i in 2..s.len() - 2 {
            let ts: Vec<f64> = (i - 2..=i + 2).map(|k| s[k].t).collect();
            let w = fd_weights(s[i].t, &ts, 1);
            let fd: f64 = (0..5).map(|k| w[k] * q[i - 2 + k]).sum();
            let exact = -n * s[i].x() * s[i].x() / s[i].omega() - lambda * s[i].omega();
            let err = (fd - exact).abs() / exact.abs().max(1.0);
            if err.is_finite() {
                fd_max_error = fd_max_error.max(err);
            }
        }
    }
    Ok(QReport {
        direction: traj.direction(),
        samples: s.len(),
        violations,
        max_violation,
        fd_max_error,
        q_start: q[0],
        q_end: q[q.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QSuiteReport {
    pub runs: usize,
    pub seed: u64,
    pub violations: usize,
    pub max_violation: f64,
    pub fd_max_error: f64,
}

/// [`check_q_monotone`] over `count` random starts, alternating forward and
/// backward runs of length `horizon`.
pub fn check_q_monotone_random(
    params: &SolitonParams,
    count: usize,
    seed: u64,
    horizon: f64,
    options: &IntegrationOptions,
) -> Result<QSuiteReport> {
    let starts = random_points(&SampleBox::default(), count, seed);
    let reports: Vec<Result<QReport>> = starts
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let t1 = if i % 2 == 0 { horizon } else { -horizon };
            let traj = integrate(params, *p, (0.0, t1), options, &[])?;
            check_q_monotone(&traj)
        })
        .collect();
    let mut out = QSuiteReport {
        runs: count,
        seed,
        violations: 0,
        max_violation: 0.0,
        fd_max_error: 0.0,
    };
    for r in reports {
        let r = r?;
        out.violations += r.violations;
        out.max_violation = out.max_violation.max(r.max_violation);
        out.fd_max_error = out.fd_max_error.max(r.fd_max_error);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignPropagationReport {
    pub starts: usize,
    pub seed: u64,
    /// Forward runs from `x = 0, y <= 0, dx/dt > 0` that reached `x > 1`.
    pub reached: usize,
    /// Reflected starts integrated backward that reached `x < -1`.
    pub mirrored_reached: usize,
    /// `sup |x|` along a start on `{x = 0, dx/dt = 0}` over `t in [0, 5]`.
    pub plane_drift: f64,
}

impl SignPropagationReport {
    pub fn passed(&self) -> bool {
        self.reached == self.starts && self.mirrored_reached == self.starts && self.plane_drift < 1e-8
    }
}

/// Starts with `x = 0`, `y <= 0` and `dx/dt > 0` must reach `{x > 1}`; their
/// reflections must reach `{x < -1}` backward.
pub fn check_x_sign_propagation(
    params: &SolitonParams,
    count: usize,
    seed: u64,
    options: &IntegrationOptions,
) -> Result<SignPropagationReport> {
    let w0 = params.cylinder_radius();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<PhasePoint> = (0..count)
        .map(|_| {
            let w = rng.gen_range(0.02 * w0..=0.98 * w0);
            let y = rng.gen_range(-5.0..=0.0);
            PhasePoint::new(w, 0.0, y)
        })
        .collect();
    let horizon = 60.0;
    let up = EventSpec::x_crosses(1.0, Crossing::Rising).terminal();
    let results: Vec<Result<(bool, bool)>> = starts
        .par_iter()
        .map(|p| {
            let f = integrate(params, *p, (0.0, horizon), options, &[up])?;
            let b = integrate(params, reflect(p), (0.0, -horizon), options, &[up.reflect()])?;
            let hit_f = f.samples().iter().any(|s| s.x() > 1.0);
            let hit_b = b.samples().iter().any(|s| s.x() < -1.0);
            Ok((hit_f || !f.events().is_empty(), hit_b || !b.events().is_empty()))
        })
        .collect();
    let mut reached = 0;
    let mut mirrored_reached = 0;
    for r in results {
        let (a, b) = r?;
        reached += usize::from(a);
        mirrored_reached += usize::from(b);
    }
    let plane = integrate(params, PhasePoint::new(w0, 0.0, -1.0), (0.0, 5.0), options, &[])?;
    let plane_drift = plane.samples().iter().map(|s| s.x().abs()).fold(0.0, f64::max);
    Ok(SignPropagationReport {
        starts: count,
        seed,
        reached,
        mirrored_reached,
        plane_drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckVerdict {
    Pass,
    Fail,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub verdict: CheckVerdict,
    /// Estimated blow-up time `T`.
    pub t_blowup: f64,
    /// `sup x (T - t)` over the final decade of `x`.
    pub max_scaled_x: f64,
    /// `omega (T - t)^(4/5)` at the start and the end of the final decade.
    pub omega_scaled_start: f64,
    pub omega_scaled_end: f64,
    /// Slope of `log x` against `log (T - t)`; near `-1`.
    pub fitted_exponent: f64,
    /// `exp` of the intercept of that fit: `x ~ c / (T - t)`.
    pub fitted_constant: f64,
    pub fit_residual: f64,
    pub r_terminal: f64,
}

/// Checks the growth bounds near a forward blow-up of `x`:
/// `x (T - t) <= 4/5 + 0.1` and `omega (T - t)^(4/5)` bounded over the final
/// decade, with `T` from `T - t = x / (dx/dt)` at the last sample.
pub fn check_blowup_bound(traj: &Trajectory) -> BlowupReport {
    let mut rep = BlowupReport {
        verdict: CheckVerdict::Undetermined,
        t_blowup: f64::NAN,
        max_scaled_x: f64::NAN,
        omega_scaled_start: f64::NAN,
        omega_scaled_end: f64::NAN,
        fitted_exponent: f64::NAN,
        fitted_constant: f64::NAN,
        fit_residual: f64::NAN,
        r_terminal: traj.last().r(),
    };
    let last = traj.last();
    if traj.termination() != crate::integrate::Termination::BlowupDetected
        || traj.direction() != TimeDirection::Forward
        || !(last.x() > 0.0 && last.dx_dt > 0.0)
    {
        return rep;
    }
    let t_blowup = last.t + last.x() / last.dx_dt;
    rep.t_blowup = t_blowup;

    let tail: Vec<&Sample> = traj
        .samples()
        .iter()
        .filter(|s| s.x() >= last.x() / 1e3 && t_blowup - s.t > 0.0)
        .collect();
    if tail.len() < 4 {
        return rep;
    }
    // least squares of log x on log (T - t)
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .map(|s| ((t_blowup - s.t).ln(), s.x().ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let resid = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    rep.fitted_exponent = slope;
    rep.fitted_constant = intercept.exp();
    rep.fit_residual = resid;

    let decade: Vec<&Sample> = tail
        .iter()
        .copied()
        .filter(|s| s.x() >= last.x() / 10.0)
        .collect();
    if decade.len() < 2 || !(resid < 0.05) {
        return rep;
    }
    rep.max_scaled_x = decade
        .iter()
        .map(|s| s.x() * (t_blowup - s.t))
        .fold(0.0, f64::max);
    let w_scaled = |s: &Sample| s.omega() * (t_blowup - s.t).powf(0.8);
    rep.omega_scaled_start = w_scaled(decade[0]);
    rep.omega_scaled_end = w_scaled(decade[decade.len() - 1]);
    let omega_bounded = rep.omega_scaled_end.is_finite()
        && rep.omega_scaled_end <= rep.omega_scaled_start * (1.0 + 1e-9);
    rep.verdict = if rep.max_scaled_x <= 0.9 && omega_bounded && rep.r_terminal.is_finite() {
        CheckVerdict::Pass
    } else {
        CheckVerdict::Fail
    };
    rep
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YDivergenceReport {
    pub direction: TimeDirection,
    /// `-1 < x < 1` at every sample.
    pub bounded_x: bool,
    pub y_end: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// On a run with `-1 < x < 1` throughout, `y` must pass below `-threshold`
/// (forward) or above `threshold` (backward) by the end of the run.
pub fn check_y_divergence(traj: &Trajectory, threshold: f64) -> YDivergenceReport {
    let bounded_x = traj.samples().iter().all(|s| s.x().abs() < 1.0);
    let y_end = traj.last().y();
    let passed = bounded_x
        && match traj.direction() {
            TimeDirection::Forward => y_end < -threshold,
            TimeDirection::Backward => y_end > threshold,
        };
    YDivergenceReport {
        direction: traj.direction(),
        bounded_x,
        y_end,
        threshold,
        passed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimsupReport {
    pub delta: f64,
    /// `max x` over the last unit of `t`.
    pub final_unit_max_x: f64,
    pub passed: bool,
}

/// Finite-horizon form of `limsup x >= 0` on forward-complete runs: `x` may
/// not stay below `-delta` over the whole last unit of `t`.
pub fn check_limsup_x(traj: &Trajectory, delta: f64) -> LimsupReport {
    let t_end = traj.last().t;
    let sign = traj.direction().sign();
    let final_unit_max_x = traj
        .samples()
        .iter()
        .filter(|s| sign * (t_end - s.t) <= 1.0)
        .map(|s| s.x())
        .fold(f64::NEG_INFINITY, f64::max);
    LimsupReport {
        delta,
        final_unit_max_x,
        passed: final_unit_max_x >= -delta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusReport {
    pub level: f64,
    pub start: PhasePoint,
    pub max_x_deviation: f64,
    pub max_dx_dt: f64,
    pub passed: bool,
}

/// A start on `{x = c, dx/dt = 0}` for `c` in `{-1, 0, 1}` must stay on that
/// locus. For `c = +-1` the start is `(omega, c, c (n - lambda omega^2))`;
/// for `c = 0` it is `(omega0, 0, y0)` with `omega0` the cylinder radius.
pub fn check_invariant_locus(
    params: &SolitonParams,
    level: f64,
    omega_or_y: f64,
    horizon: f64,
    tol: f64,
    options: &IntegrationOptions,
) -> Result<LocusReport> {
    let n = params.nf();
    let start = if level == 0.0 {
        PhasePoint::new(params.cylinder_radius(), 0.0, omega_or_y)
    } else if level.abs() == 1.0 {
        let w = omega_or_y;
        PhasePoint::new(w, level, level * (n - params.lambda() * w * w))
    } else {
        return Err(Error::InvalidRequest(format!(
            "invariant x-levels are -1, 0 and 1, got {level}"
        )));
    };
    let traj = integrate(params, start, (0.0, horizon), options, &[])?;
    let max_x_deviation = traj
        .samples()
        .iter()
        .map(|s| (s.x() - level).abs())
        .fold(0.0, f64::max);
    let max_dx_dt = traj
        .samples()
        .iter()
        .map(|s| s.dx_dt.abs())
        .fold(0.0, f64::max);
    Ok(LocusReport {
        level,
        start,
        max_x_deviation,
        max_dx_dt,
        passed: max_x_deviation < tol && max_dx_dt < tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub runs: usize,
    pub seed: u64,
    /// Largest pointwise deviation between the reflected run and the run
    /// from the reflected start, relative to `max(1, |value|)`.
    pub max_deviation: f64,
    pub tag_mismatches: usize,
}

impl DualityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation < tol && self.tag_mismatches == 0
    }
}

fn rel_dev(a: &PhasePoint, b: &PhasePoint) -> f64 {
    [(a.omega, b.omega), (a.x, b.x), (a.y, b.y)]
        .iter()
        .map(|(u, v)| (u - v).abs() / v.abs().max(1.0))
        .fold(0.0, f64::max)
}

/// Compares, for random starts `p`, the two-sided orbit through `p` after
/// reflection and time reversal with the orbit through `L(p)`.
pub fn check_reflection_duality(
    params: &SolitonParams,
    count: usize,
    seed: u64,
    orbit: &OrbitOptions,
) -> Result<DualityReport> {
    let starts = random_points(&SampleBox::default(), count, seed);
    let results: Vec<Result<(f64, bool)>> = starts
        .par_iter()
        .map(|p| {
            let o = integrate_orbit(params, *p, orbit)?;
            let m = integrate_orbit(params, Start::from(*p).reflect(), orbit)?;
            let refl = o.reflected();
            let mut dev = 0.0f64;
            for (a, b) in [(&refl.forward, &m.forward), (&refl.backward, &m.backward)] {
                for s in b.samples() {
                    if let Some(q) = a.eval(s.t) {
                        dev = dev.max(rel_dev(&q.point(), &s.point()));
                    }
                }
            }
            let same = classify(&o).tag.reflect() == classify(&m).tag;
            Ok((dev, same))
        })
        .collect();
    let mut rep = DualityReport {
        runs: count,
        seed,
        max_deviation: 0.0,
        tag_mismatches: 0,
    };
    for r in results {
        let (d, same) = r?;
        rep.max_deviation = rep.max_deviation.max(d);
        rep.tag_mismatches += usize::from(!same);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Termination;
    use crate::phase::forward_preserved_regions;

    fn p2() -> SolitonParams {
        SolitonParams::new(2, 1.0).unwrap()
    }

    #[test]
    fn y_nonpositive_region_small() {
        let cfg = RegionCheckConfig {
            starts: 10,
            ..Default::default()
        };
        let rep = check_region_preserved(&p2(), &forward_preserved_regions()[2], &cfg).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn q_on_cylinder() {
        let tr = integrate(&p2(), PhasePoint::new(1.0, 0.0, 0.0), (0.0, 5.0), &IntegrationOptions::default(), &[]).unwrap();
        let rep = check_q_monotone(&tr).unwrap();
        assert!(rep.passed());
        assert!((rep.q_end + 5.0).abs() < 1e-9);
        assert!(rep.fd_max_error < 1e-6);
    }

    #[test]
    fn blowup_example() {
        let tr = integrate(&p2(), PhasePoint::new(0.1, 1.5, -1.0), (0.0, 50.0), &IntegrationOptions::default(), &[]).unwrap();
        assert_eq!(tr.termination(), Termination::BlowupDetected);
        let rep = check_blowup_bound(&tr);
        assert_eq!(rep.verdict, CheckVerdict::Pass, "{rep:?}");
        assert!(rep.fitted_constant > 0.0 && rep.fitted_constant <= 0.8);
        assert!((rep.fitted_exponent + 1.0).abs() < 0.05);
    }

    #[test]
    fn sign_propagation_example() {
        let o = IntegrationOptions::default();
        let tr = integrate(&p2(), PhasePoint::new(0.5, 0.0, -1.0), (0.0, 60.0), &o, &[]).unwrap();
        assert!(tr.samples().iter().any(|s| s.x() > 1.0));
    }
}
