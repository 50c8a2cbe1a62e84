//! Radial metric profiles recovered from phase trajectories.
//!
//! A trajectory gives `r` and `f` by quadrature, `omega' = x` and
//! `f' = (n x - y) / omega`. The sectional curvatures are
//! `nu1 = -(dx/dt) / omega^2` on radial planes and `nu2 = (1 - x^2) / omega^2`
//! on planes tangent to the spheres, and the scalar curvature is
//! `R = 2 n nu1 + n (n - 1) nu2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Sample, Trajectory};
use crate::phase::{field, PhasePoint, SolitonParams, TimeDirection};

/// Radial data on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricProfile {
    pub params: SolitonParams,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub omega: Vec<f64>,
    /// `d omega / dr`.
    pub x: Vec<f64>,
    pub fprime: Vec<f64>,
    /// Zero at the first sample of the source trajectory.
    pub f: Vec<f64>,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub scalar: Vec<f64>,
}

impl MetricProfile {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// `(nu1, nu2)` at `p`.
pub fn sectional_curvatures(params: &SolitonParams, p: &PhasePoint) -> Result<(f64, f64)> {
    p.ensure_finite()?;
    if p.omega <= 0.0 {
        return Err(Error::Domain(format!(
            "curvatures need omega > 0, got {}",
            p.omega
        )));
    }
    let w2 = p.omega * p.omega;
    let dx = field(params, p).d_x;
    Ok((-dx / w2, (1.0 - p.x * p.x) / w2))
}

/// `2 n nu1 + n (n - 1) nu2`.
pub fn scalar_curvature(params: &SolitonParams, nu1: f64, nu2: f64) -> f64 {
    let n = params.nf();
    2.0 * n * nu1 + n * (n - 1.0) * nu2
}

/// Profile from the accepted-step samples of `traj`, with `r` shifted so
/// the first sample sits at `r_anchor`.
pub fn reconstruct_profile(traj: &Trajectory, r_anchor: f64) -> Result<MetricProfile> {
    profile_from_samples(traj.params(), traj.samples(), r_anchor)
}

/// Profile from `count` dense-output samples evenly spaced in `t`.
pub fn reconstruct_profile_dense(
    traj: &Trajectory,
    r_anchor: f64,
    count: usize,
) -> Result<MetricProfile> {
    profile_from_samples(traj.params(), &traj.resample(count), r_anchor)
}

/// Profile from samples in traversal order. Samples whose `r` does not
/// advance are dropped so the grid is strictly increasing.
pub fn profile_from_samples(
    params: &SolitonParams,
    samples: &[Sample],
    r_anchor: f64,
) -> Result<MetricProfile> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidRequest("no samples to reconstruct".into()))?;
    if let Some(bad) = samples.iter().find(|s| !(s.omega() > 0.0)) {
        return Err(Error::Domain(format!(
            "reconstruction needs omega > 0, got {} at t = {}",
            bad.omega(),
            bad.t
        )));
    }
    let (r0, f0) = (first.r(), first.f());
    let backward = samples.len() > 1 && samples[samples.len() - 1].r() < r0;
    let ordered: Vec<&Sample> = if backward {
        samples.iter().rev().collect()
    } else {
        samples.iter().collect()
    };

    let n = params.nf();
    let mut out = MetricProfile {
        params: *params,
        t: Vec::new(),
        r: Vec::new(),
        omega: Vec::new(),
        x: Vec::new(),
        fprime: Vec::new(),
        f: Vec::new(),
        nu1: Vec::new(),
        nu2: Vec::new(),
        scalar: Vec::new(),
    };
    for s in ordered {
        let r = s.r() - r0 + r_anchor;
        if out.r.last().is_some_and(|&last| r <= last) {
            continue;
        }
        let w = s.omega();
        let w2 = w * w;
        let nu1 = -s.dx_dt / w2;
        let nu2 = s.one_minus_x_sq / w2;
        out.t.push(s.t);
        out.r.push(r);
        out.omega.push(w);
        out.x.push(s.x());
        out.fprime.push(-s.y_minus_nx / w);
        out.f.push(s.f() - f0);
        out.nu1.push(nu1);
        out.nu2.push(nu2);
        out.scalar.push(2.0 * n * nu1 + n * (n - 1.0) * nu2);
    }
    Ok(out)
}

/// Finite-difference weights for the `m`-th derivative at `z` from values at
/// `nodes` (Fornberg's recursion).
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let np = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; np];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..np {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Residuals of the radial soliton equations
///
/// ```text
/// res1 = f'' - lambda - n omega'' / omega
/// res2 = omega omega' f' - lambda omega^2 - omega omega'' - (n - 1)(omega'^2 - 1)
/// ```
///
/// at interior grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonResidual {
    pub r: Vec<f64>,
    pub res1: Vec<f64>,
    pub res2: Vec<f64>,
}

impl SolitonResidual {
    pub fn max_abs(&self) -> f64 {
        self.res1
            .iter()
            .chain(&self.res2)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Evaluates the radial equations on `profile`. `omega''` and `f''` are the
/// five-point centered derivatives of the `x` and `fprime` columns on the
/// (generally nonuniform) grid; the two points at each end are skipped.
pub fn soliton_residual(params: &SolitonParams, profile: &MetricProfile) -> Result<SolitonResidual> {
    let len = profile.len();
    if len < 5 {
        return Err(Error::InvalidRequest(format!(
            "residuals need at least 5 grid points, got {len}"
        )));
    }
    let n = params.nf();
    let lambda = params.lambda();
    let mut out = SolitonResidual {
        r: Vec::with_capacity(len - 4),
        res1: Vec::with_capacity(len - 4),
        res2: Vec::with_capacity(len - 4),
    };
    for i in 2..len - 2 {
        let nodes = &profile.r[i - 2..=i + 2];
        let w = fd_weights(profile.r[i], nodes, 1);
        let d = |col: &[f64]| -> f64 { (0..5).map(|k| w[k] * col[i - 2 + k]).sum() };
        let wpp = d(&profile.x);
        let fpp = d(&profile.fprime);
        let om = profile.omega[i];
        let wp = profile.x[i];
        let fp = profile.fprime[i];
        out.r.push(profile.r[i]);
        out.res1.push(fpp - lambda - n * wpp / om);
        out.res2
            .push(om * wp * fp - lambda * om * om - om * wpp - (n - 1.0) * (wp * wp - 1.0));
    }
    Ok(out)
}

/// `R + f'^2 - 2 lambda f` at each grid point; constant along solitons.
pub fn hamilton_identity(params: &SolitonParams, profile: &MetricProfile) -> Vec<f64> {
    let lambda = params.lambda();
    profile
        .scalar
        .iter()
        .zip(&profile.fprime)
        .zip(&profile.f)
        .map(|((r, fp), f)| r + fp * fp - 2.0 * lambda * f)
        .collect()
}

/// Verdict on whether a trajectory end closes up smoothly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleVerdict {
    /// `omega -> 0` with `omega' -> sign`.
    SmoothPole(i8),
    NotAPole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub end: TimeDirection,
    pub omega_limit: f64,
    pub x_limit: f64,
    pub verdict: PoleVerdict,
}

/// Tolerance on the extrapolated limits for a [`PoleVerdict::SmoothPole`].
pub const POLE_TOL: f64 = 1e-3;

fn aitken(a0: f64, a1: f64, a2: f64) -> f64 {
    let d1 = a1 - a0;
    let d2 = a2 - a1;
    let den = d2 - d1;
    if den == 0.0 || !den.is_finite() {
        return a2;
    }
    let lim = a2 - d2 * d2 / den;
    // Aitken is only trusted when the differences shrink geometrically
    if lim.is_finite() && d2.abs() < d1.abs() {
        lim
    } else {
        a2
    }
}

/// Extrapolates `(omega, x)` at the terminal end of `traj` and checks the
/// first-order smoothness conditions `omega -> 0`, `omega' -> +-1`.
pub fn smoothness_check(traj: &Trajectory) -> SmoothnessReport {
    let last = traj.last();
    let t_end = last.t;
    let span = (t_end - traj.first().t).abs();
    let dt = span.min(3.0) / 2.0;
    let sign = traj.direction().sign();
    let pick = |k: f64| traj.eval(t_end - sign * k * dt);
    let (omega_limit, x_limit) = match (pick(2.0), pick(1.0)) {
        (Some(a), Some(b)) if dt > 0.0 => (
            aitken(a.omega(), b.omega(), last.omega()),
            aitken(a.x(), b.x(), last.x()),
        ),
        _ => (last.omega(), last.x()),
    };
    let verdict = if omega_limit.is_finite()
        && x_limit.is_finite()
        && omega_limit.abs() < POLE_TOL
        && (x_limit.abs() - 1.0).abs() < POLE_TOL
    {
        PoleVerdict::SmoothPole(if x_limit > 0.0 { 1 } else { -1 })
    } else {
        PoleVerdict::NotAPole
    };
    SmoothnessReport {
        end: traj.direction(),
        omega_limit,
        x_limit,
        verdict,
    }
}
