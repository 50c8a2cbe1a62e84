use serde::{Deserialize, Serialize};

use crate::equilibria::Pole;
use crate::error::{Error, Result};
use crate::phase::PhasePoint;

use super::chart::{Chart, Vec6, W};
use super::dopri::interpolate;

/// Localization target for event times.
pub const EVENT_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `x - c`.
    XCrosses(f64),
    /// `dx/dt`.
    DxDtCrossesZero,
    /// `y`.
    YCrossesZero,
    /// Distance to the pole minus the radius; falls on entry.
    NearEquilibrium(Pole, f64),
    /// `omega - floor`.
    OmegaBelow(f64),
    /// `|x| - ceiling`.
    AbsXAbove(f64),
}

/// Sense of a crossing, taken along the order in which the trajectory is
/// traversed (so "rising" in a backward run means increasing as `t` decreases).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    Rising,
    Falling,
    Any,
}

impl Crossing {
    fn flip(self) -> Self {
        match self {
            Crossing::Rising => Crossing::Falling,
            Crossing::Falling => Crossing::Rising,
            Crossing::Any => Crossing::Any,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: EventKind,
    pub direction: Crossing,
    /// Stop the integration at the first occurrence.
    pub terminal: bool,
}

impl EventSpec {
    pub fn new(kind: EventKind, direction: Crossing) -> Self {
        Self {
            kind,
            direction,
            terminal: false,
        }
    }

    pub fn x_crosses(c: f64, direction: Crossing) -> Self {
        Self::new(EventKind::XCrosses(c), direction)
    }

    pub fn dx_dt_zero(direction: Crossing) -> Self {
        Self::new(EventKind::DxDtCrossesZero, direction)
    }

    pub fn y_zero(direction: Crossing) -> Self {
        Self::new(EventKind::YCrossesZero, direction)
    }

    /// Fires when the trajectory enters the ball of `radius` about `pole`.
    pub fn near(pole: Pole, radius: f64) -> Self {
        Self::new(EventKind::NearEquilibrium(pole, radius), Crossing::Falling)
    }

    pub fn omega_below(floor: f64) -> Self {
        Self::new(EventKind::OmegaBelow(floor), Crossing::Falling)
    }

    pub fn abs_x_above(ceiling: f64) -> Self {
        Self::new(EventKind::AbsXAbove(ceiling), Crossing::Rising)
    }

    pub fn terminal(mut self) -> Self {
        self.terminal = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            EventKind::XCrosses(c) => c.is_finite(),
            EventKind::DxDtCrossesZero | EventKind::YCrossesZero => true,
            EventKind::NearEquilibrium(_, rho) => rho.is_finite() && rho > 0.0,
            EventKind::OmegaBelow(v) | EventKind::AbsXAbove(v) => v.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRequest(format!(
                "event threshold must be finite (and radii positive): {:?}",
                self.kind
            )))
        }
    }

    /// The same event seen on the reflected, time-reversed trajectory.
    pub fn reflect(&self) -> Self {
        let (kind, flips) = match self.kind {
            EventKind::XCrosses(c) => (EventKind::XCrosses(-c), true),
            EventKind::YCrossesZero => (EventKind::YCrossesZero, true),
            EventKind::NearEquilibrium(p, rho) => (EventKind::NearEquilibrium(p.reflect(), rho), false),
            k => (k, false),
        };
        Self {
            kind,
            direction: if flips {
                self.direction.flip()
            } else {
                self.direction
            },
            terminal: self.terminal,
        }
    }

    pub(crate) fn value(&self, chart: &Chart, u: &Vec6) -> f64 {
        match self.kind {
            EventKind::XCrosses(c) => chart.x_minus(u, c),
            EventKind::DxDtCrossesZero => chart.dx_dt(u),
            EventKind::YCrossesZero => chart.y(u),
            EventKind::NearEquilibrium(pole, rho) => chart.distance_to_pole(u, pole.sign()) - rho,
            EventKind::OmegaBelow(v) => u[W] - v,
            EventKind::AbsXAbove(v) => chart.x(u).abs() - v,
        }
    }

    fn fires(&self, g_prev: f64, g_next: f64) -> bool {
        let rising = g_prev < 0.0 && g_next >= 0.0;
        let falling = g_prev > 0.0 && g_next <= 0.0;
        match self.direction {
            Crossing::Rising => rising,
            Crossing::Falling => falling,
            Crossing::Any => rising || falling,
        }
    }
}

/// An event occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    /// Position of the spec in the list passed to the integrator.
    pub index: usize,
    pub spec: EventSpec,
    pub point: PhasePoint,
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DenseStep {
    pub t0: f64,
    /// Signed step; negative for backward runs.
    pub h: f64,
    pub chart: Chart,
    pub coeffs: [Vec6; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn at_theta(&self, theta: f64) -> Vec6 {
        interpolate(&self.coeffs, theta)
    }

    pub fn theta_of(&self, t: f64) -> f64 {
        ((t - self.t0) / self.h).clamp(0.0, 1.0)
    }

    /// First firing of `spec` within this step given the value `g_start` at its
    /// start. Returns `theta*` localized to `EVENT_TIME_TOL` in `t`, on the far
    /// side of the crossing.
    pub fn find(&self, spec: &EventSpec, g_start: f64) -> Option<f64> {
        const GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
        let mut th_prev = 0.0;
        let mut g_prev = g_start;
        for &th in &GRID {
            let g = spec.value(&self.chart, &self.at_theta(th));
            if spec.fires(g_prev, g) {
                return Some(self.refine(spec, th_prev, th, g_prev));
            }
            th_prev = th;
            g_prev = g;
        }
        None
    }

    fn refine(&self, spec: &EventSpec, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
        let before = g_lo.signum();
        for _ in 0..200 {
            if (hi - lo) * self.h.abs() <= EVENT_TIME_TOL {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = spec.value(&self.chart, &self.at_theta(mid));
            if g.signum() == before && g != 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_rules() {
        let s = EventSpec::x_crosses(0.0, Crossing::Rising);
        assert!(s.fires(-1.0, 0.0));
        assert!(s.fires(-1.0, 1.0));
        assert!(!s.fires(0.0, 1.0));
        assert!(!s.fires(1.0, -1.0));
        let f = EventSpec::x_crosses(0.0, Crossing::Falling);
        assert!(f.fires(1.0, 0.0));
        assert!(!f.fires(0.0, 0.0));
        let a = EventSpec::x_crosses(0.0, Crossing::Any);
        assert!(a.fires(1.0, -1.0) && a.fires(-1.0, 1.0));
    }

    #[test]
    fn reflect_is_involution() {
        let specs = [
            EventSpec::x_crosses(1.0, Crossing::Rising),
            EventSpec::y_zero(Crossing::Falling),
            EventSpec::near(Pole::P1, 1e-4).terminal(),
            EventSpec::dx_dt_zero(Crossing::Any),
        ];
        for s in specs {
            assert_eq!(s.reflect().reflect(), s);
        }
        assert_eq!(
            EventSpec::x_crosses(1.0, Crossing::Rising).reflect(),
            EventSpec::x_crosses(-1.0, Crossing::Falling)
        );
    }

    #[test]
    fn validation() {
        assert!(EventSpec::x_crosses(f64::NAN, Crossing::Any).validate().is_err());
        assert!(EventSpec::near(Pole::P0, 0.0).validate().is_err());
        assert!(EventSpec::omega_below(1e-3).validate().is_ok());
    }
}
