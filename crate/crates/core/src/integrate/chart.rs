//! Anchored coordinates for the phase system.
//!
//! The state is carried as `u = [xi, s, e, omega, r, f]` where, for an anchor
//! `a = +-1`,
//!
//! ```text
//! x  = a + xi
//! s  = y - n x
//! e  = n x^2 + lambda omega^2 - n
//! ```
//!
//! The round sphere lies on `{s = 0, e = 0}`, the flat lines on `{xi = 0,
//! s = -e}` and the cylinder on `{x = 0, e = -1}`, and on each of these loci
//! the chart field vanishes in the transverse components identically in
//! floating point. In `(omega, x, y)` the same loci are strongly repelling
//! and the integration error grows like `exp(int lambda omega^2 dt)`.
//!
//! `omega` rides along with `d omega/dt = x omega`. The anchor is re-chosen
//! between steps so that `xi` stays small near whichever of `x = +-1` is closer.

use crate::equilibria::Seed;
use crate::phase::{PhasePoint, SolitonParams};

use super::AugmentedState;

pub(crate) const DIM: usize = 6;
pub(crate) type Vec6 = [f64; DIM];

pub(crate) const XI: usize = 0;
pub(crate) const S: usize = 1;
pub(crate) const E: usize = 2;
pub(crate) const W: usize = 3;
pub(crate) const R: usize = 4;
pub(crate) const F: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Chart {
    pub n: f64,
    pub lambda: f64,
    pub anchor: f64,
}

pub(crate) fn anchor_for(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

impl Chart {
    pub fn new(params: &SolitonParams, anchor: f64) -> Self {
        Self {
            n: params.nf(),
            lambda: params.lambda(),
            anchor,
        }
    }

    pub fn encode(params: &SolitonParams, st: &AugmentedState) -> (Chart, Vec6) {
        let p = st.p;
        let chart = Chart::new(params, anchor_for(p.x));
        let a = chart.anchor;
        let n = chart.n;
        let xi = p.x - a;
        let u = [
            xi,
            p.y - n * p.x,
            snap_level(n * xi * (xi + 2.0 * a) + chart.lambda * p.omega * p.omega, n),
            p.omega,
            st.r,
            st.f,
        ];
        (chart, u)
    }

    /// Encodes a seed from its exact offset so that displacements far below
    /// the double spacing near the equilibrium survive.
    pub fn encode_seed(params: &SolitonParams, seed: &Seed, r: f64, f: f64) -> (Chart, Vec6) {
        let a = seed.pole.sign();
        let chart = Chart::new(params, a);
        let n = chart.n;
        let [dw, dx, dy] = seed.offset;
        let w = seed.base.omega + dw;
        let u = [
            dx,
            dy - n * dx,
            n * dx * (dx + 2.0 * a) + chart.lambda * w * w,
            w,
            r,
            f,
        ];
        (chart, u)
    }

    #[inline]
    pub fn x(&self, u: &Vec6) -> f64 {
        self.anchor + u[XI]
    }

    #[inline]
    pub fn x_sq_m1(&self, u: &Vec6) -> f64 {
        u[XI] * (u[XI] + 2.0 * self.anchor)
    }

    #[inline]
    pub fn y(&self, u: &Vec6) -> f64 {
        u[S] + self.n * self.x(u)
    }

    /// `x - c`, exact when `c` is the anchor.
    #[inline]
    pub fn x_minus(&self, u: &Vec6, c: f64) -> f64 {
        if c == self.anchor {
            u[XI]
        } else {
            (self.anchor - c) + u[XI]
        }
    }

    #[inline]
    pub fn dx_dt(&self, u: &Vec6) -> f64 {
        let x = self.x(u);
        self.x_sq_m1(u) - (u[E] + x * u[S])
    }

    pub fn point(&self, u: &Vec6) -> PhasePoint {
        PhasePoint::new(u[W], self.x(u), self.y(u))
    }

    /// Distance from `(omega, x, y)` to `(0, sigma, sigma n)`.
    pub fn distance_to_pole(&self, u: &Vec6, sigma: f64) -> f64 {
        let dx = self.x_minus(u, sigma);
        let dy = u[S] + self.n * dx;
        (u[W] * u[W] + dx * dx + dy * dy).sqrt()
    }

    #[inline]
    pub fn field(&self, u: &Vec6) -> Vec6 {
        let n = self.n;
        let x = self.x(u);
        let s = u[S];
        let e = u[E];
        let c = e + x * s;
        [
            self.x_sq_m1(u) - c,
            (n - 1.0) * c + 2.0 * x * s,
            2.0 * x * (e - n * c),
            x * u[W],
            u[W],
            -s,
        ]
    }

    /// Re-selects the anchor for the current `x`; returns whether it changed.
    pub fn reanchor(&mut self, u: &mut Vec6) -> bool {
        let a = anchor_for(self.x(u));
        if a == self.anchor {
            return false;
        }
        u[XI] += self.anchor - a;
        self.anchor = a;
        true
    }

    /// Image of a chart state under `(omega, x, y) -> (omega, -x, -y)`
    /// composed with time reversal.
    pub fn reflect(&self, u: &Vec6) -> (Chart, Vec6) {
        (
            Chart {
                anchor: -self.anchor,
                ..*self
            },
            reflect_components(u),
        )
    }
}

/// Puts `e` exactly on the ellipse level `0` or the cylinder level `-1` when
/// it is within rounding of them, so that starts such as
/// `omega = sqrt((n - 1) / lambda)` sit on the invariant locus they denote.
fn snap_level(e: f64, n: f64) -> f64 {
    let tol = 8.0 * f64::EPSILON * (n + 1.0);
    if e.abs() <= tol {
        0.0
    } else if (e + 1.0).abs() <= tol {
        -1.0
    } else {
        e
    }
}

pub(crate) const REFLECT_SIGNS: Vec6 = [-1.0, -1.0, 1.0, 1.0, -1.0, 1.0];

pub(crate) fn reflect_components(u: &Vec6) -> Vec6 {
    let mut v = *u;
    for (vi, s) in v.iter_mut().zip(REFLECT_SIGNS) {
        *vi *= s;
    }
    v
}
