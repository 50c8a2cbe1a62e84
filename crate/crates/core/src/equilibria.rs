//! Equilibria `P0 = (0, 1, n)` and `P1 = (0, -1, -n)`, their linearizations, and
//! seeding of trajectories on the invariant manifolds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{jacobian, reflect, Matrix3, PhasePoint, SolitonParams};

/// Largest seeding displacement accepted by [`unstable_seed`].
pub const MAX_SEED_DELTA: f64 = 1e-4;

/// Default seeding displacement.
pub const DEFAULT_DELTA: f64 = 1e-6;

/// One of the two equilibria. `P0` is the pole where `omega' -> 1`, `P1`
/// the pole where `omega' -> -1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pole {
    P0,
    P1,
}

impl Pole {
    /// `+1` for `P0`, `-1` for `P1`: the limiting value of `x`.
    pub fn sign(self) -> f64 {
        match self {
            Pole::P0 => 1.0,
            Pole::P1 => -1.0,
        }
    }

    pub fn point(self, params: &SolitonParams) -> PhasePoint {
        let s = self.sign();
        PhasePoint::new(0.0, s, s * params.nf())
    }

    pub fn reflect(self) -> Self {
        match self {
            Pole::P0 => Pole::P1,
            Pole::P1 => Pole::P0,
        }
    }
}

/// Linearization data at an equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub pole: Pole,
    pub point: PhasePoint,
    pub jacobian: Matrix3,
    /// Sorted descending.
    pub eigenvalues: [f64; 3],
    /// Unit eigenvectors, `eigenvectors[k]` paired with `eigenvalues[k]`.
    pub eigenvectors: [[f64; 3]; 3],
}

impl EquilibriumData {
    /// `max_k |J v_k - mu_k v_k|`.
    pub fn max_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (mu, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for r in 0..3 {
                let jv: f64 = (0..3).map(|c| self.jacobian[r][c] * v[c]).sum();
                worst = worst.max((jv - mu * v[r]).abs());
            }
        }
        worst
    }
}

/// Eigendata at `P0` and `P1`.
pub fn equilibrium_points(params: &SolitonParams) -> (EquilibriumData, EquilibriumData) {
    (equilibrium(params, Pole::P0), equilibrium(params, Pole::P1))
}

pub fn equilibrium(params: &SolitonParams, pole: Pole) -> EquilibriumData {
    let point = pole.point(params);
    let j = jacobian(params, &point).expect("equilibria are finite");
    let (eigenvalues, eigenvectors) = decoupled_eigensystem(&j);
    EquilibriumData {
        pole,
        point,
        jacobian: j,
        eigenvalues,
        eigenvectors,
    }
}

/// Eigensystem of a Jacobian taken on `{omega = 0}`, where the `omega`
/// direction decouples from the `(x, y)` block.
fn decoupled_eigensystem(j: &Matrix3) -> ([f64; 3], [[f64; 3]; 3]) {
    let (a, b, c, d) = (j[1][1], j[1][2], j[2][1], j[2][2]);
    let tr = a + d;
    let det = a * d - b * c;
    let root = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let mut pairs: Vec<(f64, [f64; 3])> = Vec::with_capacity(3);
    pairs.push((j[0][0], [1.0, 0.0, 0.0]));
    for mu in [(tr + root) / 2.0, (tr - root) / 2.0] {
        let v1 = [b, mu - a];
        let v2 = [mu - d, c];
        let n1 = v1[0].hypot(v1[1]);
        let n2 = v2[0].hypot(v2[1]);
        let (v, nv) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        // orient with a non-negative x component
        let s = if v[0] < 0.0 { -1.0 } else { 1.0 };
        pairs.push((mu, [0.0, s * v[0] / nv, s * v[1] / nv]));
    }
    pairs.sort_by(|l, r| r.0.total_cmp(&l.0));
    (
        [pairs[0].0, pairs[1].0, pairs[2].0],
        [pairs[0].1, pairs[1].1, pairs[2].1],
    )
}

/// A seed point given as an exact offset from an equilibrium.
///
/// Offsets of size `1e-6` and below are far below the spacing of doubles
/// near `(1, n)`; keeping them separate lets the integrator start from the
/// intended point rather than its rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub pole: Pole,
    pub base: PhasePoint,
    pub offset: [f64; 3],
}

impl Seed {
    /// The seed as a (rounded) phase point.
    pub fn point(&self) -> PhasePoint {
        PhasePoint::new(
            self.base.omega + self.offset[0],
            self.base.x + self.offset[1],
            self.base.y + self.offset[2],
        )
    }

    pub fn reflect(&self) -> Seed {
        Seed {
            pole: self.pole.reflect(),
            base: reflect(&self.base),
            offset: [self.offset[0], -self.offset[1], -self.offset[2]],
        }
    }
}

fn check_seed_args(theta: f64, delta: f64) -> Result<()> {
    if !theta.is_finite() || theta <= -std::f64::consts::PI || theta > std::f64::consts::PI {
        return Err(Error::Domain(format!("theta must lie in (-pi, pi], got {theta}")));
    }
    if !(delta.is_finite() && delta > 0.0 && delta <= MAX_SEED_DELTA) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, {MAX_SEED_DELTA}], got {delta}"
        )));
    }
    Ok(())
}

/// `P0 + delta (cos(theta) u1 + sin(theta) u2)` with `u1 = (1, 0, 0)` and
/// `u2 = (0, 1, -n) / sqrt(1 + n^2)` spanning the unstable subspace at `P0`.
pub fn unstable_seed(params: &SolitonParams, theta: f64, delta: f64) -> Result<Seed> {
    check_seed_args(theta, delta)?;
    let n = params.nf();
    let mut c = theta.cos();
    if c.abs() < 1e-15 {
        c = 0.0;
    }
    let s = theta.sin();
    let u2 = 1.0 / (1.0 + n * n).sqrt();
    let offset = [delta * c, delta * s * u2, -delta * s * n * u2];
    if params.is_steady() {
        if offset[0] != 0.0 {
            return Err(Error::Domain(format!(
                "steady runs need seeds in the plane omega = 0 (theta = +-pi/2), got theta = {theta}"
            )));
        }
    } else if offset[0] < 0.0 {
        return Err(Error::Domain(format!(
            "seed has omega < 0 (theta = {theta}); only cos(theta) >= 0 is admissible"
        )));
    }
    Ok(Seed {
        pole: Pole::P0,
        base: Pole::P0.point(params),
        offset,
    })
}

/// Reflection of [`unstable_seed`]: a seed near `P1` on its stable manifold,
/// meant for backward integration.
pub fn stable_seed(params: &SolitonParams, theta: f64, delta: f64) -> Result<Seed> {
    unstable_seed(params, theta, delta).map(|s| s.reflect())
}

/// Shape coefficient of an unstable seed: the ratio of its `u2` coordinate
/// (along the unnormalized `(0, 1, -n)`) to the square of its `omega`
/// coordinate. Trajectories leaving `P0` are labelled by this ratio;
/// the flat trajectory has `lambda / (n + 1)` and the round sphere
/// `lambda (n - 1) / (2 n (n + 1))`.
pub fn seed_shape(params: &SolitonParams, theta: f64, delta: f64) -> f64 {
    let n = params.nf();
    let c = theta.cos();
    theta.sin() / ((1.0 + n * n).sqrt() * delta * c * c)
}

/// Inverse of [`seed_shape`] on `theta in (-pi/2, pi/2)`.
pub fn theta_for_shape(params: &SolitonParams, shape: f64, delta: f64) -> f64 {
    // sin(theta) / cos^2(theta) = k  =>  k s^2 + s - k = 0
    let k = shape * (1.0 + params.nf().powi(2)).sqrt() * delta;
    if k == 0.0 {
        return 0.0;
    }
    let s = 2.0 * k / (1.0 + (1.0 + 4.0 * k * k).sqrt());
    s.asin()
}

/// Shape coefficient of the flat trajectory `x = 1`.
pub fn flat_shape(params: &SolitonParams) -> f64 {
    params.lambda() / (params.nf() + 1.0)
}
