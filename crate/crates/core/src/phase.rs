//! The first-order phase system for warped-product shrinking solitons.
//!
//! A metric `dr^2 + omega(r)^2 g_{S^n}` with radial potential `f(r)` is encoded
//! by the phase variables `x = omega'` and `y = n omega' - omega f'`, with a new
//! time `t` defined by `dt = dr / omega`. In these variables the soliton
//! equations become the autonomous system
//!
//! ```text
//! d omega/dt = x omega
//! d x/dt     = x^2 - x y + n - 1 - lambda omega^2
//! d y/dt     = x y - n x^2 - lambda omega^2
//! ```
//!
//! Everything in this module is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 3x3 matrix stored row-major.
pub type Matrix3 = [[f64; 3]; 3];

/// Fiber dimension `n` and shrinking constant `lambda`.
///
/// The `steady` flag restricts dynamics to the invariant plane `{omega = 0}`,
/// where every `lambda omega^2` term vanishes and the `(x, y)` equations are
/// those of the steady soliton system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    n: u32,
    lambda: f64,
    #[serde(default)]
    steady: bool,
}

impl SolitonParams {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n must be >= 2, got {n}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda must be finite and > 0, got {lambda}"
            )));
        }
        Ok(Self {
            n,
            lambda,
            steady: false,
        })
    }

    /// Same `n` and `lambda`, restricted to the steady plane.
    pub fn with_steady(mut self, steady: bool) -> Self {
        self.steady = steady;
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `n` as a float, for use in formulas.
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_steady(&self) -> bool {
        self.steady
    }

    /// Radius `sqrt((n-1)/lambda)` of the standard cylinder.
    pub fn cylinder_radius(&self) -> f64 {
        ((self.nf() - 1.0) / self.lambda).sqrt()
    }

    /// Radius `sqrt(n/lambda)` of the round sphere.
    pub fn sphere_radius(&self) -> f64 {
        (self.nf() / self.lambda).sqrt()
    }
}

/// A state `(omega, x, y)` of the phase system.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub omega: f64,
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub const fn new(omega: f64, x: f64, y: f64) -> Self {
        Self { omega, x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.omega.is_finite() && self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.omega, self.x, self.y]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Euclidean distance in phase space.
    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let d = [
            self.omega - other.omega,
            self.x - other.x,
            self.y - other.y,
        ];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    pub(crate) fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("non-finite phase point {self:?}")))
        }
    }
}

/// Time derivatives of `(omega, x, y)` with respect to the phase time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity {
    pub d_omega: f64,
    pub d_x: f64,
    pub d_y: f64,
}

impl Velocity {
    pub fn to_array(self) -> [f64; 3] {
        [self.d_omega, self.d_x, self.d_y]
    }

    /// Pushforward of the reflection `(omega, x, y) -> (omega, -x, -y)`.
    pub fn reflect(self) -> Self {
        Self {
            d_omega: self.d_omega,
            d_x: -self.d_x,
            d_y: -self.d_y,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.d_omega * self.d_omega + self.d_x * self.d_x + self.d_y * self.d_y).sqrt()
    }
}

impl std::ops::Neg for Velocity {
    type Output = Velocity;

    fn neg(self) -> Velocity {
        Velocity {
            d_omega: -self.d_omega,
            d_x: -self.d_x,
            d_y: -self.d_y,
        }
    }
}

/// Direction of integration in the phase time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeDirection {
    Forward,
    Backward,
}

impl TimeDirection {
    pub fn sign(self) -> f64 {
        match self {
            TimeDirection::Forward => 1.0,
            TimeDirection::Backward => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            TimeDirection::Forward => TimeDirection::Backward,
            TimeDirection::Backward => TimeDirection::Forward,
        }
    }
}

#[inline]
pub(crate) fn field(params: &SolitonParams, p: &PhasePoint) -> Velocity {
    let n = params.nf();
    let lw2 = params.lambda() * p.omega * p.omega;
    Velocity {
        d_omega: p.x * p.omega,
        d_x: p.x * p.x - p.x * p.y + n - 1.0 - lw2,
        d_y: p.x * p.y - n * p.x * p.x - lw2,
    }
}

/// Right-hand side of the phase system at `p`.
pub fn phi(params: &SolitonParams, p: &PhasePoint) -> Result<Velocity> {
    p.ensure_finite()?;
    Ok(field(params, p))
}

/// Exact Jacobian of [`phi`] at `p`, rows and columns ordered `(omega, x, y)`.
pub fn jacobian(params: &SolitonParams, p: &PhasePoint) -> Result<Matrix3> {
    p.ensure_finite()?;
    let n = params.nf();
    let lw = 2.0 * params.lambda() * p.omega;
    Ok([
        [p.x, p.omega, 0.0],
        [-lw, 2.0 * p.x - p.y, -p.x],
        [-lw, p.y - 2.0 * n * p.x, p.x],
    ])
}

/// Second time derivative of `x` along the flow through `p`:
/// `(n-1) x (x^2-1) + (3x - y) dx/dt`.
pub fn x_accel(params: &SolitonParams, p: &PhasePoint) -> Result<f64> {
    p.ensure_finite()?;
    let dx = field(params, p).d_x;
    Ok(x_accel_with(params, p.x, p.y, dx, p.x * p.x - 1.0))
}

/// Third time derivative of `x` along the flow through `p`.
pub fn x_jerk(params: &SolitonParams, p: &PhasePoint) -> Result<f64> {
    p.ensure_finite()?;
    let n = params.nf();
    let dx = field(params, p).d_x;
    let ddx = x_accel_with(params, p.x, p.y, dx, p.x * p.x - 1.0);
    Ok(2.0 * p.x * ((2.0 * n - 1.0) * p.x - p.y) * dx + 2.0 * dx * dx + (3.0 * p.x - p.y) * ddx)
}

/// `x_accel` from precomputed `dx/dt` and `x^2 - 1`, so that callers holding
/// these to better precision than `(omega, x, y)` can use them directly.
pub(crate) fn x_accel_with(params: &SolitonParams, x: f64, y: f64, dx: f64, x_sq_m1: f64) -> f64 {
    (params.nf() - 1.0) * x * x_sq_m1 + (3.0 * x - y) * dx
}

/// The reflection `L(omega, x, y) = (omega, -x, -y)`.
///
/// Composed with time reversal it maps solutions to solutions:
/// `phi(L p) = -L_*(phi(p))`.
pub fn reflect(p: &PhasePoint) -> PhasePoint {
    PhasePoint::new(p.omega, -p.x, -p.y)
}

/// Field of the steady reduction on the plane `{omega = 0}`.
pub fn steady_field(params: &SolitonParams, p: &PhasePoint) -> Result<Velocity> {
    if !params.is_steady() {
        return Err(Error::InvalidParams(
            "steady_field requires parameters with the steady flag".into(),
        ));
    }
    p.ensure_finite()?;
    if p.omega != 0.0 {
        return Err(Error::Domain(format!(
            "steady reduction lives on omega = 0, got omega = {}",
            p.omega
        )));
    }
    let n = params.nf();
    Ok(Velocity {
        d_omega: 0.0,
        d_x: p.x * p.x - p.x * p.y + n - 1.0,
        d_y: p.x * p.y - n * p.x * p.x,
    })
}

/// Quantity a region atom constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Omega,
    X,
    Y,
    DxDt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Le,
    Ge,
}

/// One inequality `quantity <= bound` or `quantity >= bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub quantity: Quantity,
    pub cmp: Cmp,
    pub bound: f64,
}

impl Atom {
    pub fn new(quantity: Quantity, cmp: Cmp, bound: f64) -> Self {
        Self {
            quantity,
            cmp,
            bound,
        }
    }

    /// Signed slack; non-negative exactly when the atom holds.
    pub fn slack(&self, value: f64) -> f64 {
        match self.cmp {
            Cmp::Ge => value - self.bound,
            Cmp::Le => self.bound - value,
        }
    }

    /// Image under the reflection composed with time reversal.
    ///
    /// `x` and `y` change sign; `omega` and `dx/dt` are unchanged.
    pub fn reflect(&self) -> Self {
        match self.quantity {
            Quantity::X | Quantity::Y => Atom {
                quantity: self.quantity,
                cmp: match self.cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                },
                bound: -self.bound,
            },
            Quantity::Omega | Quantity::DxDt => *self,
        }
    }
}

/// Conjunction of inequality atoms over `(omega, x, y, dx/dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub atoms: Vec<Atom>,
}

impl Region {
    pub fn new(name: impl Into<String>, atoms: Vec<Atom>) -> Self {
        Self {
            name: name.into(),
            atoms,
        }
    }

    /// Smallest atom slack at a point with the given `dx/dt`.
    pub fn margin_with(&self, p: &PhasePoint, dx_dt: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let v = match a.quantity {
                    Quantity::Omega => p.omega,
                    Quantity::X => p.x,
                    Quantity::Y => p.y,
                    Quantity::DxDt => dx_dt,
                };
                a.slack(v)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn margin(&self, params: &SolitonParams, p: &PhasePoint) -> f64 {
        self.margin_with(p, field(params, p).d_x)
    }

    pub fn contains(&self, params: &SolitonParams, p: &PhasePoint) -> bool {
        self.margin(params, p) >= 0.0
    }

    pub fn reflect(&self) -> Self {
        Region {
            name: format!("L({})", self.name),
            atoms: self.atoms.iter().map(Atom::reflect).collect(),
        }
    }
}

/// A region together with the time direction in which it is claimed to be
/// forward-invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservedRegion {
    pub region: Region,
    pub direction: TimeDirection,
}

impl PreservedRegion {
    /// Reflected region, preserved in the opposite time direction.
    pub fn reflect(&self) -> Self {
        PreservedRegion {
            region: self.region.reflect(),
            direction: self.direction.reversed(),
        }
    }
}

/// The three regions preserved for increasing `t`:
/// `{x >= 1, dx/dt >= 0}`, `{x <= -1, dx/dt <= 0}` and `{y <= 0}`.
pub fn forward_preserved_regions() -> Vec<PreservedRegion> {
    use Cmp::*;
    use Quantity::*;
    let mk = |name: &str, atoms: Vec<Atom>| PreservedRegion {
        region: Region::new(name, atoms),
        direction: TimeDirection::Forward,
    };
    vec![
        mk(
            "x>=1,dx/dt>=0",
            vec![Atom::new(X, Ge, 1.0), Atom::new(DxDt, Ge, 0.0)],
        ),
        mk(
            "x<=-1,dx/dt<=0",
            vec![Atom::new(X, Le, -1.0), Atom::new(DxDt, Le, 0.0)],
        ),
        mk("y<=0", vec![Atom::new(Y, Le, 0.0)]),
    ]
}

/// The three regions preserved for decreasing `t`:
/// `{x >= 1, dx/dt <= 0}`, `{x <= -1, dx/dt >= 0}` and `{y >= 0}`.
pub fn backward_preserved_regions() -> Vec<PreservedRegion> {
    use Cmp::*;
    use Quantity::*;
    let mk = |name: &str, atoms: Vec<Atom>| PreservedRegion {
        region: Region::new(name, atoms),
        direction: TimeDirection::Backward,
    };
    vec![
        mk(
            "x>=1,dx/dt<=0",
            vec![Atom::new(X, Ge, 1.0), Atom::new(DxDt, Le, 0.0)],
        ),
        mk(
            "x<=-1,dx/dt>=0",
            vec![Atom::new(X, Le, -1.0), Atom::new(DxDt, Ge, 0.0)],
        ),
        mk("y>=0", vec![Atom::new(Y, Ge, 0.0)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> SolitonParams {
        SolitonParams::new(2, 1.0).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(SolitonParams::new(1, 1.0).is_err());
        assert!(SolitonParams::new(2, 0.0).is_err());
        assert!(SolitonParams::new(2, -1.0).is_err());
        assert!(SolitonParams::new(2, f64::NAN).is_err());
        assert!(SolitonParams::new(3, 0.25).is_ok());
    }

    #[test]
    fn phi_examples() {
        let v = phi(&p2(), &PhasePoint::new(0.0, 1.0, 2.0)).unwrap();
        assert_eq!(v.to_array(), [0.0, 0.0, 0.0]);

        let v = phi(&p2(), &PhasePoint::new(1.0, 0.0, 5.0)).unwrap();
        assert_eq!(v.to_array(), [0.0, 0.0, -1.0]);

        let p3 = SolitonParams::new(3, 1.0).unwrap();
        let v = phi(&p3, &PhasePoint::new(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(v.to_array(), [1.0, 2.0, -4.0]);
    }

    #[test]
    fn phi_rejects_non_finite() {
        assert!(matches!(
            phi(&p2(), &PhasePoint::new(f64::NAN, 0.0, 0.0)),
            Err(Error::Domain(_))
        ));
        assert!(phi(&p2(), &PhasePoint::new(1.0, f64::INFINITY, 0.0)).is_err());
        assert!(jacobian(&p2(), &PhasePoint::new(1.0, 0.0, f64::NAN)).is_err());
    }

    #[test]
    fn equilibria_are_exact_zeros() {
        for n in 2..=10 {
            for lambda in [0.25, 1.0, 4.0] {
                let params = SolitonParams::new(n, lambda).unwrap();
                let nf = f64::from(n);
                for p in [PhasePoint::new(0.0, 1.0, nf), PhasePoint::new(0.0, -1.0, -nf)] {
                    assert_eq!(phi(&params, &p).unwrap().to_array(), [0.0; 3]);
                }
            }
        }
    }

    #[test]
    fn jacobian_at_p0_n2() {
        let j = jacobian(&p2(), &PhasePoint::new(0.0, 1.0, 2.0)).unwrap();
        assert_eq!(j, [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -2.0, 1.0]]);
        let j1 = jacobian(&p2(), &PhasePoint::new(0.0, -1.0, -2.0)).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(j1[r][c], -j[r][c]);
            }
        }
    }

    #[test]
    fn x_derivative_examples() {
        let p = PhasePoint::new(1.0, 0.5, -1.0);
        assert_eq!(phi(&p2(), &p).unwrap().d_x, 0.75);
        assert!((x_accel(&p2(), &p).unwrap() - 1.5).abs() < 1e-15);
        assert!((x_jerk(&p2(), &p).unwrap() - 6.75).abs() < 1e-14);

        // x = 1 with dx/dt = 0 means y = n - lambda omega^2.
        let flat = PhasePoint::new(1.5, 1.0, 2.0 - 2.25);
        assert_eq!(x_accel(&p2(), &flat).unwrap(), 0.0);
        assert_eq!(x_jerk(&p2(), &flat).unwrap(), 0.0);
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(
            reflect(&PhasePoint::new(0.0, 1.0, 2.0)),
            PhasePoint::new(0.0, -1.0, -2.0)
        );
        // flat line {x = 1, y = n - lambda omega^2} maps onto {x = -1, y = -n + lambda omega^2}
        let params = SolitonParams::new(3, 0.5).unwrap();
        let w = 1.25;
        let on_flat = PhasePoint::new(w, 1.0, 3.0 - 0.5 * w * w);
        let img = reflect(&on_flat);
        assert_eq!(img.x, -1.0);
        assert_eq!(img.y, -3.0 + 0.5 * w * w);
        assert_eq!(phi(&params, &img).unwrap().d_x, 0.0);
    }

    #[test]
    fn steady_field_examples() {
        let sp = p2().with_steady(true);
        let v = steady_field(&sp, &PhasePoint::new(0.0, 0.5, 2.0)).unwrap();
        assert_eq!(v.to_array(), [0.0, 0.25, 0.5]);
        assert_eq!(
            steady_field(&sp, &PhasePoint::new(0.0, 1.0, 2.0))
                .unwrap()
                .to_array(),
            [0.0; 3]
        );
        assert_eq!(
            steady_field(&sp, &PhasePoint::new(0.0, -1.0, -2.0))
                .unwrap()
                .to_array(),
            [0.0; 3]
        );
        assert!(matches!(
            steady_field(&sp, &PhasePoint::new(0.1, 0.5, 2.0)),
            Err(Error::Domain(_))
        ));
        assert!(steady_field(&p2(), &PhasePoint::new(0.0, 0.5, 2.0)).is_err());
    }

    #[test]
    fn region_reflection_swaps_lists() {
        let fwd = forward_preserved_regions();
        let bwd = backward_preserved_regions();
        for f in &fwd {
            let r = f.reflect();
            assert_eq!(r.direction, TimeDirection::Backward);
            let hits = bwd.iter().filter(|b| b.region.atoms == r.region.atoms).count();
            assert_eq!(hits, 1, "{:?}", r.region);
            assert_eq!(r.reflect().region.atoms, f.region.atoms);
        }
        for b in &bwd {
            let r = b.reflect();
            assert!(fwd.iter().any(|f| f.region.atoms == r.region.atoms));
        }
    }

    #[test]
    fn region_membership() {
        let params = p2();
        let y_nonpos = &forward_preserved_regions()[2].region;
        assert!(y_nonpos.contains(&params, &PhasePoint::new(1.0, 0.0, -0.1)));
        assert!(y_nonpos.contains(&params, &PhasePoint::new(1.0, 0.0, 0.0)));
        assert!(!y_nonpos.contains(&params, &PhasePoint::new(1.0, 0.0, 0.1)));

        let blow = &forward_preserved_regions()[0].region;
        // x = 2, y = -1, omega = 1: dx/dt = 4 + 2 + 1 - 1 = 6
        assert!(blow.contains(&params, &PhasePoint::new(1.0, 2.0, -1.0)));
        // x = 2, y = 5: dx/dt = 4 - 10 + 1 - 1 < 0
        assert!(!blow.contains(&params, &PhasePoint::new(1.0, 2.0, 5.0)));
    }
}
