//! Adaptive integration of the phase system with dense output and events.
//!
//! Runs use an embedded Dormand-Prince 5(4) pair on an anchored chart (see
//! [`chart`]) which keeps the flat, cylinder and sphere loci invariant to
//! rounding. The radial coordinate `r` and the potential `f` are carried as
//! extra states with `dr/dt = omega` and `df/dt = n x - y`.
//!
//! Backward runs step with negative `h`, which is the same as integrating the
//! negated field forward; sample times are the actual (decreasing) `t`.

mod chart;
mod dopri;
mod events;

use serde::{Deserialize, Serialize};

use crate::equilibria::Seed;
use crate::error::{Error, Result};
use crate::phase::{PhasePoint, SolitonParams, TimeDirection};

use chart::{Chart, Vec6, E, F, R, S, W};
pub use events::{Crossing, EventKind, EventRecord, EventSpec, EVENT_TIME_TOL};
pub(crate) use events::DenseStep;

/// Phase point together with the quadratures `r` and `f`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentedState {
    pub p: PhasePoint,
    pub r: f64,
    pub f: f64,
}

impl AugmentedState {
    pub fn new(p: PhasePoint, r: f64, f: f64) -> Self {
        Self { p, r, f }
    }

    /// `r = f = 0` at `p`.
    pub fn at(p: PhasePoint) -> Self {
        Self::new(p, 0.0, 0.0)
    }
}

/// Where a run starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    State(AugmentedState),
    /// A seed near an equilibrium, kept as an exact offset.
    Seed { seed: Seed, r: f64, f: f64 },
}

impl Start {
    pub fn point(&self) -> PhasePoint {
        match self {
            Start::State(s) => s.p,
            Start::Seed { seed, .. } => seed.point(),
        }
    }

    /// Start of the reflected, time-reversed run.
    pub fn reflect(&self) -> Start {
        match *self {
            Start::State(s) => Start::State(AugmentedState::new(
                crate::phase::reflect(&s.p),
                -s.r,
                s.f,
            )),
            Start::Seed { seed, r, f } => Start::Seed {
                seed: seed.reflect(),
                r: -r,
                f,
            },
        }
    }

    fn encode(&self, params: &SolitonParams) -> (Chart, Vec6) {
        match self {
            Start::State(s) => Chart::encode(params, s),
            Start::Seed { seed, r, f } => Chart::encode_seed(params, seed, *r, *f),
        }
    }
}

impl From<AugmentedState> for Start {
    fn from(s: AugmentedState) -> Self {
        Start::State(s)
    }
}

impl From<PhasePoint> for Start {
    fn from(p: PhasePoint) -> Self {
        Start::State(AugmentedState::at(p))
    }
}

impl From<Seed> for Start {
    fn from(seed: Seed) -> Self {
        Start::Seed {
            seed,
            r: 0.0,
            f: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }

    pub fn halved(self) -> Self {
        Self {
            rtol: self.rtol / 2.0,
            atol: self.atol / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol.is_finite() && self.rtol >= 1e-13) {
            return Err(Error::InvalidRequest(format!(
                "rtol must be >= 1e-13, got {}",
                self.rtol
            )));
        }
        if !(self.atol.is_finite() && self.atol > 0.0) {
            return Err(Error::InvalidRequest(format!(
                "atol must be > 0, got {}",
                self.atol
            )));
        }
        Ok(())
    }
}

/// Step control and guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub tolerances: Tolerances,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// `|x|` above this ends the run with [`Termination::BlowupDetected`].
    pub blowup_ceiling: f64,
    /// `omega` below this with `|x| >= 1/2` ends the run with
    /// [`Termination::CollapseDetected`]; `None` disables the guard.
    pub collapse_floor: Option<f64>,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            max_step: 0.1,
            min_step: 1e-15,
            max_steps: 2_000_000,
            blowup_ceiling: 1e6,
            collapse_floor: Some(1e-12),
        }
    }
}

impl IntegrationOptions {
    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn without_collapse_guard(mut self) -> Self {
        self.collapse_floor = None;
        self
    }

    fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if !(self.max_step.is_finite() && self.max_step > 0.0) {
            return Err(Error::InvalidRequest("max_step must be > 0".into()));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return Err(Error::InvalidRequest(
                "min_step must lie in (0, max_step)".into(),
            ));
        }
        if !(self.blowup_ceiling > 1.0) {
            return Err(Error::InvalidRequest("blowup_ceiling must exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    HorizonReached,
    EventStop,
    BlowupDetected,
    CollapseDetected,
    StepUnderflow,
    /// The step budget `max_steps` ran out.
    StepLimit,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::HorizonReached => "HorizonReached",
            Termination::EventStop => "EventStop",
            Termination::BlowupDetected => "BlowupDetected",
            Termination::CollapseDetected => "CollapseDetected",
            Termination::StepUnderflow => "StepUnderflow",
            Termination::StepLimit => "StepLimit",
        };
        f.write_str(s)
    }
}

/// A sampled state, with the quantities that the chart knows more precisely
/// than `(omega, x, y)` does.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: AugmentedState,
    pub dx_dt: f64,
    pub one_minus_x_sq: f64,
    pub y_minus_nx: f64,
    /// `n x^2 + lambda omega^2 - n`.
    pub ellipse_gap: f64,
}

impl Sample {
    fn from_chart(t: f64, chart: &Chart, u: &Vec6) -> Self {
        Sample {
            t,
            state: AugmentedState::new(chart.point(u), u[R], u[F]),
            dx_dt: chart.dx_dt(u),
            one_minus_x_sq: -chart.x_sq_m1(u),
            y_minus_nx: u[S],
            ellipse_gap: u[E],
        }
    }

    pub fn point(&self) -> PhasePoint {
        self.state.p
    }

    pub fn omega(&self) -> f64 {
        self.state.p.omega
    }

    pub fn x(&self) -> f64 {
        self.state.p.x
    }

    pub fn y(&self) -> f64 {
        self.state.p.y
    }

    pub fn r(&self) -> f64 {
        self.state.r
    }

    pub fn f(&self) -> f64 {
        self.state.f
    }

    fn reflect(&self) -> Self {
        Sample {
            t: -self.t,
            state: AugmentedState::new(crate::phase::reflect(&self.state.p), -self.state.r, self.state.f),
            dx_dt: self.dx_dt,
            one_minus_x_sq: self.one_minus_x_sq,
            y_minus_nx: -self.y_minus_nx,
            ellipse_gap: self.ellipse_gap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// A solution with its sample log, event log and dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: SolitonParams,
    direction: TimeDirection,
    samples: Vec<Sample>,
    events: Vec<EventRecord>,
    termination: Termination,
    stats: Stats,
    steps: Vec<DenseStep>,
}

impl Trajectory {
    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    pub fn direction(&self) -> TimeDirection {
        self.direction
    }

    /// Samples in traversal order; times are strictly monotone.
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    /// First event record produced by the spec at `index`.
    pub fn first_event(&self, index: usize) -> Option<&EventRecord> {
        self.events.iter().find(|e| e.index == index)
    }

    fn covers(&self, t: f64) -> bool {
        let (a, b) = (self.first().t, self.last().t);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        t >= lo && t <= hi
    }

    fn step_index(&self, t: f64) -> Option<usize> {
        if self.steps.is_empty() || !self.covers(t) {
            return None;
        }
        let sign = self.direction.sign();
        // steps are ordered by sign * t0
        let idx = self
            .steps
            .partition_point(|s| sign * s.t1() < sign * t);
        Some(idx.min(self.steps.len() - 1))
    }

    /// Dense-output state at `t`, or `None` outside the sampled span.
    pub fn eval(&self, t: f64) -> Option<Sample> {
        if self.steps.is_empty() {
            return (t == self.first().t).then(|| *self.first());
        }
        let step = &self.steps[self.step_index(t)?];
        let u = step.at_theta(step.theta_of(t));
        Some(Sample::from_chart(t, &step.chart, &u))
    }

    /// `count` dense samples evenly spaced in `t` over the sampled span.
    pub fn resample(&self, count: usize) -> Vec<Sample> {
        let (a, b) = (self.first().t, self.last().t);
        if count < 2 || a == b {
            return vec![*self.first()];
        }
        (0..count)
            .map(|i| {
                let t = if i + 1 == count {
                    b
                } else {
                    a + (b - a) * (i as f64) / ((count - 1) as f64)
                };
                self.eval(t).expect("inside span")
            })
            .collect()
    }

    /// First time at which `spec` fires along the dense output.
    pub fn locate_event(&self, spec: &EventSpec) -> Option<f64> {
        spec.validate().ok()?;
        let end = self.last().t;
        let sign = self.direction.sign();
        for step in &self.steps {
            let g0 = spec.value(&step.chart, &step.at_theta(0.0));
            if let Some(theta) = step.find(spec, g0) {
                let t = step.t0 + theta * step.h;
                if sign * t <= sign * end {
                    return Some(t);
                }
                return None;
            }
        }
        None
    }

    /// The image `t -> L(gamma(-t))`: reflected states, reversed time
    /// direction, `r -> -r`, same `f`.
    pub fn reflected(&self) -> Trajectory {
        Trajectory {
            params: self.params,
            direction: self.direction.reversed(),
            samples: self.samples.iter().map(Sample::reflect).collect(),
            events: self
                .events
                .iter()
                .map(|e| EventRecord {
                    t: -e.t,
                    index: e.index,
                    spec: e.spec.reflect(),
                    point: crate::phase::reflect(&e.point),
                })
                .collect(),
            termination: self.termination,
            stats: self.stats,
            steps: self
                .steps
                .iter()
                .map(|s| {
                    let (chart, _) = s.chart.reflect(&[0.0; 6]);
                    let mut coeffs = s.coeffs;
                    for c in coeffs.iter_mut() {
                        *c = chart::reflect_components(c);
                    }
                    DenseStep {
                        t0: -s.t0,
                        h: -s.h,
                        chart,
                        coeffs,
                    }
                })
                .collect(),
        }
    }

    /// Sampled phase points.
    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        self.samples.iter().map(|s| s.state.p)
    }
}

fn validate_start(params: &SolitonParams, start: &Start) -> Result<()> {
    match start {
        Start::State(s) => {
            s.p.ensure_finite()?;
            if !(s.r.is_finite() && s.f.is_finite()) {
                return Err(Error::Domain("non-finite r or f in initial state".into()));
            }
        }
        Start::Seed { seed, r, f } => {
            if !(seed.point().is_finite() && r.is_finite() && f.is_finite()) {
                return Err(Error::Domain("non-finite seed".into()));
            }
        }
    }
    let w = start.point().omega;
    if params.is_steady() {
        if w != 0.0 {
            return Err(Error::Domain(format!(
                "steady runs live on omega = 0, got omega = {w}"
            )));
        }
    } else if w < 0.0 {
        return Err(Error::Domain(format!("omega must be >= 0, got {w}")));
    }
    Ok(())
}

/// Integrates from `initial` at `t_span.0` toward `t_span.1` (either order).
pub fn integrate(
    params: &SolitonParams,
    initial: impl Into<Start>,
    t_span: (f64, f64),
    options: &IntegrationOptions,
    events: &[EventSpec],
) -> Result<Trajectory> {
    let start: Start = initial.into();
    let (t0, t1) = t_span;
    if !(t0.is_finite() && t1.is_finite()) || t0 == t1 {
        return Err(Error::InvalidRequest(format!(
            "t_span must be finite and nonempty, got ({t0}, {t1})"
        )));
    }
    options.validate()?;
    for e in events {
        e.validate()?;
    }
    validate_start(params, &start)?;

    let direction = if t1 > t0 {
        TimeDirection::Forward
    } else {
        TimeDirection::Backward
    };
    let dir = direction.sign();
    let Tolerances { rtol, atol } = options.tolerances;

    let (mut chart, mut u) = start.encode(params);
    let mut t = t0;
    let mut samples = vec![Sample::from_chart(t, &chart, &u)];
    let mut records: Vec<EventRecord> = Vec::new();
    let mut steps: Vec<DenseStep> = Vec::new();
    let mut stats = Stats::default();

    let mut k1 = chart.field(&u);
    stats.evaluations += 1;
    let mut g: Vec<f64> = events.iter().map(|e| e.value(&chart, &u)).collect();
    let mut h = {
        let c = chart;
        dopri::initial_step(&|v: &Vec6| c.field(v), &u, &k1, dir, rtol, atol, options.max_step)
    };
    stats.evaluations += 1;
    let mut last_rejected = false;

    let termination = loop {
        if stats.accepted >= options.max_steps {
            break Termination::StepLimit;
        }
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break Termination::HorizonReached;
        }
        let mut h_try = h.min(options.max_step);
        let mut last = false;
        if h_try >= remaining || remaining - h_try < options.min_step {
            h_try = remaining;
            last = true;
        }

        let c = chart;
        let trial = dopri::trial_step(&|v: &Vec6| c.field(v), &u, &k1, dir * h_try, rtol, atol);
        stats.evaluations += 6;

        if !trial.err.is_finite() || trial.y_new.iter().any(|v| !v.is_finite()) {
            stats.rejected += 1;
            h = h_try * 0.25;
            last_rejected = true;
            if h < options.min_step {
                break Termination::BlowupDetected;
            }
            continue;
        }
        if trial.err > 1.0 {
            stats.rejected += 1;
            h = h_try * (0.9 * trial.err.powf(-0.2)).max(0.2);
            last_rejected = true;
            if h < options.min_step {
                break Termination::StepUnderflow;
            }
            continue;
        }

        stats.accepted += 1;
        let t_new = if last { t1 } else { t + dir * h_try };
        let step = DenseStep {
            t0: t,
            h: t_new - t,
            chart,
            coeffs: trial.dense,
        };

        let mut fired: Vec<(f64, usize)> = Vec::new();
        for (i, spec) in events.iter().enumerate() {
            if let Some(theta) = step.find(spec, g[i]) {
                fired.push((theta, i));
            }
        }
        fired.sort_by(|a, b| a.0.total_cmp(&b.0));
        let stop_theta = fired
            .iter()
            .find(|(_, i)| events[*i].terminal)
            .map(|(th, _)| *th);
        for &(theta, i) in &fired {
            if stop_theta.is_some_and(|s| theta > s) {
                continue;
            }
            let te = step.t0 + theta * step.h;
            records.push(EventRecord {
                t: te,
                index: i,
                spec: events[i],
                point: step.chart.point(&step.at_theta(theta)),
            });
        }
        if let Some(theta) = stop_theta {
            let te = step.t0 + theta * step.h;
            let ue = step.at_theta(theta);
            if (te - t) * dir > 0.0 {
                samples.push(Sample::from_chart(te, &step.chart, &ue));
                steps.push(step);
            }
            break Termination::EventStop;
        }
        steps.push(step);

        u = trial.y_new;
        k1 = trial.k7;
        t = t_new;
        if chart.reanchor(&mut u) {
            k1 = chart.field(&u);
            stats.evaluations += 1;
        }
        samples.push(Sample::from_chart(t, &chart, &u));
        for (gi, spec) in g.iter_mut().zip(events) {
            *gi = spec.value(&chart, &u);
        }

        if chart.x(&u).abs() > options.blowup_ceiling {
            break Termination::BlowupDetected;
        }
        if let Some(floor) = options.collapse_floor {
            if u[W] < floor && chart.x(&u).abs() >= 0.5 {
                break Termination::CollapseDetected;
            }
        }
        if last {
            break Termination::HorizonReached;
        }

        let mut fac = (0.9 * trial.err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = h_try * fac;
        if h < options.min_step {
            break Termination::StepUnderflow;
        }
    };

    Ok(Trajectory {
        params: *params,
        direction,
        samples,
        events: records,
        termination,
        stats,
        steps,
    })
}
