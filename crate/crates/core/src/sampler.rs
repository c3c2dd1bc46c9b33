//! Sampling of the tagged-particle Markov process.
//!
//! Between collisions the velocity follows the shear flight `T_s v`; the
//! collision clock is an inhomogeneous Poisson process with intensity
//! `rate(T_s v)`; at a collision the velocity jumps to `P⊥_ω ξ` with `ω`
//! uniform on S².
//!
//! Flight durations are drawn by
//!
//! * an exact exponential clock when `v2 = 0` (the flight is trivial);
//! * thinning under the constant majorant `rate` evaluated at
//!   `(0, v2, v3)` (valid because `|T_s v| ≥ sqrt(v2² + v3²)`), when `0 < a < 1`;
//! * hazard inversion — numerical `Λ` plus a safeguarded Newton/bisection
//!   root find — when thinning becomes wasteful (acceptance below 10⁻³) and
//!   always when `a > 1`, where the total hazard `Λ(∞)` is finite and an
//!   exponential draw exceeding it means the particle never collides again.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{EnsembleSummary, SummaryOptions};
use crate::kinematics::{collision_rate, project_out, shear_flight, KernelMode, ModelParams, UnitVector, Velocity};
use crate::quad::{integrate, integrate_ladder, QuadratureSpec};
use crate::rng::{event_stream, exp1, initial_stream, uniform_sphere};

/// Outcome of one flight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightOutcome {
    /// The clock rings after the given positive duration.
    Collision(f64),
    /// The clock never rings (only possible for `a > 1`).
    Escape,
}

/// Flight-time sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlightStrategy {
    /// Thinning by default, switching to inversion when acceptance collapses;
    /// inversion for `a > 1`.
    #[default]
    Auto,
    /// Pure thinning (only for `0 < a < 1`).
    Thinning,
    /// Pure hazard inversion.
    Inversion,
}

/// One flight followed by one jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    /// Velocity at the start of the flight, `v^m`.
    pub pre_flight_v: Velocity,
    /// Velocity at the end of the flight, `ξ^m = T_{t^m} v^m`.
    pub post_flight_xi: Velocity,
    /// Velocity after the jump, `v^{m+1} = P⊥_ω ξ^m`.
    pub post_jump_v: Velocity,
    /// Flight duration `t^m`.
    pub flight_duration: f64,
    /// Time of the collision since the start of the trajectory.
    pub absolute_time: f64,
    /// Scattering direction.
    pub omega: UnitVector,
}

/// Why a trajectory stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    /// The next collision would happen after the horizon.
    HorizonReached,
    /// The collision clock will never ring again.
    AbsorbedEscape,
    /// A jump produced a velocity below the floor, or the flights became
    /// shorter than the floating-point resolution of the elapsed time.
    AbsorbedZero,
}

/// A simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Initial velocity.
    pub initial_v: Velocity,
    /// Events in chronological order.
    pub events: Vec<TrajectoryEvent>,
    /// Terminal state.
    pub terminal: Terminal,
}

impl Trajectory {
    /// Velocity at time `t ≥ 0` (the free flight continues after the last event).
    pub fn velocity_at(&self, t: f64) -> Velocity {
        // Index of the first event strictly after t.
        let k = self.events.partition_point(|e| e.absolute_time <= t);
        let (v, t0) = if k == 0 {
            (self.initial_v, 0.0)
        } else {
            let e = &self.events[k - 1];
            (e.post_jump_v, e.absolute_time)
        };
        shear_flight(v, t - t0)
    }

    /// Number of collisions up to and including time `t`.
    pub fn collisions_before(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.absolute_time <= t)
    }

    /// Flight durations in order.
    pub fn flight_durations(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.flight_duration).collect()
    }
}

/// Initial-condition law of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLaw {
    /// Every trajectory starts from the same velocity.
    Point(Velocity),
    /// Uniform on the sphere of the given radius.
    IsotropicShell(f64),
}

impl InitialLaw {
    /// Initial velocity of trajectory `index`.
    pub fn draw(&self, seed: u64, index: u64) -> Velocity {
        match *self {
            InitialLaw::Point(v) => v,
            InitialLaw::IsotropicShell(r) => {
                let mut rng = initial_stream(seed, index);
                uniform_sphere(&mut rng).as_velocity().scale(r)
            }
        }
    }
}

/// Scaled hazard integrals of a single flight.
///
/// With `ρ = sqrt(v2² + v3²)` the intensity along the flight is a function
/// of `η = v1 + s v2` only, `k(η) = rate((η, v2, v3))`, and
/// `Λ(t) = |∫_{v1}^{v1 + t v2} k(η) dη| / |v2|`.
#[derive(Debug, Clone, Copy)]
pub struct FlightHazard {
    v: Velocity,
    rho: f64,
    a: f64,
    mode: KernelMode,
    eps: f64,
}

/// Beyond `|η| > TAIL_START · ρ` the pure power law is integrated by its
/// asymptotic series (relative truncation error below 1e-24).
const TAIL_START: f64 = 1e4;

impl FlightHazard {
    /// Hazard helper for a flight starting at `v`.
    pub fn new(v: Velocity, p: &ModelParams) -> Self {
        Self {
            v,
            rho: v.w2.hypot(v.w3),
            a: p.a,
            mode: p.kernel_mode,
            eps: p.eps_floor,
        }
    }

    /// Intensity at `η`.
    pub fn eta_rate(&self, eta: f64) -> f64 {
        let r = eta.hypot(self.rho);
        match self.mode {
            KernelMode::PurePower => r.max(self.eps).powf(-self.a),
            KernelMode::ShiftedPower => (1.0 + r).powf(-self.a),
        }
    }

    fn uses_series(&self) -> bool {
        self.mode == KernelMode::PurePower && self.rho >= self.eps && self.rho > 0.0
    }

    /// `∫_{y0}^{y1} (1+y²)^{-a/2} dy` for `0 ≤ y0 ≤ y1 ≤ ∞`.
    fn unit_segment(&self, y0: f64, y1: f64) -> f64 {
        if y1 <= y0 {
            return 0.0;
        }
        let a = self.a;
        let mut total = 0.0;
        if y0 < TAIL_START {
            let top = y1.min(TAIL_START);
            let hints: Vec<f64> = [1.0, 10.0, 100.0, 1000.0].into_iter().filter(|&h| h > y0 && h < top).collect();
            let spec = QuadratureSpec {
                rel_tol: 1e-13,
                abs_tol: 0.0,
                max_subdivisions: 4000,
                singularity_hints: hints,
            };
            total += integrate(|y| (1.0 + y * y).powf(-0.5 * a), y0, top, &spec).value;
        }
        if y1 > TAIL_START {
            let lo = y0.max(TAIL_START);
            total += Self::series_segment(a, lo, y1);
        }
        total
    }

    /// `∫_{y0}^{y1} y^{-a} (1 − (a/2) y^{-2} + (a(a+2)/8) y^{-4}) dy`, `y0 ≥ TAIL_START`.
    fn series_segment(a: f64, y0: f64, y1: f64) -> f64 {
        let lead = if y1.is_infinite() {
            // Only reached for a > 1.
            y0.powf(1.0 - a) / (a - 1.0)
        } else {
            let log_ratio = ((y1 - y0) / y0).ln_1p();
            y0.powf(1.0 - a) * ((1.0 - a) * log_ratio).exp_m1() / (1.0 - a)
        };
        let inv = |y: f64, p: f64| if y.is_infinite() { 0.0 } else { y.powf(-p) };
        let second = 0.5 * a / (a + 1.0) * (inv(y0, a + 1.0) - inv(y1, a + 1.0));
        let third = a * (a + 2.0) / 8.0 / (a + 3.0) * (inv(y0, a + 3.0) - inv(y1, a + 3.0));
        lead - second + third
    }

    /// `∫_{x0}^{x1} k(η) dη` for `x0 ≤ x1` (either may be infinite).
    pub fn segment(&self, x0: f64, x1: f64) -> f64 {
        if x1 <= x0 {
            return 0.0;
        }
        if self.uses_series() {
            let rho = self.rho;
            let scale = rho.powf(1.0 - self.a);
            let (y0, y1) = (x0 / rho, x1 / rho);
            let u = if y0 >= 0.0 {
                self.unit_segment(y0, y1)
            } else if y1 <= 0.0 {
                self.unit_segment(-y1, -y0)
            } else {
                self.unit_segment(0.0, -y0) + self.unit_segment(0.0, y1)
            };
            return scale * u;
        }
        self.generic_segment(x0, x1)
    }

    /// Direct adaptive quadrature (shifted kernel or active velocity floor).
    fn generic_segment(&self, x0: f64, x1: f64) -> f64 {
        let mut hints = vec![0.0];
        let knee = (self.eps * self.eps - self.rho * self.rho).max(0.0).sqrt();
        if knee > 0.0 {
            hints.push(knee);
            hints.push(-knee);
        }
        let base = self.rho.max(self.eps).max(1e-300);
        let mut h = base;
        for _ in 0..40 {
            hints.push(h);
            hints.push(-h);
            h *= 10.0;
        }
        let spec = QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_subdivisions: 6000,
            singularity_hints: hints,
        };
        let f = |e: f64| self.eta_rate(e);
        match (x0.is_infinite(), x1.is_infinite()) {
            (false, false) => integrate(f, x0, x1, &spec).value,
            (false, true) => {
                let start = x0.max(0.0);
                let head = if x0 < 0.0 { integrate(f, x0, 0.0, &spec).value } else { 0.0 };
                head + integrate_ladder(f, start, base, &spec, 2000).value
            }
            (true, false) => {
                let start = (-x1).max(0.0);
                let head = if x1 > 0.0 { integrate(f, 0.0, x1, &spec).value } else { 0.0 };
                head + integrate_ladder(|e| f(-e), start, base, &spec, 2000).value
            }
            (true, true) => f64::INFINITY,
        }
    }

    /// Cumulative hazard `Λ(t)` from the start of the flight.
    pub fn hazard(&self, t: f64) -> f64 {
        self.hazard_between(0.0, t)
    }

    /// `Λ(t1) − Λ(t0)` computed without cancellation.
    pub fn hazard_between(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        let v = self.v;
        if v.w2 == 0.0 {
            return (t1 - t0) * self.eta_rate(v.w1);
        }
        let x0 = v.w1 + t0 * v.w2;
        let x1 = v.w1 + t1 * v.w2;
        let (lo, hi) = if x0 <= x1 { (x0, x1) } else { (x1, x0) };
        self.segment(lo, hi) / v.w2.abs()
    }

    /// Remaining total hazard `Λ(∞) − Λ(t0)`; infinite unless `a > 1` and `v2 ≠ 0`.
    pub fn hazard_to_infinity(&self, t0: f64) -> f64 {
        let v = self.v;
        if v.w2 == 0.0 || self.a <= 1.0 {
            return f64::INFINITY;
        }
        let x0 = v.w1 + t0 * v.w2;
        if v.w2 > 0.0 {
            self.segment(x0, f64::INFINITY) / v.w2
        } else {
            self.segment(f64::NEG_INFINITY, x0) / (-v.w2)
        }
    }

    /// Intensity at time `t` into the flight.
    pub fn rate_at(&self, t: f64) -> f64 {
        self.eta_rate(self.v.w1 + t * self.v.w2)
    }

    /// Constant majorant of the intensity along the flight.
    pub fn majorant(&self) -> f64 {
        self.eta_rate(0.0)
    }
}

/// Cumulative hazard `Λ(t) = ∫_0^t rate(T_s v) ds`.
pub fn cumulative_hazard(v: Velocity, t: f64, p: &ModelParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("hazard time must be nonnegative, got {t}")));
    }
    if t.is_infinite() {
        return Ok(FlightHazard::new(v, p).hazard_to_infinity(0.0));
    }
    Ok(FlightHazard::new(v, p).hazard(t))
}

/// Uniform scattering direction.
pub fn sample_omega<R: Rng + ?Sized>(rng: &mut R) -> UnitVector {
    uniform_sphere(rng)
}

/// Iteration budget of thinning and root finding.
pub const ITERATION_BUDGET: usize = 50_000_000;
/// Consecutive thinning rejections after which inversion takes over.
const THINNING_SWITCH: usize = 1000;

/// Solves `Λ(t0 + u) − Λ(t0) = e` for `u > 0`.
fn invert_from<'a>(h: &FlightHazard, t0: f64, e: f64) -> Result<f64> {
    let f = |u: f64| h.hazard_between(t0, t0 + u) - e;
    let r0 = h.rate_at(t0);
    let mut hi = (e / r0).max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    let mut f_hi = f(hi);
    let mut doublings = 0;
    while f_hi < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 3000 || !hi.is_finite() {
            return Err(Error::NonTermination(doublings));
        }
        f_hi = f(hi);
    }
    // Safeguarded Newton with the exact derivative Λ'(t) = rate(T_t v).
    let mut u = 0.5 * (lo + hi);
    for _ in 0..300 {
        let fu = f(u);
        if fu == 0.0 {
            return Ok(u);
        }
        if fu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let d = h.rate_at(t0 + u);
        let mut next = u - fu / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - u).abs() <= 1e-15 * next.abs() || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        u = next;
    }
    Ok(u)
}

/// Draws a flight outcome with the default strategy.
pub fn sample_flight_time<R: Rng + ?Sized>(v: Velocity, p: &ModelParams, rng: &mut R) -> Result<FlightOutcome> {
    sample_flight_time_with(v, p, FlightStrategy::Auto, rng)
}

/// Draws a flight outcome with an explicit strategy.
pub fn sample_flight_time_with<R: Rng + ?Sized>(
    v: Velocity,
    p: &ModelParams,
    strategy: FlightStrategy,
    rng: &mut R,
) -> Result<FlightOutcome> {
    let h = FlightHazard::new(v, p);
    if v.w2 == 0.0 {
        let r = collision_rate(v, p)?;
        return Ok(FlightOutcome::Collision(exp1(rng) / r));
    }
    if p.kernel_mode == KernelMode::PurePower && p.eps_floor == 0.0 && h.rho == 0.0 {
        return Err(Error::DegenerateVelocity);
    }
    let use_thinning = match strategy {
        FlightStrategy::Inversion => false,
        FlightStrategy::Thinning => {
            if p.a > 1.0 {
                return Err(Error::InvalidParameter("thinning is only available for 0 < a < 1".into()));
            }
            true
        }
        FlightStrategy::Auto => {
            // Thinning is wasteful when the flight starts far out on the
            // decaying branch of the intensity.
            p.a < 1.0 && !(h.rate_at(0.0) < 1e-3 * h.majorant() && v.w1 * v.w2 >= 0.0)
        }
    };
    if use_thinning {
        let lam = h.majorant();
        let mut t = 0.0;
        let mut rejections = 0usize;
        loop {
            t += exp1(rng) / lam;
            let u: f64 = rng.gen();
            if u * lam <= h.rate_at(t) {
                return Ok(FlightOutcome::Collision(t));
            }
            rejections += 1;
            if strategy == FlightStrategy::Auto && rejections >= THINNING_SWITCH {
                // Memoryless restart: the clock has not rung on [0, t].
                let e = exp1(rng);
                return Ok(FlightOutcome::Collision(t + invert_from(&h, t, e)?));
            }
            if rejections >= ITERATION_BUDGET {
                return Err(Error::NonTermination(rejections));
            }
        }
    }
    let e = exp1(rng);
    if p.a > 1.0 && e >= h.hazard_to_infinity(0.0) {
        return Ok(FlightOutcome::Escape);
    }
    Ok(FlightOutcome::Collision(invert_from(&h, 0.0, e)?))
}

/// Deterministic part of a step: fly for `duration`, then project out `omega`.
pub fn step_with(v: Velocity, duration: f64, omega: UnitVector, time_before: f64) -> TrajectoryEvent {
    let xi = shear_flight(v, duration);
    TrajectoryEvent {
        pre_flight_v: v,
        post_flight_xi: xi,
        post_jump_v: project_out(xi, omega),
        flight_duration: duration,
        absolute_time: time_before + duration,
        omega,
    }
}

/// Result of a random step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    /// A flight followed by a jump.
    Event(TrajectoryEvent),
    /// The clock never rings again.
    Escape,
}

/// One random flight and jump drawn from `rng`.
pub fn step<R: Rng + ?Sized>(v: Velocity, p: &ModelParams, time_before: f64, rng: &mut R) -> Result<StepOutcome> {
    match sample_flight_time(v, p, rng)? {
        FlightOutcome::Escape => Ok(StepOutcome::Escape),
        FlightOutcome::Collision(d) => {
            let omega = sample_omega(rng);
            Ok(StepOutcome::Event(step_with(v, d, omega, time_before)))
        }
    }
}

/// Simulates one trajectory until the horizon or absorption.
///
/// Event `m` draws from the counter-based stream `(seed, index, m)`, so a
/// trajectory is reproducible from its seed and index alone, and a longer
/// horizon extends (never alters) a shorter one.
pub fn simulate_trajectory(v0: Velocity, p: &ModelParams, horizon: f64, seed: u64, index: u64) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if v0 == Velocity::ZERO {
        return Err(Error::InvalidParameter("initial velocity must be nonzero".into()));
    }
    let mut events = Vec::new();
    let mut v = v0;
    let mut time = 0.0;
    let mut m = 0u64;
    let terminal = loop {
        let mut rng = event_stream(seed, index, m);
        match step(v, p, time, &mut rng)? {
            StepOutcome::Escape => break Terminal::AbsorbedEscape,
            StepOutcome::Event(e) => {
                if e.absolute_time >= horizon {
                    break Terminal::HorizonReached;
                }
                // Flights shorter than the resolution of the clock: the
                // summable flight durations have reached their accumulation
                // point, i.e. the velocity has collapsed to zero in finite time.
                if e.absolute_time <= time {
                    break Terminal::AbsorbedZero;
                }
                time = e.absolute_time;
                v = e.post_jump_v;
                events.push(e);
                m += 1;
                let n = v.norm();
                if n == 0.0 || n < p.eps_floor {
                    break Terminal::AbsorbedZero;
                }
            }
        }
    };
    Ok(Trajectory {
        initial_v: v0,
        events,
        terminal,
    })
}

/// Simulates `n` independent trajectories and reduces them to a summary.
///
/// `workers = None` uses rayon's global pool; `Some(k)` runs on a dedicated
/// pool of `k` threads. The summary does not depend on the worker count.
pub fn simulate_ensemble(
    law: InitialLaw,
    p: &ModelParams,
    n: u64,
    horizon: f64,
    seed: u64,
    opts: &SummaryOptions,
    workers: Option<usize>,
) -> Result<EnsembleSummary> {
    if n == 0 {
        return Err(Error::InvalidParameter("ensemble size must be at least 1".into()));
    }
    p.validate()?;
    let run = || -> Result<EnsembleSummary> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let v0 = law.draw(seed, i);
                let traj = simulate_trajectory(v0, p, horizon, seed, i)?;
                Ok(EnsembleSummary::from_trajectory(i, &traj, p, horizon, opts))
            })
            .try_reduce(|| EnsembleSummary::empty(p, horizon, opts), |x, y| Ok(x.merge(y)))
    };
    let mut summary = match workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            pool.install(run)?
        }
        None => run()?,
    };
    summary.seed = seed;
    summary.initial_law = Some(law);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hazard_examples() {
        let p = ModelParams::new(2.0).unwrap();
        let l = cumulative_hazard(Velocity::new(0.0, 1.0, 0.0), f64::INFINITY, &p).unwrap();
        assert!((l - std::f64::consts::FRAC_PI_2).abs() < 1e-12, "{l}");
        let q = ModelParams::new(0.5).unwrap();
        let l = cumulative_hazard(Velocity::new(0.0, 0.0, 1.0), 3.7, &q).unwrap();
        assert!((l - 3.7).abs() < 1e-15);
        assert_eq!(cumulative_hazard(Velocity::new(1.0, 2.0, 3.0), 0.0, &q).unwrap(), 0.0);
        assert!(cumulative_hazard(Velocity::new(1.0, 2.0, 3.0), -1.0, &q).is_err());
    }

    #[test]
    fn hazard_matches_direct_quadrature() {
        let q = ModelParams::new(0.5).unwrap();
        for &v in &[Velocity::new(0.0, 1.0, 0.0), Velocity::new(-30.0, 2.0, 1.0), Velocity::new(5.0, -0.1, 0.0)] {
            for &t in &[0.1, 10.0, 1e3, 1e6] {
                let h = cumulative_hazard(v, t, &q).unwrap();
                let spec = QuadratureSpec::rel(1e-13).with_hints(&[(-v.w1 / v.w2).clamp(0.0, t)]);
                let d = integrate(|s| collision_rate(shear_flight(v, s), &q).unwrap(), 0.0, t, &spec).value;
                assert!((h - d).abs() < 1e-9 * d, "v={v:?} t={t}: {h} vs {d}");
            }
        }
    }

    #[test]
    fn series_tail_consistent_with_quadrature() {
        let q = ModelParams::new(0.3).unwrap();
        let h = FlightHazard::new(Velocity::new(0.0, 1.0, 0.0), &q);
        let a = h.unit_segment(5e3, 2e4);
        let spec = QuadratureSpec::rel(1e-14);
        let d = integrate(|y| (1.0f64 + y * y).powf(-0.15), 5e3, 2e4, &spec).value;
        assert!((a - d).abs() < 1e-12 * d);
    }

    #[test]
    fn forced_step() {
        let e = step_with(Velocity::new(1.0, 1.0, 0.0), 2.5, UnitVector::E1, 0.0);
        assert_eq!(e.post_flight_xi, Velocity::new(3.5, 1.0, 0.0));
        assert_eq!(e.post_jump_v, Velocity::new(0.0, 1.0, 0.0));
        let f = step_with(e.post_jump_v, 1.5, UnitVector::E1, e.absolute_time);
        assert_eq!(f.absolute_time, 4.0);
    }

    #[test]
    fn short_horizon_has_no_events() {
        let p = ModelParams::new(0.5).unwrap();
        let t = simulate_trajectory(Velocity::new(0.0, 1.0, 0.0), &p, 1e-12, 1, 0).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.terminal, Terminal::HorizonReached);
    }

    #[test]
    fn identical_seeds_identical_events() {
        let p = ModelParams::new(0.5).unwrap();
        let a = simulate_trajectory(Velocity::new(0.3, 1.0, -0.2), &p, 1e4, 99, 7).unwrap();
        let b = simulate_trajectory(Velocity::new(0.3, 1.0, -0.2), &p, 1e4, 99, 7).unwrap();
        assert_eq!(a, b);
        assert!(!a.events.is_empty());
    }

    #[test]
    fn longer_horizon_extends_trajectory() {
        let p = ModelParams::new(0.5).unwrap();
        let a = simulate_trajectory(Velocity::new(0.3, 1.0, -0.2), &p, 1e2, 5, 3).unwrap();
        let b = simulate_trajectory(Velocity::new(0.3, 1.0, -0.2), &p, 1e4, 5, 3).unwrap();
        assert_eq!(&b.events[..a.events.len()], &a.events[..]);
    }

    #[test]
    fn no_escape_below_one() {
        let p = ModelParams::new(0.5).unwrap();
        let mut rng = event_stream(3, 0, 0);
        for _ in 0..2000 {
            let o = sample_flight_time(Velocity::new(0.0, 1.0, 0.0), &p, &mut rng).unwrap();
            assert!(matches!(o, FlightOutcome::Collision(_)));
        }
    }
}
