//! Closed-form densities of the process: flight, escape, jump and
//! transition. These are written independently of the sampler so that they
//! can serve as oracles for it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::kinematics::{KernelMode, ModelParams, Velocity};
use crate::quad::{integrate, integrate_ladder, QuadratureSpec};

/// Value of the flight density `G(ξ1 | v)` (density in `ξ1` at fixed `v2, v3`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightDensityValue {
    /// Nonnegative density value.
    pub value: f64,
}

/// Jump density on the collision sphere `Γ(ξ) = S_{|ξ|/2}(ξ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpDensityValue {
    /// Surface-density factor `h = 1/(2π|ξ||v−ξ|)`.
    pub h: f64,
    /// Whether `v` lies on `Γ(ξ)` within the requested relative tolerance.
    pub on_support: bool,
}

/// Intensity along the line `(η, v2, v3)` with `ρ = |(v2, v3)|`.
fn line_rate(eta: f64, rho: f64, p: &ModelParams) -> f64 {
    let r = eta.hypot(rho);
    match p.kernel_mode {
        KernelMode::PurePower => r.max(p.eps_floor).powf(-p.a),
        KernelMode::ShiftedPower => (1.0 + r).powf(-p.a),
    }
}

fn line_spec(rho: f64) -> QuadratureSpec {
    let mut hints = vec![0.0];
    let mut h = rho.max(1e-300);
    for _ in 0..30 {
        hints.push(h);
        hints.push(-h);
        h *= 10.0;
    }
    QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_subdivisions: 8000,
        singularity_hints: hints,
    }
}

/// `∫_{x0}^{x1} k(η) dη` on a finite interval by adaptive quadrature.
fn line_integral(x0: f64, x1: f64, rho: f64, p: &ModelParams) -> f64 {
    if x1 <= x0 {
        return 0.0;
    }
    integrate(|e| line_rate(e, rho, p), x0, x1, &line_spec(rho)).value
}

/// `∫_0^∞ (1+y²)^{-a/2} dy = √π Γ((a−1)/2) / (2 Γ(a/2))`, `a > 1`.
pub fn half_line_integral(a: f64) -> f64 {
    0.5 * PI.sqrt() * (ln_gamma(0.5 * (a - 1.0)) - ln_gamma(0.5 * a)).exp()
}

/// `∫_{x0}^{∞} k(η) dη` for `a > 1`.
fn tail_integral(x0: f64, rho: f64, p: &ModelParams) -> f64 {
    let a = p.a;
    let closed = p.kernel_mode == KernelMode::PurePower && rho > 0.0 && rho >= p.eps_floor;
    if closed {
        // ρ^{1−a} (Q∞ ∓ ∫_0^{|x0|/ρ}), with the finite part by quadrature.
        let q_inf = half_line_integral(a);
        let scale = rho.powf(1.0 - a);
        let part = line_integral(0.0, x0.abs(), rho, p) / scale;
        return if x0 >= 0.0 { scale * (q_inf - part).max(0.0) } else { scale * (q_inf + part) };
    }
    let head = if x0 < 0.0 { line_integral(x0, 0.0, rho, p) } else { 0.0 };
    let start = x0.max(0.0);
    head + integrate_ladder(|e| line_rate(e, rho, p), start, rho.max(p.eps_floor).max(1.0), &line_spec(rho), 4000).value
}

/// Flight density `G(ξ1 | v)`.
///
/// Zero outside the reachable half-line (`ξ1 < v1` when `v2 > 0`, `ξ1 > v1`
/// when `v2 < 0`).
pub fn flight_density(xi1: f64, v: Velocity, p: &ModelParams) -> Result<FlightDensityValue> {
    if v.w2 == 0.0 {
        return Err(Error::PointMassFlight);
    }
    let rho = v.w2.hypot(v.w3);
    let reachable = if v.w2 > 0.0 { xi1 >= v.w1 } else { xi1 <= v.w1 };
    if !reachable {
        return Ok(FlightDensityValue { value: 0.0 });
    }
    let (lo, hi) = if v.w2 > 0.0 { (v.w1, xi1) } else { (xi1, v.w1) };
    let inv = 1.0 / v.w2.abs();
    let value = inv * line_rate(xi1, rho, p) * (-inv * line_integral(lo, hi, rho, p)).exp();
    Ok(FlightDensityValue { value })
}

/// Probability that the collision clock never rings on the flight from `v`.
pub fn escape_probability(v: Velocity, p: &ModelParams) -> Result<f64> {
    if p.a == 1.0 {
        return Err(Error::InvalidParameter("escape probability is undefined at a = 1".into()));
    }
    if p.a < 1.0 || v.w2 == 0.0 {
        return Ok(0.0);
    }
    let rho = v.w2.hypot(v.w3);
    // Reflect η → −η for backward flights; the intensity is even in η.
    let x0 = if v.w2 > 0.0 { v.w1 } else { -v.w1 };
    let total = tail_integral(x0, rho, p) / v.w2.abs();
    Ok((-total).exp())
}

/// Jump density from `ξ` to `v`.
pub fn jump_density(v: Velocity, xi: Velocity, tol: f64) -> Result<JumpDensityValue> {
    let nxi = xi.norm();
    if nxi == 0.0 {
        return Err(Error::InvalidParameter("jump density requires ξ ≠ 0".into()));
    }
    let d = v.sub(xi).norm();
    if d == 0.0 {
        return Err(Error::Singular);
    }
    let centre = xi.scale(0.5);
    let on_support = (v.sub(centre).norm() - 0.5 * nxi).abs() <= tol * nxi;
    Ok(JumpDensityValue {
        h: 1.0 / (2.0 * PI * nxi * d),
        on_support,
    })
}

/// Density of the next post-flight velocity `ξ` given the current one `η`.
pub fn transition_density(xi: Velocity, eta: Velocity, p: &ModelParams) -> Result<f64> {
    if eta == Velocity::ZERO {
        return Err(Error::InvalidParameter("transition density requires η ≠ 0".into()));
    }
    let d2 = 0.25 * eta.norm2() - (xi.w2 - 0.5 * eta.w2).powi(2) - (xi.w3 - 0.5 * eta.w3).powi(2);
    if d2 < 0.0 {
        return Ok(0.0);
    }
    if d2 == 0.0 {
        return Err(Error::TangentPoint);
    }
    let root = d2.sqrt();
    let mut sum = 0.0;
    for v1 in [0.5 * eta.w1 + root, 0.5 * eta.w1 - root] {
        let v = Velocity::new(v1, xi.w2, xi.w3);
        let dist = v.sub(eta).norm();
        if xi.w2 == 0.0 {
            // Flight is a point mass; no density in ξ1.
            continue;
        }
        sum += flight_density(xi.w1, v, p)?.value / (4.0 * PI * dist);
    }
    Ok(sum / root)
}
