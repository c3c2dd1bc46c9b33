//! Reduced two-dimensional problem: characteristics, the delay equation for
//! `λ(τ)`, the boundary fixed point and the test of the self-similar ansatz.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{dopri5, OdeTolerances};
use crate::quad::{integrate, integrate_ladder, integrate_to_inf, QuadratureSpec};
use crate::specfun::{h_of_s, loss_constant, phi_moment};
use crate::stats::least_squares;

fn check_hyperbolic(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("the reduced problem requires 0 < a < 1, got {a}")))
    }
}

/// State along a characteristic started at `(0, ξ2₀)` at time `τ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharState {
    /// First component.
    pub xi1: f64,
    /// Second component.
    pub xi2: f64,
    /// Flow amplitude `G(ξ(τ), τ) / G(0, ξ2₀, τ₀)`.
    pub amplitude: f64,
    /// Logarithm of the flow amplitude (finite where `amplitude` underflows).
    pub log_amplitude: f64,
    /// Time.
    pub tau: f64,
    /// Accumulated loss integral `∫_{τ₀}^{τ} ξ1(s)^{−a} ds`.
    pub loss_integral: f64,
}

/// Integrates the characteristic system
/// `ξ1' = −ξ1/a + ξ2`, `ξ2' = −(1/a − 1) ξ2`, `(log G)' = (2/a − 1) − 4π ξ1^{−a}`
/// from `(0, ξ2₀)` at `τ₀` to `τ`.
///
/// The loss rate is singular like `(τ−τ₀)^{−a}` at the start; the
/// integration runs in `σ = (τ−τ₀)^{1−a}`, in which every right-hand side
/// is bounded.
pub fn integrate_characteristics(xi20: f64, tau0: f64, tau: f64, a: f64) -> Result<CharState> {
    check_hyperbolic(a)?;
    if !(xi20 > 0.0) || !(tau > tau0) {
        return Err(Error::InvalidParameter("characteristics require xi20 > 0 and tau > tau0".into()));
    }
    let e = 1.0 / (1.0 - a);
    let rhs = |sigma: f64, y: &[f64; 4]| -> [f64; 4] {
        let s = sigma.max(0.0).powf(e);
        let jac = s.powf(a) * e; // dτ/dσ
        let (x1, x2) = (y[0], y[1]);
        // ξ1^{−a} dτ/dσ = (s/ξ1)^a / (1−a), with limit ξ2^{−a}/(1−a) at s = 0.
        let dl = if s > 0.0 && x1 > 0.0 { (s / x1).powf(a) * e } else { x2.powf(-a) * e };
        [
            jac * (-x1 / a + x2),
            -jac * (1.0 / a - 1.0) * x2,
            dl,
            jac * (2.0 / a - 1.0) - 4.0 * PI * dl,
        ]
    };
    let tol = OdeTolerances {
        rel_tol: 1e-12,
        abs_tol: 1e-30,
        max_steps: 2_000_000,
    };
    let sigma_end = (tau - tau0).powf(1.0 - a);
    let (y, _) = dopri5(rhs, 0.0, [0.0, xi20, 0.0, 0.0], sigma_end, &tol)?;
    Ok(CharState {
        xi1: y[0],
        xi2: y[1],
        amplitude: y[3].exp(),
        log_amplitude: y[3],
        tau,
        loss_integral: y[2],
    })
}

/// Closed-form characteristic through `(0, ξ2₀, τ₀)`.
pub fn characteristic_closed_form(xi20: f64, tau0: f64, tau: f64, a: f64) -> Result<CharState> {
    check_hyperbolic(a)?;
    let d = tau - tau0;
    let xi1 = xi20 * (-d / a).exp() * d.exp_m1();
    let xi2 = xi20 * (-(1.0 / a - 1.0) * d).exp();
    let loss = loss_exponent(xi1, xi2, a)?;
    let log_amplitude = (2.0 / a - 1.0) * d - 4.0 * PI * loss;
    Ok(CharState {
        xi1,
        xi2,
        amplitude: log_amplitude.exp(),
        log_amplitude,
        tau,
        loss_integral: loss,
    })
}

/// Loss integral along a characteristic, `ξ1^{1−a} / ((1−a) ξ2)`.
pub fn loss_exponent(xi1: f64, xi2: f64, a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    if !(xi2 > 0.0 && xi1 >= 0.0 && xi1 <= xi2) {
        return Err(Error::InvalidParameter("loss exponent requires 0 <= xi1 <= xi2, xi2 > 0".into()));
    }
    Ok(xi1.powf(1.0 - a) / ((1.0 - a) * xi2))
}

/// Result of iterating the delay equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayFit {
    /// `(τ_k, λ(τ_k))` on the geometric grid.
    pub points: Vec<(f64, f64)>,
    /// Fitted exponent `β` of `λ ∝ τ^β`.
    pub beta: f64,
    /// Standard error of the fitted exponent.
    pub beta_stderr: f64,
    /// Moment `∫ ζ Φ(ζ) dζ` used in the recursion.
    pub moment: f64,
}

/// Iterates `λ(τ) = m λ((1−a)τ)` with `m = ∫ ζΦ(ζ) dζ` on `τ_k = (1−a)^{−k}`.
pub fn delay_iterate(lambda0: f64, a: f64, n_steps: usize) -> Result<DelayFit> {
    check_hyperbolic(a)?;
    delay_iterate_with_moment(lambda0, a, n_steps, phi_moment(a)?)
}

/// [`delay_iterate`] with an explicit moment.
pub fn delay_iterate_with_moment(lambda0: f64, a: f64, n_steps: usize, moment: f64) -> Result<DelayFit> {
    check_hyperbolic(a)?;
    if n_steps < 3 {
        return Err(Error::InvalidParameter("delay iteration needs at least 3 steps".into()));
    }
    if !(lambda0 > 0.0 && moment > 0.0) {
        return Err(Error::InvalidParameter("lambda0 and the moment must be positive".into()));
    }
    let mut points = Vec::with_capacity(n_steps + 1);
    let (mut tau, mut lambda) = (1.0, lambda0);
    points.push((tau, lambda));
    for _ in 0..n_steps {
        tau /= 1.0 - a;
        lambda *= moment;
        points.push((tau, lambda));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let fit = least_squares(&x, &y)?;
    Ok(DelayFit {
        points,
        beta: fit.slope,
        beta_stderr: fit.slope_stderr,
        moment,
    })
}

/// Boundary data `U(ζ)` on a log-spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGrid {
    /// Strictly increasing positive nodes.
    pub zeta_nodes: Vec<f64>,
    /// Nonnegative values at the nodes.
    pub values: Vec<f64>,
    /// Time the data refer to.
    pub tau: f64,
}

impl BoundaryGrid {
    /// `n` log-spaced nodes on `[lo, hi]` with constant value `value`.
    pub fn constant(lo: f64, hi: f64, n: usize, value: f64, tau: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && n >= 3) {
            return Err(Error::InvalidParameter("grid needs 0 < lo < hi and at least 3 nodes".into()));
        }
        let (l0, l1) = (lo.ln(), hi.ln());
        let zeta_nodes = (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect();
        Ok(Self {
            zeta_nodes,
            values: vec![value; n],
            tau,
        })
    }

    fn validate(&self) -> Result<()> {
        let n = self.zeta_nodes.len();
        if n < 3 || self.values.len() != n {
            return Err(Error::InvalidParameter("grid needs at least 3 nodes and matching values".into()));
        }
        if self.zeta_nodes[0] <= 0.0 || self.zeta_nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("grid nodes must be positive and strictly increasing".into()));
        }
        if self.values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidParameter("grid values must be nonnegative".into()));
        }
        Ok(())
    }

    /// `∫_0^∞ y U(y) dy`: Simpson's rule in `log y` on the grid, plus the
    /// analytic tails `U ~ C log(1/y)/y` below and
    /// `U ~ y^{−(2+a)} (C0 + C1 y^{−a})` above.
    pub fn first_moment(&self, a: f64) -> f64 {
        let x: Vec<f64> = self.zeta_nodes.iter().map(|z| z.ln()).collect();
        let f: Vec<f64> = self.zeta_nodes.iter().zip(&self.values).map(|(z, u)| z * z * u).collect();
        let n = x.len();
        let mut core = 0.0;
        let mut i = 0;
        while i + 2 < n {
            let h0 = x[i + 1] - x[i];
            let h1 = x[i + 2] - x[i + 1];
            // Simpson's rule for (possibly) unequal sub-intervals.
            let hs = h0 + h1;
            core += hs / 6.0
                * (f[i] * (2.0 - h1 / h0) + f[i + 1] * hs * hs / (h0 * h1) + f[i + 2] * (2.0 - h0 / h1));
            i += 2;
        }
        if i + 1 < n {
            core += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
        }
        let (z0, u0) = (self.zeta_nodes[0], self.values[0]);
        let low = if z0 < 1.0 {
            // U ≈ C log(1/y)/y: ∫_0^{z0} y U dy = C z0 (log(1/z0) + 1).
            let l = (1.0 / z0).ln();
            let c = u0 * z0 / l;
            c * z0 * (l + 1.0)
        } else {
            0.5 * z0 * z0 * u0
        };
        let (z1, u1) = (self.zeta_nodes[n - 1], self.values[n - 1]);
        // U ≈ y^{−(2+a)} (C0 + C1 y^{−a}): the correction decays slowly for
        // small a, so both coefficients are matched on the last node and on
        // the node nearest to a decade below it.
        let j = self
            .zeta_nodes
            .iter()
            .position(|&z| z >= 0.1 * z1 * (1.0 - 1e-9))
            .filter(|&j| j + 1 < n && self.zeta_nodes[j] > 1.0);
        let high = match j {
            Some(j) => {
                let (zj, uj) = (self.zeta_nodes[j], self.values[j]);
                let (pj, p1) = (uj * zj.powf(2.0 + a), u1 * z1.powf(2.0 + a));
                let (ej, e1) = (zj.powf(-a), z1.powf(-a));
                let c1 = (pj - p1) / (ej - e1);
                let c0 = p1 - c1 * e1;
                c0 * e1 / a + c1 * e1 * e1 / (2.0 * a)
            }
            // ∫_{z1}^∞ y U dy = z1² U(z1)/a for a pure power tail.
            None => z1 * z1 * u1 / a,
        };
        core + low + high
    }
}

/// Right-hand side kernel `(16a/ζ) ∫_{2ζ}^∞ e^{−cη^{−a}} η^{−(2+a)} H(2ζ/η) dη`,
/// evaluated directly in the `η` variable.
pub fn boundary_kernel(zeta: f64, a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    let c = loss_constant(a);
    let f = |eta: f64| {
        let u = (2.0 * zeta / eta).min(1.0);
        let h = h_of_s(u).unwrap_or(0.0);
        (-c * eta.powf(-a)).exp() * eta.powf(-(2.0 + a)) * h
    };
    // The exponential switches on around η ≈ c^{1/a}.
    let knee = c.powf(1.0 / a);
    let start = 2.0 * zeta;
    let spec = QuadratureSpec::rel(1e-11).with_abs(0.0);
    let head = if start < knee {
        integrate(&f, start, knee, &spec.clone().with_hints(&[0.01 * knee, 0.1 * knee])).value
    } else {
        0.0
    };
    let from = start.max(knee);
    let tail = integrate_ladder(&f, from, from, &spec, 400).value;
    Ok(16.0 * a / zeta * (head + tail))
}

/// Applies the boundary operator `U ↦ K(ζ) ∫ y U(y) dy` `iterations` times.
///
/// Each application advances the time from `(1−a)τ` to `τ`.
pub fn boundary_fixed_point(grid: &BoundaryGrid, a: f64, iterations: usize) -> Result<BoundaryGrid> {
    check_hyperbolic(a)?;
    grid.validate()?;
    let kernel: Vec<f64> = grid.zeta_nodes.iter().map(|&z| boundary_kernel(z, a)).collect::<Result<_>>()?;
    let mut current = grid.clone();
    for _ in 0..iterations {
        let lambda = current.first_moment(a);
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Underflow);
        }
        let values: Vec<f64> = kernel.iter().map(|k| k * lambda).collect();
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::Underflow);
        }
        current = BoundaryGrid {
            zeta_nodes: current.zeta_nodes.clone(),
            values,
            tau: current.tau / (1.0 - a),
        };
    }
    if current.values.iter().all(|&v| v == 0.0) {
        return Err(Error::Underflow);
    }
    Ok(current)
}

/// Best-fit scale `c` of `U ≈ c Φ` (least squares on `log U − log Φ`) and the
/// maximal relative deviation `max |U/(cΦ) − 1|` over the nodes.
pub fn shape_error(grid: &BoundaryGrid, phi: &[f64]) -> Result<(f64, f64)> {
    if phi.len() != grid.values.len() {
        return Err(Error::InvalidParameter("shape comparison needs matching lengths".into()));
    }
    let logs: Vec<f64> = grid
        .values
        .iter()
        .zip(phi)
        .map(|(u, p)| (u / p).ln())
        .collect();
    if logs.iter().any(|l| !l.is_finite()) {
        return Err(Error::Underflow);
    }
    let c = (logs.iter().sum::<f64>() / logs.len() as f64).exp();
    let err = grid
        .values
        .iter()
        .zip(phi)
        .map(|(u, p)| (u / (c * p) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((c, err))
}

/// Outcome of the self-similar ansatz test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimReport {
    /// Homogeneity.
    pub a: f64,
    /// `(ξ1, λ(ξ1))` samples.
    pub samples: Vec<(f64, f64)>,
    /// `λ(ξ1) ξ1^{1−a} / A` at the samples.
    pub prefactor_ratios: Vec<f64>,
    /// Richardson-extrapolated limit of the prefactor ratio.
    pub ratio: f64,
    /// Fitted exponent of `ξ1` in `λ(ξ1)`.
    pub exponent: f64,
}

/// `λ(ξ1) = ∫∫_{ξ2>ξ1} F dξ2 dξ3` for the stationary ansatz
/// `F = 4A (ξ2−ξ1)^{3k} / (|ξ̃|² ξ2^{1+3k}) e^{−c ξ1^{1−a}/ξ2}`, `k = 1/a − 1`,
/// with input amplitude `A = 1`.
pub fn ansatz_lambda(xi1: f64, a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    if !(xi1 > 0.0) {
        return Err(Error::InvalidParameter("ansatz lambda requires xi1 > 0".into()));
    }
    let k3 = 3.0 * (1.0 / a - 1.0);
    let c = loss_constant(a);
    let spec_inner = QuadratureSpec::rel(1e-12).with_abs(0.0);
    // ξ2 = ξ1 e^v: (ξ2−ξ1)^{3k}/ξ2^{1+3k} dξ2 = (1−e^{−v})^{3k} dv.
    let integrand = |v: f64| -> f64 {
        let xi2 = xi1 * v.exp();
        let transverse = 2.0 * integrate_to_inf(|x3: f64| 1.0 / (xi2 * xi2 + x3 * x3), 0.0, &spec_inner).value;
        let w = -(-v).exp_m1();
        4.0 * w.powf(k3) * (-c * xi1.powf(1.0 - a) / xi2).exp() * transverse
    };
    let peak = (c * xi1.powf(-a)).ln().max(1.0);
    let spec = QuadratureSpec::rel(1e-11).with_abs(0.0).with_hints(&[0.5 * peak, peak, peak + 3.0]);
    let head = integrate(integrand, 0.0, peak + 10.0, &spec).value;
    let tail = integrate_ladder(integrand, peak + 10.0, 10.0, &spec, 200).value;
    Ok(head + tail)
}

/// Tests the self-similar ansatz `λ(ξ1) ~ A ξ1^{−(1−a)}`: returns the
/// recovered prefactor divided by the input amplitude.
pub fn selfsim_refutation(a: f64) -> Result<SelfSimReport> {
    check_hyperbolic(a)?;
    let xs = [1e-3, 1e-4, 1e-5, 1e-6];
    let mut samples = Vec::new();
    let mut ratios = Vec::new();
    for &x in &xs {
        let l = ansatz_lambda(x, a)?;
        samples.push((x, l));
        ratios.push(l * x.powf(1.0 - a));
    }
    // The leading correction is O(ξ1^a): eliminate it from consecutive pairs,
    // then once more for the O(ξ1^{2a}) term.
    let rich = |r: &[f64], p: f64| -> Vec<f64> {
        r.windows(2)
            .enumerate()
            .map(|(i, w)| {
                let q = (xs[i + 1] / xs[i]).powf(p);
                (w[1] - q * w[0]) / (1.0 - q)
            })
            .collect()
    };
    let r1 = rich(&ratios, a);
    let r2 = rich(&r1, 2.0 * a);
    let ratio = *r2.last().unwrap_or(&r1[r1.len() - 1]);
    let lx: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let fit = least_squares(&lx, &ly)?;
    Ok(SelfSimReport {
        a,
        samples,
        prefactor_ratios: ratios,
        ratio,
        exponent: fit.slope,
    })
}
