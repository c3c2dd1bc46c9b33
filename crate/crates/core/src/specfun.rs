//! Special functions of the long-time asymptotics and their integral
//! identities: `H(s)`, `Φ(ζ)`, `Z(s)`, `R(s)` and `K(a)`.
//!
//! Notation: for `0 < a < 1` let `c = 4π/(1−a)`. Then
//!
//! * `H(s) = 2^{-3/2} ∫_{-π/2}^{π/2} dθ / sqrt(1 − sqrt(1−s²) sin θ)`,
//! * `Φ(ζ) = (16a/ζ) ∫_{2ζ}^∞ η^{-a-2} exp(−c η^{-a}) H(2ζ/η) dη`,
//! * `Z(s) = Φ(s^{-1/a}) s^{-(2/a+1)}`,
//! * `R(s) = 2^{-1/2} s^a (1−s²)^{-1/2} (sqrt(1+sqrt(1−s²)) + sqrt(1−sqrt(1−s²)))`,
//! * `K(a) = ∫_0^∞ dζ ∫_{2ζ}^∞ η^{-a-2} exp(−c η^{-a}) H(2ζ/η) dη`.
//!
//! `H` has the closed form
//! `H(s) = π / (2 sqrt(2) sqrt(1+x) AGM(1, sqrt((1−x)/(1+x))))`, `x = sqrt(1−s²)`,
//! obtained by recognising the θ-integral as a complete elliptic integral of
//! the first kind. It is accurate to a few ulps for every `s ∈ (0, 1]` and
//! is the production evaluator; [`h_of_s_quadrature`] evaluates the defining
//! θ-integral directly and serves as an independent cross-check.
//!
//! Substituting `u = 2ζ/η` in `Φ` gives the working representation
//! `ζ^{2+a} Φ(ζ) = 8a 2^{-a} ∫_0^1 u^a exp(−c (u/(2ζ))^a) H(u) du`,
//! which is also `Z(ζ^{-a})`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_ladder, tanh_sinh, QuadratureSpec};

/// Arithmetic–geometric mean of two positive numbers.
pub fn agm(mut x: f64, mut y: f64) -> f64 {
    for _ in 0..64 {
        let nx = 0.5 * (x + y);
        let ny = (x * y).sqrt();
        if (nx - ny).abs() <= 4.0 * f64::EPSILON * nx {
            return 0.5 * (nx + ny);
        }
        x = nx;
        y = ny;
    }
    0.5 * (x + y)
}

/// `H(s)` without range checks; `+∞` at `s = 0`.
pub(crate) fn h_unchecked(s: f64) -> f64 {
    if s <= 0.0 {
        return f64::INFINITY;
    }
    let s = s.min(1.0);
    let x = ((1.0 - s) * (1.0 + s)).sqrt();
    // (1 - x) computed without cancellation.
    let one_minus_x = s * s / (1.0 + x);
    let k = (one_minus_x / (1.0 + x)).sqrt();
    PI / (2.0 * SQRT_2 * (1.0 + x).sqrt() * agm(1.0, k))
}

/// `H(s)` for `0 < s ≤ 1` (closed form via the arithmetic–geometric mean).
pub fn h_of_s(s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("H(s) requires 0 < s <= 1, got {s}")));
    }
    Ok(h_unchecked(s))
}

/// `H(s)` from its defining θ-integral by adaptive quadrature.
///
/// With `φ = π/2 − θ` the integrand becomes
/// `1/sqrt(s²/(1+x) + 2x sin²(φ/2))`, `x = sqrt(1−s²)`, which is evaluated
/// without cancellation; its peak of width `O(s)` at `φ = 0` is passed to the
/// adaptive scheme as a break point.
pub fn h_of_s_quadrature(s: f64, rel_tol: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("H(s) requires 0 < s <= 1, got {s}")));
    }
    let x = ((1.0 - s) * (1.0 + s)).sqrt();
    let alpha = s * s / (1.0 + x);
    let f = |phi: f64| {
        let sh = (0.5 * phi).sin();
        1.0 / (alpha + 2.0 * x * sh * sh).sqrt()
    };
    let mut hints = Vec::new();
    let mut w = s;
    while w < PI {
        hints.push(w);
        w *= 4.0;
    }
    let spec = QuadratureSpec {
        rel_tol,
        abs_tol: 0.0,
        max_subdivisions: 5000,
        singularity_hints: hints,
    };
    let r = integrate(f, 0.0, PI, &spec);
    Ok(r.value / (2.0 * SQRT_2))
}

/// `H(1) = 2^{-3/2} π`.
pub const H_AT_ONE: f64 = PI / (2.0 * SQRT_2);

/// Constant of the small-`s` expansion `H(s) = −½ log s + (3/2) log 2 + o(1)`.
pub fn h_log_constant() -> f64 {
    1.5 * std::f64::consts::LN_2
}

/// `∫_0^1 H(s) ds` by quadrature (exact value `π/2`).
pub fn integral_h() -> f64 {
    // Logarithmic singularity at s = 0 and a square-root cusp at s = 1:
    // both endpoints are handled by the double-exponential rule.
    let lo = tanh_sinh(|s, _, _| h_unchecked(s), 0.0, 0.5, 1e-14).value;
    let hi = tanh_sinh(|s, _, _| h_unchecked(s), 0.5, 1.0, 1e-14).value;
    lo + hi
}

/// Partial sum `Σ_{n=0}^{N-1} binom(4n,2n) / (2^{4n} (2n+1))` (limit `√2`).
pub fn wallis_partial_sum(terms: usize) -> f64 {
    // Ratio of consecutive values of binom(4n,2n)/2^{4n}.
    let mut c = 1.0_f64;
    let mut sum = 0.0;
    for n in 0..terms {
        sum += c / (2.0 * n as f64 + 1.0);
        let m = n as f64;
        c *= (4.0 * m + 1.0) * (4.0 * m + 2.0) * (4.0 * m + 3.0) * (4.0 * m + 4.0)
            / ((2.0 * m + 1.0) * (2.0 * m + 2.0) * (2.0 * m + 1.0) * (2.0 * m + 2.0) * 16.0);
    }
    sum
}

fn check_hyperbolic(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidParameter(format!("requires 0 < a < 1, got {a}")));
    }
    Ok(())
}

/// Loss constant `c = 4π/(1−a)`.
pub fn loss_constant(a: f64) -> f64 {
    4.0 * PI / (1.0 - a)
}

/// Integrates `f` over `[0, X]` split at `breaks`, each panel by tanh–sinh.
fn panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], upper: f64, rel: f64) -> f64 {
    let mut pts = vec![0.0];
    let mut b: Vec<f64> = breaks.iter().copied().filter(|&x| x > 0.0 && x < upper).collect();
    b.sort_by(f64::total_cmp);
    pts.extend(b);
    pts.push(upper);
    pts.windows(2)
        .map(|w| tanh_sinh(|x, _, _| f(x), w[0], w[1], rel).value)
        .sum()
}

/// `Z(s) = ζ^{2+a} Φ(ζ)` with `ζ = s^{-1/a}`; the numerically stable core of
/// both `Φ` and `Z`.
///
/// Uses `Z(s) = 8a 2^{-a} ∫_0^1 u^a H(u) exp(−c' s u^a) du`, `c' = c 2^{-a}`;
/// when the exponential is sharp (`c' s` large) the variable `w = s^{1/a} u`
/// moves the boundary layer to order one.
fn z_core(s: f64, a: f64) -> f64 {
    const REL: f64 = 1e-13;
    let c = loss_constant(a);
    let cp = c * 2f64.powf(-a);
    let pref = 8.0 * a * 2f64.powf(-a);
    if s <= 0.0 {
        // Z(0) = 8a 2^{-a} ∫ u^a H(u) du.
        return pref * panels(|u| u.powf(a) * h_unchecked(u), &[0.5], 1.0, REL);
    }
    let k = cp * s;
    if k <= 30.0 {
        // Break points where the exponent reaches 1 and 10.
        let br: Vec<f64> = [1.0, 10.0]
            .iter()
            .map(|&e| (e / k).powf(1.0 / a))
            .collect();
        pref * panels(|u| u.powf(a) * h_unchecked(u) * (-k * u.powf(a)).exp(), &br, 1.0, REL)
    } else {
        // w = s^{1/a} u: ∫_0^1 u^a H(u) e^{-c' s u^a} du
        //   = s^{-(1+a)/a} ∫_0^{s^{1/a}} w^a H(w s^{-1/a}) e^{-c' w^a} dw.
        let scale = s.powf(1.0 / a);
        let cutoff = (745.0 / cp).powf(1.0 / a);
        let upper = scale.min(cutoff);
        let br: Vec<f64> = [0.1, 1.0, 5.0, 20.0, 100.0]
            .iter()
            .map(|&e| (e / cp).powf(1.0 / a))
            .collect();
        let inv = 1.0 / scale;
        let integral = panels(
            |w| w.powf(a) * h_unchecked((w * inv).min(1.0)) * (-cp * w.powf(a)).exp(),
            &br,
            upper,
            REL,
        );
        pref * integral * s.powf(-(1.0 + a) / a)
    }
}

/// `Φ(ζ)` for `ζ > 0`, `0 < a < 1`.
pub fn phi(zeta: f64, a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    if !(zeta > 0.0) {
        return Err(Error::InvalidParameter(format!("Phi requires zeta > 0, got {zeta}")));
    }
    let s = zeta.powf(-a);
    Ok(z_core(s, a) * zeta.powf(-(2.0 + a)))
}

/// `Z(s) = Φ(s^{-1/a}) s^{-(2/a+1)}` for `s > 0`.
pub fn z_of_s(s: f64, a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("Z requires s > 0, got {s}")));
    }
    Ok(z_core(s, a))
}

/// `lim_{s→0⁺} Z(s) = lim_{ζ→∞} ζ^{2+a} Φ(ζ) = 8a 2^{-a} ∫_0^1 u^a H(u) du`.
pub fn z_at_zero(a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    Ok(z_core(0.0, a))
}

/// `R(s)` for `0 < s < 1`.
///
/// Since `(sqrt(1+x) + sqrt(1−x))² = 2(1+s)` for `x = sqrt(1−s²)`, the
/// closed form reduces to `R(s) = s^a / sqrt(1−s)`, which is stable on the
/// whole interval.
pub fn r_of_s(s: f64, a: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("R(s) requires 0 < s < 1, got {s}")));
    }
    Ok(s.powf(a) / (1.0 - s).sqrt())
}

/// `∫_0^∞ Z(s) ds` by quadrature (exact value `a(1−a)`).
pub fn z_integral(a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    let spec = QuadratureSpec::rel(1e-11).with_abs(0.0);
    // Z is smooth on [0, 1]; beyond, it decays like log s / s^{1+1/a}.
    let head = integrate(|s| z_core(s, a), 0.0, 1.0, &spec).value;
    let tail = integrate_ladder(|s| z_core(s, a), 1.0, 1.0, &spec, 400).value;
    Ok(head + tail)
}

/// `∫_0^∞ ζ Φ(ζ) dζ` by quadrature (exact value `1−a`).
///
/// Evaluated in the variable `s = ζ^{-a}`, under which `ζ Φ(ζ) dζ = Z(s) ds / a`.
pub fn phi_moment(a: f64) -> Result<f64> {
    Ok(z_integral(a)? / a)
}

/// `K(a)` by quadrature of its defining double integral (exact value `(1−a)/(16a)`).
///
/// The substitutions `u = 2ζ/η` (inner) and `y = (2ζ)^{-a}` (outer) turn the
/// double integral into `(1/(2a)) ∫_0^∞ dy ∫_0^1 u^a H(u) exp(−c y u^a) du`,
/// whose outer integrand is bounded at `y = 0` and decays like `y^{-1-1/a}`.
pub fn k_of_a(a: f64) -> Result<f64> {
    check_hyperbolic(a)?;
    let c = loss_constant(a);
    let inner = |y: f64| -> f64 {
        let k = c * y;
        let br: Vec<f64> = if k > 0.0 {
            [0.1, 1.0, 10.0].iter().map(|&e| (e / k).powf(1.0 / a)).collect()
        } else {
            vec![0.5]
        };
        panels(|u| u.powf(a) * h_unchecked(u) * (-k * u.powf(a)).exp(), &br, 1.0, 1e-12)
    };
    let spec = QuadratureSpec::rel(1e-10).with_abs(0.0);
    let y0 = 1.0 / c;
    let head = integrate(inner, 0.0, y0, &spec).value;
    let tail = integrate_ladder(inner, y0, y0, &spec, 400).value;
    Ok((head + tail) / (2.0 * a))
}

/// Closed form `K(a) = (1−a)/(16a)`.
pub fn k_of_a_closed(a: f64) -> f64 {
    (1.0 - a) / (16.0 * a)
}

/// A tabulated, cubic-spline interpolant of `log Z` against `log s`, for
/// fast repeated evaluation inside multi-dimensional quadratures.
///
/// The table is built eagerly from [`z_of_s`] and is immutable afterwards.
#[derive(Debug, Clone)]
pub struct ZTable {
    a: f64,
    z0: f64,
    spline: crate::interp::CubicSpline,
    log_lo: f64,
    log_hi: f64,
    tail_slope: f64,
}

impl ZTable {
    /// Tabulates `Z` on `s ∈ [1e-16, 1e16]` with `nodes_per_decade` log-spaced nodes.
    pub fn new(a: f64, nodes_per_decade: usize) -> Result<Self> {
        check_hyperbolic(a)?;
        let log_lo = (1e-16f64).ln();
        let log_hi = (1e16f64).ln();
        let n = 32 * nodes_per_decade.max(4) + 1;
        let xs: Vec<f64> = (0..n)
            .map(|i| log_lo + (log_hi - log_lo) * i as f64 / (n - 1) as f64)
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&x| z_core(x.exp(), a).ln()).collect();
        let tail_slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
        let spline = crate::interp::CubicSpline::natural(xs, ys)?;
        Ok(Self {
            a,
            z0: z_core(0.0, a),
            spline,
            log_lo,
            log_hi,
            tail_slope,
        })
    }

    /// Homogeneity the table was built for.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Interpolated `Z(s)`.
    pub fn z(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.z0;
        }
        let x = s.ln();
        if x < self.log_lo {
            self.z0
        } else if x > self.log_hi {
            (self.spline.eval(self.log_hi) + self.tail_slope * (x - self.log_hi)).exp()
        } else {
            self.spline.eval(x).exp()
        }
    }

    /// Interpolated `Φ(ζ) = Z(ζ^{-a}) ζ^{-(2+a)}`.
    pub fn phi(&self, zeta: f64) -> f64 {
        self.z(zeta.powf(-self.a)) * zeta.powf(-(2.0 + self.a))
    }
}
