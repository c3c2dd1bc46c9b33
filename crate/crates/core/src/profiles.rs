//! Asymptotic profiles of the rescaled distribution in the hyperbolic
//! regime `0 < a < 1`.
//!
//! With `c = 4π/(1−a)`, `L = log(1/(1−a))`, `τ₀ = τ + log(1 − ξ1/ξ2)` and
//! `A = M0/L`:
//!
//! * `λ(τ) = A/τ`;
//! * `G(0, ξ2, τ) = M0 e^{−2τ} Φ(ξ2 e^{−τ}) / ((1−a) L τ)`;
//! * `G(ξ1, ξ2, τ) = M0 e^{−2τ} Φ(ξ2^{1/a+1} (ξ2−ξ1)^{−1/a} e^{−τ})
//!   e^{−c ξ1^{1−a}/ξ2} (1−ξ1/ξ2)^{−(2/a+1)} / ((1−a) L τ₀)`, or
//!   equivalently `M0 e^{aτ} Z(s) e^{−c ξ1^{1−a}/ξ2} / ((1−a) L τ₀ ξ2^{2+a})`
//!   with `s = (ξ2−ξ1) e^{aτ} / ξ2^{1+a}`;
//! * `F(0, ξ2, ξ3, τ) = 8aM0 e^{aτ} J(β) / ((1−a) L ξ2 (2|ξ̃|)^{2+a} τ)` with
//!   `J(β) = ∫_0^1 R(u) e^{−cβu^a} du`, `β = (2|ξ̃| e^{−τ})^{−a}`,
//!   `ξ̃ = (ξ2, ξ3)`;
//! * `F(ξ, τ)` — the same with `τ → τ₀`, `β → (1−ξ1/ξ2) β` and the factor
//!   `e^{−c ξ1^{1−a}/ξ2}`.
//!
//! The profiles carry the loss rate `4π|ξ1|^{−a}` of the rescaled equation.
//! Where `τ₀ ≤ 0` the characteristics start at the initial time rather than
//! on the plane `ξ1 = 0`; the profile is not defined there and evaluation
//! reports [`Error::NegativeTauZero`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_to_inf, tanh_sinh, QuadratureSpec};
use crate::specfun::{loss_constant, z_of_s, ZTable};

/// Parameters of the asymptotic profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    /// Homogeneity `a ∈ (0, 1)`.
    pub a: f64,
    /// Initial mass `M0 > 0`.
    #[serde(rename = "M0")]
    pub m0: f64,
    /// Amplitude `A = M0 / log(1/(1−a))`.
    #[serde(rename = "A")]
    pub amplitude: f64,
}

impl ProfileParams {
    /// Builds the parameters, deriving the amplitude from the mass.
    pub fn new(a: f64, m0: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!("profiles require 0 < a < 1, got {a}")));
        }
        if !(m0 > 0.0 && m0.is_finite()) {
            return Err(Error::InvalidParameter(format!("M0 must be positive, got {m0}")));
        }
        Ok(Self {
            a,
            m0,
            amplitude: m0 / log_inv_one_minus(a),
        })
    }
}

/// `L = log(1/(1−a))`.
fn log_inv_one_minus(a: f64) -> f64 {
    -(-a).ln_1p()
}

/// `λ(τ) = A/τ`.
pub fn lambda_tau(tau: f64, pp: &ProfileParams) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda requires tau > 0, got {tau}")));
    }
    Ok(pp.amplitude / tau)
}

/// Source of `Z` values.
#[derive(Debug, Clone)]
enum ZSource {
    Exact,
    Table(ZTable),
}

/// Options of the mass quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassOptions {
    /// Upper limit of `ξ2` as a multiple of `e^τ`.
    pub xi2_max_factor: f64,
    /// Lower limit of `log ξ2`.
    pub log_xi2_min: f64,
    /// Characteristics with `τ₀` below this value are excluded: near
    /// `τ₀ = 0` the profile has the non-integrable factor `1/τ₀`.
    pub tau0_min: f64,
    /// Relative tolerance of the nested quadratures.
    pub rel_tol: f64,
}

impl Default for MassOptions {
    fn default() -> Self {
        Self {
            xi2_max_factor: 4.0,
            log_xi2_min: -30.0,
            tau0_min: 1.0,
            rel_tol: 1e-8,
        }
    }
}

/// Evaluator of the asymptotic profiles for fixed parameters.
#[derive(Debug, Clone)]
pub struct Profile {
    pp: ProfileParams,
    z: ZSource,
}

impl Profile {
    /// Evaluator using direct quadrature for every `Z` value.
    pub fn exact(pp: ProfileParams) -> Self {
        Self { pp, z: ZSource::Exact }
    }

    /// Evaluator using a tabulated `Z` (for repeated evaluation inside
    /// multi-dimensional quadratures).
    pub fn tabulated(pp: ProfileParams, nodes_per_decade: usize) -> Result<Self> {
        Ok(Self {
            pp,
            z: ZSource::Table(ZTable::new(pp.a, nodes_per_decade)?),
        })
    }

    /// Parameters.
    pub fn params(&self) -> &ProfileParams {
        &self.pp
    }

    fn z(&self, s: f64) -> f64 {
        match &self.z {
            ZSource::Exact => z_of_s(s, self.pp.a).unwrap_or(0.0),
            ZSource::Table(t) => t.z(s),
        }
    }

    fn phi(&self, zeta: f64) -> f64 {
        let a = self.pp.a;
        self.z(zeta.powf(-a)) * zeta.powf(-(2.0 + a))
    }

    /// `M0 / ((1−a) L)`.
    fn prefactor(&self) -> f64 {
        self.pp.m0 / ((1.0 - self.pp.a) * log_inv_one_minus(self.pp.a))
    }

    /// Boundary value `G(0, ξ2, τ)`.
    pub fn g_boundary(&self, xi2: f64, tau: f64) -> Result<f64> {
        if !(xi2 > 0.0 && tau > 0.0) {
            return Err(Error::InvalidParameter("G boundary requires xi2 > 0 and tau > 0".into()));
        }
        Ok(self.prefactor() * (-2.0 * tau).exp() * self.phi(xi2 * (-tau).exp()) / tau)
    }

    fn check_cone(xi1: f64, xi2: f64, tau: f64) -> Result<f64> {
        if !(xi1 >= 0.0 && xi2 > xi1 && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "profile requires 0 <= xi1 < xi2 and tau > 0, got ({xi1}, {xi2}, {tau})"
            )));
        }
        let tau0 = tau + ((xi2 - xi1) / xi2).ln();
        if tau0 <= 0.0 {
            return Err(Error::NegativeTauZero(tau0));
        }
        Ok(tau0)
    }

    /// Interior profile `G(ξ1, ξ2, τ)` in the `Φ` form.
    pub fn g_profile(&self, xi1: f64, xi2: f64, tau: f64) -> Result<f64> {
        let a = self.pp.a;
        let tau0 = Self::check_cone(xi1, xi2, tau)?;
        let gap = xi2 - xi1;
        let ratio = gap / xi2;
        let zeta = xi2.powf(1.0 / a + 1.0) * gap.powf(-1.0 / a) * (-tau).exp();
        let loss = loss_constant(a) * xi1.powf(1.0 - a) / xi2;
        Ok(self.prefactor() * (-2.0 * tau).exp() * self.phi(zeta) * (-loss).exp() * ratio.powf(-(2.0 / a + 1.0))
            / tau0)
    }

    /// Interior profile `G(ξ1, ξ2, τ)` in the `Z` form.
    pub fn g_profile_z(&self, xi1: f64, xi2: f64, tau: f64) -> Result<f64> {
        let tau0 = Self::check_cone(xi1, xi2, tau)?;
        Ok(self.g_from_gap(xi2, xi2 - xi1, tau, tau0))
    }

    /// `Z`-form profile parametrised by the gap `ξ2 − ξ1` (no cancellation
    /// near the rim `ξ1 ≈ ξ2`).
    fn g_from_gap(&self, xi2: f64, gap: f64, tau: f64, tau0: f64) -> f64 {
        let a = self.pp.a;
        let s = gap * (a * tau).exp() / xi2.powf(1.0 + a);
        let xi1 = xi2 - gap;
        let loss = loss_constant(a) * xi1.max(0.0).powf(1.0 - a) / xi2;
        self.prefactor() * (-loss).exp() * (a * tau).exp() / xi2.powf(2.0 + a) * self.z(s) / tau0
    }

    /// `J(β) = ∫_1^∞ R(1/z) e^{−cβz^{−a}} dz/z² = ∫_0^1 R(u) e^{−cβu^a} du`.
    fn r_weighted(&self, beta: f64) -> f64 {
        let a = self.pp.a;
        let cb = loss_constant(a) * beta;
        tanh_sinh(
            // `dr = 1 − u` is supplied without cancellation.
            |u, _, dr| u.powf(a) / dr.sqrt() * (-cb * u.powf(a)).exp(),
            0.0,
            1.0,
            1e-12,
        )
        .value
    }

    /// Boundary value `F(0, ξ2, ξ3, τ)`.
    pub fn f_boundary(&self, xi2: f64, xi3: f64, tau: f64) -> Result<f64> {
        if !(xi2 > 0.0 && tau > 0.0) {
            return Err(Error::InvalidParameter("F boundary requires xi2 > 0 and tau > 0".into()));
        }
        let a = self.pp.a;
        let r2 = 2.0 * xi2.hypot(xi3);
        let beta = (r2 * (-tau).exp()).powf(-a);
        Ok(8.0 * a * self.prefactor() * (a * tau).exp() * self.r_weighted(beta) / (xi2 * r2.powf(2.0 + a) * tau))
    }

    /// Interior profile `F(ξ1, ξ2, ξ3, τ)`.
    pub fn f_profile(&self, xi1: f64, xi2: f64, xi3: f64, tau: f64) -> Result<f64> {
        let a = self.pp.a;
        let tau0 = Self::check_cone(xi1, xi2, tau)?;
        let ratio = (xi2 - xi1) / xi2;
        let r2 = 2.0 * xi2.hypot(xi3);
        let beta = ratio * (r2 * (-tau).exp()).powf(-a);
        let loss = loss_constant(a) * xi1.powf(1.0 - a) / xi2;
        Ok(8.0 * a * self.prefactor() * (a * tau).exp() * (-loss).exp() * self.r_weighted(beta)
            / (xi2 * r2.powf(2.0 + a) * tau0))
    }

    /// Interior `F` obtained by transporting the boundary value along the
    /// characteristic through `(ξ1, ξ2, ξ3, τ)`.
    pub fn f_profile_by_transport(&self, xi1: f64, xi2: f64, xi3: f64, tau: f64) -> Result<f64> {
        let a = self.pp.a;
        let tau0 = Self::check_cone(xi1, xi2, tau)?;
        let ratio = (xi2 - xi1) / xi2;
        let stretch = ratio.powf(-(1.0 / a - 1.0));
        let boundary = self.f_boundary(xi2 * stretch, xi3 * stretch, tau0)?;
        let loss = loss_constant(a) * xi1.powf(1.0 - a) / xi2;
        Ok(boundary * (-loss).exp() * ratio.powf(-(3.0 / a - 2.0)))
    }

    /// `∫_ℝ F(ξ1, ξ2, ξ3, τ) dξ3` by quadrature.
    pub fn f_marginal(&self, xi1: f64, xi2: f64, tau: f64, rel_tol: f64) -> Result<f64> {
        Self::check_cone(xi1, xi2, tau)?;
        let spec = QuadratureSpec::rel(rel_tol).with_abs(0.0);
        let f = |x3: f64| self.f_profile(xi1, xi2, x3, tau).unwrap_or(0.0);
        let head = integrate(f, 0.0, xi2, &spec).value;
        let tail = integrate_to_inf(f, xi2, &spec).value;
        Ok(2.0 * (head + tail))
    }

    /// Inner mass integral at fixed `ℓ = log ξ2` over `u = log s ∈ [u_lo, u_hi]`,
    /// clipped to the admissible range `τ₀ ≥ tau0_min`.
    fn inner_mass(&self, ell: f64, tau: f64, u_hi_cap: f64, opts: &MassOptions) -> f64 {
        let a = self.pp.a;
        let c = loss_constant(a);
        let u_max = a * (tau - ell);
        let u_cut = opts.tau0_min - (1.0 - a) * tau - a * ell;
        let u_hi = u_max.min(u_hi_cap);
        // Z(e^u) e^u decays like e^u below and like e^{−u/a} above u = 0.
        let u_lo = u_cut.max(-60.0);
        if u_hi <= u_lo {
            return 0.0;
        }
        let xi2_neg_a = (-a * ell).exp();
        let f = |u: f64| {
            let tau0 = (1.0 - a) * tau + a * ell + u;
            let one_minus_q = -(u + a * ell - a * tau).exp_m1();
            let loss = c * xi2_neg_a * one_minus_q.max(0.0).powf(1.0 - a);
            let s = u.exp();
            self.z(s) * s * (-loss).exp() / tau0
        };
        let mut hints: Vec<f64> = vec![0.0, -5.0, 5.0];
        hints.push(u_cut + 1.0);
        let spec = QuadratureSpec {
            rel_tol: opts.rel_tol,
            abs_tol: 1e-300,
            max_subdivisions: 2000,
            singularity_hints: hints,
        };
        integrate(f, u_lo, u_hi, &spec).value
    }

    fn mass_over(&self, ell_lo: f64, ell_hi: f64, tau: f64, u_hi_cap: f64, opts: &MassOptions) -> f64 {
        if ell_hi <= ell_lo {
            return 0.0;
        }
        let a = self.pp.a;
        // The loss factor switches on around ξ2^a ≈ c; the boundary of the
        // Z support sits at ℓ ≈ τ.
        let knee = loss_constant(a).ln() / a;
        let spec = QuadratureSpec {
            rel_tol: opts.rel_tol,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            singularity_hints: vec![0.0, knee, tau, 0.5 * (knee + tau)],
        };
        self.prefactor() * integrate(|ell| self.inner_mass(ell, tau, u_hi_cap, opts), ell_lo, ell_hi, &spec).value
    }

    fn ell_range(&self, tau: f64, opts: &MassOptions) -> (f64, f64) {
        (opts.log_xi2_min, tau + opts.xi2_max_factor.ln())
    }

    /// Total mass `∫∫ G dξ1 dξ2` over `0 ≤ ξ1 ≤ ξ2 ≤ Ξ_max`.
    pub fn total_mass(&self, tau: f64, opts: &MassOptions) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter("mass requires tau > 0".into()));
        }
        let (lo, hi) = self.ell_range(tau, opts);
        Ok(self.mass_over(lo, hi, tau, f64::INFINITY, opts))
    }

    /// Mass with `log ξ2 ∈ [ell_lo, ell_hi]` (clipped to the quadrature range).
    pub fn mass_in_log_range(&self, ell_lo: f64, ell_hi: f64, tau: f64, opts: &MassOptions) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter("mass requires tau > 0".into()));
        }
        let (lo, hi) = self.ell_range(tau, opts);
        Ok(self.mass_over(ell_lo.max(lo), ell_hi.min(hi), tau, f64::INFINITY, opts))
    }

    /// Mass per dyadic band `ξ2 ∈ [2^k, 2^{k+1})`, normalised by the total mass.
    pub fn dyadic_fractions(&self, tau: f64, opts: &MassOptions) -> Result<Vec<(i32, f64)>> {
        let total = self.total_mass(tau, opts)?;
        let (lo, hi) = self.ell_range(tau, opts);
        let ln2 = std::f64::consts::LN_2;
        let k_lo = (lo / ln2).floor() as i32;
        let k_hi = (hi / ln2).ceil() as i32;
        let mut out = Vec::new();
        for k in k_lo..k_hi {
            let a = (k as f64 * ln2).max(lo);
            let b = ((k + 1) as f64 * ln2).min(hi);
            out.push((k, self.mass_over(a, b, tau, f64::INFINITY, opts) / total));
        }
        Ok(out)
    }

    /// Fraction of the mass in the rim `(ξ2−ξ1)/ξ2 ≤ (ξ2 e^{−τ})^a`
    /// (equivalently `s ≤ 1`).
    pub fn concentration_fraction(&self, tau: f64, opts: &MassOptions) -> Result<f64> {
        let total = self.total_mass(tau, opts)?;
        let (lo, hi) = self.ell_range(tau, opts);
        Ok(self.mass_over(lo, hi, tau, 0.0, opts) / total)
    }
}

/// `λ(τ)`-free convenience wrapper: `G(0, ξ2, τ)` with exact `Φ`.
pub fn g_boundary(xi2: f64, tau: f64, pp: &ProfileParams) -> Result<f64> {
    Profile::exact(*pp).g_boundary(xi2, tau)
}

/// `G(ξ1, ξ2, τ)` with exact `Φ`.
pub fn g_profile(xi1: f64, xi2: f64, tau: f64, pp: &ProfileParams) -> Result<f64> {
    Profile::exact(*pp).g_profile(xi1, xi2, tau)
}

/// `F(0, ξ2, ξ3, τ)` with exact quadrature.
pub fn f_boundary(xi2: f64, xi3: f64, tau: f64, pp: &ProfileParams) -> Result<f64> {
    Profile::exact(*pp).f_boundary(xi2, xi3, tau)
}

/// `F(ξ1, ξ2, ξ3, τ)` with exact quadrature.
pub fn f_profile(xi1: f64, xi2: f64, xi3: f64, tau: f64, pp: &ProfileParams) -> Result<f64> {
    Profile::exact(*pp).f_profile(xi1, xi2, xi3, tau)
}

/// Total mass of `G` at time `τ` (tabulated `Z`, default options).
pub fn total_mass_g(tau: f64, pp: &ProfileParams, opts: &MassOptions) -> Result<f64> {
    Profile::tabulated(*pp, 64)?.total_mass(tau, opts)
}

/// Compares `∫ K_τ(ξ1) φ(ξ1) dξ1` with `Z₀ φ(ξ2)`, where
/// `K_τ(ξ1) = e^{aτ} ξ2^{−(1+a)} Z((ξ2−ξ1) e^{aτ} / ξ2^{1+a})` on `0 ≤ ξ1 ≤ ξ2`
/// and `Z₀ = a(1−a)`.
pub fn mollifier_check<T: Fn(f64) -> f64>(xi2: f64, tau: f64, pp: &ProfileParams, testfn: T) -> Result<(f64, f64)> {
    if !(xi2 > 0.0 && tau > 0.0) {
        return Err(Error::InvalidParameter("mollifier check requires xi2 > 0 and tau > 0".into()));
    }
    let a = pp.a;
    let profile = Profile::exact(*pp);
    let width = xi2.powf(1.0 + a) * (-a * tau).exp();
    let s_max = xi2 / width;
    // ∫_0^{ξ2} K φ dξ1 = ∫_0^{s_max} Z(s) φ(ξ2 − width·s) ds, split in log s.
    let f = |u: f64| {
        let s = u.exp();
        profile.z(s) * testfn(xi2 - width * s) * s
    };
    let spec = QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-15,
        max_subdivisions: 2000,
        singularity_hints: vec![0.0, s_max.ln() - 1.0],
    };
    let smeared = integrate(f, -40.0, s_max.ln(), &spec).value;
    Ok((smeared, a * (1.0 - a) * testfn(xi2)))
}

/// `∫ C⁺F dξ` for the gain operator
/// `C⁺F(ξ) = 8δ(ξ1) / ((2|ξ̃|)^{1+a} t^{1−a}) ∫_0^π sinθ |sin2θ|^{a−1} m(2|ξ̃|/(t sin2θ)) dθ`,
/// where `m(σ) = ∫ F(σ, η) dη` is supported in `[σ_lo, σ_hi]`.
pub fn gain_mass<M: Fn(f64) -> f64>(m: M, support: (f64, f64), a: f64, t: f64, rel_tol: f64) -> f64 {
    let (lo, hi) = support;
    // Polar coordinates in ξ̃ give 2π r dr; r^{−a} is removed by r = ρ^{1/(1−a)}.
    let spec = QuadratureSpec::rel(rel_tol).with_abs(0.0).with_hints(&[0.0]);
    let e = 1.0 / (1.0 - a);
    let radial = |theta: f64| -> f64 {
        let s2 = (2.0 * theta).sin();
        let (sl, sh) = if s2 > 0.0 { (lo.max(0.0), hi.max(0.0)) } else { ((-hi).max(0.0), (-lo).max(0.0)) };
        if sh <= sl || s2 == 0.0 {
            return 0.0;
        }
        let scale = 0.5 * t * s2.abs();
        let (r_lo, r_hi) = (scale * sl, scale * sh);
        let g = |rho: f64| {
            let r = rho.powf(e);
            let sigma = 2.0 * r / (t * s2);
            m(sigma)
        };
        // ∫ 2π r (2r)^{−1−a} m dr = π 2^{−a} ∫ r^{−a} m dr = π 2^{−a} e ∫ m(r(ρ)) dρ.
        let inner = integrate(g, r_lo.powf(1.0 - a), r_hi.powf(1.0 - a), &spec).value;
        8.0 / t.powf(1.0 - a) * theta.sin() * s2.abs().powf(a - 1.0) * PI * 2f64.powf(-a) * e * inner
    };
    let outer = QuadratureSpec::rel(rel_tol).with_abs(0.0).with_hints(&[PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]);
    integrate(radial, 0.0, PI, &outer).value
}

/// `∫ C⁻F dξ = 4π ∫ |σ|^{−a} m(σ) dσ` for the loss operator.
pub fn loss_mass<M: Fn(f64) -> f64>(m: M, support: (f64, f64), a: f64, rel_tol: f64) -> f64 {
    let (lo, hi) = support;
    let spec = QuadratureSpec::rel(rel_tol).with_abs(0.0);
    let e = 1.0 / (1.0 - a);
    // ∫_{s0}^{s1} σ^{−a} g(σ) dσ = e ∫ g(ρ^e) dρ over ρ ∈ [s0^{1−a}, s1^{1−a}].
    let half = |s0: f64, s1: f64, sign: f64| -> f64 {
        if s1 <= s0 {
            return 0.0;
        }
        e * integrate(|rho| m(sign * rho.powf(e)), s0.powf(1.0 - a), s1.powf(1.0 - a), &spec).value
    };
    let pos = half(lo.max(0.0), hi.max(0.0), 1.0);
    let neg = half((-hi).max(0.0), (-lo).max(0.0), -1.0);
    4.0 * PI * (pos + neg)
}
