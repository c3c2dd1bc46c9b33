//! Deterministic geometry of the process: the shear flight map, the
//! collision projection, the collision rate and the rescalings to the
//! long-time variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A velocity (or any 3-vector of velocity units): `(w1, w2, w3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Velocity {
    /// Component along the flow direction.
    pub w1: f64,
    /// Component along the shear gradient.
    pub w2: f64,
    /// Spanwise component.
    pub w3: f64,
}

impl Velocity {
    /// Builds a velocity from its components.
    pub const fn new(w1: f64, w2: f64, w3: f64) -> Self {
        Self { w1, w2, w3 }
    }

    /// The zero vector.
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    /// Components as an array.
    pub fn to_array(self) -> [f64; 3] {
        [self.w1, self.w2, self.w3]
    }

    /// Euclidean inner product.
    pub fn dot(self, o: Self) -> f64 {
        self.w1 * o.w1 + self.w2 * o.w2 + self.w3 * o.w3
    }

    /// Euclidean norm (overflow-safe).
    pub fn norm(self) -> f64 {
        self.w1.hypot(self.w2).hypot(self.w3)
    }

    /// Squared norm.
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    /// Componentwise difference.
    pub fn sub(self, o: Self) -> Self {
        Self::new(self.w1 - o.w1, self.w2 - o.w2, self.w3 - o.w3)
    }

    /// Componentwise sum.
    pub fn add(self, o: Self) -> Self {
        Self::new(self.w1 + o.w1, self.w2 + o.w2, self.w3 + o.w3)
    }

    /// Scalar multiple.
    pub fn scale(self, c: f64) -> Self {
        Self::new(c * self.w1, c * self.w2, c * self.w3)
    }

    /// Whether all components are finite.
    pub fn is_finite(self) -> bool {
        self.w1.is_finite() && self.w2.is_finite() && self.w3.is_finite()
    }
}

/// A point of the unit sphere S².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector {
    /// First component.
    pub o1: f64,
    /// Second component.
    pub o2: f64,
    /// Third component.
    pub o3: f64,
}

impl UnitVector {
    /// Normalises a nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = x.hypot(y).hypot(z);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalise a zero or non-finite vector".into()));
        }
        Ok(Self {
            o1: x / n,
            o2: y / n,
            o3: z / n,
        })
    }

    /// First coordinate axis.
    pub const E1: Self = Self {
        o1: 1.0,
        o2: 0.0,
        o3: 0.0,
    };

    /// As a velocity-typed vector.
    pub fn as_velocity(self) -> Velocity {
        Velocity::new(self.o1, self.o2, self.o3)
    }
}

/// Regularisation of the collision rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    /// `max(|w|, eps_floor)^(-a)`.
    #[default]
    PurePower,
    /// `(1 + |w|)^(-a)`.
    ShiftedPower,
}

impl std::str::FromStr for KernelMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure_power" | "pure" => Ok(Self::PurePower),
            "shifted_power" | "shifted" => Ok(Self::ShiftedPower),
            other => Err(Error::InvalidParameter(format!("unknown kernel mode `{other}`"))),
        }
    }
}

/// Model parameters of the tagged-particle process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Homogeneity `a = |γ|` of the collision rate; `a ≠ 1`.
    pub a: f64,
    /// Shear rate; fixed to 1 and recorded for provenance only.
    #[serde(rename = "K")]
    pub k: f64,
    /// Collision-rate regularisation.
    pub kernel_mode: KernelMode,
    /// Small-velocity guard.
    pub eps_floor: f64,
    /// Initial mass.
    #[serde(rename = "M0")]
    pub m0: f64,
}

impl ModelParams {
    /// Default parameters for homogeneity `a` (pure power, floor 1e-12, unit mass).
    pub fn new(a: f64) -> Result<Self> {
        let p = Self {
            a,
            k: 1.0,
            kernel_mode: KernelMode::PurePower,
            eps_floor: 1e-12,
            m0: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the invariants: finite `a > 0`, `a ≠ 1`, `K = 1`, `eps_floor ≥ 0`, `M0 > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::InvalidParameter(format!("a must be positive and finite, got {}", self.a)));
        }
        if self.a == 1.0 {
            return Err(Error::InvalidParameter("a = 1 is the excluded threshold case".into()));
        }
        if self.k != 1.0 {
            return Err(Error::InvalidParameter(format!("shear K must be 1, got {}", self.k)));
        }
        if !(self.eps_floor >= 0.0 && self.eps_floor.is_finite()) {
            return Err(Error::InvalidParameter("eps_floor must be finite and nonnegative".into()));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::InvalidParameter("M0 must be positive".into()));
        }
        Ok(())
    }

    /// Whether the parameters lie in the hyperbolic-dominated regime `0 < a < 1`.
    pub fn is_hyperbolic(&self) -> bool {
        self.a < 1.0
    }
}

/// Rescaled state `(ξ1, ξ2, ξ3, τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledState {
    /// Rescaled first component.
    pub xi1: f64,
    /// Rescaled second component.
    pub xi2: f64,
    /// Rescaled third component.
    pub xi3: f64,
    /// Logarithmic time `τ = log t`.
    pub tau: f64,
}

/// Shear flight map `T_s(v) = (v1 + s v2, v2, v3)`.
pub fn shear_flight(v: Velocity, s: f64) -> Velocity {
    Velocity::new(v.w1 + s * v.w2, v.w2, v.w3)
}

/// Orthogonal projection `w − (w·ω) ω`.
pub fn project_out(w: Velocity, omega: UnitVector) -> Velocity {
    let o = omega.as_velocity();
    w.sub(o.scale(w.dot(o)))
}

/// Collision rate at velocity `w`.
pub fn collision_rate(w: Velocity, p: &ModelParams) -> Result<f64> {
    let n = w.norm();
    match p.kernel_mode {
        KernelMode::PurePower => {
            let r = n.max(p.eps_floor);
            if r == 0.0 {
                return Err(Error::DegenerateVelocity);
            }
            Ok(r.powf(-p.a))
        }
        KernelMode::ShiftedPower => Ok((1.0 + n).powf(-p.a)),
    }
}

/// Rescaling of the hyperbolic regime: `ξ1 = w1 t^(−1/a)`,
/// `ξ2,3 = w2,3 t^(−(1/a−1))`, `τ = log t`.
pub fn rescale_forward(w: Velocity, t: f64, p: &ModelParams) -> Result<RescaledState> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("rescaling time must be positive, got {t}")));
    }
    if !(p.a > 0.0 && p.a < 1.0) {
        return Err(Error::InvalidParameter("forward rescaling requires 0 < a < 1".into()));
    }
    let tau = t.ln();
    let s1 = (-tau / p.a).exp();
    let s2 = (-(1.0 / p.a - 1.0) * tau).exp();
    Ok(RescaledState {
        xi1: w.w1 * s1,
        xi2: w.w2 * s2,
        xi3: w.w3 * s2,
        tau,
    })
}

/// Inverse of [`rescale_forward`].
pub fn rescale_inverse(x: &RescaledState, p: &ModelParams) -> Result<Velocity> {
    if !(p.a > 0.0 && p.a < 1.0) {
        return Err(Error::InvalidParameter("forward rescaling requires 0 < a < 1".into()));
    }
    let s1 = (x.tau / p.a).exp();
    let s2 = ((1.0 / p.a - 1.0) * x.tau).exp();
    Ok(Velocity::new(x.xi1 * s1, x.xi2 * s2, x.xi3 * s2))
}

/// Rescaling of the frozen regime: `ξ1 = w1/t`, `ξ2 = w2`, `ξ3 = w3`.
pub fn rescale_frozen(w: Velocity, t: f64) -> Result<RescaledState> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("rescaling time must be positive, got {t}")));
    }
    Ok(RescaledState {
        xi1: w.w1 / t,
        xi2: w.w2,
        xi3: w.w3,
        tau: t.ln(),
    })
}
