//! Ensemble statistics, theory-versus-simulation comparisons and
//! persistence.
//!
//! Per-trajectory partial summaries are reduced in parallel. All records are
//! keyed by trajectory index and every aggregate is an integer count, so
//! [`EnsembleSummary::merge`] is exact, commutative and associative, and the
//! reduced summary does not depend on how the work was split.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{rescale_forward, rescale_frozen, ModelParams};
use crate::profiles::{MassOptions, Profile, ProfileParams};
use crate::sampler::{simulate_ensemble, InitialLaw, Terminal, Trajectory};
use crate::stats::{least_squares, median, quantile};

/// Version of the export format.
pub const SCHEMA_VERSION: u32 = 1;

/// Fraction of early events per trajectory discarded before exponent fits.
pub const BURN_IN_FRACTION: f64 = 0.2;

/// Build identification embedded in every export.
pub fn build_string() -> String {
    format!(
        "shearkin {} ({})",
        env!("CARGO_PKG_VERSION"),
        option_env!("SHEARKIN_GIT_DESCRIBE").unwrap_or("unknown")
    )
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// What to record while reducing an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    /// Absolute times at which the ensemble is probed (at most the horizon).
    pub probe_times: Vec<f64>,
    /// Whether to keep per-event exponent samples.
    pub record_exponents: bool,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            probe_times: Vec::new(),
            record_exponents: true,
        }
    }
}

/// One event of one trajectory, in logarithmic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSample {
    /// Trajectory index.
    pub traj: u64,
    /// Event index `m` (0-based).
    pub m: u64,
    /// `log t^m`, with `t^m` the flight duration.
    pub log_t: f64,
    /// `log |ξ1^m|`, first component at the end of the flight.
    pub log_xi1: f64,
    /// `log |v2^m|`, second component during the flight.
    pub log_v2: f64,
}

/// Statistics of the ensemble at one probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    /// Absolute probe time `t`.
    pub time: f64,
    /// Number of trajectories with rescaled `|ξ2| ∈ [2^k, 2^{k+1})`.
    pub dyadic_counts: BTreeMap<i32, u64>,
    /// Histogram: number of collisions up to `t` → number of trajectories.
    pub collision_counts: BTreeMap<u64, u64>,
    /// `(trajectory, collisions up to t)`, sorted by trajectory.
    pub trajectory_collisions: Vec<(u64, u64)>,
    /// `(trajectory, |w1/t − w2|)`, sorted by trajectory; recorded for `a > 1`.
    pub frozen_concentration: Vec<(u64, f64)>,
}

impl ProbeSummary {
    fn empty(time: f64) -> Self {
        Self {
            time,
            dyadic_counts: BTreeMap::new(),
            collision_counts: BTreeMap::new(),
            trajectory_collisions: Vec::new(),
            frozen_concentration: Vec::new(),
        }
    }

    /// Dyadic mass fractions (summing to one over the recorded bands).
    pub fn mass_fractions(&self) -> BTreeMap<i32, f64> {
        let total: u64 = self.dyadic_counts.values().sum();
        self.dyadic_counts
            .iter()
            .map(|(&k, &c)| (k, if total == 0 { 0.0 } else { c as f64 / total as f64 }))
            .collect()
    }
}

fn merge_sorted<T: Copy, K: Ord>(a: Vec<T>, b: Vec<T>, key: impl Fn(&T) -> K) -> Vec<T> {
    let mut out = a;
    out.extend(b);
    out.sort_by_key(|x| key(x));
    out
}

fn merge_counts<K: Ord + Copy>(mut a: BTreeMap<K, u64>, b: BTreeMap<K, u64>) -> BTreeMap<K, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Reduced statistics of an ensemble of trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    /// Export format version.
    pub schema_version: u32,
    /// Master seed of the run.
    pub seed: u64,
    /// Model parameters.
    pub params: ModelParams,
    /// Simulation horizon.
    pub horizon: f64,
    /// Initial law, when known.
    pub initial_law: Option<InitialLaw>,
    /// Number of trajectories.
    pub n_trajectories: u64,
    /// Trajectories whose collision clock stopped for good before the horizon.
    pub escape_count: u64,
    /// Trajectories that never collided at all (escape on the first flight).
    pub first_flight_escapes: u64,
    /// Trajectories stopped by the small-velocity floor.
    pub absorbed_zero_count: u64,
    /// Indices of those trajectories, sorted.
    pub absorbed_zero_trajectories: Vec<u64>,
    /// Per-event samples, sorted by `(traj, m)`.
    pub exponent_samples: Vec<ExponentSample>,
    /// Probe statistics in the order of the probe times.
    pub probes: Vec<ProbeSummary>,
}

impl EnsembleSummary {
    /// Summary of zero trajectories.
    pub fn empty(p: &ModelParams, horizon: f64, opts: &SummaryOptions) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            params: *p,
            horizon,
            initial_law: None,
            n_trajectories: 0,
            escape_count: 0,
            first_flight_escapes: 0,
            absorbed_zero_count: 0,
            absorbed_zero_trajectories: Vec::new(),
            exponent_samples: Vec::new(),
            probes: opts.probe_times.iter().map(|&t| ProbeSummary::empty(t)).collect(),
        }
    }

    /// Partial summary of a single trajectory.
    pub fn from_trajectory(index: u64, traj: &Trajectory, p: &ModelParams, horizon: f64, opts: &SummaryOptions) -> Self {
        let mut s = Self::empty(p, horizon, opts);
        s.n_trajectories = 1;
        match traj.terminal {
            Terminal::AbsorbedEscape => {
                s.escape_count = 1;
                if traj.events.is_empty() {
                    s.first_flight_escapes = 1;
                }
            }
            Terminal::AbsorbedZero => {
                s.absorbed_zero_count = 1;
                s.absorbed_zero_trajectories.push(index);
            }
            Terminal::HorizonReached => {}
        }
        if opts.record_exponents {
            for (m, e) in traj.events.iter().enumerate() {
                let sample = ExponentSample {
                    traj: index,
                    m: m as u64,
                    log_t: e.flight_duration.ln(),
                    log_xi1: e.post_flight_xi.w1.abs().ln(),
                    log_v2: e.pre_flight_v.w2.abs().ln(),
                };
                if sample.log_t.is_finite() && sample.log_xi1.is_finite() && sample.log_v2.is_finite() {
                    s.exponent_samples.push(sample);
                }
            }
        }
        // A trajectory stopped by the velocity floor is treated as sitting at
        // w = 0 from then on: it no longer contributes to the velocity statistics.
        let absorbed_at = match traj.terminal {
            Terminal::AbsorbedZero => traj.events.last().map_or(0.0, |e| e.absolute_time),
            _ => f64::INFINITY,
        };
        for probe in &mut s.probes {
            let t = probe.time;
            if !(t > 0.0 && t <= horizon) {
                continue;
            }
            let w = traj.velocity_at(t);
            let collisions = traj.collisions_before(t) as u64;
            *probe.collision_counts.entry(collisions).or_insert(0) += 1;
            probe.trajectory_collisions.push((index, collisions));
            if t >= absorbed_at {
                continue;
            }
            let rescaled = if p.is_hyperbolic() { rescale_forward(w, t, p) } else { rescale_frozen(w, t) };
            if let Ok(x) = rescaled {
                let l = x.xi2.abs().log2();
                if l.is_finite() {
                    *probe.dyadic_counts.entry(l.floor() as i32).or_insert(0) += 1;
                }
            }
            if !p.is_hyperbolic() {
                probe.frozen_concentration.push((index, (w.w1 / t - w.w2).abs()));
            }
        }
        s
    }

    /// Exact merge of two partial summaries of disjoint trajectory sets.
    pub fn merge(self, other: Self) -> Self {
        let probes = self
            .probes
            .into_iter()
            .zip(other.probes)
            .map(|(a, b)| ProbeSummary {
                time: a.time,
                dyadic_counts: merge_counts(a.dyadic_counts, b.dyadic_counts),
                collision_counts: merge_counts(a.collision_counts, b.collision_counts),
                trajectory_collisions: merge_sorted(a.trajectory_collisions, b.trajectory_collisions, |x| x.0),
                frozen_concentration: merge_sorted(a.frozen_concentration, b.frozen_concentration, |x| x.0),
            })
            .collect();
        Self {
            schema_version: self.schema_version,
            seed: self.seed,
            params: self.params,
            horizon: self.horizon,
            initial_law: self.initial_law.or(other.initial_law),
            n_trajectories: self.n_trajectories + other.n_trajectories,
            escape_count: self.escape_count + other.escape_count,
            first_flight_escapes: self.first_flight_escapes + other.first_flight_escapes,
            absorbed_zero_count: self.absorbed_zero_count + other.absorbed_zero_count,
            absorbed_zero_trajectories: merge_sorted(self.absorbed_zero_trajectories, other.absorbed_zero_trajectories, |x| *x),
            exponent_samples: merge_sorted(self.exponent_samples, other.exponent_samples, |x| (x.traj, x.m)),
            probes,
        }
    }

    /// Index of the probe at time `t` (relative tolerance 1e-9).
    pub fn probe_index(&self, t: f64) -> Option<usize> {
        self.probes.iter().position(|p| (p.time - t).abs() <= 1e-9 * t.abs())
    }
}

/// Run configuration (JSON file; command-line flags override its values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Model parameters.
    pub params: ModelParams,
    /// Number of trajectories.
    pub n: u64,
    /// Simulation horizon `t`.
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Alternatively, the horizon as `τ* = log t`.
    #[serde(default)]
    pub tau_star: Option<f64>,
    /// Master seed.
    pub seed: u64,
    /// Output directory.
    pub output_dir: PathBuf,
    /// Initial law.
    pub initial_law: InitialLaw,
    /// Probe times (default: the horizon only).
    #[serde(default)]
    pub probe_times: Vec<f64>,
    /// Whether to record per-event exponent samples.
    #[serde(default = "default_true")]
    pub record_exponents: bool,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    /// Reads a configuration from a JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    /// Effective horizon: `horizon`, else `e^{τ*}`.
    pub fn horizon(&self) -> Result<f64> {
        match (self.horizon, self.tau_star) {
            (Some(h), _) if h > 0.0 && h.is_finite() => Ok(h),
            (None, Some(t)) if t.is_finite() => Ok(t.exp()),
            _ => Err(Error::InvalidParameter("configuration needs a positive horizon or tau_star".into())),
        }
    }

    /// Summary options implied by the configuration.
    pub fn summary_options(&self) -> Result<SummaryOptions> {
        let h = self.horizon()?;
        let probe_times = if self.probe_times.is_empty() { vec![h] } else { self.probe_times.clone() };
        if probe_times.iter().any(|&t| !(t > 0.0 && t <= h)) {
            return Err(Error::InvalidParameter("probe times must lie in (0, horizon]".into()));
        }
        Ok(SummaryOptions {
            probe_times,
            record_exponents: self.record_exponents,
        })
    }

    /// Runs the configured ensemble.
    pub fn run(&self, workers: Option<usize>) -> Result<EnsembleSummary> {
        self.params.validate()?;
        let opts = self.summary_options()?;
        simulate_ensemble(self.initial_law, &self.params, self.n, self.horizon()?, self.seed, &opts, workers)
    }
}

/// Fitted scaling exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// Slope of `log|ξ1^m|` against `log t^m`.
    pub slope1: f64,
    /// Slope of `log|v2^m|` against `log t^m`.
    pub slope2: f64,
    /// Standard error of `slope1`.
    pub stderr1: f64,
    /// Standard error of `slope2`.
    pub stderr2: f64,
    /// Number of samples used after burn-in.
    pub n_samples: usize,
    /// Decades of `t` spanned by the samples used.
    pub decades: f64,
}

/// Least-squares scaling exponents over late-time events.
///
/// The first 20% of the events of every trajectory are discarded, and
/// trajectories stopped by the velocity floor are left out: their events
/// describe the collapse towards `w = 0`, outside the large-velocity regime
/// the scaling relations refer to.
pub fn estimate_exponents(summary: &EnsembleSummary) -> Result<ExponentFit> {
    let absorbed = &summary.absorbed_zero_trajectories;
    let mut events_per_traj: BTreeMap<u64, u64> = BTreeMap::new();
    for s in &summary.exponent_samples {
        let e = events_per_traj.entry(s.traj).or_insert(0);
        *e = (*e).max(s.m + 1);
    }
    let kept: Vec<&ExponentSample> = summary
        .exponent_samples
        .iter()
        .filter(|s| absorbed.binary_search(&s.traj).is_err())
        .filter(|s| (s.m as f64) >= (BURN_IN_FRACTION * events_per_traj[&s.traj] as f64).ceil())
        .collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientRange { decades: 0.0 });
    }
    let x: Vec<f64> = kept.iter().map(|s| s.log_t).collect();
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let decades = (hi - lo) / std::f64::consts::LN_10;
    if decades < 2.0 {
        return Err(Error::InsufficientRange { decades });
    }
    let y1: Vec<f64> = kept.iter().map(|s| s.log_xi1).collect();
    let y2: Vec<f64> = kept.iter().map(|s| s.log_v2).collect();
    let f1 = least_squares(&x, &y1)?;
    let f2 = least_squares(&x, &y2)?;
    Ok(ExponentFit {
        slope1: f1.slope,
        slope2: f2.slope,
        stderr1: f1.slope_stderr,
        stderr2: f2.slope_stderr,
        n_samples: kept.len(),
        decades,
    })
}

/// Dyadic mass fractions of the rescaled `|ξ2|` at `t = e^τ`.
pub fn dyadic_mass_histogram(summary: &EnsembleSummary, tau: f64) -> Result<BTreeMap<i32, f64>> {
    let i = summary
        .probe_index(tau.exp())
        .ok_or_else(|| Error::InvalidParameter(format!("no probe recorded at tau = {tau}")))?;
    Ok(summary.probes[i].mass_fractions())
}

/// Ratios `t^{m+1}/t^m` of consecutive flight durations.
pub fn jump_time_ratios(traj: &Trajectory) -> Vec<f64> {
    traj.events
        .windows(2)
        .map(|w| w[1].flight_duration / w[0].flight_duration)
        .collect()
}

/// Ensemble median of `t^{m+1}/t^m` for each `m`, with the number of
/// trajectories contributing.
pub fn median_jump_time_ratios(summary: &EnsembleSummary) -> Vec<(u64, f64, usize)> {
    let mut by_m: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for w in summary.exponent_samples.windows(2) {
        if summary.absorbed_zero_trajectories.binary_search(&w[0].traj).is_ok() {
            continue;
        }
        if w[0].traj == w[1].traj && w[1].m == w[0].m + 1 {
            by_m.entry(w[0].m).or_default().push((w[1].log_t - w[0].log_t).exp());
        }
    }
    by_m.into_iter()
        .filter_map(|(m, v)| median(&v).map(|q| (m, q, v.len())))
        .collect()
}

/// Frozen-regime statistics at one probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenProbe {
    /// Probe time.
    pub time: f64,
    /// Median of `|w1/t − w2|`.
    pub median_concentration: f64,
    /// 10% quantile of `|w1/t − w2|`.
    pub q10_concentration: f64,
    /// 90% quantile of `|w1/t − w2|`.
    pub q90_concentration: f64,
    /// Mean number of collisions up to the probe.
    pub mean_collisions: f64,
    /// Largest number of collisions up to the probe.
    pub max_collisions: u64,
    /// Fraction of trajectories whose collision count equals the one at the last probe.
    pub unchanged_to_last: f64,
}

/// Frozen-regime report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenReport {
    /// Homogeneity.
    pub a: f64,
    /// Number of trajectories.
    pub n_trajectories: u64,
    /// Fraction that escaped on the first flight.
    pub first_flight_escape_fraction: f64,
    /// Fraction whose collision clock stopped before the horizon.
    pub escape_fraction: f64,
    /// Fraction stopped by the velocity floor (excluded from the
    /// concentration quantiles).
    pub absorbed_zero_fraction: f64,
    /// Per-probe statistics.
    pub probes: Vec<FrozenProbe>,
}

/// Collision-count and concentration statistics for `a > 1`.
pub fn frozen_regime_report(summary: &EnsembleSummary) -> Result<FrozenReport> {
    if summary.params.a <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "frozen-regime report requires a > 1, got {}",
            summary.params.a
        )));
    }
    if summary.n_trajectories == 0 {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let last = summary.probes.last();
    let mut probes = Vec::new();
    for p in &summary.probes {
        let conc: Vec<f64> = p.frozen_concentration.iter().map(|x| x.1).collect();
        let nc = p.trajectory_collisions.len().max(1) as f64;
        let mean = p.trajectory_collisions.iter().map(|x| x.1 as f64).sum::<f64>() / nc;
        let max = p.trajectory_collisions.iter().map(|x| x.1).max().unwrap_or(0);
        let unchanged = match last {
            Some(l) => {
                let same = p
                    .trajectory_collisions
                    .iter()
                    .zip(&l.trajectory_collisions)
                    .filter(|(x, y)| x.0 == y.0 && x.1 == y.1)
                    .count();
                same as f64 / nc
            }
            None => 1.0,
        };
        probes.push(FrozenProbe {
            time: p.time,
            median_concentration: median(&conc).unwrap_or(f64::NAN),
            q10_concentration: quantile(&conc, 0.1).unwrap_or(f64::NAN),
            q90_concentration: quantile(&conc, 0.9).unwrap_or(f64::NAN),
            mean_collisions: mean,
            max_collisions: max,
            unchanged_to_last: unchanged,
        });
    }
    let n = summary.n_trajectories as f64;
    Ok(FrozenReport {
        a: summary.params.a,
        n_trajectories: summary.n_trajectories,
        first_flight_escape_fraction: summary.first_flight_escapes as f64 / n,
        escape_fraction: summary.escape_count as f64 / n,
        absorbed_zero_fraction: summary.absorbed_zero_count as f64 / n,
        probes,
    })
}

/// Banded comparison of simulation and asymptotic profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileComparison {
    /// Logarithmic time of the comparison.
    pub tau: f64,
    /// Simulated fraction per band `|ξ2| ∈ [2^k, 2^{k+1})` (simulation units).
    pub simulated: BTreeMap<i32, f64>,
    /// Profile fraction per band, mapped to simulation units.
    pub profile: BTreeMap<i32, f64>,
    /// Total-variation distance `½ Σ |p_k − q_k|`.
    pub tv_distance: f64,
}

/// Total-variation distance between two banded distributions.
pub fn tv_distance(p: &BTreeMap<i32, f64>, q: &BTreeMap<i32, f64>) -> f64 {
    let mut keys: Vec<i32> = p.keys().chain(q.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys
        .iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Velocity factor between the simulated rate `|w|^{−a}` and the rate
/// `4π|w|^{−a}` of the profile equations: `ξ_profile = (4π)^{1/a} ξ_sim`.
pub fn velocity_conversion(a: f64) -> f64 {
    (4.0 * std::f64::consts::PI).powf(1.0 / a)
}

/// Compares the simulated dyadic marginal at `t = e^τ` with the quadrature
/// of the asymptotic profile.
pub fn compare_profiles(summary: &EnsembleSummary, tau: f64, pp: &ProfileParams) -> Result<ProfileComparison> {
    if !(pp.a > 0.0 && pp.a < 1.0) {
        return Err(Error::InvalidParameter("profile comparison requires 0 < a < 1".into()));
    }
    let simulated = dyadic_mass_histogram(summary, tau)?;
    let profile = Profile::tabulated(*pp, 64)?;
    let opts = MassOptions::default();
    let total = profile.total_mass(tau, &opts)?;
    let shift = velocity_conversion(pp.a).ln();
    let ln2 = std::f64::consts::LN_2;
    let hi = tau + opts.xi2_max_factor.ln() - shift;
    let k_lo = simulated.keys().next().copied().unwrap_or(0).min(((opts.log_xi2_min - shift) / ln2).floor() as i32);
    let k_hi = simulated.keys().last().copied().unwrap_or(0).max((hi / ln2).ceil() as i32);
    let mut theory = BTreeMap::new();
    for k in k_lo..=k_hi {
        let m = profile.mass_in_log_range(k as f64 * ln2 + shift, (k + 1) as f64 * ln2 + shift, tau, &opts)?;
        if m > 0.0 {
            theory.insert(k, m / total);
        }
    }
    Ok(ProfileComparison {
        tau,
        tv_distance: tv_distance(&simulated, &theory),
        simulated,
        profile: theory,
    })
}

/// Outcome of one numerical identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    /// What is checked.
    pub name: String,
    /// Computed value.
    pub value: f64,
    /// Exact value.
    pub expected: f64,
    /// Error measure (absolute or relative, see `relative`).
    pub error: f64,
    /// Tolerance on the error.
    pub tolerance: f64,
    /// Whether `error` is relative.
    pub relative: bool,
    /// `error <= tolerance`.
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: String, value: f64, expected: f64, tolerance: f64, relative: bool) -> Self {
        let error = if relative { ((value - expected) / expected).abs() } else { (value - expected).abs() };
        Self {
            name,
            value,
            expected,
            error,
            tolerance,
            relative,
            passed: error <= tolerance,
        }
    }
}

/// Quadrature checks of the closed-form identities of the special functions:
/// `∫H = π/2`, `H(1) = 2^{−3/2}π`, `K(a) = (1−a)/(16a)` for `a = 0.1, …, 0.9`,
/// and `∫ζΦ = 1−a`, `∫Z = a(1−a)` for `a ∈ {0.25, 0.5, 0.75}`.
pub fn verify_special_functions() -> Result<Vec<IdentityCheck>> {
    use crate::specfun::{h_of_s, integral_h, k_of_a, k_of_a_closed, phi_moment, z_integral};
    use std::f64::consts::PI;
    let mut out = vec![
        IdentityCheck::new("integral of H over [0,1]".into(), integral_h(), PI / 2.0, 1e-8, false),
        IdentityCheck::new("H(1)".into(), h_of_s(1.0)?, PI * 2f64.powf(-1.5), 1e-10, false),
    ];
    for i in 1..=9 {
        let a = i as f64 / 10.0;
        out.push(IdentityCheck::new(format!("K({a})"), k_of_a(a)?, k_of_a_closed(a), 1e-6, true));
    }
    for a in [0.25, 0.5, 0.75] {
        out.push(IdentityCheck::new(format!("first moment of Phi, a={a}"), phi_moment(a)?, 1.0 - a, 1e-5, false));
        out.push(IdentityCheck::new(format!("integral of Z, a={a}"), z_integral(a)?, a * (1.0 - a), 1e-5, false));
    }
    Ok(out)
}

/// Export formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    /// Long-format CSV with `#` metadata lines.
    Csv,
    /// One JSON document.
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument<T> {
    schema_version: u32,
    build: String,
    seed: Option<u64>,
    params: Option<ModelParams>,
    kind: String,
    data: T,
}

/// Fixed CSV header.
pub const CSV_HEADER: [&str; 8] = ["record", "probe", "traj", "m", "key", "x", "y", "z"];

#[derive(Debug, Default, Serialize, Deserialize)]
struct CsvRow {
    record: String,
    probe: Option<usize>,
    traj: Option<u64>,
    m: Option<u64>,
    key: Option<i64>,
    x: Option<f64>,
    y: Option<f64>,
    z: Option<f64>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

/// Writes an ensemble summary.
pub fn export_summary(summary: &EnsembleSummary, format: ExportFormat, path: &Path) -> Result<()> {
    match format {
        ExportFormat::Json => export_json(summary, "ensemble_summary", Some(summary.seed), Some(&summary.params), path),
        ExportFormat::Csv => export_summary_csv(summary, path),
    }
}

/// Writes any serializable report as a JSON document with the schema
/// version, build string, seed and parameters.
pub fn export_json<T: Serialize>(
    data: &T,
    kind: &str,
    seed: Option<u64>,
    params: Option<&ModelParams>,
    path: &Path,
) -> Result<()> {
    let doc = JsonDocument {
        schema_version: SCHEMA_VERSION,
        build: build_string(),
        seed,
        params: params.copied(),
        kind: kind.to_string(),
        data,
    };
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

fn metadata_lines(summary: &EnsembleSummary) -> Result<Vec<(String, String)>> {
    Ok(vec![
        ("schema_version".into(), summary.schema_version.to_string()),
        ("build".into(), build_string()),
        ("seed".into(), summary.seed.to_string()),
        ("params".into(), to_json(&summary.params)?),
        ("horizon".into(), to_json(&summary.horizon)?),
        ("initial_law".into(), to_json(&summary.initial_law)?),
        ("n_trajectories".into(), summary.n_trajectories.to_string()),
        ("escape_count".into(), summary.escape_count.to_string()),
        ("first_flight_escapes".into(), summary.first_flight_escapes.to_string()),
        ("absorbed_zero_count".into(), summary.absorbed_zero_count.to_string()),
        (
            "probe_times".into(),
            to_json(&summary.probes.iter().map(|p| p.time).collect::<Vec<f64>>())?,
        ),
    ])
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes plot-ready tabular data: `# key=value` metadata lines (always
/// including schema version and build string), a header row, then rows.
pub fn write_table_csv(path: &Path, metadata: &[(String, String)], header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = create(path)?;
    let mut meta = vec![
        ("schema_version".to_string(), SCHEMA_VERSION.to_string()),
        ("build".to_string(), build_string()),
    ];
    meta.extend(metadata.iter().cloned());
    for (k, v) in &meta {
        writeln!(w, "# {k}={v}").map_err(|e| io_err(path, e))?;
    }
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        cw.write_record(r.iter().map(|x| x.to_string())).map_err(|e| io_err(path, e))?;
    }
    cw.flush().map_err(|e| io_err(path, e))
}

fn export_summary_csv(summary: &EnsembleSummary, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    for (k, v) in metadata_lines(summary)? {
        writeln!(w, "# {k}={v}").map_err(|e| io_err(path, e))?;
    }
    let mut cw = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    cw.write_record(CSV_HEADER).map_err(|e| io_err(path, e))?;
    let mut put = |row: CsvRow| cw.serialize(row).map_err(|e| io_err(path, e));
    for s in &summary.exponent_samples {
        put(CsvRow {
            record: "exponent".into(),
            traj: Some(s.traj),
            m: Some(s.m),
            x: Some(s.log_t),
            y: Some(s.log_xi1),
            z: Some(s.log_v2),
            ..Default::default()
        })?;
    }
    for &t in &summary.absorbed_zero_trajectories {
        put(CsvRow {
            record: "absorbed_zero".into(),
            traj: Some(t),
            ..Default::default()
        })?;
    }
    for (i, p) in summary.probes.iter().enumerate() {
        for (&k, &c) in &p.dyadic_counts {
            put(CsvRow {
                record: "dyadic".into(),
                probe: Some(i),
                key: Some(k as i64),
                m: Some(c),
                ..Default::default()
            })?;
        }
        for (&k, &c) in &p.collision_counts {
            put(CsvRow {
                record: "collision_hist".into(),
                probe: Some(i),
                key: Some(k as i64),
                m: Some(c),
                ..Default::default()
            })?;
        }
        for &(t, c) in &p.trajectory_collisions {
            put(CsvRow {
                record: "collisions".into(),
                probe: Some(i),
                traj: Some(t),
                m: Some(c),
                ..Default::default()
            })?;
        }
        for &(t, v) in &p.frozen_concentration {
            put(CsvRow {
                record: "concentration".into(),
                probe: Some(i),
                traj: Some(t),
                x: Some(v),
                ..Default::default()
            })?;
        }
    }
    cw.flush().map_err(|e| io_err(path, e))
}

/// Reads a summary written by [`export_summary`].
pub fn import_summary(path: &Path, format: ExportFormat) -> Result<EnsembleSummary> {
    match format {
        ExportFormat::Json => {
            let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            let doc: JsonDocument<EnsembleSummary> =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            if doc.schema_version != SCHEMA_VERSION {
                return Err(Error::Parse(format!("unsupported schema version {}", doc.schema_version)));
            }
            Ok(doc.data)
        }
        ExportFormat::Csv => import_summary_csv(path),
    }
}

fn import_summary_csv(path: &Path) -> Result<EnsembleSummary> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut meta = BTreeMap::new();
    let mut reader = BufReader::new(file);
    let mut body = String::new();
    let mut line = String::new();
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| io_err(path, e))?;
        if n == 0 {
            break;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.trim_end().split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        } else {
            body.push_str(&line);
            break;
        }
    }
    std::io::Read::read_to_string(&mut reader, &mut body).map_err(|e| io_err(path, e))?;
    let get = |k: &str| meta.get(k).ok_or_else(|| Error::Parse(format!("missing metadata `{k}`")));
    let parse_err = |e: &dyn std::fmt::Display| Error::Parse(e.to_string());
    let schema_version: u32 = get("schema_version")?.parse().map_err(|e| parse_err(&e))?;
    if schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!("unsupported schema version {schema_version}")));
    }
    let json = |k: &str| -> Result<serde_json::Value> { serde_json::from_str(get(k)?).map_err(|e| parse_err(&e)) };
    let params: ModelParams = serde_json::from_value(json("params")?).map_err(|e| parse_err(&e))?;
    let probe_times: Vec<f64> = serde_json::from_value(json("probe_times")?).map_err(|e| parse_err(&e))?;
    let mut s = EnsembleSummary::empty(
        &params,
        serde_json::from_value(json("horizon")?).map_err(|e| parse_err(&e))?,
        &SummaryOptions {
            probe_times,
            record_exponents: true,
        },
    );
    s.seed = get("seed")?.parse().map_err(|e| parse_err(&e))?;
    s.initial_law = serde_json::from_value(json("initial_law")?).map_err(|e| parse_err(&e))?;
    s.n_trajectories = get("n_trajectories")?.parse().map_err(|e| parse_err(&e))?;
    s.escape_count = get("escape_count")?.parse().map_err(|e| parse_err(&e))?;
    s.first_flight_escapes = get("first_flight_escapes")?.parse().map_err(|e| parse_err(&e))?;
    s.absorbed_zero_count = get("absorbed_zero_count")?.parse().map_err(|e| parse_err(&e))?;
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().map_err(|e| parse_err(&e))?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected CSV header {headers:?}")));
    }
    let missing = |what: &str| Error::Parse(format!("row is missing `{what}`"));
    for row in rdr.deserialize::<CsvRow>() {
        let r = row.map_err(|e| parse_err(&e))?;
        let probe = |r: &CsvRow| -> Result<usize> {
            let i = r.probe.ok_or_else(|| missing("probe"))?;
            if i >= s.probes.len() {
                return Err(Error::Parse(format!("probe index {i} out of range")));
            }
            Ok(i)
        };
        match r.record.as_str() {
            "exponent" => s.exponent_samples.push(ExponentSample {
                traj: r.traj.ok_or_else(|| missing("traj"))?,
                m: r.m.ok_or_else(|| missing("m"))?,
                log_t: r.x.ok_or_else(|| missing("x"))?,
                log_xi1: r.y.ok_or_else(|| missing("y"))?,
                log_v2: r.z.ok_or_else(|| missing("z"))?,
            }),
            "absorbed_zero" => s.absorbed_zero_trajectories.push(r.traj.ok_or_else(|| missing("traj"))?),
            "dyadic" => {
                let i = probe(&r)?;
                let k = r.key.ok_or_else(|| missing("key"))? as i32;
                s.probes[i].dyadic_counts.insert(k, r.m.ok_or_else(|| missing("m"))?);
            }
            "collision_hist" => {
                let i = probe(&r)?;
                let k = r.key.ok_or_else(|| missing("key"))? as u64;
                s.probes[i].collision_counts.insert(k, r.m.ok_or_else(|| missing("m"))?);
            }
            "collisions" => {
                let i = probe(&r)?;
                s.probes[i]
                    .trajectory_collisions
                    .push((r.traj.ok_or_else(|| missing("traj"))?, r.m.ok_or_else(|| missing("m"))?));
            }
            "concentration" => {
                let i = probe(&r)?;
                s.probes[i]
                    .frozen_concentration
                    .push((r.traj.ok_or_else(|| missing("traj"))?, r.x.ok_or_else(|| missing("x"))?));
            }
            other => return Err(Error::Parse(format!("unknown record type `{other}`"))),
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{UnitVector, Velocity};
    use crate::sampler::{step_with, TrajectoryEvent};

    fn synthetic(durations: &[f64]) -> Trajectory {
        let mut v = Velocity::new(0.0, 1.0, 0.0);
        let mut time = 0.0;
        let mut events: Vec<TrajectoryEvent> = Vec::new();
        for &d in durations {
            let e = step_with(v, d, UnitVector::E1, time);
            time = e.absolute_time;
            v = e.post_jump_v;
            events.push(e);
        }
        Trajectory {
            initial_v: Velocity::new(0.0, 1.0, 0.0),
            events,
            terminal: Terminal::HorizonReached,
        }
    }

    #[test]
    fn ratios_of_geometric_durations() {
        let t = synthetic(&[1.0, 2.0, 4.0, 8.0, 16.0]);
        assert!(jump_time_ratios(&t).iter().all(|&r| r == 2.0));
        assert!(jump_time_ratios(&synthetic(&[3.0])).is_empty());
    }

    #[test]
    fn tv_of_identical_is_zero() {
        let p: BTreeMap<i32, f64> = [(0, 0.25), (1, 0.75)].into_iter().collect();
        assert_eq!(tv_distance(&p, &p), 0.0);
        let q: BTreeMap<i32, f64> = [(2, 1.0)].into_iter().collect();
        assert!((tv_distance(&p, &q) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frozen_report_rejects_hyperbolic() {
        let p = ModelParams::new(0.5).unwrap();
        let s = EnsembleSummary::empty(&p, 1.0, &SummaryOptions::default());
        assert!(frozen_regime_report(&s).is_err());
    }
}
