//! Command-line front end: ensemble simulation, special-function checks,
//! delay equation, asymptotic profiles, frozen-regime report, self-similarity
//! test and theory-versus-simulation comparison.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shearkin::charsolve::{boundary_fixed_point, delay_iterate, selfsim_refutation, shape_error, BoundaryGrid};
use shearkin::harness::{
    compare_profiles, estimate_exponents, export_json, export_summary, frozen_regime_report, import_summary,
    verify_special_functions, write_table_csv, ExportFormat, RunConfig,
};
use shearkin::profiles::{MassOptions, Profile, ProfileParams};
use shearkin::sampler::InitialLaw;
use shearkin::specfun::phi;
use shearkin::{Error, KernelMode, ModelParams, Velocity};

#[derive(Parser)]
#[command(name = "shearkin", version, about = "Tagged particle in a sheared Rayleigh gas: simulation and asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Pure,
    Shifted,
}

impl From<Kernel> for KernelMode {
    fn from(k: Kernel) -> Self {
        match k {
            Kernel::Pure => KernelMode::PurePower,
            Kernel::Shifted => KernelMode::ShiftedPower,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

/// Ensemble flags; each overrides the corresponding value of `--config`.
#[derive(Args)]
struct EnsembleArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Homogeneity a of the collision rate |w|^{-a}.
    #[arg(long)]
    a: Option<f64>,
    /// Collision-rate regularisation.
    #[arg(long, value_enum)]
    kernel: Option<Kernel>,
    /// Number of trajectories.
    #[arg(long)]
    n: Option<u64>,
    /// Simulation horizon t.
    #[arg(long, conflicts_with = "tau")]
    horizon: Option<f64>,
    /// Simulation horizon as tau = log t.
    #[arg(long)]
    tau: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Point initial velocity "v1,v2,v3".
    #[arg(long, conflicts_with = "shell")]
    v0: Option<String>,
    /// Isotropic initial shell of the given radius.
    #[arg(long)]
    shell: Option<f64>,
    /// Probe time (repeatable; default: the horizon).
    #[arg(long = "probe")]
    probes: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ensemble and export its summary.
    Simulate {
        #[command(flatten)]
        run: EnsembleArgs,
        /// Export format.
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
    },
    /// Run all special-function identity checks (nonzero exit on failure).
    VerifySpecfun,
    /// Iterate the delay equation and the boundary fixed point.
    SolveDelay {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Tabulate the asymptotic profile G on a grid and its mass statistics.
    Profile {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        m0: f64,
        #[arg(long)]
        tau: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the frozen regime (a > 1) and report concentration and collision counts.
    Frozen {
        #[command(flatten)]
        run: EnsembleArgs,
    },
    /// Test the self-similar ansatz near the origin.
    RefuteSelfsim {
        #[arg(long)]
        a: f64,
    },
    /// Compare a simulated summary with the asymptotic profile.
    Compare {
        /// Summary file (.csv or .json).
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        m0: f64,
        /// Logarithmic time of the comparison (default: log of the last probe).
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_velocity(s: &str) -> Result<Velocity, Error> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Parse(format!("velocity `{s}`: {e}")))?;
    match parts.as_slice() {
        [a, b, c] => Ok(Velocity::new(*a, *b, *c)),
        _ => Err(Error::Parse(format!("velocity `{s}` needs three components"))),
    }
}

fn build_config(args: &EnsembleArgs, default_a: f64) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig {
            params: ModelParams::new(default_a)?,
            n: 1000,
            horizon: Some(1e6),
            tau_star: None,
            seed: 1,
            output_dir: PathBuf::from("out"),
            initial_law: InitialLaw::Point(Velocity::new(0.0, 1.0, 0.0)),
            probe_times: Vec::new(),
            record_exponents: true,
        },
    };
    if let Some(a) = args.a {
        cfg.params.a = a;
    }
    if let Some(k) = args.kernel {
        cfg.params.kernel_mode = k.into();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = Some(h);
        cfg.tau_star = None;
    }
    if let Some(t) = args.tau {
        cfg.tau_star = Some(t);
        cfg.horizon = None;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(v) = &args.v0 {
        cfg.initial_law = InitialLaw::Point(parse_velocity(v)?);
    }
    if let Some(r) = args.shell {
        cfg.initial_law = InitialLaw::IsotropicShell(r);
    }
    if !args.probes.is_empty() {
        cfg.probe_times = args.probes.clone();
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    cfg.params.validate()?;
    Ok(cfg)
}

fn format_from_path(p: &Path) -> ExportFormat {
    match p.extension().and_then(|e| e.to_str()) {
        Some("json") => ExportFormat::Json,
        _ => ExportFormat::Csv,
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Simulate { run, format } => {
            let cfg = build_config(&run, 0.5)?;
            let summary = cfg.run(run.workers)?;
            let dir = &cfg.output_dir;
            if matches!(format, Format::Csv | Format::Both) {
                export_summary(&summary, ExportFormat::Csv, &dir.join("summary.csv"))?;
            }
            if matches!(format, Format::Json | Format::Both) {
                export_summary(&summary, ExportFormat::Json, &dir.join("summary.json"))?;
            }
            println!(
                "trajectories {}  escaped {}  absorbed at zero {}",
                summary.n_trajectories, summary.escape_count, summary.absorbed_zero_count
            );
            if cfg.params.is_hyperbolic() {
                match estimate_exponents(&summary) {
                    Ok(f) => println!(
                        "slopes: log|xi1| {:.4} ± {:.4}, log|v2| {:.4} ± {:.4} (expected {:.4}, {:.4})",
                        f.slope1,
                        f.stderr1,
                        f.slope2,
                        f.stderr2,
                        1.0 / cfg.params.a,
                        (1.0 - cfg.params.a) / cfg.params.a
                    ),
                    Err(e) => println!("slopes unavailable: {e}"),
                }
            }
            println!("wrote {}", dir.display());
            Ok(true)
        }
        Command::VerifySpecfun => {
            let checks = verify_special_functions()?;
            let mut ok = true;
            for c in &checks {
                ok &= c.passed;
                println!(
                    "{} {:<34} value {:.15e}  expected {:.15e}  {} error {:.2e} (tol {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.expected,
                    if c.relative { "rel" } else { "abs" },
                    c.error,
                    c.tolerance
                );
            }
            Ok(ok)
        }
        Command::SolveDelay { a, steps } => {
            let fit = delay_iterate(1.0, a, steps)?;
            println!("moment m = {:.10}, fitted beta = {:.6} ± {:.1e}", fit.moment, fit.beta, fit.beta_stderr);
            let grid = BoundaryGrid::constant(1e-4, 1e4, 513, 1.0, 1.0)?;
            let u = boundary_fixed_point(&grid, a, 1)?;
            let reference: Vec<f64> = grid.zeta_nodes.iter().map(|&z| phi(z, a)).collect::<Result<_, _>>()?;
            let (scale, err) = shape_error(&u, &reference)?;
            println!("boundary fixed point: U = {scale:.6e} · Phi, shape error {err:.2e}");
            Ok(true)
        }
        Command::Profile { a, m0, tau, grid, out } => {
            let pp = ProfileParams::new(a, m0)?;
            let prof = Profile::tabulated(pp, 64)?;
            let opts = MassOptions::default();
            let mass = prof.total_mass(tau, &opts)?;
            let conc = prof.concentration_fraction(tau, &opts)?;
            println!("total mass {mass:.6}, fraction in the rim s <= 1: {conc:.4}");
            for (k, f) in prof.dyadic_fractions(tau, &opts)? {
                if f >= 1e-3 {
                    println!("  band 2^{k:<4} {f:.4}");
                }
            }
            if let Some(path) = out {
                let n = grid.max(2);
                let mut rows = Vec::new();
                for i in 0..n {
                    let xi2 = (tau * i as f64 / (n - 1) as f64).exp();
                    for j in 0..n {
                        // ξ1/ξ2 on a grid refined towards the diagonal.
                        let gap = (-(tau * (j as f64 + 0.5) / n as f64)).exp();
                        let xi1 = xi2 * (1.0 - gap);
                        let g = prof.g_profile_z(xi1, xi2, tau).unwrap_or(0.0);
                        rows.push(vec![xi1, xi2, g]);
                    }
                }
                let meta = vec![
                    ("a".to_string(), a.to_string()),
                    ("M0".to_string(), m0.to_string()),
                    ("tau".to_string(), tau.to_string()),
                    ("total_mass".to_string(), mass.to_string()),
                ];
                write_table_csv(&path, &meta, &["xi1", "xi2", "G"], &rows)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Frozen { mut run } => {
            if run.probes.is_empty() && run.config.is_none() {
                run.probes = vec![1e2, 1e4, 1e6];
            }
            let cfg = build_config(&run, 2.0)?;
            if cfg.params.a <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "the frozen regime needs a > 1, got a = {}",
                    cfg.params.a
                )));
            }
            let summary = cfg.run(run.workers)?;
            let report = frozen_regime_report(&summary)?;
            println!(
                "first-flight escape {:.4}, escaped by horizon {:.4}, absorbed at zero {:.4}",
                report.first_flight_escape_fraction, report.escape_fraction, report.absorbed_zero_fraction
            );
            for p in &report.probes {
                println!(
                    "t = {:.3e}: median |w1/t - w2| = {:.3e}, mean collisions {:.3}, unchanged to last probe {:.4}",
                    p.time, p.median_concentration, p.mean_collisions, p.unchanged_to_last
                );
            }
            let path = cfg.output_dir.join("frozen_report.json");
            export_json(&report, "frozen_report", Some(cfg.seed), Some(&cfg.params), &path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::RefuteSelfsim { a } => {
            let r = selfsim_refutation(a)?;
            for (x, l) in &r.samples {
                println!("xi1 = {x:.0e}: lambda = {l:.6e}");
            }
            println!(
                "recovered prefactor / input amplitude = {:.6} (1 - a = {:.6}); fitted exponent {:.4}",
                r.ratio,
                1.0 - a,
                r.exponent
            );
            Ok(true)
        }
        Command::Compare { summary, a, m0, tau, out } => {
            let s = import_summary(&summary, format_from_path(&summary))?;
            let tau = match tau {
                Some(t) => t,
                None => s
                    .probes
                    .last()
                    .map(|p| p.time.ln())
                    .ok_or_else(|| Error::InvalidParameter("summary has no probes".into()))?,
            };
            let c = compare_profiles(&s, tau, &ProfileParams::new(a, m0)?)?;
            println!("tau = {tau:.4}: total-variation distance {:.4}", c.tv_distance);
            let mut keys: Vec<i32> = c.simulated.keys().chain(c.profile.keys()).copied().collect();
            keys.sort_unstable();
            keys.dedup();
            for k in keys {
                let (x, y) = (*c.simulated.get(&k).unwrap_or(&0.0), *c.profile.get(&k).unwrap_or(&0.0));
                if x.max(y) < 5e-4 {
                    continue;
                }
                println!(
                    "  band 2^{k:<4} simulated {:.4}  profile {:.4}",
                    x, y
                );
            }
            if let Some(path) = out {
                export_json(&c, "profile_comparison", Some(s.seed), Some(&s.params), &path)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
