//! Statistical and structural properties of the flight/jump sampler and the
//! trajectory simulator.

use proptest::prelude::*;
use shearkin::densities::escape_probability;
use shearkin::harness::{EnsembleSummary, SummaryOptions};
use shearkin::kinematics::{project_out, shear_flight, ModelParams, Velocity};
use shearkin::rng::event_stream;
use shearkin::sampler::{
    sample_flight_time, sample_flight_time_with, sample_omega, simulate_ensemble, simulate_trajectory, FlightOutcome,
    FlightStrategy, InitialLaw, Terminal,
};
use shearkin::stats::ks_two_sample;

fn params(a: f64) -> ModelParams {
    ModelParams::new(a).unwrap()
}

#[test]
fn scattering_directions_have_isotropic_moments() {
    let n = 1_000_000u64;
    let mut first = [0.0f64; 3];
    let mut second = [[0.0f64; 3]; 3];
    for i in 0..n {
        let o = sample_omega(&mut event_stream(3, i, 0)).as_velocity().to_array();
        let norm2: f64 = o.iter().map(|x| x * x).sum();
        assert!((norm2 - 1.0).abs() < 1e-12);
        for j in 0..3 {
            first[j] += o[j];
            for k in 0..3 {
                second[j][k] += o[j] * o[k];
            }
        }
    }
    let sigma = 1.0 / (3.0 * n as f64).sqrt();
    for j in 0..3 {
        assert!((first[j] / n as f64).abs() < 4.0 * sigma, "E[ω{j}] = {}", first[j] / n as f64);
        for k in 0..3 {
            let target = if j == k { 1.0 / 3.0 } else { 0.0 };
            let m = second[j][k] / n as f64;
            assert!((m - target).abs() < 5e-3, "E[ω{j}ω{k}] = {m}");
        }
    }
}

#[test]
fn unsheared_flight_is_exponential() {
    // v2 = 0: constant rate |v|^{-a}, here 1.
    let p = params(0.5);
    let v = Velocity::new(0.6, 0.0, 0.8);
    let n = 100_000u64;
    let mut sum = 0.0;
    for i in 0..n {
        match sample_flight_time(v, &p, &mut event_stream(11, i, 0)).unwrap() {
            FlightOutcome::Collision(t) => sum += t,
            FlightOutcome::Escape => panic!("escape with v2 = 0"),
        }
    }
    assert!((sum / n as f64 - 1.0).abs() < 0.02, "mean {}", sum / n as f64);
}

fn escape_fraction(v: Velocity, p: &ModelParams, seed: u64, n: u64) -> f64 {
    let escapes = (0..n)
        .filter(|&i| matches!(sample_flight_time(v, p, &mut event_stream(seed, i, 0)).unwrap(), FlightOutcome::Escape))
        .count();
    escapes as f64 / n as f64
}

#[test]
fn escape_frequency_matches_closed_form() {
    let n = 100_000u64;
    let f = escape_fraction(Velocity::new(0.0, 1.0, 0.0), &params(2.0), 21, n);
    assert!((f - 0.2079).abs() < 0.006, "{f}");
    for (k, (a, v)) in [(1.5, Velocity::new(1.0, 0.5, 0.2)), (3.0, Velocity::new(-0.5, -2.0, 1.0))]
        .into_iter()
        .enumerate()
    {
        let p = params(a);
        let q = escape_probability(v, &p).unwrap();
        let f = escape_fraction(v, &p, 22 + k as u64, n);
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((f - q).abs() < 3.0 * sigma, "a={a}: {f} vs {q}");
    }
    assert_eq!(escape_fraction(Velocity::new(0.0, 1.0, 0.0), &params(0.5), 23, 20_000), 0.0);
}

#[test]
fn thinning_and_inversion_agree_in_law() {
    let n = 20_000u64;
    for (i, a) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let p = params(a);
        for (j, v) in [Velocity::new(0.0, 1.0, 0.0), Velocity::new(5.0, 1.0, 0.0), Velocity::new(0.0, 1.0, 2.0)]
            .into_iter()
            .enumerate()
        {
            let draw = |strategy, seed: u64| -> Vec<f64> {
                (0..n)
                    .map(|k| match sample_flight_time_with(v, &p, strategy, &mut event_stream(seed, k, 0)).unwrap() {
                        FlightOutcome::Collision(t) => t,
                        FlightOutcome::Escape => panic!("escape for a < 1"),
                    })
                    .collect()
            };
            let seed = 100 + 10 * i as u64 + j as u64;
            let thin = draw(FlightStrategy::Thinning, seed);
            let inv = draw(FlightStrategy::Inversion, seed + 1000);
            let r = ks_two_sample(&thin, &inv).unwrap();
            assert!(r.p_value > 1e-3, "a={a} v={v:?}: D = {} p = {}", r.statistic, r.p_value);
        }
    }
    let mut rng = event_stream(0, 0, 0);
    assert!(sample_flight_time_with(Velocity::new(0.0, 1.0, 0.0), &params(2.0), FlightStrategy::Thinning, &mut rng).is_err());
}

#[test]
fn trajectory_events_are_consistent() {
    for (a, v0) in [(0.5, Velocity::new(0.0, 1.0, 0.0)), (0.75, Velocity::new(2.0, -1.0, 0.5)), (2.0, Velocity::new(0.3, 0.4, 0.5))] {
        let p = params(a);
        for idx in 0..50 {
            let traj = simulate_trajectory(v0, &p, 1e8, 77, idx).unwrap();
            let mut v = v0;
            let mut time = 0.0;
            for e in &traj.events {
                assert_eq!(e.pre_flight_v, v);
                assert!(e.flight_duration > 0.0);
                assert!(e.absolute_time > time);
                assert!((e.absolute_time - (time + e.flight_duration)).abs() <= 1e-12 * e.absolute_time);
                let xi = shear_flight(v, e.flight_duration);
                assert_eq!(e.post_flight_xi, xi);
                assert_eq!(e.post_jump_v, project_out(xi, e.omega));
                assert!(e.post_jump_v.norm() <= xi.norm() * (1.0 + 1e-15));
                assert!(e.post_jump_v.dot(e.omega.as_velocity()).abs() <= 1e-12 * xi.norm());
                v = e.post_jump_v;
                time = e.absolute_time;
            }
            assert!(time < 1e8);
            match traj.terminal {
                Terminal::AbsorbedZero => {
                    // Either below the floor, or the next flight no longer advances the clock.
                    if v.norm() >= p.eps_floor {
                        let mut rng = event_stream(77, idx, traj.events.len() as u64);
                        match sample_flight_time(v, &p, &mut rng).unwrap() {
                            FlightOutcome::Collision(d) => assert!(time + d <= time, "d = {d} at t = {time}"),
                            FlightOutcome::Escape => panic!("absorbed trajectory could escape"),
                        }
                    }
                }
                Terminal::AbsorbedEscape => assert!(a > 1.0),
                Terminal::HorizonReached => {}
            }
            assert_eq!(traj.collisions_before(f64::INFINITY), traj.events.len());
            assert_eq!(traj.velocity_at(0.0), v0);
        }
    }
}

#[test]
fn trajectories_are_reproducible_and_horizon_consistent() {
    let p = params(0.5);
    let v0 = Velocity::new(0.0, 1.0, 0.0);
    for idx in 0..30 {
        let a = simulate_trajectory(v0, &p, 1e6, 5, idx).unwrap();
        let b = simulate_trajectory(v0, &p, 1e6, 5, idx).unwrap();
        assert_eq!(a, b);
        let short = simulate_trajectory(v0, &p, 1e2, 5, idx).unwrap();
        assert!(short.events.len() <= a.events.len());
        assert_eq!(short.events[..], a.events[..short.events.len()]);
        if short.terminal == Terminal::HorizonReached {
            assert!(a.events.get(short.events.len()).map_or(true, |e| e.absolute_time >= 1e2));
        }
    }
    let c = simulate_trajectory(v0, &p, 1e6, 6, 0).unwrap();
    let d = simulate_trajectory(v0, &p, 1e6, 5, 0).unwrap();
    assert_ne!(c, d);
}

#[test]
fn tiny_horizon_has_no_events() {
    let p = params(0.5);
    let t = simulate_trajectory(Velocity::new(0.0, 1.0, 0.0), &p, 1e-12, 1, 0).unwrap();
    assert!(t.events.is_empty());
    assert_eq!(t.terminal, Terminal::HorizonReached);
    assert!(simulate_trajectory(Velocity::ZERO, &p, 1.0, 1, 0).is_err());
    assert!(simulate_trajectory(Velocity::new(0.0, 1.0, 0.0), &p, 0.0, 1, 0).is_err());
}

#[test]
fn single_trajectory_ensemble_equals_its_summary() {
    let p = params(0.5);
    let v0 = Velocity::new(0.0, 1.0, 0.0);
    let opts = SummaryOptions { probe_times: vec![1.0, 1e2, 1e4], record_exponents: true };
    let s = simulate_ensemble(InitialLaw::Point(v0), &p, 1, 1e4, 9, &opts, Some(1)).unwrap();
    let traj = simulate_trajectory(v0, &p, 1e4, 9, 0).unwrap();
    let mut t = EnsembleSummary::from_trajectory(0, &traj, &p, 1e4, &opts);
    t.seed = 9;
    t.initial_law = Some(InitialLaw::Point(v0));
    assert_eq!(s, t);
}

#[test]
fn first_flight_escape_fraction_in_ensemble() {
    let p = params(2.0);
    let opts = SummaryOptions { probe_times: vec![10.0], record_exponents: false };
    let n = 20_000u64;
    let s = simulate_ensemble(InitialLaw::Point(Velocity::new(0.0, 1.0, 0.0)), &p, n, 10.0, 31, &opts, None).unwrap();
    let f = s.first_flight_escapes as f64 / n as f64;
    let sigma = (0.2079 * 0.7921 / n as f64).sqrt();
    assert!((f - 0.2079).abs() < 4.0 * sigma, "{f}");
    assert!(s.escape_count >= s.first_flight_escapes);
}

#[test]
fn isotropic_shell_draws_on_the_sphere() {
    let law = InitialLaw::IsotropicShell(2.5);
    let mut mean = [0.0; 3];
    let n = 20_000u64;
    for i in 0..n {
        let v = law.draw(4, i);
        assert!((v.norm() - 2.5).abs() < 1e-12);
        for (m, x) in mean.iter_mut().zip(v.to_array()) {
            *m += x / n as f64;
        }
    }
    for m in mean {
        assert!(m.abs() < 4.0 * 2.5 / (3.0 * n as f64).sqrt());
    }
    assert_eq!(law.draw(4, 17), law.draw(4, 17));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flight_outcomes_are_valid(
        v1 in -100.0..100.0f64, v2 in -10.0..10.0f64, v3 in -10.0..10.0f64,
        a in prop_oneof![0.05..0.95f64, 1.05..4.0f64], seed in 0u64..1000,
    ) {
        prop_assume!(v2.abs() > 1e-6);
        let p = params(a);
        match sample_flight_time(Velocity::new(v1, v2, v3), &p, &mut event_stream(seed, 0, 0)).unwrap() {
            FlightOutcome::Collision(t) => prop_assert!(t > 0.0 && t.is_finite()),
            FlightOutcome::Escape => prop_assert!(a > 1.0),
        }
    }
}
