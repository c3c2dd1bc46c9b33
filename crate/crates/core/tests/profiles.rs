//! Asymptotic profiles: closed-form identities, transport along
//! characteristics, reductions between the three- and two-dimensional
//! profiles, mass conservation and the Dirac-mollifier limit.

use std::f64::consts::LN_2;

use proptest::prelude::*;
use shearkin::charsolve::integrate_characteristics;
use shearkin::profiles::{
    f_boundary, f_profile, g_boundary, g_profile, lambda_tau, mollifier_check, total_mass_g, MassOptions, Profile,
    ProfileParams,
};
use shearkin::specfun::{phi, phi_moment, z_at_zero};
use shearkin::Error;

fn pp(a: f64, m0: f64) -> ProfileParams {
    ProfileParams::new(a, m0).unwrap()
}

fn rel(x: f64, y: f64) -> f64 {
    (x / y - 1.0).abs()
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

#[test]
fn amplitude_and_lambda_examples() {
    let p = pp(0.5, 1.0);
    assert!((p.amplitude * (1.0 / (1.0 - 0.5f64)).ln() - 1.0).abs() < 1e-12);
    assert!((lambda_tau(10.0, &p).unwrap() - 0.144_270).abs() < 1e-6);
    for tau in [0.5, 3.0, 17.0, 1e3] {
        assert_eq!(lambda_tau(2.0 * tau, &p).unwrap() / lambda_tau(tau, &p).unwrap(), 0.5);
    }
    assert!(lambda_tau(0.0, &p).is_err());
    assert!(ProfileParams::new(1.0, 1.0).is_err());
    assert!(ProfileParams::new(0.5, 0.0).is_err());
}

#[test]
fn lambda_solves_the_delay_equation() {
    for a in [0.25, 0.5, 0.75] {
        let p = pp(a, 1.0);
        let m = phi_moment(a).unwrap();
        for tau in [2.0, 10.0, 100.0] {
            let lhs = lambda_tau(tau, &p).unwrap();
            let rhs = m * lambda_tau((1.0 - a) * tau, &p).unwrap();
            assert!(rel(lhs, rhs) < 1e-5, "a={a} τ={tau}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn boundary_profile_scaling_collapse() {
    let p = pp(0.5, 1.0);
    let a = 0.5f64;
    let prefactor = 1.0 / ((1.0 - a) * (1.0 / (1.0 - a)).ln());
    for (xi2, tau, shift) in [(1.0, 3.0, 2.0f64), (50.0, 8.0, 5.0), (1e-3, 2.0, 1.0)] {
        let g1 = g_boundary(xi2, tau, &p).unwrap() * (2.0 * tau).exp() * tau;
        let g2 = g_boundary(xi2 * shift.exp(), tau + shift, &p).unwrap() * (2.0 * (tau + shift)).exp() * (tau + shift);
        assert!(rel(g1, g2) < 1e-10, "{g1} vs {g2}");
        let zeta = xi2 * (-tau).exp();
        assert!(rel(g1, prefactor * phi(zeta, a).unwrap()) < 1e-10);
    }
    let doubled = g_boundary(2.0, 4.0, &pp(0.5, 2.0)).unwrap();
    assert!(rel(doubled, 2.0 * g_boundary(2.0, 4.0, &p).unwrap()) < 1e-14);
}

#[test]
fn boundary_profile_power_tail() {
    // For ξ2 e^{−τ} ≫ 1 the boundary value tracks Z(0) ζ^{−(2+a)} with an
    // O(ζ^{−a}) correction.
    let a = 0.5;
    let p = pp(a, 1.0);
    let prefactor = 1.0 / ((1.0 - a) * (1.0 / (1.0 - a)).ln());
    let tau = 3.0;
    let z0 = z_at_zero(a).unwrap();
    let gap = |zeta: f64| {
        let g = g_boundary(zeta * f64::exp(tau), tau, &p).unwrap() * (2.0 * tau).exp() * tau / prefactor;
        (g * zeta.powf(2.0 + a) / z0 - 1.0).abs()
    };
    let (g3, g5) = (gap(1e3), gap(1e5));
    assert!(g5 < 0.15 * g3, "{g3} {g5}");
}

#[test]
fn interior_profiles_reduce_to_boundary_values() {
    let p = pp(0.5, 1.0);
    for (xi2, tau) in [(0.5, 2.0), (3.0, 6.0), (40.0, 4.0)] {
        assert!(rel(g_profile(0.0, xi2, tau, &p).unwrap(), g_boundary(xi2, tau, &p).unwrap()) < 1e-12);
        for xi3 in [0.0, -1.5, 7.0] {
            assert!(rel(f_profile(0.0, xi2, xi3, tau, &p).unwrap(), f_boundary(xi2, xi3, tau, &p).unwrap()) < 1e-12);
        }
    }
}

#[test]
fn phi_and_z_forms_agree() {
    let pr = Profile::exact(pp(0.5, 1.0));
    let (g, gz) = (pr.g_profile(0.3, 1.0, 5.0).unwrap(), pr.g_profile_z(0.3, 1.0, 5.0).unwrap());
    assert!(rel(g, gz) < 1e-10, "{g} vs {gz}");
}

#[test]
fn interior_profile_is_transported_boundary_data() {
    // Flow the boundary value at (0, ξ20, τ0) along the characteristic system.
    for a in [0.3, 0.5, 0.7] {
        let p = pp(a, 1.0);
        for (xi20, tau0, dtau) in [(1.0, 3.0, 0.5), (20.0, 5.0, 1.5), (0.2, 2.0, 0.2)] {
            let s = integrate_characteristics(xi20, tau0, tau0 + dtau, a).unwrap();
            let inner = g_profile(s.xi1, s.xi2, tau0 + dtau, &p).unwrap();
            let start = g_boundary(xi20, tau0, &p).unwrap();
            assert!(rel(inner / start, s.amplitude) < 1e-8, "a={a}: {} vs {}", inner / start, s.amplitude);
        }
    }
}

#[test]
fn transverse_marginal_of_f_is_g() {
    let pr = Profile::exact(pp(0.5, 1.0));
    let m = pr.f_marginal(0.3, 1.0, 6.0, 1e-8).unwrap();
    let g = pr.g_profile_z(0.3, 1.0, 6.0).unwrap();
    assert!(rel(m, g) < 0.02, "{m} vs {g}");
}

#[test]
fn f_matches_transport_of_boundary_value() {
    let pr = Profile::exact(pp(0.5, 1.0));
    let direct = pr.f_profile(0.2, 1.0, 0.5, 6.0).unwrap();
    let transported = pr.f_profile_by_transport(0.2, 1.0, 0.5, 6.0).unwrap();
    assert!(rel(direct, transported) < 1e-8, "{direct} vs {transported}");
}

#[test]
fn f_decays_like_inverse_power_of_transverse_speed() {
    let pr = Profile::exact(pp(0.5, 1.0));
    let scaled = |x3: f64| pr.f_profile(0.0, 1.0, x3, 2.0).unwrap() * (2.0 * 1f64.hypot(x3)).powf(2.5);
    let r: Vec<f64> = [1e8, 1e9, 1e10, 1e11].iter().map(|&x| scaled(x)).collect();
    let steps: Vec<f64> = r.windows(2).map(|w| rel(w[1], w[0])).collect();
    assert!(steps.windows(2).all(|s| s[1] < s[0]), "{steps:?}");
    assert!(steps[2] < 1e-3, "{steps:?}");
    // Doubling M0 doubles F.
    let f1 = f_boundary(1.0, 2.0, 3.0, &pp(0.5, 1.0)).unwrap();
    let f2 = f_boundary(1.0, 2.0, 3.0, &pp(0.5, 2.0)).unwrap();
    assert!(rel(f2, 2.0 * f1) < 1e-14);
}

#[test]
fn profiles_reject_points_outside_the_admissible_cone() {
    let p = pp(0.5, 1.0);
    // τ0 = 1 + log(0.1) < 0.
    assert!(matches!(g_profile(0.9, 1.0, 1.0, &p), Err(Error::NegativeTauZero(t)) if t < 0.0));
    assert!(matches!(f_profile(0.9, 1.0, 0.3, 1.0, &p), Err(Error::NegativeTauZero(_))));
    assert!(g_profile(1.2, 1.0, 5.0, &p).is_err());
    assert!(g_profile(-0.1, 1.0, 5.0, &p).is_err());
}

#[test]
fn mass_is_linear_in_initial_mass_and_approaches_it() {
    let o = MassOptions::default();
    let m1 = total_mass_g(12.0, &pp(0.5, 1.0), &o).unwrap();
    let m2 = total_mass_g(12.0, &pp(0.5, 2.0), &o).unwrap();
    assert!(rel(m2, 2.0 * m1) < 1e-10);
    let m24 = total_mass_g(24.0, &pp(0.5, 1.0), &o).unwrap();
    assert!((m24 - 1.0).abs() < (m1 - 1.0).abs(), "{m1} {m24}");
    // The deficit is an O(1/τ) correction: τ (1 − mass) settles to a constant.
    let deficits: Vec<f64> = [24.0, 48.0, 96.0]
        .iter()
        .map(|&t| t * (1.0 - total_mass_g(t, &pp(0.5, 1.0), &o).unwrap()))
        .collect();
    assert!(deficits.iter().all(|d| (4.0..8.0).contains(d)), "{deficits:?}");
    assert!((deficits[2] - deficits[1]).abs() < (deficits[1] - deficits[0]).abs(), "{deficits:?}");
}

#[test]
fn mass_spreads_over_many_dyadic_scales() {
    let tau = 12.0;
    let pr = Profile::tabulated(pp(0.5, 1.0), 64).unwrap();
    let o = MassOptions::default();
    let k_max = (tau / LN_2).floor() as i32;
    let bands: Vec<f64> = pr
        .dyadic_fractions(tau, &o)
        .unwrap()
        .into_iter()
        .filter(|(k, _)| (0..=k_max).contains(k))
        .map(|(_, f)| f)
        .collect();
    assert!(bands.iter().all(|&f| f < 0.35), "{bands:?}");
    let heavy = bands.iter().filter(|&&f| f >= 0.01).count();
    assert!(heavy as f64 >= 0.5 * k_max as f64, "{heavy} heavy bands");
    let rim = pr.concentration_fraction(tau, &o).unwrap();
    assert!(rim >= 0.8, "{rim}");
}

#[test]
fn mollifier_approaches_dirac_mass() {
    let p = pp(0.5, 1.0);
    let test = |x: f64| bump((x - 1.0) / 0.2);
    let gap = |tau: f64| {
        let (s, d) = mollifier_check(1.0, tau, &p, test).unwrap();
        rel(s, d)
    };
    let (g8, g16) = (gap(8.0), gap(16.0));
    assert!(g16 < g8, "{g8} {g16}");
    // A test function supported away from ξ2 sees a vanishing weight.
    let away: Vec<f64> = [8.0, 16.0, 24.0]
        .iter()
        .map(|&tau| {
            let (s, d) = mollifier_check(1.0, tau, &p, |x| bump((x - 0.3) / 0.1)).unwrap();
            assert_eq!(d, 0.0);
            s
        })
        .collect();
    assert!(away[1] < 1e-3 * away[0] && away[2] < 1e-3 * away[1] && away[2] < 1e-12, "{away:?}");
    for m0 in [1.0, 3.0] {
        let (_, d) = mollifier_check(1.0, 10.0, &pp(0.5, m0), |_| 1.0).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn profiles_positive_on_admissible_cone(
        q in 0.0..0.95f64, l2 in -3.0..3.0f64, tau in 3.0..10.0f64, x3 in -5.0..5.0f64, a in 0.2..0.8f64,
    ) {
        let p = pp(a, 1.0);
        let xi2 = 10f64.powf(l2);
        let xi1 = q * xi2;
        let g = g_profile(xi1, xi2, tau, &p).unwrap();
        let f = f_profile(xi1, xi2, x3, tau, &p).unwrap();
        prop_assert!(g > 0.0 || g == 0.0 && xi1 > 0.0);
        prop_assert!(f >= 0.0 && f.is_finite());
    }
}
