//! Reduced two-dimensional problem: characteristics, the delay equation, the
//! boundary fixed point and the self-similar ansatz.

use std::f64::consts::{LN_2, PI};

use proptest::prelude::*;
use shearkin::charsolve::{
    boundary_fixed_point, boundary_kernel, characteristic_closed_form, delay_iterate, delay_iterate_with_moment,
    integrate_characteristics, loss_exponent, selfsim_refutation, shape_error, BoundaryGrid,
};
use shearkin::quad::{integrate, QuadratureSpec};
use shearkin::specfun::phi;
use shearkin::Error;

fn rel(x: f64, y: f64) -> f64 {
    (x / y - 1.0).abs()
}

#[test]
fn characteristic_example() {
    for s in [
        characteristic_closed_form(1.0, 0.0, LN_2, 0.5).unwrap(),
        integrate_characteristics(1.0, 0.0, LN_2, 0.5).unwrap(),
    ] {
        assert!((s.xi1 - 0.25).abs() < 1e-9 && (s.xi2 - 0.5).abs() < 1e-9, "{s:?}");
        assert!((s.loss_integral - 2.0).abs() < 1e-8);
        assert!((1.0 - s.xi1 / s.xi2 - 0.5).abs() < 1e-9);
    }
    assert_eq!(loss_exponent(0.25, 0.5, 0.5).unwrap(), 2.0);
    assert_eq!(loss_exponent(0.0, 0.5, 0.5).unwrap(), 0.0);
    assert!(loss_exponent(0.6, 0.5, 0.5).is_err());
    assert!(integrate_characteristics(1.0, 2.0, 1.0, 0.5).is_err());
    assert!(integrate_characteristics(1.0, 0.0, 1.0, 1.5).is_err());
}

#[test]
fn ode_matches_closed_form_and_flow_amplitude() {
    for a in [0.25, 0.5, 0.75] {
        for k in 0..=8 {
            let d = 0.1 * 100f64.powf(k as f64 / 8.0);
            let (xi20, tau0) = (2.0, 1.0);
            let n = integrate_characteristics(xi20, tau0, tau0 + d, a).unwrap();
            let c = characteristic_closed_form(xi20, tau0, tau0 + d, a).unwrap();
            assert!(rel(n.xi1, c.xi1) < 1e-8, "a={a} d={d}: ξ1 {} vs {}", n.xi1, c.xi1);
            assert!(rel(n.xi2, c.xi2) < 1e-8, "a={a} d={d}: ξ2");
            assert!(rel(n.loss_integral, loss_exponent(n.xi1, n.xi2, a).unwrap()) < 1e-8, "a={a} d={d}: loss");
            assert!((1.0 - n.xi1 / n.xi2 - (-d).exp()).abs() < 1e-9);
            let log_flow = (2.0 / a - 1.0) * d - 4.0 * PI * loss_exponent(n.xi1, n.xi2, a).unwrap();
            // Compare exp(log) to 1e-8 relative, also where the amplitude underflows.
            assert!((n.log_amplitude - log_flow).abs() < 1e-8, "a={a} d={d}: {} vs {log_flow}", n.log_amplitude);
            if log_flow > -700.0 {
                assert!(rel(n.amplitude, log_flow.exp()) < 1e-8, "a={a} d={d}: amplitude");
            }
        }
    }
}

#[test]
fn loss_integral_matches_path_quadrature() {
    // ∫ ξ1(s)^{−a} ds along the closed-form path, by direct quadrature.
    let (a, xi20, d) = (0.5, 3.0, 1.7);
    let xi1 = |s: f64| xi20 * (-s / a).exp() * s.exp_m1();
    let spec = QuadratureSpec::rel(1e-12).with_abs(0.0);
    let q = integrate(|s| xi1(s).powf(-a), 0.0, d, &spec).value;
    let c = characteristic_closed_form(xi20, 0.0, d, a).unwrap();
    assert!(rel(q, c.loss_integral) < 1e-8, "{q} vs {}", c.loss_integral);
}

#[test]
fn delay_recursion_gives_inverse_power() {
    for a in [0.25, 0.5, 0.75] {
        let f = delay_iterate(1.0, a, 20).unwrap();
        assert!((f.beta + 1.0).abs() < 0.02, "a={a}: β = {}", f.beta);
        assert!(f.points.iter().all(|&(_, l)| l > 0.0));
        for lambda0 in [1e-6, 3.0, 1e8] {
            let g = delay_iterate(lambda0, a, 20).unwrap();
            assert!((g.beta - f.beta).abs() < 1e-10);
        }
    }
    let flat = delay_iterate_with_moment(5.0, 0.5, 12, 1.0).unwrap();
    assert!(flat.beta.abs() < 1e-12);
    assert!(delay_iterate(1.0, 0.5, 2).is_err());
}

fn phi_grid(lo: f64, hi: f64, n: usize, a: f64) -> BoundaryGrid {
    let mut g = BoundaryGrid::constant(lo, hi, n, 1.0, 10.0).unwrap();
    g.values = g.zeta_nodes.iter().map(|&z| phi(z, a).unwrap()).collect();
    g
}

#[test]
fn boundary_kernel_is_phi() {
    for a in [0.25, 0.5, 0.75] {
        for z in [1e-3, 0.2, 1.0, 30.0, 1e3] {
            assert!(rel(boundary_kernel(z, a).unwrap(), phi(z, a).unwrap()) < 1e-9, "a={a} ζ={z}");
        }
    }
}

#[test]
fn first_moment_of_phi_is_one_minus_a() {
    // One application of the boundary operator to Φ multiplies it by 1 − a.
    for a in [0.25, 0.5, 0.75] {
        let g = phi_grid(1e-12, 1e12, 1537, a);
        assert!((g.first_moment(a) - (1.0 - a)).abs() < 1e-5, "a={a}: {}", g.first_moment(a));
    }
    let g = phi_grid(1e-4, 1e4, 513, 0.5);
    let next = boundary_fixed_point(&g, 0.5, 1).unwrap();
    for (u, v) in next.values.iter().zip(&g.values) {
        assert!((u / v - 0.5).abs() < 2e-3, "{}", u / v);
    }
    assert!((next.tau - 20.0).abs() < 1e-12);
}

#[test]
fn fixed_point_collapses_onto_phi() {
    let a = 0.5;
    let g = BoundaryGrid::constant(1e-3, 1e3, 97, 1.0, 10.0).unwrap();
    let out = boundary_fixed_point(&g, a, 3).unwrap();
    let phis: Vec<f64> = out.zeta_nodes.iter().map(|&z| phi(z, a).unwrap()).collect();
    let (c, err) = shape_error(&out, &phis).unwrap();
    assert!(c > 0.0 && err < 5e-3, "c = {c}, err = {err}");
}

#[test]
fn fixed_point_resolution_independent() {
    let a = 0.5;
    let coarse = boundary_fixed_point(&BoundaryGrid::constant(1e-4, 1e4, 513, 1.0, 10.0).unwrap(), a, 3).unwrap();
    let fine = boundary_fixed_point(&BoundaryGrid::constant(1e-4, 1e4, 1025, 1.0, 10.0).unwrap(), a, 3).unwrap();
    for (i, u) in coarse.values.iter().enumerate() {
        assert!((coarse.zeta_nodes[i] / fine.zeta_nodes[2 * i] - 1.0).abs() < 1e-12);
        assert!(rel(*u, fine.values[2 * i]) < 1e-3, "node {i}");
    }
}

#[test]
fn fixed_point_errors() {
    let zero = BoundaryGrid::constant(1e-3, 1e3, 16, 0.0, 1.0).unwrap();
    assert_eq!(boundary_fixed_point(&zero, 0.5, 2), Err(Error::Underflow));
    let mut bad = BoundaryGrid::constant(1e-3, 1e3, 16, 1.0, 1.0).unwrap();
    bad.zeta_nodes.swap(3, 4);
    assert!(boundary_fixed_point(&bad, 0.5, 1).is_err());
    assert!(BoundaryGrid::constant(1.0, 0.5, 16, 1.0, 1.0).is_err());
}

#[test]
fn self_similar_ansatz_loses_a_factor() {
    for a in [0.25, 0.5] {
        let r = selfsim_refutation(a).unwrap();
        assert!((r.ratio - (1.0 - a)).abs() < 0.02, "a={a}: ratio {}", r.ratio);
        assert!((r.exponent + (1.0 - a)).abs() < 0.02, "a={a}: exponent {}", r.exponent);
    }
}

proptest! {
    #[test]
    fn loss_exponent_homogeneity(q in 0.0..1.0f64, xi2 in 1e-3..1e3f64, c in 1e-2..1e2f64, a in 0.05..0.95f64) {
        let x1 = q * xi2;
        let base = loss_exponent(x1, xi2, a).unwrap();
        let scaled = loss_exponent(c * x1, c * xi2, a).unwrap();
        prop_assert!((scaled - c.powf(-a) * base).abs() <= 1e-12 * base.max(1e-300));
    }
}
