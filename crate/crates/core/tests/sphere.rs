mod common;

use std::f64::consts::PI;

use cmc_scri::sphere::{SphereFunction, SphereGrid};
use common::orders;
use proptest::prelude::*;

fn max_err(f: &SphereFunction, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let g = f.grid;
    let n_phi = g.len() / g.n_theta;
    let mut e: f64 = 0.0;
    for j in 0..g.n_theta {
        for l in 0..n_phi {
            e = e.max((f.at(j, l) - exact(g.theta(j), g.phi(l))).abs());
        }
    }
    e
}

type Scalar = fn(f64, f64) -> f64;

// (f, Δf, |∇f|²)
const AXI: [(Scalar, Scalar, Scalar); 3] = [
    (|t, _| t.cos(), |t, _| -2.0 * t.cos(), |t, _| t.sin().powi(2)),
    (
        |t, _| 3.0 * t.cos().powi(2) - 1.0,
        |t, _| -6.0 * (3.0 * t.cos().powi(2) - 1.0),
        |t, _| 36.0 * (t.cos() * t.sin()).powi(2),
    ),
    (|_, _| 1.0, |_, _| 0.0, |_, _| 0.0),
];

const FULL: [(Scalar, Scalar, Scalar); 2] = [
    (
        |t, p| t.sin() * p.cos(),
        |t, p| -2.0 * t.sin() * p.cos(),
        |t, p| (t.cos() * p.cos()).powi(2) + p.sin().powi(2),
    ),
    (
        |t, p| t.sin().powi(2) * (2.0 * p).cos(),
        |t, p| -6.0 * t.sin().powi(2) * (2.0 * p).cos(),
        |t, p| (2.0 * t.sin() * t.cos() * (2.0 * p).cos()).powi(2) + (2.0 * t.sin() * (2.0 * p).sin()).powi(2),
    ),
];

#[test]
fn axisymmetric_operators_converge_at_second_order() {
    for (k, &(f, lap, grad)) in AXI.iter().enumerate().take(2) {
        let mut e_lap = vec![];
        let mut e_grad = vec![];
        for n in [16, 32, 64, 128] {
            let u = SphereFunction::from_axisymmetric_fn(n, |t| f(t, 0.0));
            e_lap.push(max_err(&u.laplacian(), lap));
            e_grad.push(max_err(&u.grad_norm_sq(), grad));
        }
        for (name, e) in [("laplacian", &e_lap), ("|∇f|²", &e_grad)] {
            for o in orders(e) {
                assert!(o >= 1.9, "Y{} {name}: errors {e:?}", k + 1);
            }
        }
    }
    let one = SphereFunction::from_axisymmetric_fn(16, |_| 1.0);
    assert_eq!(one.laplacian().max_abs(), 0.0);
}

/// Area-weighted RMS error.
fn rms_err(f: &SphereFunction, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let e = SphereFunction::from_full_fn(f.grid.n_theta, f.grid.n_phi, |t, p| exact(t, p));
    let d = f.zip_with(&e, |a, b| (a - b).powi(2)).unwrap();
    (d.integrate() / (4.0 * PI)).sqrt()
}

// Non-zonal modes lose one order on the ring next to each pole in the max
// norm (the cot θ and sin⁻²θ terms amplify the O(Δθ²) stencil error), so the
// full-sphere operators are measured in the area-weighted RMS norm.
#[test]
fn full_sphere_operators_converge_at_second_order() {
    for &(f, lap, grad) in &FULL {
        let mut e_lap = vec![];
        let mut e_grad = vec![];
        for n in [32, 64, 128] {
            let u = SphereFunction::from_full_fn(n, 2 * n, f);
            e_lap.push(rms_err(&u.laplacian(), lap));
            e_grad.push(rms_err(&u.grad_norm_sq(), grad));
        }
        for o in orders(&e_lap).into_iter().chain(orders(&e_grad)) {
            assert!(o >= 1.9, "{e_lap:?} {e_grad:?}");
        }
    }
}

#[test]
fn grad_inner_of_zonal_harmonics() {
    // ⟨∇cos θ, ∇cos²θ⟩ = 2 cos θ sin²θ
    let mut e = vec![];
    for n in [16, 32, 64] {
        let a = SphereFunction::from_axisymmetric_fn(n, f64::cos);
        let b = SphereFunction::from_axisymmetric_fn(n, |t| t.cos().powi(2));
        let gi = a.grad_inner(&b).unwrap();
        e.push(max_err(&gi, |t, _| 2.0 * t.cos() * t.sin().powi(2)));
    }
    assert!(orders(&e).iter().all(|&o| o >= 1.9), "{e:?}");
}

#[test]
fn integrals_of_harmonics() {
    let e: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&n| (SphereFunction::from_axisymmetric_fn(n, |_| 1.0).integrate() - 4.0 * PI).abs())
        .collect();
    assert!(orders(&e).iter().all(|&o| o >= 1.99), "{e:?}");
    let y1 = SphereFunction::from_axisymmetric_fn(64, f64::cos);
    assert!(y1.integrate().abs() < 1e-12);
    let full = SphereFunction::from_full_fn(32, 64, |t, p| t.sin() * p.cos());
    assert!(full.integrate().abs() < 1e-12);
}

#[test]
fn grid_validation() {
    let a = SphereFunction::from_axisymmetric_fn(8, f64::cos);
    let b = SphereFunction::from_axisymmetric_fn(9, f64::cos);
    assert!(a.zip_with(&b, |x, y| x + y).is_err());
    assert!(SphereFunction::new(SphereGrid::axisymmetric(8), vec![0.0; 7]).is_err());
}

#[test]
fn csv_and_json_round_trip() {
    let a = SphereFunction::from_axisymmetric_fn(12, |t| 0.3 * t.cos() - 0.1);
    let back = SphereFunction::from_axisymmetric_csv(&a.to_csv()).unwrap();
    assert_eq!(back.values, a.values);
    let full = SphereFunction::from_full_fn(6, 8, |t, p| t.sin() * p.sin());
    let back = SphereFunction::from_json(&full.to_json().unwrap()).unwrap();
    assert_eq!(back, full);
}

proptest! {
    #[test]
    fn laplacian_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -1.0f64..1.0) {
        let f = SphereFunction::from_axisymmetric_fn(24, |t| (2.0 * t).cos() + c * t.sin().powi(3));
        let g = SphereFunction::from_axisymmetric_fn(24, |t| t.cos().powi(3));
        let lhs = f.scale(a).zip_with(&g.scale(b), |x, y| x + y).unwrap().laplacian();
        let rhs = f.laplacian().scale(a).zip_with(&g.laplacian().scale(b), |x, y| x + y).unwrap();
        let d = lhs.zip_with(&rhs, |x, y| x - y).unwrap().max_abs();
        prop_assert!(d < 1e-9 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn grad_norm_is_nonnegative_and_shift_invariant(k in 0.0f64..5.0, shift in -10.0f64..10.0) {
        let f = SphereFunction::from_axisymmetric_fn(20, |t| (k * t).sin());
        let g = f.map(|v| v + shift);
        let a = f.grad_norm_sq();
        let b = g.grad_norm_sq();
        prop_assert!(a.values.iter().all(|&v| v >= 0.0));
        let d = a.zip_with(&b, |x, y| x - y).unwrap().max_abs();
        prop_assert!(d < 1e-8 * (1.0 + a.max_abs()));
    }
}
