mod common;

use cmc_scri::charts::Mass;
use cmc_scri::curvature::{h_null, StencilJet};
use cmc_scri::cut::Cut;
use cmc_scri::diagnostics::loglog_slope;
use cmc_scri::foliation::{phi_psi, Convention, Foliation, GridLeaf};
use cmc_scri::sphere::SphereFunction;
use cmc_scri::Error;
use common::cos_leaf;
use proptest::prelude::*;

fn fol(cut: Cut) -> Foliation {
    Foliation::new(Mass::default(), &cut, 1.0).unwrap()
}

#[test]
fn leaf_matches_hand_computed_cos_theta_leaf() {
    // user cut f = a cos θ is internal f̃ = -a cos θ
    let f = fol(Cut::CosTheta { amplitude: 0.7 });
    for &(t, s, tau) in &[(0.3, 0.01, 1.0), (1.4, 0.1, 0.6), (2.8, 0.2, 1.8)] {
        let a = f.p(t, s, tau);
        let b = cos_leaf(-0.7, tau, t, s);
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}

#[test]
fn expansion_coefficients_of_cos_theta() {
    // φ_out = ½(H₀⁻² + a² sin²θ)
    let f = fol(Cut::CosTheta { amplitude: 0.2 });
    for &t in &[0.1, 1.0, 2.0] {
        let (phi, psi) = f.expansion_coefficients(t, 1.0);
        assert!((phi - 0.5 * (1.0 + 0.04 * t.sin().powi(2))).abs() < 1e-15);
        let lap = -2.0 * 0.2 * t.cos();
        let k = -2.0 * 0.2f64.powi(3) * t.sin().powi(2) * t.cos();
        assert!((psi - 0.5 * (lap + k)).abs() < 1e-15);
    }
}

#[test]
fn grid_coefficients_converge_to_exact_ones() {
    let cut = Cut::Legendre2 { amplitude: 0.3 };
    let f = fol(cut.clone());
    let err = |n: usize| {
        let (phi, psi) = phi_psi(&cut.sample(n), 1.0, Convention::User).unwrap();
        let mut e: f64 = 0.0;
        for j in 0..n {
            let (p, q) = f.expansion_coefficients(phi.grid.theta(j), 1.0);
            e = e.max((phi.values[j] - p).abs()).max((psi.values[j] - q).abs());
        }
        e
    };
    let (a, b) = (err(32), err(64));
    assert!((a / b).log2() > 1.9, "{a} {b}");
}

#[test]
fn grid_leaf_has_discrete_l_tau_squared_at_scri() {
    let f = fol(Cut::CosTheta { amplitude: 0.5 });
    let leaf = GridLeaf::new(&f, 1.0, 32).unwrap();
    let fs = SphereFunction::new(f.cut_internal.sample(32).grid, leaf.f.clone()).unwrap();
    let g = fs.grad_norm_sq();
    for j in 0..32 {
        // L(s = 0) = -(2φ + |∇f̃|²) = τ²
        let l0 = -(2.0 * leaf.phi[j] + g.values[j]);
        assert!((l0 - 1.0).abs() < 1e-14);
    }
}

#[test]
fn mean_curvature_of_leaves_tends_to_inverse_tau() {
    // independent of the frame construction: h_null on exact leaf jets
    let f = fol(Cut::CosTheta { amplitude: 1.0 });
    for &tau in &[0.6, 1.0, 1.8] {
        let pts: Vec<(f64, f64)> = [1e-4, 1e-3, 1e-2]
            .iter()
            .map(|&s| {
                let j = f.jet(0.9, s, tau).unwrap();
                let jet = StencilJet {
                    theta: 0.9,
                    x: s,
                    value: j.p,
                    d_x: j.p_s,
                    d_xx: j.p_ss,
                    d_t: j.p_theta,
                    d_tt: j.p_thetatheta,
                    d_xt: j.p_stheta,
                };
                (s, (h_null(&jet, f.mass, 0.0).unwrap() - 1.0 / tau).abs())
            })
            .collect();
        assert!(loglog_slope(&pts) > 0.9, "τ = {tau}: {pts:?}");
        let frame_h = f.geometry(0.9, 1e-3, tau).unwrap().h;
        assert!((frame_h - 1.0 / tau).abs() < 0.05);
    }
}

#[test]
fn expansions_of_lapse_and_second_fundamental_form() {
    for cut in [Cut::Zero, Cut::CosTheta { amplitude: 1.0 }] {
        let f = fol(cut);
        for &tau in &[0.6, 1.0, 1.8] {
            let ss = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
            let mut da = vec![];
            let mut dk = vec![];
            for &s in &ss {
                let g = f.geometry(1.2, s, tau).unwrap();
                da.push((s, (g.alpha - 1.0).abs()));
                let mut e: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let d = if i == j { 1.0 / tau } else { 0.0 };
                        e = e.max((g.k_w[i][j] - d).abs());
                    }
                }
                dk.push((s, e));
            }
            assert!(loglog_slope(&da) >= 0.9, "α: {da:?}");
            assert!(loglog_slope(&dk) >= 0.9, "K: {dk:?}");
        }
    }
}

#[test]
fn second_fundamental_form_is_symmetric() {
    let f = fol(Cut::Legendre2 { amplitude: 0.4 });
    let g = f.geometry(0.7, 0.05, 1.3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((g.k_w[i][j] - g.k_w[j][i]).abs() < 1e-10);
        }
    }
    let tr = g.k_w[0][0] + g.k_w[1][1] + g.k_w[2][2];
    assert!((tr / 3.0 - g.h).abs() < 1e-14);
}

#[test]
fn s0_validation_and_domain() {
    let mut f = fol(Cut::CosTheta { amplitude: 2.0 });
    let v = f.validate_s0(32, 64).unwrap();
    assert_eq!(v.halvings, 2);
    assert!(v.min_l >= 0.5 * f.tau_window.0.powi(2));
    assert!(v.max_p_tau < 0.0);
    assert_eq!(f.s0, v.s0);
    assert!(matches!(f.jet(1.0, 2.0 * v.s0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(f.jet(1.0, 0.5 * v.s0, 5.0), Err(Error::Domain(_))));
    // a slab reaching 0.4/m has non-spacelike points for this cut
    assert!(!f.nonspacelike_points(0.4, 16, 64).is_empty());
}

#[test]
fn sweep_csv_header_and_rows() {
    let f = fol(Cut::Zero);
    let csv = f.sweep_csv(&[0.5, 1.0], &[0.01, 0.02], &[1.0]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "theta,s,tau,L,alpha,H,K11,K22,K33");
    assert_eq!(lines.len(), 5);
}

proptest! {
    #[test]
    fn tau_inversion_round_trips(theta in 0.01f64..3.13, s in 1e-4f64..0.1, tau in 0.55f64..1.95, a in -0.5f64..0.5) {
        let f = fol(Cut::CosTheta { amplitude: a });
        let v = -f.p(theta, s, tau);
        let back = f.invert_tau(theta, s, v).unwrap();
        prop_assert!((back - tau).abs() < 1e-9 * tau);
    }

    #[test]
    fn leaves_are_spacelike_and_ordered(theta in 0.01f64..3.13, s in 1e-4f64..0.05, t1 in 0.55f64..1.9, dt in 0.01f64..0.05) {
        let f = fol(Cut::Legendre2 { amplitude: 0.3 });
        let a = f.jet(theta, s, t1).unwrap();
        let b = f.jet(theta, s, t1 + dt).unwrap();
        prop_assert!(a.l > 0.0 && a.p_tau < 0.0);
        // v = -P increases with τ: τ is a time function
        prop_assert!(-b.p > -a.p);
        let (alpha, _) = f.lapse_and_time_check(theta, s, t1).unwrap();
        prop_assert!(alpha > 0.0);
    }
}
