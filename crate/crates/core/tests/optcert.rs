mod common;

use common::{known_qp, random_nlp};

use proptest::prelude::*;
use rand::Rng as _;
use sqvar::linalg::{nullspace_basis, vector};
use sqvar::optcert::*;
use sqvar::rng;

#[test]
fn dss_2n_points_roundtrip_to_bound_constrained_2n() {
    for seed in 0..40 {
        let p = known_qp(6, 2, seed);
        let mut g = rng::stream(seed, rng::STREAM_INIT);
        for _ in 0..2 {
            let v: Vec<f64> =
                p.x.iter()
                    .map(|xi| if g.random_bool(0.5) { xi.sqrt() } else { -xi.sqrt() })
                    .collect();
            let d = dss_bc_2n_check(|x| p.grad(x), |_| p.q.clone(), &v, 1e-8).unwrap();
            assert!(d.is_2n, "seed {seed}: {d:?}");
            let x = vector::square(&v);
            let bc = bc_weak_2n_check(&x, &p.grad(&x), &p.q, 1e-8).unwrap();
            assert!(bc.is_weak_2n, "seed {seed}: {bc:?}");
        }
    }
}

#[test]
fn dss_rejects_spurious_stationary_points() {
    // x = 0 on a coordinate with negative gradient is first-order for the
    // squared problem but not second-order
    let p = known_qp(5, 0, 3);
    let x = vec![0.0; 5];
    let grad = p.grad(&x);
    let v = vec![0.0; 5];
    let d = dss_bc_2n_check(|x| p.grad(x), |_| p.q.clone(), &v, 1e-8).unwrap();
    assert!(d.is_first_order);
    let bc = bc_prox_residual(&grad, &x).unwrap();
    assert_eq!(d.is_2n, bc <= 1e-8);
    if grad.iter().any(|gi| *gi < 0.0) {
        assert!(!d.is_2n);
    }
}

#[test]
fn transfer_dominates_direct_measures() {
    let mut checked = 0;
    for seed in 0..50 {
        let (data, v, s) = random_nlp(5, 2, 2, 1e-3, 0.05, seed);
        let eps = ssv_approx_2n_measure(&data, &v, &s).unwrap();
        let eps = Ssv2nMeasures {
            eps1: eps.eps1.max(1e-12),
            eps2: eps.eps2.max(1e-12),
            eps3: eps.eps3.max(1e-12),
        };
        if eps.eps1 > 1.0 || eps.eps2 > 1.0 || eps.eps3 > 1.0 {
            continue;
        }
        let zeta = (2.0 * eps.eps2).max(0.1);
        let t = thm35_transfer(&data, &v, &s, eps, zeta).unwrap();
        let d = nlp_approx_2n_measure(&data, &s, &t.a, zeta).unwrap();
        let slack = 1e-12;
        assert!(
            d.eps_foc <= t.eps_foc + slack,
            "seed {seed}: foc {} > {}",
            d.eps_foc,
            t.eps_foc
        );
        assert!(d.eps_pf <= t.eps_pf + slack, "seed {seed}: pf");
        assert!(
            d.eps_cs <= t.eps_cs + slack,
            "seed {seed}: cs {} > {}",
            d.eps_cs,
            t.eps_cs
        );
        assert!(
            d.eps_pd <= t.eps_pd + slack,
            "seed {seed}: pd {} > {}",
            d.eps_pd,
            t.eps_pd
        );
        assert!(
            d.eps_soc <= t.eps_soc + slack,
            "seed {seed}: soc {} > {}",
            d.eps_soc,
            t.eps_soc
        );
        checked += 1;
    }
    assert!(checked >= 40, "only {checked} instances met the hypotheses");
}

#[test]
fn soc_measure_matches_brute_force() {
    for seed in 0..5 {
        let (data, _, s) = random_nlp(4, 2, 1, 0.0, 0.0, seed);
        let m = nlp_approx_2n_measure(&data, &s, &[0.0; 3], 1e-3).unwrap();
        let z = nullspace_basis(&data.jac.select_rows(&[0, 1])).unwrap();
        assert_eq!(z.cols(), 2);
        let mut g = rng::stream(seed, rng::STREAM_INIT);
        let mut best = f64::INFINITY;
        for _ in 0..100_000 {
            let y = rng::normal_vec(&mut g, 2);
            let w = z.matvec(&y);
            let q = vector::dot(&w, &data.hess_l.matvec(&w)) / vector::dot(&w, &w);
            best = best.min(q);
        }
        assert!(
            (m.eps_soc - (-best).max(0.0)).abs() < 1e-6,
            "seed {seed}: {} vs {}",
            m.eps_soc,
            -best
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dss_check_is_sign_symmetric(seed in 0u64..10_000, mask in 0u32..64) {
        let p = known_qp(6, 2, seed);
        let mut g = rng::stream(seed, rng::STREAM_INIT);
        let v = rng::normal_vec(&mut g, 6);
        let flipped: Vec<f64> = v.iter().enumerate().map(|(i, vi)| if mask >> i & 1 == 1 { -vi } else { *vi }).collect();
        let a = dss_bc_2n_check(|x| p.grad(x), |_| p.q.clone(), &v, 1e-8).unwrap();
        let b = dss_bc_2n_check(|x| p.grad(x), |_| p.q.clone(), &flipped, 1e-8).unwrap();
        prop_assert_eq!(a.is_2n, b.is_2n);
        prop_assert!((a.grad_norm - b.grad_norm).abs() <= 1e-12 * (1.0 + a.grad_norm));
        prop_assert!((a.min_eig - b.min_eig).abs() <= 1e-9 * (1.0 + a.min_eig.abs()));
    }

    #[test]
    fn transfer_is_monotone_in_each_epsilon(seed in 0u64..10_000, which in 0usize..3, bump in 1.0f64..4.0) {
        let (data, v, s) = random_nlp(5, 2, 2, 0.0, 0.0, seed);
        let base = Ssv2nMeasures { eps1: 0.01, eps2: 0.01, eps3: 0.01 };
        let mut up = base;
        match which {
            0 => up.eps1 *= bump,
            1 => up.eps2 *= bump,
            _ => up.eps3 *= bump,
        }
        let a = thm35_transfer(&data, &v, &s, base, 0.1).unwrap();
        let b = thm35_transfer(&data, &v, &s, up, 0.1).unwrap();
        for (x, y) in [(a.eps_foc, b.eps_foc), (a.eps_pf, b.eps_pf), (a.eps_cs, b.eps_cs), (a.eps_pd, b.eps_pd), (a.eps_soc, b.eps_soc)] {
            prop_assert!(x <= y + 1e-15 * y.abs());
        }
    }

    #[test]
    fn prox_residual_vanishes_only_at_first_order_points(x in proptest::collection::vec(0.0f64..3.0, 1..8), shift in -1.0f64..1.0) {
        // grad = x − shift·1 is the gradient of ½‖x − shift‖² at the point x
        let grad: Vec<f64> = x.iter().map(|xi| xi - shift).collect();
        let r = bc_prox_residual(&grad, &x).unwrap();
        let kkt = x.iter().zip(&grad).all(|(xi, gi)| (*xi > 0.0 && *gi == 0.0) || (*xi == 0.0 && *gi >= 0.0));
        prop_assert_eq!(r == 0.0, kkt);
    }
}
