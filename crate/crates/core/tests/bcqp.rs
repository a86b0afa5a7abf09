mod common;

use sqvar::bcqp::*;
use sqvar::linalg::{sym_eigenvalues, vector};
use sqvar::optcert::{dss_hess, DEFAULT_EIG_TOL};
use sqvar::rng;

#[test]
fn dss_gradient_and_hessian_match_finite_differences() {
    let p = gen_qp(8, 10.0, 1);
    let mut g = rng::stream(1, rng::STREAM_TEST);
    for _ in 0..20 {
        let v = rng::normal_vec(&mut g, 8);
        let (_, grad) = p.dss_value_grad(&v);
        common::assert_close(&grad, &common::fd_grad(|z| p.dss_value_grad(z).0, &v), 1e-6);
        let x = vector::square(&v);
        let hess = dss_hess(&p.grad(&x), &p.q, &v);
        let fd = common::fd_jac(|z| p.dss_value_grad(z).1, &v);
        common::assert_close(hess.as_slice(), fd.as_slice(), 1e-6);
    }
}

#[test]
fn spectrum_lies_in_the_requested_range() {
    for seed in 0..3 {
        let p = gen_qp(60, 100.0, seed);
        let ev = sym_eigenvalues(&p.q).unwrap();
        assert!(ev.iter().all(|e| *e >= 0.01 - 1e-8 && *e <= 1.0 + 1e-8));
        assert!(vector::norm2(&p.grad(&p.x_ref)) <= 1e-10);
    }
}

#[test]
fn both_solvers_reach_the_same_objective() {
    let opts = BcOptions::default();
    for seed in 0..5 {
        let p = gen_qp(100, 10.0, seed);
        let x0 = standard_start(100, seed);
        let v0: Vec<f64> = x0.iter().map(|x| x.sqrt()).collect();
        let a = pg_solve(&p, &x0, opts).unwrap();
        let b = dss_gd_scaled_solve(&p, &v0, opts).unwrap();
        assert_eq!((a.status, b.status), (BcStatus::Converged, BcStatus::Converged));
        assert!((a.objective - b.objective).abs() <= 10.0 * opts.tol * (1.0 + a.objective.abs()));
        assert!(a.x.iter().chain(&b.x).all(|x| *x >= 0.0));
    }
}

#[test]
fn pg_solution_is_weak_second_order() {
    let p = gen_qp(40, 10.0, 7);
    let opts = BcOptions {
        tol: 1e-7,
        ..BcOptions::default()
    };
    let r = pg_solve(&p, &standard_start(40, 7), opts).unwrap();
    let c = sqvar::optcert::bc_weak_2n_check(&r.x, &p.grad(&r.x), &p.q, 1e-7).unwrap();
    assert!(
        c.is_weak_2n && c.min_eig_inactive >= -DEFAULT_EIG_TOL,
        "{c:?} {:?}",
        r.status
    );
}
