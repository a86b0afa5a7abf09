mod common;

use proptest::prelude::*;
use sqvar::linalg::{sym_eig_min, DenseMatrix};
use sqvar::nmf::*;
use sqvar::rng;

#[test]
fn dss_gradient_matches_finite_differences() {
    let p = gen_nmf(6, 2, 1);
    let mut g = rng::stream(1, rng::STREAM_TEST);
    for _ in 0..20 {
        let v = rng::uniform_vec(&mut g, 12, -1.0, 1.0);
        let (_, grad) = nmf_value_grad(&p.m, &DenseMatrix::from_row_major(6, 2, v.clone()).unwrap());
        let fd = common::fd_grad(
            |z| nmf_value_grad(&p.m, &DenseMatrix::from_row_major(6, 2, z.to_vec()).unwrap()).0,
            &v,
        );
        common::assert_close(grad.as_slice(), &fd, 1e-6);
    }
}

#[test]
fn generated_target_is_psd() {
    for seed in 0..5 {
        let p = gen_nmf(30, 4, seed);
        assert!(sym_eig_min(&p.m).unwrap() >= -1e-10);
        assert_eq!(p.m.asymmetry(), 0.0);
    }
}

#[test]
fn all_variants_return_nonnegative_factors() {
    let p = gen_nmf(25, 3, 2);
    let v0 = nmf_start(&p, 2);
    for variant in NmfVariant::ALL {
        let r = nmf_solve(
            &p,
            &v0,
            variant,
            &NmfOptions {
                eps: 1e-3,
                max_iter: 20_000,
            },
        )
        .unwrap();
        assert!(r.x.as_slice().iter().all(|x| *x >= 0.0), "{}", variant.name());
        assert!((r.acc - p.acc(&r.x)).abs() <= 1e-12);
        assert_eq!(r.trace.len(), r.iterations + 1);
    }
}

#[test]
fn iteration_cap_is_reported_with_the_last_iterate() {
    let p = gen_nmf(20, 3, 3);
    let v0 = nmf_start(&p, 3);
    match nmf_solve(
        &p,
        &v0,
        NmfVariant::Gd,
        &NmfOptions {
            eps: 1e-12,
            max_iter: 5,
        },
    ) {
        Err(NmfError::MaxIterReached(r)) => assert_eq!(r.iterations, 5),
        other => panic!("expected the iteration cap, got {other:?}"),
    }
}

#[test]
fn polyak_increases_are_counted() {
    for seed in 0..3 {
        let p = gen_nmf(30, 3, seed);
        let v0 = nmf_start(&p, seed);
        for variant in [NmfVariant::PgPolyak, NmfVariant::GdPolyak] {
            let r = nmf_solve(
                &p,
                &v0,
                variant,
                &NmfOptions {
                    eps: 1e-3,
                    max_iter: 20_000,
                },
            )
            .unwrap();
            let f = r.trace.column("F").unwrap();
            let ups = f.windows(2).filter(|w| w[1] > w[0]).count();
            assert_eq!(r.increases, ups, "{} seed {seed}", variant.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn acc_is_invariant_under_column_permutation(seed in 0u64..10_000, shift in 1usize..4) {
        let p = gen_nmf(8, 4, seed);
        let x = nmf_start(&p, seed);
        let perm = DenseMatrix::from_fn(8, 4, |i, j| x[(i, (j + shift) % 4)]);
        prop_assert!((p.acc(&x) - p.acc(&perm)).abs() <= 1e-12);
    }
}
