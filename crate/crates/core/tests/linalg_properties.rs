use predcorr::linalg::{cholesky_pd_check, solve_spd, spectral_radius_gram, weighted_norm_sq};
use predcorr::problems::{make_multiblock_quadratic, make_saddle_quadratic, make_two_block_quadratic, UniformSource};
use predcorr::{Matrix, VariationalInstance, Vector};
use proptest::prelude::*;

fn certified_instances() -> Vec<VariationalInstance> {
    vec![
        make_two_block_quadratic(3, 3, 2, 4).unwrap(),
        make_multiblock_quadratic(3, &[2, 1, 2], 3).unwrap(),
        make_saddle_quadratic(3, 3, 2).unwrap(),
    ]
}

proptest! {
    #[test]
    fn spectral_estimate_bounds_every_rayleigh_quotient(seed in 0u64..10_000, rows in 1usize..6, cols in 1usize..6) {
        let mut src = UniformSource::new(seed);
        let a = src.matrix(rows, cols);
        let rho = spectral_radius_gram(&a, 1e-13, 100_000).value;
        for _ in 0..10 {
            let v = src.vector(cols);
            let q = a.matvec(v.as_slice()).norm_sq() / v.norm_sq();
            prop_assert!(rho >= q * (1.0 - 1e-9), "rho {} < quotient {}", rho, q);
        }
    }
}

#[test]
fn solve_spd_reproduces_rhs_on_certified_weights() {
    let mut src = UniformSource::new(17);
    for inst in certified_instances() {
        let cert = inst.certify().unwrap();
        assert!(cert.satisfied);
        for s in [&cert.h, &cert.g] {
            for _ in 0..10 {
                let rhs = src.vector(s.rows());
                let x = solve_spd(s, &rhs).unwrap();
                let back = s.matvec(x.as_slice());
                assert!((&back - &rhs).norm() <= 1e-10 * rhs.norm(), "{}", inst.family());
            }
        }
    }
}

#[test]
fn weighted_norm_vanishes_only_at_zero() {
    let mut src = UniformSource::new(23);
    for inst in certified_instances() {
        let h = inst.certify().unwrap().h;
        let n = h.rows();
        assert_eq!(weighted_norm_sq(&h, &Vector::zeros(n)).unwrap(), 0.0);
        assert!(cholesky_pd_check(&h, 0.0).unwrap().is_pd());
        for _ in 0..50 {
            let v = src.vector(n);
            let q = weighted_norm_sq(&h, &v).unwrap();
            assert!(q > 1e-12 * v.norm_sq(), "{}: {q}", inst.family());
        }
    }
}

#[test]
fn weighted_norm_rejects_mismatch() {
    let h = Matrix::identity(3);
    assert!(weighted_norm_sq(&h, &Vector::zeros(2)).is_err());
}
