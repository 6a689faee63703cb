//! Properties of single prediction steps and of whole runs on the generated
//! quadratic families.

use predcorr::framework::{certify, correct, extrapolate, run, Mode, RunOptions, CERTIFY_TOL};
use predcorr::problems::{
    inclusion_residual, make_multiblock_quadratic, make_saddle_quadratic, make_two_block_quadratic, matching_pennies,
    UniformSource,
};
use predcorr::schedule::TauSchedule;
use predcorr::{BlockVector, InstanceSpec, VariationalInstance};
use proptest::prelude::*;

fn quadratic_families(seed: u64) -> Vec<VariationalInstance> {
    vec![
        make_two_block_quadratic(seed, 3, 2, 4).unwrap(),
        make_multiblock_quadratic(seed, &[2, 1, 2], 3).unwrap(),
        make_saddle_quadratic(seed, 3, 2).unwrap(),
    ]
}

fn random_point(inst: &VariationalInstance, src: &mut UniformSource) -> BlockVector {
    let layout = inst.layout().clone();
    BlockVector::new(layout.clone(), src.vector(layout.dim()).scale(3.0)).unwrap()
}

#[test]
fn inclusion_residual_holds_every_iteration() {
    for seed in [1, 2, 3] {
        for inst in quadratic_families(seed) {
            let solver = inst.solver().unwrap();
            let m = solver.correction().m().clone();
            let schedule = TauSchedule::default();
            let mut src = UniformSource::new(seed + 100);
            let w0 = random_point(&inst, &mut src);

            let mut v = solver.lift(&w0);
            for k in 0..200 {
                let tilde = solver.predict(&v).unwrap();
                let res = inclusion_residual(&inst, solver.as_ref(), &v, &tilde, &tilde).unwrap();
                let scale = 1.0 + v.norm().max(tilde.values().norm());
                assert!(res <= 1e-8 * scale, "{} baseline k={k}: {res:e}", inst.family());
                v = correct(&v, &solver.lift(&tilde), &m).unwrap();
            }

            let mut v = solver.lift(&w0);
            let mut breve_prev = w0.clone();
            for k in 0..200 {
                let p = solver.predict_faster(&v, &breve_prev, schedule.tau(k)).unwrap();
                let res = inclusion_residual(&inst, solver.as_ref(), &v, &p.breve, &p.tilde).unwrap();
                let scale = 1.0 + v.norm().max(p.tilde.values().norm());
                assert!(res <= 1e-8 * scale, "{} faster k={k}: {res:e}", inst.family());
                v = correct(&v, &solver.lift(&p.tilde), &m).unwrap();
                breve_prev = p.breve;
            }
        }
    }
}

#[test]
fn saddle_point_is_fixed_in_both_modes() {
    for inst in quadratic_families(4) {
        let solver = inst.solver().unwrap();
        let ws = inst.w_star().unwrap();
        let v = solver.lift(ws);
        let tilde = solver.predict(&v).unwrap();
        assert!(tilde.values().max_abs_diff(ws.values()) < 1e-9, "{}", inst.family());
        let p = solver.predict_faster(&v, ws, 0.3).unwrap();
        assert!(p.breve.values().max_abs_diff(ws.values()) < 1e-9, "{}", inst.family());
        assert!(p.tilde.values().max_abs_diff(ws.values()) < 1e-9, "{}", inst.family());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `w̆ = τw̃ + (1−τ)w̆ᵏ⁻¹` block by block, including the multiplier, and
    /// `Lw̃` is the extrapolation of `Lw̆` and `Lw̆ᵏ⁻¹`.
    #[test]
    fn faster_predictions_are_consistent_extrapolations(seed in 0u64..1000, tau in 0.05f64..1.0, family in 0usize..3) {
        let inst = quadratic_families(1 + seed % 3).swap_remove(family);
        let solver = inst.solver().unwrap();
        let mut src = UniformSource::new(seed);
        let v = solver.lift(&random_point(&inst, &mut src));
        let prev = random_point(&inst, &mut src);
        let p = solver.predict_faster(&v, &prev, tau).unwrap();

        let mixed = BlockVector::lincomb(tau, &p.tilde, 1.0 - tau, &prev).unwrap();
        let scale = 1.0 + p.breve.values().norm_inf();
        prop_assert!(mixed.values().max_abs_diff(p.breve.values()) <= 1e-12 * scale);
        let again = extrapolate(&p.breve, &prev, tau).unwrap();
        prop_assert!(again.values().max_abs_diff(p.tilde.values()) <= 1e-10 * (1.0 + p.tilde.values().norm_inf()));

        let lifted = solver.lift(&p.tilde);
        let from_images = predcorr::framework::extrapolate_vector(&solver.lift(&p.breve), &solver.lift(&prev), tau).unwrap();
        prop_assert!(lifted.max_abs_diff(&from_images) <= 1e-10 * (1.0 + lifted.norm_inf()));
    }

    #[test]
    fn interior_parameters_certify(seed in 0u64..1000, a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let base = make_two_block_quadratic(seed, 2, 2, 3).unwrap();
        let InstanceSpec::TwoBlock(spec) = base.spec().clone() else { unreachable!() };
        // (r, s) with s ∈ (0, 1), r ∈ (−s, 1)
        let s = b;
        let r = -s + a * (1.0 + s);
        let two = predcorr::TwoBlockSpec { r, s, ..spec };
        prop_assume!(two.check_region().is_ok());
        let cert = certify(&two.correction_spec(), CERTIFY_TOL).unwrap();
        prop_assert!(cert.satisfied, "r={} s={} h={} g={}", r, s, cert.h_min_pivot, cert.g_min_pivot);

        let multi = make_multiblock_quadratic(seed, &[1, 2], 2).unwrap();
        let InstanceSpec::MultiBlock(spec) = multi.spec().clone() else { unreachable!() };
        let spec = predcorr::MultiBlockSpec { alpha: a, ..spec };
        prop_assert!(certify(&spec.correction_spec(), CERTIFY_TOL).unwrap().satisfied, "alpha={}", a);

        let game = matching_pennies();
        let InstanceSpec::Saddle(spec) = game.spec().clone() else { unreachable!() };
        let alpha = a;
        let spec = predcorr::SaddleSpec { alpha, ..spec };
        let threshold = spec.step_threshold();
        let step = (threshold * (1.0 + 0.01 + b)).sqrt();
        let spec = predcorr::SaddleSpec { r: step, s: step, ..spec };
        prop_assert!(certify(&spec.correction_spec(), CERTIFY_TOL).unwrap().satisfied, "alpha={} rs/threshold={}", alpha, 1.01 + b);
    }
}

#[test]
fn certificate_is_deterministic_and_reconstructs_q() {
    for inst in quadratic_families(2).into_iter().chain([matching_pennies()]) {
        let solver = inst.solver().unwrap();
        let spec = solver.correction();
        let a = certify(spec, CERTIFY_TOL).unwrap();
        let b = certify(spec, CERTIFY_TOL).unwrap();
        assert_eq!(a, b);
        let hm = a.h.matmul(spec.m());
        let bound = 1e-8 * (1.0 + spec.q().max_abs());
        assert!(hm.max_abs_diff(spec.q()) <= bound, "{}", inst.family());
    }
}

fn traces(inst: &VariationalInstance, budget: usize) -> Vec<predcorr::IterationTrace> {
    let solver = inst.solver().unwrap();
    let cert = certify(solver.correction(), CERTIFY_TOL).unwrap();
    [Mode::Baseline, Mode::Faster]
        .into_iter()
        .map(|mode| run(solver.as_ref(), inst, &cert, &RunOptions::new(mode, budget)).unwrap())
        .collect()
}

#[test]
fn lyapunov_and_ergodic_bounds_on_every_family() {
    for inst in quadratic_families(5) {
        let [baseline, faster]: [_; 2] = traces(&inst, 600).try_into().unwrap();
        let d0 = baseline.initial_dist_h.unwrap();
        for rec in &baseline.records {
            let bound = d0 / (2.0 * (rec.k + 1) as f64);
            assert!(rec.gap.unwrap() <= bound + 1e-9, "{} k={}", inst.family(), rec.k);
        }
        let values: Vec<f64> = faster.records.iter().map(|r| r.lyapunov.unwrap()).collect();
        let slack = 1e-9 * (1.0 + values[0]);
        for (k, pair) in values.windows(2).enumerate() {
            assert!(pair[1] <= pair[0] + slack, "{} k={}: {} -> {}", inst.family(), k + 1, pair[0], pair[1]);
        }
    }
}

#[test]
fn gap_is_nonnegative_along_traces() {
    for seed in [6, 7] {
        for inst in quadratic_families(seed) {
            for trace in traces(&inst, 300) {
                for rec in &trace.records {
                    assert!(
                        rec.gap.unwrap() >= -1e-10,
                        "{} {} k={}: {}",
                        inst.family(),
                        trace.mode,
                        rec.k,
                        rec.gap.unwrap()
                    );
                }
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let inst = make_multiblock_quadratic(8, &[2, 2], 3).unwrap();
    let a = traces(&inst, 100);
    let b = traces(&inst, 100);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.records, y.records);
        assert_eq!(x.final_state, y.final_state);
    }
}

#[test]
fn exterior_point_fails_per_family() {
    let base = make_two_block_quadratic(9, 2, 2, 3).unwrap();
    let InstanceSpec::TwoBlock(spec) = base.spec().clone() else { unreachable!() };
    let two = predcorr::TwoBlockSpec { r: 1.5, s: 0.5, ..spec };
    assert!(!certify(&two.correction_spec(), CERTIFY_TOL).unwrap().satisfied);

    let multi = make_multiblock_quadratic(9, &[1, 2], 2).unwrap();
    let InstanceSpec::MultiBlock(spec) = multi.spec().clone() else { unreachable!() };
    let spec = predcorr::MultiBlockSpec { alpha: 1.5, ..spec };
    assert!(!certify(&spec.correction_spec(), CERTIFY_TOL).unwrap().satisfied);

    let game = matching_pennies();
    let InstanceSpec::Saddle(spec) = game.spec().clone() else { unreachable!() };
    let step = (0.5 * spec.step_threshold()).sqrt();
    let spec = predcorr::SaddleSpec { r: step, s: step, ..spec };
    assert!(!certify(&spec.correction_spec(), CERTIFY_TOL).unwrap().satisfied);
}
