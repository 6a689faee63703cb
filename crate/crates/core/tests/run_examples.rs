use predcorr::framework::{certify, run, Mode, RunOptions, CERTIFY_TOL};
use predcorr::problems::{game_duality_gap, make_two_block_l1, make_two_block_quadratic, matching_pennies};
use predcorr::{BlockVector, InstanceSpec, IterationTrace, VariationalInstance, Vector};

const BUDGET: usize = 2000;

fn run_from(inst: &VariationalInstance, mode: Mode, initial: Option<BlockVector>) -> IterationTrace {
    let solver = inst.solver().unwrap();
    let cert = certify(solver.correction(), CERTIFY_TOL).unwrap();
    let options = RunOptions { initial, ..RunOptions::new(mode, BUDGET) };
    let trace = run(solver.as_ref(), inst, &cert, &options).unwrap();
    assert!(trace.failure.is_none());
    trace
}

#[test]
fn pennies_converge_to_uniform_strategies() {
    let game = matching_pennies();
    let uniform = Vector::filled(4, 0.5);
    let InstanceSpec::Saddle(spec) = game.spec() else { unreachable!() };
    let a = spec.a.clone();
    let vertex = BlockVector::from_blocks(game.layout().clone(), &[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
    for start in [None, Some(vertex)] {
        for mode in [Mode::Baseline, Mode::Faster] {
            let trace = run_from(&game, mode, start.clone());
            assert!(trace.final_state.max_abs_diff(&uniform) <= 1e-5, "{mode}: {:?}", trace.final_state);
            // the reported point is an average (baseline) or w̆ (faster) and only settles like 1/t
            let point = trace.final_point.as_ref().unwrap();
            let gap = game_duality_gap(&a, &point.block_vector(0), &point.block_vector(1));
            assert!(gap <= 10.0 / BUDGET as f64, "{mode}: duality gap {gap:e}");
        }
    }
}

#[test]
fn faster_gap_respects_the_nonergodic_bound_at_the_budget() {
    for seed in 1..=5 {
        let inst = make_two_block_quadratic(seed, 3, 2, 4).unwrap();
        let trace = run_from(&inst, Mode::Faster, None);
        let v0 = trace.records[0].lyapunov.unwrap();
        let last = trace.last().unwrap();
        let gap = last.gap.unwrap();
        assert!(gap <= last.tau * v0 + 1e-9, "seed {seed}: {gap:e} > {:e}", last.tau * v0);
        assert!(gap <= 1e-4, "seed {seed}: {gap:e}");
        let early = trace.records[99].gap.unwrap();
        assert!(gap < early, "seed {seed}");
    }
}

#[test]
fn faster_l1_gap_is_small() {
    let inst = make_two_block_l1(7, 6, 0.5).unwrap();
    let trace = run_from(&inst, Mode::Faster, None);
    let gap = trace.last().unwrap().gap.unwrap();
    assert!(gap.abs() <= 1e-6, "{gap:e}");
}

#[test]
fn baseline_quadratic_reaches_the_oracle() {
    let inst = make_two_block_quadratic(1, 3, 2, 4).unwrap();
    let trace = run_from(&inst, Mode::Baseline, None);
    let ws = inst.w_star().unwrap();
    assert!(trace.final_state.max_abs_diff(ws.values()) <= 1e-8);
    assert!(trace.last().unwrap().gap.unwrap() <= 1e-6);
}
