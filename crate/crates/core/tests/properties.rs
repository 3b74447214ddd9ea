use wmac_core::dynamics::{apply_jump, coriolis_matrix, mass_matrix, ArmParams, JumpEvent, MassTransform};
use wmac_core::metrics::{reduction_percent, srmse, summarize};
use wmac_core::scenario::{preset, ControllerKind};
use wmac_core::simulation::{run_scenario, SimConfig};

fn short(kind: ControllerKind, duration: f64) -> (wmac_core::scenario::ScenarioSpec, SimConfig) {
    let spec = preset(1).unwrap().with_controller(kind).truncated(duration);
    let sim = SimConfig::from_scenario(&spec);
    (spec, sim)
}

#[test]
fn srmse_is_robust_to_decimation() {
    let (spec, sim) = short(ControllerKind::MannProposed, 25.0);
    let run = run_scenario(&spec, &sim).unwrap();
    let coarse: Vec<_> = run.trace.iter().step_by(10).cloned().collect();
    for joint in 0..2 {
        let fine = srmse(&run.trace, joint, 0.0).unwrap();
        let thin = srmse(&coarse, joint, 0.0).unwrap();
        assert!((fine - thin).abs() <= 0.02 * fine, "joint {joint}: {fine} vs {thin}");
    }
}

#[test]
fn halving_the_step_barely_moves_the_error() {
    let (spec, sim) = short(ControllerKind::MannProposed, 20.0);
    let base = run_scenario(&spec, &sim).unwrap().summary;
    let fine_sim = SimConfig {
        dt: sim.dt / 2.0,
        sample_every: 2 * sim.sample_every,
        ..sim
    };
    let fine = run_scenario(&spec, &fine_sim).unwrap().summary;
    for joint in 0..2 {
        let (a, b) = (base.srmse[joint], fine.srmse[joint]);
        assert!((a - b).abs() <= 0.02 * a, "joint {joint}: {a} vs {b}");
    }
}

#[test]
fn runs_are_deterministic_per_seed() {
    let (mut spec, _) = short(ControllerKind::Nn, 5.0);
    let sim = SimConfig::from_scenario(&spec);
    let a = run_scenario(&spec, &sim).unwrap();
    let b = run_scenario(&spec, &sim).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.trace, b.trace);
    spec.seed += 1;
    let c = run_scenario(&spec, &SimConfig::from_scenario(&spec)).unwrap();
    assert_ne!(a.summary.srmse, c.summary.srmse);
}

#[test]
fn summary_matches_recomputation_from_trace() {
    let (spec, sim) = short(ControllerKind::MannHard, 30.0);
    let run = run_scenario(&spec, &sim).unwrap();
    assert_eq!(summarize(&run.trace, &run.jump_times).unwrap(), run.summary);
    assert_eq!(run.jump_times, [5.0, 25.0]);
}

#[test]
fn mass_jump_and_its_inverse_cancel() {
    let arm = ArmParams::new([1.3, 0.7], [1.0, 0.8]).unwrap();
    let there = apply_jump(
        &arm,
        &JumpEvent {
            time: 1.0,
            transform: MassTransform::Scale { factor: 2.5 },
        },
    )
    .unwrap();
    let back = apply_jump(
        &there,
        &JumpEvent {
            time: 2.0,
            transform: MassTransform::Scale { factor: 0.4 },
        },
    )
    .unwrap();
    for (a, b) in arm.masses().iter().zip(back.masses()) {
        assert!((a - b).abs() < 1e-12);
    }
    let up = MassTransform::SquaredIncrement { delta: [0.5, -0.2] };
    let down = MassTransform::SquaredIncrement { delta: [-0.5, 0.2] };
    let there = apply_jump(
        &arm,
        &JumpEvent {
            time: 1.0,
            transform: up,
        },
    )
    .unwrap();
    let back = apply_jump(
        &there,
        &JumpEvent {
            time: 2.0,
            transform: down,
        },
    )
    .unwrap();
    for (a, b) in arm.masses().iter().zip(back.masses()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn mass_matrix_derivative_minus_twice_coriolis_is_skew() {
    let arm = ArmParams::new([2.0, 0.9], [1.0, 1.0]).unwrap();
    let h = 1e-6;
    for (x, xdot) in [
        ([0.3, -1.2], [0.7, 2.1]),
        ([2.0, 0.4], [-1.5, 0.2]),
        ([-0.8, 3.0], [0.0, -0.9]),
    ] {
        let ahead = mass_matrix(&arm, &[x[0] + h * xdot[0], x[1] + h * xdot[1]]);
        let behind = mass_matrix(&arm, &[x[0] - h * xdot[0], x[1] - h * xdot[1]]);
        let c = coriolis_matrix(&arm, &x, &xdot);
        let s = |i: usize, j: usize| (ahead[i][j] - behind[i][j]) / (2.0 * h) - 2.0 * c[i][j];
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((s(i, j) + s(j, i)).abs() < 1e-6, "{x:?} {xdot:?} ({i},{j})");
        }
    }
}

#[test]
fn reduction_is_zero_for_equal_errors_and_signed_otherwise() {
    assert_eq!(reduction_percent(4.0, 4.0), 0.0);
    assert_eq!(reduction_percent(4.0, 3.0), 25.0);
    assert!(reduction_percent(3.0, 4.0) < 0.0);
}
