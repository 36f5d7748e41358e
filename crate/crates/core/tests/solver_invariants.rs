use proptest::prelude::*;

use fracpk::pkpd::{reference_matrix, reference_schedule};
use fracpk::solver::{
    oracle_substitution_solve, solve_piecewise, state_at, uniform_grid, FractionalOrder,
    InfusionSchedule, LinearFracSystem, Trajectory,
};
use fracpk::{PsiFunction, SquareMatrix};

const HORIZON: f64 = 1.8397;

fn reference_system(alpha: f64, psi: PsiFunction) -> LinearFracSystem {
    LinearFracSystem::new(
        reference_matrix(),
        vec![1.0, 0.0, 0.0, 0.0],
        FractionalOrder::new(alpha).unwrap(),
        psi,
        0.0,
        vec![0.0; 4],
    )
    .unwrap()
}

fn max_abs_diff(a: &Trajectory, b: &Trajectory) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn zero_schedule_zero_state() {
    let sched = InfusionSchedule::new(vec![0.0, 0.5, HORIZON], vec![0.0, 0.0]).unwrap();
    let traj = solve_piecewise(
        &reference_system(0.9, PsiFunction::Identity),
        &sched,
        &uniform_grid(0.0, HORIZON, 50),
    )
    .unwrap();
    assert!(traj.states.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn shift_matches_identity() {
    let sched = reference_schedule();
    let grid = uniform_grid(0.0, HORIZON, 400);
    for alpha in [1.0, 0.95, 0.9, 0.85, 0.8, 0.5] {
        let id = solve_piecewise(
            &reference_system(alpha, PsiFunction::Identity),
            &sched,
            &grid,
        )
        .unwrap();
        for c in [0.2, 1.0, 7.5] {
            let sys = reference_system(alpha, PsiFunction::shift(c).unwrap());
            let sh = solve_piecewise(&sys, &sched, &grid).unwrap();
            assert!(max_abs_diff(&id, &sh) <= 1e-12, "alpha {alpha} shift {c}");
        }
    }
}

#[test]
fn doubling_rates_doubles_state() {
    let sched = reference_schedule();
    let doubled = sched.scaled(2.0).unwrap();
    let grid = uniform_grid(0.0, HORIZON, 100);
    for psi in [PsiFunction::Identity, PsiFunction::Sqrt] {
        let sys = reference_system(0.85, psi);
        let one = solve_piecewise(&sys, &sched, &grid).unwrap();
        let two = solve_piecewise(&sys, &doubled, &grid).unwrap();
        for (x, y) in one.states.iter().zip(&two.states) {
            for (p, q) in x.iter().zip(y) {
                assert!((2.0 * p - q).abs() <= 1e-12 * q.abs().max(1.0));
            }
        }
    }
}

#[test]
fn memory_is_not_reset_at_switch() {
    // The state at a time does not depend on which other grid points are requested.
    let sched = reference_schedule();
    for alpha in [0.9, 0.7] {
        let sys = reference_system(alpha, PsiFunction::Identity);
        let coarse = uniform_grid(0.0, HORIZON, 11);
        let mut fine = uniform_grid(0.0, HORIZON, 11);
        fine.extend([0.54, 0.5466, 0.5467, 0.5468, 0.56]);
        fine.sort_by(f64::total_cmp);
        let c = solve_piecewise(&sys, &sched, &coarse).unwrap();
        let f = solve_piecewise(&sys, &sched, &fine).unwrap();
        for (t, y) in c.times.iter().zip(&c.states) {
            let k = f.times.iter().position(|s| s == t).unwrap();
            for (p, q) in y.iter().zip(&f.states[k]) {
                assert!((p - q).abs() <= 1e-10);
            }
        }
        // Restarting at the switch with the switch state as a fresh initial
        // value is wrong for α < 1.
        let y_sw = state_at(&sys, &sched, 0.5467).unwrap();
        let restarted = LinearFracSystem::new(
            reference_matrix(),
            vec![1.0, 0.0, 0.0, 0.0],
            FractionalOrder::new(alpha).unwrap(),
            PsiFunction::Identity,
            0.5467,
            y_sw,
        )
        .unwrap();
        let tail = InfusionSchedule::new(vec![0.5467, HORIZON], vec![0.0]).unwrap();
        let anchored = state_at(&sys, &sched, HORIZON).unwrap();
        let naive = state_at(&restarted, &tail, HORIZON).unwrap();
        assert!((anchored[3] - naive[3]).abs() > 1e-3);
    }
}

#[test]
fn states_stay_nonnegative() {
    let sched = reference_schedule();
    let grid = uniform_grid(0.0, HORIZON, 400);
    for psi in [
        PsiFunction::Identity,
        PsiFunction::Sqrt,
        PsiFunction::power(2.0).unwrap(),
    ] {
        for alpha in [1.0, 0.95, 0.9, 0.85, 0.8] {
            let traj = solve_piecewise(&reference_system(alpha, psi), &sched, &grid).unwrap();
            let min = traj
                .states
                .iter()
                .flatten()
                .fold(f64::INFINITY, |m, v| m.min(*v));
            assert!(min >= -1e-9, "{psi} {alpha}: {min}");
        }
    }
}

#[test]
fn classical_semigroup() {
    // For α = 1 propagating to t1 and then restarting is exact.
    let sys = reference_system(1.0, PsiFunction::Identity);
    let sched = InfusionSchedule::constant(0.0, HORIZON, 50.0).unwrap();
    let y1 = state_at(&sys, &sched, 0.8).unwrap();
    let restarted = LinearFracSystem::new(
        reference_matrix(),
        vec![1.0, 0.0, 0.0, 0.0],
        FractionalOrder::new(1.0).unwrap(),
        PsiFunction::Identity,
        0.8,
        y1,
    )
    .unwrap();
    let tail = InfusionSchedule::constant(0.8, HORIZON, 50.0).unwrap();
    let direct = state_at(&sys, &sched, HORIZON).unwrap();
    let two_step = state_at(&restarted, &tail, HORIZON).unwrap();
    for (p, q) in direct.iter().zip(&two_step) {
        assert!((p - q).abs() <= 1e-12 * p.abs().max(1.0));
    }
}

#[test]
fn power_scale_equals_identity_in_transformed_time() {
    // ψ(t) = t² with breakpoints b is the identity problem with breakpoints b².
    let alpha = 0.85;
    let sched = reference_schedule();
    let mapped = InfusionSchedule::new(
        sched.breakpoints().iter().map(|b| b * b).collect(),
        sched.rates().to_vec(),
    )
    .unwrap();
    let sys_p = reference_system(alpha, PsiFunction::power(2.0).unwrap());
    let sys_i = reference_system(alpha, PsiFunction::Identity);
    let op = oracle_substitution_solve(&sys_p, &sched, 1000).unwrap();
    let oi = oracle_substitution_solve(&sys_i, &mapped, 1000).unwrap();
    for (x, y) in op.states.iter().zip(&oi.states) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() <= 1e-10 * q.abs().max(1.0));
        }
    }
    for &t in &[0.3, 1.0, HORIZON] {
        let a = state_at(&sys_p, &sched, t).unwrap();
        let b = state_at(&sys_i, &mapped, t * t).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_metzler_systems_match_oracle(
        off in prop::array::uniform6(0.0f64..0.5),
        loss in prop::array::uniform3(0.05f64..0.8),
        alpha in 0.7f64..1.0,
        rate in 1.0f64..50.0,
        switch in 0.2f64..1.2,
    ) {
        let mut a = SquareMatrix::zeros(3);
        let mut k = 0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    a[(i, j)] = off[k];
                    k += 1;
                }
            }
        }
        for j in 0..3 {
            let out: f64 = (0..3).filter(|&i| i != j).map(|i| a[(i, j)]).sum();
            a[(j, j)] = -(out + loss[j]);
        }
        let sys = LinearFracSystem::new(
            a,
            vec![1.0, 0.0, 0.0],
            FractionalOrder::new(alpha).unwrap(),
            PsiFunction::Identity,
            0.0,
            vec![0.0; 3],
        ).unwrap();
        let sched = InfusionSchedule::new(vec![0.0, switch, 1.5], vec![rate, 0.0]).unwrap();
        let oracle = oracle_substitution_solve(&sys, &sched, 1000).unwrap();
        let exact = solve_piecewise(&sys, &sched, &oracle.times).unwrap();
        let end = oracle.states.len() - 1;
        let scale = exact.states[end].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in oracle.states[end].iter().zip(&exact.states[end]) {
            prop_assert!((p - q).abs() <= 5e-3 * scale);
        }
        let min = exact.states.iter().flatten().fold(f64::INFINITY, |m, v| m.min(*v));
        prop_assert!(min >= -1e-9);
    }
}
