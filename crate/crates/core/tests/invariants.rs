//! Cross-module invariants: solver/engine agreement, formulation
//! equivalences, simulator feasibility rules, and the threshold-estimation
//! identities.

use ntp_core::bump::evaluate_schedule;
use ntp_core::milp::{
    second_stage_cost, solve_dntps_exact, solve_ntp2_exact, solve_ntp_exact, CapMode, ScenarioSet,
    SolveLimits, SolveStatus,
};
use ntp_core::policy::{estimate_thresholds, tune_naw, Aggregator, PolicySpec};
use ntp_core::prefs::{PreferenceKind, PreferenceSpec};
use ntp_core::reduce::nbs_makespan;
use ntp_core::sim::{
    sample_scenarios, simulate, simulate_full, DelaySource, SyntheticDelays,
};
use ntp_core::{
    Delay, DelayScenario, Instance, NotificationSchedule, PreferenceProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scenario(rng: &mut ChaCha8Rng, m: usize, h: u32, p_nr: f64) -> DelayScenario {
    DelayScenario::new(
        (0..m)
            .map(|_| {
                if rng.gen_bool(p_nr) {
                    Delay::NonResponder
                } else {
                    Delay::Finite(rng.gen_range(1..=h))
                }
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn solver_objective_always_matches_engine_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let m = rng.gen_range(1..=7);
        let h: u32 = rng.gen_range(2..=15);
        let delays: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=h)).collect();
        let inst = Instance::new(m, m, h, h, m as u32, 0).unwrap();
        let scen = DelayScenario::from_finite(&delays).unwrap();
        let res = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        let schedule = res.schedule.unwrap();
        let (recount, _) = ntp_core::bump::potential_bumps(&schedule, &scen, &inst, false);
        assert_eq!(recount as f64, res.objective, "r={delays:?} H={h}");
        assert_eq!(res.bump_pairs.len() as u64, recount);
    }
}

#[test]
fn optimum_is_zero_exactly_when_the_no_bump_schedule_fits() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..400 {
        let m = rng.gen_range(1..=6);
        let delays: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=6)).collect();
        let scen = DelayScenario::from_finite(&delays).unwrap();
        let c0 = nbs_makespan(&scen);
        let h = rng.gen_range(*delays.iter().max().unwrap()..=c0 + 2);
        let inst = Instance::new(m, m, h, h, m as u32, 0).unwrap();
        let res = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
        assert_eq!(
            res.objective == 0.0,
            h >= c0,
            "r={delays:?} H={h} C0={c0} optimum={}",
            res.objective
        );
    }
}

#[test]
fn vacancy_priced_model_collapses_onto_pure_bumps_when_everyone_fits() {
    // D = H, G > M^2 and all delays within the horizon: the vacancy-priced
    // optimum equals the plain bump minimum. The cap stays slack (W = M)
    // where the strengthening rows are optimum-preserving.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let m = rng.gen_range(1..=6);
        let h: u32 = rng.gen_range(2..=10);
        let delays: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=h)).collect();
        let inst = Instance::new(m, m, h, h, m as u32, (m * m + 1) as u64).unwrap();
        let scen = DelayScenario::from_finite(&delays).unwrap();
        let ntp = solve_ntp_exact(&inst, &scen, &SolveLimits::default()).unwrap();
        let ntp2 = solve_ntp2_exact(&inst, &scen, &SolveLimits::default());
        assert_eq!(ntp.objective, ntp2.objective, "r={delays:?} H={h}");
        assert_eq!(ntp2.vacancies, 0);
    }
}

#[test]
fn recourse_cost_is_engine_accounting_for_any_fixed_first_stage() {
    // With L = M the stochastic model's per-scenario recourse is exactly
    // the cutoff-gated potential-bump count plus priced vacancies.
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..400 {
        let m = rng.gen_range(1..=4);
        let h: u32 = rng.gen_range(3..=9);
        let d = rng.gen_range(1..=h);
        let inst = Instance::new(m, m, h, d, m as u32, 200).unwrap();
        let scen = random_scenario(&mut rng, m, h + 2, 0.3);
        let mut s = vec![0u32; m];
        for i in 0..m {
            let lo = if i == 0 { 0 } else { s[i - 1] };
            s[i] = rng.gen_range(lo..=h);
        }
        let schedule = NotificationSchedule::new(s).unwrap();
        let report = evaluate_schedule(&schedule, &scen, &inst, None);
        assert_eq!(
            second_stage_cost(&inst, &schedule, &scen),
            report.cost,
            "schedule {:?}",
            schedule.notify_times()
        );
    }
}

#[test]
fn stochastic_optimum_dominates_single_scenario_replays() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..40 {
        let m = rng.gen_range(2..=4);
        let h: u32 = rng.gen_range(4..=8);
        let inst = Instance::new(m, m, h, h, m as u32, 50).unwrap();
        let scenarios: Vec<DelayScenario> = (0..rng.gen_range(2..=3))
            .map(|_| random_scenario(&mut rng, m, h + 2, 0.2))
            .collect();
        let set = ScenarioSet::new(scenarios.clone(), 0).unwrap();
        let stochastic =
            solve_dntps_exact(&inst, &set, CapMode::Inequality, &SolveLimits::default()).unwrap();

        // Plugging any one scenario's offline optimum into all scenarios
        // can never beat the stochastic optimum.
        for scen in &scenarios {
            let offline = solve_ntp2_exact(&inst, scen, &SolveLimits::default());
            let Some(schedule) = offline.schedule else {
                continue;
            };
            let replay_total: u64 = scenarios
                .iter()
                .map(|w| second_stage_cost(&inst, &schedule, w))
                .sum();
            let replay_mean = replay_total as f64 / scenarios.len() as f64;
            assert!(
                stochastic.objective <= replay_mean + 1e-9,
                "stochastic {} vs replay {}",
                stochastic.objective,
                replay_mean
            );
        }
    }
}

#[test]
fn first_stage_of_a_degenerate_stochastic_model_replays_the_offline_solution() {
    let inst = Instance::new(4, 4, 9, 9, 4, 200).unwrap();
    let scen = DelayScenario::from_finite(&[4, 2, 5, 1]).unwrap();
    let set = ScenarioSet::new(vec![scen.clone()], 0).unwrap();
    let solved =
        solve_dntps_exact(&inst, &set, CapMode::Inequality, &SolveLimits::default()).unwrap();
    let policy = ntp_core::milp::extract_first_stage(&solved.schedule);
    let prefs = PreferenceProfile::identical(4, 4);
    let out = simulate_full(&inst, &scen, &prefs, &policy);
    let induced: Vec<u32> = out.notify_times.iter().map(|t| t.unwrap()).collect();
    assert_eq!(induced, solved.schedule.notify_times());
    // and the offline cost agrees with what the stochastic model promised
    assert_eq!(
        solved.scenario_costs[0],
        second_stage_cost(&inst, &solved.schedule, &scen)
    );
}

#[test]
fn single_scenario_mean_thresholds_reproduce_that_scenarios_curve() {
    let inst = Instance::new(6, 6, 10, 10, 5, 200).unwrap();
    let scen = DelayScenario::from_finite(&[4, 1, 5, 3, 2, 5]).unwrap();
    let set = ScenarioSet::new(vec![scen.clone()], 0).unwrap();
    let table =
        estimate_thresholds(&inst, &set, Aggregator::Mean, &SolveLimits::default()).unwrap();
    assert_eq!(table.trained_on, 1);
    assert_eq!(table.dropped, 0);

    let offline = solve_ntp2_exact(&inst, &scen, &SolveLimits::default());
    let schedule = offline.schedule.unwrap();
    let expected: Vec<f64> = (0..=10u32)
        .map(|k| {
            schedule
                .notify_times()
                .iter()
                .filter(|&&s| s <= k)
                .count() as f64
        })
        .collect();
    assert_eq!(table.targets(), expected.as_slice());
}

#[test]
fn simulator_honors_cap_seniority_and_full_occupancy_stop() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let m = rng.gen_range(2..=10);
        let l = rng.gen_range(1..=m);
        let h: u32 = rng.gen_range(3..=20);
        let w = rng.gen_range(1..=m as u32);
        let inst = Instance::new(m, l, h, h, w, 7).unwrap();
        let scen = random_scenario(&mut rng, m, h + 3, 0.3);
        let prefs = PreferenceProfile::identical(m, l);
        let policy = PolicySpec::NotifyAndWait {
            batch: rng.gen_range(1..=m as u32),
            wait: rng.gen_range(1..=5),
        };
        let out = simulate_full(&inst, &scen, &prefs, &policy);

        // never more than W notifications per epoch, never out of order
        let mut per_epoch = std::collections::HashMap::new();
        for t in out.notify_times.iter().flatten() {
            *per_epoch.entry(*t).or_insert(0u32) += 1;
        }
        assert!(per_epoch.values().all(|&n| n <= w));
        let times: Vec<_> = out.notify_times.iter().flatten().copied().collect();
        assert!(times.windows(2).all(|p| p[0] <= p[1]));
        let notified = times.len();
        assert!(out.notify_times[..notified].iter().all(|t| t.is_some()));

        // the accounting identity and the occupancy stop
        let r = &out.report;
        assert_eq!(r.cost, inst.vacancy_penalty * r.vacancies + r.bumps());
        if r.vacancies == 0 {
            // once all shifts fill, nobody new is notified: everyone
            // notified responds no later than the fill epoch or was
            // notified before it
            if let ntp_core::Makespan::Finite(fill) = r.makespan {
                assert!(times.iter().all(|&t| t <= fill));
            }
        }
    }
}

#[test]
fn simulated_realized_bumps_equal_potential_under_identical_prefs_and_full_cutoff() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..300 {
        let m = rng.gen_range(2..=8);
        let h: u32 = rng.gen_range(4..=20);
        let inst = Instance::new(m, m, h, h, m as u32, 3).unwrap();
        let scen = random_scenario(&mut rng, m, h + 4, 0.25);
        let prefs = PreferenceProfile::identical(m, m);
        let policy = PolicySpec::NotifyAndWait {
            batch: rng.gen_range(1..=3),
            wait: rng.gen_range(1..=4),
        };
        let report = simulate(&inst, &scen, &prefs, &policy);
        assert_eq!(report.realized_bumps, Some(report.potential_bumps));
    }
}

#[test]
fn simultaneous_seniors_double_count_the_same_junior() {
    // The junior claims first; two seniors respond at the same later epoch
    // and are processed in seniority order, each displacing the junior once.
    let inst = Instance::new(3, 3, 10, 10, 3, 0).unwrap();
    let scen = DelayScenario::from_finite(&[3, 3, 1]).unwrap();
    let sched = NotificationSchedule::new(vec![0, 0, 0]).unwrap();
    let prefs = PreferenceProfile::identical(3, 3);
    let report = evaluate_schedule(&sched, &scen, &inst, Some(&prefs));
    assert_eq!(report.realized_bumps, Some(2));
    assert_eq!(report.potential_bumps, 2);
    assert_eq!(report.per_employee_bumps, vec![1, 1, 0]);
}

#[test]
fn exported_offline_models_round_trip_through_the_external_solver() {
    use ntp_core::milp::{build_ntp, build_ntp2, ExternalLpBackend, SolverBackend};
    let backend = ExternalLpBackend::default();
    assert!(
        backend.available(),
        "external MILP backend unavailable (python3 + scipy required)"
    );
    let inst = Instance::new(6, 6, 10, 10, 6, 200).unwrap();
    let scen = DelayScenario::from_finite(&[4, 1, 5, 3, 2, 5]).unwrap();
    let ntp = build_ntp(&inst, &scen).unwrap();
    let ntp2 = build_ntp2(&inst, &scen).unwrap();
    let solutions = backend.solve_batch(&[&ntp, &ntp2]).unwrap();
    assert!(solutions.iter().all(|s| s.is_optimal()));
    assert_eq!(solutions[0].objective.unwrap().round(), 1.0);
    assert_eq!(solutions[1].objective.unwrap().round(), 1.0);
}

#[test]
fn degenerate_naw_grid_returns_its_single_point() {
    let inst = Instance::new(4, 2, 10, 10, 4, 200).unwrap();
    let set = sample_scenarios(
        &DelaySource::Synthetic(SyntheticDelays {
            mean_minutes: 2.0,
            non_response_probability: 0.2,
        }),
        4,
        10,
        5,
    );
    let prefs = PreferenceSpec::new(PreferenceKind::FixedRanked, 5);
    let tuning = tune_naw(&inst, &set, &[(4, 1)], &prefs).unwrap();
    assert_eq!((tuning.batch, tuning.wait), (4, 1));
}

#[test]
fn identical_grid_points_break_ties_lexicographically() {
    // Every scenario is all-non-responders, so every parameter behaves
    // identically (all infeasible, same vacancies): the lexicographically
    // smallest pair wins.
    let inst = Instance::new(3, 3, 8, 8, 3, 200).unwrap();
    let scen = DelayScenario::new(vec![Delay::NonResponder; 3]).unwrap();
    let set = ScenarioSet::new(vec![scen; 4], 0).unwrap();
    let prefs = PreferenceSpec::new(PreferenceKind::FixedRanked, 5);
    let tuning = tune_naw(&inst, &set, &[(2, 3), (1, 5), (1, 2)], &prefs).unwrap();
    assert!(!tuning.feasible);
    assert_eq!((tuning.batch, tuning.wait), (1, 2));
}

#[test]
fn paper_scale_naw_tuning_meets_the_vacancy_budget() {
    // Half the pool never responds; a grid around the production
    // parameters still finds a point with mean vacancies within 0.3% of
    // L = 50, i.e. at most 0.15 shifts.
    let inst = Instance::new(150, 50, 360, 120, 5, 200).unwrap();
    let set = sample_scenarios(
        &DelaySource::Synthetic(SyntheticDelays {
            mean_minutes: 5.0,
            non_response_probability: 0.5,
        }),
        150,
        60,
        90,
    );
    let prefs = PreferenceSpec::new(PreferenceKind::FixedRanked, 90);
    let grid = [(2, 6), (3, 7), (4, 8), (5, 7)];
    let tuning = tune_naw(&inst, &set, &grid, &prefs).unwrap();
    assert!(tuning.feasible, "{tuning:?}");
    assert!(tuning.mean_vacancies <= 0.15, "{tuning:?}");
}
