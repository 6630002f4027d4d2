use proptest::prelude::*;

use uav_planner::config::RunConfig;
use uav_planner::expected_se::{se_avg_channel, se_lower_bound, SeModel};
use uav_planner::model::{los_probability, validate_design, EnvParams, Point, Scenario};
use uav_planner::optimizer::initialize;
use uav_planner::output::fmt9;
use uav_planner::sca::{r_hat, round_schedule, schedule_slack, sine_linearization, symmetric_nlos_sigmoid, LinkCoefficients};
use uav_planner::stats::GridSizes;

fn ground() -> impl Strategy<Value = Point> {
    (0.0..500.0, 0.0..500.0).prop_map(|(x, y)| Point::new(x, y, 0.0))
}

fn aloft(lo: f64, hi: f64) -> impl Strategy<Value = Point> {
    (0.0..500.0, 0.0..500.0, lo..hi).prop_map(|(x, y, z)| Point::new(x, y, z))
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        prop::collection::vec(ground(), 1..5),
        aloft(20.0, 180.0),
        aloft(20.0, 180.0),
        8usize..48,
        1.0..4.0f64,
        10.0..30.0f64,
        0.2..1.0f64,
    )
        .prop_map(|(gns, q_start, q_end, n_slots, delta_max, v_max, vz_frac)| Scenario {
            gns,
            q_start,
            q_end,
            h_min: 10.0,
            h_max: 200.0,
            v_max,
            v_z: v_max * vz_frac,
            n_slots,
            delta_max,
            delta_min: 1e-5,
        })
}

fn model() -> SeModel {
    let env = EnvParams::reference();
    SeModel::lower_bound(&GridSizes::uniform(4).build(&env).unwrap(), &env)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn initial_plan_satisfies_every_constraint(s in scenario()) {
        let d = s.q_end - s.q_start;
        let reach = s.n_slots as f64 * s.delta_max;
        prop_assume!(d.norm() <= reach * s.v_max && d.z.abs() <= reach * s.v_z);
        let (plan, _) = initialize(&s, &model(), 1.0).unwrap();
        prop_assert_eq!(plan.num_slots(), s.n_slots);
        let report = validate_design(&s, &plan, 1e-9).unwrap();
        prop_assert!(report.is_empty(), "{:?}", report);
    }

    #[test]
    fn lower_bound_never_exceeds_average_channel(q in aloft(10.0, 200.0), w in ground(), u in 2usize..24) {
        let env = EnvParams::reference();
        let grid = GridSizes::uniform(u).build(&env).unwrap();
        let lb = se_lower_bound(&q, &w, &grid, &env).unwrap();
        let ac = se_avg_channel(&q, &w, &env).unwrap();
        prop_assert!(lb.se_total <= ac.se_total + 1e-12);
        prop_assert!(lb.se_los <= ac.se_los + 1e-12 && lb.se_nlos <= ac.se_nlos + 1e-12);
        prop_assert!(lb.se_total >= 0.0);
    }

    #[test]
    fn linearized_rate_bound_under_estimates(
        q in aloft(10.0, 200.0),
        anchor in aloft(10.0, 200.0),
        w in ground(),
        theta_prev in 0.0..90.0f64,
        theta in 0.0..90.0f64,
    ) {
        let m = model();
        let c = LinkCoefficients::at_anchor(&m, &anchor, &w, theta_prev).unwrap();
        prop_assert!(c.r_hat_lb(&q, theta, &m.env) <= r_hat(&m, &q, &w, theta).unwrap() + 1e-9);
        let at_anchor = r_hat(&m, &anchor, &w, theta_prev).unwrap();
        prop_assert!((c.r_hat_lb(&anchor, theta_prev, &m.env) - at_anchor).abs() <= 1e-9 * at_anchor.max(1.0));
    }

    #[test]
    fn sine_expansion_over_estimates(theta in 0.0..90.0f64, anchor in 0.0..90.0f64) {
        prop_assert!(sine_linearization(theta, anchor) >= theta.to_radians().sin() - 1e-12);
    }

    #[test]
    fn los_probability_is_a_rising_sigmoid(a in 0.0..90.0f64, b in 0.0..90.0f64) {
        let env = EnvParams::reference();
        let (pa, pb) = (los_probability(a, &env), los_probability(b, &env));
        prop_assert!(pa > 0.0 && pa < 1.0);
        if a < b {
            prop_assert!(pa <= pb);
        }
        prop_assert!((1.0 - pa - symmetric_nlos_sigmoid(a, &env)).abs() <= 1e-12);
    }

    #[test]
    fn rounding_gives_a_binary_tdma_schedule(raw in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 6), 1..5)) {
        let k = raw.len() as f64;
        let relaxed: Vec<Vec<f64>> = raw.iter().map(|r| r.iter().map(|v| v / k).collect()).collect();
        let rounded = round_schedule(&relaxed).unwrap();
        for n in 0..6 {
            prop_assert!(rounded.iter().all(|r| r[n] == 0.0 || r[n] == 1.0));
            let used: f64 = rounded.iter().map(|r| r[n]).sum();
            prop_assert!(used <= 1.0);
            let max = relaxed.iter().map(|r| r[n]).fold(0.0, f64::max);
            prop_assert_eq!(used == 1.0, max >= 0.5);
        }
    }

    #[test]
    fn slack_is_zero_without_a_target(
        rates in prop::collection::vec(prop::collection::vec(0.0..10.0f64, 5), 1..4),
        slots in prop::collection::vec(0.1..2.0f64, 5),
    ) {
        let schedule = vec![vec![0.0; 5]; rates.len()];
        prop_assert_eq!(schedule_slack(&schedule, &rates, &slots, 0.0).unwrap(), 0.0);
        prop_assert!(schedule_slack(&schedule, &rates, &slots, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn fmt9_round_trips_to_nine_digits(v in prop::num::f64::NORMAL) {
        let s = fmt9(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs(), "{} -> {}", v, s);
        let digits = s.split(['e', 'E']).next().unwrap().chars().filter(char::is_ascii_digit).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 9, "{}", s);
    }

    #[test]
    fn config_survives_json(
        seed in any::<u64>(),
        n in 2usize..100_000,
        u in 1usize..100,
        k_db in -10.0..30.0f64,
        n_slots in 1usize..400,
    ) {
        let mut cfg = RunConfig::default();
        cfg.validation.seed = seed;
        cfg.validation.n_realizations = n;
        cfg.quadrature = GridSizes::uniform(u);
        cfg.environment.k_rician_db = k_db;
        cfg.scenario.n_slots = n_slots;
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
