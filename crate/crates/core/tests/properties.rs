mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucmarket_core::learning::{run_simulation, SimConfig};
use ucmarket_core::market_data::{
    illustrative_case, synthetic_case, GeneratorKind, GeneratorTech, IllustrativeScenario, MarketCase, OfferStep,
};
use ucmarket_core::pricing::{price, PricingModel};
use ucmarket_core::settlement::settle;
use ucmarket_core::strategy::{choose_active_periods, economic_offer, make_offer, OfferCurve, OfferStrategy, StrategyTag};
use ucmarket_core::uc::{
    build_uc, solve_fixed_lp, solve_mip, solve_relaxed_lp, HighsBackend, UcOptions, DEFAULT_REL_GAP,
};

use common::{small_case, step_cost};

fn economic(case: &MarketCase) -> Vec<OfferCurve> {
    case.generators.iter().map(|g| economic_offer(g, case.horizon())).collect()
}

fn gap_tol(x: f64) -> f64 {
    DEFAULT_REL_GAP * x.abs().max(1.0) + 1e-6
}

fn arb_generator() -> impl Strategy<Value = GeneratorTech> {
    (
        prop::collection::vec((1.0f64..50.0, 0.0f64..60.0), 1..4),
        0.0f64..=1.0,
        0.0f64..500.0,
        0.0f64..50.0,
    )
        .prop_map(|(steps, min_frac, startup, no_load)| {
            let steps: Vec<OfferStep> = steps.into_iter().map(|(cap, cost)| OfferStep::new(cap, cost)).collect();
            let p_max: f64 = steps.iter().map(|s| s.cap).sum();
            GeneratorTech {
                id: "G".into(),
                kind: GeneratorKind::Thermal,
                p_min: p_max * min_frac,
                steps,
                startup_cost: startup,
                no_load_cost: no_load,
                min_on: 1,
                min_off: 1,
                ramp_up: p_max,
                ramp_down: p_max,
                init_status: false,
                vre_profile: None,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn strategic_offers_never_exceed_true_costs(
        gen in arb_generator(),
        schedule_tag in any::<bool>(),
        desired_frac in 0.0f64..=1.0,
        q_frac in 0.0f64..=1.0,
    ) {
        let p_max = gen.p_max();
        let tag = if schedule_tag { StrategyTag::SelfSchedule } else { StrategyTag::SelfCommit };
        let desired = gen.p_min + (p_max - gen.p_min) * desired_frac;
        let strategy = OfferStrategy { tag, active_periods: vec![0, 2], desired: vec![desired; 3] };
        let offer = make_offer(&gen, &strategy, 3).unwrap();
        prop_assert!(!offer.mwp_eligible);
        let q = p_max * q_frac;
        for period in &offer.periods {
            let offered: f64 = period.steps.iter().map(|s| s.cap).sum();
            prop_assert!((offered - p_max).abs() < 1e-9, "capacity {offered} vs {p_max}");
            prop_assert!(period.startup_cost <= gen.startup_cost);
            prop_assert!(period.no_load_cost <= gen.no_load_cost);
            prop_assert!(step_cost(&period.steps, q) <= step_cost(&gen.steps, q) + 1e-9);
        }
        // inactive period stays truthful
        prop_assert_eq!(&offer.periods[1].steps, &gen.steps);
    }
}

#[test]
fn tightening_rows_keep_the_integer_optimum() {
    let backend = HighsBackend::default();
    for seed in 0..6 {
        let case = small_case(5, 3, 300 + seed);
        let offers = economic(&case);
        let solve = |tightening| {
            let opts = UcOptions { tightening, ramping: true };
            let problem = build_uc(&case, &offers, &opts).unwrap();
            let mip = solve_mip(&problem, &backend, DEFAULT_REL_GAP).unwrap().objective;
            let lp = solve_relaxed_lp(&problem, &backend).unwrap().objective;
            (mip, lp)
        };
        let (mip_tight, lp_tight) = solve(true);
        let (mip_loose, lp_loose) = solve(false);
        assert!((mip_tight - mip_loose).abs() <= gap_tol(mip_tight), "{}: {mip_tight} vs {mip_loose}", case.name);
        assert!(lp_tight >= lp_loose - 1e-6, "{}: tight LP {lp_tight} below loose {lp_loose}", case.name);
    }
}

#[test]
fn relaxation_bound_chain_holds() {
    let backend = HighsBackend::default();
    for seed in [1, 2] {
        let case = synthetic_case(12, 8, seed);
        let problem = build_uc(&case, &economic(&case), &UcOptions::default()).unwrap();
        let mip = solve_mip(&problem, &backend, DEFAULT_REL_GAP).unwrap();
        let relaxed = solve_relaxed_lp(&problem, &backend).unwrap().objective;
        let fixed = solve_fixed_lp(&problem, &backend, &mip).unwrap().objective;
        assert!(relaxed <= mip.objective + 1e-6, "{relaxed} > {}", mip.objective);
        assert!(mip.objective <= fixed + gap_tol(fixed), "{} > {fixed}", mip.objective);
    }
}

fn clear_random_profiles(case: &MarketCase, profiles: usize, max_price: f64, seed: u64) {
    let backend = HighsBackend::default();
    let horizon = case.horizon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..profiles {
        let offers: Vec<OfferCurve> = case
            .generators
            .iter()
            .map(|gen| {
                let tag = StrategyTag::ALL[rng.gen_range(0..3)];
                if !gen.is_thermal() || !tag.is_strategic() {
                    return economic_offer(gen, horizon);
                }
                let expected: Vec<f64> = (0..horizon).map(|_| rng.gen_range(0.0..max_price)).collect();
                let strategy = choose_active_periods(gen, tag, &expected, &backend).unwrap();
                make_offer(gen, &strategy, horizon).unwrap()
            })
            .collect();
        let problem = build_uc(case, &offers, &UcOptions::default()).unwrap();
        let mip = solve_mip(&problem, &backend, DEFAULT_REL_GAP).unwrap();
        for model in PricingModel::ALL {
            let prices = price(model, &problem, &mip, &backend).unwrap();
            assert!(prices.lambda.iter().all(|l| l.is_finite()));
        }
    }
}

#[test]
fn random_strategy_profiles_stay_feasible_on_illustrative_case() {
    clear_random_profiles(&illustrative_case(IllustrativeScenario::T1D1), 100, 40.0, 11);
}

#[test]
fn random_strategy_profiles_stay_feasible_on_synthetic_fleet() {
    clear_random_profiles(&synthetic_case(10, 6, 4), 20, 80.0, 12);
}

#[test]
fn settlement_identities_hold_every_iteration() {
    let case = illustrative_case(IllustrativeScenario::T1D1);
    let backend = HighsBackend::default();
    for model in PricingModel::ALL {
        let config = SimConfig {
            iterations: 150,
            seed: 9,
            pricing_model: model,
            ..SimConfig::default()
        };
        let log = run_simulation(&case, &config, &backend, None).unwrap();
        for r in &log.records {
            let energy: f64 = r.prices.iter().zip(case.demand.values()).map(|(l, d)| l * d).sum();
            let mwp: f64 = r.settlements.iter().map(|s| s.mwp).sum();
            let revenue: f64 = r.settlements.iter().map(|s| s.revenue).sum();
            let scale = r.consumer_cost.abs().max(1.0);
            assert!((r.consumer_cost - (energy + mwp)).abs() <= 1e-6 * scale);
            assert!((revenue - (energy - r.prices[0] * r.non_served)).abs() <= 1e-6 * scale);
            for s in &r.settlements {
                assert!(s.mwp >= 0.0 && s.loc0 >= -1e-6, "{}: mwp {} loc0 {}", s.gen_id, s.mwp, s.loc0);
            }
        }
    }
}

#[test]
fn settlement_matches_direct_profit_on_random_schedules() {
    let backend = HighsBackend::default();
    let case = small_case(4, 3, 77);
    let problem = build_uc(&case, &economic(&case), &UcOptions::default()).unwrap();
    let mip = solve_mip(&problem, &backend, DEFAULT_REL_GAP).unwrap();
    let prices = price(PricingModel::Fcp, &problem, &mip, &backend).unwrap().lambda;
    for (g, gen) in case.generators.iter().enumerate() {
        let schedule = mip.schedule(g);
        let record = settle(gen, &prices, &schedule, true, &backend).unwrap();
        let mut direct = 0.0;
        for t in 0..case.horizon() {
            if schedule.u[t] {
                direct += prices[t] * schedule.p[t] - step_cost(&gen.steps, schedule.p[t]) - gen.no_load_cost;
            }
            if schedule.z[t] {
                direct -= gen.startup_cost;
            }
        }
        assert!((record.profit0 - direct).abs() < 1e-6, "{}: {} vs {direct}", gen.id, record.profit0);
        assert!((record.profit - (direct + record.mwp)).abs() < 1e-6);
    }
}
