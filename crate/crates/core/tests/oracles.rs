mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use ucmarket_core::analytics::{welch_t, WelchOutcome};
use ucmarket_core::learning::{smooth, AgentState};
use ucmarket_core::market_data::{illustrative_case, IllustrativeScenario};
use ucmarket_core::pricing::{price, PricingModel};
use ucmarket_core::strategy::{economic_offer, StrategyTag};
use ucmarket_core::uc::{build_uc, solve_mip, HighsBackend, UcOptions, DEFAULT_REL_GAP};

use common::*;

fn mip_objective(case: &ucmarket_core::market_data::MarketCase) -> f64 {
    let offers: Vec<_> = case.generators.iter().map(|g| economic_offer(g, case.horizon())).collect();
    let problem = build_uc(case, &offers, &UcOptions::default()).unwrap();
    solve_mip(&problem, &HighsBackend::default(), DEFAULT_REL_GAP).unwrap().objective
}

#[test]
fn mip_matches_commitment_enumeration() {
    let shapes = [(12, 1), (6, 2), (4, 3), (5, 2), (3, 3)];
    for (k, &(n, horizon)) in shapes.iter().cycle().take(15).enumerate() {
        let case = small_case(n, horizon, 100 + k as u64);
        let oracle = enumerate_commitments(&case);
        let mip = mip_objective(&case);
        let tol = DEFAULT_REL_GAP * oracle.abs() + 1e-6;
        assert!(
            mip >= oracle - 1e-6 && mip <= oracle + tol,
            "{}: mip {mip} vs enumeration {oracle}",
            case.name
        );
    }
}

#[test]
fn enumeration_sees_fixed_costs() {
    // one 10 MW unit, off at start, startup 50, no-load 20, cost 5: meets 10 MW
    let mut case = small_case(1, 1, 0);
    let gen = &mut case.generators[0];
    gen.p_min = 0.0;
    gen.steps = vec![ucmarket_core::market_data::OfferStep::new(10.0, 5.0)];
    gen.startup_cost = 50.0;
    gen.no_load_cost = 20.0;
    gen.init_status = false;
    gen.ramp_up = 10.0;
    gen.ramp_down = 10.0;
    case.demand = ucmarket_core::market_data::DemandSeries::new(vec![10.0]);
    assert_abs_diff_eq!(enumerate_commitments(&case), 120.0, epsilon = 1e-9);
    assert_abs_diff_eq!(mip_objective(&case), 120.0, epsilon = 1e-6);
}

#[test]
fn achp_price_minimizes_total_lost_opportunity() {
    let case = illustrative_case(IllustrativeScenario::T1D1);
    let backend = HighsBackend::default();
    let offers: Vec<_> = case.generators.iter().map(|g| economic_offer(g, 1)).collect();
    let problem = build_uc(&case, &offers, &UcOptions::default()).unwrap();
    let mip = solve_mip(&problem, &backend, DEFAULT_REL_GAP).unwrap();
    let achp = price(PricingModel::Achp, &problem, &mip, &backend).unwrap().lambda[0];

    let total_loc = |lambda: f64| -> f64 {
        case.generators
            .iter()
            .enumerate()
            .map(|(g, gen)| {
                single_period_best_profit(gen, lambda)
                    - single_period_profit(gen, lambda, mip.is_on(g, 0), mip.dispatch[g][0])
            })
            .sum()
    };
    let grid: Vec<f64> = (0..=3000).map(|i| i as f64 * 0.01).collect();
    let best = grid.iter().map(|&l| total_loc(l)).fold(f64::INFINITY, f64::min);
    let minimizers: Vec<f64> = grid.iter().copied().filter(|&l| total_loc(l) <= best + 1e-9).collect();
    assert!(
        minimizers.iter().any(|&l| (l - achp).abs() <= 0.01),
        "aCHP {achp} vs grid minimizers {minimizers:?}"
    );
}

#[test]
fn welch_matches_reference_samples() {
    let reference = welch_reference();
    assert_eq!(reference.pairs.len(), 50);
    for case in std::iter::once(&reference.example).chain(&reference.pairs) {
        let WelchOutcome::Tested(w) = welch_t(&case.a, &case.b) else {
            panic!("reference pair should be testable");
        };
        assert_abs_diff_eq!(w.t, case.t, epsilon = 1e-6);
        assert_abs_diff_eq!(w.p, case.p, epsilon = 1e-6);
    }
}

proptest! {
    #[test]
    fn smooth_equals_loop(history in prop::collection::vec(-1e4f64..1e4, 1..200), eta in 0.0f64..=1.0) {
        prop_assert_eq!(smooth(&history, eta).unwrap().to_bits(), smooth_by_loop(&history, eta).to_bits());
    }

    #[test]
    fn agent_record_equals_loop(history in prop::collection::vec(-1e4f64..1e4, 1..100), eta in 0.01f64..=1.0) {
        let mut agent = AgentState::new(0, "G");
        for &x in &history {
            agent.record(StrategyTag::SelfCommit, x, &[x], eta);
        }
        let stats = agent.stats(StrategyTag::SelfCommit);
        let expected = smooth_by_loop(&history, eta);
        prop_assert_eq!(stats.smoothed_profit.unwrap().to_bits(), expected.to_bits());
        prop_assert_eq!(stats.smoothed_prices.as_ref().unwrap()[0].to_bits(), expected.to_bits());
    }
}
