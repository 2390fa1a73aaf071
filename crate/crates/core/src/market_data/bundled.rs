//! Built-in cases: the three-type illustrative system and a seeded
//! synthetic thermal fleet for larger property checks.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DemandSeries, GeneratorKind, GeneratorTech, MarketCase, OfferStep, DEFAULT_VOLL};

/// Demand perturbation above 225 MW for the single-period scenario.
pub const EPSILON_SINGLE_PERIOD: f64 = 0.001;
/// Demand perturbation above 225 MW for the ten-period scenarios.
pub const EPSILON_MULTI_PERIOD: f64 = 1.0;

/// Ten-hour fluctuating profile. Only a plot of this series exists, so the
/// values are a reconstruction. Every hour but the last sits a few MW above a
/// whole number of GEN1 blocks (at least three), so GEN3 is marginal and GEN2
/// runs flat out. In the last hour a fourth block is committed and GEN2 backs
/// down by 1 MW.
pub const DEMAND_PROFILE_D2: [f64; 10] = [
    229.0, 206.0, 203.0, 207.0, 228.0, 232.0, 228.0, 231.0, 227.0, 224.0,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IllustrativeScenario {
    /// One period, demand 225 + ε.
    T1D1,
    /// Ten periods of constant demand 225 + ε.
    T10D1,
    /// Ten periods of the fluctuating profile.
    T10D2,
}

impl IllustrativeScenario {
    pub const ALL: [IllustrativeScenario; 3] = [Self::T1D1, Self::T10D1, Self::T10D2];

    pub fn name(self) -> &'static str {
        match self {
            Self::T1D1 => "T1_D1",
            Self::T10D1 => "T10_D1",
            Self::T10D2 => "T10_D2",
        }
    }

    pub fn demand(self) -> Vec<f64> {
        match self {
            Self::T1D1 => vec![225.0 + EPSILON_SINGLE_PERIOD],
            Self::T10D1 => vec![225.0 + EPSILON_MULTI_PERIOD; 10],
            Self::T10D2 => DEMAND_PROFILE_D2.to_vec(),
        }
    }
}

impl fmt::Display for IllustrativeScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IllustrativeScenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scenario `{s}` (expected T1_D1, T10_D1 or T10_D2)"))
    }
}

fn illustrative_unit(kind: u8, index: usize, p_min: f64, cost: f64) -> GeneratorTech {
    GeneratorTech {
        id: format!("GEN{kind}_{index}"),
        kind: GeneratorKind::Thermal,
        p_min,
        steps: vec![OfferStep::new(25.0, cost)],
        startup_cost: 0.0,
        no_load_cost: 0.0,
        min_on: 1,
        min_off: 1,
        ramp_up: 25.0,
        ramp_down: 25.0,
        init_status: false,
        vre_profile: None,
    }
}

/// Five block-loaded 25 MW units at 15 $/MWh (GEN1), five flexible 25 MW
/// units at 10 $/MWh (GEN2), and five flexible 25 MW units at 25 $/MWh
/// (GEN3). No fixed costs, non-binding ramps.
pub fn illustrative_case(scenario: IllustrativeScenario) -> MarketCase {
    let mut generators = Vec::with_capacity(15);
    for (kind, p_min, cost) in [(1u8, 25.0, 15.0), (2, 0.0, 10.0), (3, 0.0, 25.0)] {
        for i in 1..=5 {
            generators.push(illustrative_unit(kind, i, p_min, cost));
        }
    }
    MarketCase {
        name: format!("illustrative_{}", scenario.name()),
        voll: DEFAULT_VOLL,
        demand: DemandSeries::new(scenario.demand()),
        generators,
    }
}

/// A deterministic synthetic fleet of `n_thermal` units plus one VRE unit.
///
/// Units mix block-loaded, inflexible baseload, and flexible peaking
/// characteristics with startup and no-load costs, minimum up/down times,
/// and ramp limits that can bind. Peak demand is about 70 % of thermal
/// capacity.
pub fn synthetic_case(n_thermal: usize, horizon: usize, seed: u64) -> MarketCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut generators = Vec::with_capacity(n_thermal + 1);
    for i in 0..n_thermal {
        let p_max: f64 = (rng.gen_range(40.0..400.0_f64) / 5.0).round() * 5.0;
        let block = rng.gen_bool(0.1);
        let p_min = if block {
            p_max
        } else {
            (p_max * rng.gen_range(0.2..0.6) / 5.0).round() * 5.0
        };
        let n_steps = if block { 1 } else { rng.gen_range(1..=4) };
        let base_cost: f64 = rng.gen_range(12.0..60.0);
        let mut steps = Vec::with_capacity(n_steps);
        let mut cost = base_cost;
        for s in 0..n_steps {
            let cap = if s + 1 == n_steps {
                p_max - steps.iter().map(|x: &OfferStep| x.cap).sum::<f64>()
            } else {
                (p_max / n_steps as f64).round()
            };
            steps.push(OfferStep::new(cap, (cost * 100.0).round() / 100.0));
            cost += rng.gen_range(0.5..8.0);
        }
        let flexibility: f64 = rng.gen_range(0.15..1.0);
        let ramp = ((p_max - p_min).max(5.0) * flexibility).round().max(5.0);
        generators.push(GeneratorTech {
            id: format!("TH{:03}", i + 1),
            kind: GeneratorKind::Thermal,
            p_min,
            steps,
            startup_cost: (rng.gen_range(0.0..12.0) * p_max).round(),
            no_load_cost: if block { 0.0 } else { (rng.gen_range(0.0..3.0) * p_max).round() },
            min_on: rng.gen_range(1..=8),
            min_off: rng.gen_range(1..=8),
            ramp_up: ramp,
            ramp_down: ramp,
            init_status: rng.gen_bool(0.5),
            vre_profile: None,
        });
    }
    let capacity: f64 = generators.iter().map(GeneratorTech::p_max).sum();
    let demand: Vec<f64> = (0..horizon)
        .map(|t| {
            let phase = (t as f64 / horizon.max(1) as f64) * std::f64::consts::TAU;
            let shape = 0.55 + 0.15 * (phase - 2.0).sin();
            (capacity * shape * 100.0).round() / 100.0
        })
        .collect();
    let peak = demand.iter().copied().fold(0.0, f64::max);
    let vre: Vec<f64> = (0..horizon)
        .map(|_| (peak * rng.gen_range(0.0..0.1) * 100.0).round() / 100.0)
        .collect();
    let vre_cap = vre.iter().copied().fold(0.0, f64::max).max(1.0);
    generators.push(GeneratorTech {
        id: "WIND".into(),
        kind: GeneratorKind::Vre,
        p_min: 0.0,
        steps: vec![OfferStep::new(vre_cap, 0.0)],
        startup_cost: 0.0,
        no_load_cost: 0.0,
        min_on: 1,
        min_off: 1,
        ramp_up: vre_cap,
        ramp_down: vre_cap,
        init_status: false,
        vre_profile: Some(vre),
    });
    MarketCase {
        name: format!("synthetic_{n_thermal}x{horizon}_{seed}"),
        voll: DEFAULT_VOLL,
        demand: DemandSeries::new(demand),
        generators,
    }
}
