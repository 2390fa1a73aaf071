//! Offer construction for the three bidding strategies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{GeneratorTech, OfferStep};
use crate::settlement::{preferred_dispatch, PreferredOptions};
use crate::uc::SolverBackend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyTag {
    Economic,
    SelfCommit,
    SelfSchedule,
}

impl StrategyTag {
    pub const ALL: [StrategyTag; 3] = [Self::Economic, Self::SelfCommit, Self::SelfSchedule];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Economic => "economic",
            Self::SelfCommit => "self_commit",
            Self::SelfSchedule => "self_schedule",
        }
    }

    pub fn is_strategic(self) -> bool {
        self != Self::Economic
    }
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

/// A chosen strategy with the periods it applies to and the desired output
/// in those periods.
#[derive(Clone, Debug, PartialEq)]
pub struct OfferStrategy {
    pub tag: StrategyTag,
    pub active_periods: Vec<usize>,
    /// Desired MW per period (only read in active periods).
    pub desired: Vec<f64>,
}

impl OfferStrategy {
    pub fn economic() -> Self {
        OfferStrategy {
            tag: StrategyTag::Economic,
            active_periods: Vec::new(),
            desired: Vec::new(),
        }
    }
}

/// What a generator offers for one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodOffer {
    pub startup_cost: f64,
    pub no_load_cost: f64,
    pub steps: Vec<OfferStep>,
}

impl PeriodOffer {
    fn truthful(gen: &GeneratorTech) -> Self {
        PeriodOffer {
            startup_cost: gen.startup_cost,
            no_load_cost: gen.no_load_cost,
            steps: gen.steps.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfferCurve {
    pub periods: Vec<PeriodOffer>,
    pub mwp_eligible: bool,
}

/// True costs in every period.
pub fn economic_offer(gen: &GeneratorTech, horizon: usize) -> OfferCurve {
    OfferCurve {
        periods: vec![PeriodOffer::truthful(gen); horizon],
        mwp_eligible: true,
    }
}

/// Offer the first `q` MW of the (listed) step stack at zero cost and the
/// rest at true cost. A step straddling `q` keeps its own cost above `q`.
fn zero_cost_prefix(steps: &[OfferStep], q: f64) -> Vec<OfferStep> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    if q > 0.0 {
        out.push(OfferStep::new(q, 0.0));
    }
    let mut top = 0.0;
    for step in steps {
        let bottom = top;
        top += step.cap;
        let above = top - bottom.max(q);
        if above > 1e-9 {
            out.push(OfferStep::new(above, step.cost));
        }
    }
    out
}

/// Build the offer a generator submits under `strategy`.
pub fn make_offer(gen: &GeneratorTech, strategy: &OfferStrategy, horizon: usize) -> Result<OfferCurve> {
    let mut offer = economic_offer(gen, horizon);
    if strategy.tag == StrategyTag::Economic {
        return Ok(offer);
    }
    offer.mwp_eligible = false;
    for &t in &strategy.active_periods {
        if t >= horizon {
            return Err(Error::Build(format!(
                "`{}`: active period {} outside horizon {horizon}",
                gen.id,
                t + 1
            )));
        }
        let free = match strategy.tag {
            StrategyTag::SelfCommit => gen.p_min,
            _ => strategy.desired.get(t).copied().unwrap_or(gen.p_min),
        };
        let free = free.clamp(0.0, gen.p_max());
        offer.periods[t] = PeriodOffer {
            startup_cost: 0.0,
            no_load_cost: 0.0,
            steps: zero_cost_prefix(&gen.steps, free),
        };
    }
    Ok(offer)
}

/// Active periods and desired quantities from the generator's own
/// profit-maximizing schedule against `expected_prices`.
pub fn choose_active_periods(
    gen: &GeneratorTech,
    tag: StrategyTag,
    expected_prices: &[f64],
    backend: &dyn SolverBackend,
) -> Result<OfferStrategy> {
    if tag == StrategyTag::Economic {
        return Ok(OfferStrategy::economic());
    }
    let preferred = preferred_dispatch(gen, expected_prices, PreferredOptions::prefer_output(), backend)?;
    let schedule = preferred.schedule;
    let active_periods = (0..expected_prices.len()).filter(|&t| schedule.u[t]).collect();
    Ok(OfferStrategy {
        tag,
        active_periods,
        desired: schedule.p,
    })
}
