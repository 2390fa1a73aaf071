//! Settlement at true costs: short-run profit, make-whole payment,
//! preferred (price-taking) profit and lost opportunity cost.

mod preferred;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::GeneratorTech;
use crate::uc::{GenSchedule, SolverBackend};

pub use preferred::{preferred_dispatch, preferred_dispatch_milp, PreferredOptions, PreferredSchedule};

/// Absolute slack for the `loc0 >= 0` check, scaled up for large profits.
const LOC_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettlementRecord {
    pub gen_id: String,
    pub revenue: f64,
    pub true_cost: f64,
    pub profit0: f64,
    pub mwp: f64,
    pub profit: f64,
    pub preferred_profit: f64,
    pub loc0: f64,
    /// Perceived profit or loss: `mwp - loc0`.
    pub loc_display: f64,
    /// `loc0 + mwp`, kept for reference.
    pub loc_with_payment: f64,
}

/// Revenue and true cost of following `schedule`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfitBreakdown {
    pub revenue: f64,
    pub true_cost: f64,
}

impl ProfitBreakdown {
    pub fn profit(&self) -> f64 {
        self.revenue - self.true_cost
    }
}

pub fn evaluate_schedule(gen: &GeneratorTech, prices: &[f64], schedule: &GenSchedule) -> Result<ProfitBreakdown> {
    if schedule.p.len() != prices.len() {
        return Err(Error::Consistency(format!(
            "`{}`: schedule covers {} periods, prices cover {}",
            gen.id,
            schedule.p.len(),
            prices.len()
        )));
    }
    let cap = gen.p_max();
    let tol = 1e-6 * cap.max(1.0);
    let mut revenue = 0.0;
    let mut cost = 0.0;
    for (t, (&p, &lambda)) in schedule.p.iter().zip(prices).enumerate() {
        if !(-tol..=cap + tol).contains(&p) {
            return Err(Error::Consistency(format!(
                "`{}`: output {p} MW in period {} outside [0, {cap}]",
                gen.id,
                t + 1
            )));
        }
        let p = p.clamp(0.0, cap);
        revenue += lambda * p;
        cost += gen.variable_cost(p);
        if gen.is_thermal() {
            if schedule.u[t] {
                cost += gen.no_load_cost;
            }
            if schedule.z[t] {
                cost += gen.startup_cost;
            }
        }
    }
    Ok(ProfitBreakdown {
        revenue,
        true_cost: cost,
    })
}

/// Profit of following `schedule` at `prices`, at true costs.
pub fn short_run_profit(gen: &GeneratorTech, prices: &[f64], schedule: &GenSchedule) -> Result<f64> {
    evaluate_schedule(gen, prices, schedule).map(|b| b.profit())
}

pub fn make_whole_payment(profit0: f64, bid_was_economic: bool) -> f64 {
    if bid_was_economic {
        (-profit0).max(0.0)
    } else {
        0.0
    }
}

/// `(loc0, loc_display)` from the preferred and realized profits.
pub fn lost_opportunity(gen_id: &str, preferred_profit: f64, profit0: f64, mwp: f64) -> Result<(f64, f64)> {
    let loc0 = preferred_profit - profit0;
    let tol = LOC_TOLERANCE * preferred_profit.abs().max(profit0.abs()).max(1.0);
    if loc0 < -tol {
        return Err(Error::Consistency(format!(
            "`{gen_id}`: operator schedule earns {profit0} but the preferred schedule only {preferred_profit}"
        )));
    }
    let loc0 = loc0.max(0.0);
    Ok((loc0, mwp - loc0))
}

/// Full settlement of one generator.
pub fn settle(
    gen: &GeneratorTech,
    prices: &[f64],
    schedule: &GenSchedule,
    bid_was_economic: bool,
    backend: &dyn SolverBackend,
) -> Result<SettlementRecord> {
    let breakdown = evaluate_schedule(gen, prices, schedule)?;
    let profit0 = breakdown.profit();
    let mwp = make_whole_payment(profit0, bid_was_economic);
    let preferred = preferred_dispatch(gen, prices, PreferredOptions::default(), backend)?;
    let (loc0, loc_display) = lost_opportunity(&gen.id, preferred.profit, profit0, mwp)?;
    Ok(SettlementRecord {
        gen_id: gen.id.clone(),
        revenue: breakdown.revenue,
        true_cost: breakdown.true_cost,
        profit0,
        mwp,
        profit: profit0 + mwp,
        preferred_profit: preferred.profit,
        loc0,
        loc_display,
        loc_with_payment: loc0 + mwp,
    })
}
