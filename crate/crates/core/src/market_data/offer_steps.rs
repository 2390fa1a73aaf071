//! Stepwise offers from cumulative production-cost curves.

use serde::{Deserialize, Serialize};

use super::OfferStep;
use crate::error::{Error, Result};

/// Cumulative production cost at an output level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub mw: f64,
    pub cost: f64,
}

/// Which rule assigned the cost below the minimum output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivationRule {
    /// `p_min == p_max`: the whole cost is variable, no no-load cost.
    BlockLoaded,
    /// `[0, p_min]` priced at the first marginal step, remainder is no-load cost.
    FirstStepBelowMin,
    /// The first-step rule gave a negative no-load cost; `[0, p_min]` is
    /// priced at the average cost of producing `p_min`.
    AverageBelowMin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivedOffer {
    pub steps: Vec<OfferStep>,
    pub no_load_cost: f64,
    pub rule: DerivationRule,
}

/// Convert a cumulative cost curve into marginal offer steps and a no-load
/// cost. `points[0]` is the minimum output and its cumulative cost; later
/// points are step boundaries with strictly increasing output.
pub fn derive_offer_steps(points: &[CostPoint]) -> Result<DerivedOffer> {
    let first = points
        .first()
        .ok_or_else(|| Error::Import("cumulative cost curve is empty".into()))?;
    if points.iter().any(|p| !p.mw.is_finite() || !p.cost.is_finite()) {
        return Err(Error::Import("cumulative cost curve has non-finite values".into()));
    }
    if first.mw < 0.0 || points.windows(2).any(|w| w[1].mw <= w[0].mw) {
        return Err(Error::Import(
            "cumulative cost breakpoints must start at p_min >= 0 and strictly increase".into(),
        ));
    }
    let p_min = first.mw;

    if points.len() == 1 {
        if p_min <= 0.0 {
            return Err(Error::Import("unit has zero capacity".into()));
        }
        return Ok(DerivedOffer {
            steps: vec![OfferStep::new(p_min, first.cost / p_min)],
            no_load_cost: 0.0,
            rule: DerivationRule::BlockLoaded,
        });
    }

    let marginal: Vec<OfferStep> = points
        .windows(2)
        .map(|w| OfferStep::new(w[1].mw - w[0].mw, (w[1].cost - w[0].cost) / (w[1].mw - w[0].mw)))
        .collect();

    let no_load = first.cost - marginal[0].cost * p_min;
    if no_load >= 0.0 {
        let mut steps = marginal;
        steps[0].cap += p_min;
        return Ok(DerivedOffer {
            steps,
            no_load_cost: no_load,
            rule: DerivationRule::FirstStepBelowMin,
        });
    }

    let mut steps = Vec::with_capacity(marginal.len() + 1);
    if p_min > 0.0 {
        steps.push(OfferStep::new(p_min, first.cost / p_min));
    }
    steps.extend(marginal);
    Ok(DerivedOffer {
        steps,
        no_load_cost: 0.0,
        rule: DerivationRule::AverageBelowMin,
    })
}
