//! A single generator's profit-maximizing schedule at given prices, over its
//! own commitment constraints.
//!
//! When ramp limits cannot bind, the feasible set reduces to on/off
//! sequences with minimum up/down locks plus two output restrictions
//! (a startup hour after the first period, and the hour before a shutdown,
//! both run at minimum output). That case is solved exactly by dynamic
//! programming; everything else goes to the MILP.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::market_data::GeneratorTech;
use crate::strategy::economic_offer;
use crate::uc::{emit_generator, BlockSpec, GenSchedule, LinearModel, SolveMode, SolveRequest, SolverBackend, UcOptions};

use super::short_run_profit;

/// Per-MWh bonus used to break ties toward producing.
const OUTPUT_BONUS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PreferredOptions {
    /// Among (near-)equally profitable schedules, take the one with more output.
    pub prefer_output: bool,
    /// Skip the dynamic-programming fast path.
    pub force_milp: bool,
}

impl PreferredOptions {
    pub fn prefer_output() -> Self {
        PreferredOptions {
            prefer_output: true,
            force_milp: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreferredSchedule {
    /// True profit of `schedule` at the given prices.
    pub profit: f64,
    pub schedule: GenSchedule,
}

pub fn preferred_dispatch(
    gen: &GeneratorTech,
    prices: &[f64],
    opts: PreferredOptions,
    backend: &dyn SolverBackend,
) -> Result<PreferredSchedule> {
    if let Some(t) = prices.iter().position(|l| !l.is_finite()) {
        return Err(Error::Consistency(format!("price in period {} is not finite", t + 1)));
    }
    let schedule = if !gen.is_thermal() {
        renewable_schedule(gen, prices, opts.prefer_output)
    } else if gen.ramps_non_binding() && !opts.force_milp {
        dp_schedule(gen, prices, opts.prefer_output)
    } else {
        return preferred_dispatch_milp(gen, prices, opts, backend);
    };
    let profit = short_run_profit(gen, prices, &schedule)?;
    Ok(PreferredSchedule { profit, schedule })
}

fn renewable_schedule(gen: &GeneratorTech, prices: &[f64], prefer_output: bool) -> GenSchedule {
    let bonus = if prefer_output { OUTPUT_BONUS } else { 0.0 };
    let mut schedule = GenSchedule::off(prices.len());
    for (t, &lambda) in prices.iter().enumerate() {
        let (p, _) = best_in_range(gen, lambda, bonus, 0.0, gen.available(t));
        schedule.p[t] = p;
        schedule.u[t] = p > 0.0;
    }
    schedule
}

/// Best output in `[lo, hi]` at price `lambda` and its value, excluding
/// fixed costs. Ties go to the larger output.
fn best_in_range(gen: &GeneratorTech, lambda: f64, bonus: f64, lo: f64, hi: f64) -> (f64, f64) {
    let mut candidates = vec![lo, hi];
    let mut order: Vec<_> = gen.steps.iter().collect();
    order.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let mut cum = 0.0;
    for step in order {
        cum += step.cap;
        if cum > lo && cum < hi {
            candidates.push(cum);
        }
    }
    candidates.sort_by(f64::total_cmp);
    let mut best = (lo, f64::NEG_INFINITY);
    for p in candidates {
        let value = (lambda + bonus) * p - gen.variable_cost(p);
        if value >= best.1 {
            best = (p, value);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct State {
    on: bool,
    /// Further periods whose status is locked.
    lock: u32,
    started: bool,
}

fn dp_schedule(gen: &GeneratorTech, prices: &[f64], prefer_output: bool) -> GenSchedule {
    let horizon = prices.len();
    if horizon == 0 {
        return GenSchedule::off(0);
    }
    let bonus = if prefer_output { OUTPUT_BONUS } else { 0.0 };
    let free: Vec<(f64, f64)> = prices.iter().map(|&l| best_in_range(gen, l, bonus, gen.p_min, gen.p_max())).collect();
    let restricted: Vec<f64> = prices
        .iter()
        .map(|&l| (l + bonus) * gen.p_min - gen.variable_cost(gen.p_min))
        .collect();
    // Output and value of an on-period.
    let on_period = |t: usize, started: bool, stopping_next: bool| -> (f64, f64) {
        if (started && t >= 1) || stopping_next {
            (gen.p_min, restricted[t] - gen.no_load_cost)
        } else {
            (free[t].0, free[t].1 - gen.no_load_cost)
        }
    };
    let lock_after = |t: usize, switched_on: bool| -> u32 {
        if t + 2 > horizon {
            return 0;
        }
        let m = if switched_on { gen.min_on } else { gen.min_off };
        m.saturating_sub(1)
    };

    // layers[t]: state after deciding period t -> (value, predecessor)
    let mut layers: Vec<BTreeMap<State, (f64, Option<State>)>> = Vec::with_capacity(horizon);
    let mut first = BTreeMap::new();
    for on in [false, true] {
        let switched = on != gen.init_status;
        let state = State {
            on,
            lock: if switched { lock_after(0, on) } else { 0 },
            started: switched && on,
        };
        let value = if state.started { -gen.startup_cost } else { 0.0 };
        first.insert(state, (value, None));
    }
    layers.push(first);

    for t in 0..horizon - 1 {
        let mut next: BTreeMap<State, (f64, Option<State>)> = BTreeMap::new();
        for (&s, &(value, _)) in &layers[t] {
            for on in [false, true] {
                let switched = on != s.on;
                if switched && s.lock > 0 {
                    continue;
                }
                let credit = if s.on {
                    on_period(t, s.started, !on).1
                } else {
                    0.0
                };
                let startup = if switched && on { gen.startup_cost } else { 0.0 };
                let state = State {
                    on,
                    lock: if switched {
                        lock_after(t + 1, on)
                    } else {
                        s.lock.saturating_sub(1)
                    },
                    started: switched && on,
                };
                let total = value + credit - startup;
                match next.get(&state) {
                    Some(&(existing, _)) if existing >= total => {}
                    _ => {
                        next.insert(state, (total, Some(s)));
                    }
                }
            }
        }
        layers.push(next);
    }

    let last = horizon - 1;
    let (mut state, _) = layers[last]
        .iter()
        .map(|(&s, &(value, _))| {
            let credit = if s.on { on_period(last, s.started, false).1 } else { 0.0 };
            (s, value + credit)
        })
        .fold(None::<(State, f64)>, |best, (s, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((s, v)),
        })
        .expect("final layer is never empty");

    let mut path = vec![state; horizon];
    for t in (1..horizon).rev() {
        state = layers[t][&state].1.expect("predecessor recorded");
        path[t - 1] = state;
    }

    let mut schedule = GenSchedule::off(horizon);
    for t in 0..horizon {
        let s = path[t];
        if s.on {
            let stopping_next = t + 1 < horizon && !path[t + 1].on;
            schedule.p[t] = on_period(t, s.started, stopping_next).0;
            schedule.u[t] = true;
            schedule.z[t] = s.started;
        }
    }
    schedule
}

/// Preferred schedule from the single-unit MILP. Handles every constraint
/// the market model applies to the unit, ramps included.
pub fn preferred_dispatch_milp(
    gen: &GeneratorTech,
    prices: &[f64],
    opts: PreferredOptions,
    backend: &dyn SolverBackend,
) -> Result<PreferredSchedule> {
    let horizon = prices.len();
    let bonus = if opts.prefer_output { OUTPUT_BONUS } else { 0.0 };
    let offer = economic_offer(gen, horizon);
    let dispatch_cost: Vec<f64> = prices.iter().map(|l| -(l + bonus)).collect();
    let mut model = LinearModel {
        gen_ids: vec![gen.id.clone()],
        ..Default::default()
    };
    let spec = BlockSpec {
        gen,
        index: 0,
        periods: &offer.periods,
        dispatch_cost: Some(&dispatch_cost),
    };
    let vars = emit_generator(&mut model, &spec, &UcOptions::default());
    let request = SolveRequest {
        mode: SolveMode::Mip {
            rel_gap: 1e-9,
            abs_gap: 1e-8,
        },
        time_limit: None,
    };
    let raw = backend.solve(&model, &request)?;
    let mut schedule = GenSchedule::off(horizon);
    for t in 0..horizon {
        schedule.p[t] = raw.columns[vars.p[t]].max(0.0);
        if gen.is_thermal() {
            schedule.u[t] = raw.columns[vars.u[t]] > 0.5;
            schedule.z[t] = raw.columns[vars.z[t]] > 0.5;
            if !schedule.u[t] {
                schedule.p[t] = 0.0;
            }
        } else {
            schedule.u[t] = schedule.p[t] > 0.0;
        }
    }
    let profit = short_run_profit(gen, prices, &schedule)?;
    Ok(PreferredSchedule { profit, schedule })
}
