//! Independent reference computations shared by the integration tests.
//! Nothing here goes through the linear model or a solver.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use ucmarket_core::market_data::{DemandSeries, GeneratorKind, GeneratorTech, MarketCase, OfferStep};

/// Small thermal fleet whose ramp limits never bind, so its least-cost
/// schedule can be found by enumerating commitments.
pub fn small_case(n_units: usize, horizon: usize, seed: u64) -> MarketCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let generators: Vec<GeneratorTech> = (0..n_units)
        .map(|i| {
            let p_max = rng.gen_range(2..=12) as f64 * 5.0;
            let p_min = match rng.gen_range(0..3) {
                0 => 0.0,
                1 => p_max,
                _ => (p_max * 0.4 / 5.0).round() * 5.0,
            };
            let first = (p_max / 2.0).round();
            let c0 = rng.gen_range(5..40) as f64;
            let steps = if p_min == p_max || rng.gen_bool(0.4) {
                vec![OfferStep::new(p_max, c0)]
            } else {
                vec![OfferStep::new(first, c0), OfferStep::new(p_max - first, c0 + rng.gen_range(1..10) as f64)]
            };
            GeneratorTech {
                id: format!("U{i}"),
                kind: GeneratorKind::Thermal,
                p_min,
                steps,
                startup_cost: rng.gen_range(0..4) as f64 * 50.0,
                no_load_cost: rng.gen_range(0..3) as f64 * 20.0,
                min_on: rng.gen_range(1..=3),
                min_off: rng.gen_range(1..=3),
                ramp_up: p_max,
                ramp_down: p_max,
                init_status: rng.gen_bool(0.5),
                vre_profile: None,
            }
        })
        .collect();
    let capacity: f64 = generators.iter().map(GeneratorTech::p_max).sum();
    let demand = (0..horizon)
        .map(|_| (capacity * rng.gen_range(0.2..0.8)).round())
        .collect();
    MarketCase {
        name: format!("small_{n_units}x{horizon}_{seed}"),
        voll: 1000.0,
        demand: DemandSeries::new(demand),
        generators,
    }
}

/// Cheapest way to produce `q` MW on `steps`.
pub fn step_cost(steps: &[OfferStep], q: f64) -> f64 {
    let mut sorted: Vec<OfferStep> = steps.to_vec();
    sorted.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let mut left = q;
    let mut cost = 0.0;
    for s in sorted {
        let take = left.min(s.cap).max(0.0);
        cost += take * s.cost;
        left -= take;
    }
    cost
}

/// Marginal pieces `(mw, cost)` a unit can add on top of `lo` MW, limited to `extra` MW.
fn pieces_above(steps: &[OfferStep], lo: f64, extra: f64) -> Vec<(f64, f64)> {
    let mut sorted: Vec<OfferStep> = steps.to_vec();
    sorted.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let mut skip = lo;
    let mut room = extra;
    let mut out = Vec::new();
    for s in sorted {
        let used = skip.min(s.cap);
        skip -= used;
        let take = (s.cap - used).min(room);
        if take > 0.0 {
            out.push((take, s.cost));
            room -= take;
        }
    }
    out
}

/// Least-cost dispatch of one period given per-unit output bounds.
/// `None` when committed minimums exceed demand.
fn dispatch_cost(case: &MarketCase, bounds: &[(f64, f64)], demand: f64) -> Option<f64> {
    let floor: f64 = bounds.iter().map(|b| b.0).sum();
    if floor > demand + 1e-9 {
        return None;
    }
    let mut cost: f64 = case
        .generators
        .iter()
        .zip(bounds)
        .map(|(g, &(lo, _))| step_cost(&g.steps, lo))
        .sum();
    let mut pieces: Vec<(f64, f64)> = case
        .generators
        .iter()
        .zip(bounds)
        .flat_map(|(g, &(lo, hi))| pieces_above(&g.steps, lo, hi - lo))
        .collect();
    pieces.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut left = demand - floor;
    for (mw, c) in pieces {
        if left <= 0.0 || c >= case.voll {
            break;
        }
        let take = mw.min(left);
        cost += take * c;
        left -= take;
    }
    Some(cost + left.max(0.0) * case.voll)
}

/// Commitment rules applied directly to a 0/1 pattern: startups hold for
/// `min_on` hours and shutdowns for `min_off` hours, both cut at the horizon.
fn respects_min_times(gen: &GeneratorTech, on: &[bool]) -> bool {
    let horizon = on.len();
    let prev = |t: usize| if t == 0 { gen.init_status } else { on[t - 1] };
    (0..horizon).all(|t| {
        let started = on[t] && !prev(t);
        let stopped = !on[t] && prev(t);
        let hold_on = (t..(t + gen.min_on as usize).min(horizon)).all(|k| on[k]);
        let hold_off = (t..(t + gen.min_off as usize).min(horizon)).all(|k| !on[k]);
        (!started || hold_on) && (!stopped || hold_off)
    })
}

/// Optimal offered cost over every commitment pattern of a case whose
/// ramps cannot bind. A unit starting after the first hour, or running
/// its last hour before a shutdown, is held at its minimum output.
pub fn enumerate_commitments(case: &MarketCase) -> f64 {
    let n = case.generators.len();
    let horizon = case.horizon();
    let bits = n * horizon;
    assert!(bits <= 20, "enumeration too large");
    let mut best = f64::INFINITY;
    'pattern: for mask in 0u64..(1u64 << bits) {
        let on = |g: usize, t: usize| mask >> (g * horizon + t) & 1 == 1;
        let mut fixed = 0.0;
        for (g, gen) in case.generators.iter().enumerate() {
            let pattern: Vec<bool> = (0..horizon).map(|t| on(g, t)).collect();
            if !respects_min_times(gen, &pattern) {
                continue 'pattern;
            }
            for t in 0..horizon {
                let prev = if t == 0 { gen.init_status } else { pattern[t - 1] };
                if pattern[t] {
                    fixed += gen.no_load_cost;
                    if !prev {
                        fixed += gen.startup_cost;
                    }
                }
            }
        }
        let mut total = fixed;
        for t in 0..horizon {
            let bounds: Vec<(f64, f64)> = case
                .generators
                .iter()
                .enumerate()
                .map(|(g, gen)| {
                    if !on(g, t) {
                        return (0.0, 0.0);
                    }
                    let starting = t > 0 && !on(g, t - 1);
                    let stopping = t + 1 < horizon && !on(g, t + 1);
                    let hi = if starting || stopping { gen.p_min } else { gen.p_max() };
                    (gen.p_min, hi)
                })
                .collect();
            match dispatch_cost(case, &bounds, case.demand.at(t)) {
                Some(c) => total += c,
                None => continue 'pattern,
            }
            if total >= best {
                continue 'pattern;
            }
        }
        best = best.min(total);
    }
    best
}

/// Single-period profit a price taker could earn at `price`, scanning the
/// step breakpoints between its minimum and maximum output.
pub fn single_period_best_profit(gen: &GeneratorTech, price: f64) -> f64 {
    let mut points = vec![gen.p_min, gen.p_max()];
    let mut acc = 0.0;
    for s in &gen.steps {
        acc += s.cap;
        if acc > gen.p_min && acc < gen.p_max() {
            points.push(acc);
        }
    }
    let fixed = gen.no_load_cost + if gen.init_status { 0.0 } else { gen.startup_cost };
    points
        .into_iter()
        .map(|q| price * q - step_cost(&gen.steps, q) - fixed)
        .fold(0.0, f64::max)
}

/// Single-period profit from producing `q` MW (committed when `on`).
pub fn single_period_profit(gen: &GeneratorTech, price: f64, on: bool, q: f64) -> f64 {
    if !on {
        return 0.0;
    }
    let fixed = gen.no_load_cost + if gen.init_status { 0.0 } else { gen.startup_cost };
    price * q - step_cost(&gen.steps, q) - fixed
}

#[derive(Deserialize)]
pub struct WelchCase {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub t: f64,
    pub p: f64,
}

#[derive(Deserialize)]
pub struct WelchReference {
    pub example: WelchCase,
    pub pairs: Vec<WelchCase>,
}

pub fn welch_reference() -> WelchReference {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/welch_reference.json");
    serde_json::from_str(&std::fs::read_to_string(path).expect("reference file")).expect("reference json")
}

/// Plain loop form of exponential smoothing.
pub fn smooth_by_loop(history: &[f64], eta: f64) -> f64 {
    let mut s = history[0];
    for &x in &history[1..] {
        s = eta * x + (1.0 - eta) * s;
    }
    s
}
