//! The iterated market game: α-greedy strategy choice, exponential
//! smoothing of payoffs and prices, and the simulation loop.

mod log;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::market_data::MarketCase;
use crate::pricing::{price, PricingModel};
use crate::settlement::{settle, SettlementRecord};
use crate::strategy::{choose_active_periods, economic_offer, make_offer, OfferCurve, StrategyTag};
use crate::uc::{build_uc, solve_mip, SolverBackend, UcOptions, DEFAULT_REL_GAP};

pub use log::{IterationLog, IterationRecord, IterationSink, JsonlSink};

/// Exponentially smoothed value of `history` (first value seeds the recursion).
pub fn smooth(history: &[f64], eta: f64) -> Result<f64> {
    let (&first, rest) = history
        .split_first()
        .ok_or_else(|| Error::Config("cannot smooth an empty history".into()))?;
    Ok(rest.iter().fold(first, |s, &x| eta * x + (1.0 - eta) * s))
}

fn smooth_step(prev: Option<f64>, x: f64, eta: f64) -> f64 {
    match prev {
        None => x,
        Some(s) => eta * x + (1.0 - eta) * s,
    }
}

/// What an agent remembers about one strategy.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StrategyStats {
    pub smoothed_profit: Option<f64>,
    pub smoothed_prices: Option<Vec<f64>>,
    pub count: usize,
    pub payoffs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub gen_index: usize,
    pub gen_id: String,
    /// Indexed by [`StrategyTag::index`].
    pub stats: [StrategyStats; 3],
}

impl AgentState {
    pub fn new(gen_index: usize, gen_id: impl Into<String>) -> Self {
        AgentState {
            gen_index,
            gen_id: gen_id.into(),
            stats: Default::default(),
        }
    }

    pub fn stats(&self, tag: StrategyTag) -> &StrategyStats {
        &self.stats[tag.index()]
    }

    /// Fold one realized payoff and price series into `tag`'s statistics.
    pub fn record(&mut self, tag: StrategyTag, payoff: f64, prices: &[f64], eta: f64) {
        let s = &mut self.stats[tag.index()];
        s.smoothed_profit = Some(smooth_step(s.smoothed_profit, payoff, eta));
        s.smoothed_prices = Some(match s.smoothed_prices.take() {
            None => prices.to_vec(),
            Some(prev) => prev.iter().zip(prices).map(|(&p, &x)| smooth_step(Some(p), x, eta)).collect(),
        });
        s.count += 1;
        s.payoffs.push(payoff);
    }

    /// Expected prices for `tag`; strategies never tried borrow the
    /// economic stream.
    pub fn expected_prices(&self, tag: StrategyTag) -> Option<&[f64]> {
        self.stats(tag)
            .smoothed_prices
            .as_deref()
            .or(self.stats(StrategyTag::Economic).smoothed_prices.as_deref())
    }

    pub fn iterations(&self) -> usize {
        self.stats.iter().map(|s| s.count).sum()
    }
}

/// α-greedy choice. Exploitation keeps economic unless another strategy's
/// smoothed profit is strictly higher; exploration is uniform over all tags.
pub fn choose_strategy<R: Rng + ?Sized>(agent: &AgentState, rng: &mut R, alpha: f64) -> StrategyTag {
    if rng.gen::<f64>() < alpha {
        let mut best = StrategyTag::Economic;
        let mut best_value = agent.stats(best).smoothed_profit.unwrap_or(f64::NEG_INFINITY);
        for tag in [StrategyTag::SelfCommit, StrategyTag::SelfSchedule] {
            if let Some(v) = agent.stats(tag).smoothed_profit {
                if v > best_value {
                    best = tag;
                    best_value = v;
                }
            }
        }
        best
    } else {
        StrategyTag::ALL[rng.gen_range(0..3)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub alpha: f64,
    pub eta: f64,
    /// Total iterations including the competitive iteration 0.
    pub iterations: usize,
    pub seed: u64,
    pub pricing_model: PricingModel,
    pub rel_gap: f64,
    /// Worker threads for per-generator work; 1 runs inline.
    pub jobs: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            alpha: 0.9,
            eta: 0.05,
            iterations: 2000,
            seed: 1,
            pricing_model: PricingModel::Fcp,
            rel_gap: DEFAULT_REL_GAP,
            jobs: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1], got {}", self.alpha)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("eta must be in (0, 1], got {}", self.eta)));
        }
        if self.iterations < 1 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.rel_gap >= 0.0 && self.rel_gap < 1.0) {
            return Err(Error::Config(format!("gap must be in [0, 1), got {}", self.rel_gap)));
        }
        if self.jobs < 1 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-agent random stream: same master seed, stream number = generator index.
pub fn agent_rng(seed: u64, gen_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(gen_index as u64);
    rng
}

fn offers_digest(offers: &[OfferCurve]) -> String {
    let mut hasher = Sha256::new();
    for offer in offers {
        hasher.update(serde_json::to_vec(offer).expect("offers serialize"));
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Run `f` over `0..n` either inline or on a dedicated pool.
fn map_indexed<T: Send>(pool: Option<&rayon::ThreadPool>, n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    match pool {
        Some(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        None => (0..n).map(f).collect(),
    }
}

struct Game<'a> {
    case: &'a MarketCase,
    config: &'a SimConfig,
    backend: &'a dyn SolverBackend,
    pool: Option<rayon::ThreadPool>,
    agents: Vec<AgentState>,
    rngs: Vec<ChaCha8Rng>,
    /// Clearing outcomes keyed by offers digest. The clearing is a pure
    /// function of the offers, and learned profiles repeat often, so a
    /// repeated profile reuses the earlier solve verbatim.
    cleared: HashMap<String, Cleared>,
}

#[derive(Clone)]
struct Cleared {
    objective: f64,
    mip_gap: f64,
    non_served: f64,
    dispatch: Vec<Vec<f64>>,
    lambda: Vec<f64>,
    settlements: Vec<SettlementRecord>,
}

impl Game<'_> {
    fn play(&mut self, iteration: usize) -> Result<IterationRecord> {
        let case = self.case;
        let horizon = case.horizon();
        let n = case.generators.len();

        let mut tags = vec![StrategyTag::Economic; n];
        if iteration > 0 {
            for (agent, rng) in self.agents.iter().zip(&mut self.rngs) {
                tags[agent.gen_index] = choose_strategy(agent, rng, self.config.alpha);
            }
        }
        let agent_of: Vec<Option<usize>> = {
            let mut map = vec![None; n];
            for (a, agent) in self.agents.iter().enumerate() {
                map[agent.gen_index] = Some(a);
            }
            map
        };

        let offers = map_indexed(self.pool.as_ref(), n, |g| {
            let gen = &case.generators[g];
            let tag = tags[g];
            if !tag.is_strategic() {
                return Ok(economic_offer(gen, horizon));
            }
            let agent = &self.agents[agent_of[g].expect("strategic bidders are agents")];
            let expected = agent
                .expected_prices(tag)
                .ok_or_else(|| Error::Consistency(format!("`{}` has no price expectation", gen.id)))?;
            let strategy = choose_active_periods(gen, tag, expected, self.backend)?;
            make_offer(gen, &strategy, horizon)
        })?;

        let digest = offers_digest(&offers);
        let cleared = match self.cleared.get(&digest) {
            Some(hit) => hit.clone(),
            None => {
                let fresh = self.clear(&offers)?;
                self.cleared.insert(digest.clone(), fresh.clone());
                fresh
            }
        };
        let Cleared {
            objective,
            mip_gap,
            non_served,
            dispatch,
            lambda,
            settlements,
        } = cleared;

        for agent in &mut self.agents {
            let g = agent.gen_index;
            agent.record(tags[g], settlements[g].profit, &lambda, self.config.eta);
        }

        let energy_payment: f64 = lambda.iter().zip(case.demand.values()).map(|(l, d)| l * d).sum();
        let mwp_total: f64 = settlements.iter().map(|s| s.mwp).sum();
        Ok(IterationRecord {
            iteration,
            strategies: tags,
            offers_digest: digest,
            prices: lambda,
            objective,
            mip_gap,
            non_served,
            consumer_cost: energy_payment + mwp_total,
            producer_cost: settlements.iter().map(|s| s.true_cost).sum(),
            producer_profit: settlements.iter().map(|s| s.profit).sum(),
            mwp_total,
            loc0_total: settlements.iter().map(|s| s.loc0).sum(),
            loc_display_total: settlements.iter().map(|s| s.loc_display).sum(),
            dispatch,
            settlements,
        })
    }

    fn clear(&self, offers: &[OfferCurve]) -> Result<Cleared> {
        let case = self.case;
        let problem = build_uc(case, offers, &UcOptions::default())?;
        let solution = solve_mip(&problem, self.backend, self.config.rel_gap)?;
        let prices = price(self.config.pricing_model, &problem, &solution, self.backend)?;
        let settlements = map_indexed(self.pool.as_ref(), case.generators.len(), |g| {
            settle(
                &case.generators[g],
                &prices.lambda,
                &solution.schedule(g),
                offers[g].mwp_eligible,
                self.backend,
            )
        })?;
        Ok(Cleared {
            objective: solution.objective,
            mip_gap: solution.mip_gap_achieved,
            non_served: solution.non_served.iter().sum(),
            dispatch: solution.dispatch,
            lambda: prices.lambda,
            settlements,
        })
    }
}

/// Play the market game. Every thermal unit is a learning agent; renewable
/// units always bid their (zero) cost.
///
/// Each finished iteration goes to `sink` before the next starts. A failing
/// iteration ends the run with [`Error::Aborted`] after the sink is flushed.
pub fn run_simulation(
    case: &MarketCase,
    config: &SimConfig,
    backend: &dyn SolverBackend,
    mut sink: Option<&mut dyn IterationSink>,
) -> Result<IterationLog> {
    config.validate()?;
    case.validate()?;
    let pool = if config.jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.jobs)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };
    let agents: Vec<AgentState> = case.thermal().map(|(g, gen)| AgentState::new(g, gen.id.clone())).collect();
    let rngs = agents.iter().map(|a| agent_rng(config.seed, a.gen_index)).collect();
    let mut game = Game {
        case,
        config,
        backend,
        pool,
        agents,
        rngs,
        cleared: HashMap::new(),
    };
    let mut log = IterationLog {
        case_name: case.name.clone(),
        config: config.clone(),
        gen_ids: case.generators.iter().map(|g| g.id.clone()).collect(),
        records: Vec::with_capacity(config.iterations),
        agents: Vec::new(),
    };
    for iteration in 0..config.iterations {
        let outcome = game.play(iteration).and_then(|record| {
            if let Some(sink) = sink.as_deref_mut() {
                sink.write(&record)?;
            }
            Ok(record)
        });
        match outcome {
            Ok(record) => log.records.push(record),
            Err(source) => {
                if let Some(sink) = sink.as_deref_mut() {
                    let _ = sink.flush();
                }
                return Err(Error::Aborted {
                    iteration,
                    source: Box::new(source),
                });
            }
        }
    }
    if let Some(sink) = sink {
        sink.flush()?;
    }
    log.agents = game.agents;
    Ok(log)
}
