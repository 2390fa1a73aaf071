//! Post-run statistics: Welch tests for adverse bidding, excess profits,
//! market shares and normalized cost series.

mod emit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::learning::IterationLog;
use crate::market_data::MarketCase;
use crate::strategy::StrategyTag;

pub use emit::{emit, ARTIFACT_FILES};

/// Significance level for the adverse-bidding test.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WelchOutcome {
    Tested(WelchTest),
    /// A sample had fewer than two values.
    NotTestable,
}

impl WelchOutcome {
    pub fn test(self) -> Option<WelchTest> {
        match self {
            WelchOutcome::Tested(t) => Some(t),
            WelchOutcome::NotTestable => None,
        }
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test of `a` against `b`.
///
/// Two zero-variance samples give `t = ±∞, p = 0` when the means differ
/// and `t = 0, p = 1` when they agree.
pub fn welch_t(a: &[f64], b: &[f64]) -> WelchOutcome {
    if a.len() < 2 || b.len() < 2 {
        return WelchOutcome::NotTestable;
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    let diff = ma - mb;
    if se2 == 0.0 {
        let df = na + nb - 2.0;
        return WelchOutcome::Tested(if diff == 0.0 {
            WelchTest { t: 0.0, p: 1.0, df }
        } else {
            WelchTest {
                t: f64::INFINITY.copysign(diff),
                p: 0.0,
                df,
            }
        });
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0);
    WelchOutcome::Tested(WelchTest { t, p, df })
}

/// Generator type from an id: the part before the first `_`.
pub fn group_of(id: &str) -> &str {
    id.split('_').next().unwrap_or(id)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorAdverse {
    pub gen_id: String,
    pub capacity: f64,
    /// Per strategy, indexed by [`StrategyTag::index`].
    pub means: [Option<f64>; 3],
    pub std_devs: [Option<f64>; 3],
    pub counts: [usize; 3],
    /// Strategic tag vs economic; index 0 self-commit, 1 self-schedule.
    pub tests: [WelchOutcome; 2],
    pub adverse: [bool; 2],
    pub excess_profit: f64,
}

impl GeneratorAdverse {
    pub fn is_adverse(&self) -> bool {
        self.adverse[0] || self.adverse[1]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdverseCount {
    pub self_commit: usize,
    pub self_schedule: usize,
    /// Adverse under either tag, counted once.
    pub unique: usize,
    pub unique_mw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdverseReport {
    pub generators: Vec<GeneratorAdverse>,
}

impl AdverseReport {
    pub fn by_group(&self) -> BTreeMap<String, AdverseCount> {
        let mut out: BTreeMap<String, AdverseCount> = BTreeMap::new();
        for g in &self.generators {
            let entry = out.entry(group_of(&g.gen_id).to_string()).or_default();
            entry.self_commit += g.adverse[0] as usize;
            entry.self_schedule += g.adverse[1] as usize;
            if g.is_adverse() {
                entry.unique += 1;
                entry.unique_mw += g.capacity;
            }
        }
        out
    }

    /// Unique adverse count for each of `groups`, in order (0 when absent).
    pub fn unique_counts(&self, groups: &[&str]) -> Vec<usize> {
        let by = self.by_group();
        groups.iter().map(|g| by.get(*g).map_or(0, |c| c.unique)).collect()
    }

    pub fn total_excess_profit(&self) -> f64 {
        self.generators.iter().map(|g| g.excess_profit).sum()
    }
}

/// Welch-test every agent's strategic payoffs against its economic ones.
pub fn classify_adverse(log: &IterationLog, case: &MarketCase) -> AdverseReport {
    let generators = case
        .thermal()
        .map(|(g, gen)| {
            let samples: Vec<Vec<f64>> = StrategyTag::ALL.iter().map(|&tag| log.payoffs(g, tag)).collect();
            let stat = |i: usize| {
                let s = &samples[i];
                match s.len() {
                    0 => (None, None),
                    1 => (Some(s[0]), None),
                    _ => {
                        let (m, v) = mean_var(s);
                        (Some(m), Some(v.sqrt()))
                    }
                }
            };
            let (means, std_devs): (Vec<_>, Vec<_>) = (0..3).map(stat).unzip();
            let eco = &samples[StrategyTag::Economic.index()];
            let mut tests = [WelchOutcome::NotTestable; 2];
            let mut adverse = [false; 2];
            for (k, tag) in [StrategyTag::SelfCommit, StrategyTag::SelfSchedule].into_iter().enumerate() {
                tests[k] = welch_t(&samples[tag.index()], eco);
                if let (Some(test), Some(ms), Some(me)) = (tests[k].test(), means[tag.index()], means[0]) {
                    adverse[k] = ms > me && test.p < SIGNIFICANCE;
                }
            }
            // An adverse bidder's excess is measured with its best strategic
            // mean, whichever tag passed the test.
            let excess = match (adverse[0] || adverse[1], means[0]) {
                (true, Some(me)) => means[1..].iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - me,
                _ => 0.0,
            };
            GeneratorAdverse {
                gen_id: gen.id.clone(),
                capacity: gen.p_max(),
                means: [means[0], means[1], means[2]],
                std_devs: [std_devs[0], std_devs[1], std_devs[2]],
                counts: [samples[0].len(), samples[1].len(), samples[2].len()],
                tests,
                adverse,
                excess_profit: excess,
            }
        })
        .collect();
    AdverseReport { generators }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub iteration: usize,
    pub consumer_cost: f64,
    pub producer_cost: f64,
    pub producer_profit: f64,
    pub consumer_cost_norm: f64,
    pub producer_cost_norm: f64,
    pub producer_profit_norm: f64,
    pub mwp_total: f64,
    pub loc0_total: f64,
    pub loc_display_total: f64,
    /// Percent of thermal units per strategy.
    pub share_count: [f64; 3],
    /// Percent of thermal capacity per strategy.
    pub share_mw: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub case_name: String,
    pub iterations: Vec<IterationMetrics>,
    pub competitive_consumer_cost: f64,
    pub competitive_producer_cost: f64,
    pub competitive_producer_profit: f64,
    pub adverse: AdverseReport,
    pub excess_profit_total: f64,
    /// Excess profit as percent of competitive producer profit.
    pub excess_profit_pct: f64,
    /// Iterations counted in `strategic_rate`.
    pub final_window: usize,
    /// Share of agent-iterations with a strategic bid in the final window,
    /// per generator type.
    pub strategic_rate: BTreeMap<String, f64>,
}

fn ratio(value: f64, base: f64) -> f64 {
    if base == 0.0 {
        f64::NAN
    } else {
        value / base
    }
}

/// Build the summary tables for a finished run. `final_window` bounds the
/// trailing iterations used for strategic-bidding rates.
pub fn summarize(log: &IterationLog, case: &MarketCase, final_window: usize) -> RunSummary {
    let base = log.competitive().expect("log is never empty");
    let thermal: Vec<(usize, f64)> = case.thermal().map(|(g, gen)| (g, gen.p_max())).collect();
    let capacity: f64 = thermal.iter().map(|(_, c)| c).sum();
    let iterations = log
        .records
        .iter()
        .map(|r| {
            let mut share_count = [0.0; 3];
            let mut share_mw = [0.0; 3];
            for &(g, cap) in &thermal {
                let k = r.strategies[g].index();
                share_count[k] += 100.0 / thermal.len() as f64;
                share_mw[k] += 100.0 * cap / capacity;
            }
            IterationMetrics {
                iteration: r.iteration,
                consumer_cost: r.consumer_cost,
                producer_cost: r.producer_cost,
                producer_profit: r.producer_profit,
                consumer_cost_norm: ratio(r.consumer_cost, base.consumer_cost),
                producer_cost_norm: ratio(r.producer_cost, base.producer_cost),
                producer_profit_norm: ratio(r.producer_profit, base.producer_profit),
                mwp_total: r.mwp_total,
                loc0_total: r.loc0_total,
                loc_display_total: r.loc_display_total,
                share_count,
                share_mw,
            }
        })
        .collect();

    let adverse = classify_adverse(log, case);
    let excess_profit_total = adverse.total_excess_profit();
    let window = final_window.min(log.records.len());
    let tail = &log.records[log.records.len() - window..];
    let mut tallies: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for &(g, _) in &thermal {
        let entry = tallies.entry(group_of(&case.generators[g].id).to_string()).or_default();
        for r in tail {
            entry.0 += r.strategies[g].is_strategic() as usize;
            entry.1 += 1;
        }
    }
    let strategic_rate = tallies
        .into_iter()
        .map(|(k, (s, n))| (k, if n == 0 { 0.0 } else { s as f64 / n as f64 }))
        .collect();

    RunSummary {
        case_name: log.case_name.clone(),
        iterations,
        competitive_consumer_cost: base.consumer_cost,
        competitive_producer_cost: base.producer_cost,
        competitive_producer_profit: base.producer_profit,
        excess_profit_pct: 100.0 * ratio(excess_profit_total, base.producer_profit),
        excess_profit_total,
        adverse,
        final_window: window,
        strategic_rate,
    }
}

#[cfg(test)]
mod tests;
