//! Market cases: generator technology, demand, and the on-disk case format.
//!
//! A case file is a single JSON document:
//!
//! ```text
//! {
//!   "name": "...", "voll": 10000.0, "demand": [..],
//!   "generators": [{ "id", "kind", "p_min", "steps": [{"cap", "cost"}],
//!                    "startup_cost", "no_load_cost", "min_on", "min_off",
//!                    "ramp_up", "ramp_down", "init_status", "vre_profile"? }]
//! }
//! ```

mod bundled;
mod offer_steps;
pub mod pglib;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bundled::{illustrative_case, synthetic_case, IllustrativeScenario};
pub use offer_steps::{derive_offer_steps, CostPoint, DerivationRule, DerivedOffer};

/// Default penalty on non-served energy, $/MWh.
pub const DEFAULT_VOLL: f64 = 10_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Thermal,
    Vre,
}

/// One segment of a stepwise supply curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfferStep {
    /// Width of the step, MW.
    pub cap: f64,
    /// Marginal cost within the step, $/MWh.
    pub cost: f64,
}

impl OfferStep {
    pub fn new(cap: f64, cost: f64) -> Self {
        OfferStep { cap, cost }
    }
}

/// Physical and cost parameters of a generating unit.
///
/// Steps are listed from zero output upward; their widths sum to the
/// unit's maximum output. The first `p_min` MW of that ladder is the
/// mandatory minimum when the unit is committed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTech {
    pub id: String,
    pub kind: GeneratorKind,
    pub p_min: f64,
    pub steps: Vec<OfferStep>,
    pub startup_cost: f64,
    pub no_load_cost: f64,
    pub min_on: u32,
    pub min_off: u32,
    pub ramp_up: f64,
    pub ramp_down: f64,
    #[serde(with = "binary_flag")]
    pub init_status: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vre_profile: Option<Vec<f64>>,
}

impl GeneratorTech {
    pub fn is_thermal(&self) -> bool {
        self.kind == GeneratorKind::Thermal
    }

    /// Total capacity, the sum of all step widths.
    pub fn p_max(&self) -> f64 {
        self.steps.iter().map(|s| s.cap).sum()
    }

    /// Upper output bound in period `t`.
    pub fn available(&self, t: usize) -> f64 {
        match (&self.kind, &self.vre_profile) {
            (GeneratorKind::Vre, Some(profile)) => profile[t].min(self.p_max()),
            _ => self.p_max(),
        }
    }

    /// True when neither ramp limit can bind between two committed hours.
    pub fn ramps_non_binding(&self) -> bool {
        let span = self.p_max() - self.p_min;
        self.ramp_up >= span && self.ramp_down >= span
    }

    /// Least-cost production cost of `q` MW against the true steps, with
    /// steps filled cheapest first (ties by step index).
    pub fn variable_cost(&self, q: f64) -> f64 {
        fill_cheapest_first(&self.steps, q)
            .iter()
            .zip(&self.steps)
            .map(|(amount, step)| amount * step.cost)
            .sum()
    }

    /// Step amounts for `q` MW filled cheapest first.
    pub fn step_fill(&self, q: f64) -> Vec<f64> {
        fill_cheapest_first(&self.steps, q)
    }
}

/// Fill `q` MW into `steps`, cheapest step first; ties keep listing order.
pub(crate) fn fill_cheapest_first(steps: &[OfferStep], q: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by(|&a, &b| steps[a].cost.total_cmp(&steps[b].cost).then(a.cmp(&b)));
    let mut fill = vec![0.0; steps.len()];
    let mut remaining = q.max(0.0);
    for s in order {
        if remaining <= 0.0 {
            break;
        }
        let take = remaining.min(steps[s].cap);
        fill[s] = take;
        remaining -= take;
    }
    fill
}

/// Fixed per-period demand, MW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandSeries(Vec<f64>);

impl DemandSeries {
    pub fn new(values: Vec<f64>) -> Self {
        DemandSeries(values)
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn at(&self, t: usize) -> f64 {
        self.0[t]
    }

    pub fn peak(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

fn default_voll() -> f64 {
    DEFAULT_VOLL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketCase {
    pub name: String,
    #[serde(default = "default_voll")]
    pub voll: f64,
    pub demand: DemandSeries,
    pub generators: Vec<GeneratorTech>,
}

impl MarketCase {
    pub fn horizon(&self) -> usize {
        self.demand.horizon()
    }

    pub fn thermal(&self) -> impl Iterator<Item = (usize, &GeneratorTech)> {
        self.generators.iter().enumerate().filter(|(_, g)| g.is_thermal())
    }

    /// Sum of thermal unit capacities, MW.
    pub fn thermal_capacity(&self) -> f64 {
        self.thermal().map(|(_, g)| g.p_max()).sum()
    }

    pub fn generator(&self, id: &str) -> Option<&GeneratorTech> {
        self.generators.iter().find(|g| g.id == id)
    }

    /// Parse and validate a case document. `origin` labels schema errors.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let case: MarketCase = serde_json::from_str(text).map_err(|e| Error::Schema {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        for warning in case.validate()? {
            log::warn!("{origin}: {warning}");
        }
        Ok(case)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("case serializes");
        text.push('\n');
        text
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_pretty()).map_err(|e| Error::io(path, e))
    }

    /// Check every case invariant. Returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if self.generators.is_empty() {
            return Err(Error::InvalidCase("case has no generators".into()));
        }
        if self.horizon() == 0 {
            return Err(Error::InvalidCase("demand series is empty".into()));
        }
        if let Some((t, d)) = self
            .demand
            .values()
            .iter()
            .enumerate()
            .find(|(_, d)| !d.is_finite() || **d < 0.0)
        {
            return Err(Error::InvalidCase(format!("demand[{t}] = {d} must be finite and >= 0")));
        }
        if !(self.voll.is_finite() && self.voll > 0.0) {
            return Err(Error::InvalidCase(format!("voll = {} must be positive", self.voll)));
        }
        let mut seen = HashSet::new();
        for g in &self.generators {
            if !seen.insert(g.id.as_str()) {
                return Err(Error::InvalidCase(format!("duplicate generator id `{}`", g.id)));
            }
            validate_generator(g, self.horizon(), &mut warnings)?;
        }
        Ok(warnings)
    }
}

fn validate_generator(g: &GeneratorTech, horizon: usize, warnings: &mut Vec<String>) -> Result<()> {
    let bad = |field: &'static str, message: String| Error::InvalidGenerator {
        generator: g.id.clone(),
        field,
        message,
    };
    if !(g.p_min.is_finite() && g.p_min >= 0.0) {
        return Err(bad("p_min", format!("{} must be finite and >= 0", g.p_min)));
    }
    if g.steps.is_empty() {
        return Err(bad("steps", "at least one offer step is required".into()));
    }
    for (s, step) in g.steps.iter().enumerate() {
        if !(step.cap.is_finite() && step.cap > 0.0) {
            return Err(bad("steps", format!("step {s} cap {} must be > 0", step.cap)));
        }
        if !step.cost.is_finite() {
            return Err(bad("steps", format!("step {s} cost is not finite")));
        }
    }
    if g.steps.windows(2).any(|w| w[1].cost < w[0].cost) {
        warnings.push(format!("generator `{}` has decreasing step costs", g.id));
    }
    if !(g.startup_cost.is_finite() && g.startup_cost >= 0.0) {
        return Err(bad("startup_cost", format!("{} must be >= 0", g.startup_cost)));
    }
    if !(g.no_load_cost.is_finite() && g.no_load_cost >= 0.0) {
        return Err(bad("no_load_cost", format!("{} must be >= 0", g.no_load_cost)));
    }
    if !(g.ramp_up >= 0.0) {
        return Err(bad("ramp_up", format!("{} must be >= 0", g.ramp_up)));
    }
    if !(g.ramp_down >= 0.0) {
        return Err(bad("ramp_down", format!("{} must be >= 0", g.ramp_down)));
    }
    match g.kind {
        GeneratorKind::Thermal => {
            if g.p_max() + 1e-9 < g.p_min {
                return Err(bad(
                    "p_min",
                    format!("{} exceeds total step capacity {}", g.p_min, g.p_max()),
                ));
            }
            if g.min_on < 1 {
                return Err(bad("min_on", "must be >= 1".into()));
            }
            if g.min_off < 1 {
                return Err(bad("min_off", "must be >= 1".into()));
            }
            if g.vre_profile.is_some() {
                return Err(bad("vre_profile", "only VRE units carry a profile".into()));
            }
        }
        GeneratorKind::Vre => {
            let profile = g
                .vre_profile
                .as_ref()
                .ok_or_else(|| bad("vre_profile", "required for VRE units".into()))?;
            if profile.len() != horizon {
                return Err(bad(
                    "vre_profile",
                    format!("length {} differs from horizon {horizon}", profile.len()),
                ));
            }
            if profile.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(bad("vre_profile", "values must be finite and >= 0".into()));
            }
        }
    }
    Ok(())
}

/// Read, parse, and validate a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<MarketCase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    MarketCase::from_json_str(&text, &path.display().to_string())
}

/// `init_status` is written as 0/1; booleans are accepted on input.
mod binary_flag {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Flag {
            Int(u64),
            Bool(bool),
        }
        match Flag::deserialize(d)? {
            Flag::Bool(b) => Ok(b),
            Flag::Int(0) => Ok(false),
            Flag::Int(1) => Ok(true),
            Flag::Int(other) => Err(de::Error::custom(format!(
                "init_status must be 0 or 1, got {other}"
            ))),
        }
    }
}
