//! Import of unit-commitment benchmark instances in the pglib-uc JSON layout
//! (the format the FERC instances are distributed in).
//!
//! Thermal units map one-to-one onto [`GeneratorTech`]; their
//! `piecewise_production` curve goes through [`derive_offer_steps`].
//! Renewable units become VRE generators whose profile is the source
//! `power_output_maximum` series as given. Reserves, must-run flags, and
//! pre-horizon history (`time_up_t0`, `power_output_t0`, ...) are not part
//! of the market model and are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::Value;

use super::{derive_offer_steps, CostPoint, DemandSeries, GeneratorKind, GeneratorTech, MarketCase, OfferStep, DEFAULT_VOLL};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ImportOptions {
    /// Keep only the first `horizon` periods of the source.
    pub horizon: Option<usize>,
    pub voll: f64,
    pub name: Option<String>,
}

impl Default for ImportOptions {
    fn default() -> Self {
        ImportOptions {
            horizon: None,
            voll: DEFAULT_VOLL,
            name: None,
        }
    }
}

/// Import from a file, or from a directory holding exactly one `.json` file.
pub fn import_path(source: &Path, options: &ImportOptions) -> Result<MarketCase> {
    let file = if source.is_dir() {
        let mut found: Vec<_> = std::fs::read_dir(source)
            .map_err(|e| Error::io(source, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        found.sort();
        match found.len() {
            1 => found.remove(0),
            0 => return Err(Error::Import(format!("no .json instance in {}", source.display()))),
            _ => {
                return Err(Error::Import(format!(
                    "{} holds {} .json files; pass one explicitly",
                    source.display(),
                    found.len()
                )))
            }
        }
    } else {
        source.to_path_buf()
    };
    let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
    let mut options = options.clone();
    if options.name.is_none() {
        options.name = file.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    import_str(&text, &options)
}

pub fn import_str(text: &str, options: &ImportOptions) -> Result<MarketCase> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Schema {
        path: "benchmark instance".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut problems = Vec::new();

    let demand = number_array(&root, "demand").unwrap_or_else(|| {
        problems.push("instance: missing or malformed `demand`".to_string());
        Vec::new()
    });
    let horizon = options.horizon.unwrap_or(demand.len()).min(demand.len());
    if let Some(h) = options.horizon {
        if h > demand.len() {
            problems.push(format!("instance: requested horizon {h} exceeds {} periods", demand.len()));
        }
    }

    let mut generators = Vec::new();
    let thermal = object(&root, "thermal_generators");
    if thermal.is_none() {
        problems.push("instance: missing `thermal_generators`".into());
    }
    for (name, rec) in thermal.into_iter().flatten() {
        match thermal_unit(name, rec) {
            Ok(g) => generators.push(g),
            Err(mut list) => problems.append(&mut list),
        }
    }
    for (name, rec) in object(&root, "renewable_generators").into_iter().flatten() {
        match number_array(rec, "power_output_maximum") {
            Some(profile) if profile.len() >= horizon => {
                let profile: Vec<f64> = profile[..horizon].to_vec();
                let cap = profile.iter().copied().fold(0.0, f64::max).max(1e-6);
                generators.push(GeneratorTech {
                    id: name.clone(),
                    kind: GeneratorKind::Vre,
                    p_min: 0.0,
                    steps: vec![OfferStep::new(cap, 0.0)],
                    startup_cost: 0.0,
                    no_load_cost: 0.0,
                    min_on: 1,
                    min_off: 1,
                    ramp_up: cap,
                    ramp_down: cap,
                    init_status: false,
                    vre_profile: Some(profile),
                });
            }
            Some(_) => problems.push(format!("renewable `{name}`: profile shorter than horizon")),
            None => problems.push(format!("renewable `{name}`: missing `power_output_maximum`")),
        }
    }

    if !problems.is_empty() {
        return Err(Error::Import(format!(
            "{} unmapped field(s), no case written:\n  {}",
            problems.len(),
            problems.join("\n  ")
        )));
    }

    let case = MarketCase {
        name: options.name.clone().unwrap_or_else(|| "imported".into()),
        voll: options.voll,
        demand: DemandSeries::new(demand[..horizon].to_vec()),
        generators,
    };
    case.validate()?;
    Ok(case)
}

fn object<'a>(v: &'a Value, key: &str) -> Option<BTreeMap<&'a String, &'a Value>> {
    v.get(key)?.as_object().map(|m| m.iter().collect())
}

fn number_array(v: &Value, key: &str) -> Option<Vec<f64>> {
    v.get(key)?.as_array()?.iter().map(Value::as_f64).collect()
}

fn thermal_unit(name: &str, rec: &Value) -> std::result::Result<GeneratorTech, Vec<String>> {
    let mut missing = Vec::new();
    let mut num = |key: &str| -> f64 {
        match rec.get(key).and_then(Value::as_f64) {
            Some(v) => v,
            None => {
                missing.push(format!("thermal `{name}`: missing `{key}`"));
                f64::NAN
            }
        }
    };
    let p_min = num("power_output_minimum");
    let p_max = num("power_output_maximum");
    let ramp_up = num("ramp_up_limit");
    let ramp_down = num("ramp_down_limit");
    let min_on = num("time_up_minimum");
    let min_off = num("time_down_minimum");
    let on_t0 = num("unit_on_t0");

    // Lowest-lag (hot) start cost.
    let startup_cost = rec
        .get("startup")
        .and_then(Value::as_array)
        .and_then(|list| {
            list.iter()
                .filter_map(|s| Some((s.get("lag")?.as_f64()?, s.get("cost")?.as_f64()?)))
                .min_by(|a, b| a.0.total_cmp(&b.0))
        })
        .map(|(_, cost)| cost);
    if startup_cost.is_none() {
        missing.push(format!("thermal `{name}`: missing `startup`"));
    }
    let curve: Option<Vec<CostPoint>> = rec
        .get("piecewise_production")
        .and_then(Value::as_array)
        .and_then(|pts| {
            pts.iter()
                .map(|p| Some(CostPoint { mw: p.get("mw")?.as_f64()?, cost: p.get("cost")?.as_f64()? }))
                .collect()
        });
    if curve.is_none() {
        missing.push(format!("thermal `{name}`: missing `piecewise_production`"));
    }
    if !missing.is_empty() {
        return Err(missing);
    }
    let curve = curve.unwrap();
    let fail = |msg: String| vec![format!("thermal `{name}`: {msg}")];
    if (curve[0].mw - p_min).abs() > 1e-6 {
        return Err(fail(format!(
            "piecewise_production starts at {} MW, not at power_output_minimum {p_min}",
            curve[0].mw
        )));
    }
    if (curve.last().unwrap().mw - p_max).abs() > 1e-6 {
        return Err(fail(format!(
            "piecewise_production ends at {} MW, not at power_output_maximum {p_max}",
            curve.last().unwrap().mw
        )));
    }
    let derived = derive_offer_steps(&curve).map_err(|e| fail(e.to_string()))?;
    Ok(GeneratorTech {
        id: name.to_string(),
        kind: GeneratorKind::Thermal,
        p_min,
        steps: derived.steps,
        startup_cost: startup_cost.unwrap(),
        no_load_cost: derived.no_load_cost,
        min_on: (min_on.round() as u32).max(1),
        min_off: (min_off.round() as u32).max(1),
        ramp_up,
        ramp_down,
        init_status: on_t0 >= 0.5,
        vre_profile: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn instance() -> Value {
        json!({
            "time_periods": 3,
            "demand": [100.0, 120.0, 90.0],
            "reserves": [0.0, 0.0, 0.0],
            "thermal_generators": {
                "b_unit": {
                    "must_run": 0,
                    "power_output_minimum": 10.0, "power_output_maximum": 30.0,
                    "ramp_up_limit": 15.0, "ramp_down_limit": 15.0,
                    "ramp_startup_limit": 10.0, "ramp_shutdown_limit": 10.0,
                    "time_up_minimum": 3, "time_down_minimum": 2,
                    "power_output_t0": 0.0, "unit_on_t0": 0, "time_up_t0": 0, "time_down_t0": 4,
                    "startup": [{"lag": 6, "cost": 900.0}, {"lag": 1, "cost": 500.0}],
                    "piecewise_production": [{"mw": 10.0, "cost": 100.0}, {"mw": 20.0, "cost": 180.0}, {"mw": 30.0, "cost": 280.0}]
                },
                "a_block": {
                    "power_output_minimum": 40.0, "power_output_maximum": 40.0,
                    "ramp_up_limit": 40.0, "ramp_down_limit": 40.0,
                    "time_up_minimum": 1, "time_down_minimum": 1, "unit_on_t0": 1,
                    "startup": [{"lag": 1, "cost": 0.0}],
                    "piecewise_production": [{"mw": 40.0, "cost": 800.0}]
                }
            },
            "renewable_generators": {
                "wind": {"power_output_minimum": [0.0, 0.0, 0.0], "power_output_maximum": [5.0, 25.0, 10.0]}
            }
        })
    }

    #[test]
    fn maps_thermal_and_renewable_units() {
        let case = import_str(&instance().to_string(), &ImportOptions::default()).unwrap();
        assert_eq!(case.generators.len(), 3);
        let ids: Vec<_> = case.generators.iter().map(|g| g.id.as_str()).collect();
        assert_eq!(ids, ["a_block", "b_unit", "wind"]);

        let b = case.generator("b_unit").unwrap();
        assert_eq!(b.startup_cost, 500.0);
        assert!((b.no_load_cost - 20.0).abs() < 1e-12);
        assert_eq!(b.steps, vec![OfferStep::new(20.0, 8.0), OfferStep::new(10.0, 10.0)]);
        assert_eq!((b.min_on, b.min_off), (3, 2));
        assert!(!b.init_status);

        let a = case.generator("a_block").unwrap();
        assert_eq!(a.no_load_cost, 0.0);
        assert_eq!(a.steps, vec![OfferStep::new(40.0, 20.0)]);
        assert!(a.init_status);

        let w = case.generator("wind").unwrap();
        assert_eq!(w.kind, GeneratorKind::Vre);
        assert_eq!(w.vre_profile.as_deref(), Some(&[5.0, 25.0, 10.0][..]));
    }

    #[test]
    fn horizon_truncates_series() {
        let opts = ImportOptions { horizon: Some(2), ..Default::default() };
        let case = import_str(&instance().to_string(), &opts).unwrap();
        assert_eq!(case.horizon(), 2);
        assert_eq!(case.generator("wind").unwrap().vre_profile.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn missing_ramp_names_the_generator() {
        let mut inst = instance();
        inst["thermal_generators"]["b_unit"]
            .as_object_mut()
            .unwrap()
            .remove("ramp_up_limit");
        let err = import_str(&inst.to_string(), &ImportOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("b_unit") && msg.contains("ramp_up_limit"), "{msg}");
    }

    #[test]
    fn reimport_is_byte_identical() {
        let text = instance().to_string();
        let a = import_str(&text, &ImportOptions::default()).unwrap().to_json_pretty();
        let b = import_str(&text, &ImportOptions::default()).unwrap().to_json_pretty();
        assert_eq!(a, b);
    }
}
