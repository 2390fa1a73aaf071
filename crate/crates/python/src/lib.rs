//! Python bindings. Cases and run summaries cross the boundary as JSON
//! text (the same format the CLI reads and writes); numeric results come
//! back as plain Python lists, tuples and dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ucmarket_core::analytics::{summarize, welch_t as core_welch};
use ucmarket_core::learning::{run_simulation as core_run, smooth as core_smooth, SimConfig};
use ucmarket_core::market_data::{illustrative_case, synthetic_case, IllustrativeScenario, MarketCase};
use ucmarket_core::pricing::{price, PricingModel};
use ucmarket_core::settlement::settle;
use ucmarket_core::strategy::economic_offer;
use ucmarket_core::uc::{build_uc, solve_mip, GenSchedule, HighsBackend, UcOptions, DEFAULT_REL_GAP};
use ucmarket_core::Error;

fn to_py(err: Error) -> PyErr {
    match err.root() {
        Error::Solver(_) | Error::Consistency(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse_case(case_json: &str) -> PyResult<MarketCase> {
    MarketCase::from_json_str(case_json, "<python>").map_err(to_py)
}

fn parse_model(model: &str) -> PyResult<PricingModel> {
    model.parse().map_err(to_py)
}

/// JSON text of a built-in illustrative case (`T1_D1`, `T10_D1`, `T10_D2`).
#[pyfunction]
fn illustrative_case_json(scenario: &str) -> PyResult<String> {
    let scenario: IllustrativeScenario = scenario.parse().map_err(PyValueError::new_err)?;
    Ok(illustrative_case(scenario).to_json_pretty())
}

/// JSON text of a seeded synthetic fleet.
#[pyfunction]
#[pyo3(signature = (n_thermal, horizon, seed=1))]
fn synthetic_case_json(n_thermal: usize, horizon: usize, seed: u64) -> String {
    synthetic_case(n_thermal, horizon, seed).to_json_pretty()
}

/// Clear the market with every unit bidding its true costs.
///
/// Returns a dict with `objective`, `prices`, `dispatch`, `commitment`,
/// `non_served` and `settlements` (one dict per generator).
#[pyfunction]
#[pyo3(signature = (case_json, model="fcp", rel_gap=DEFAULT_REL_GAP))]
fn clear_market<'py>(py: Python<'py>, case_json: &str, model: &str, rel_gap: f64) -> PyResult<Bound<'py, PyDict>> {
    let case = parse_case(case_json)?;
    let model = parse_model(model)?;
    let outcome = py.detach(|| -> Result<_, Error> {
        case.validate()?;
        let backend = HighsBackend::default();
        let horizon = case.horizon();
        let offers: Vec<_> = case.generators.iter().map(|g| economic_offer(g, horizon)).collect();
        let problem = build_uc(&case, &offers, &UcOptions::default())?;
        let solution = solve_mip(&problem, &backend, rel_gap)?;
        let prices = price(model, &problem, &solution, &backend)?;
        let settlements = (0..case.generators.len())
            .map(|g| settle(&case.generators[g], &prices.lambda, &solution.schedule(g), true, &backend))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((solution, prices, settlements))
    });
    let (solution, prices, settlements) = outcome.map_err(to_py)?;

    let out = PyDict::new(py);
    out.set_item("objective", solution.objective)?;
    out.set_item("prices", prices.lambda)?;
    out.set_item("dispatch", solution.dispatch)?;
    out.set_item("commitment", solution.commitment)?;
    out.set_item("non_served", solution.non_served)?;
    let records = settlements
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("gen_id", &s.gen_id)?;
            d.set_item("revenue", s.revenue)?;
            d.set_item("true_cost", s.true_cost)?;
            d.set_item("profit", s.profit)?;
            d.set_item("mwp", s.mwp)?;
            d.set_item("loc0", s.loc0)?;
            d.set_item("loc_display", s.loc_display)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("settlements", records)?;
    Ok(out)
}

/// Settle one generator against given prices and its operator schedule.
/// Returns `(profit, mwp, loc0, loc_display)`.
#[pyfunction]
#[pyo3(signature = (case_json, gen_id, prices, dispatch, commitment, economic=true))]
fn settle_generator(
    case_json: &str,
    gen_id: &str,
    prices: Vec<f64>,
    dispatch: Vec<f64>,
    commitment: Vec<bool>,
    economic: bool,
) -> PyResult<(f64, f64, f64, f64)> {
    let case = parse_case(case_json)?;
    let gen = case
        .generator(gen_id)
        .ok_or_else(|| PyValueError::new_err(format!("no generator `{gen_id}`")))?;
    if prices.len() != dispatch.len() || dispatch.len() != commitment.len() {
        return Err(PyValueError::new_err("prices, dispatch and commitment must have equal length"));
    }
    let z = commitment
        .iter()
        .enumerate()
        .map(|(t, &on)| on && !if t == 0 { gen.init_status } else { commitment[t - 1] })
        .collect();
    let schedule = GenSchedule {
        p: dispatch,
        u: commitment,
        z,
    };
    let record = settle(gen, &prices, &schedule, economic, &HighsBackend::default()).map_err(to_py)?;
    Ok((record.profit, record.mwp, record.loc0, record.loc_display))
}

/// Run the learning simulation and return the run summary as JSON text.
#[pyfunction]
#[pyo3(signature = (case_json, model="fcp", iterations=2000, alpha=0.9, eta=0.05, seed=1, final_window=None))]
#[allow(clippy::too_many_arguments)]
fn run_simulation(
    py: Python<'_>,
    case_json: &str,
    model: &str,
    iterations: usize,
    alpha: f64,
    eta: f64,
    seed: u64,
    final_window: Option<usize>,
) -> PyResult<String> {
    let case = parse_case(case_json)?;
    let config = SimConfig {
        alpha,
        eta,
        iterations,
        seed,
        pricing_model: parse_model(model)?,
        ..SimConfig::default()
    };
    let window = final_window.unwrap_or(iterations.div_ceil(2));
    let summary = py
        .detach(|| core_run(&case, &config, &HighsBackend::default(), None).map(|log| summarize(&log, &case, window)))
        .map_err(to_py)?;
    serde_json::to_string(&summary).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Welch's unequal-variance t-test: `(t, p, df)`, or `None` when either
/// sample has fewer than two values.
#[pyfunction]
fn welch_t(a: Vec<f64>, b: Vec<f64>) -> Option<(f64, f64, f64)> {
    core_welch(&a, &b).test().map(|w| (w.t, w.p, w.df))
}

/// Exponentially smoothed value of a history, seeded with its first element.
#[pyfunction]
fn smooth(history: Vec<f64>, eta: f64) -> PyResult<f64> {
    core_smooth(&history, eta).map_err(to_py)
}

#[pymodule]
fn ucmarket(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(illustrative_case_json, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_case_json, m)?)?;
    m.add_function(wrap_pyfunction!(clear_market, m)?)?;
    m.add_function(wrap_pyfunction!(settle_generator, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(welch_t, m)?)?;
    m.add_function(wrap_pyfunction!(smooth, m)?)?;
    Ok(())
}
