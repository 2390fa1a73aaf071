//! Built-in scenario runs checked against published reference results.

use std::path::Path;

use ucmarket_core::market_data::{illustrative_case, IllustrativeScenario};
use ucmarket_core::pricing::PricingModel;
use ucmarket_core::uc::backend_from_env;
use ucmarket_core::Error;

use crate::config::RunConfig;
use crate::{run_model, ModelRun};

const GROUPS: [&str; 3] = ["GEN1", "GEN2", "GEN3"];

struct Check {
    name: String,
    target: String,
    observed: String,
    pass: bool,
}

fn check(name: impl Into<String>, target: impl Into<String>, observed: impl Into<String>, pass: bool) -> Check {
    Check {
        name: name.into(),
        target: target.into(),
        observed: observed.into(),
        pass,
    }
}

fn counts(run: &ModelRun) -> Vec<usize> {
    run.summary.adverse.unique_counts(&GROUPS)
}

fn competitive_price(run: &ModelRun) -> f64 {
    run.log.records[0].prices[0]
}

pub fn run(scenario: IllustrativeScenario, seed: u64, iterations: usize, out: Option<&Path>, jobs: usize) -> Result<(), Error> {
    let case = illustrative_case(scenario);
    let backend = backend_from_env()?;
    let mut config = RunConfig {
        scenario: Some(scenario.name().to_string()),
        final_window: Some(iterations.div_ceil(2)),
        ..Default::default()
    };
    config.sim.seed = seed;
    config.sim.iterations = iterations;
    config.sim.jobs = jobs;
    config.sim.validate()?;
    let label = format!("builtin:{}", scenario.name());
    let mut runs = Vec::new();
    for model in PricingModel::ALL {
        let dir = out.map(|o| o.join(model.name()));
        runs.push(run_model(&case, &label, &config, model, dir.as_deref(), backend.as_ref())?);
    }
    let (fcp, achp) = (&runs[0], &runs[1]);

    let mut checks = Vec::new();
    let fmt_counts = |c: &[usize]| format!("({}, {}, {})", c[0], c[1], c[2]);
    match scenario {
        IllustrativeScenario::T1D1 => {
            let (pf, pa) = (competitive_price(fcp), competitive_price(achp));
            checks.push(check("competitive price, fcp", "25.00", format!("{pf:.2}"), (pf - 25.0).abs() < 1e-4));
            checks.push(check("competitive price, achp", "15.00", format!("{pa:.2}"), (pa - 15.0).abs() < 1e-4));
            let c = counts(fcp);
            checks.push(check("adverse (GEN1, GEN2, GEN3), fcp", "(4, 0, 0)", fmt_counts(&c), c == [4, 0, 0]));
            let rate = 100.0 * fcp.summary.strategic_rate.get("GEN1").copied().unwrap_or(0.0);
            checks.push(check(
                "GEN1 strategic rate, final half, fcp",
                "78.4% ± 10",
                format!("{rate:.1}%"),
                (rate - 78.4).abs() <= 10.0,
            ));
            let x = fcp.summary.excess_profit_pct;
            checks.push(check("excess profit, fcp", "24.4% ± 3", format!("{x:.2}%"), (x - 24.4).abs() <= 3.0));
            let c = counts(achp);
            checks.push(check("adverse (GEN1, GEN2, GEN3), achp", "(0, 0, 0)", fmt_counts(&c), c == [0, 0, 0]));
            let x = achp.summary.excess_profit_pct;
            checks.push(check("excess profit, achp", "≤ 0.1%", format!("{x:.2}%"), x <= 0.1));
        }
        IllustrativeScenario::T10D1 => {
            let c = counts(fcp);
            checks.push(check("adverse (GEN1, GEN2, GEN3), fcp", "(4, 0, 0)", fmt_counts(&c), c == [4, 0, 0]));
            let x = fcp.summary.excess_profit_pct;
            checks.push(check("excess profit, fcp", "20.9% ± 3", format!("{x:.2}%"), (x - 20.9).abs() <= 3.0));
            let c = counts(achp);
            checks.push(check("adverse (GEN1, GEN2, GEN3), achp", "(0, 0, 0)", fmt_counts(&c), c == [0, 0, 0]));
        }
        IllustrativeScenario::T10D2 => {
            let (xf, xa) = (fcp.summary.excess_profit_pct, achp.summary.excess_profit_pct);
            checks.push(check(
                "excess profit fcp vs achp",
                "fcp ≥ 10 × achp",
                format!("{xf:.2}% vs {xa:.2}%"),
                xf >= 10.0 * xa && xf > 0.0,
            ));
            let c = counts(fcp);
            checks.push(check("adverse GEN1, fcp", "5 ± 1", c[0].to_string(), c[0] >= 4));
        }
    }
    {
        let worst = achp
            .summary
            .iterations
            .iter()
            .map(|m| m.producer_cost_norm)
            .fold(f64::NEG_INFINITY, f64::max);
        let gap = config.sim.rel_gap;
        checks.push(check(
            "achp producer cost / competitive, max",
            format!("≤ 1 + {gap}"),
            format!("{worst:.6}"),
            worst <= 1.0 + gap + 1e-9,
        ));
    }

    println!("{} (seed {seed}, {iterations} iterations)", scenario.name());
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(10);
    for c in &checks {
        println!(
            "  {:<width$}  target {:<16} observed {:<20} {}",
            c.name,
            c.target,
            c.observed,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    println!("  {passed}/{} checks passed", checks.len());
    Ok(())
}
