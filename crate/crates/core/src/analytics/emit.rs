//! CSV tables and SVG charts for a finished run.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use super::{group_of, RunSummary};
use crate::error::{Error, Result};
use crate::learning::IterationLog;
use crate::market_data::MarketCase;
use crate::strategy::StrategyTag;

/// Every file [`emit`] writes, relative to the output directory.
pub const ARTIFACT_FILES: [&str; 16] = [
    "consumer_cost.csv",
    "producer_cost.csv",
    "producer_profit.csv",
    "mwp.csv",
    "loc.csv",
    "prices.csv",
    "strategies.csv",
    "market_share_count.csv",
    "market_share_mw.csv",
    "adverse_report.csv",
    "adverse_counts.csv",
    "profit_duration.csv",
    "prices.svg",
    "profit_duration.svg",
    "market_share.svg",
    "normalized_costs.svg",
];

fn writer(dir: &Path, name: &str) -> Result<(csv::Writer<fs::File>, PathBuf)> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((csv::Writer::from_writer(file), path))
}

fn finish(mut w: csv::Writer<fs::File>, path: PathBuf, written: &mut Vec<PathBuf>) -> Result<()> {
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write all tables and charts under `out_dir`; returns the paths written.
pub fn emit(summary: &RunSummary, log: &IterationLog, case: &MarketCase, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    let tags = StrategyTag::ALL.map(|t| t.name());

    type Series = fn(&super::IterationMetrics) -> [f64; 2];
    let series: [(&str, [&str; 2], Series); 4] = [
        ("consumer_cost.csv", ["consumer_cost", "normalized"], |m| [m.consumer_cost, m.consumer_cost_norm]),
        ("producer_cost.csv", ["producer_cost", "normalized"], |m| [m.producer_cost, m.producer_cost_norm]),
        ("producer_profit.csv", ["producer_profit", "normalized"], |m| [m.producer_profit, m.producer_profit_norm]),
        ("loc.csv", ["loc0_total", "loc_display_total"], |m| [m.loc0_total, m.loc_display_total]),
    ];
    for (name, header, get) in series {
        let (mut w, path) = writer(out_dir, name)?;
        w.write_record(["iteration", header[0], header[1]])?;
        for m in &summary.iterations {
            let [a, b] = get(m);
            w.write_record([m.iteration.to_string(), a.to_string(), b.to_string()])?;
        }
        finish(w, path, &mut written)?;
    }

    let (mut w, path) = writer(out_dir, "mwp.csv")?;
    w.write_record(["iteration", "mwp_total"])?;
    for m in &summary.iterations {
        w.write_record([m.iteration.to_string(), m.mwp_total.to_string()])?;
    }
    finish(w, path, &mut written)?;

    let horizon = case.horizon();
    let (mut w, path) = writer(out_dir, "prices.csv")?;
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=horizon).map(|t| format!("t{t}")));
    w.write_record(&header)?;
    for r in &log.records {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.prices.iter().map(|p| p.to_string()));
        w.write_record(&row)?;
    }
    finish(w, path, &mut written)?;

    let (mut w, path) = writer(out_dir, "strategies.csv")?;
    let mut header = vec!["iteration".to_string()];
    header.extend(log.gen_ids.iter().cloned());
    w.write_record(&header)?;
    for r in &log.records {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.strategies.iter().map(|t| t.name().to_string()));
        w.write_record(&row)?;
    }
    finish(w, path, &mut written)?;

    for (name, get) in [
        ("market_share_count.csv", (|m: &super::IterationMetrics| m.share_count) as fn(&_) -> [f64; 3]),
        ("market_share_mw.csv", |m| m.share_mw),
    ] {
        let (mut w, path) = writer(out_dir, name)?;
        w.write_record(["iteration", tags[0], tags[1], tags[2]])?;
        for m in &summary.iterations {
            let s = get(m);
            w.write_record([m.iteration.to_string(), s[0].to_string(), s[1].to_string(), s[2].to_string()])?;
        }
        finish(w, path, &mut written)?;
    }

    let (mut w, path) = writer(out_dir, "adverse_report.csv")?;
    w.write_record([
        "gen_id", "capacity_mw", "n_economic", "n_self_commit", "n_self_schedule", "mean_economic",
        "mean_self_commit", "mean_self_schedule", "sd_economic", "sd_self_commit", "sd_self_schedule",
        "t_self_commit", "p_self_commit", "t_self_schedule", "p_self_schedule", "adverse_self_commit",
        "adverse_self_schedule", "adverse", "excess_profit",
    ])?;
    for g in &summary.adverse.generators {
        let t = |k: usize| g.tests[k].test();
        w.write_record([
            g.gen_id.clone(),
            g.capacity.to_string(),
            g.counts[0].to_string(),
            g.counts[1].to_string(),
            g.counts[2].to_string(),
            opt(g.means[0]),
            opt(g.means[1]),
            opt(g.means[2]),
            opt(g.std_devs[0]),
            opt(g.std_devs[1]),
            opt(g.std_devs[2]),
            opt(t(0).map(|x| x.t)),
            opt(t(0).map(|x| x.p)),
            opt(t(1).map(|x| x.t)),
            opt(t(1).map(|x| x.p)),
            g.adverse[0].to_string(),
            g.adverse[1].to_string(),
            g.is_adverse().to_string(),
            g.excess_profit.to_string(),
        ])?;
    }
    finish(w, path, &mut written)?;

    let (mut w, path) = writer(out_dir, "adverse_counts.csv")?;
    w.write_record(["group", "self_commit", "self_schedule", "unique", "unique_mw"])?;
    for (group, c) in summary.adverse.by_group() {
        w.write_record([
            group,
            c.self_commit.to_string(),
            c.self_schedule.to_string(),
            c.unique.to_string(),
            c.unique_mw.to_string(),
        ])?;
    }
    finish(w, path, &mut written)?;

    let duration = profit_duration(log, case);
    let (mut w, path) = writer(out_dir, "profit_duration.csv")?;
    w.write_record([
        "rank", "gen_id", "group", "competitive_profit", "deviation_economic", "deviation_self_commit",
        "deviation_self_schedule",
    ])?;
    for (rank, row) in duration.iter().enumerate() {
        w.write_record([
            (rank + 1).to_string(),
            row.gen_id.clone(),
            group_of(&row.gen_id).to_string(),
            row.competitive.to_string(),
            opt(row.deviation[0]),
            opt(row.deviation[1]),
            opt(row.deviation[2]),
        ])?;
    }
    finish(w, path, &mut written)?;

    written.push(chart_prices(log, horizon, &out_dir.join("prices.svg"))?);
    written.push(chart_profit_duration(&duration, &out_dir.join("profit_duration.svg"))?);
    written.push(chart_market_share(summary, &out_dir.join("market_share.svg"))?);
    written.push(chart_normalized_costs(summary, &out_dir.join("normalized_costs.svg"))?);
    Ok(written)
}

struct DurationRow {
    gen_id: String,
    competitive: f64,
    /// Mean payoff under each strategy minus competitive profit.
    deviation: [Option<f64>; 3],
}

/// Thermal units sorted by competitive profit, highest first (stable by id order).
fn profit_duration(log: &IterationLog, case: &MarketCase) -> Vec<DurationRow> {
    let base = log.competitive().expect("log is never empty");
    let mut rows: Vec<DurationRow> = case
        .thermal()
        .map(|(g, gen)| {
            let competitive = base.settlements[g].profit;
            let deviation = StrategyTag::ALL.map(|tag| {
                let p = log.payoffs(g, tag);
                (!p.is_empty()).then(|| p.iter().sum::<f64>() / p.len() as f64 - competitive)
            });
            DurationRow {
                gen_id: gen.id.clone(),
                competitive,
                deviation,
            }
        })
        .collect();
    rows.sort_by(|a, b| b.competitive.total_cmp(&a.competitive));
    rows
}

fn chart_err<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::Chart(format!("{}: {e}", path.display()))
}

fn padded(lo: f64, hi: f64) -> Range<f64> {
    let (lo, hi) = if lo.is_finite() && hi.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let pad = ((hi - lo) * 0.05).max(1e-6 * hi.abs().max(1.0));
    (lo - pad)..(hi + pad)
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

const PALETTE: [RGBColor; 4] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(120, 120, 120)];

fn line_chart(path: &Path, title: &str, x: Range<f64>, lines: &[(&str, Vec<(f64, f64)>)]) -> Result<PathBuf> {
    let err = chart_err(path);
    let (lo, hi) = bounds(lines.iter().flat_map(|(_, pts)| pts.iter().map(|(_, y)| y)));
    let root = SVGBackend::new(path, (900, 520)).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(x, padded(lo, hi))
        .map_err(&err)?;
    chart.configure_mesh().draw().map_err(&err)?;
    for (i, (label, points)) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(points.iter().copied().filter(|(_, y)| y.is_finite()), &color))
            .map_err(&err)?
            .label(*label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(&err)?;
    root.present().map_err(&err)?;
    Ok(path.to_path_buf())
}

/// Per-period price band over all iterations, with the competitive price.
fn chart_prices(log: &IterationLog, horizon: usize, path: &Path) -> Result<PathBuf> {
    let mut lo = vec![f64::INFINITY; horizon];
    let mut hi = vec![f64::NEG_INFINITY; horizon];
    let mut mean = vec![0.0; horizon];
    for r in &log.records {
        for (t, &p) in r.prices.iter().enumerate() {
            lo[t] = lo[t].min(p);
            hi[t] = hi[t].max(p);
            mean[t] += p / log.records.len() as f64;
        }
    }
    let base = &log.records[0].prices;
    let pts = |v: &[f64]| v.iter().enumerate().map(|(t, &y)| ((t + 1) as f64, y)).collect::<Vec<_>>();
    line_chart(
        path,
        "Price by period",
        0.5..horizon as f64 + 0.5,
        &[("mean", pts(&mean)), ("max", pts(&hi)), ("min", pts(&lo)), ("competitive", pts(base))],
    )
}

fn chart_profit_duration(rows: &[DurationRow], path: &Path) -> Result<PathBuf> {
    let mut lines = vec![(
        "competitive",
        rows.iter().enumerate().map(|(i, r)| ((i + 1) as f64, r.competitive)).collect::<Vec<_>>(),
    )];
    for tag in StrategyTag::ALL {
        lines.push((
            tag.name(),
            rows.iter()
                .enumerate()
                .filter_map(|(i, r)| r.deviation[tag.index()].map(|d| ((i + 1) as f64, r.competitive + d)))
                .collect(),
        ));
    }
    line_chart(path, "Profit by generator (sorted by competitive profit)", 0.5..rows.len().max(1) as f64 + 0.5, &lines)
}

fn chart_market_share(summary: &RunSummary, path: &Path) -> Result<PathBuf> {
    let n = summary.iterations.len().max(2) as f64;
    let lines: Vec<_> = StrategyTag::ALL
        .iter()
        .map(|tag| {
            (
                tag.name(),
                summary.iterations.iter().map(|m| (m.iteration as f64, m.share_mw[tag.index()])).collect(),
            )
        })
        .collect();
    line_chart(path, "Market share by strategy (% of MW)", 0.0..n - 1.0, &lines)
}

fn chart_normalized_costs(summary: &RunSummary, path: &Path) -> Result<PathBuf> {
    let n = summary.iterations.len().max(2) as f64;
    let series = |f: fn(&super::IterationMetrics) -> f64| {
        summary.iterations.iter().map(|m| (m.iteration as f64, f(m))).collect::<Vec<_>>()
    };
    line_chart(
        path,
        "Costs normalized by the competitive solution",
        0.0..n - 1.0,
        &[
            ("consumer cost", series(|m| m.consumer_cost_norm)),
            ("producer cost", series(|m| m.producer_cost_norm)),
        ],
    )
}
