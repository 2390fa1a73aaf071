//! Unit-commitment MILP: construction from a case and a set of offers, and
//! the three solves the market needs (integer, binaries fixed, binaries
//! relaxed).
//!
//! Periods are 0-based in code. Startup at the first period is governed by
//! the initial status only; ramp and tightening rows couple consecutive
//! periods and vanish for a one-period horizon.

mod backend;
mod lp_format;
mod model;

use crate::error::{Error, Result};
use crate::market_data::{GeneratorTech, MarketCase};
use crate::strategy::{OfferCurve, PeriodOffer};

pub use backend::{backend_from_env, HighsBackend, RawSolution, SolveMode, SolveRequest, SolverBackend, SolverError, SOLVER_ENV};
pub use lp_format::to_lp_string;
pub use model::{Column, LinearModel, Row, RowFamily, VarKind};

/// Default relative MIP gap (0.01 %).
pub const DEFAULT_REL_GAP: f64 = 1e-4;

/// Distance from an integer beyond which a MIP binary is rejected.
pub const BINARY_TOLERANCE: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UcOptions {
    /// Emit the valid inequalities that tighten the LP relaxation.
    pub tightening: bool,
    /// Emit the two-period ramp inequalities.
    pub ramping: bool,
}

impl Default for UcOptions {
    fn default() -> Self {
        UcOptions {
            tightening: true,
            ramping: true,
        }
    }
}

/// Column indices of one generator's variables. Commitment vectors are
/// empty for VRE units.
#[derive(Clone, Debug, Default)]
pub struct GenVars {
    pub p: Vec<usize>,
    pub rho: Vec<Vec<usize>>,
    pub u: Vec<usize>,
    pub z: Vec<usize>,
    pub y: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct UcProblem {
    pub model: LinearModel,
    pub horizon: usize,
    pub gens: Vec<GenVars>,
    pub non_served: Vec<usize>,
    /// Power-balance row for each period; their duals are the prices.
    pub balance_rows: Vec<usize>,
}

/// Per-period data for emitting one generator's constraint block.
pub(crate) struct BlockSpec<'a> {
    pub gen: &'a GeneratorTech,
    pub index: usize,
    pub periods: &'a [PeriodOffer],
    /// Extra cost on the dispatch column per period (used for the
    /// single-unit profit problem).
    pub dispatch_cost: Option<&'a [f64]>,
}

fn col(model: &mut LinearModel, kind: VarKind, gen: usize, t: usize, lower: f64, upper: f64, cost: f64, integer: bool) -> usize {
    model.add_column(Column {
        lower,
        upper,
        cost,
        integer,
        kind,
        gen: Some(gen),
        period: t,
    })
}

fn row(model: &mut LinearModel, family: RowFamily, gen: usize, t: usize, lower: f64, upper: f64, coeffs: Vec<(usize, f64)>) {
    model.add_row(Row {
        lower,
        upper,
        coeffs,
        family,
        gen: Some(gen),
        period: t,
    });
}

const INF: f64 = f64::INFINITY;

/// Emit columns and rows for one generator.
pub(crate) fn emit_generator(model: &mut LinearModel, spec: &BlockSpec<'_>, opts: &UcOptions) -> GenVars {
    let g = spec.index;
    let gen = spec.gen;
    let horizon = spec.periods.len();
    let p_max = gen.p_max();
    let mut vars = GenVars::default();

    for (t, offer) in spec.periods.iter().enumerate() {
        let extra = spec.dispatch_cost.map_or(0.0, |c| c[t]);
        let p = col(model, VarKind::Dispatch, g, t, 0.0, gen.available(t), extra, false);
        let rho: Vec<usize> = offer
            .steps
            .iter()
            .enumerate()
            .map(|(s, step)| col(model, VarKind::Step(s as u16), g, t, 0.0, step.cap, step.cost, false))
            .collect();
        let mut coeffs: Vec<(usize, f64)> = rho.iter().map(|&j| (j, 1.0)).collect();
        coeffs.push((p, -1.0));
        row(model, RowFamily::StepSum, g, t, 0.0, 0.0, coeffs);
        vars.p.push(p);
        vars.rho.push(rho);
    }
    if !gen.is_thermal() {
        return vars;
    }

    for (t, offer) in spec.periods.iter().enumerate() {
        vars.u.push(col(model, VarKind::Commit, g, t, 0.0, 1.0, offer.no_load_cost, true));
        vars.z.push(col(model, VarKind::Startup, g, t, 0.0, 1.0, offer.startup_cost, true));
        vars.y.push(col(model, VarKind::Shutdown, g, t, 0.0, 1.0, 0.0, true));
    }
    let (p, u, z, y) = (&vars.p, &vars.u, &vars.z, &vars.y);

    for t in 0..horizon {
        row(model, RowFamily::StartStopExclusive, g, t, -INF, 1.0, vec![(z[t], 1.0), (y[t], 1.0)]);
        if t > 0 {
            row(model, RowFamily::StatusLogic, g, t, 0.0, 0.0, vec![(u[t], 1.0), (u[t - 1], -1.0), (z[t], -1.0), (y[t], 1.0)]);
        }
    }
    if gen.init_status {
        row(model, RowFamily::InitialState, g, 0, 0.0, 0.0, vec![(z[0], 1.0)]);
        row(model, RowFamily::InitialState, g, 0, 1.0, 1.0, vec![(y[0], 1.0), (u[0], 1.0)]);
    } else {
        row(model, RowFamily::InitialState, g, 0, 0.0, 0.0, vec![(z[0], 1.0), (u[0], -1.0)]);
        row(model, RowFamily::InitialState, g, 0, 0.0, 0.0, vec![(y[0], 1.0)]);
    }

    let min_on = gen.min_on as usize;
    let min_off = gen.min_off as usize;
    for t in 0..horizon.saturating_sub(1) {
        if min_on > 1 {
            let last = (t + min_on - 1).min(horizon - 1);
            let mut coeffs = vec![(z[t], 1.0)];
            coeffs.extend((t + 1..=last).map(|k| (y[k], 1.0)));
            row(model, RowFamily::MinOn, g, t, -INF, 1.0, coeffs);
        }
        if min_off > 1 {
            let last = (t + min_off - 1).min(horizon - 1);
            let mut coeffs = vec![(y[t], 1.0)];
            coeffs.extend((t + 1..=last).map(|k| (z[k], 1.0)));
            row(model, RowFamily::MinOff, g, t, -INF, 1.0, coeffs);
        }
    }

    for t in 0..horizon {
        row(model, RowFamily::MinOutput, g, t, -INF, 0.0, vec![(u[t], gen.p_min), (p[t], -1.0)]);
        for (s, &rho) in vars.rho[t].iter().enumerate() {
            let cap = spec.periods[t].steps[s].cap;
            row(model, RowFamily::StepCapacity, g, t, -INF, 0.0, vec![(rho, 1.0), (u[t], -cap)]);
        }
    }

    if opts.ramping {
        let pm = gen.p_min;
        let (ru, rd) = (gen.ramp_up, gen.ramp_down);
        for t in 1..horizon {
            row(model, RowFamily::RampUp, g, t, -INF, 0.0, vec![
                (p[t], 1.0), (p[t - 1], -1.0), (u[t], -(pm + ru)), (u[t - 1], pm), (z[t], ru),
            ]);
            row(model, RowFamily::RampDown, g, t, -INF, 0.0, vec![
                (p[t - 1], 1.0), (p[t], -1.0), (u[t - 1], -(pm + rd)), (u[t], pm), (y[t], rd),
            ]);
        }
    }

    if opts.tightening && horizon >= 2 {
        let span = p_max - gen.p_min;
        let last = horizon - 1;
        let mut tight = |t: usize, startup: bool, shutdown_next: bool| {
            let mut coeffs = vec![(p[t], 1.0), (u[t], -p_max)];
            if startup {
                coeffs.push((z[t], span));
            }
            if shutdown_next {
                coeffs.push((y[t + 1], span));
            }
            row(model, RowFamily::Tightening, g, t, -INF, 0.0, coeffs);
        };
        tight(0, false, true);
        for t in 1..last {
            if min_on >= 2 {
                tight(t, true, true);
            } else {
                tight(t, true, false);
                tight(t, false, true);
            }
        }
        tight(last, true, false);
    }
    vars
}

fn check_offers(case: &MarketCase, offers: &[OfferCurve]) -> Result<()> {
    if offers.len() != case.generators.len() {
        return Err(Error::Build(format!(
            "{} offers for {} generators",
            offers.len(),
            case.generators.len()
        )));
    }
    for (gen, offer) in case.generators.iter().zip(offers) {
        if offer.periods.len() != case.horizon() {
            return Err(Error::Build(format!(
                "offer for `{}` covers {} periods, horizon is {}",
                gen.id,
                offer.periods.len(),
                case.horizon()
            )));
        }
        let cap = gen.p_max();
        for (t, period) in offer.periods.iter().enumerate() {
            let offered: f64 = period.steps.iter().map(|s| s.cap).sum();
            if (offered - cap).abs() > 1e-6 * cap.max(1.0) {
                return Err(Error::Build(format!(
                    "offer for `{}` in period {} totals {offered} MW, capacity is {cap} MW",
                    gen.id,
                    t + 1
                )));
            }
        }
    }
    Ok(())
}

/// Build the market clearing problem for `offers` (one per generator, in
/// case order).
pub fn build_uc(case: &MarketCase, offers: &[OfferCurve], opts: &UcOptions) -> Result<UcProblem> {
    check_offers(case, offers)?;
    let horizon = case.horizon();
    let mut model = LinearModel {
        gen_ids: case.generators.iter().map(|g| g.id.clone()).collect(),
        ..Default::default()
    };
    let gens: Vec<GenVars> = case
        .generators
        .iter()
        .zip(offers)
        .enumerate()
        .map(|(index, (gen, offer))| {
            let spec = BlockSpec {
                gen,
                index,
                periods: &offer.periods,
                dispatch_cost: None,
            };
            emit_generator(&mut model, &spec, opts)
        })
        .collect();

    let mut non_served = Vec::with_capacity(horizon);
    let mut balance_rows = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let n = model.add_column(Column {
            lower: 0.0,
            upper: INF,
            cost: case.voll,
            integer: false,
            kind: VarKind::NonServed,
            gen: None,
            period: t,
        });
        let mut coeffs: Vec<(usize, f64)> = gens.iter().map(|v| (v.p[t], 1.0)).collect();
        coeffs.push((n, 1.0));
        let d = case.demand.at(t);
        balance_rows.push(model.add_row(Row {
            lower: d,
            upper: d,
            coeffs,
            family: RowFamily::Balance,
            gen: None,
            period: t,
        }));
        non_served.push(n);
    }
    Ok(UcProblem {
        model,
        horizon,
        gens,
        non_served,
        balance_rows,
    })
}

/// A generator's slice of a solution.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSchedule {
    pub p: Vec<f64>,
    pub u: Vec<bool>,
    pub z: Vec<bool>,
}

impl GenSchedule {
    pub fn off(horizon: usize) -> Self {
        GenSchedule {
            p: vec![0.0; horizon],
            u: vec![false; horizon],
            z: vec![false; horizon],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UcSolution {
    /// `[generator][period]`, MW.
    pub dispatch: Vec<Vec<f64>>,
    /// `[generator][period][step]`, MW.
    pub steps: Vec<Vec<Vec<f64>>>,
    /// `[generator][period]`; exactly 0.0 or 1.0 for MIP solutions, empty for VRE.
    pub commitment: Vec<Vec<f64>>,
    pub startup: Vec<Vec<f64>>,
    pub shutdown: Vec<Vec<f64>>,
    pub non_served: Vec<f64>,
    pub objective: f64,
    pub mip_gap_achieved: f64,
}

impl UcSolution {
    fn from_raw(problem: &UcProblem, values: &[f64], objective: f64, mip_gap: f64) -> Self {
        let pick = |idx: &Vec<usize>| idx.iter().map(|&j| values[j]).collect::<Vec<f64>>();
        UcSolution {
            dispatch: problem.gens.iter().map(|v| pick(&v.p)).collect(),
            steps: problem.gens.iter().map(|v| v.rho.iter().map(pick).collect()).collect(),
            commitment: problem.gens.iter().map(|v| pick(&v.u)).collect(),
            startup: problem.gens.iter().map(|v| pick(&v.z)).collect(),
            shutdown: problem.gens.iter().map(|v| pick(&v.y)).collect(),
            non_served: pick(&problem.non_served),
            objective,
            mip_gap_achieved: mip_gap,
        }
    }

    pub fn horizon(&self) -> usize {
        self.non_served.len()
    }

    pub fn is_on(&self, g: usize, t: usize) -> bool {
        match self.commitment[g].get(t) {
            Some(&u) => u > 0.5,
            None => self.dispatch[g][t] > 0.0,
        }
    }

    pub fn schedule(&self, g: usize) -> GenSchedule {
        let horizon = self.horizon();
        GenSchedule {
            p: self.dispatch[g].clone(),
            u: (0..horizon).map(|t| self.is_on(g, t)).collect(),
            z: (0..horizon)
                .map(|t| self.startup[g].get(t).is_some_and(|&z| z > 0.5))
                .collect(),
        }
    }

    /// Commitment pattern as a flat key, for comparing configurations.
    pub fn commitment_key(&self) -> Vec<bool> {
        self.commitment.iter().flatten().map(|&u| u > 0.5).collect()
    }
}

/// Solve the MILP to `rel_gap` and snap binaries to exact 0/1.
pub fn solve_mip(problem: &UcProblem, backend: &dyn SolverBackend, rel_gap: f64) -> Result<UcSolution> {
    let raw = backend.solve(&problem.model, &SolveRequest::mip(rel_gap))?;
    let mut values = raw.columns;
    for j in problem.model.integer_columns() {
        let v = values[j];
        let r = v.round();
        if (v - r).abs() >= BINARY_TOLERANCE {
            return Err(Error::Consistency(format!(
                "binary {} = {v} is not integral",
                problem.model.column_name(j)
            )));
        }
        values[j] = r;
    }
    Ok(UcSolution::from_raw(problem, &values, raw.objective, raw.mip_gap))
}

/// LP solution with balance-row duals.
#[derive(Clone, Debug, PartialEq)]
pub struct LpPricing {
    pub solution: UcSolution,
    /// Dual of each period's balance row, $/MWh.
    pub lambda: Vec<f64>,
    pub objective: f64,
}

fn lp_with_duals(problem: &UcProblem, model: &LinearModel, backend: &dyn SolverBackend) -> Result<LpPricing> {
    let raw = backend.solve(model, &SolveRequest::lp())?;
    let lambda = problem.balance_rows.iter().map(|&i| raw.row_duals[i]).collect();
    Ok(LpPricing {
        solution: UcSolution::from_raw(problem, &raw.columns, raw.objective, 0.0),
        lambda,
        objective: raw.objective,
    })
}

/// Fix every binary at its value in `fixed`, relax integrality, and solve.
pub fn solve_fixed_lp(problem: &UcProblem, backend: &dyn SolverBackend, fixed: &UcSolution) -> Result<LpPricing> {
    let mut model = problem.model.clone();
    let pinned = |family: &Vec<Vec<f64>>, idx: &Vec<usize>, g: usize| -> Result<Vec<(usize, f64)>> {
        let values = family.get(g).filter(|v| v.len() == idx.len()).ok_or_else(|| {
            Error::Build("fixed configuration does not match problem".into())
        })?;
        Ok(idx.iter().copied().zip(values.iter().copied()).collect())
    };
    for (g, vars) in problem.gens.iter().enumerate() {
        for (j, v) in pinned(&fixed.commitment, &vars.u, g)?
            .into_iter()
            .chain(pinned(&fixed.startup, &vars.z, g)?)
            .chain(pinned(&fixed.shutdown, &vars.y, g)?)
        {
            if (v - v.round()).abs() >= BINARY_TOLERANCE {
                return Err(Error::Build(format!("fixed value {v} is not binary")));
            }
            model.columns[j].lower = v.round();
            model.columns[j].upper = v.round();
        }
    }
    lp_with_duals(problem, &model, backend).map_err(|e| match e {
        Error::Solver(SolverError::Infeasible) => {
            Error::Consistency("fixed commitment is infeasible for this problem".into())
        }
        other => other,
    })
}

/// Relax every binary to [0, 1] and solve.
pub fn solve_relaxed_lp(problem: &UcProblem, backend: &dyn SolverBackend) -> Result<LpPricing> {
    lp_with_duals(problem, &problem.model, backend)
}
