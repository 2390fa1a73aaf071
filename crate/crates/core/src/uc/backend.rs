//! Solver backends. The crate talks to MILP/LP engines only through
//! [`SolverBackend`]; fixing and relaxation are expressed on the
//! [`LinearModel`] itself before it reaches a backend.

use std::num::NonZeroU32;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use super::model::LinearModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMode {
    /// Respect integrality; stop at the given relative/absolute gaps.
    Mip { rel_gap: f64, abs_gap: f64 },
    /// Treat every column as continuous and return row duals.
    Lp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveRequest {
    pub mode: SolveMode,
    /// Seconds.
    pub time_limit: Option<f64>,
}

impl SolveRequest {
    pub fn mip(rel_gap: f64) -> Self {
        SolveRequest {
            mode: SolveMode::Mip { rel_gap, abs_gap: 1e-6 },
            time_limit: None,
        }
    }

    pub fn lp() -> Self {
        SolveRequest {
            mode: SolveMode::Lp,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RawSolution {
    pub columns: Vec<f64>,
    /// Marginal objective change per unit increase of each row's bound.
    pub row_duals: Vec<f64>,
    pub objective: f64,
    pub mip_gap: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("model is infeasible")]
    Infeasible,
    #[error("model is unbounded")]
    Unbounded,
    #[error("time limit reached ({})", if .incumbent.is_some() { "incumbent available" } else { "no incumbent" })]
    TimeLimit { incumbent: Option<Box<RawSolution>> },
    #[error("solver failure: {0}")]
    Failed(String),
}

pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &LinearModel, request: &SolveRequest) -> Result<RawSolution, SolverError>;
}

/// Environment variable naming the backend.
pub const SOLVER_ENV: &str = "UCMARKET_SOLVER";

/// Backend chosen by [`SOLVER_ENV`]; HiGHS when unset.
pub fn backend_from_env() -> Result<Box<dyn SolverBackend>, SolverError> {
    match std::env::var(SOLVER_ENV).ok().as_deref() {
        None | Some("") | Some("highs") => Ok(Box::new(HighsBackend::default())),
        Some(other) => Err(SolverError::Failed(format!(
            "unknown solver backend `{other}` in {SOLVER_ENV} (available: highs)"
        ))),
    }
}

/// HiGHS through the `highs` crate. Each solve builds its own HiGHS
/// instance, so one backend value can serve concurrent solves.
#[derive(Clone, Debug)]
pub struct HighsBackend {
    pub threads: NonZeroU32,
    /// HiGHS presolve on MIP solves. Off by default: on these small,
    /// symmetric commitment models it costs more than it saves.
    pub mip_presolve: bool,
}

impl Default for HighsBackend {
    fn default() -> Self {
        HighsBackend {
            threads: NonZeroU32::new(1).unwrap(),
            mip_presolve: false,
        }
    }
}

impl SolverBackend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &LinearModel, request: &SolveRequest) -> Result<RawSolution, SolverError> {
        let mip = matches!(request.mode, SolveMode::Mip { .. });
        let mut problem = RowProblem::default();
        let cols: Vec<_> = model
            .columns
            .iter()
            .map(|c| {
                if mip && c.integer {
                    problem.add_integer_column(c.cost, c.lower..=c.upper)
                } else {
                    problem.add_column(c.cost, c.lower..=c.upper)
                }
            })
            .collect();
        for row in &model.rows {
            let coeffs: Vec<_> = row.coeffs.iter().map(|&(j, a)| (cols[j], a)).collect();
            problem.add_row(row.lower..=row.upper, coeffs);
        }

        let mut highs = problem.optimise(Sense::Minimise);
        highs.make_quiet();
        highs.set_threads(self.threads);
        if let SolveMode::Mip { rel_gap, abs_gap } = request.mode {
            highs.set_option("mip_rel_gap", rel_gap);
            highs.set_option("mip_abs_gap", abs_gap);
            if !self.mip_presolve {
                highs.set_option("presolve", "off");
            }
        }
        if let Some(limit) = request.time_limit {
            highs.set_option("time_limit", limit);
        }
        let solved = highs
            .try_solve()
            .map_err(|status| SolverError::Failed(format!("{status:?}")))?;

        let extract = |solved: &highs::SolvedModel| {
            let solution = solved.get_solution();
            RawSolution {
                columns: solution.columns().to_vec(),
                row_duals: solution.dual_rows().to_vec(),
                objective: solved.objective_value(),
                mip_gap: if mip { solved.mip_gap() } else { 0.0 },
            }
        };
        match solved.status() {
            HighsModelStatus::Optimal => Ok(extract(&solved)),
            HighsModelStatus::ModelEmpty => Ok(RawSolution {
                columns: vec![],
                row_duals: vec![0.0; model.rows.len()],
                objective: 0.0,
                mip_gap: 0.0,
            }),
            HighsModelStatus::Infeasible => Err(SolverError::Infeasible),
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => {
                Err(SolverError::Unbounded)
            }
            HighsModelStatus::ReachedTimeLimit => {
                let incumbent = (solved.primal_solution_status() == HighsSolutionStatus::Feasible)
                    .then(|| Box::new(extract(&solved)));
                Err(SolverError::TimeLimit { incumbent })
            }
            other => Err(SolverError::Failed(format!("HiGHS status {other:?}"))),
        }
    }
}
