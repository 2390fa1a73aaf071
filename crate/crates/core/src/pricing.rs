//! Uniform energy prices from a cleared market.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::uc::{solve_fixed_lp, solve_relaxed_lp, SolverBackend, UcProblem, UcSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PricingModel {
    /// Duals with commitment fixed at the cleared values.
    Fcp,
    /// Duals of the integrality-relaxed problem.
    Achp,
}

impl PricingModel {
    pub const ALL: [PricingModel; 2] = [Self::Fcp, Self::Achp];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fcp => "fcp",
            Self::Achp => "achp",
        }
    }
}

impl fmt::Display for PricingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PricingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fcp" => Ok(Self::Fcp),
            "achp" => Ok(Self::Achp),
            _ => Err(Error::Config(format!("unknown pricing model `{s}` (expected fcp or achp)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub model: PricingModel,
    pub lambda: Vec<f64>,
}

impl PriceSeries {
    pub fn horizon(&self) -> usize {
        self.lambda.len()
    }
}

/// Price a cleared market. The aCHP path ignores `mip_solution`.
pub fn price(
    model: PricingModel,
    problem: &UcProblem,
    mip_solution: &UcSolution,
    backend: &dyn SolverBackend,
) -> Result<PriceSeries> {
    let lp = match model {
        PricingModel::Fcp => solve_fixed_lp(problem, backend, mip_solution)?,
        PricingModel::Achp => solve_relaxed_lp(problem, backend)?,
    };
    if let Some(t) = lp.lambda.iter().position(|l| !l.is_finite()) {
        return Err(Error::Consistency(format!("non-finite price in period {}", t + 1)));
    }
    Ok(PriceSeries {
        model,
        lambda: lp.lambda,
    })
}
