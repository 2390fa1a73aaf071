use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AgentState, SimConfig};
use crate::error::{Error, Result};
use crate::settlement::SettlementRecord;
use crate::strategy::StrategyTag;

/// Outcome of one market clearing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Strategy per generator, case order.
    pub strategies: Vec<StrategyTag>,
    /// SHA-256 over the submitted offers.
    pub offers_digest: String,
    pub prices: Vec<f64>,
    pub objective: f64,
    pub mip_gap: f64,
    pub non_served: f64,
    /// Energy payments plus make-whole payments.
    pub consumer_cost: f64,
    /// Total true production cost.
    pub producer_cost: f64,
    /// Total profit including make-whole payments.
    pub producer_profit: f64,
    pub mwp_total: f64,
    pub loc0_total: f64,
    pub loc_display_total: f64,
    /// `[generator][period]`, MW.
    pub dispatch: Vec<Vec<f64>>,
    pub settlements: Vec<SettlementRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub case_name: String,
    pub config: SimConfig,
    pub gen_ids: Vec<String>,
    /// `records[0]` is the competitive (all-economic) solution.
    pub records: Vec<IterationRecord>,
    /// Agent memories at the end of the run.
    pub agents: Vec<AgentState>,
}

impl IterationLog {
    pub fn competitive(&self) -> Option<&IterationRecord> {
        self.records.first()
    }

    /// Realized payoffs of generator `g` under `tag`, in iteration order.
    pub fn payoffs(&self, g: usize, tag: StrategyTag) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.strategies[g] == tag)
            .map(|r| r.settlements[g].profit)
            .collect()
    }
}

/// Receives iteration records as they are produced.
pub trait IterationSink {
    fn write(&mut self, record: &IterationRecord) -> Result<()>;
    fn flush(&mut self) -> Result<()>;
}

impl IterationSink for Vec<IterationRecord> {
    fn write(&mut self, record: &IterationRecord) -> Result<()> {
        self.push(record.clone());
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// One JSON object per line.
pub struct JsonlSink {
    path: PathBuf,
    out: BufWriter<File>,
}

impl JsonlSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(JsonlSink {
            path,
            out: BufWriter::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl IterationSink for JsonlSink {
    fn write(&mut self, record: &IterationRecord) -> Result<()> {
        let line = serde_json::to_string(record).expect("records serialize");
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
