//! Solver-neutral linear model: bounded columns, ranged rows, linear objective.

use std::collections::BTreeMap;

/// What a column represents. Used for naming and for bulk fixing/relaxing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Dispatch,
    Step(u16),
    Commit,
    Startup,
    Shutdown,
    NonServed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowFamily {
    Balance,
    StepSum,
    StartStopExclusive,
    StatusLogic,
    InitialState,
    MinOn,
    MinOff,
    MinOutput,
    StepCapacity,
    RampUp,
    RampDown,
    Tightening,
}

#[derive(Clone, Debug)]
pub struct Column {
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub integer: bool,
    pub kind: VarKind,
    /// Generator index, `None` for system columns.
    pub gen: Option<usize>,
    pub period: usize,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub lower: f64,
    pub upper: f64,
    pub coeffs: Vec<(usize, f64)>,
    pub family: RowFamily,
    pub gen: Option<usize>,
    pub period: usize,
}

#[derive(Clone, Debug, Default)]
pub struct LinearModel {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    /// Generator ids, for naming only.
    pub gen_ids: Vec<String>,
}

impl LinearModel {
    pub fn add_column(&mut self, column: Column) -> usize {
        self.columns.push(column);
        self.columns.len() - 1
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn integer_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.columns.iter().enumerate().filter(|(_, c)| c.integer).map(|(i, _)| i)
    }

    /// Rows per family, for structural checks.
    pub fn family_counts(&self) -> BTreeMap<RowFamily, usize> {
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            *counts.entry(row.family).or_insert(0) += 1;
        }
        counts
    }

    pub fn rows_of(&self, family: RowFamily, gen: Option<usize>) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.family == family && r.gen == gen)
    }

    /// Objective value of a column assignment.
    pub fn objective_of(&self, values: &[f64]) -> f64 {
        self.columns.iter().zip(values).map(|(c, v)| c.cost * v).sum()
    }

    /// Largest bound or row violation of an assignment.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, v) in self.columns.iter().zip(values) {
            worst = worst.max(c.lower - v).max(v - c.upper);
        }
        for r in &self.rows {
            let activity: f64 = r.coeffs.iter().map(|(j, a)| a * values[*j]).sum();
            worst = worst.max(r.lower - activity).max(activity - r.upper);
        }
        worst
    }

    pub fn column_name(&self, j: usize) -> String {
        let c = &self.columns[j];
        let gen = c.gen.map(|g| self.gen_ids[g].as_str()).unwrap_or("sys");
        let t = c.period + 1;
        match c.kind {
            VarKind::Dispatch => format!("p_{gen}_t{t}"),
            VarKind::Step(s) => format!("rho_{gen}_t{t}_s{}", s + 1),
            VarKind::Commit => format!("u_{gen}_t{t}"),
            VarKind::Startup => format!("z_{gen}_t{t}"),
            VarKind::Shutdown => format!("y_{gen}_t{t}"),
            VarKind::NonServed => format!("n_t{t}"),
        }
    }

    pub fn row_name(&self, i: usize) -> String {
        let r = &self.rows[i];
        let gen = r.gen.map(|g| self.gen_ids[g].as_str()).unwrap_or("sys");
        format!("{:?}_{gen}_t{}_r{i}", r.family, r.period + 1).to_lowercase()
    }
}
