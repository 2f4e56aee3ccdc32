//! Table reproduction sweeps with side-by-side comparison.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{CycleKind, RunConfig, SmootherKind, SolverKind};
use crate::error::HarnessError;
use crate::reference::{self, ORDERS};
use crate::run::{execute_samples, summarize, RunRecord, SampleSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableId {
    T1,
    T2,
    T3,
}

impl FromStr for TableId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" | "1" => Ok(TableId::T1),
            "t2" | "2" => Ok(TableId::T2),
            "t3" | "3" => Ok(TableId::T3),
            _ => Err(format!("unknown table '{s}' (expected t1, t2 or t3)")),
        }
    }
}

impl TableId {
    pub fn name(self) -> &'static str {
        match self {
            TableId::T1 => "t1",
            TableId::T2 => "t2",
            TableId::T3 => "t3",
        }
    }
}

/// Restricts a sweep; `None` keeps every value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableFilter {
    pub rows: Option<Vec<usize>>,
    pub orders: Option<Vec<usize>>,
    pub nels: Option<Vec<usize>>,
    pub aspect_ratios: Option<Vec<usize>>,
    pub smoothers: Option<Vec<SmootherKind>>,
}

fn keep<T: PartialEq>(filter: &Option<Vec<T>>, v: &T) -> bool {
    filter.as_ref().is_none_or(|f| f.contains(v))
}

/// Published values for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    /// Row number in the first table.
    pub row: Option<usize>,
    pub r_bar: f64,
    pub n10: Option<usize>,
    pub omega_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub config: RunConfig,
    pub reference: Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub r_bar: f64,
    pub n10: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { r_bar: 0.2, n10: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub r_bar: Option<f64>,
    pub n10: Option<usize>,
    pub r_bar_deviation: Option<f64>,
    pub n10_deviation: Option<i64>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub table: TableId,
    pub reference: Reference,
    pub comparison: Comparison,
    pub summary: Option<SampleSummary>,
    /// One record per seed.
    pub runs: Vec<RunRecord>,
}

impl TableRecord {
    pub fn succeeded(&self) -> bool {
        self.runs.iter().all(RunRecord::succeeded)
    }
}

fn base(order: usize, nel: usize, smoother: SmootherKind, solver: SolverKind) -> RunConfig {
    RunConfig {
        order,
        nel,
        smoother,
        solver,
        ..RunConfig::default()
    }
}

/// Cells of a sweep. Seeds are `seed + index` in sweep order.
pub fn table_cells(id: TableId, filter: &TableFilter, seed: u64) -> Result<Vec<TableCell>, HarnessError> {
    let mut cells = Vec::new();
    match id {
        TableId::T1 => {
            for row in reference::table1()? {
                if !keep(&filter.rows, &row.row) || !keep(&filter.smoothers, &row.smoother) {
                    continue;
                }
                for (k, &p) in ORDERS.iter().enumerate() {
                    if !keep(&filter.orders, &p) || !keep(&filter.nels, &16) {
                        continue;
                    }
                    let mut config = base(p, 16, row.smoother, row.solver);
                    config.beta = [row.beta, row.beta];
                    if let Some(w) = row.weighting {
                        config.weighting = w;
                    }
                    cells.push(TableCell {
                        config,
                        reference: Reference {
                            row: Some(row.row),
                            r_bar: row.r_bar[k],
                            n10: None,
                            omega_bar: None,
                        },
                    });
                }
            }
        }
        TableId::T2 => {
            for row in reference::table2()? {
                if !keep(&filter.orders, &row.p) || !keep(&filter.nels, &row.nel) || !keep(&filter.smoothers, &row.smoother)
                {
                    continue;
                }
                cells.push(TableCell {
                    config: base(row.p, row.nel, row.smoother, SolverKind::Mgcg),
                    reference: Reference {
                        row: None,
                        r_bar: row.r_bar,
                        n10: Some(row.n10),
                        omega_bar: Some(row.omega_bar),
                    },
                });
            }
        }
        TableId::T3 => {
            for row in reference::table3()? {
                if !keep(&filter.orders, &row.p)
                    || !keep(&filter.aspect_ratios, &row.ar)
                    || !keep(&filter.smoothers, &row.smoother)
                {
                    continue;
                }
                let mut config = base(row.p, 16, row.smoother, SolverKind::Mgcg);
                config.aspect_ratio = row.ar as f64;
                if row.smoother.family() == dgpmg::schwarz::SubdomainFamily::FaceCentered {
                    config.cycle = CycleKind::Variable;
                }
                cells.push(TableCell {
                    config,
                    reference: Reference {
                        row: None,
                        r_bar: row.r_bar,
                        n10: Some(row.n10),
                        omega_bar: None,
                    },
                });
            }
        }
    }
    for (k, c) in cells.iter_mut().enumerate() {
        c.config.seed = seed + k as u64;
    }
    Ok(cells)
}

pub fn compare(reference: &Reference, r_bar: Option<f64>, n10: Option<usize>, tol: Tolerance) -> Comparison {
    let r_dev = r_bar.map(|r| r - reference.r_bar);
    let n_dev = match (n10, reference.n10) {
        (Some(a), Some(b)) => Some(a as i64 - b as i64),
        _ => None,
    };
    let within = r_dev.is_some_and(|d| d.abs() <= tol.r_bar + 1e-12)
        && (reference.n10.is_none() || n_dev.is_some_and(|d| d.unsigned_abs() as usize <= tol.n10));
    Comparison {
        r_bar,
        n10,
        r_bar_deviation: r_dev,
        n10_deviation: n_dev,
        within_tolerance: within,
    }
}

/// Runs one cell over `samples` seeds; the comparison uses the mean rate.
pub fn run_cell(
    id: TableId,
    cell: &TableCell,
    samples: usize,
    tol: Tolerance,
    overrides: &dyn Fn(&mut RunConfig),
) -> Result<TableRecord, HarnessError> {
    let mut config = cell.config.clone();
    overrides(&mut config);
    let runs = execute_samples(&config, samples)?;
    let summary = summarize(&runs);
    let (r_bar, n10) = if runs.len() == 1 {
        (runs[0].r_bar(), runs[0].n10())
    } else {
        (
            summary.as_ref().map(|s| s.r_bar_mean),
            summary.as_ref().map(|s| s.n10_mean.round() as usize),
        )
    };
    Ok(TableRecord {
        table: id,
        reference: cell.reference.clone(),
        comparison: compare(&cell.reference, r_bar, n10, tol),
        summary: if runs.len() > 1 { summary } else { None },
        runs,
    })
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

/// Plain-text side-by-side table.
pub fn render(records: &[TableRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4} {:>3} {:>4} {:>3} {:>5} {:>9} {:>4} {:>8} {:>5} | {:>6} {:>6} {:>7} | {:>4} {:>4} {:>4} | ok",
        "row", "P", "nel", "AR", "beta", "smoother", "cyc", "solver", "wt", "r_bar", "ref", "dev", "n10", "ref", "dev"
    );
    for r in records {
        let c = &r.runs[0].config;
        let _ = writeln!(
            out,
            "{:>4} {:>3} {:>4} {:>3} {:>5} {:>9} {:>4} {:>8} {:>5} | {:>6} {:>6.2} {:>7} | {:>4} {:>4} {:>4} | {}",
            fmt_opt(r.reference.row),
            c.order,
            c.nel,
            c.aspect_ratio,
            c.beta[0],
            c.smoother.name(),
            c.cycle.name(),
            c.solver.name(),
            &c.weighting.name()[..5.min(c.weighting.name().len())],
            r.comparison.r_bar.map_or("-".into(), |v| format!("{v:.3}")),
            r.reference.r_bar,
            r.comparison.r_bar_deviation.map_or("-".into(), |v| format!("{v:+.3}")),
            fmt_opt(r.comparison.n10),
            fmt_opt(r.reference.n10),
            r.comparison.n10_deviation.map_or("-".into(), |v| format!("{v:+}")),
            if r.comparison.within_tolerance { "yes" } else { "NO" },
        );
    }
    let within = records.iter().filter(|r| r.comparison.within_tolerance).count();
    let _ = writeln!(out, "{within}/{} cells within tolerance", records.len());
    out
}
