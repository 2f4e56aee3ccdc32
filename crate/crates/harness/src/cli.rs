//! Command-line interface.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dgpmg::schwarz::WeightingKind;

use crate::config::{
    parse_beta, parse_weighting, read_config_file, CycleKind, OutputFormat, OverlapRule, RunConfig, SmootherKind,
    SolverKind,
};
use crate::error::{HarnessError, EXIT_SOLVER, EXIT_SUCCESS, EXIT_USAGE};
use crate::output::{emit, records_to_csv, resolve_output, rows_to_csv, to_json};
use crate::run::{execute_samples, summarize};
use crate::sweep::error_sweep;
use crate::table::{render, run_cell, table_cells, TableFilter, TableId, TableRecord, Tolerance};

#[derive(Debug, Parser)]
#[command(
    name = "dgpmg",
    version,
    about = "Polynomial multigrid with overlapping Schwarz smoothers for periodic DG Poisson problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the manufactured problem once (or once per sample seed).
    Solve(SolveArgs),
    /// Run a reference table sweep and compare against the published values.
    Table(TableArgs),
    /// Measure L2 errors under mesh refinement.
    ErrorSweep(SweepArgs),
}

/// Run configuration flags; unset flags fall back to the config file, then
/// to the built-in defaults.
#[derive(Debug, Clone, Args, Default)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Polynomial order P.
    #[arg(long, short = 'p')]
    pub order: Option<usize>,
    /// Elements per direction.
    #[arg(long)]
    pub nel: Option<usize>,
    /// Domain (0, 2 AR) x (0, 2).
    #[arg(long)]
    pub aspect_ratio: Option<f64>,
    #[arg(long)]
    pub mu_star: Option<f64>,
    /// `b` or `b1,b2`.
    #[arg(long, value_parser = parse_beta, allow_hyphen_values = true)]
    pub beta: Option<[f64; 2]>,
    /// em0, ea0, em-l, ea-l, fm0, fa0, fm-l or fa-l.
    #[arg(long)]
    pub smoother: Option<SmootherKind>,
    /// unweighted, arithmetic, cubic or quintic.
    #[arg(long, value_parser = parse_weighting)]
    pub weighting: Option<WeightingKind>,
    /// Rounding in the level-dependent overlap: ceil or floor.
    #[arg(long)]
    pub overlap_rule: Option<OverlapRule>,
    /// v or variable.
    #[arg(long)]
    pub cycle: Option<CycleKind>,
    /// mg, mgcg or cg.
    #[arg(long)]
    pub solver: Option<SolverKind>,
    /// Target residual reduction in decades.
    #[arg(long)]
    pub decades: Option<f64>,
    #[arg(long)]
    pub max_cycles: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// csv or json.
    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,
    /// Output file; defaults to $DGPMG_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    /// Repeat with seeds seed, seed + 1, ... and report the spread of r_bar.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// t1, t2 or t3.
    pub table: TableId,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    /// Only these rows of the first table.
    #[arg(long, value_delimiter = ',')]
    pub rows: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub orders: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub nels: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub aspect_ratios: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub smoothers: Option<Vec<SmootherKind>>,
    /// Allowed deviation of r_bar.
    #[arg(long, default_value_t = 0.2)]
    pub tol_r_bar: f64,
    /// Allowed deviation of n10.
    #[arg(long, default_value_t = 1)]
    pub tol_n10: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub orders: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    pub nels: Vec<usize>,
}

impl RunArgs {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            for (k, v) in read_config_file(path)? {
                c.set(&k, &v)?;
            }
        }
        self.apply(&mut c);
        Ok(c)
    }

    /// Writes only the flags that were given.
    pub fn apply(&self, c: &mut RunConfig) {
        macro_rules! put {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    c.$field = v;
                }
            )*};
        }
        put!(order, nel, aspect_ratio, mu_star, beta, smoother, weighting, overlap_rule, cycle, solver, decades, seed);
        if self.max_cycles.is_some() {
            c.max_cycles = self.max_cycles;
        }
    }

    /// Explicit settings applied on top of every table cell. Swept fields
    /// (order, nel, aspect ratio, smoother, seed) are left to the table.
    fn table_overrides(&self) -> Result<(Vec<(String, String)>, RunArgs), HarnessError> {
        const SWEPT: [&str; 7] = ["order", "p", "nel", "aspect-ratio", "ar", "smoother", "seed"];
        let mut pairs = match &self.config {
            Some(path) => read_config_file(path)?,
            None => Vec::new(),
        };
        pairs.retain(|(k, _)| !SWEPT.contains(&k.trim().to_ascii_lowercase().replace('_', "-").as_str()));
        let mut check = RunConfig::default();
        for (k, v) in &pairs {
            check.set(k, v)?;
        }
        let flags = RunArgs {
            config: None,
            order: None,
            nel: None,
            aspect_ratio: None,
            smoother: None,
            seed: None,
            ..self.clone()
        };
        Ok((pairs, flags))
    }
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn cmd_solve(args: &SolveArgs) -> Result<i32, HarnessError> {
    let config = args.run.resolve()?;
    config.validate()?;
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let records = execute_samples(&config, args.samples)?;
    for r in &records {
        if let Some(e) = &r.error {
            eprintln!("seed {}: {e}", r.config.seed);
        }
    }
    if records.len() > 1 {
        if let Some(s) = summarize(&records) {
            eprintln!(
                "{} samples: r_bar mean {:.4}, std {:.4}, n10 mean {:.2}",
                s.samples, s.r_bar_mean, s.r_bar_std, s.n10_mean
            );
        }
    }
    let text = match args.out.format {
        OutputFormat::Csv => records_to_csv(&records)?,
        OutputFormat::Json if records.len() == 1 => to_json(&records[0])?,
        OutputFormat::Json => to_json(&records)?,
    };
    emit(&text, resolve_output(args.out.output.clone(), "solve", args.out.format).as_deref())?;
    Ok(if records.iter().all(|r| r.succeeded()) {
        EXIT_SUCCESS
    } else {
        EXIT_SOLVER
    })
}

fn cmd_table(args: &TableArgs) -> Result<i32, HarnessError> {
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let filter = TableFilter {
        rows: args.rows.clone(),
        orders: args.orders.clone(),
        nels: args.nels.clone(),
        aspect_ratios: args.aspect_ratios.clone(),
        smoothers: args.smoothers.clone(),
    };
    let (pairs, flags) = args.run.table_overrides()?;
    let overrides = |c: &mut RunConfig| {
        for (k, v) in &pairs {
            // Already validated against a default configuration.
            let _ = c.set(k, v);
        }
        flags.apply(c);
    };
    let base_seed = args.run.seed.map_or_else(|| args.run.resolve().map(|c| c.seed), Ok)?;
    let cells = table_cells(args.table, &filter, base_seed)?;
    if cells.is_empty() {
        return Err(usage("the filters select no table cells"));
    }
    let tol = Tolerance {
        r_bar: args.tol_r_bar,
        n10: args.tol_n10,
    };
    let mut records: Vec<TableRecord> = Vec::with_capacity(cells.len());
    for (k, cell) in cells.iter().enumerate() {
        let rec = run_cell(args.table, cell, args.samples, tol, &overrides)?;
        let c = &rec.runs[0].config;
        eprintln!(
            "[{}/{}] P={} nel={} AR={} {} {}: r_bar {} (ref {:.2})",
            k + 1,
            cells.len(),
            c.order,
            c.nel,
            c.aspect_ratio,
            c.smoother,
            c.solver.name(),
            rec.comparison.r_bar.map_or("-".into(), |v| format!("{v:.3}")),
            rec.reference.r_bar
        );
        records.push(rec);
    }
    eprint!("{}", render(&records));
    let text = match args.out.format {
        OutputFormat::Csv => records_to_csv(records.iter().flat_map(|r| r.runs.iter()))?,
        OutputFormat::Json => to_json(&records)?,
    };
    emit(&text, resolve_output(args.out.output.clone(), args.table.name(), args.out.format).as_deref())?;
    Ok(if records.iter().all(TableRecord::succeeded) {
        EXIT_SUCCESS
    } else {
        EXIT_SOLVER
    })
}

fn cmd_error_sweep(args: &SweepArgs) -> Result<i32, HarnessError> {
    let config = args.run.resolve()?;
    config.params().validate().map_err(|e| usage(e.to_string()))?;
    if args.orders.is_empty() || args.nels.is_empty() {
        return Err(usage("orders and nels must not be empty"));
    }
    let decades = args.run.decades.unwrap_or(12.0);
    let recs = error_sweep(&config, &args.orders, &args.nels, decades)?;
    for r in &recs {
        eprintln!(
            "P={} nel={} error {:.4e} order {}",
            r.order,
            r.nel,
            r.l2_error,
            r.observed_order.map_or("-".into(), |o| format!("{o:.2}"))
        );
    }
    let text = match args.out.format {
        OutputFormat::Csv => rows_to_csv(&recs)?,
        OutputFormat::Json => to_json(&recs)?,
    };
    emit(&text, resolve_output(args.out.output.clone(), "error-sweep", args.out.format).as_deref())?;
    Ok(EXIT_SUCCESS)
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Table(a) => cmd_table(a),
        Command::ErrorSweep(a) => cmd_error_sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
