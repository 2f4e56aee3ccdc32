//! One solve of the manufactured problem and its record.

use std::f64::consts::PI;
use std::time::Instant;

use dgpmg::basis::ReferenceBasis;
use dgpmg::krylov::{cg, mg_solve, mgcg, SolveReport};
use dgpmg::mesh::{CartesianMesh2D, NodalField};
use dgpmg::metrics::{convergence_metrics, cycle_cost_model, CostModel};
use dgpmg::multigrid::build_hierarchy;
use dgpmg::operator::{build_rhs, l2_error};
use dgpmg::SystemOperator;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SolverKind};
use crate::error::HarnessError;

/// Rate and cost metrics of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub r0: f64,
    pub rn: f64,
    pub n: usize,
    pub rho: f64,
    pub r_bar: f64,
    pub n10: usize,
    pub n10_estimated: bool,
    pub machine_limit: bool,
    pub omega_bar: f64,
    pub w10: f64,
    pub c_s: f64,
    pub n_s: f64,
    pub c_d: f64,
    pub c_o: f64,
    pub m_d: f64,
    pub c_cg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub dofs: usize,
    pub converged: bool,
    /// Residual norms `r_0, ..., r_n`.
    pub history: Vec<f64>,
    pub metrics: Option<RunMetrics>,
    pub l2_error: Option<f64>,
    pub wall_ms: f64,
    /// Diagnostic for runs that stopped on an error.
    pub error: Option<String>,
}

impl RunRecord {
    pub fn r_bar(&self) -> Option<f64> {
        self.metrics.as_ref().map(|m| m.r_bar)
    }

    pub fn n10(&self) -> Option<usize> {
        self.metrics.as_ref().map(|m| m.n10)
    }

    pub fn succeeded(&self) -> bool {
        self.converged && self.error.is_none()
    }
}

pub fn exact_solution(x1: f64, x2: f64) -> f64 {
    (PI * x1).sin() * (PI * x2).sin()
}

pub fn source(x1: f64, x2: f64) -> f64 {
    2.0 * PI * PI * exact_solution(x1, x2)
}

pub fn build_mesh(config: &RunConfig) -> Result<CartesianMesh2D, HarnessError> {
    Ok(CartesianMesh2D::uniform(
        2.0 * config.aspect_ratio,
        2.0,
        config.nel,
        config.nel,
    )?)
}

/// Cost model of the configured cycle on the finest level.
pub fn cost_model(config: &RunConfig) -> CostModel {
    let c_s = config.cycle.config().cost_factor();
    match config.solver {
        SolverKind::Cg => cycle_cost_model(config.order, 0, config.smoother.family(), c_s, 0, true),
        solver => cycle_cost_model(
            config.order,
            config.overlap_policy().overlap(config.order),
            config.smoother.family(),
            c_s,
            2,
            solver == SolverKind::Mgcg,
        ),
    }
}

fn metrics_of(config: &RunConfig, history: &[f64]) -> Option<RunMetrics> {
    let m = convergence_metrics(history).ok()?;
    let cost = cost_model(config);
    Some(RunMetrics {
        r0: history[0],
        rn: history[m.n],
        n: m.n,
        rho: m.rho,
        r_bar: m.r_bar,
        n10: m.n10,
        n10_estimated: m.n10_estimated,
        machine_limit: m.machine_limit,
        omega_bar: cost.omega_bar(m.r_bar),
        w10: cost.w10(m.r_bar),
        c_s: cost.c_s,
        n_s: cost.n_s,
        c_d: cost.c_d,
        c_o: cost.c_o,
        m_d: cost.m_d,
        c_cg: cost.c_cg,
    })
}

fn solve(
    config: &RunConfig,
    mesh: &CartesianMesh2D,
    basis: &ReferenceBasis,
) -> dgpmg::Result<(NodalField, SolveReport)> {
    let f = build_rhs(mesh, basis, source);
    let max_iter = config.effective_max_cycles();
    let reduction = 10f64.powf(config.decades);
    match config.solver {
        SolverKind::Cg => {
            let op = SystemOperator::assemble(mesh, basis, config.params())?;
            let u0 = NodalField::random(op.shape(), config.seed);
            let (u, rep) = cg(&op, f.as_slice(), u0.as_slice(), reduction, max_iter)?;
            Ok((NodalField::from_vec(op.shape(), u)?, rep))
        }
        solver => {
            let h = build_hierarchy(
                mesh,
                config.order,
                config.params(),
                config.smoother_policy(),
                config.cycle.config(),
            )?;
            let op = &h.top().op;
            let u0 = NodalField::random(op.shape(), config.seed);
            let mut fc = f.clone();
            let mean = fc.mean();
            fc.as_mut_slice().iter_mut().for_each(|v| *v -= mean);
            let mut r = op.apply(&u0)?;
            r.scale(-1.0);
            r.axpy(1.0, &fc)?;
            let r_max = r.norm2() / reduction;
            if solver == SolverKind::Mg {
                mg_solve(&h, &f, &u0, max_iter, r_max)
            } else {
                mgcg(&h, &f, &u0, max_iter, r_max)
            }
        }
    }
}

/// Runs one configuration. Solver errors are captured in the record.
pub fn execute(config: &RunConfig) -> Result<RunRecord, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let mesh = build_mesh(config)?;
    let basis = ReferenceBasis::new(config.order)?;
    let dofs = mesh.num_elements() * basis.num_nodes() * basis.num_nodes();
    let outcome = solve(config, &mesh, &basis);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(match outcome {
        Ok((u, report)) => RunRecord {
            config: config.clone(),
            dofs,
            converged: report.converged,
            metrics: metrics_of(config, &report.history),
            l2_error: l2_error(&mesh, &basis, &u, exact_solution).ok(),
            history: report.history,
            wall_ms,
            error: None,
        },
        Err(e) => RunRecord {
            config: config.clone(),
            dofs,
            converged: false,
            history: Vec::new(),
            metrics: None,
            l2_error: None,
            wall_ms,
            error: Some(e.to_string()),
        },
    })
}

/// Mean and spread of `r_bar` over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub samples: usize,
    pub r_bar_mean: f64,
    pub r_bar_std: f64,
    pub n10_mean: f64,
}

pub fn summarize(records: &[RunRecord]) -> Option<SampleSummary> {
    let rates: Vec<f64> = records.iter().filter_map(RunRecord::r_bar).collect();
    let n10: Vec<f64> = records.iter().filter_map(|r| r.n10().map(|n| n as f64)).collect();
    if rates.is_empty() {
        return None;
    }
    let k = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / k;
    let var = if rates.len() > 1 {
        rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Some(SampleSummary {
        samples: rates.len(),
        r_bar_mean: mean,
        r_bar_std: var.sqrt(),
        n10_mean: n10.iter().sum::<f64>() / n10.len() as f64,
    })
}

/// Runs `samples` seeds `seed, seed + 1, ...`.
pub fn execute_samples(config: &RunConfig, samples: usize) -> Result<Vec<RunRecord>, HarnessError> {
    (0..samples.max(1) as u64)
        .map(|k| {
            let mut c = config.clone();
            c.seed = config.seed + k;
            execute(&c)
        })
        .collect()
}
