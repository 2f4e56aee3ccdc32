//! Discretization error under mesh refinement.

use dgpmg::basis::ReferenceBasis;
use dgpmg::krylov::cg;
use dgpmg::mesh::NodalField;
use dgpmg::operator::{build_rhs, l2_error};
use dgpmg::SystemOperator;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::HarnessError;
use crate::run::{build_mesh, exact_solution, source};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub order: usize,
    pub nel: usize,
    pub h: f64,
    pub mu_star: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub dofs: usize,
    pub iterations: usize,
    pub l2_error: f64,
    /// `log2` of the error ratio per halving of `h`, against the previous
    /// mesh of the same order.
    pub observed_order: Option<f64>,
}

/// Solves to `decades` of residual reduction with CG from a zero guess.
pub fn error_sweep(
    base: &RunConfig,
    orders: &[usize],
    nels: &[usize],
    decades: f64,
) -> Result<Vec<ErrorRecord>, HarnessError> {
    let mut out = Vec::new();
    let mut nels = nels.to_vec();
    nels.sort_unstable();
    nels.dedup();
    for &order in orders {
        let mut prev: Option<(usize, f64)> = None;
        for &nel in &nels {
            let config = RunConfig {
                order,
                nel,
                ..base.clone()
            };
            if order < 1 || nel < 1 {
                return Err(HarnessError::Usage(format!("invalid order {order} or nel {nel}")));
            }
            config.params().validate().map_err(|e| HarnessError::Usage(e.to_string()))?;
            let mesh = build_mesh(&config)?;
            let basis = ReferenceBasis::new(order)?;
            let op = SystemOperator::assemble(&mesh, &basis, config.params())?;
            let f = build_rhs(&mesh, &basis, source);
            let zero = vec![0.0; f.len()];
            let (u, rep) = cg(&op, f.as_slice(), &zero, 10f64.powf(decades), 100 * f.len())?;
            if !rep.converged {
                return Err(HarnessError::Solver(format!(
                    "CG did not converge for order {order}, nel {nel}"
                )));
            }
            let u = NodalField::from_vec(op.shape(), u)?;
            let err = l2_error(&mesh, &basis, &u, exact_solution)?;
            let observed_order = prev.map(|(n0, e0)| (e0 / err).log2() / (nel as f64 / n0 as f64).log2());
            out.push(ErrorRecord {
                order,
                nel,
                h: 2.0 / nel as f64,
                mu_star: config.mu_star,
                beta1: config.beta[0],
                beta2: config.beta[1],
                dofs: u.len(),
                iterations: rep.iterations,
                l2_error: err,
                observed_order,
            });
            prev = Some((nel, err));
        }
    }
    Ok(out)
}
