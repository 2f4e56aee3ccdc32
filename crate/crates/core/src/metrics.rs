//! Convergence rates and the analytic cost model of a multigrid cycle.

use crate::error::{Error, Result};
use crate::schwarz::SubdomainFamily;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceMetrics {
    /// Average reduction factor per iteration.
    pub rho: f64,
    /// `-log10(rho)`.
    pub r_bar: f64,
    /// Iterations needed for ten decades of residual reduction.
    pub n10: usize,
    /// `n10` was extrapolated from `r_bar` because the run stopped earlier.
    pub n10_estimated: bool,
    /// Iterations that entered the rate.
    pub n: usize,
    /// The residual reached exactly zero; the rate covers the iterations before.
    pub machine_limit: bool,
}

/// Iterations for ten decades at logarithmic rate `r_bar`.
pub fn n10_from_rate(r_bar: f64) -> usize {
    (10.0 / r_bar - 1e-9).ceil().max(1.0) as usize
}

pub fn convergence_metrics(history: &[f64]) -> Result<ConvergenceMetrics> {
    if history.len() < 2 {
        return Err(Error::InvalidArgument("need at least two residual norms".into()));
    }
    let r0 = history[0];
    if !(r0 > 0.0) || history.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidArgument("residual norms must be finite with r_0 > 0".into()));
    }
    let last = history.iter().rposition(|&r| r > 0.0).unwrap_or(0);
    let machine_limit = last + 1 < history.len();
    if last == 0 {
        return Err(Error::InvalidArgument("residual vanished after the first iteration".into()));
    }
    let n = last;
    let rho = (history[n] / r0).powf(1.0 / n as f64);
    let r_bar = -rho.log10();
    let crossing = history.iter().position(|&r| r <= r0 * 1e-10);
    let (n10, n10_estimated) = match crossing {
        Some(k) => (k, false),
        None => (n10_from_rate(r_bar), true),
    };
    Ok(ConvergenceMetrics {
        rho,
        r_bar,
        n10,
        n10_estimated,
        n,
        machine_limit,
    })
}

/// Smoother and cycle parameters of the cost estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub np: usize,
    pub c_o: f64,
    pub c_d: f64,
    pub m_d: f64,
    pub c_s: f64,
    pub n_s: f64,
    pub c_cg: f64,
}

impl CostModel {
    /// Cycle cost in units of one operator application.
    pub fn cycle_over_operator(&self) -> f64 {
        self.c_s * self.n_s * (0.5 * self.c_d * self.m_d + 1.0) + self.c_cg
    }

    /// Operator applications per decade of residual reduction.
    pub fn omega_bar(&self, r_bar: f64) -> f64 {
        self.cycle_over_operator() / r_bar
    }

    /// Multiplications per unknown for ten decades.
    pub fn w10(&self, r_bar: f64) -> f64 {
        20.0 / r_bar * self.cycle_over_operator() * self.np as f64
    }
}

/// `n_s` counts pre- plus post-smoothing steps on the finest level.
pub fn cycle_cost_model(
    order: usize,
    overlap: usize,
    family: SubdomainFamily,
    c_s: f64,
    n_s: usize,
    use_cg: bool,
) -> CostModel {
    let np = order + 1;
    let c_o = overlap as f64 / np as f64;
    let (c_d, m_d) = match family {
        SubdomainFamily::ElementCentered => (4.0 * (1.0 + 2.0 * c_o).powi(3), 1.0),
        SubdomainFamily::FaceCentered => (12.0 * (1.0 + 2.0 * c_o) * (1.0 + 2.0 * c_o / 3.0), 2.0),
    };
    CostModel {
        np,
        c_o,
        c_d,
        m_d,
        c_s,
        n_s: n_s as f64,
        c_cg: if use_cg { 1.0 } else { 0.0 },
    }
}
