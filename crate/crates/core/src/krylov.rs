//! Conjugate gradients and inexact multigrid-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::mesh::{axpy, dot, norm2, NodalField};
use crate::multigrid::MgHierarchy;
use crate::operator::{project_null_space_in_place, SystemOperator};

pub trait LinearOperator {
    fn len(&self) -> usize;

    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Removes null-space components from a right-hand side.
    fn project(&self, _v: &mut [f64]) {}
}

impl LinearOperator for SystemOperator {
    fn len(&self) -> usize {
        self.shape().len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_slice(x, y)
    }

    fn project(&self, v: &mut [f64]) {
        project_null_space_in_place(v)
    }
}

pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Iterations (or cycles) performed.
    pub iterations: usize,
    /// Residual norms `r_0, ..., r_n`.
    pub history: Vec<f64>,
    pub converged: bool,
    pub termination: Termination,
}

impl SolveReport {
    fn new(r0: f64) -> Self {
        Self {
            iterations: 0,
            history: vec![r0],
            converged: false,
            termination: Termination::MaxIterations,
        }
    }

    fn finish(mut self, converged: bool) -> Self {
        self.iterations = self.history.len() - 1;
        self.converged = converged;
        self.termination = if converged {
            Termination::Converged
        } else {
            Termination::MaxIterations
        };
        self
    }
}

fn residual<A: LinearOperator + ?Sized>(op: &A, f: &[f64], u: &[f64], r: &mut [f64]) {
    op.apply(u, r);
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, actual })
    }
}

/// Conjugate gradients, stopping once `|r| <= |r_0| / reduction`.
pub fn cg<A: LinearOperator + ?Sized>(
    op: &A,
    f: &[f64],
    u0: &[f64],
    reduction: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = op.len();
    check_len(n, f.len())?;
    check_len(n, u0.len())?;
    let mut f = f.to_vec();
    op.project(&mut f);
    let mut u = u0.to_vec();
    let mut r = vec![0.0; n];
    residual(op, &f, &u, &mut r);
    let r0 = norm2(&r);
    let mut report = SolveReport::new(r0);
    let target = r0 / reduction;
    if r0 == 0.0 {
        return Ok((u, report.finish(true)));
    }
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        op.apply(&p, &mut q);
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::Breakdown { iteration: it, curvature });
        }
        let alpha = rr / curvature;
        axpy(alpha, &p, &mut u);
        axpy(-alpha, &q, &mut r);
        let rr_new = dot(&r, &r);
        let norm = rr_new.sqrt();
        if !norm.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        report.history.push(norm);
        if norm <= target {
            return Ok((u, report.finish(true)));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Ok((u, report.finish(false)))
}

/// Iterations between comparisons of the recursive and the true residual.
const DRIFT_CHECK_INTERVAL: usize = 50;

/// Inexact preconditioned conjugate gradients with the flexible
/// (Polak-Ribiere type) direction update; stops once `|r| <= r_max`.
pub fn inexact_pcg<A, M>(
    op: &A,
    precond: &M,
    f: &[f64],
    u0: &[f64],
    max_iter: usize,
    r_max: f64,
) -> Result<(Vec<f64>, SolveReport)>
where
    A: LinearOperator + ?Sized,
    M: Preconditioner + ?Sized,
{
    let n = op.len();
    check_len(n, f.len())?;
    check_len(n, u0.len())?;
    let mut f = f.to_vec();
    op.project(&mut f);
    let mut u = u0.to_vec();
    let mut r_old = vec![0.0; n];
    let mut r = vec![0.0; n];
    residual(op, &f, &u, &mut r);
    let r0 = norm2(&r);
    let mut report = SolveReport::new(r0);
    if r0 <= r_max {
        return Ok((u, report.finish(true)));
    }
    let mut p = vec![0.0; n];
    precond.apply(&r, &mut p)?;
    let mut delta = dot(&p, &r);
    let mut q = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut diff = vec![0.0; n];
    for it in 1..=max_iter {
        op.apply(&p, &mut q);
        let curvature = dot(&p, &q);
        if !curvature.is_finite() || !delta.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        if curvature <= 0.0 {
            return Err(Error::Breakdown { iteration: it, curvature });
        }
        let alpha = delta / curvature;
        axpy(alpha, &p, &mut u);
        axpy(-alpha, &q, &mut r);
        if it % DRIFT_CHECK_INTERVAL == 0 {
            residual(op, &f, &u, &mut diff);
            let drift: f64 = diff.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if drift > 1e-8 * norm2(&diff).max(r_max) {
                r.copy_from_slice(&diff);
            }
        }
        let norm = norm2(&r);
        if !norm.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        report.history.push(norm);
        if norm <= r_max {
            return Ok((u, report.finish(true)));
        }
        precond.apply(&r, &mut z)?;
        for ((d, ri), ro) in diff.iter_mut().zip(&r).zip(&r_old) {
            *d = ri - ro;
        }
        let beta = dot(&z, &diff) / delta;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        delta = dot(&z, &r);
        r_old.copy_from_slice(&r);
    }
    Ok((u, report.finish(false)))
}

/// Multigrid-preconditioned CG: one V-cycle with zero initial guess per
/// iteration.
pub fn mgcg(
    hierarchy: &MgHierarchy,
    f: &NodalField,
    u0: &NodalField,
    max_iter: usize,
    r_max: f64,
) -> Result<(NodalField, SolveReport)> {
    let op = &hierarchy.top().op;
    let (u, report) = inexact_pcg(op, hierarchy, f.as_slice(), u0.as_slice(), max_iter, r_max)?;
    Ok((NodalField::from_vec(op.shape(), u)?, report))
}

/// Stand-alone multigrid iteration `u <- cycle(u, f)`.
pub fn mg_solve(
    hierarchy: &MgHierarchy,
    f: &NodalField,
    u0: &NodalField,
    max_iter: usize,
    r_max: f64,
) -> Result<(NodalField, SolveReport)> {
    let op = &hierarchy.top().op;
    let mut f = f.clone();
    project_null_space_in_place(f.as_mut_slice());
    let mut u = u0.clone();
    let mut r = NodalField::zeros(op.shape());
    residual(op, f.as_slice(), u.as_slice(), r.as_mut_slice());
    let mut report = SolveReport::new(r.norm2());
    if report.history[0] <= r_max {
        return Ok((u, report.finish(true)));
    }
    for it in 1..=max_iter {
        hierarchy.v_cycle(&mut u, &f)?;
        residual(op, f.as_slice(), u.as_slice(), r.as_mut_slice());
        let norm = r.norm2();
        if !norm.is_finite() {
            return Err(Error::Divergence { iteration: it });
        }
        report.history.push(norm);
        if norm <= r_max {
            return Ok((u, report.finish(true)));
        }
    }
    Ok((u, report.finish(false)))
}
