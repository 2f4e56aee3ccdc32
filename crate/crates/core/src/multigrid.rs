//! Polynomial multigrid over orders `1, 2, 4, ..., P` on a fixed mesh.

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut};

use crate::basis::{InterpolationMatrix, ReferenceBasis};
use crate::error::{Error, Result};
use crate::krylov::{cg, Preconditioner};
use crate::mesh::{CartesianMesh2D, FieldShape, NodalField};
use crate::operator::{project_null_space_in_place, DgParams, SystemOperator};
use crate::schwarz::{SchwarzMethod, SchwarzSmoother, SmootherConfig, SubdomainFamily, WeightingKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapPolicy {
    /// The same overlap on every level, capped at the level order.
    Fixed(usize),
    /// `1 + floor(P_l / 8)`.
    LevelDependent,
    /// `1 + ceil(P_l / 8)`; differs from `LevelDependent` only for `P_l < 8`.
    LevelDependentCeil,
}

impl OverlapPolicy {
    pub fn overlap(&self, order: usize) -> usize {
        match *self {
            OverlapPolicy::Fixed(n) => n.min(order),
            OverlapPolicy::LevelDependent => (1 + order / 8).min(order),
            OverlapPolicy::LevelDependentCeil => (1 + order.div_ceil(8)).min(order),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmootherPolicy {
    pub method: SchwarzMethod,
    pub family: SubdomainFamily,
    pub overlap: OverlapPolicy,
    pub weighting: WeightingKind,
}

impl SmootherPolicy {
    pub fn at_order(&self, order: usize) -> SmootherConfig {
        SmootherConfig {
            method: self.method,
            family: self.family,
            overlap: self.overlap.overlap(order),
            weighting: self.weighting,
        }
    }
}

/// Smoothing steps of the V-cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleConfig {
    pub pre: usize,
    pub post: usize,
    /// Doubles the steps on every coarser level.
    pub variable: bool,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            pre: 1,
            post: 1,
            variable: false,
        }
    }
}

impl CycleConfig {
    /// `(pre, post)` steps on level `level` of a hierarchy with top level `top`.
    pub fn steps(&self, level: usize, top: usize) -> (usize, usize) {
        if self.variable {
            let s = 1usize << (top - level);
            (s, s)
        } else {
            (self.pre, self.post)
        }
    }

    /// Cost factor of the cycle relative to the finest-level smoothing.
    pub fn cost_factor(&self) -> f64 {
        if self.variable {
            2.0
        } else {
            4.0 / 3.0
        }
    }
}

/// Element-wise tensor-product interpolation between consecutive levels.
#[derive(Debug, Clone)]
pub struct Transfer {
    interp: DMatrix<f64>,
    interp_t: DMatrix<f64>,
    coarse_np: usize,
    fine_np: usize,
}

impl Transfer {
    pub fn new(interp: &InterpolationMatrix) -> Self {
        let m = interp.matrix().clone();
        Self {
            interp_t: m.transpose(),
            coarse_np: interp.from_order() + 1,
            fine_np: interp.to_order() + 1,
            interp: m,
        }
    }

    fn check(&self, coarse: FieldShape, fine: FieldShape) -> Result<()> {
        if coarse.np != self.coarse_np || fine.np != self.fine_np || coarse.nel != fine.nel {
            return Err(Error::ShapeMismatch {
                expected: fine.nel[0] * fine.nel[1] * self.coarse_np * self.coarse_np,
                actual: coarse.len(),
            });
        }
        Ok(())
    }

    /// `fine += I coarse`, element by element.
    pub fn prolongate_add(&self, coarse: &NodalField, fine: &mut NodalField) -> Result<()> {
        self.check(coarse.shape(), fine.shape())?;
        let (nc, nf) = (self.coarse_np, self.fine_np);
        let mut t = DMatrix::zeros(nf, nc);
        let (cs, fs) = (coarse.as_slice(), fine.as_mut_slice());
        for (cb, fb) in cs.chunks_exact(nc * nc).zip(fs.chunks_exact_mut(nf * nf)) {
            t.gemm(1.0, &self.interp, &DMatrixView::from_slice(cb, nc, nc), 0.0);
            DMatrixViewMut::from_slice(fb, nf, nf).gemm(1.0, &t, &self.interp_t, 1.0);
        }
        Ok(())
    }

    pub fn prolongate(&self, coarse: &NodalField, fine_shape: FieldShape) -> Result<NodalField> {
        let mut fine = NodalField::zeros(fine_shape);
        self.prolongate_add(coarse, &mut fine)?;
        Ok(fine)
    }

    /// `coarse = I^T fine`, element by element.
    pub fn restrict_into(&self, fine: &NodalField, coarse: &mut NodalField) -> Result<()> {
        self.check(coarse.shape(), fine.shape())?;
        let (nc, nf) = (self.coarse_np, self.fine_np);
        let mut t = DMatrix::zeros(nc, nf);
        let (fs, cs) = (fine.as_slice(), coarse.as_mut_slice());
        for (fb, cb) in fs.chunks_exact(nf * nf).zip(cs.chunks_exact_mut(nc * nc)) {
            t.gemm(1.0, &self.interp_t, &DMatrixView::from_slice(fb, nf, nf), 0.0);
            DMatrixViewMut::from_slice(cb, nc, nc).gemm(1.0, &t, &self.interp, 0.0);
        }
        Ok(())
    }

    pub fn restrict(&self, fine: &NodalField, coarse_shape: FieldShape) -> Result<NodalField> {
        let mut coarse = NodalField::zeros(coarse_shape);
        self.restrict_into(fine, &mut coarse)?;
        Ok(coarse)
    }
}

#[derive(Debug, Clone)]
pub struct Level {
    pub basis: ReferenceBasis,
    pub op: SystemOperator,
    /// Absent on level 0, which is only solved.
    pub smoother: Option<SchwarzSmoother>,
    /// Transfer from the next coarser level; absent on level 0.
    pub transfer: Option<Transfer>,
}

impl Level {
    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn shape(&self) -> FieldShape {
        self.op.shape()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseSolverConfig {
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the coarse problem size.
    pub max_iter_factor: usize,
}

impl Default for CoarseSolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iter_factor: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MgHierarchy {
    levels: Vec<Level>,
    cycle: CycleConfig,
    coarse: CoarseSolverConfig,
}

pub fn build_hierarchy(
    mesh: &CartesianMesh2D,
    order: usize,
    params: DgParams,
    policy: SmootherPolicy,
    cycle: CycleConfig,
) -> Result<MgHierarchy> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::UnsupportedOrder(order));
    }
    let top = order.trailing_zeros() as usize;
    let mut levels: Vec<Level> = Vec::with_capacity(top + 1);
    for l in 0..=top {
        let basis = ReferenceBasis::new(1 << l)?;
        let op = SystemOperator::assemble(mesh, &basis, params)?;
        let smoother = if l == 0 {
            None
        } else {
            Some(SchwarzSmoother::new(&op, &basis, policy.at_order(1 << l))?)
        };
        let transfer = match levels.last() {
            Some(prev) => Some(Transfer::new(&InterpolationMatrix::new(&prev.basis, &basis)?)),
            None => None,
        };
        levels.push(Level {
            basis,
            op,
            smoother,
            transfer,
        });
    }
    Ok(MgHierarchy {
        levels,
        cycle,
        coarse: CoarseSolverConfig::default(),
    })
}

impl MgHierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn top(&self) -> &Level {
        self.levels.last().expect("hierarchy has levels")
    }

    pub fn cycle_config(&self) -> CycleConfig {
        self.cycle
    }

    pub fn set_cycle_config(&mut self, cycle: CycleConfig) {
        self.cycle = cycle;
    }

    pub fn set_coarse_solver(&mut self, coarse: CoarseSolverConfig) {
        self.coarse = coarse;
    }

    /// Unknowns per level, coarsest first.
    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.shape().len()).collect()
    }

    /// One V-cycle on `u` for right-hand side `f`.
    pub fn v_cycle(&self, u: &mut NodalField, f: &NodalField) -> Result<()> {
        let top = self.levels.len() - 1;
        let shape = self.top().shape();
        for v in [&*u, f] {
            if v.shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: shape.len(),
                    actual: v.len(),
                });
            }
        }
        let mut us: Vec<NodalField> = self.levels.iter().map(|l| NodalField::zeros(l.shape())).collect();
        let mut fs = us.clone();
        us[top] = u.clone();
        fs[top] = f.clone();
        let mut r = NodalField::zeros(shape);
        for l in (1..=top).rev() {
            let level = &self.levels[l];
            let (pre, _) = self.cycle.steps(l, top);
            let smoother = level.smoother.as_ref().expect("smoother above level 0");
            smoother.smooth(&level.op, &mut us[l], &fs[l], pre, false)?;
            if r.shape() != level.shape() {
                r = NodalField::zeros(level.shape());
            }
            level.op.apply_into(&us[l], &mut r)?;
            for (ri, fi) in r.as_mut_slice().iter_mut().zip(fs[l].as_slice()) {
                *ri = fi - *ri;
            }
            let transfer = level.transfer.as_ref().expect("transfer above level 0");
            transfer.restrict_into(&r, &mut fs[l - 1])?;
        }
        us[0] = self.coarse_solve(&fs[0])?;
        for l in 1..=top {
            let level = &self.levels[l];
            let (lower, upper) = us.split_at_mut(l);
            let transfer = level.transfer.as_ref().expect("transfer above level 0");
            transfer.prolongate_add(&lower[l - 1], &mut upper[0])?;
            let (_, post) = self.cycle.steps(l, top);
            let smoother = level.smoother.as_ref().expect("smoother above level 0");
            smoother.smooth(&level.op, &mut upper[0], &fs[l], post, false)?;
        }
        *u = us.swap_remove(top);
        Ok(())
    }

    /// Zero-mean solution of the level-0 problem with projected right side.
    pub fn coarse_solve(&self, f0: &NodalField) -> Result<NodalField> {
        coarse_solve(&self.levels[0].op, f0, self.coarse)
    }
}

pub fn coarse_solve(op: &SystemOperator, f0: &NodalField, config: CoarseSolverConfig) -> Result<NodalField> {
    let mut f = f0.clone();
    project_null_space_in_place(f.as_mut_slice());
    let n = f.len();
    let zero = vec![0.0; n];
    let (mut u, report) = cg(op, f.as_slice(), &zero, 1.0 / config.rel_tol, config.max_iter_factor * n)?;
    if !report.converged {
        let r0 = report.history[0];
        return Err(Error::CoarseSolve {
            iterations: report.iterations,
            residual: report.history.last().copied().unwrap_or(r0) / r0,
        });
    }
    project_null_space_in_place(&mut u);
    NodalField::from_vec(op.shape(), u)
}

impl Preconditioner for MgHierarchy {
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let shape = self.top().shape();
        let rhs = NodalField::from_vec(shape, r.to_vec())?;
        let mut u = NodalField::zeros(shape);
        self.v_cycle(&mut u, &rhs)?;
        z.copy_from_slice(u.as_slice());
        Ok(())
    }
}
