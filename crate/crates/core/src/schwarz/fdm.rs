//! Fast diagonalization of separable subdomain problems.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operator::GlobalOperator1D;

use super::Range1D;

/// Restriction of a 1D operator to `range` with homogeneous Dirichlet data
/// outside. Returns the diagonal mass and the dense stiffness block.
pub fn restrict_operator_1d(op: &GlobalOperator1D, range: Range1D) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = op.len();
    if range.len == 0 || range.len >= n || range.start >= n {
        return Err(Error::InvalidArgument(format!(
            "range {range:?} is not a proper subrange of {n} nodes"
        )));
    }
    let idx: Vec<usize> = range.indices(n).collect();
    let mass = idx.iter().map(|&g| op.mass()[g]).collect();
    let mut local = vec![usize::MAX; n];
    for (a, &g) in idx.iter().enumerate() {
        local[g] = a;
    }
    let mut stiff = DMatrix::zeros(range.len, range.len);
    for (a, &g) in idx.iter().enumerate() {
        for (c, v) in op.row(g) {
            if local[c] != usize::MAX {
                stiff[(a, local[c])] = v;
            }
        }
    }
    Ok((mass, stiff))
}

/// Generalized eigendecomposition `L S = M S diag(lambda)` with `S^T M S = I`.
#[derive(Debug, Clone)]
pub struct Factor1D {
    s: DMatrix<f64>,
    st: DMatrix<f64>,
    lambda: Vec<f64>,
}

impl Factor1D {
    pub fn new(mass: &[f64], stiff: &DMatrix<f64>) -> std::result::Result<Self, String> {
        let n = mass.len();
        if stiff.shape() != (n, n) {
            return Err(format!("stiffness is {:?}, mass has {n} entries", stiff.shape()));
        }
        if let Some(m) = mass.iter().find(|m| !(**m > 0.0)) {
            return Err(format!("non-positive mass entry {m}"));
        }
        let isq: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let c = DMatrix::from_fn(n, n, |i, k| {
            0.5 * (stiff[(i, k)] + stiff[(k, i)]) * isq[i] * isq[k]
        });
        if c.iter().any(|v| !v.is_finite()) {
            return Err("non-finite operator entries".into());
        }
        let eig = SymmetricEigen::try_new(c, f64::EPSILON, 0)
            .ok_or_else(|| "symmetric eigensolver did not converge".to_string())?;
        let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        if let Some(l) = lambda.iter().find(|l| !(**l > 0.0)) {
            return Err(format!("restricted operator is not positive definite (eigenvalue {l:e})"));
        }
        let mut s = eig.eigenvectors;
        for (i, mut row) in s.row_iter_mut().enumerate() {
            row *= isq[i];
        }
        let st = s.transpose();
        Ok(Self { s, st, lambda })
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambda
    }
}

/// Factored inverse of `M2 (x) L1 + L2 (x) M1` on one subdomain.
#[derive(Debug, Clone)]
pub struct FdmFactor {
    f1: Arc<Factor1D>,
    f2: Arc<Factor1D>,
    inv: Arc<DMatrix<f64>>,
}

/// Scratch matrices reused across subdomain solves.
#[derive(Debug, Default)]
pub struct FdmWorkspace {
    r: DMatrix<f64>,
    t: DMatrix<f64>,
    out: DMatrix<f64>,
}

impl FdmWorkspace {
    fn fit(&mut self, n1: usize, n2: usize) {
        if self.r.shape() != (n1, n2) {
            self.r = DMatrix::zeros(n1, n2);
            self.t = DMatrix::zeros(n1, n2);
            self.out = DMatrix::zeros(n1, n2);
        }
    }
}

pub(crate) fn reciprocal_eigenvalues(f1: &Factor1D, f2: &Factor1D) -> DMatrix<f64> {
    DMatrix::from_fn(f1.len(), f2.len(), |a, b| 1.0 / (f1.lambda[a] + f2.lambda[b]))
}

impl FdmFactor {
    pub(crate) fn from_parts(f1: Arc<Factor1D>, f2: Arc<Factor1D>, inv: Arc<DMatrix<f64>>) -> Self {
        Self { f1, f2, inv }
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.f1.len(), self.f2.len()]
    }

    pub fn factor(&self, d: usize) -> &Factor1D {
        if d == 0 {
            &self.f1
        } else {
            &self.f2
        }
    }

    /// Solves the subdomain problem; `r` and `out` are indexed `a + n1 * b`.
    pub fn solve_into(&self, r: &[f64], out: &mut [f64], ws: &mut FdmWorkspace) {
        let [n1, n2] = self.dims();
        ws.fit(n1, n2);
        ws.r.as_mut_slice().copy_from_slice(r);
        ws.t.gemm(1.0, &self.f1.st, &ws.r, 0.0);
        ws.out.gemm(1.0, &ws.t, &self.f2.s, 0.0);
        ws.out.component_mul_assign(&self.inv);
        ws.t.gemm(1.0, &self.f1.s, &ws.out, 0.0);
        ws.out.gemm(1.0, &ws.t, &self.f2.st, 0.0);
        out.copy_from_slice(ws.out.as_slice());
    }
}

pub fn factorize_fdm(
    mass_1: &[f64],
    stiff_1: &DMatrix<f64>,
    mass_2: &[f64],
    stiff_2: &DMatrix<f64>,
) -> Result<FdmFactor> {
    let wrap = |reason| Error::Factorization { subdomain: 0, reason };
    let f1 = Arc::new(Factor1D::new(mass_1, stiff_1).map_err(wrap)?);
    let f2 = Arc::new(Factor1D::new(mass_2, stiff_2).map_err(wrap)?);
    let inv = Arc::new(reciprocal_eigenvalues(&f1, &f2));
    Ok(FdmFactor { f1, f2, inv })
}

pub fn solve_subdomain(factor: &FdmFactor, local_residual: &[f64]) -> Result<Vec<f64>> {
    let [n1, n2] = factor.dims();
    if local_residual.len() != n1 * n2 {
        return Err(Error::ShapeMismatch {
            expected: n1 * n2,
            actual: local_residual.len(),
        });
    }
    let mut out = vec![0.0; n1 * n2];
    factor.solve_into(local_residual, &mut out, &mut FdmWorkspace::default());
    Ok(out)
}
