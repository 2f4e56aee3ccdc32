//! One-dimensional reference quantities on Gauss-Lobatto-Legendre points.
//!
//! Everything an element needs in a single direction lives here: the nodes
//! and quadrature weights, the collocation differentiation matrix and the
//! standard stiffness matrix. Orders are tied to the nodal Lagrange basis,
//! so the mass matrix is simply `diag(weights)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// GLL nodes, weights and the standard 1D matrices for a fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBasis {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    diff: DMatrix<f64>,
    stiffness: DMatrix<f64>,
}

impl ReferenceBasis {
    /// Builds the basis of polynomial order `order` (`order + 1` nodes).
    pub fn new(order: usize) -> Result<Self> {
        let (nodes, weights) = gll_points(order)?;
        let diff = diff_matrix(&nodes);
        let stiffness = stiffness_matrix(&diff, &weights);
        Ok(Self {
            order,
            nodes,
            weights,
            diff,
            stiffness,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of nodes per direction, `P + 1`.
    pub fn num_nodes(&self) -> usize {
        self.order + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Diagonal of the standard mass matrix; equal to the quadrature weights.
    pub fn mass_diag(&self) -> &[f64] {
        &self.weights
    }

    /// `D[(i, k)] = phi_k'(eta_i)`.
    pub fn diff(&self) -> &DMatrix<f64> {
        &self.diff
    }

    /// `L[(i, k)] = sum_j rho_j D[(j, i)] D[(j, k)]`.
    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Values of all Lagrange basis polynomials at `x`.
    pub fn lagrange_at(&self, x: f64) -> Vec<f64> {
        lagrange_values(&self.nodes, x)
    }

    /// Evaluates the nodal interpolant of `coeffs` at `x`.
    pub fn interpolate_at(&self, coeffs: &[f64], x: f64) -> f64 {
        debug_assert_eq!(coeffs.len(), self.num_nodes());
        self.lagrange_at(x)
            .iter()
            .zip(coeffs)
            .map(|(l, c)| l * c)
            .sum()
    }
}

/// Legendre polynomial of degree `n` and its derivative at `x`.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let dp_next = dp_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Lobatto nodes (roots of `(1 - x^2) P_n'(x)`) and weights.
pub fn gll_points(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order < 1 {
        return Err(Error::InvalidOrder(order));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    // Interior nodes are the roots of P_n'. Newton on P_n' uses P_n'' from the
    // Legendre ODE; Chebyshev-Lobatto points are close enough to converge.
    for i in 1..n {
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre(n, x);
            let ddp = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < NEWTON_TOL {
                break;
            }
        }
        nodes[i] = x;
    }
    // Enforce exact symmetry about the origin.
    for i in 0..(n + 1) / 2 {
        let s = 0.5 * (nodes[n - i] - nodes[i]);
        nodes[i] = -s;
        nodes[n - i] = s;
    }
    if n % 2 == 0 {
        nodes[n / 2] = 0.0;
    }
    let scale = 2.0 / (nf * (nf + 1.0));
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(n, x);
            scale / (p * p)
        })
        .collect();
    Ok((nodes, weights))
}

fn diff_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len() - 1;
    let lp: Vec<f64> = nodes.iter().map(|&x| legendre(n, x).0).collect();
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row_sum = 0.0;
        for k in 0..=n {
            if i != k {
                let v = lp[i] / (lp[k] * (nodes[i] - nodes[k]));
                d[(i, k)] = v;
                row_sum += v;
            }
        }
        // Diagonal from the zero row-sum identity; matches -/+ n(n+1)/4 at the
        // endpoints and 0 inside, with less cancellation error.
        d[(i, i)] = -row_sum;
    }
    d
}

fn stiffness_matrix(diff: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let np = weights.len();
    let mut l = DMatrix::zeros(np, np);
    for i in 0..np {
        for k in i..np {
            let mut s = 0.0;
            for j in 0..np {
                s += weights[j] * diff[(j, i)] * diff[(j, k)];
            }
            l[(i, k)] = s;
            l[(k, i)] = s;
        }
    }
    l
}

fn lagrange_values(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|k| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(1.0, |acc, (_, &xj)| acc * (x - xj) / (nodes[k] - xj))
        })
        .collect()
}

/// Embedded interpolation from a coarse to a finer polynomial order.
///
/// `matrix[(i, k)]` is the coarse Lagrange polynomial `k` evaluated at fine
/// node `i`. Its transpose restricts residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationMatrix {
    from_order: usize,
    to_order: usize,
    matrix: DMatrix<f64>,
}

impl InterpolationMatrix {
    pub fn new(from: &ReferenceBasis, to: &ReferenceBasis) -> Result<Self> {
        if to.order() <= from.order() {
            return Err(Error::InvalidArgument(format!(
                "interpolation must raise the order (from {} to {})",
                from.order(),
                to.order()
            )));
        }
        let mut matrix = DMatrix::zeros(to.num_nodes(), from.num_nodes());
        for (i, &x) in to.nodes().iter().enumerate() {
            for (k, v) in lagrange_values(from.nodes(), x).into_iter().enumerate() {
                matrix[(i, k)] = v;
            }
        }
        Ok(Self {
            from_order: from.order(),
            to_order: to.order(),
            matrix,
        })
    }

    pub fn from_order(&self) -> usize {
        self.from_order
    }

    pub fn to_order(&self) -> usize {
        self.to_order
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn rejects_order_zero() {
        assert_eq!(ReferenceBasis::new(0), Err(Error::InvalidOrder(0)));
    }

    #[test]
    fn two_point_lobatto() {
        let b = ReferenceBasis::new(1).unwrap();
        assert_eq!(b.nodes(), &[-1.0, 1.0]);
        assert_close(b.weights()[0], 1.0, 1e-15);
        assert_close(b.weights()[1], 1.0, 1e-15);
        for i in 0..2 {
            assert_close(b.diff()[(i, 0)], -0.5, 1e-15);
            assert_close(b.diff()[(i, 1)], 0.5, 1e-15);
        }
        let l = b.stiffness();
        assert_close(l[(0, 0)], 0.5, 1e-15);
        assert_close(l[(0, 1)], -0.5, 1e-15);
        assert_close(l[(1, 1)], 0.5, 1e-15);
    }

    #[test]
    fn three_point_weights_integrate_cubics() {
        // Oracle: weights on (-1, 0, 1) that integrate 1, x, x^2, x^3 exactly
        // solve w0 + w1 + w2 = 2, w2 - w0 = 0, w0 + w2 = 2/3.
        let b = ReferenceBasis::new(2).unwrap();
        assert_eq!(b.nodes(), &[-1.0, 0.0, 1.0]);
        let expected = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (w, e) in b.weights().iter().zip(expected) {
            assert_close(*w, e, 1e-14);
        }
    }

    #[test]
    fn five_point_nodes() {
        let b = ReferenceBasis::new(4).unwrap();
        // Roots of P_4'(x) = (35x^3 - 15x)/2: x = 0, +-sqrt(3/7).
        let r = (3.0f64 / 7.0).sqrt();
        assert_close(b.nodes()[1], -r, 1e-14);
        assert_close(b.nodes()[3], r, 1e-14);
        assert_close(r, 0.654_653_670_7, 1e-10);
        assert_close(b.weights()[0], 0.1, 1e-14);
        assert_close(b.weights()[4], 0.1, 1e-14);
    }

    #[test]
    fn interpolation_linear_to_quadratic() {
        let from = ReferenceBasis::new(1).unwrap();
        let to = ReferenceBasis::new(2).unwrap();
        let m = InterpolationMatrix::new(&from, &to).unwrap();
        let expected = [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]];
        for i in 0..3 {
            for k in 0..2 {
                assert_close(m.matrix()[(i, k)], expected[i][k], 1e-15);
            }
        }
    }

    #[test]
    fn interpolation_rejects_non_increasing_order() {
        let a = ReferenceBasis::new(4).unwrap();
        let b = ReferenceBasis::new(2).unwrap();
        assert!(matches!(
            InterpolationMatrix::new(&a, &b),
            Err(Error::InvalidArgument(_))
        ));
        assert!(InterpolationMatrix::new(&a, &a).is_err());
    }
}
