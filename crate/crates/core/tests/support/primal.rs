//! Brute-force evaluation of the element-wise primal discrete equations.
//! Shared by the operator tests and the acceptance runner.

use dgpmg::basis::ReferenceBasis;
use dgpmg::mesh::{CartesianMesh2D, NodalField};
use dgpmg::DgParams;

/// Left-hand side of the primal discrete equations, evaluated node by node
/// straight from the element formulas with periodic neighbors.
pub fn primal_form(
    mesh: &CartesianMesh2D,
    basis: &ReferenceBasis,
    params: DgParams,
    u: &NodalField,
) -> NodalField {
    let p = basis.order();
    let np = p + 1;
    let d = basis.diff();
    let ls = basis.stiffness();
    let rho = basis.weights();
    let [nel1, nel2] = mesh.nel();
    let wrap = |m: isize, n: usize| m.rem_euclid(n as isize) as usize;
    let mu0 = |hl: f64, hr: f64| 1.0 / (2.0 * hl * rho[p]) + 1.0 / (2.0 * hr * rho[0]);
    let bracket = |b: f64, hl: f64, hr: f64| {
        2.0 * (b * b + b) / (hl * rho[p]) + 2.0 * (b * b - b) / (hr * rho[0])
            + mu0(hl, hr) * (1.0 + params.mu_star)
    };
    let mut out = NodalField::zeros(u.shape());
    for m2 in 0..nel2 {
        for m1 in 0..nel1 {
            // Line operator in direction `dir` applied at index `i` of the line
            // `line(elem, k)`.
            let line = |dir: usize, m: isize, k: usize, fixed: usize| -> f64 {
                if dir == 0 {
                    u.get(wrap(m, nel1), m2, k, fixed)
                } else {
                    u.get(m1, wrap(m, nel2), fixed, k)
                }
            };
            for j in 0..np {
                for i in 0..np {
                    let mut total = 0.0;
                    for dir in 0..2 {
                        let (idx, fixed, m) = if dir == 0 {
                            (i, j, m1 as isize)
                        } else {
                            (j, i, m2 as isize)
                        };
                        let b = params.beta[dir];
                        let h = mesh.dx(dir, m);
                        let hl = mesh.dx(dir, m - 1);
                        let hr = mesh.dx(dir, m + 1);
                        let w = |mm: isize, k: usize| line(dir, mm, k, fixed);
                        let mut s = 0.0;
                        for k in 0..np {
                            s += 2.0 / h * ls[(idx, k)] * w(m, k);
                        }
                        s += (1.0 - 2.0 * b) / h * d[(0, idx)] * (w(m, 0) - w(m - 1, p));
                        s += (1.0 + 2.0 * b) / h * d[(p, idx)] * (w(m + 1, 0) - w(m, p));
                        if idx == 0 {
                            let dpl: f64 = (0..np).map(|k| d[(p, k)] * w(m - 1, k)).sum();
                            let d0: f64 = (0..np).map(|k| d[(0, k)] * w(m, k)).sum();
                            s += (1.0 + 2.0 * b) / hl * dpl + (1.0 - 2.0 * b) / h * d0;
                            s += bracket(b, hl, h) * (w(m, 0) - w(m - 1, p));
                        }
                        if idx == p {
                            let dp: f64 = (0..np).map(|k| d[(p, k)] * w(m, k)).sum();
                            let d0r: f64 = (0..np).map(|k| d[(0, k)] * w(m + 1, k)).sum();
                            s -= (1.0 + 2.0 * b) / h * dp + (1.0 - 2.0 * b) / hr * d0r;
                            s -= bracket(b, h, hr) * (w(m + 1, 0) - w(m, p));
                        }
                        // Mass of the other direction at this node.
                        let other = 1 - dir;
                        let m_other = if other == 0 { m1 } else { m2 } as isize;
                        let mass = 0.5 * mesh.dx(other, m_other) * rho[fixed];
                        total += mass * s;
                    }
                    let k = u.shape().offset(m1, m2, i, j);
                    out[k] = total;
                }
            }
        }
    }
    out
}
