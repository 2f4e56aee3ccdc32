//! The unified interior-penalty / LDG Poisson operator.
//!
//! In each direction the discrete second derivative is a periodic
//! block-tridiagonal matrix `L_d` with blocks `L-`, `L0`, `L+` per element,
//! and the mass is diagonal. The 2D operator is
//! `A = M2 (x) L1 + L2 (x) M1` and is only ever applied matrix-free.

use nalgebra::DMatrix;

use crate::basis::{InterpolationMatrix, ReferenceBasis};
use crate::error::{Error, Result};
use crate::mesh::{CartesianMesh2D, FieldShape, GlobalIndexMap, NodalField};

/// How the face penalty coefficient is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxForm {
    /// Generic penalty `mu = mu0 (1 + mu_star)` with the beta-dependent lifting
    /// corrections.
    #[default]
    Unified,
    /// LDG penalty written as the squared lifting terms plus
    /// `mu_ldg = mu0 (1 + mu_star) - mu0`. Algebraically identical to
    /// `Unified`; kept to check that claim.
    Ldg,
}

/// Flux parameters: dimensionless penalty and the constant auxiliary vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgParams {
    pub mu_star: f64,
    pub beta: [f64; 2],
    pub flux: FluxForm,
}

impl Default for DgParams {
    fn default() -> Self {
        Self {
            mu_star: 1.0,
            beta: [0.0, 0.0],
            flux: FluxForm::Unified,
        }
    }
}

impl DgParams {
    pub fn new(mu_star: f64, beta: [f64; 2]) -> Result<Self> {
        let p = Self {
            mu_star,
            beta,
            flux: FluxForm::Unified,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_star > 0.0) || !self.mu_star.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "penalty factor must be positive, got {}",
                self.mu_star
            )));
        }
        if self.beta.iter().any(|b| !(b.abs() <= 0.5)) {
            return Err(Error::InvalidArgument(format!(
                "|beta_d| must not exceed 1/2, got {:?}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// LDG stability threshold `mu0` at a face between elements of widths
/// `dx_left` and `dx_right`.
pub fn penalty_threshold(dx_left: f64, dx_right: f64, basis: &ReferenceBasis) -> Result<f64> {
    if !(dx_left > 0.0 && dx_right > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "spacings must be positive, got {dx_left} and {dx_right}"
        )));
    }
    let w = basis.weights();
    Ok(mu0(dx_left, dx_right, w[0], w[w.len() - 1]))
}

fn mu0(dx_left: f64, dx_right: f64, rho_0: f64, rho_p: f64) -> f64 {
    1.0 / (2.0 * dx_left * rho_p) + 1.0 / (2.0 * dx_right * rho_0)
}

/// Dense `np x np` block, column-major (`(i, k)` at `k * np + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    np: usize,
    data: Vec<f64>,
}

impl Block {
    fn zeros(np: usize) -> Self {
        Self {
            np,
            data: vec![0.0; np * np],
        }
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[k * self.np + i]
    }

    fn add(&mut self, i: usize, k: usize, v: f64) {
        self.data[k * self.np + i] += v;
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.np..(k + 1) * self.np]
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.np, self.np, &self.data)
    }
}

/// The three blocks coupling element `m` to `m - 1`, `m`, `m + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementBlocks {
    pub lower: Block,
    pub center: Block,
    pub upper: Block,
}

/// Periodic block-tridiagonal 1D stiffness plus diagonal mass.
#[derive(Debug, Clone)]
pub struct GlobalOperator1D {
    np: usize,
    blocks: Vec<ElementBlocks>,
    mass: Vec<f64>,
    map: GlobalIndexMap,
    // Compressed rows of the assembled matrix, used for local residuals.
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl GlobalOperator1D {
    /// Assembles direction `d` of the unified flux formulation.
    pub fn assemble(
        spacing: &[f64],
        basis: &ReferenceBasis,
        beta: f64,
        mu_star: f64,
        flux: FluxForm,
    ) -> Self {
        let np = basis.num_nodes();
        let p = np - 1;
        let nel = spacing.len();
        let d = basis.diff();
        let ls = basis.stiffness();
        let rho = basis.weights();
        let (rho_0, rho_p) = (rho[0], rho[p]);
        let h_at = |m: isize| spacing[m.rem_euclid(nel as isize) as usize];

        // Penalty bracket at the face between elements of widths hl and hr.
        let bracket = |hl: f64, hr: f64| -> f64 {
            let m0 = mu0(hl, hr, rho_0, rho_p);
            let mu = m0 * (1.0 + mu_star);
            match flux {
                FluxForm::Unified => {
                    2.0 * (beta * beta + beta) / (hl * rho_p)
                        + 2.0 * (beta * beta - beta) / (hr * rho_0)
                        + mu
                }
                FluxForm::Ldg => {
                    let mu_ldg = mu - m0;
                    (1.0 + 2.0 * beta).powi(2) / (2.0 * hl * rho_p)
                        + (1.0 - 2.0 * beta).powi(2) / (2.0 * hr * rho_0)
                        + mu_ldg
                }
            }
        };
        let bm = 1.0 - 2.0 * beta;
        let bp = 1.0 + 2.0 * beta;

        let mut blocks = Vec::with_capacity(nel);
        let mut mass = Vec::with_capacity(nel * np);
        for m in 0..nel {
            let mi = m as isize;
            let (h, hl, hr) = (h_at(mi), h_at(mi - 1), h_at(mi + 1));
            let c_left = bracket(hl, h);
            let c_right = bracket(h, hr);

            let mut center = Block::zeros(np);
            for k in 0..np {
                for i in 0..np {
                    center.add(i, k, 2.0 / h * ls[(i, k)]);
                }
            }
            for i in 0..np {
                center.add(i, 0, bm / h * d[(0, i)]);
                center.add(0, i, bm / h * d[(0, i)]);
                center.add(i, p, -bp / h * d[(p, i)]);
                center.add(p, i, -bp / h * d[(p, i)]);
            }
            center.add(0, 0, c_left);
            center.add(p, p, c_right);

            let mut lower = Block::zeros(np);
            for i in 0..np {
                lower.add(i, p, -bm / h * d[(0, i)]);
                lower.add(0, i, bp / hl * d[(p, i)]);
            }
            lower.add(0, p, -c_left);

            let mut upper = Block::zeros(np);
            for i in 0..np {
                upper.add(i, 0, bp / h * d[(p, i)]);
                upper.add(p, i, -bm / hr * d[(0, i)]);
            }
            upper.add(p, 0, -c_right);

            blocks.push(ElementBlocks {
                lower,
                center,
                upper,
            });
            mass.extend(rho.iter().map(|r| 0.5 * h * r));
        }

        let map = GlobalIndexMap::new(p, nel);
        let mut op = Self {
            np,
            blocks,
            mass,
            map,
            row_ptr: Vec::new(),
            cols: Vec::new(),
            vals: Vec::new(),
        };
        op.build_rows();
        op
    }

    fn build_rows(&mut self) {
        let n = self.len();
        let np = self.np;
        self.row_ptr = Vec::with_capacity(n + 1);
        self.row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(3 * np);
        for g in 0..n {
            let (i, m) = self.map.local(g);
            row.clear();
            let b = &self.blocks[m];
            for (r, block) in [(-1isize, &b.lower), (0, &b.center), (1, &b.upper)] {
                for k in 0..np {
                    let v = block.get(i, k);
                    if v != 0.0 {
                        row.push((self.map.global(k, m as isize + r), v));
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            let start = self.cols.len();
            for &(c, v) in row.iter() {
                if self.cols.len() > start && *self.cols.last().unwrap() == c {
                    *self.vals.last_mut().unwrap() += v;
                } else {
                    self.cols.push(c);
                    self.vals.push(v);
                }
            }
            self.row_ptr.push(self.cols.len());
        }
    }

    /// Number of global indices, `(P + 1) * nel`.
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn num_nodes(&self) -> usize {
        self.np
    }

    pub fn num_elements(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self, m: usize) -> &ElementBlocks {
        &self.blocks[m]
    }

    /// Diagonal of the global 1D mass matrix.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn index_map(&self) -> GlobalIndexMap {
        self.map
    }

    /// Nonzeros `(column, value)` of global row `g`.
    pub fn row(&self, g: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[g], self.row_ptr[g + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    /// Entry `(gi, gk)` of the assembled matrix.
    pub fn entry(&self, gi: usize, gk: usize) -> f64 {
        self.row(gi).find(|&(c, _)| c == gk).map_or(0.0, |(_, v)| v)
    }

    /// Assembled dense matrix (for tests and small problems).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for g in 0..n {
            for (c, v) in self.row(g) {
                a[(g, c)] = v;
            }
        }
        a
    }
}

/// The 2D operator `A = M2 (x) L1 + L2 (x) M1`.
#[derive(Debug, Clone)]
pub struct SystemOperator {
    shape: FieldShape,
    params: DgParams,
    dirs: [GlobalOperator1D; 2],
    // Sparse neighbor couplings: L- lives in column P and row 0, L+ in column 0
    // and row P. Stored per element as (column, row without the corner).
    lower_parts: [Vec<(Vec<f64>, Vec<f64>)>; 2],
    upper_parts: [Vec<(Vec<f64>, Vec<f64>)>; 2],
}

impl SystemOperator {
    pub fn assemble(mesh: &CartesianMesh2D, basis: &ReferenceBasis, params: DgParams) -> Result<Self> {
        params.validate()?;
        let dirs = [0, 1].map(|d| {
            GlobalOperator1D::assemble(
                mesh.spacing(d),
                basis,
                params.beta[d],
                params.mu_star,
                params.flux,
            )
        });
        let p = basis.order();
        let split = |op: &GlobalOperator1D, lower: bool| -> Vec<(Vec<f64>, Vec<f64>)> {
            (0..op.num_elements())
                .map(|m| {
                    let b = op.blocks(m);
                    let (block, col, row) = if lower {
                        (&b.lower, p, 0)
                    } else {
                        (&b.upper, 0, p)
                    };
                    let column = block.column(col).to_vec();
                    let row_vals = (0..=p)
                        .map(|k| if k == col { 0.0 } else { block.get(row, k) })
                        .collect();
                    (column, row_vals)
                })
                .collect()
        };
        let lower_parts = [split(&dirs[0], true), split(&dirs[1], true)];
        let upper_parts = [split(&dirs[0], false), split(&dirs[1], false)];
        Ok(Self {
            shape: FieldShape::new(mesh, p),
            params,
            dirs,
            lower_parts,
            upper_parts,
        })
    }

    pub fn shape(&self) -> FieldShape {
        self.shape
    }

    pub fn params(&self) -> DgParams {
        self.params
    }

    /// 1D operator in direction `d` (0 or 1).
    pub fn dir(&self, d: usize) -> &GlobalOperator1D {
        &self.dirs[d]
    }

    pub fn apply(&self, u: &NodalField) -> Result<NodalField> {
        let mut out = NodalField::zeros(self.shape);
        self.apply_into(u, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, u: &NodalField, out: &mut NodalField) -> Result<()> {
        self.apply_counted(u, out).map(|_| ())
    }

    /// Applies `A` and returns the number of floating-point multiplications.
    pub fn apply_counted(&self, u: &NodalField, out: &mut NodalField) -> Result<u64> {
        for f in [u, &*out] {
            if f.shape() != self.shape {
                return Err(Error::ShapeMismatch {
                    expected: self.shape.len(),
                    actual: f.len(),
                });
            }
        }
        Ok(self.kernel(u.as_slice(), out.as_mut_slice()))
    }

    /// Raw-slice form of [`apply_into`](Self::apply_into).
    pub(crate) fn apply_slice(&self, u: &[f64], out: &mut [f64]) {
        self.kernel(u, out);
    }

    fn kernel(&self, u: &[f64], out: &mut [f64]) -> u64 {
        let np = self.shape.np;
        let nn = np * np;
        let p = np - 1;
        let [nel1, nel2] = self.shape.nel;
        let mass1 = self.dirs[0].mass();
        let mass2 = self.dirs[1].mass();
        let mut t = vec![0.0; nn];
        let mut mults = 0u64;
        let np64 = np as u64;

        for m2 in 0..nel2 {
            let m2d = (m2 + nel2 - 1) % nel2;
            let m2u = (m2 + 1) % nel2;
            for m1 in 0..nel1 {
                let e = self.shape.element_index(m1, m2);
                let ue = &u[e * nn..(e + 1) * nn];

                // Direction 1: lines of constant j.
                t.iter_mut().for_each(|v| *v = 0.0);
                let c1 = &self.dirs[0].blocks(m1).center;
                for j in 0..np {
                    let tl = &mut t[j * np..(j + 1) * np];
                    for k in 0..np {
                        let x = ue[j * np + k];
                        for (ti, ci) in tl.iter_mut().zip(c1.column(k)) {
                            *ti += ci * x;
                        }
                    }
                }
                mults += np64 * np64 * np64;
                let el = self.shape.element_index((m1 + nel1 - 1) % nel1, m2);
                let eu = self.shape.element_index((m1 + 1) % nel1, m2);
                let (lcol, lrow) = &self.lower_parts[0][m1];
                let (ucol, urow) = &self.upper_parts[0][m1];
                for j in 0..np {
                    let ul = &u[el * nn + j * np..el * nn + (j + 1) * np];
                    let uu = &u[eu * nn + j * np..eu * nn + (j + 1) * np];
                    let tl = &mut t[j * np..(j + 1) * np];
                    let (xl, xu) = (ul[p], uu[0]);
                    for i in 0..np {
                        tl[i] += lcol[i] * xl + ucol[i] * xu;
                    }
                    tl[0] += dot_n(lrow, ul);
                    tl[p] += dot_n(urow, uu);
                }
                mults += 4 * np64 * np64;
                let oe = &mut out[e * nn..(e + 1) * nn];
                for j in 0..np {
                    let w = mass2[m2 * np + j];
                    for i in 0..np {
                        oe[j * np + i] = w * t[j * np + i];
                    }
                }
                mults += np64 * np64;

                // Direction 2: lines of constant i.
                t.iter_mut().for_each(|v| *v = 0.0);
                let c2 = &self.dirs[1].blocks(m2).center;
                for l in 0..np {
                    let ul = &ue[l * np..(l + 1) * np];
                    let col = c2.column(l);
                    for j in 0..np {
                        let cjl = col[j];
                        let tl = &mut t[j * np..(j + 1) * np];
                        for (ti, x) in tl.iter_mut().zip(ul) {
                            *ti += cjl * x;
                        }
                    }
                }
                mults += np64 * np64 * np64;
                let ed = self.shape.element_index(m1, m2d);
                let eup = self.shape.element_index(m1, m2u);
                let ud = &u[ed * nn..(ed + 1) * nn];
                let uu = &u[eup * nn..(eup + 1) * nn];
                let (dcol, drow) = &self.lower_parts[1][m2];
                let (ucol, urow) = &self.upper_parts[1][m2];
                let (udp, uu0) = (&ud[p * np..], &uu[..np]);
                for j in 0..np {
                    let (a, b) = (dcol[j], ucol[j]);
                    let tl = &mut t[j * np..(j + 1) * np];
                    for i in 0..np {
                        tl[i] += a * udp[i] + b * uu0[i];
                    }
                }
                for l in 0..np {
                    let (a, b) = (drow[l], urow[l]);
                    if a != 0.0 {
                        for i in 0..np {
                            t[i] += a * ud[l * np + i];
                        }
                    }
                    if b != 0.0 {
                        for i in 0..np {
                            t[p * np + i] += b * uu[l * np + i];
                        }
                    }
                }
                mults += 4 * np64 * np64;
                let m1off = m1 * np;
                for j in 0..np {
                    for i in 0..np {
                        oe[j * np + i] += mass1[m1off + i] * t[j * np + i];
                    }
                }
                mults += np64 * np64;
            }
        }
        mults
    }

    /// `(A u)` at global node `(gi, gj)` using the compressed 1D rows.
    pub(crate) fn apply_at(&self, u: &[f64], gi: usize, gj: usize) -> f64 {
        let s = &self.shape;
        let (o1, o2) = (s.offset_part1(gi), s.offset_part2(gj));
        let mut l1u = 0.0;
        for (c, v) in self.dirs[0].row(gi) {
            l1u += v * u[s.offset_part1(c) + o2];
        }
        let mut l2u = 0.0;
        for (c, v) in self.dirs[1].row(gj) {
            l2u += v * u[o1 + s.offset_part2(c)];
        }
        self.dirs[1].mass()[gj] * l1u + self.dirs[0].mass()[gi] * l2u
    }

    /// Dense Kronecker assembly, indexed by storage offsets. Small problems only.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let s = self.shape;
        let [n1, n2] = s.dims();
        let (l1, l2) = (self.dirs[0].to_dense(), self.dirs[1].to_dense());
        let (m1, m2) = (self.dirs[0].mass(), self.dirs[1].mass());
        let mut a = DMatrix::zeros(s.len(), s.len());
        for gj in 0..n2 {
            for gi in 0..n1 {
                let row = s.offset_global(gi, gj);
                for gl in 0..n2 {
                    for gk in 0..n1 {
                        let mut v = 0.0;
                        if gl == gj {
                            v += m2[gj] * l1[(gi, gk)];
                        }
                        if gk == gi {
                            v += l2[(gj, gl)] * m1[gi];
                        }
                        if v != 0.0 {
                            a[(row, s.offset_global(gk, gl))] = v;
                        }
                    }
                }
            }
        }
        a
    }
}

#[inline]
fn dot_n(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Right-hand side `g = (dx1 dx2 / 4) rho_i rho_j f(x_ij)` per element.
pub fn build_rhs(
    mesh: &CartesianMesh2D,
    basis: &ReferenceBasis,
    f: impl Fn(f64, f64) -> f64,
) -> NodalField {
    let mut g = NodalField::from_fn(mesh, basis.nodes(), f);
    let shape = g.shape();
    let rho = basis.weights();
    let np = shape.np;
    for m2 in 0..shape.nel[1] {
        let h2 = mesh.spacing(1)[m2];
        for m1 in 0..shape.nel[0] {
            let h1 = mesh.spacing(0)[m1];
            for j in 0..np {
                for i in 0..np {
                    let k = shape.offset(m1, m2, i, j);
                    g[k] *= 0.25 * h1 * h2 * rho[i] * rho[j];
                }
            }
        }
    }
    g
}

/// Removes the mean, i.e. the Euclidean projection onto the complement of
/// the constants (the null space of `A`).
pub fn project_null_space(v: &NodalField) -> NodalField {
    let mut out = v.clone();
    project_null_space_in_place(out.as_mut_slice());
    out
}

pub(crate) fn project_null_space_in_place(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Quadrature L2 error against `exact` after removing the best-fit constant.
///
/// Integrals are over-integrated on GLL points of order `P + 4` so that the
/// interpolation error of `u` itself is measured.
pub fn l2_error(
    mesh: &CartesianMesh2D,
    basis: &ReferenceBasis,
    u: &NodalField,
    exact: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let shape = u.shape();
    if shape != FieldShape::new(mesh, basis.order()) {
        return Err(Error::ShapeMismatch {
            expected: FieldShape::new(mesh, basis.order()).len(),
            actual: u.len(),
        });
    }
    let fine = ReferenceBasis::new(basis.order() + 4)?;
    let interp = InterpolationMatrix::new(basis, &fine)?;
    let im = interp.matrix();
    let (np, nq) = (basis.num_nodes(), fine.num_nodes());
    let rho = fine.weights();
    let eta = fine.nodes();

    // Differences at quadrature points with their weights, then the best
    // constant shift is the weighted mean.
    let mut diffs = Vec::with_capacity(mesh.num_elements() * nq * nq);
    let mut tmp = vec![0.0; nq * np];
    for m2 in 0..shape.nel[1] {
        let (o2, h2) = (mesh.origin(1, m2), mesh.spacing(1)[m2]);
        for m1 in 0..shape.nel[0] {
            let (o1, h1) = (mesh.origin(0, m1), mesh.spacing(0)[m1]);
            // tmp[a, j] = sum_i I[a, i] u[i, j]
            for j in 0..np {
                for a in 0..nq {
                    tmp[j * nq + a] = (0..np).map(|i| im[(a, i)] * u.get(m1, m2, i, j)).sum();
                }
            }
            for b in 0..nq {
                let x2 = o2 + 0.5 * h2 * (eta[b] + 1.0);
                for a in 0..nq {
                    let x1 = o1 + 0.5 * h1 * (eta[a] + 1.0);
                    let uh: f64 = (0..np).map(|j| im[(b, j)] * tmp[j * nq + a]).sum();
                    let w = 0.25 * h1 * h2 * rho[a] * rho[b];
                    diffs.push((w, uh - exact(x1, x2)));
                }
            }
        }
    }
    let area: f64 = diffs.iter().map(|d| d.0).sum();
    let shift = diffs.iter().map(|(w, e)| w * e).sum::<f64>() / area;
    Ok(diffs
        .iter()
        .map(|(w, e)| w * (e - shift).powi(2))
        .sum::<f64>()
        .sqrt())
}
