//! Periodic Cartesian meshes, global index maps and nodal coefficient fields.

use std::ops::{Index, IndexMut};

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

/// Rectangular, doubly periodic tensor-product mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianMesh2D {
    spacing: [Vec<f64>; 2],
    lengths: [f64; 2],
}

impl CartesianMesh2D {
    /// Equidistant mesh on `(0, l1) x (0, l2)`.
    pub fn uniform(l1: f64, l2: f64, nel1: usize, nel2: usize) -> Result<Self> {
        if nel1 == 0 || nel2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "element counts must be positive, got {nel1} x {nel2}"
            )));
        }
        if !(l1 > 0.0 && l2 > 0.0) || !l1.is_finite() || !l2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "domain lengths must be positive, got {l1} x {l2}"
            )));
        }
        Self::from_spacing(vec![l1 / nel1 as f64; nel1], vec![l2 / nel2 as f64; nel2])
    }

    /// Mesh with arbitrary positive element widths per direction.
    pub fn from_spacing(dx1: Vec<f64>, dx2: Vec<f64>) -> Result<Self> {
        for dx in [&dx1, &dx2] {
            if dx.is_empty() {
                return Err(Error::InvalidArgument("empty spacing array".into()));
            }
            if dx.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
                return Err(Error::InvalidArgument(
                    "element spacings must be positive and finite".into(),
                ));
            }
        }
        let lengths = [dx1.iter().sum(), dx2.iter().sum()];
        Ok(Self {
            spacing: [dx1, dx2],
            lengths,
        })
    }

    pub fn nel(&self) -> [usize; 2] {
        [self.spacing[0].len(), self.spacing[1].len()]
    }

    pub fn num_elements(&self) -> usize {
        self.spacing[0].len() * self.spacing[1].len()
    }

    /// Element widths in direction `d` (0 or 1).
    pub fn spacing(&self, d: usize) -> &[f64] {
        &self.spacing[d]
    }

    /// Width of element `m` in direction `d`, with periodic wrap of `m`.
    pub fn dx(&self, d: usize, m: isize) -> f64 {
        let n = self.spacing[d].len() as isize;
        self.spacing[d][m.rem_euclid(n) as usize]
    }

    pub fn lengths(&self) -> [f64; 2] {
        self.lengths
    }

    /// Left/lower coordinate of element `m` in direction `d`.
    pub fn origin(&self, d: usize, m: usize) -> f64 {
        self.spacing[d][..m].iter().sum()
    }
}

/// Per-direction global numbering `l(i, m) = i + (P + 1) * m` with periodic
/// element indices (zero-based here).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalIndexMap {
    np: usize,
    nel: usize,
}

impl GlobalIndexMap {
    pub fn new(order: usize, nel: usize) -> Self {
        Self { np: order + 1, nel }
    }

    /// Number of global indices in this direction, `(P + 1) * nel`.
    pub fn len(&self) -> usize {
        self.np * self.nel
    }

    pub fn is_empty(&self) -> bool {
        self.nel == 0
    }

    pub fn global(&self, i: usize, m: isize) -> usize {
        debug_assert!(i < self.np);
        i + self.np * m.rem_euclid(self.nel as isize) as usize
    }

    /// Inverse map: global index to `(node, element)`.
    pub fn local(&self, global: usize) -> (usize, usize) {
        (global % self.np, global / self.np)
    }
}

/// Shape of a nodal field: elements per direction and nodes per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldShape {
    pub nel: [usize; 2],
    pub np: usize,
}

impl FieldShape {
    pub fn new(mesh: &CartesianMesh2D, order: usize) -> Self {
        Self {
            nel: mesh.nel(),
            np: order + 1,
        }
    }

    pub fn order(&self) -> usize {
        self.np - 1
    }

    pub fn len(&self) -> usize {
        self.np * self.np * self.nel[0] * self.nel[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Global node counts per direction.
    pub fn dims(&self) -> [usize; 2] {
        [self.np * self.nel[0], self.np * self.nel[1]]
    }

    pub fn element_index(&self, m1: usize, m2: usize) -> usize {
        m1 + self.nel[0] * m2
    }

    /// Storage offset of node `(i, j)` in element `(m1, m2)`.
    pub fn offset(&self, m1: usize, m2: usize, i: usize, j: usize) -> usize {
        (self.element_index(m1, m2) * self.np + j) * self.np + i
    }

    /// Storage offset of global node `(I, J)`.
    pub fn offset_global(&self, gi: usize, gj: usize) -> usize {
        self.offset(gi / self.np, gj / self.np, gi % self.np, gj % self.np)
    }

    /// Direction-1 part of the separable storage offset of global index `gi`.
    pub fn offset_part1(&self, gi: usize) -> usize {
        (gi / self.np) * self.np * self.np + gi % self.np
    }

    /// Direction-2 part of the separable storage offset of global index `gj`.
    pub fn offset_part2(&self, gj: usize) -> usize {
        (gj / self.np) * self.nel[0] * self.np * self.np + (gj % self.np) * self.np
    }
}

/// DG coefficient vector in element-major, node-fastest layout.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    shape: FieldShape,
    data: Vec<f64>,
}

impl NodalField {
    pub fn zeros(shape: FieldShape) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn constant(shape: FieldShape, value: f64) -> Self {
        Self {
            shape,
            data: vec![value; shape.len()],
        }
    }

    pub fn from_vec(shape: FieldShape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: shape.len(),
                actual: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    /// Samples `f` at the mapped GLL nodes of every element.
    pub fn from_fn(
        mesh: &CartesianMesh2D,
        nodes: &[f64],
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let shape = FieldShape::new(mesh, nodes.len() - 1);
        let mut field = Self::zeros(shape);
        let [nel1, nel2] = shape.nel;
        for m2 in 0..nel2 {
            let (o2, h2) = (mesh.origin(1, m2), mesh.spacing(1)[m2]);
            for m1 in 0..nel1 {
                let (o1, h1) = (mesh.origin(0, m1), mesh.spacing(0)[m1]);
                for (j, &eta2) in nodes.iter().enumerate() {
                    let x2 = o2 + 0.5 * h2 * (eta2 + 1.0);
                    for (i, &eta1) in nodes.iter().enumerate() {
                        let x1 = o1 + 0.5 * h1 * (eta1 + 1.0);
                        field.data[shape.offset(m1, m2, i, j)] = f(x1, x2);
                    }
                }
            }
        }
        field
    }

    /// Reproducible uniform samples in `[0, 1)`.
    pub fn random(shape: FieldShape, seed: u64) -> Self {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let data = (0..shape.len()).map(|_| unit_f64(&mut rng)).collect();
        Self { shape, data }
    }

    pub fn shape(&self) -> FieldShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, m1: usize, m2: usize, i: usize, j: usize) -> f64 {
        self.data[self.shape.offset(m1, m2, i, j)]
    }

    pub fn get_global(&self, gi: usize, gj: usize) -> f64 {
        self.data[self.shape.offset_global(gi, gj)]
    }

    pub fn set_global(&mut self, gi: usize, gj: usize, value: f64) {
        let k = self.shape.offset_global(gi, gj);
        self.data[k] = value;
    }

    fn check(&self, other: &NodalField) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &NodalField) -> Result<f64> {
        self.check(other)?;
        Ok(dot(&self.data, &other.data))
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.data)
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &NodalField) -> Result<()> {
        self.check(x)?;
        axpy(alpha, &x.data, &mut self.data);
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }
}

impl Index<usize> for NodalField {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.data[k]
    }
}

impl IndexMut<usize> for NodalField {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.data[k]
    }
}

fn unit_f64(rng: &mut Xoshiro256PlusPlus) -> f64 {
    // 53 random mantissa bits, so the result is in [0, 1).
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}
