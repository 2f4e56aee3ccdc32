//! Overlapping Schwarz smoothers with fast-diagonalization subdomain solves.

mod fdm;
mod subdomain;
mod weights;

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use fdm::{factorize_fdm, restrict_operator_1d, solve_subdomain, Factor1D, FdmFactor, FdmWorkspace};
pub use subdomain::{build_subdomains, Range1D, SubdomainKind, SubdomainSpec};
pub use weights::{
    build_weights, element_coordinates, face_coordinates, overlap_width, WeightProfile, WeightingKind,
};

use crate::basis::ReferenceBasis;
use crate::error::{Error, Result};
use crate::mesh::NodalField;
use crate::operator::SystemOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchwarzMethod {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubdomainFamily {
    ElementCentered,
    /// Two partitions, faces normal to direction 1 then direction 2.
    FaceCentered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmootherConfig {
    pub method: SchwarzMethod,
    pub family: SubdomainFamily,
    pub overlap: usize,
    /// Only used by the additive method.
    pub weighting: WeightingKind,
}

#[derive(Debug, Clone)]
struct Subdomain {
    spec: SubdomainSpec,
    global: [Vec<usize>; 2],
    offsets: [Vec<usize>; 2],
    factor: FdmFactor,
}

#[derive(Debug, Clone)]
struct Partition {
    subdomains: Vec<Subdomain>,
    weights: WeightProfile,
}

/// Schwarz smoother on one mesh level, with all subdomain factorizations.
#[derive(Debug, Clone)]
pub struct SchwarzSmoother {
    config: SmootherConfig,
    len: usize,
    partitions: Vec<Partition>,
}

#[derive(Default)]
struct Scratch {
    r: Vec<f64>,
    du: Vec<f64>,
    fdm: FdmWorkspace,
}

impl Scratch {
    fn fit(&mut self, n: usize) {
        self.r.resize(n, 0.0);
        self.du.resize(n, 0.0);
    }
}

impl SchwarzSmoother {
    pub fn new(op: &SystemOperator, basis: &ReferenceBasis, config: SmootherConfig) -> Result<Self> {
        let shape = op.shape();
        if shape.order() != basis.order() {
            return Err(Error::InvalidArgument(format!(
                "operator of order {} with basis of order {}",
                shape.order(),
                basis.order()
            )));
        }
        let kinds = match config.family {
            SubdomainFamily::ElementCentered => vec![SubdomainKind::ElementCentered],
            SubdomainFamily::FaceCentered => {
                vec![SubdomainKind::FaceCentered(0), SubdomainKind::FaceCentered(1)]
            }
        };
        let dims = shape.dims();
        let mut by_range: HashMap<(usize, Range1D), usize> = HashMap::new();
        let mut by_content: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut factors: Vec<Arc<Factor1D>> = Vec::new();
        let mut inverses: HashMap<(usize, usize), Arc<DMatrix<f64>>> = HashMap::new();
        let mut partitions = Vec::with_capacity(kinds.len());
        let mut id = 0;
        for kind in kinds {
            let specs = subdomain::subdomain_specs(shape.nel, basis.order(), kind, config.overlap)?;
            let weights = build_weights(&specs[0], basis, config.weighting);
            let mut subdomains = Vec::with_capacity(specs.len());
            for spec in specs {
                let mut idx = [0usize; 2];
                for d in 0..2 {
                    let range = spec.ranges[d];
                    idx[d] = match by_range.get(&(d, range)) {
                        Some(&i) => i,
                        None => {
                            let (mass, stiff) = restrict_operator_1d(op.dir(d), range)?;
                            let key: Vec<u64> =
                                mass.iter().chain(stiff.iter()).map(|v| v.to_bits()).collect();
                            let i = match by_content.get(&key) {
                                Some(&i) => i,
                                None => {
                                    let f = Factor1D::new(&mass, &stiff).map_err(|reason| {
                                        Error::Factorization { subdomain: id, reason }
                                    })?;
                                    factors.push(Arc::new(f));
                                    by_content.insert(key, factors.len() - 1);
                                    factors.len() - 1
                                }
                            };
                            by_range.insert((d, range), i);
                            i
                        }
                    };
                }
                let inv = inverses
                    .entry((idx[0], idx[1]))
                    .or_insert_with(|| {
                        Arc::new(fdm::reciprocal_eigenvalues(&factors[idx[0]], &factors[idx[1]]))
                    })
                    .clone();
                let factor = FdmFactor::from_parts(factors[idx[0]].clone(), factors[idx[1]].clone(), inv);
                let global = [0, 1].map(|d| spec.ranges[d].indices(dims[d]).collect::<Vec<_>>());
                let offsets = [
                    global[0].iter().map(|&g| shape.offset_part1(g)).collect(),
                    global[1].iter().map(|&g| shape.offset_part2(g)).collect(),
                ];
                subdomains.push(Subdomain {
                    spec,
                    global,
                    offsets,
                    factor,
                });
                id += 1;
            }
            partitions.push(Partition { subdomains, weights });
        }
        Ok(Self {
            config,
            len: shape.len(),
            partitions,
        })
    }

    pub fn config(&self) -> SmootherConfig {
        self.config
    }

    /// Number of partitions applied per sweep (1 or 2).
    pub fn num_partitions(&self) -> usize {
        self.partitions.len()
    }

    pub fn subdomains(&self, partition: usize) -> impl Iterator<Item = &SubdomainSpec> {
        self.partitions[partition].subdomains.iter().map(|s| &s.spec)
    }

    pub fn factor(&self, partition: usize, subdomain: usize) -> &FdmFactor {
        &self.partitions[partition].subdomains[subdomain].factor
    }

    pub fn weights(&self, partition: usize) -> &WeightProfile {
        &self.partitions[partition].weights
    }

    fn check(&self, u: &NodalField, rhs: &NodalField) -> Result<()> {
        for f in [u, rhs] {
            if f.len() != self.len {
                return Err(Error::ShapeMismatch {
                    expected: self.len,
                    actual: f.len(),
                });
            }
        }
        Ok(())
    }

    fn partition_order(&self, reverse: bool) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.partitions.len()).collect();
        if reverse {
            order.reverse();
        }
        order
    }

    /// Weighted additive sweep. Face-centered partitions run one after the
    /// other, each on the residual left by the previous one; `reverse` swaps
    /// their order.
    pub fn additive_sweep(
        &self,
        op: &SystemOperator,
        u: &mut NodalField,
        rhs: &NodalField,
        reverse: bool,
    ) -> Result<()> {
        self.check(u, rhs)?;
        let mut scratch = Scratch::default();
        let mut r = vec![0.0; self.len];
        for p in self.partition_order(reverse) {
            op.apply_slice(u.as_slice(), &mut r);
            for (ri, fi) in r.iter_mut().zip(rhs.as_slice()) {
                *ri = fi - *ri;
            }
            self.additive_partition(p, &r, u.as_mut_slice(), &mut scratch);
        }
        Ok(())
    }

    fn additive_partition(&self, p: usize, r: &[f64], u: &mut [f64], scratch: &mut Scratch) {
        let part = &self.partitions[p];
        let w = &part.weights.weights;
        for sd in &part.subdomains {
            let [o1, o2] = &sd.offsets;
            scratch.fit(o1.len() * o2.len());
            let n1 = o1.len();
            for (b, &ob) in o2.iter().enumerate() {
                for (a, &oa) in o1.iter().enumerate() {
                    scratch.r[a + n1 * b] = r[oa + ob];
                }
            }
            sd.factor.solve_into(&scratch.r, &mut scratch.du, &mut scratch.fdm);
            for (b, &ob) in o2.iter().enumerate() {
                let wb = w[1][b];
                for (a, &oa) in o1.iter().enumerate() {
                    u[oa + ob] += w[0][a] * wb * scratch.du[a + n1 * b];
                }
            }
        }
    }

    /// Multiplicative sweep: subdomains in lexicographic order (reversed if
    /// `reverse`), each solved against the current residual.
    pub fn multiplicative_sweep(
        &self,
        op: &SystemOperator,
        u: &mut NodalField,
        rhs: &NodalField,
        reverse: bool,
    ) -> Result<()> {
        self.check(u, rhs)?;
        let mut scratch = Scratch::default();
        let f = rhs.as_slice();
        let u = u.as_mut_slice();
        for p in self.partition_order(reverse) {
            let subs = &self.partitions[p].subdomains;
            let mut visit = |sd: &Subdomain| {
                let [o1, o2] = &sd.offsets;
                let [g1, g2] = &sd.global;
                let n1 = o1.len();
                scratch.fit(n1 * o2.len());
                for b in 0..o2.len() {
                    for a in 0..n1 {
                        scratch.r[a + n1 * b] = f[o1[a] + o2[b]] - op.apply_at(u, g1[a], g2[b]);
                    }
                }
                sd.factor.solve_into(&scratch.r, &mut scratch.du, &mut scratch.fdm);
                for b in 0..o2.len() {
                    for a in 0..n1 {
                        u[o1[a] + o2[b]] += scratch.du[a + n1 * b];
                    }
                }
            };
            if reverse {
                subs.iter().rev().for_each(&mut visit);
            } else {
                subs.iter().for_each(&mut visit);
            }
        }
        Ok(())
    }

    pub fn sweep(&self, op: &SystemOperator, u: &mut NodalField, rhs: &NodalField, reverse: bool) -> Result<()> {
        match self.config.method {
            SchwarzMethod::Additive => self.additive_sweep(op, u, rhs, reverse),
            SchwarzMethod::Multiplicative => self.multiplicative_sweep(op, u, rhs, reverse),
        }
    }

    /// `steps` sweeps alternating between forward and reversed order,
    /// starting reversed if `start_reversed`.
    pub fn smooth(
        &self,
        op: &SystemOperator,
        u: &mut NodalField,
        rhs: &NodalField,
        steps: usize,
        start_reversed: bool,
    ) -> Result<()> {
        for k in 0..steps {
            self.sweep(op, u, rhs, start_reversed ^ (k % 2 == 1))?;
        }
        Ok(())
    }
}
