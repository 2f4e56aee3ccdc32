use crate::basis::ReferenceBasis;
use crate::error::{Error, Result};
use crate::mesh::CartesianMesh2D;

/// Subdomain families of the Schwarz smoothers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubdomainKind {
    ElementCentered,
    /// Subdomain around a face whose normal points along direction `0` or `1`.
    FaceCentered(usize),
}

/// A contiguous run of global 1D node indices, wrapping periodically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Range1D {
    pub start: usize,
    pub len: usize,
}

impl Range1D {
    /// Global indices covered by the range on a periodic line of `n` nodes.
    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> {
        let start = self.start;
        (0..self.len).map(move |a| (start + a) % n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdomainSpec {
    pub kind: SubdomainKind,
    /// Element `(m1, m2)` for element-centered subdomains. For face-centered
    /// ones, the element on the lower side of the face.
    pub anchor: [usize; 2],
    pub ranges: [Range1D; 2],
    pub overlap: usize,
}

impl SubdomainSpec {
    pub fn dims(&self) -> [usize; 2] {
        [self.ranges[0].len, self.ranges[1].len]
    }

    pub fn len(&self) -> usize {
        self.ranges[0].len * self.ranges[1].len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn element_range(m: usize, np: usize, overlap: usize, n: usize) -> Range1D {
    Range1D {
        start: (np * m + n - overlap) % n,
        len: np + 2 * overlap,
    }
}

fn face_range(m: usize, np: usize, n: usize) -> Range1D {
    Range1D {
        start: (np * m + 1) % n,
        len: 2 * np - 2,
    }
}

/// All subdomains of one partition in lexicographic order (direction 1
/// fastest).
pub fn build_subdomains(
    mesh: &CartesianMesh2D,
    basis: &ReferenceBasis,
    kind: SubdomainKind,
    overlap: usize,
) -> Result<Vec<SubdomainSpec>> {
    subdomain_specs(mesh.nel(), basis.order(), kind, overlap)
}

pub(crate) fn subdomain_specs(
    nel: [usize; 2],
    p: usize,
    kind: SubdomainKind,
    overlap: usize,
) -> Result<Vec<SubdomainSpec>> {
    let np = p + 1;
    if overlap > p {
        return Err(Error::InvalidOverlap { overlap, order: p });
    }
    if let SubdomainKind::FaceCentered(d) = kind {
        if d > 1 {
            return Err(Error::InvalidArgument(format!("face normal direction {d}")));
        }
    }
    let n = [nel[0] * np, nel[1] * np];
    let mut specs = Vec::with_capacity(nel[0] * nel[1]);
    for m2 in 0..nel[1] {
        for m1 in 0..nel[0] {
            let m = [m1, m2];
            let ranges = [0, 1].map(|d| match kind {
                SubdomainKind::FaceCentered(normal) if normal == d => face_range(m[d], np, n[d]),
                _ => element_range(m[d], np, overlap, n[d]),
            });
            for d in 0..2 {
                if ranges[d].len >= n[d] {
                    return Err(Error::InvalidArgument(format!(
                        "subdomain of {} nodes covers the periodic direction {d} of {} nodes",
                        ranges[d].len, n[d]
                    )));
                }
            }
            specs.push(SubdomainSpec {
                kind,
                anchor: m,
                ranges,
                overlap,
            });
        }
    }
    Ok(specs)
}
