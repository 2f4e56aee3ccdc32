use std::str::FromStr;

use crate::basis::ReferenceBasis;
use crate::error::Error;

use super::{SubdomainKind, SubdomainSpec};

/// Transition function used in the weighting of additive corrections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum WeightingKind {
    Unweighted,
    Arithmetic,
    Cubic,
    #[default]
    Quintic,
}

impl WeightingKind {
    pub fn name(&self) -> &'static str {
        match self {
            WeightingKind::Unweighted => "unweighted",
            WeightingKind::Arithmetic => "arithmetic",
            WeightingKind::Cubic => "cubic",
            WeightingKind::Quintic => "quintic",
        }
    }

    /// Odd transition `phi`, saturating to `sgn(x)` outside `[-1, 1]`.
    /// The unweighted kind is the constant 1.
    pub fn phi(&self, x: f64) -> f64 {
        if *self == WeightingKind::Unweighted {
            return 1.0;
        }
        if x.abs() >= 1.0 {
            return x.signum();
        }
        match self {
            WeightingKind::Arithmetic => 0.0,
            WeightingKind::Cubic => 0.5 * (3.0 * x - x.powi(3)),
            WeightingKind::Quintic => (15.0 * x - 10.0 * x.powi(3) + 3.0 * x.powi(5)) / 8.0,
            WeightingKind::Unweighted => unreachable!(),
        }
    }

    /// Hat-shaped weight at extended coordinate `xi` for overlap width `delta`.
    pub fn hat(&self, xi: f64, delta: f64) -> f64 {
        if delta == 0.0 {
            return 1.0;
        }
        0.5 * (self.phi((1.0 + xi) / delta) + self.phi((1.0 - xi) / delta))
    }

    /// Normal weight of a face-centered subdomain at distance `xi` from the face.
    pub fn face(&self, xi: f64) -> f64 {
        0.5 * (1.0 + self.phi(1.0 - xi.abs()))
    }
}

impl FromStr for WeightingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "unweighted" | "none" => Ok(WeightingKind::Unweighted),
            "arithmetic" => Ok(WeightingKind::Arithmetic),
            "cubic" => Ok(WeightingKind::Cubic),
            "quintic" => Ok(WeightingKind::Quintic),
            other => Err(Error::InvalidArgument(format!("unknown weighting kind '{other}'"))),
        }
    }
}

/// Per-direction weights over a subdomain; the 2D weight is their product.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub kind: WeightingKind,
    pub weights: [Vec<f64>; 2],
}

impl WeightProfile {
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.weights[0][a] * self.weights[1][b]
    }
}

/// Extended coordinates of the nodes of an element-centered range: the core
/// element maps to `[-1, 1]`, the neighbor overlaps to `xi - 2` and `xi + 2`.
pub fn element_coordinates(basis: &ReferenceBasis, overlap: usize) -> Vec<f64> {
    let p = basis.order();
    let eta = basis.nodes();
    let left = (p + 1 - overlap..=p).map(|i| eta[i] - 2.0);
    let right = (0..overlap).map(|i| eta[i] + 2.0);
    left.chain(eta.iter().copied()).chain(right).collect()
}

/// Signed distances from the face for the nodes of a face-centered normal
/// range (nodes `1..=P` of the lower element, `0..P` of the upper one).
pub fn face_coordinates(basis: &ReferenceBasis) -> Vec<f64> {
    let p = basis.order();
    let eta = basis.nodes();
    let lower = (1..=p).map(|i| eta[i] - 1.0);
    let upper = (0..p).map(|i| eta[i] + 1.0);
    lower.chain(upper).collect()
}

pub fn overlap_width(basis: &ReferenceBasis, overlap: usize) -> f64 {
    if overlap == 0 {
        0.0
    } else {
        basis.nodes()[overlap] + 1.0
    }
}

pub fn build_weights(spec: &SubdomainSpec, basis: &ReferenceBasis, kind: WeightingKind) -> WeightProfile {
    let delta = overlap_width(basis, spec.overlap);
    let hat: Vec<f64> = element_coordinates(basis, spec.overlap)
        .into_iter()
        .map(|xi| kind.hat(xi, delta))
        .collect();
    let weights = match spec.kind {
        SubdomainKind::ElementCentered => [hat.clone(), hat],
        SubdomainKind::FaceCentered(normal) => {
            let face: Vec<f64> = face_coordinates(basis).into_iter().map(|xi| kind.face(xi)).collect();
            if normal == 0 {
                [face, hat]
            } else {
                [hat, face]
            }
        }
    };
    WeightProfile { kind, weights }
}
