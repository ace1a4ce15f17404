//! The correction divisor `D^♮` and the numerical type of `K_X`.
//!
//! For an exceptional graph `D` with negative definite intersection matrix,
//! `D^♮ = Σ α_i D_i` is the unique solution of `Σ_j α_j I_ij = 2 + w_i`
//! (adjunction for smooth rational curves: `D_i · K = -2 - w_i`).

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{DualGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CanonicalError {
    #[error("the exceptional graph must not contain the marked curve C")]
    HasMarkedCurve,
    #[error("the graph has no marked curve C")]
    MissingC,
    #[error("vertex {vertex} has weight {weight}; minimal resolution graphs need weights <= -2")]
    NotMinimalResolutionGraph { vertex: VertexId, weight: i64 },
    #[error("the intersection matrix is not negative definite")]
    NotContractible,
    #[error("C has weight {weight}; the (C . D^♮) criterion needs a (-1)-curve")]
    OutOfScopeBoundary { weight: i64 },
    #[error("defect: D^♮ has negative coefficient {alpha} at vertex {vertex}")]
    NonEffective { vertex: VertexId, alpha: String },
    #[error("defect: K is numerically trivial but α = {alpha} at vertex {vertex} is not an integer")]
    NonIntegral { vertex: VertexId, alpha: String },
    #[error("C is adjacent to vertex {0}, which has no D^♮ coefficient")]
    MismatchedDNatural(VertexId),
}

/// Formats a rational as `p/q`, always with an explicit denominator.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Coefficients of `D^♮`, keyed by vertex id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DNatural {
    pub coefficients: BTreeMap<VertexId, BigRational>,
}

impl DNatural {
    pub fn get(&self, v: VertexId) -> Option<&BigRational> {
        self.coefficients.get(&v)
    }

    pub fn is_integral(&self) -> bool {
        self.coefficients.values().all(|a| a.is_integer())
    }
}

impl Serialize for DNatural {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.coefficients.len()))?;
        for (id, a) in &self.coefficients {
            map.serialize_entry(&id.to_string(), &format_rational(a))?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum KType {
    /// `-K_X` is numerically ample.
    #[serde(rename = "anti")]
    AntiCanonicalAmple,
    #[serde(rename = "trivial")]
    NumericallyTrivial,
    /// `K_X` is numerically ample.
    #[serde(rename = "canonical")]
    CanonicalAmple,
}

impl KType {
    pub fn name(self) -> &'static str {
        match self {
            KType::AntiCanonicalAmple => "anti",
            KType::NumericallyTrivial => "trivial",
            KType::CanonicalAmple => "canonical",
        }
    }

    /// Position of `pairing` relative to 1.
    pub fn from_pairing(pairing: &BigRational) -> KType {
        match pairing.cmp(&BigRational::one()) {
            std::cmp::Ordering::Less => KType::AntiCanonicalAmple,
            std::cmp::Ordering::Equal => KType::NumericallyTrivial,
            std::cmp::Ordering::Greater => KType::CanonicalAmple,
        }
    }
}

impl std::fmt::Display for KType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `D^♮` of a minimal resolution graph.
pub fn compute_dnatural(d: &DualGraph) -> Result<DNatural, CanonicalError> {
    if d.mark().is_some() {
        return Err(CanonicalError::HasMarkedCurve);
    }
    if let Some(vertex) = d.ids().find(|&v| d.weight(v).unwrap_or(0) > -2) {
        return Err(CanonicalError::NotMinimalResolutionGraph {
            vertex,
            weight: d.weight(vertex).unwrap_or_default(),
        });
    }
    let dn = solve_dnatural(d)?;
    if let Some((&vertex, alpha)) = dn.coefficients.iter().find(|(_, a)| a.is_negative()) {
        return Err(CanonicalError::NonEffective {
            vertex,
            alpha: format_rational(alpha),
        });
    }
    Ok(dn)
}

/// Solves the `D^♮` system on any negative definite graph without a mark,
/// with no restriction on weights and no effectiveness check.
///
/// Needed after a blow-down, when the surviving exceptional curves may
/// include a (-1)-curve.
pub fn solve_dnatural(d: &DualGraph) -> Result<DNatural, CanonicalError> {
    if d.mark().is_some() {
        return Err(CanonicalError::HasMarkedCurve);
    }
    if !d.is_negative_definite() {
        return Err(CanonicalError::NotContractible);
    }
    let rhs: Vec<i64> = d.ids().map(|v| -d.weight(v).expect("listed") - 2).collect();
    let coefficients = d
        .solve_negated(&rhs)
        .expect("negative definite matrices are invertible");
    Ok(DNatural { coefficients })
}

/// `(C · D^♮)`: the sum of the coefficients on the neighbours of `C`.
pub fn c_pairing(g: &DualGraph, dnat: &DNatural) -> Result<BigRational, CanonicalError> {
    let c = g.mark().ok_or(CanonicalError::MissingC)?;
    g.neighbors(c).try_fold(BigRational::zero(), |acc, v| {
        dnat.get(v)
            .map(|a| acc + a)
            .ok_or(CanonicalError::MismatchedDNatural(v))
    })
}

/// Result of [`classify_k_type`] with its supporting data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub ktype: KType,
    pub pairing: BigRational,
    pub dnatural: DNatural,
}

/// Numerical type of `K_X` for a boundary `C + D` with `C` a (-1)-curve.
pub fn classify_k_type(g: &DualGraph) -> Result<Classification, CanonicalError> {
    let c = g.mark().ok_or(CanonicalError::MissingC)?;
    let weight = g.weight(c).expect("marked vertex exists");
    if weight != -1 {
        return Err(CanonicalError::OutOfScopeBoundary { weight });
    }
    let dnatural = compute_dnatural(&g.without_mark())?;
    let pairing = c_pairing(g, &dnatural)?;
    let ktype = KType::from_pairing(&pairing);
    if ktype == KType::NumericallyTrivial {
        if let Some((&vertex, alpha)) =
            dnatural.coefficients.iter().find(|(_, a)| !a.is_integer())
        {
            return Err(CanonicalError::NonIntegral {
                vertex,
                alpha: format_rational(alpha),
            });
        }
    }
    Ok(Classification {
        ktype,
        pairing,
        dnatural,
    })
}
