//! Twigs: linear chains of smooth rational curves.
//!
//! A twig `[a_1, ..., a_r]` stores the *negated* self-intersections of its
//! curves, so the weight `a` stands for a `(-a)`-curve. The empty twig is
//! allowed and has determinant 1.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Guard for the continued-fraction expansion; the denominators strictly
/// decrease, so hitting this means a bug rather than a hard input.
const EXPANSION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TwigError {
    #[error("twig {0} is not admissible: every weight must be at least 2")]
    NotAdmissible(Twig),
    #[error("the empty twig has no inductance")]
    Empty,
    #[error("inductance must lie strictly between 0 and 1, got {0}")]
    InductanceOutOfRange(BigRational),
    #[error("continued fraction expansion exceeded {EXPANSION_CAP} steps")]
    ExpansionCap,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Twig(Vec<i64>);

/// The three derived twigs of a twig.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwigParts {
    /// Drops the first weight.
    pub overline: Twig,
    /// Drops the last weight.
    pub underline: Twig,
    /// Reverses the chain.
    pub transposal: Twig,
}

impl Twig {
    pub fn new(weights: impl Into<Vec<i64>>) -> Self {
        Twig(weights.into())
    }

    pub fn empty() -> Self {
        Twig(Vec::new())
    }

    /// `[count * weight]`.
    pub fn repeated(count: usize, weight: i64) -> Self {
        Twig(vec![weight; count])
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<i64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<i64> {
        self.0.first().copied()
    }

    /// Every weight is at least 2. Vacuously true for the empty twig.
    pub fn is_admissible(&self) -> bool {
        self.0.iter().all(|&a| a >= 2)
    }

    /// `det(-I)` of the chain, via `d_k = a_k d_{k-1} - d_{k-2}`.
    ///
    /// Defined for arbitrary integer weights.
    pub fn determinant(&self) -> BigInt {
        let mut prev = BigInt::zero();
        let mut cur = BigInt::one();
        for &a in &self.0 {
            let next = BigInt::from(a) * &cur - &prev;
            prev = std::mem::replace(&mut cur, next);
        }
        cur
    }

    /// `d` of the twig with both end curves removed.
    ///
    /// For `r = 1` there is nothing left to remove, and the value is the
    /// recurrence's `d_{-1} = 0`. That is the convention under which
    /// `d(overline A) d(underline A) - d(A) d(inner) = 1` holds for every `r >= 1`.
    pub fn inner_determinant(&self) -> BigInt {
        match self.0.len() {
            0 | 1 => BigInt::zero(),
            r => Twig(self.0[1..r - 1].to_vec()).determinant(),
        }
    }

    pub fn overline(&self) -> Twig {
        Twig(self.0.get(1..).unwrap_or_default().to_vec())
    }

    pub fn underline(&self) -> Twig {
        let end = self.0.len().saturating_sub(1);
        Twig(self.0[..end].to_vec())
    }

    pub fn transposal(&self) -> Twig {
        Twig(self.0.iter().rev().copied().collect())
    }

    pub fn parts(&self) -> TwigParts {
        TwigParts {
            overline: self.overline(),
            underline: self.underline(),
            transposal: self.transposal(),
        }
    }

    fn check_admissible_nonempty(&self) -> Result<(), TwigError> {
        if self.is_empty() {
            return Err(TwigError::Empty);
        }
        if !self.is_admissible() {
            return Err(TwigError::NotAdmissible(self.clone()));
        }
        Ok(())
    }

    /// `e(A) = d(overline A) / d(A)`, in lowest terms and strictly inside `(0, 1)`.
    pub fn inductance(&self) -> Result<BigRational, TwigError> {
        self.check_admissible_nonempty()?;
        Ok(BigRational::new(
            self.overline().determinant(),
            self.determinant(),
        ))
    }

    /// Inverse of [`Twig::inductance`]: the ceiling continued fraction of `1/q`.
    ///
    /// With `q = p/d` the weights satisfy `d/p = a_1 - 1/(a_2 - 1/(...))`.
    pub fn from_inductance(q: &BigRational) -> Result<Twig, TwigError> {
        if !q.is_positive() || *q >= BigRational::one() {
            return Err(TwigError::InductanceOutOfRange(q.clone()));
        }
        let mut num = q.denom().clone();
        let mut den = q.numer().clone();
        let mut weights = Vec::new();
        for _ in 0..EXPANSION_CAP {
            if den.is_zero() {
                return Ok(Twig(weights));
            }
            // ceil(num / den) for positive operands
            let a: BigInt = (&num + &den - 1u32) / &den;
            let next = &a * &den - &num;
            weights.push(
                i64::try_from(&a).expect("continued fraction entries are bounded by the denominator"),
            );
            num = std::mem::replace(&mut den, next);
        }
        Err(TwigError::ExpansionCap)
    }

    /// The adjoint `A*`: the admissible twig with `e(A*) = 1 - e(transposal A)`.
    pub fn adjoint(&self) -> Result<Twig, TwigError> {
        let e = self.transposal().inductance()?;
        Twig::from_inductance(&(BigRational::one() - e))
    }
}

impl From<Vec<i64>> for Twig {
    fn from(weights: Vec<i64>) -> Self {
        Twig(weights)
    }
}

impl fmt::Display for Twig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}
