//! Ambient groups: `R^n` under addition and the real Heisenberg group in
//! upper-unitriangular coordinates `(x, y, z)`, both with exact coordinates.

use std::fmt;
use std::ops::Mul;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::QuadraticScalar as Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupKind {
    Abelian(usize),
    Heisenberg,
}

impl GroupKind {
    pub fn dim(self) -> usize {
        match self {
            GroupKind::Abelian(n) => n,
            GroupKind::Heisenberg => 3,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Abelian(n) => write!(f, "R^{n}"),
            GroupKind::Heisenberg => f.write_str("Heisenberg"),
        }
    }
}

impl Serialize for GroupKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Group elements order lexicographically by exact coordinate value.
#[allow(clippy::large_enum_variant)]
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Abelian(Vec<Scalar>),
    /// The matrix `[[1, x, z], [0, 1, y], [0, 0, 1]]`.
    Heisenberg([Scalar; 3]),
}

impl GroupElement {
    pub fn identity(kind: GroupKind) -> Self {
        match kind {
            GroupKind::Abelian(n) => GroupElement::Abelian(vec![Scalar::zero(); n]),
            GroupKind::Heisenberg => {
                GroupElement::Heisenberg([Scalar::zero(), Scalar::zero(), Scalar::zero()])
            }
        }
    }

    pub fn from_coords(kind: GroupKind, coords: Vec<Scalar>) -> Result<Self> {
        if coords.len() != kind.dim() {
            return Err(Error::KindMismatch {
                expected: kind.to_string(),
                found: format!("{} coordinates", coords.len()),
            });
        }
        Ok(match kind {
            GroupKind::Abelian(_) => GroupElement::Abelian(coords),
            GroupKind::Heisenberg => {
                let [x, y, z]: [Scalar; 3] = coords.try_into().expect("length checked");
                GroupElement::Heisenberg([x, y, z])
            }
        })
    }

    pub fn scalar(value: Scalar) -> Self {
        GroupElement::Abelian(vec![value])
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupElement::Abelian(c) => GroupKind::Abelian(c.len()),
            GroupElement::Heisenberg(_) => GroupKind::Heisenberg,
        }
    }

    pub fn coords(&self) -> &[Scalar] {
        match self {
            GroupElement::Abelian(c) => c,
            GroupElement::Heisenberg(c) => c,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.coords().iter().all(Scalar::is_zero)
    }

    pub fn checked_mul(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Abelian(a), GroupElement::Abelian(b)) if a.len() == b.len() => {
                Ok(GroupElement::Abelian(a.iter().zip(b).map(|(s, t)| s + t).collect()))
            }
            (GroupElement::Heisenberg([x1, y1, z1]), GroupElement::Heisenberg([x2, y2, z2])) => {
                Ok(GroupElement::Heisenberg([x1 + x2, y1 + y2, z1 + z2 + x1 * y2]))
            }
            _ => Err(Error::KindMismatch {
                expected: self.kind().to_string(),
                found: other.kind().to_string(),
            }),
        }
    }

    pub fn inv(&self) -> GroupElement {
        match self {
            GroupElement::Abelian(c) => GroupElement::Abelian(c.iter().map(|s| -s).collect()),
            GroupElement::Heisenberg([x, y, z]) => GroupElement::Heisenberg([-x, -y, x * y - z]),
        }
    }

    /// Applies the Galois automorphism to every coordinate.
    pub fn galois_conjugate(&self) -> GroupElement {
        match self {
            GroupElement::Abelian(c) => GroupElement::Abelian(c.iter().map(Scalar::conjugate).collect()),
            GroupElement::Heisenberg([x, y, z]) => {
                GroupElement::Heisenberg([x.conjugate(), y.conjugate(), z.conjugate()])
            }
        }
    }

    /// Sup of the absolute values of the coordinates.
    pub fn norm(&self) -> Scalar {
        self.coords().iter().map(Scalar::abs).max().unwrap_or_else(Scalar::zero)
    }

    /// `max(|a⁻¹b|, |b⁻¹a|)`, a symmetric left-invariant gauge.
    pub fn distance(&self, other: &GroupElement) -> Scalar {
        let ab = (&self.inv() * other).norm();
        match self.kind() {
            GroupKind::Abelian(_) => ab,
            GroupKind::Heisenberg => ab.max((&other.inv() * self).norm()),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords().iter().map(Scalar::to_f64).collect()
    }
}

/// Panics on mismatched groups; use [`GroupElement::checked_mul`] for
/// untrusted input.
impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        self.checked_mul(rhs).expect("group mismatch in product")
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.coords();
        if c.len() == 1 {
            return write!(f, "{}", c[0]);
        }
        f.write_str("(")?;
        for (i, s) in c.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}
