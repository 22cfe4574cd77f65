//! Window-scale certificates for uniform discreteness and finite local
//! complexity, and anchored patch catalogs.
//!
//! A verdict only speaks about the translates `λ⁻¹Λ` with `λ ∈ Λ ∩ S` for
//! the recorded sample window `S`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::pointset::{PointIndex, PointSetDescriptor};
use crate::scalar::QuadraticScalar as Scalar;
use crate::window::Window;

pub const CERTIFICATE_SCOPE: &str = "window-scale certificate";

/// Anchored finite approximant of a point of the discrete hull: the points
/// of some `P ∋ e` inside the closed box `B_R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Patch {
    radius: Scalar,
    points: Arc<[GroupElement]>,
}

impl Patch {
    pub fn new(radius: Scalar, mut points: Vec<GroupElement>) -> Result<Self> {
        points.sort();
        points.dedup();
        let Some(kind) = points.first().map(GroupElement::kind) else {
            return Err(Error::Precondition("a patch contains the identity".into()));
        };
        if points.iter().any(|p| p.kind() != kind) {
            return Err(Error::KindMismatch { expected: kind.to_string(), found: "mixed groups".into() });
        }
        if !points.iter().any(GroupElement::is_identity) {
            return Err(Error::Precondition("a patch contains the identity".into()));
        }
        if let Some(p) = points.iter().find(|p| p.norm() > radius) {
            return Err(Error::Precondition(format!("{p} lies outside B_{radius}")));
        }
        Ok(Patch { radius, points: points.into() })
    }

    pub(crate) fn from_sorted_unchecked(radius: Scalar, points: impl Into<Arc<[GroupElement]>>) -> Self {
        Patch { radius, points: points.into() }
    }

    pub fn radius(&self) -> &Scalar {
        &self.radius
    }

    pub fn points(&self) -> &[GroupElement] {
        &self.points
    }

    pub fn kind(&self) -> crate::group::GroupKind {
        self.points[0].kind()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.points.binary_search(g).is_ok()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatchClass {
    pub points: Arc<[GroupElement]>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatchCatalog {
    pub radius: Scalar,
    pub sample_window: Window,
    pub classes: Vec<PatchClass>,
}

impl PatchCatalog {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn patch(&self, i: usize) -> Patch {
        Patch::from_sorted_unchecked(self.radius.clone(), self.classes[i].points.clone())
    }

    pub fn patches(&self) -> Vec<Patch> {
        (0..self.len()).map(|i| self.patch(i)).collect()
    }

    /// Index of the class with exactly these points.
    pub fn class_of(&self, points: &[GroupElement]) -> Option<usize> {
        self.classes.binary_search_by(|c| c.points[..].cmp(points)).ok()
    }

    pub fn anchors(&self) -> usize {
        self.classes.iter().map(|c| c.multiplicity).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UdCounterexample {
    pub anchor: GroupElement,
    pub first: GroupElement,
    pub second: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UdVerdict {
    pub pass: bool,
    pub scope: &'static str,
    pub neighbourhood: Window,
    pub sample_window: Window,
    pub anchors_checked: usize,
    pub counterexample: Option<UdCounterexample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlcVerdict {
    pub pass: bool,
    pub scope: &'static str,
    pub sample_window: Window,
    /// Smallest norm of a non-identity element of the difference carrier.
    pub carrier_gap: Scalar,
    /// Certified `U` for `Λ`: the open box of half-width `carrier_gap / 2`.
    pub neighbourhood: Window,
    pub point_set: UdVerdict,
    pub carrier_neighbourhood: Window,
    /// Uniform discreteness of the carrier `⊇ Λ⁻¹Λ`.
    pub carrier: UdVerdict,
}

fn anchors_by_norm(mut pts: Vec<GroupElement>) -> Vec<GroupElement> {
    pts.sort_by_cached_key(|p| (p.norm(), p.clone()));
    pts
}

/// For every `λ ∈ Λ ∩ S`, `|λ⁻¹Λ ∩ U| ≤ 1`, with `U` read as an open
/// symmetric neighbourhood. Anchors are visited nearest-first, so the
/// reported counterexample is the one closest to the identity.
pub fn check_uniformly_discrete(desc: &PointSetDescriptor, u: &Window, s: &Window) -> Result<UdVerdict> {
    if !u.is_symmetric_neighbourhood() {
        return Err(Error::NotSymmetric);
    }
    let kind = desc.group();
    let anchors = anchors_by_norm(desc.enumerate_window(s)?.points);
    let reach = Window::product_hull(kind, s, &u.closure()).closure();
    let index = PointIndex::new(desc.enumerate_window(&reach)?.points);
    let closed_u = u.closure();
    let counterexample = anchors.par_iter().find_map_first(|lambda| {
        let mut hits: Vec<GroupElement> =
            index.relative(lambda, &closed_u).into_iter().filter(|r| u.contains_symmetric(r)).collect();
        if hits.len() > 1 {
            hits.sort_by_cached_key(|p| (p.norm(), p.clone()));
            Some(UdCounterexample { anchor: lambda.clone(), first: hits[0].clone(), second: hits[1].clone() })
        } else {
            None
        }
    });
    Ok(UdVerdict {
        pass: counterexample.is_none(),
        scope: CERTIFICATE_SCOPE,
        neighbourhood: u.clone(),
        sample_window: s.clone(),
        anchors_checked: anchors.len(),
        counterexample,
    })
}

/// Smallest norm of a non-identity point, searched in growing boxes.
pub fn min_nonidentity_norm(desc: &PointSetDescriptor) -> Result<Scalar> {
    let dim = desc.group().dim();
    let mut radius = Scalar::one();
    for _ in 0..24 {
        let sample = desc.enumerate_window(&Window::ball(dim, &radius))?;
        if let Some(m) = sample.points.iter().filter(|p| !p.is_identity()).map(GroupElement::norm).min() {
            return Ok(m);
        }
        radius = &radius * &Scalar::from_integer(2);
    }
    Err(Error::ParameterOverflow("no non-identity point within radius 2^24".into()))
}

/// A positive rational `r ≤ value / 2` (exactly `value / 2` when rational).
pub fn rational_half_below(value: &Scalar) -> Scalar {
    let half = value * &Scalar::ratio(1, 2);
    if half.is_rational() {
        return half;
    }
    let mut scale = BigInt::from(1u32 << 20);
    loop {
        let scaled = &half * &Scalar::from_rational(BigRational::from_integer(scale.clone()));
        let n = scaled.floor();
        if !n.is_zero() {
            return Scalar::from_rational(BigRational::new(n, scale));
        }
        scale *= BigInt::one() << 20u32;
    }
}

/// FLC certificate: `Λ` is `U`-discrete for `U` derived from the smallest
/// non-identity element of the difference carrier, and the carrier itself is
/// uniformly discrete (so `Λ⁻¹Λ` is).
pub fn check_flc(desc: &PointSetDescriptor, s: &Window) -> Result<FlcVerdict> {
    let dim = desc.group().dim();
    let carrier = desc.difference_descriptor()?;
    let gap = min_nonidentity_norm(&carrier)?;
    let u = Window::open_ball(dim, &rational_half_below(&gap));
    let point_set = check_uniformly_discrete(desc, &u, s)?;

    let second = carrier.difference_descriptor()?;
    let carrier_gap2 = min_nonidentity_norm(&second)?;
    let u_c = Window::open_ball(dim, &rational_half_below(&carrier_gap2));
    let carrier_verdict = check_uniformly_discrete(&carrier, &u_c, s)?;

    Ok(FlcVerdict {
        pass: point_set.pass && carrier_verdict.pass,
        scope: CERTIFICATE_SCOPE,
        sample_window: s.clone(),
        carrier_gap: gap,
        neighbourhood: u,
        point_set,
        carrier_neighbourhood: u_c,
        carrier: carrier_verdict,
    })
}

/// Distinct anchored patches `(λ⁻¹Λ) ∩ B_R` over `λ ∈ Λ ∩ S`, with counts.
pub fn enumerate_patches(desc: &PointSetDescriptor, radius: &Scalar, s: &Window) -> Result<PatchCatalog> {
    if radius.signum() < 0 {
        return Err(Error::Precondition("patch radius must be non-negative".into()));
    }
    let kind = desc.group();
    let ball = Window::ball(kind.dim(), radius);
    let anchors = desc.enumerate_window(s)?.points;
    let reach = Window::product_hull(kind, s, &ball).closure();
    let index = PointIndex::new(desc.enumerate_window(&reach)?.points);
    let patches: Vec<Vec<GroupElement>> =
        anchors.par_iter().map(|lambda| index.relative(lambda, &ball)).collect();
    let mut counts: BTreeMap<Vec<GroupElement>, usize> = BTreeMap::new();
    for p in patches {
        *counts.entry(p).or_default() += 1;
    }
    Ok(PatchCatalog {
        radius: radius.clone(),
        sample_window: s.clone(),
        classes: counts
            .into_iter()
            .map(|(points, multiplicity)| PatchClass { points: points.into(), multiplicity })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::Interval;

    fn s(n: i64) -> Scalar {
        Scalar::from_integer(n)
    }

    fn interval(lo: i64, hi: i64) -> Window {
        Window::new(vec![Interval::closed(s(lo), s(hi))]).unwrap()
    }

    fn half_open() -> Window {
        Window::open_ball(1, &Scalar::ratio(1, 2))
    }

    #[test]
    fn integers_are_half_discrete() {
        let v = check_uniformly_discrete(&PointSetDescriptor::integers(), &half_open(), &interval(-10, 10))
            .unwrap();
        assert!(v.pass);
        assert_eq!(v.anchors_checked, 21);
    }

    #[test]
    fn silver_mean_is_half_discrete() {
        let v =
            check_uniformly_discrete(&PointSetDescriptor::silver_mean(), &half_open(), &interval(-20, 20))
                .unwrap();
        assert!(v.pass);
    }

    #[test]
    fn composite_counterexample() {
        let v = check_uniformly_discrete(
            &PointSetDescriptor::composite_integers(),
            &half_open(),
            &interval(-10, 10),
        )
        .unwrap();
        assert!(!v.pass);
        let c = v.counterexample.unwrap();
        assert_eq!(c.anchor, GroupElement::scalar(s(0)));
        assert_eq!(c.first, GroupElement::scalar(s(0)));
        assert_eq!(c.second, GroupElement::scalar(Scalar::ratio(1, 4)));
    }

    #[test]
    fn asymmetric_u_rejected() {
        let u = Window::new(vec![Interval::open(s(-1), s(2))]).unwrap();
        assert_eq!(
            check_uniformly_discrete(&PointSetDescriptor::integers(), &u, &interval(-1, 1)),
            Err(Error::NotSymmetric)
        );
    }

    #[test]
    fn flc_certificates() {
        let v = check_flc(&PointSetDescriptor::silver_mean(), &interval(-20, 20)).unwrap();
        assert!(v.pass);
        assert_eq!(v.carrier_gap, s(1));
        assert_eq!(v.neighbourhood, half_open());

        let z2 = check_flc(&PointSetDescriptor::integer_lattice(2), &Window::ball(2, &s(5))).unwrap();
        assert!(z2.pass);
        assert_eq!(z2.neighbourhood, Window::open_ball(2, &Scalar::ratio(1, 2)));

        let wide = PointSetDescriptor::silver_mean_with_window(s(10));
        let v = check_flc(&wide, &interval(-5, 5)).unwrap();
        assert!(v.pass);
        assert!(v.carrier_gap.signum() > 0);
    }

    #[test]
    fn rational_half() {
        assert_eq!(rational_half_below(&s(1)), Scalar::ratio(1, 2));
        let irr = Scalar::quadratic(-1, 1, 2).unwrap();
        let h = rational_half_below(&irr);
        assert!(h.is_rational());
        assert!(h.signum() > 0);
        assert!(&h * &s(2) <= irr);
    }

    #[test]
    fn integer_patches() {
        let cat = enumerate_patches(&PointSetDescriptor::integers(), &s(2), &interval(-50, 50)).unwrap();
        assert_eq!(cat.len(), 1);
        assert_eq!(cat.classes[0].multiplicity, 101);
        assert_eq!(cat.classes[0].points.len(), 5);
    }

    #[test]
    fn zero_radius_patches() {
        for d in [PointSetDescriptor::silver_mean(), PointSetDescriptor::integers()] {
            let cat = enumerate_patches(&d, &s(0), &interval(-10, 10)).unwrap();
            assert_eq!(cat.len(), 1);
            assert!(cat.classes[0].points[0].is_identity());
        }
    }

    #[test]
    fn silver_mean_patches_at_1_2() {
        let cat =
            enumerate_patches(&PointSetDescriptor::silver_mean(), &Scalar::ratio(6, 5), &interval(-100, 100))
                .unwrap();
        let as_sets: Vec<Vec<i64>> = cat
            .classes
            .iter()
            .map(|c| c.points.iter().map(|p| p.to_f64()[0].round() as i64).collect())
            .collect();
        assert_eq!(as_sets, vec![vec![-1, 0], vec![-1, 0, 1], vec![0, 1]]);
        assert_eq!(cat.classes.iter().map(|c| c.multiplicity).collect::<Vec<_>>(), vec![71, 1, 71]);
    }

    #[test]
    fn patch_validation() {
        let e = GroupElement::scalar(s(0));
        assert!(Patch::new(s(1), vec![GroupElement::scalar(s(1))]).is_err());
        assert!(Patch::new(s(1), vec![e.clone(), GroupElement::scalar(s(2))]).is_err());
        assert!(Patch::new(s(1), vec![e]).is_ok());
    }
}
