//! Coordinate boxes in the chart of a group: compact windows `K`, model-set
//! windows `W`, and open neighbourhoods `U`, `V` of the identity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind};
use crate::scalar::QuadraticScalar as Scalar;

/// `[lo, hi]`, or `(lo, hi)` when `open`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
    pub open: bool,
}

impl Interval {
    pub fn closed(lo: Scalar, hi: Scalar) -> Self {
        Interval { lo, hi, open: false }
    }

    pub fn open(lo: Scalar, hi: Scalar) -> Self {
        Interval { lo, hi, open: true }
    }

    pub fn symmetric(half_width: Scalar, open: bool) -> Self {
        Interval { lo: -&half_width, hi: half_width, open }
    }

    pub fn point(v: Scalar) -> Self {
        Interval::closed(v.clone(), v)
    }

    pub fn contains(&self, v: &Scalar) -> bool {
        if self.open {
            self.lo < *v && *v < self.hi
        } else {
            self.lo <= *v && *v <= self.hi
        }
    }

    fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi, open: self.open || other.open }
    }

    fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo, open: self.open }
    }

    /// Closed hull of the product set.
    fn mul(&self, other: &Interval) -> Interval {
        let cands = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = cands.iter().min().cloned().expect("nonempty");
        let hi = cands.iter().max().cloned().expect("nonempty");
        Interval::closed(lo, hi)
    }

    fn is_subset(&self, other: &Interval) -> bool {
        let lo_ok = if other.open && !self.open { other.lo < self.lo } else { other.lo <= self.lo };
        let hi_ok = if other.open && !self.open { self.hi < other.hi } else { self.hi <= other.hi };
        lo_ok && hi_ok
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Window {
    intervals: Vec<Interval>,
}

impl Window {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        for (coord, iv) in intervals.iter().enumerate() {
            let empty = if iv.open { iv.lo >= iv.hi } else { iv.lo > iv.hi };
            if empty {
                return Err(Error::EmptyWindow { coord });
            }
        }
        Ok(Window { intervals })
    }

    /// The closed box `B_R = [-R, R]^dim`.
    pub fn ball(dim: usize, radius: &Scalar) -> Self {
        Window { intervals: vec![Interval::symmetric(radius.clone(), false); dim] }
    }

    pub fn open_ball(dim: usize, radius: &Scalar) -> Self {
        Window { intervals: vec![Interval::symmetric(radius.clone(), true); dim] }
    }

    pub fn point(g: &GroupElement) -> Self {
        Window { intervals: g.coords().iter().cloned().map(Interval::point).collect() }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        let c = g.coords();
        c.len() == self.intervals.len() && self.intervals.iter().zip(c).all(|(iv, v)| iv.contains(v))
    }

    /// Membership in `W ∩ W⁻¹`, the symmetric part of the box.
    pub fn contains_symmetric(&self, g: &GroupElement) -> bool {
        self.contains(g) && self.contains(&g.inv())
    }

    /// Every coordinate interval is centred at 0 with positive width.
    pub fn is_symmetric_neighbourhood(&self) -> bool {
        self.intervals.iter().all(|iv| iv.lo == -&iv.hi && iv.hi.signum() > 0)
    }

    pub fn closure(&self) -> Window {
        Window {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval::closed(iv.lo.clone(), iv.hi.clone()))
                .collect(),
        }
    }

    /// Smallest `R` with `self ⊆ B_R`.
    pub fn radius(&self) -> Scalar {
        self.intervals.iter().flat_map(|iv| [iv.lo.abs(), iv.hi.abs()]).max().unwrap_or_else(Scalar::zero)
    }

    pub fn is_subset(&self, other: &Window) -> bool {
        self.dim() == other.dim() && self.intervals.iter().zip(&other.intervals).all(|(a, b)| a.is_subset(b))
    }

    pub fn covers_ball(&self, radius: &Scalar) -> bool {
        Window::ball(self.dim(), radius).is_subset(self)
    }

    /// Coordinate hull of `{a·b : a ∈ A, b ∈ B}`.
    ///
    /// Open flags propagate through the additive terms, so for open factors
    /// the hull is open and exact about non-attained bounds.
    pub fn product_hull(kind: GroupKind, a: &Window, b: &Window) -> Window {
        let (x, y) = (&a.intervals, &b.intervals);
        let intervals = match kind {
            GroupKind::Abelian(_) => x.iter().zip(y).map(|(s, t)| s.add(t)).collect(),
            GroupKind::Heisenberg => {
                let mut z = x[2].add(&y[2]).add(&x[0].mul(&y[1]));
                z.open = x[2].open || y[2].open;
                vec![x[0].add(&y[0]), x[1].add(&y[1]), z]
            }
        };
        Window { intervals }
    }

    /// Coordinate hull of `{w⁻¹ : w ∈ W}`.
    pub fn inverse_hull(kind: GroupKind, w: &Window) -> Window {
        let iv = &w.intervals;
        let intervals = match kind {
            GroupKind::Abelian(_) => iv.iter().map(Interval::neg).collect(),
            GroupKind::Heisenberg => {
                let mut z = iv[0].mul(&iv[1]).add(&iv[2].neg());
                z.open = iv[2].open;
                vec![iv[0].neg(), iv[1].neg(), z]
            }
        };
        Window { intervals }
    }

    /// Coordinate hull of `g·W`.
    pub fn translate_hull(g: &GroupElement, w: &Window) -> Window {
        Window::product_hull(g.kind(), &Window::point(g), w)
    }
}

/// A finite union of boxes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct CompactSet {
    boxes: Vec<Window>,
}

impl CompactSet {
    /// Fails on an empty list or boxes of different dimension.
    pub fn new(boxes: Vec<Window>) -> Result<Self> {
        let dim = boxes.first().map(Window::dim).ok_or(Error::EmptyWindow { coord: 0 })?;
        if boxes.iter().any(|b| b.dim() != dim) {
            return Err(Error::Precondition("boxes of mixed dimension".into()));
        }
        Ok(CompactSet { boxes })
    }

    pub fn boxes(&self) -> &[Window] {
        &self.boxes
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].dim()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.boxes.iter().any(|b| b.contains(g))
    }

    pub fn radius(&self) -> Scalar {
        self.boxes.iter().map(Window::radius).max().unwrap_or_else(Scalar::zero)
    }
}

impl From<Window> for CompactSet {
    fn from(w: Window) -> Self {
        CompactSet { boxes: vec![w] }
    }
}

/// Largest `r ≥ 0` with `y·B_r ⊆ B_R`, or `None` when `y ∉ B_R`.
///
/// Knowing `P ∩ B_R` exactly determines `y⁻¹P ∩ B_r` for this `r`.
pub fn translate_reliable_radius(y: &GroupElement, radius: &Scalar) -> Option<Scalar> {
    if y.norm() > *radius {
        return None;
    }
    let r = match y {
        GroupElement::Abelian(_) => radius - y.norm(),
        GroupElement::Heisenberg([a, b, c]) => {
            let ra = radius - a.abs();
            let rb = radius - b.abs();
            let rc = &(radius - c.abs()) / &(Scalar::one() + a.abs());
            ra.min(rb).min(rc)
        }
    };
    Some(r)
}
