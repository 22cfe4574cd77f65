//! Finite descriptors of point sets `Λ ⊆ G` and exact enumeration of `Λ ∩ K`.
//!
//! Both variants are images of `Z^m` under a coordinate-linear map. Lattices
//! map `n ↦ Σ nᵢ bᵢ (+ offset)`; a model set stacks the physical and internal
//! coordinates of a full-rank lattice `Γ ⊆ G × H` into one invertible square
//! matrix. Integer parameter boxes come from the exact inverse; the last
//! parameter is solved per prefix, and every candidate is filtered exactly.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind};
use crate::scalar::QuadraticScalar as Scalar;
use crate::window::{Interval, Window};

/// Upper bound on the number of parameter prefixes visited by one enumeration.
pub const MAX_PREFIXES: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeSpec {
    pub group: GroupKind,
    pub basis: Vec<GroupElement>,
    pub offsets: Vec<GroupElement>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSetSpec {
    /// `phys_dim × rank`, row `j` gives physical coordinate `j`.
    pub phys_map: Vec<Vec<Scalar>>,
    /// `int_dim × rank`, row `j` gives internal coordinate `j`.
    pub int_map: Vec<Vec<Scalar>>,
    pub window: Window,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSetDescriptor {
    Lattice(LatticeSpec),
    ModelSet(ModelSetSpec),
}

/// A finite view `Λ ∩ K`, sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSample {
    pub window: Window,
    pub points: Vec<GroupElement>,
}

impl PointSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl PointSetDescriptor {
    pub fn lattice(group: GroupKind, basis: Vec<GroupElement>, offsets: Vec<GroupElement>) -> Result<Self> {
        let dim = group.dim();
        if basis.len() != dim {
            return Err(Error::InvalidDescriptor(format!(
                "lattice in {group} needs {dim} basis vectors, got {}",
                basis.len()
            )));
        }
        let mut offsets = if offsets.is_empty() { vec![GroupElement::identity(group)] } else { offsets };
        for g in basis.iter().chain(&offsets) {
            if g.kind() != group {
                return Err(Error::KindMismatch { expected: group.to_string(), found: g.kind().to_string() });
            }
        }
        offsets.sort();
        offsets.dedup();
        if group == GroupKind::Heisenberg {
            check_heisenberg_basis(&basis)?;
            if offsets.len() != 1 || !offsets[0].is_identity() {
                return Err(Error::InvalidDescriptor("Heisenberg lattices take no coset offsets".into()));
            }
        }
        let spec = LatticeSpec { group, basis, offsets };
        invert(&lattice_matrix(&spec))?;
        Ok(PointSetDescriptor::Lattice(spec))
    }

    pub fn model_set(phys_map: Vec<Vec<Scalar>>, int_map: Vec<Vec<Scalar>>, window: Window) -> Result<Self> {
        let rank = phys_map.first().map(Vec::len).unwrap_or(0);
        if phys_map.is_empty() || int_map.is_empty() {
            return Err(Error::InvalidDescriptor("empty projection map".into()));
        }
        if phys_map.iter().chain(&int_map).any(|r| r.len() != rank) {
            return Err(Error::InvalidDescriptor("ragged projection maps".into()));
        }
        if phys_map.len() + int_map.len() != rank {
            return Err(Error::InvalidDescriptor(format!(
                "Γ must have full rank: rank {rank} but dim G + dim H = {}",
                phys_map.len() + int_map.len()
            )));
        }
        if window.dim() != int_map.len() {
            return Err(Error::InvalidDescriptor("window dimension differs from H".into()));
        }
        if !window.is_symmetric_neighbourhood() || window.intervals().iter().any(|iv| iv.open) {
            return Err(Error::InvalidDescriptor(
                "model-set window must be a closed symmetric neighbourhood of 0".into(),
            ));
        }
        let spec = ModelSetSpec { phys_map, int_map, window };
        invert(&stacked_matrix(&spec))?;
        Ok(PointSetDescriptor::ModelSet(spec))
    }

    /// `Z ⊂ R`.
    pub fn integers() -> Self {
        Self::integer_lattice(1)
    }

    /// `Z^n ⊂ R^n`.
    pub fn integer_lattice(n: usize) -> Self {
        let basis = (0..n)
            .map(|i| {
                let mut c = vec![Scalar::zero(); n];
                c[i] = Scalar::one();
                GroupElement::Abelian(c)
            })
            .collect();
        Self::lattice(GroupKind::Abelian(n), basis, vec![]).expect("standard basis")
    }

    /// `Z ∪ (1/4 + Z)`, a finite union of cosets that is not uniformly
    /// discrete at scale 1/2.
    pub fn composite_integers() -> Self {
        let offsets = vec![GroupElement::scalar(Scalar::zero()), GroupElement::scalar(Scalar::ratio(1, 4))];
        Self::lattice(GroupKind::Abelian(1), vec![GroupElement::scalar(Scalar::one())], offsets)
            .expect("valid composite")
    }

    /// The integer Heisenberg group `H(Z)`.
    pub fn heisenberg_integers() -> Self {
        let e = |i: usize| {
            let mut c = [Scalar::zero(), Scalar::zero(), Scalar::zero()];
            c[i] = Scalar::one();
            GroupElement::Heisenberg(c)
        };
        Self::lattice(GroupKind::Heisenberg, vec![e(0), e(1), e(2)], vec![]).expect("H(Z)")
    }

    /// `{a + b√2 : |a − b√2| ≤ 1}`.
    pub fn silver_mean() -> Self {
        Self::silver_mean_with_window(Scalar::one())
    }

    /// `{a + b√2 : |a − b√2| ≤ half_width}`.
    pub fn silver_mean_with_window(half_width: Scalar) -> Self {
        let r2 = Scalar::sqrt(2).expect("2 is squarefree");
        Self::model_set(
            vec![vec![Scalar::one(), r2.clone()]],
            vec![vec![Scalar::one(), -r2]],
            Window::new(vec![Interval::symmetric(half_width, false)]).expect("window"),
        )
        .expect("silver-mean model set")
    }

    pub fn group(&self) -> GroupKind {
        match self {
            PointSetDescriptor::Lattice(l) => l.group,
            PointSetDescriptor::ModelSet(m) => GroupKind::Abelian(m.phys_map.len()),
        }
    }

    /// A descriptor whose point set contains `Λ⁻¹Λ`.
    ///
    /// For a model set this is the model set with window `W⁻¹W`; for a
    /// lattice with cosets `oᵢ + L` it is `L` with offsets `oⱼ − oᵢ`.
    pub fn difference_descriptor(&self) -> Result<Self> {
        match self {
            PointSetDescriptor::Lattice(l) => {
                let mut offsets = Vec::new();
                for a in &l.offsets {
                    for b in &l.offsets {
                        offsets.push(&a.inv() * b);
                    }
                }
                Self::lattice(l.group, l.basis.clone(), offsets)
            }
            PointSetDescriptor::ModelSet(m) => {
                let k = GroupKind::Abelian(m.int_map.len());
                let ww = Window::product_hull(k, &Window::inverse_hull(k, &m.window), &m.window);
                Self::model_set(m.phys_map.clone(), m.int_map.clone(), ww.closure())
            }
        }
    }

    fn check_window(&self, k: &Window) -> Result<()> {
        if k.dim() != self.group().dim() {
            return Err(Error::KindMismatch {
                expected: self.group().to_string(),
                found: format!("{}-dimensional window", k.dim()),
            });
        }
        Ok(())
    }

    /// `Λ ∩ K`, exactly.
    pub fn enumerate_window(&self, k: &Window) -> Result<PointSample> {
        self.check_window(k)?;
        let points = match self {
            PointSetDescriptor::Lattice(l) => enumerate_lattice(l, k)?,
            PointSetDescriptor::ModelSet(m) => enumerate_model_set(m, k)?,
        };
        Ok(PointSample { window: k.clone(), points })
    }

    /// `(gΛ) ∩ K`, computed as `g · (Λ ∩ hull(g⁻¹K))` refiltered by `K`.
    pub fn left_translate_points(&self, g: &GroupElement, k: &Window) -> Result<PointSample> {
        self.check_window(k)?;
        if g.kind() != self.group() {
            return Err(Error::KindMismatch {
                expected: self.group().to_string(),
                found: g.kind().to_string(),
            });
        }
        let pre = Window::translate_hull(&g.inv(), k).closure();
        let mut points: Vec<GroupElement> =
            self.enumerate_window(&pre)?.points.iter().map(|p| g * p).filter(|p| k.contains(p)).collect();
        points.sort();
        Ok(PointSample { window: k.clone(), points })
    }

    /// Points of the difference carrier (see [`Self::difference_descriptor`])
    /// inside `K`.
    pub fn difference_sample(&self, k: &Window) -> Result<PointSample> {
        self.difference_descriptor()?.enumerate_window(k)
    }
}

fn check_heisenberg_basis(basis: &[GroupElement]) -> Result<()> {
    let c = |i: usize, j: usize| &basis[i].coords()[j];
    let diagonal = (0..3).all(|i| (0..3).all(|j| (i == j) != c(i, j).is_zero()));
    if !diagonal {
        return Err(Error::InvalidDescriptor(
            "Heisenberg lattice basis must be (α,0,0), (0,β,0), (0,0,γ)".into(),
        ));
    }
    let ratio = &(c(0, 0) * c(1, 1)) / c(2, 2);
    let integral = ratio.as_rational().map(|r| r.is_integer()).unwrap_or(false);
    if !integral {
        return Err(Error::InvalidDescriptor(
            "αβ/γ must be an integer for the coordinate image to be a subgroup".into(),
        ));
    }
    Ok(())
}

fn lattice_matrix(l: &LatticeSpec) -> Vec<Vec<Scalar>> {
    let dim = l.group.dim();
    (0..dim).map(|j| l.basis.iter().map(|b| b.coords()[j].clone()).collect()).collect()
}

fn stacked_matrix(m: &ModelSetSpec) -> Vec<Vec<Scalar>> {
    m.phys_map.iter().chain(&m.int_map).cloned().collect()
}

/// Exact inverse over `Q(√d)` by Gauss-Jordan elimination.
fn invert(a: &[Vec<Scalar>]) -> Result<Vec<Vec<Scalar>>> {
    let n = a.len();
    let mut m: Vec<Vec<Scalar>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).ok_or(Error::SingularParametrization)?;
        m.swap(col, pivot);
        let inv = m[col][col].recip().expect("nonzero pivot");
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (v, p) in m[r].iter_mut().zip(&pivot_row) {
                    *v = &*v - &(&f * p);
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn to_i64(v: &num_bigint::BigInt) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::ParameterOverflow(format!("bound {v} does not fit in i64")))
}

/// All `n ∈ Z^m` with `lo_j ≤ (A n)_j ≤ hi_j` for every row `j` (closed).
fn integer_points(a: &[Vec<Scalar>], bounds: &[(Scalar, Scalar)]) -> Result<Vec<Vec<i64>>> {
    let m = a.len();
    let inv = invert(a)?;
    // parameter box from the inverse map
    let mut ranges = Vec::with_capacity(m);
    for row in &inv {
        let (mut lo, mut hi) = (Scalar::zero(), Scalar::zero());
        for (c, (blo, bhi)) in row.iter().zip(bounds) {
            let (x, y) = (c * blo, c * bhi);
            let (small, large) = if x <= y { (x, y) } else { (y, x) };
            lo = &lo + &small;
            hi = &hi + &large;
        }
        ranges.push((to_i64(&lo.ceil())?, to_i64(&hi.floor())?));
    }
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return Ok(Vec::new());
    }
    let last = m - 1;
    let mut total: u64 = 1;
    for (lo, hi) in &ranges[..last] {
        let width = (*hi as i128 - *lo as i128 + 1) as u64;
        total = total.saturating_mul(width);
        if total > MAX_PREFIXES {
            return Err(Error::ParameterOverflow(format!("more than {MAX_PREFIXES} parameter prefixes")));
        }
    }
    let mut prefixes: Vec<Vec<i64>> = vec![Vec::new()];
    for (lo, hi) in &ranges[..last] {
        prefixes = prefixes
            .into_iter()
            .flat_map(|p| {
                (*lo..=*hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    let (last_lo, last_hi) = ranges[last];
    let out: Vec<Vec<i64>> = prefixes
        .par_iter()
        .flat_map_iter(|prefix| {
            let mut lo = last_lo;
            let mut hi = last_hi;
            let mut feasible = true;
            for (row, (blo, bhi)) in a.iter().zip(bounds) {
                let partial = prefix
                    .iter()
                    .zip(row)
                    .fold(Scalar::zero(), |acc, (n, c)| &acc + &(c * &Scalar::from_integer(*n)));
                let coef = &row[last];
                let (rlo, rhi) = (blo - &partial, bhi - &partial);
                if coef.is_zero() {
                    if rlo.signum() > 0 || rhi.signum() < 0 {
                        feasible = false;
                        break;
                    }
                    continue;
                }
                let (x, y) = (&rlo / coef, &rhi / coef);
                let (small, large) = if x <= y { (x, y) } else { (y, x) };
                // the box bounds above already fit in i64
                let c_lo = small.ceil().to_i64().unwrap_or(i64::MIN);
                let c_hi = large.floor().to_i64().unwrap_or(i64::MAX);
                lo = lo.max(c_lo);
                hi = hi.min(c_hi);
                if lo > hi {
                    feasible = false;
                    break;
                }
            }
            feasible.then_some(lo..=hi).into_iter().flatten().map(move |v| {
                let mut n = prefix.clone();
                n.push(v);
                n
            })
        })
        .collect();
    Ok(out)
}

fn apply(rows: &[Vec<Scalar>], n: &[i64]) -> Vec<Scalar> {
    rows.iter()
        .map(|row| {
            row.iter().zip(n).fold(Scalar::zero(), |acc, (c, k)| &acc + &(c * &Scalar::from_integer(*k)))
        })
        .collect()
}

fn closed_bounds(w: &Window) -> Vec<(Scalar, Scalar)> {
    w.intervals().iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect()
}

fn enumerate_lattice(l: &LatticeSpec, k: &Window) -> Result<Vec<GroupElement>> {
    let a = lattice_matrix(l);
    let mut out = BTreeSet::new();
    for off in &l.offsets {
        let bounds: Vec<(Scalar, Scalar)> =
            closed_bounds(k).into_iter().zip(off.coords()).map(|((lo, hi), o)| (&lo - o, &hi - o)).collect();
        for n in integer_points(&a, &bounds)? {
            let coords: Vec<Scalar> = apply(&a, &n).iter().zip(off.coords()).map(|(c, o)| c + o).collect();
            let p = GroupElement::from_coords(l.group, coords)?;
            if k.contains(&p) {
                out.insert(p);
            }
        }
    }
    Ok(out.into_iter().collect())
}

fn enumerate_model_set(m: &ModelSetSpec, k: &Window) -> Result<Vec<GroupElement>> {
    let a = stacked_matrix(m);
    let mut bounds = closed_bounds(k);
    bounds.extend(closed_bounds(&m.window));
    let mut pts: Vec<GroupElement> = integer_points(&a, &bounds)?
        .into_par_iter()
        .filter_map(|n| {
            let phys = GroupElement::Abelian(apply(&m.phys_map, &n));
            let int = GroupElement::Abelian(apply(&m.int_map, &n));
            (k.contains(&phys) && m.window.contains(&int)).then_some(phys)
        })
        .collect();
    pts.sort();
    if let Some(w) = pts.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::NonInjectiveProjection(format!("two parameter vectors map to {}", w[0])));
    }
    Ok(pts)
}

/// Sorted points supporting exact queries `{q : anchor⁻¹q ∈ B}`.
///
/// The first coordinate of `anchor⁻¹q` is `q₀ − anchor₀` in both groups, so a
/// binary search on the first coordinate narrows the candidates.
pub struct PointIndex {
    points: Vec<GroupElement>,
}

impl PointIndex {
    pub fn new(mut points: Vec<GroupElement>) -> Self {
        points.sort();
        points.dedup();
        PointIndex { points }
    }

    pub fn points(&self) -> &[GroupElement] {
        &self.points
    }

    /// All `anchor⁻¹q ∈ B` for indexed `q`, sorted.
    pub fn relative(&self, anchor: &GroupElement, b: &Window) -> Vec<GroupElement> {
        let first = &b.intervals()[0];
        let a0 = &anchor.coords()[0];
        let lo = a0 + &first.lo;
        let hi = a0 + &first.hi;
        let start = self.points.partition_point(|p| p.coords()[0] < lo);
        let end = self.points.partition_point(|p| p.coords()[0] <= hi);
        let inv = anchor.inv();
        // The second coordinate of anchor⁻¹q is additive in every supported group.
        let second = b.intervals().get(1);
        let mut out: Vec<GroupElement> = self.points[start..end]
            .iter()
            .filter(|q| second.is_none_or(|iv| iv.contains(&(&q.coords()[1] - &anchor.coords()[1]))))
            .map(|q| &inv * q)
            .filter(|r| b.contains(r))
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_integer(n)
    }

    fn q2(a: i64, b: i64) -> Scalar {
        Scalar::quadratic(a, b, 2).unwrap()
    }

    fn interval(lo: Scalar, hi: Scalar) -> Window {
        Window::new(vec![Interval::closed(lo, hi)]).unwrap()
    }

    fn pts(v: Vec<Scalar>) -> Vec<GroupElement> {
        let mut out: Vec<_> = v.into_iter().map(GroupElement::scalar).collect();
        out.sort();
        out
    }

    #[test]
    fn lattice_window() {
        let k = interval(Scalar::ratio(-5, 2), Scalar::ratio(5, 2));
        let got = PointSetDescriptor::integers().enumerate_window(&k).unwrap();
        assert_eq!(got.points, pts((-2..=2).map(s).collect()));
    }

    #[test]
    fn silver_mean_gap_is_empty() {
        let k = interval(Scalar::ratio(1, 10), Scalar::ratio(9, 10));
        assert!(PointSetDescriptor::silver_mean().enumerate_window(&k).unwrap().is_empty());
    }

    #[test]
    fn translates() {
        let z = PointSetDescriptor::integers();
        let k = interval(s(-1), s(1));
        let got = z.left_translate_points(&GroupElement::scalar(s(1)), &k).unwrap();
        assert_eq!(got.points, pts(vec![s(-1), s(0), s(1)]));
        let half = GroupElement::scalar(Scalar::ratio(1, 2));
        let got = z.left_translate_points(&half, &interval(s(0), s(1))).unwrap();
        assert_eq!(got.points, pts(vec![Scalar::ratio(1, 2)]));
        // λ⁻¹Λ contains the identity for λ = 1 + √2
        let sm = PointSetDescriptor::silver_mean();
        let lam = GroupElement::scalar(q2(1, 1));
        let got = sm.left_translate_points(&lam.inv(), &k).unwrap();
        assert!(got.points.contains(&GroupElement::scalar(s(0))));
    }

    #[test]
    fn difference_samples() {
        let sm = PointSetDescriptor::silver_mean();
        let open = Window::open_ball(1, &s(1));
        assert_eq!(sm.difference_sample(&open).unwrap().points, pts(vec![s(0)]));
        let k = interval(s(0), Scalar::ratio(3, 2));
        assert_eq!(sm.difference_sample(&k).unwrap().points, pts(vec![s(0), s(1), q2(0, 1)]));
        let z = PointSetDescriptor::integers();
        assert_eq!(
            z.difference_sample(&interval(s(-3), s(3))).unwrap().points,
            pts((-3..=3).map(s).collect())
        );
    }

    #[test]
    fn composite_offsets() {
        let c = PointSetDescriptor::composite_integers();
        let got = c.enumerate_window(&interval(s(0), s(1))).unwrap();
        assert_eq!(got.points, pts(vec![s(0), Scalar::ratio(1, 4), s(1)]));
        let diff = c.difference_sample(&interval(s(0), s(1))).unwrap();
        assert_eq!(diff.points, pts(vec![s(0), Scalar::ratio(1, 4), Scalar::ratio(3, 4), s(1)]));
    }

    #[test]
    fn heisenberg_lattice() {
        let h = PointSetDescriptor::heisenberg_integers();
        let got = h.enumerate_window(&Window::ball(3, &s(1))).unwrap();
        assert_eq!(got.len(), 27);
        let bad = vec![
            GroupElement::Heisenberg([s(2), s(0), s(0)]),
            GroupElement::Heisenberg([s(0), s(1), s(0)]),
            GroupElement::Heisenberg([s(0), s(0), s(3)]),
        ];
        assert!(PointSetDescriptor::lattice(GroupKind::Heisenberg, bad, vec![]).is_err());
    }

    #[test]
    fn descriptor_validation() {
        let r2 = Scalar::sqrt(2).unwrap();
        let w = Window::ball(1, &s(1));
        // rank mismatch
        assert!(PointSetDescriptor::model_set(
            vec![vec![s(1), r2.clone(), s(0)]],
            vec![vec![s(1), -r2.clone(), s(0)]],
            w.clone()
        )
        .is_err());
        // singular
        assert!(PointSetDescriptor::model_set(
            vec![vec![s(1), r2.clone()]],
            vec![vec![s(2), &r2 * &s(2)]],
            w.clone()
        )
        .is_err());
        // asymmetric window
        let w2 = Window::new(vec![Interval::closed(s(0), s(1))]).unwrap();
        assert!(
            PointSetDescriptor::model_set(vec![vec![s(1), r2.clone()]], vec![vec![s(1), -r2]], w2).is_err()
        );
    }

    #[test]
    fn non_injective_projection_detected() {
        // phys(n) = n₁ + 2n₂ is not injective on Z²
        let d = PointSetDescriptor::model_set(
            vec![vec![s(1), s(2)]],
            vec![vec![s(1), s(-1)]],
            Window::ball(1, &s(3)),
        )
        .unwrap();
        assert!(matches!(d.enumerate_window(&Window::ball(1, &s(5))), Err(Error::NonInjectiveProjection(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let z = PointSetDescriptor::integers();
        assert!(z.enumerate_window(&Window::ball(2, &s(1))).is_err());
    }

    #[test]
    fn index_queries() {
        let z = PointSetDescriptor::integers();
        let all = z.enumerate_window(&interval(s(-10), s(10))).unwrap();
        let idx = PointIndex::new(all.points);
        let rel = idx.relative(&GroupElement::scalar(s(4)), &Window::ball(1, &s(2)));
        assert_eq!(rel, pts((-2..=2).map(s).collect()));
    }
}
