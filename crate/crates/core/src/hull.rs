//! Finite approximations of the discrete hull: restriction and refinement of
//! patch catalogs, a truncated Chabauty-Fell distance, convergence checks,
//! clopen classes `A_{F,K}` and separating compact sets.

use std::collections::BTreeSet;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::pointset::PointSample;
use crate::regularity::{Patch, PatchCatalog};
use crate::scalar::QuadraticScalar as Scalar;
use crate::window::{CompactSet, Interval, Window};

pub fn restrict_patch(p: &Patch, radius: &Scalar) -> Result<Patch> {
    if radius > p.radius() {
        return Err(Error::RadiusExceeded {
            requested: radius.to_string(),
            available: p.radius().to_string(),
        });
    }
    if radius.signum() < 0 {
        return Err(Error::Precondition("radius must be non-negative".into()));
    }
    let points: Vec<GroupElement> = p.points().iter().filter(|q| q.norm() <= *radius).cloned().collect();
    Ok(Patch::from_sorted_unchecked(radius.clone(), points))
}

/// Each class of a radius-`R` catalog sent to the radius-`R'` class equal to
/// its restriction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementMap {
    pub source_radius: Scalar,
    pub target_radius: Scalar,
    pub assignment: Vec<usize>,
}

impl RefinementMap {
    pub fn is_surjective(&self, target_len: usize) -> bool {
        let hit: BTreeSet<usize> = self.assignment.iter().copied().collect();
        hit.len() == target_len
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &RefinementMap) -> Result<RefinementMap> {
        if self.target_radius != next.source_radius {
            return Err(Error::RadiusMismatch(
                self.target_radius.to_string(),
                next.source_radius.to_string(),
            ));
        }
        Ok(RefinementMap {
            source_radius: self.source_radius.clone(),
            target_radius: next.target_radius.clone(),
            assignment: self.assignment.iter().map(|&i| next.assignment[i]).collect(),
        })
    }
}

pub fn build_refinement(source: &PatchCatalog, target: &PatchCatalog) -> Result<RefinementMap> {
    let assignment = (0..source.len())
        .map(|i| {
            let restricted = restrict_patch(&source.patch(i), &target.radius)?;
            target.class_of(restricted.points()).ok_or(Error::MissingRefinementTarget { class: i })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinementMap {
        source_radius: source.radius.clone(),
        target_radius: target.radius.clone(),
        assignment,
    })
}

fn nearest(p: &GroupElement, others: &[GroupElement]) -> Option<Scalar> {
    others.iter().map(|q| p.distance(q)).min()
}

/// Smallest `ε` at which `p` stops constraining the distance: it is matched
/// within `ε`, it has left `B_{1/ε}`, or a match could hide beyond radius `R`.
fn point_slack(p: &GroupElement, others: &[GroupElement], radius: &Scalar) -> Scalar {
    let norm = p.norm();
    let mut slack = radius - &norm;
    if let Some(inv) = norm.recip() {
        slack = slack.min(inv);
    }
    if let Some(m) = nearest(p, others) {
        slack = slack.min(m);
    }
    slack
}

/// `inf { ε ∈ (0,1] : P ∩ B_{1/ε} ⊆ Q·B_ε and Q ∩ B_{1/ε} ⊆ P·B_ε }`, with
/// matches that could lie outside the common radius given the benefit of
/// the doubt. Exact up to the final conversion.
pub fn chabauty_distance_exact(p: &Patch, q: &Patch) -> Result<Scalar> {
    if p.radius() != q.radius() {
        return Err(Error::RadiusMismatch(p.radius().to_string(), q.radius().to_string()));
    }
    let r = p.radius();
    let d = p
        .points()
        .iter()
        .map(|x| point_slack(x, q.points(), r))
        .chain(q.points().iter().map(|y| point_slack(y, p.points(), r)))
        .max()
        .unwrap_or_else(Scalar::zero);
    Ok(d.max(Scalar::zero()).min(Scalar::one()))
}

pub fn chabauty_distance(p: &Patch, q: &Patch) -> Result<f64> {
    chabauty_distance_exact(p, q).map(|d| d.to_f64())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointMatch {
    pub point: GroupElement,
    pub partner: Option<GroupElement>,
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub pass: bool,
    pub scope: &'static str,
    pub radius: Scalar,
    pub tol: f64,
    pub steps: usize,
    /// Per limit point, the distance to the nearest point of each sample.
    pub trajectories: Vec<(GroupElement, Vec<Option<f64>>)>,
    /// Condition (1) on the final sample.
    pub limit_matches: Vec<PointMatch>,
    /// Condition (2) on the final sample.
    pub cluster_matches: Vec<PointMatch>,
    /// A limit point with no sample point within `tol`.
    pub condition_1_witness: Option<PointMatch>,
    /// A sample point not within `tol` of the limit.
    pub condition_2_witness: Option<PointMatch>,
}

fn match_points(from: &[GroupElement], to: &[GroupElement], inner: &Scalar) -> Vec<PointMatch> {
    from.iter()
        .filter(|p| p.norm() <= *inner)
        .map(|p| {
            let best = to.iter().min_by_key(|q| p.distance(q));
            PointMatch {
                point: p.clone(),
                partner: best.cloned(),
                distance: best.map(|q| p.distance(q).to_f64()),
            }
        })
        .collect()
}

fn matched(m: &PointMatch, tol: f64) -> bool {
    m.distance.is_some_and(|d| d <= tol)
}

/// Window-scale convergence of `seq` to `limit` inside `B_R`, decided on the
/// final sample; earlier samples only contribute trajectories. Points within
/// `tol` of the boundary of `B_R` are not tested, since their partners may
/// fall outside the samples.
pub fn check_convergence(
    seq: &[PointSample],
    limit: &PointSample,
    radius: &Scalar,
    tol: f64,
) -> Result<ConvergenceReport> {
    let Some(last) = seq.last() else {
        return Err(Error::InsufficientCoverage("empty sequence".into()));
    };
    for (i, s) in seq.iter().enumerate() {
        if !s.window.covers_ball(radius) {
            return Err(Error::InsufficientCoverage(format!("sample {i} misses B_{radius}")));
        }
    }
    if !limit.window.covers_ball(radius) {
        return Err(Error::InsufficientCoverage(format!("limit misses B_{radius}")));
    }
    let inner = radius - &tol_exact(tol);
    let limit_matches = match_points(&limit.points, &last.points, &inner);
    let cluster_matches = match_points(&last.points, &limit.points, &inner);
    let trajectories = limit
        .points
        .iter()
        .filter(|p| p.norm() <= inner)
        .map(|p| {
            let t = seq.iter().map(|s| nearest(p, &s.points).map(|d| d.to_f64())).collect();
            (p.clone(), t)
        })
        .collect();
    let condition_1_witness = limit_matches.iter().find(|m| !matched(m, tol)).cloned();
    let condition_2_witness = cluster_matches.iter().find(|m| !matched(m, tol)).cloned();
    Ok(ConvergenceReport {
        pass: condition_1_witness.is_none() && condition_2_witness.is_none(),
        scope: crate::regularity::CERTIFICATE_SCOPE,
        radius: radius.clone(),
        tol,
        steps: seq.len(),
        trajectories,
        limit_matches,
        cluster_matches,
        condition_1_witness,
        condition_2_witness,
    })
}

/// `tol` as an exact rational (every finite float is one).
fn tol_exact(tol: f64) -> Scalar {
    BigRational::from_float(tol.max(0.0)).map_or_else(Scalar::zero, Scalar::from_rational)
}

/// The class of `K ∩ P` up to left translation, named by its
/// lexicographically least normalisation `a⁻¹(K ∩ P)` over `a ∈ K ∩ P`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClopenClassId {
    pub compact: CompactSet,
    pub representative: Vec<GroupElement>,
}

pub fn classify_clopen(p: &Patch, k: &CompactSet) -> Result<ClopenClassId> {
    if k.dim() != p.kind().dim() {
        return Err(Error::KindMismatch {
            expected: p.kind().to_string(),
            found: format!("{}-dimensional window", k.dim()),
        });
    }
    if k.radius() > *p.radius() {
        return Err(Error::RadiusExceeded {
            requested: k.radius().to_string(),
            available: p.radius().to_string(),
        });
    }
    let seen: Vec<GroupElement> = p.points().iter().filter(|q| k.contains(q)).cloned().collect();
    let representative = seen
        .iter()
        .map(|a| {
            let inv = a.inv();
            let mut t: Vec<GroupElement> = seen.iter().map(|q| &inv * q).collect();
            t.sort();
            t
        })
        .min()
        .unwrap_or_default();
    Ok(ClopenClassId { compact: k.clone(), representative })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationProof {
    /// The point in exactly one of the two patches.
    pub x: GroupElement,
    /// `x` was taken from the second patch.
    pub swapped: bool,
    pub class_p: ClopenClassId,
    pub class_q: ClopenClassId,
}

/// A compact `K` with `K ∩ P = {e, x}` and `x⁻¹ ∉ K` for some `x` in
/// exactly one of the patches, whence the clopen classes over `K` differ.
///
/// `K` is a single box around `{e, x}` when one exists, otherwise a union of
/// a box at `e` and a box at `x`.
pub fn separating_compact(p: &Patch, q: &Patch) -> Result<(CompactSet, SeparationProof)> {
    let common = p.radius().clone().min(q.radius().clone());
    let pc = restrict_patch(p, &common)?;
    let qc = restrict_patch(q, &common)?;
    if pc.points() == qc.points() {
        return Err(Error::IdenticalPatches);
    }
    let mut candidates: Vec<(GroupElement, bool)> = pc
        .points()
        .iter()
        .filter(|x| !qc.contains(x))
        .map(|x| (x.clone(), false))
        .chain(qc.points().iter().filter(|y| !pc.contains(y)).map(|y| (y.clone(), true)))
        .collect();
    candidates.sort_by_cached_key(|(x, swapped)| (x.norm(), *swapped, x.clone()));
    for fit in [fit_box as Fitter, fit_pair] {
        for (x, swapped) in &candidates {
            let (holder, other) = if *swapped { (&qc, &pc) } else { (&pc, &qc) };
            if let Some(k) = fit(x, holder, &common) {
                let class_p = classify_clopen(holder, &k)?;
                let class_q = classify_clopen(other, &k)?;
                if class_p != class_q {
                    let (class_p, class_q) = if *swapped { (class_q, class_p) } else { (class_p, class_q) };
                    let proof = SeparationProof { x: x.clone(), swapped: *swapped, class_p, class_q };
                    return Ok((k, proof));
                }
            }
        }
    }
    Err(Error::NoSeparatingCompact)
}

type Fitter = fn(&GroupElement, &Patch, &Scalar) -> Option<CompactSet>;

fn separates(k: &CompactSet, x: &GroupElement, holder: &Patch, radius: &Scalar) -> bool {
    holder.points().iter().filter(|q| k.contains(q)).count() == 2
        && k.contains(x)
        && !k.contains(&x.inv())
        && k.radius() <= *radius
}

/// Shrinks the margin around `{e, x}` until `build(margin)` separates.
fn shrink(
    x: &GroupElement,
    holder: &Patch,
    radius: &Scalar,
    build: impl Fn(&Scalar) -> Option<CompactSet>,
) -> Option<CompactSet> {
    let half = Scalar::ratio(1, 2);
    let mut margin = half.clone();
    for _ in 0..48 {
        if let Some(k) = build(&margin) {
            if separates(&k, x, holder, radius) {
                return Some(k);
            }
        }
        margin = &margin * &half;
    }
    None
}

/// The bounding box of `{e, x}` with a margin.
fn fit_box(x: &GroupElement, holder: &Patch, radius: &Scalar) -> Option<CompactSet> {
    let zero = Scalar::zero();
    shrink(x, holder, radius, |m| {
        let intervals = x
            .coords()
            .iter()
            .map(|c| {
                let lo = c.clone().min(zero.clone());
                let hi = c.clone().max(zero.clone());
                Interval::closed(&lo - m, &hi + m)
            })
            .collect();
        Window::new(intervals).ok().map(CompactSet::from)
    })
}

/// Two boxes of half-width `m`, at `e` and at `x`, clipped to `B_radius`.
fn fit_pair(x: &GroupElement, holder: &Patch, radius: &Scalar) -> Option<CompactSet> {
    shrink(x, holder, radius, |m| {
        let at_x = x
            .coords()
            .iter()
            .map(|c| Interval::closed((c - m).max(-radius), (c + m).min(radius.clone())))
            .collect();
        let at_e = Window::ball(x.coords().len(), m);
        CompactSet::new(vec![at_e, Window::new(at_x).ok()?]).ok()
    })
}
