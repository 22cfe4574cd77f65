//! Truncations of the groupoid `G(Λ) = {(x, P) : x⁻¹ ∈ P}` with
//! `s(x, P) = P`, `r(x, P) = xP` and `(y, xP)(x, P) = (yx, P)`.
//!
//! Units are patches known on a finite radius. Every derived patch carries
//! the radius on which it is exactly known, and operations that would need
//! data beyond it say so instead of guessing.

use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::regularity::{Patch, PatchCatalog};
use crate::scalar::QuadraticScalar as Scalar;
use crate::window::{translate_reliable_radius, Window};

#[derive(Clone, Debug, Serialize)]
pub struct Arrow {
    x: GroupElement,
    src: Patch,
    /// Radius on which the range `xP` is known exactly.
    budget: Scalar,
    #[serde(skip)]
    range: OnceLock<Patch>,
}

impl PartialEq for Arrow {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.src == other.src && self.budget == other.budget
    }
}

impl Eq for Arrow {}

impl Arrow {
    pub fn new(x: GroupElement, src: Patch) -> Result<Self> {
        if x.kind() != src.kind() {
            return Err(Error::KindMismatch {
                expected: src.kind().to_string(),
                found: x.kind().to_string(),
            });
        }
        let x_inv = x.inv();
        if !src.contains(&x_inv) {
            return Err(Error::NotMember { point: x_inv.to_string() });
        }
        let budget = translate_reliable_radius(&x_inv, src.radius())
            .filter(|_| x.norm() <= *src.radius())
            .ok_or_else(|| {
                Error::BudgetExhausted(format!("|{x}| exceeds the source radius {}", src.radius()))
            })?;
        Ok(Arrow { x, src, budget, range: OnceLock::new() })
    }

    pub fn unit(p: Patch) -> Self {
        let e = GroupElement::identity(p.kind());
        let budget = p.radius().clone();
        Arrow { x: e, src: p, budget, range: OnceLock::new() }
    }

    pub fn x(&self) -> &GroupElement {
        &self.x
    }

    pub fn budget(&self) -> &Scalar {
        &self.budget
    }

    pub fn source(&self) -> &Patch {
        &self.src
    }

    /// `xP ∩ B_budget`; contains `x·x⁻¹ = e`.
    pub fn range(&self) -> &Patch {
        self.range.get_or_init(|| self.compute_range())
    }

    fn compute_range(&self) -> Patch {
        // The first two coordinates of a product are sums in both groups,
        // which rules most points out cheaply.
        let xc = self.x.coords();
        let near =
            |p: &GroupElement| xc.iter().zip(p.coords()).take(2).all(|(a, b)| (a + b).abs() <= self.budget);
        let mut pts: Vec<GroupElement> = self
            .src
            .points()
            .iter()
            .filter(|p| near(p))
            .map(|p| &self.x * p)
            .filter(|q| q.norm() <= self.budget)
            .collect();
        pts.sort();
        Patch::from_sorted_unchecked(self.budget.clone(), pts)
    }

    /// `(x⁻¹, xP)`.
    pub fn inverse(&self) -> Result<Arrow> {
        if self.x.norm() > self.budget {
            return Err(Error::BudgetExhausted(format!(
                "{} lies outside the known range radius {}",
                self.x, self.budget
            )));
        }
        Arrow::new(self.x.inv(), self.range().clone())
    }

    pub fn is_unit(&self) -> bool {
        self.x.is_identity()
    }

    /// Both arrows have the same `x` and their sources agree on the smaller
    /// radius.
    pub fn agrees_with(&self, other: &Arrow) -> bool {
        self.x == other.x && patches_agree(&self.src, &other.src)
    }
}

/// Equality of two truncated units on their common radius.
pub fn patches_agree(p: &Patch, q: &Patch) -> bool {
    let r = p.radius().min(q.radius());
    let inside = |g: &&GroupElement| g.norm() <= *r;
    p.points().iter().filter(inside).eq(q.points().iter().filter(inside))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Composition {
    Defined {
        arrow: Arrow,
    },
    /// `s(a2)` and `r(a1)` provably differ.
    NotComposable {
        reason: String,
    },
    /// The data do not reach far enough to decide.
    Undecided {
        reason: String,
    },
}

impl Composition {
    pub fn defined(self) -> Option<Arrow> {
        match self {
            Composition::Defined { arrow } => Some(arrow),
            _ => None,
        }
    }
}

/// `a2 ∘ a1` for `a1 = (x, P)`, `a2 = (y, Q)`: `(yx, P)` when `Q = xP`.
pub fn compose(a2: &Arrow, a1: &Arrow) -> Composition {
    let range = a1.range();
    if !patches_agree(&a2.src, range) {
        return Composition::NotComposable {
            reason: format!(
                "s(a2) and r(a1) differ within radius {}",
                a2.src.radius().clone().min(range.radius().clone())
            ),
        };
    }
    let yx = &a2.x * &a1.x;
    let p = &a1.src;
    if yx.norm() > *p.radius() {
        return Composition::Undecided { reason: format!("|{yx}| exceeds radius {}", p.radius()) };
    }
    let back = yx.inv();
    if back.norm() > *p.radius() {
        return Composition::Undecided { reason: format!("|{back}| exceeds radius {}", p.radius()) };
    }
    if !p.contains(&back) {
        return Composition::NotComposable {
            reason: format!("{back} is not in s(a1), so y⁻¹ is not in r(a1)"),
        };
    }
    match Arrow::new(yx, p.clone()) {
        Ok(arrow) => Composition::Defined { arrow },
        Err(e) => Composition::Undecided { reason: e.to_string() },
    }
}

/// All `(x, P)` with `P` a class of `cat`, `x⁻¹ ∈ P` and `|x| ≤ r`.
pub fn enumerate_arrows(cat: &PatchCatalog, r: &Scalar) -> Result<Vec<Arrow>> {
    if r > &cat.radius {
        return Err(Error::RadiusExceeded { requested: r.to_string(), available: cat.radius.to_string() });
    }
    let mut out = Vec::new();
    for p in cat.patches() {
        for q in p.points() {
            let x = q.inv();
            if x.norm() <= *r {
                out.push(Arrow::new(x, p.clone())?);
            }
        }
    }
    Ok(out)
}

/// A catalog class whose restriction agrees with the range of `a`, i.e. a
/// unit that may serve as `s(a2)` for a composable pair `(a2, a)`.
pub fn range_classes(cat: &PatchCatalog, a: &Arrow) -> Vec<usize> {
    let range = a.range();
    (0..cat.len()).filter(|&i| patches_agree(&cat.patch(i), range)).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AxiomCounts {
    pub verified: usize,
    pub skipped: usize,
    pub violations: usize,
}

impl AxiomCounts {
    fn record(&mut self, outcome: Option<bool>) {
        match outcome {
            Some(true) => self.verified += 1,
            Some(false) => self.violations += 1,
            None => self.skipped += 1,
        }
    }

    fn merge(mut self, other: AxiomCounts) -> AxiomCounts {
        self.verified += other.verified;
        self.skipped += other.skipped;
        self.violations += other.violations;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub pass: bool,
    pub arrows: usize,
    pub pairs: usize,
    pub triples: usize,
    /// `r(γ) = γγ⁻¹` and `s(γ) = γ⁻¹γ`.
    pub range_source: AxiomCounts,
    /// `(γη)μ = γ(ημ)`.
    pub associativity: AxiomCounts,
    /// `(γ⁻¹)⁻¹ = γ`.
    pub involution: AxiomCounts,
    /// `r(γ)γ = γ = γs(γ)`.
    pub unit_laws: AxiomCounts,
    pub first_violation: Option<String>,
}

fn unit_equals(c: Composition, unit: &Patch) -> Option<bool> {
    match c {
        Composition::Defined { arrow } => Some(arrow.is_unit() && patches_agree(arrow.source(), unit)),
        Composition::NotComposable { .. } => Some(false),
        Composition::Undecided { .. } => None,
    }
}

fn arrow_equals(c: Composition, a: &Arrow) -> Option<bool> {
    match c {
        Composition::Defined { arrow } => Some(arrow.agrees_with(a)),
        Composition::NotComposable { .. } => Some(false),
        Composition::Undecided { .. } => None,
    }
}

fn check_single(a: &Arrow) -> (AxiomCounts, AxiomCounts, AxiomCounts) {
    let mut rs = AxiomCounts::default();
    let mut inv = AxiomCounts::default();
    let mut units = AxiomCounts::default();
    match a.inverse() {
        Ok(ai) => {
            rs.record(unit_equals(compose(a, &ai), a.range()));
            rs.record(unit_equals(compose(&ai, a), a.source()));
            inv.record(match ai.inverse() {
                Ok(aii) => Some(aii.agrees_with(a)),
                Err(_) => None,
            });
        }
        Err(_) => {
            rs.record(None);
            rs.record(None);
            inv.record(None);
        }
    }
    units.record(arrow_equals(compose(&Arrow::unit(a.range().clone()), a), a));
    units.record(arrow_equals(compose(a, &Arrow::unit(a.source().clone())), a));
    (rs, inv, units)
}

fn check_triple(c: &Arrow, b: &Arrow, a: &Arrow) -> Option<bool> {
    let ba = compose(b, a).defined()?;
    let cb = compose(c, b).defined()?;
    let left = compose(c, &ba).defined()?;
    let right = compose(&cb, a).defined()?;
    Some(left.agrees_with(&right))
}

/// An arrow `a2` with `s(a2)` matching `r(a1)` in the catalog, if any.
pub fn sample_next<R: Rng>(cat: &PatchCatalog, a1: &Arrow, rng: &mut R) -> Option<Arrow> {
    let classes = range_classes(cat, a1);
    let &class = classes.choose(rng)?;
    let q = cat.patch(class);
    let q_inv = q.points().choose(rng)?.inv();
    Arrow::new(q_inv, q).ok()
}

/// Verifies the groupoid identities on every sampled arrow, on `pairs`
/// composable pairs and on `triples` composable triples drawn with `rng`.
pub fn check_axioms<R: Rng>(
    cat: &PatchCatalog,
    arrows: &[Arrow],
    pairs: usize,
    triples: usize,
    rng: &mut R,
) -> AxiomReport {
    let mut pair_list = Vec::with_capacity(pairs);
    let mut triple_list = Vec::with_capacity(triples);
    if !arrows.is_empty() {
        let mut attempts = 0;
        while pair_list.len() < pairs && attempts < pairs * 20 {
            attempts += 1;
            let a1 = arrows.choose(rng).expect("nonempty").clone();
            if let Some(a2) = sample_next(cat, &a1, rng) {
                pair_list.push((a2, a1));
            }
        }
        attempts = 0;
        while triple_list.len() < triples && attempts < triples * 20 {
            attempts += 1;
            let a1 = arrows.choose(rng).expect("nonempty").clone();
            let Some(a2) = sample_next(cat, &a1, rng) else { continue };
            let Some(a3) = sample_next(cat, &a2, rng) else { continue };
            triple_list.push((a3, a2, a1));
        }
    }

    let singles: Vec<&Arrow> = arrows.iter().chain(pair_list.iter().flat_map(|(b, a)| [b, a])).collect();
    let single_results: Vec<(AxiomCounts, AxiomCounts, AxiomCounts)> =
        singles.par_iter().map(|a| check_single(a)).collect();
    let pair_results: Vec<Option<bool>> =
        pair_list.par_iter().map(|(b, a)| check_triple(&Arrow::unit(b.range().clone()), b, a)).collect();
    let triple_results: Vec<Option<bool>> =
        triple_list.par_iter().map(|(c, b, a)| check_triple(c, b, a)).collect();

    let mut range_source = AxiomCounts::default();
    let mut involution = AxiomCounts::default();
    let mut unit_laws = AxiomCounts::default();
    let mut first_violation = None;
    for (a, (r, i, u)) in singles.iter().zip(single_results) {
        if first_violation.is_none() && r.violations + i.violations + u.violations > 0 {
            first_violation = Some(format!("arrow x = {} on a patch of {} points", a.x(), a.source().len()));
        }
        range_source = range_source.merge(r);
        involution = involution.merge(i);
        unit_laws = unit_laws.merge(u);
    }
    // Pairs are checked as triples topped by the unit on their range.
    let mut associativity = AxiomCounts::default();
    for (k, outcome) in pair_results.into_iter().chain(triple_results).enumerate() {
        if first_violation.is_none() && outcome == Some(false) {
            first_violation = Some(format!("associativity fails on sample {k}"));
        }
        associativity.record(outcome);
    }

    let pass =
        range_source.violations + associativity.violations + involution.violations + unit_laws.violations
            == 0;
    AxiomReport {
        pass,
        arrows: arrows.len(),
        pairs: pair_list.len(),
        triples: triple_list.len(),
        range_source,
        associativity,
        involution,
        unit_laws,
        first_violation,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bisection {
    pub center: GroupElement,
    pub window: Window,
    pub classes: Vec<usize>,
    pub arrows: Vec<Arrow>,
    pub certificate: InjectivityCertificate,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InjectivityCertificate {
    pub source_injective: bool,
    pub range_injective: bool,
    pub distinct_sources: usize,
    /// Pairs whose ranges differ on the common radius.
    pub ranges_differ_on_data: usize,
    /// Pairs with equal `x` and distinct sources (`z ↦ zP` is injective).
    pub ranges_differ_by_translation: usize,
    /// Pairs with `x₂⁻¹x₁ ∈ U₀ \ {e}`; equal ranges would put two points of
    /// one hull element in `U₀`.
    pub ranges_differ_by_discreteness: usize,
}

/// `U_{x,V,W} = ((xV ∩ Vx) × W) ∩ G(Λ)` on the catalog, with `W` given as a
/// set of class indices. Requires `V` symmetric and `VV ⊆ U₀`, where `U₀` is
/// a certified uniform-discreteness neighbourhood.
pub fn build_bisection(
    x: &GroupElement,
    v: &Window,
    classes: &[usize],
    cat: &PatchCatalog,
    u0: &Window,
) -> Result<Bisection> {
    if !v.is_symmetric_neighbourhood() {
        return Err(Error::NotSymmetric);
    }
    let kind = x.kind();
    let vv = Window::product_hull(kind, v, v);
    if !vv.is_subset(u0) {
        return Err(Error::Precondition("VV is not contained in U₀".into()));
    }
    let x_inv = x.inv();
    let mut arrows = Vec::new();
    for &c in classes {
        if c >= cat.len() {
            return Err(Error::Precondition(format!("class {c} is not in the catalog")));
        }
        let p = cat.patch(c);
        for q in p.points() {
            let z = q.inv();
            if z.norm() > cat.radius {
                continue;
            }
            if v.contains(&(&x_inv * &z)) && v.contains(&(&z * &x_inv)) {
                arrows.push(Arrow::new(z, p.clone())?);
            }
        }
    }
    let certificate = injectivity(&arrows, u0);
    Ok(Bisection { center: x.clone(), window: v.clone(), classes: classes.to_vec(), arrows, certificate })
}

fn injectivity(arrows: &[Arrow], u0: &Window) -> InjectivityCertificate {
    let mut cert = InjectivityCertificate::default();
    let mut sources: Vec<&[GroupElement]> = arrows.iter().map(|a| a.source().points()).collect();
    sources.sort();
    sources.dedup();
    cert.distinct_sources = sources.len();
    cert.source_injective = sources.len() == arrows.len();
    let ranges: Vec<&Patch> = arrows.iter().map(Arrow::range).collect();
    let mut all = true;
    for i in 0..arrows.len() {
        for j in i + 1..arrows.len() {
            let (a, b) = (&arrows[i], &arrows[j]);
            if !patches_agree(ranges[i], ranges[j]) {
                cert.ranges_differ_on_data += 1;
            } else if a.x() == b.x() && a.source() != b.source() {
                cert.ranges_differ_by_translation += 1;
            } else {
                let d = &b.x().inv() * a.x();
                if !d.is_identity() && u0.contains_symmetric(&d) {
                    cert.ranges_differ_by_discreteness += 1;
                } else {
                    all = false;
                }
            }
        }
    }
    cert.range_injective = all;
    cert
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointset::PointSetDescriptor;
    use crate::regularity::enumerate_patches;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(n: i64) -> Scalar {
        Scalar::from_integer(n)
    }

    fn pt(n: i64) -> GroupElement {
        GroupElement::scalar(s(n))
    }

    fn z_patch(r: i64) -> Patch {
        Patch::new(s(r), (-r..=r).map(pt).collect()).unwrap()
    }

    #[test]
    fn ranges() {
        let a = Arrow::new(pt(1), Patch::new(s(1), vec![pt(-1), pt(0), pt(1)]).unwrap()).unwrap();
        assert_eq!(a.budget(), &s(0));
        assert_eq!(a.range().points(), &[pt(0)]);
        let u = Arrow::unit(z_patch(2));
        assert_eq!(u.range(), &z_patch(2));
        let b = Arrow::new(pt(1), z_patch(2)).unwrap();
        assert_eq!(b.range().points(), z_patch(1).points());
    }

    #[test]
    fn inverses() {
        let a = Arrow::new(pt(1), z_patch(3)).unwrap();
        let ai = a.inverse().unwrap();
        assert_eq!(ai.x(), &pt(-1));
        assert_eq!(ai.source(), &z_patch(2));
        let aii = ai.inverse().unwrap();
        assert_eq!(aii.x(), &pt(1));
        assert_eq!(aii.source().radius(), &s(1));
        let u = Arrow::unit(z_patch(2));
        assert_eq!(u.inverse().unwrap(), u);
        let far = Arrow::new(pt(2), z_patch(3)).unwrap();
        assert!(matches!(far.inverse(), Err(Error::BudgetExhausted(_))));
    }

    #[test]
    fn compositions() {
        let a1 = Arrow::new(pt(1), z_patch(5)).unwrap();
        let a2 = Arrow::new(pt(2), z_patch(4)).unwrap();
        let c = compose(&a2, &a1).defined().unwrap();
        assert_eq!(c.x(), &pt(3));
        assert_eq!(c.source(), &z_patch(5));
        assert_eq!(c.budget(), &s(2));

        let u = Arrow::unit(z_patch(2));
        assert_eq!(compose(&u, &u).defined().unwrap(), u);

        let cat = enumerate_patches(
            &PointSetDescriptor::silver_mean(),
            &Scalar::ratio(6, 5),
            &Window::ball(1, &s(100)),
        )
        .unwrap();
        let left = Arrow::unit(cat.patch(0));
        let right = Arrow::unit(cat.patch(2));
        assert!(matches!(compose(&left, &right), Composition::NotComposable { .. }));
    }

    #[test]
    fn arrow_enumeration() {
        let cat =
            enumerate_patches(&PointSetDescriptor::integers(), &s(3), &Window::ball(1, &s(10))).unwrap();
        assert_eq!(enumerate_arrows(&cat, &s(2)).unwrap().len(), 5);
        assert_eq!(enumerate_arrows(&cat, &s(0)).unwrap().len(), 1);
        assert!(enumerate_arrows(&cat, &s(4)).is_err());

        let sm = enumerate_patches(
            &PointSetDescriptor::silver_mean(),
            &Scalar::ratio(6, 5),
            &Window::ball(1, &s(100)),
        )
        .unwrap();
        let total: usize = sm.classes.iter().map(|c| c.points.len()).sum();
        assert_eq!(enumerate_arrows(&sm, &Scalar::ratio(6, 5)).unwrap().len(), total);
    }

    #[test]
    fn integer_axioms() {
        let cat =
            enumerate_patches(&PointSetDescriptor::integers(), &s(6), &Window::ball(1, &s(10))).unwrap();
        let arrows = enumerate_arrows(&cat, &s(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let report = check_axioms(&cat, &arrows, 200, 100, &mut rng);
        assert!(report.pass, "{report:?}");
        assert_eq!(report.pairs, 200);
        assert!(report.associativity.verified > 0);
    }

    #[test]
    fn bisections() {
        let cat =
            enumerate_patches(&PointSetDescriptor::integers(), &s(3), &Window::ball(1, &s(10))).unwrap();
        let u0 = Window::open_ball(1, &Scalar::ratio(1, 2));
        let v = Window::open_ball(1, &Scalar::ratio(1, 4));
        let b = build_bisection(&pt(1), &v, &[0], &cat, &u0).unwrap();
        assert_eq!(b.arrows.len(), 1);
        assert!(b.certificate.source_injective && b.certificate.range_injective);
        let units = build_bisection(&pt(0), &v, &[0], &cat, &u0).unwrap();
        assert!(units.arrows.iter().all(Arrow::is_unit));
        let big = Window::open_ball(1, &s(1));
        assert!(matches!(build_bisection(&pt(1), &big, &[0], &cat, &u0), Err(Error::Precondition(_))));
    }
}
