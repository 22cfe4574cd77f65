use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::Index;

use flc_core::group::GroupElement;
use flc_core::groupoid::{enumerate_arrows, Arrow};
use flc_core::hull::{build_refinement, chabauty_distance_exact, classify_clopen};
use flc_core::pointset::PointSetDescriptor;
use flc_core::regularity::{enumerate_patches, Patch, PatchCatalog};
use flc_core::scalar::QuadraticScalar as Scalar;
use flc_core::window::{CompactSet, Window};
use flc_core::witness::{build_matrix, certify_positive_type, psi};

fn s(n: i64) -> Scalar {
    Scalar::from_integer(n)
}

struct Fixture {
    name: &'static str,
    catalog: PatchCatalog,
    arrows: Vec<Arrow>,
}

fn fixtures() -> &'static [Fixture] {
    static CELL: OnceLock<Vec<Fixture>> = OnceLock::new();
    CELL.get_or_init(|| {
        let specs = [
            ("Z", PointSetDescriptor::integers(), s(3), Window::ball(1, &s(10))),
            ("Z2", PointSetDescriptor::integer_lattice(2), s(2), Window::ball(2, &s(2))),
            ("silver", PointSetDescriptor::silver_mean(), s(3), Window::ball(1, &s(60))),
            ("composite", PointSetDescriptor::composite_integers(), s(2), Window::ball(1, &s(4))),
            ("Heisenberg", PointSetDescriptor::heisenberg_integers(), s(3), Window::ball(3, &s(1))),
        ];
        specs
            .into_iter()
            .map(|(name, desc, radius, sample)| {
                let catalog = enumerate_patches(&desc, &radius, &sample).unwrap();
                let arrows = enumerate_arrows(&catalog, &s(2)).unwrap();
                Fixture { name, catalog, arrows }
            })
            .collect()
    })
}

fn silver_catalog(radius: &Scalar) -> PatchCatalog {
    enumerate_patches(&PointSetDescriptor::silver_mean(), radius, &Window::ball(1, &s(60))).unwrap()
}

/// Random patches of `Z/2` in `B_3`, always containing 0.
fn half_integer_patch() -> impl Strategy<Value = Patch> {
    prop::collection::btree_set(-6i64..=6, 0..8).prop_map(|set| {
        let mut pts: Vec<GroupElement> =
            set.into_iter().map(|k| GroupElement::scalar(Scalar::ratio(k, 2))).collect();
        pts.push(GroupElement::scalar(s(0)));
        Patch::new(s(3), pts).unwrap()
    })
}

fn are_translates(a: &[GroupElement], b: &[GroupElement]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(a0) = a.first() else { return true };
    b.iter().any(|b0| {
        let h = b0 * &a0.inv();
        let mut moved: Vec<GroupElement> = a.iter().map(|p| &h * p).collect();
        moved.sort();
        moved == b
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chabauty_distance_is_a_bounded_pseudometric(
        p in half_integer_patch(), q in half_integer_patch(), r in half_integer_patch()
    ) {
        let d = |a: &Patch, b: &Patch| chabauty_distance_exact(a, b).unwrap();
        let (pq, qr, pr) = (d(&p, &q), d(&q, &r), d(&p, &r));
        prop_assert!(d(&p, &p).is_zero());
        prop_assert_eq!(&pq, &d(&q, &p));
        prop_assert!(pq.signum() >= 0 && pq <= s(1));
        prop_assert!(pr <= &pq + &qr);
    }

    #[test]
    fn distinct_catalog_patches_are_at_positive_distance(i in any::<Index>(), j in any::<Index>()) {
        let cat = silver_catalog(&s(3));
        let (i, j) = (i.index(cat.len()), j.index(cat.len()));
        let d = chabauty_distance_exact(&cat.patch(i), &cat.patch(j)).unwrap();
        prop_assert_eq!(d.is_zero(), i == j);
    }

    #[test]
    fn clopen_ids_are_exactly_translation_classes(num in 1i64..=6, f in any::<Index>()) {
        let fx = &fixtures()[f.index(fixtures().len())];
        let cat = &fx.catalog;
        let radius = &cat.radius * &Scalar::ratio(num, 6);
        let dim = cat.patch(0).kind().dim();
        let k = CompactSet::from(Window::ball(dim, &radius));
        let patches = cat.patches();
        let ids: Vec<_> = patches.iter().map(|p| classify_clopen(p, &k).unwrap()).collect();
        let seen: Vec<Vec<GroupElement>> = patches
            .iter()
            .map(|p| p.points().iter().filter(|g| k.contains(g)).cloned().collect())
            .collect();
        for i in 0..patches.len() {
            for j in 0..patches.len() {
                prop_assert_eq!(ids[i] == ids[j], are_translates(&seen[i], &seen[j]), "{} {} {}", fx.name, i, j);
            }
        }
    }

    #[test]
    fn refinement_composes(a in 0usize..5, b in 0usize..5, c in 0usize..5) {
        let radii = [s(3), Scalar::ratio(5, 2), s(2), Scalar::ratio(3, 2), s(1)];
        let mut idx = [a, b, c];
        idx.sort_unstable();
        let cats: Vec<PatchCatalog> = idx.iter().map(|&i| silver_catalog(&radii[i])).collect();
        let direct = build_refinement(&cats[0], &cats[2]).unwrap();
        let first = build_refinement(&cats[0], &cats[1]).unwrap();
        let second = build_refinement(&cats[1], &cats[2]).unwrap();
        prop_assert_eq!(first.then(&second).unwrap(), direct.clone());
        prop_assert!(direct.is_surjective(cats[2].len()));
    }

    #[test]
    fn psi_is_symmetric_and_detects_equal_translations(
        f in any::<Index>(), i in any::<Index>(), j in any::<Index>()
    ) {
        let fx = &fixtures()[f.index(fixtures().len())];
        let a = &fx.arrows[i.index(fx.arrows.len())];
        let b = &fx.arrows[j.index(fx.arrows.len())];
        prop_assert_eq!(psi(a, b), psi(b, a));
        prop_assert_eq!(psi(a, b) == 1, a.x() == b.x());
        prop_assert_eq!(psi(a, a), 1);
    }

    #[test]
    fn witness_matrices_are_positive_type(
        f in any::<Index>(),
        p in any::<Index>(),
        q in any::<Index>(),
        picks in prop::collection::vec((any::<Index>(), any::<Index>()), 1..=8),
    ) {
        let fx = &fixtures()[f.index(fixtures().len())];
        let cat = &fx.catalog;
        let (p, q) = (cat.patch(p.index(cat.len())), cat.patch(q.index(cat.len())));
        let xs: Vec<GroupElement> = picks.iter().map(|(i, _)| p.points()[i.index(p.len())].clone()).collect();
        let ys: Vec<GroupElement> = picks.iter().map(|(_, j)| q.points()[j.index(q.len())].clone()).collect();
        let m = build_matrix(&p, &xs, &q, &ys).unwrap();
        let n = xs.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(m.entries[i][j], m.entries[j][i]);
            }
        }
        let cert = certify_positive_type(&m);
        prop_assert!(cert.pass(), "{}: {:?}", fx.name, cert.first_violation);
    }

    /// `x_j⁻¹x_i y_i⁻¹y_j = e` iff `x_j⁻¹x_i = y_j⁻¹y_i`, which is what makes
    /// the matrix symmetric in a non-abelian group.
    #[test]
    fn entry_one_iff_relative_translations_agree(
        f in any::<Index>(),
        picks in prop::collection::vec((any::<Index>(), any::<Index>()), 2..=8),
    ) {
        let fx = &fixtures()[f.index(fixtures().len())];
        let p = fx.catalog.patch(0);
        let xs: Vec<GroupElement> = picks.iter().map(|(i, _)| p.points()[i.index(p.len())].clone()).collect();
        let ys: Vec<GroupElement> = picks.iter().map(|(_, j)| p.points()[j.index(p.len())].clone()).collect();
        let m = build_matrix(&p, &xs, &p, &ys).unwrap();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                let agree = &xs[j].inv() * &xs[i] == &ys[j].inv() * &ys[i];
                prop_assert_eq!(m.entries[i][j] == 1, agree);
            }
        }
    }
}

#[test]
fn heisenberg_witness_entries_use_left_relative_translations() {
    // x_i x_j⁻¹ = y_i y_j⁻¹ does not make the entry 1 in a non-abelian group.
    let fx = fixtures().iter().find(|f| f.name == "Heisenberg").unwrap();
    let p = fx.catalog.patch(0);
    let h = |a, b, c| GroupElement::from_coords(p.kind(), vec![s(a), s(b), s(c)]).unwrap();
    let xs = vec![h(0, 1, 0), h(1, 0, 0)];
    let ys = vec![h(-1, 1, 0), h(0, 0, 0)];
    assert_eq!(&xs[0] * &xs[1].inv(), &ys[0] * &ys[1].inv());
    assert_ne!(&xs[1].inv() * &xs[0], &ys[1].inv() * &ys[0]);
    let m = build_matrix(&p, &xs, &p, &ys).unwrap();
    assert_eq!(m.entries, vec![vec![1, 0], vec![0, 1]]);
}
