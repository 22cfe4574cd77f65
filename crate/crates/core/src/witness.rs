//! The witness `ψ((x, P), (y, Q)) = δ_e(x⁻¹y)` on pairs of arrows, its
//! Gram-type matrices and their exact positive-type certificates.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::groupoid::{compose, enumerate_arrows, patches_agree, Arrow, Composition};
use crate::pointset::PointSetDescriptor;
use crate::regularity::{enumerate_patches, Patch, PatchCatalog};
use crate::scalar::QuadraticScalar as Scalar;
use crate::window::Window;

/// Floating tolerance for the eigenvalue cross-check.
pub const EIGEN_TOL: f64 = 1e-9;

pub fn psi(a: &Arrow, b: &Arrow) -> u8 {
    u8::from(a.x() == b.x())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessMatrix {
    pub entries: Vec<Vec<u8>>,
    pub xs: Vec<GroupElement>,
    pub ys: Vec<GroupElement>,
}

impl WitnessMatrix {
    /// A bare 0/1 matrix with no provenance.
    pub fn from_entries(entries: Vec<Vec<u8>>) -> Self {
        WitnessMatrix { entries, xs: Vec::new(), ys: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| f64::from(self.entries[i][j]))
    }
}

/// `M_ij = δ_e(x_j⁻¹ x_i y_i⁻¹ y_j)`, the matrix of `ψ` on the arrows
/// `γ_i = (x_i, x_i⁻¹P)`, `η_i = (y_i, y_i⁻¹Q)`.
pub fn build_matrix(p: &Patch, xs: &[GroupElement], q: &Patch, ys: &[GroupElement]) -> Result<WitnessMatrix> {
    if xs.len() != ys.len() {
        return Err(Error::Precondition(format!("{} translations from P but {} from Q", xs.len(), ys.len())));
    }
    for (patch, list) in [(p, xs), (q, ys)] {
        if let Some(bad) = list.iter().find(|x| !patch.contains(x)) {
            return Err(Error::NotMember { point: bad.to_string() });
        }
    }
    let n = xs.len();
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let g = &(&(&xs[j].inv() * &xs[i]) * &ys[i].inv()) * &ys[j];
                    u8::from(g.is_identity())
                })
                .collect()
        })
        .collect();
    Ok(WitnessMatrix { entries, xs: xs.to_vec(), ys: ys.to_vec() })
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdCertificate {
    pub n: usize,
    pub diagonal_ones: bool,
    pub symmetric: bool,
    pub transitive: bool,
    /// Classes of the relation `M_ij = 1`, in order of first index.
    pub blocks: Vec<Vec<usize>>,
    pub blocks_all_ones: bool,
    pub cross_blocks_zero: bool,
    /// The block structure alone makes `M` a sum of multiples of orthogonal
    /// projections.
    pub exact_psd: bool,
    pub min_eigenvalue: f64,
    pub float_psd: bool,
    pub first_violation: Option<String>,
}

impl PsdCertificate {
    pub fn pass(&self) -> bool {
        self.exact_psd && self.float_psd
    }
}

pub fn certify_positive_type(m: &WitnessMatrix) -> PsdCertificate {
    let n = m.n();
    let e = &m.entries;
    let mut violation: Option<String> = None;
    let mut note = |msg: String| {
        violation.get_or_insert(msg);
    };

    let square = e.iter().all(|row| row.len() == n);
    if !square {
        note("matrix is not square".into());
    }
    let at = |i: usize, j: usize| e.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);

    let diagonal_ones = (0..n).all(|i| at(i, i) == 1);
    if let Some(i) = (0..n).find(|&i| at(i, i) != 1) {
        note(format!("M[{i}][{i}] = {}", at(i, i)));
    }
    let mut symmetric = true;
    let mut transitive = true;
    for i in 0..n {
        for j in 0..n {
            if at(i, j) != at(j, i) {
                if symmetric {
                    note(format!("M[{i}][{j}] != M[{j}][{i}]"));
                }
                symmetric = false;
            }
            for k in 0..n {
                if at(i, j) == 1 && at(j, k) == 1 && at(i, k) != 1 {
                    if transitive {
                        note(format!("M[{i}][{j}] = M[{j}][{k}] = 1 but M[{i}][{k}] = 0"));
                    }
                    transitive = false;
                }
            }
        }
    }

    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if block_of[i] != usize::MAX {
            continue;
        }
        let b = blocks.len();
        let mut members: Vec<usize> =
            (i..n).filter(|&j| block_of[j] == usize::MAX && at(i, j) == 1).collect();
        if !members.contains(&i) {
            members.insert(0, i);
        }
        for &j in &members {
            block_of[j] = b;
        }
        blocks.push(members);
    }
    let mut blocks_all_ones = true;
    let mut cross_blocks_zero = true;
    for i in 0..n {
        for j in 0..n {
            let same = block_of[i] == block_of[j];
            match (same, at(i, j)) {
                (true, 1) | (false, 0) => {}
                (true, v) => {
                    blocks_all_ones = false;
                    note(format!("block entry M[{i}][{j}] = {v}"));
                }
                (false, v) => {
                    cross_blocks_zero = false;
                    note(format!("cross-block entry M[{i}][{j}] = {v}"));
                }
            }
        }
    }
    let exact_psd =
        square && diagonal_ones && symmetric && transitive && blocks_all_ones && cross_blocks_zero;
    let min_ev = if square { min_eigenvalue(&m.to_dmatrix()) } else { f64::NAN };
    let float_psd = min_ev >= -EIGEN_TOL;
    if !float_psd {
        note(format!("minimum eigenvalue {min_ev:e}"));
    }
    PsdCertificate {
        n,
        diagonal_ones,
        symmetric,
        transitive,
        blocks,
        blocks_all_ones,
        cross_blocks_zero,
        exact_psd,
        min_eigenvalue: min_ev,
        float_psd,
        first_violation: violation,
    }
}

/// The arrows `γ_i = (x_i, x_i⁻¹P)` with common range `P`, built as
/// inverses of `(x_i⁻¹, P)`.
pub fn fan(p: &Patch, xs: &[GroupElement]) -> Result<Vec<Arrow>> {
    xs.iter().map(|x| Arrow::new(x.inv(), p.clone())?.inverse()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericVerdict {
    pub n: usize,
    pub symmetric: bool,
    pub min_eigenvalue: f64,
    pub pass: bool,
}

fn common_range(arrows: &[Arrow]) -> Result<()> {
    let Some(first) = arrows.first() else { return Ok(()) };
    let r = first.range();
    match arrows.iter().position(|a| !patches_agree(a.range(), r)) {
        Some(i) => Err(Error::UnitMismatch(format!("arrow {i} has a different range"))),
        None => Ok(()),
    }
}

fn quotient(gi: &Arrow, gj: &Arrow) -> Result<Arrow> {
    match compose(&gi.inverse()?, gj) {
        Composition::Defined { arrow } => Ok(arrow),
        Composition::NotComposable { reason } => Err(Error::UnitMismatch(reason)),
        Composition::Undecided { reason } => Err(Error::BudgetExhausted(reason)),
    }
}

/// The matrix `(f(γ_i⁻¹γ_j, η_i⁻¹η_j))_ij` for arrows `γ_i` sharing a
/// range and `η_i` sharing a range, checked for symmetry and for a
/// non-negative spectrum within [`EIGEN_TOL`].
pub fn generic_positive_type_check<F>(
    f: F,
    gammas: &[Arrow],
    etas: &[Arrow],
) -> Result<(DMatrix<f64>, GenericVerdict)>
where
    F: Fn(&Arrow, &Arrow) -> f64,
{
    if gammas.len() != etas.len() {
        return Err(Error::Precondition("tuples differ in length".into()));
    }
    common_range(gammas)?;
    common_range(etas)?;
    let n = gammas.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let g = quotient(&gammas[i], &gammas[j])?;
            let h = quotient(&etas[i], &etas[j])?;
            m[(i, j)] = f(&g, &h);
        }
    }
    let symmetric = (0..n).all(|i| (0..n).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= EIGEN_TOL));
    let min_ev = min_eigenvalue(&m);
    let pass = symmetric && min_ev >= -EIGEN_TOL;
    Ok((m, GenericVerdict { n, symmetric, min_eigenvalue: min_ev, pass }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProperSupportVerdict {
    pub pass: bool,
    pub pairs: usize,
    pub nonzero: usize,
    pub inside_c: usize,
    pub violations: usize,
}

/// `ψ(a, b) ≠ 0` forces `x_a = x_b`, so the support over `C × G(Λ)` stays in
/// `C × C`.
pub fn check_proper_support(pairs: &[(Arrow, Arrow)], c: &Window) -> ProperSupportVerdict {
    let mut v =
        ProperSupportVerdict { pass: true, pairs: pairs.len(), nonzero: 0, inside_c: 0, violations: 0 };
    for (a, b) in pairs {
        if psi(a, b) == 0 {
            continue;
        }
        v.nonzero += 1;
        let a_in = c.contains(a.x());
        if a_in {
            v.inside_c += 1;
        }
        if a.x() != b.x() || a_in != c.contains(b.x()) {
            v.violations += 1;
        }
    }
    v.pass = v.violations == 0;
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XDiscreteness {
    pub pass: bool,
    pub points: usize,
    /// Smallest norm of a non-identity point of `X_R`; `None` when `X_R = {e}`.
    pub min_sep: Option<Scalar>,
    pub min_sep_f64: Option<f64>,
    /// Smallest distance between two distinct points of `X_R`.
    pub pairwise_min: Option<Scalar>,
    pub k: Window,
    pub count_in_k: usize,
    /// Size of `⋃ hF ∩ K` over classes `F` and `h ∈ F⁻¹`.
    pub cover_in_k: usize,
    pub covered: bool,
}

/// Discreteness of `X_R`, the union of the catalog classes, and the covering
/// bound `X_R ∩ K ⊆ ⋃_{F, h ∈ F⁻¹} hF`.
pub fn check_x_discreteness(cat: &PatchCatalog, k: &Window) -> Result<XDiscreteness> {
    if cat.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let x: BTreeSet<GroupElement> = cat.classes.iter().flat_map(|c| c.points.iter().cloned()).collect();
    let min_sep = x.iter().filter(|p| !p.is_identity()).map(GroupElement::norm).min();
    let pts: Vec<&GroupElement> = x.iter().collect();
    let mut pairwise_min: Option<Scalar> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].distance(pts[j]);
            if pairwise_min.as_ref().is_none_or(|m| d < *m) {
                pairwise_min = Some(d);
            }
        }
    }
    let mut cover: BTreeSet<GroupElement> = BTreeSet::new();
    for c in &cat.classes {
        for h in c.points.iter() {
            let h_inv = h.inv();
            for f in c.points.iter() {
                let g = &h_inv * f;
                if k.contains(&g) {
                    cover.insert(g);
                }
            }
        }
    }
    let in_k: Vec<&GroupElement> = x.iter().filter(|p| k.contains(p)).collect();
    let covered = in_k.iter().all(|p| cover.contains(*p));
    let positive = min_sep.as_ref().is_none_or(|m| m.signum() > 0);
    Ok(XDiscreteness {
        pass: positive && covered,
        points: x.len(),
        min_sep_f64: min_sep.as_ref().map(Scalar::to_f64),
        min_sep,
        pairwise_min,
        k: k.clone(),
        count_in_k: in_k.len(),
        cover_in_k: cover.len(),
        covered,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessParams {
    pub radius: Scalar,
    pub arrow_radius: Scalar,
    pub sample_window: Window,
    pub compact: Window,
    pub eps: f64,
    pub n_samples: usize,
    pub diagonal_samples: usize,
    pub support_pairs: usize,
    pub max_n: usize,
}

impl WitnessParams {
    /// Radius 3, arrows up to 2, `K = B_2`; the sample box has half-width 20 on the line and 2 otherwise.
    pub fn defaults(dim: usize) -> Self {
        WitnessParams {
            radius: Scalar::from_integer(3),
            arrow_radius: Scalar::from_integer(2),
            sample_window: Window::ball(dim, &Scalar::from_integer(if dim == 1 { 20 } else { 2 })),
            compact: Window::ball(dim, &Scalar::from_integer(2)),
            eps: 1e-3,
            n_samples: 500,
            diagonal_samples: 10_000,
            support_pairs: 10_000,
            max_n: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalVerdict {
    pub pass: bool,
    pub checked: usize,
    pub max_deviation: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositiveTypeSummary {
    pub n: usize,
    pub failures: usize,
    pub min_eigenvalue: f64,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubVerdicts {
    pub diagonal: DiagonalVerdict,
    pub proper_support: ProperSupportVerdict,
    pub positive_type: PositiveTypeSummary,
    pub x_discreteness: XDiscreteness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerAmenabilityReport {
    pub descriptor: PointSetDescriptor,
    pub parameters: WitnessParams,
    pub seed: u64,
    pub scope: &'static str,
    pub classes: usize,
    pub arrows: usize,
    pub sub_verdicts: SubVerdicts,
    pub pass: bool,
}

/// Random matrix instances: `n ≤ max_n` translations drawn from two random
/// catalog classes.
pub fn sample_instance<R: Rng>(
    cat: &PatchCatalog,
    max_n: usize,
    rng: &mut R,
) -> Result<(Patch, Vec<GroupElement>, Patch, Vec<GroupElement>)> {
    if cat.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let p = cat.patch(rng.gen_range(0..cat.len()));
    let q = cat.patch(rng.gen_range(0..cat.len()));
    let n = rng.gen_range(1..=max_n.max(1));
    let pick = |patch: &Patch, rng: &mut R| -> Vec<GroupElement> {
        (0..n).map(|_| patch.points().choose(rng).expect("identity present").clone()).collect()
    };
    let xs = pick(&p, rng);
    let ys = pick(&q, rng);
    Ok((p, xs, q, ys))
}

/// Pairs of arrows, half of them sharing `x` so that the support is hit.
pub fn sample_pairs<R: Rng>(arrows: &[Arrow], count: usize, rng: &mut R) -> Vec<(Arrow, Arrow)> {
    if arrows.is_empty() {
        return Vec::new();
    }
    let mut by_x: BTreeMap<&GroupElement, Vec<&Arrow>> = BTreeMap::new();
    for a in arrows {
        by_x.entry(a.x()).or_default().push(a);
    }
    (0..count)
        .map(|i| {
            let a = arrows.choose(rng).expect("nonempty");
            let b = if i % 2 == 0 {
                *by_x[a.x()].choose(rng).expect("contains a")
            } else {
                arrows.choose(rng).expect("nonempty")
            };
            (a.clone(), b.clone())
        })
        .collect()
}

pub fn inner_amenability_report(
    desc: &PointSetDescriptor,
    params: &WitnessParams,
    seed: u64,
) -> Result<InnerAmenabilityReport> {
    if params.arrow_radius > params.radius {
        return Err(Error::RadiusExceeded {
            requested: params.arrow_radius.to_string(),
            available: params.radius.to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cat = enumerate_patches(desc, &params.radius, &params.sample_window)?;
    let arrows = enumerate_arrows(&cat, &params.arrow_radius)?;

    let in_k: Vec<&Arrow> = arrows.iter().filter(|a| params.compact.contains(a.x())).collect();
    let mut diagonal = DiagonalVerdict { pass: true, checked: 0, max_deviation: 0.0, violations: 0 };
    if !in_k.is_empty() {
        for _ in 0..params.diagonal_samples {
            let g = in_k.choose(&mut rng).expect("nonempty");
            let dev = (f64::from(psi(g, g)) - 1.0).abs();
            diagonal.checked += 1;
            diagonal.max_deviation = diagonal.max_deviation.max(dev);
            if dev >= params.eps {
                diagonal.violations += 1;
            }
        }
    }
    diagonal.pass = diagonal.violations == 0;

    let pairs = sample_pairs(&arrows, params.support_pairs, &mut rng);
    let proper_support = check_proper_support(&pairs, &params.compact);

    let mut positive_type = PositiveTypeSummary {
        n: params.n_samples,
        failures: 0,
        min_eigenvalue: f64::INFINITY,
        first_failure: None,
    };
    for _ in 0..params.n_samples {
        let (p, xs, q, ys) = sample_instance(&cat, params.max_n, &mut rng)?;
        let m = build_matrix(&p, &xs, &q, &ys)?;
        let cert = certify_positive_type(&m);
        positive_type.min_eigenvalue = positive_type.min_eigenvalue.min(cert.min_eigenvalue);
        if !cert.pass() {
            positive_type.failures += 1;
            if positive_type.first_failure.is_none() {
                positive_type.first_failure = cert.first_violation.clone();
            }
        }
    }

    let x_discreteness = check_x_discreteness(&cat, &params.compact)?;
    let pass = diagonal.pass && proper_support.pass && positive_type.failures == 0 && x_discreteness.pass;
    Ok(InnerAmenabilityReport {
        descriptor: desc.clone(),
        parameters: params.clone(),
        seed,
        scope: crate::regularity::CERTIFICATE_SCOPE,
        classes: cat.len(),
        arrows: arrows.len(),
        sub_verdicts: SubVerdicts { diagonal, proper_support, positive_type, x_discreteness },
        pass,
    })
}
