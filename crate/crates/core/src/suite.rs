//! The check suites driven by the command line and the C interface. Each
//! returns a JSON value with a `pass` flag; reports carry no timestamps so
//! that equal configurations give byte-identical output.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::group::GroupKind;
use crate::groupoid::{build_bisection, check_axioms, enumerate_arrows, Bisection};
use crate::hull::{build_refinement, chabauty_distance_exact, classify_clopen, separating_compact};
use crate::regularity::{check_flc, check_uniformly_discrete, enumerate_patches, PatchCatalog};
use crate::scalar::QuadraticScalar as Scalar;
use crate::window::{CompactSet, Interval, Window};
use crate::witness::{inner_amenability_report, WitnessParams};

/// Upper bound on class pairs examined by the separation check.
pub const MAX_SEPARATION_PAIRS: usize = 190;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Ud,
    Flc,
    Patches,
    Hull,
    Groupoid,
    Witness,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Ud, Suite::Flc, Suite::Patches, Suite::Hull, Suite::Groupoid, Suite::Witness];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ud => "ud",
            Suite::Flc => "flc",
            Suite::Patches => "patches",
            Suite::Hull => "hull",
            Suite::Groupoid => "groupoid",
            Suite::Witness => "witness",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn pass_of(v: &Value) -> bool {
    v.get("pass").and_then(Value::as_bool).unwrap_or(false)
}

pub fn run_ud(c: &RunConfig) -> Result<Value> {
    let v = check_uniformly_discrete(&c.descriptor, &c.neighbourhood, &c.sample)?;
    Ok(to_value(&v))
}

pub fn run_flc(c: &RunConfig) -> Result<Value> {
    Ok(to_value(&check_flc(&c.descriptor, &c.sample)?))
}

fn doubled(w: &Window) -> Window {
    let two = Scalar::from_integer(2);
    let ivs = w
        .intervals()
        .iter()
        .map(|iv| Interval { lo: &iv.lo * &two, hi: &iv.hi * &two, open: iv.open })
        .collect();
    Window::new(ivs).expect("scaling keeps intervals nonempty")
}

/// Catalog at `R`, its invariants, and stability of the class count when
/// the sample window is doubled.
pub fn run_patches(c: &RunConfig) -> Result<Value> {
    let cat = enumerate_patches(&c.descriptor, &c.radius, &c.sample)?;
    let wider = doubled(&c.sample);
    let cat2 = enumerate_patches(&c.descriptor, &c.radius, &wider)?;
    let anchored = cat.classes.iter().all(|cl| cl.points.iter().any(|p| p.is_identity()));
    let carrier = c.descriptor.difference_descriptor()?;
    let ball = Window::ball(c.dim(), &c.radius);
    let carrier_pts: BTreeSet<_> = carrier.enumerate_window(&ball)?.points.into_iter().collect();
    let in_carrier = cat.classes.iter().all(|cl| cl.points.iter().all(|p| carrier_pts.contains(p)));
    let stable = cat.len() == cat2.len();
    Ok(json!({
        "pass": anchored && in_carrier && stable && !cat.is_empty(),
        "classes": cat.len(),
        "anchors": cat.anchors(),
        "classes_in_doubled_sample": cat2.len(),
        "doubled_sample": to_value(&wider),
        "stable": stable,
        "anchored": anchored,
        "within_difference_carrier": in_carrier,
        "catalog": to_value(&cat),
    }))
}

fn partition_ok(cat: &PatchCatalog, k: &CompactSet) -> Result<(bool, usize)> {
    let ids = cat.patches().iter().map(|p| classify_clopen(p, k)).collect::<Result<Vec<_>>>()?;
    let distinct: BTreeSet<&Vec<_>> = ids.iter().map(|id| &id.representative).collect();
    // Each patch receives exactly one id; patches with equal ids form the
    // blocks, which are disjoint by construction and cover the catalog.
    let covered: usize =
        distinct.iter().map(|rep| ids.iter().filter(|id| &&id.representative == rep).count()).sum();
    Ok((covered == cat.len(), distinct.len()))
}

/// Refinement to half the radius, the clopen partition over `B_{R/2}`,
/// separating compact sets for class pairs, and metric checks of the truncated
/// Chabauty-Fell distance.
pub fn run_hull(c: &RunConfig) -> Result<Value> {
    let cat = enumerate_patches(&c.descriptor, &c.radius, &c.sample)?;
    let half = &c.radius * &Scalar::ratio(1, 2);
    let coarse = enumerate_patches(&c.descriptor, &half, &c.sample)?;
    let refinement = build_refinement(&cat, &coarse)?;
    let surjective = refinement.is_surjective(coarse.len());

    let k = CompactSet::from(Window::ball(c.dim(), &half));
    let (partition, clopen_classes) = partition_ok(&cat, &k)?;

    let patches = cat.patches();
    let mut separations = 0usize;
    let mut separation_failures = Vec::new();
    let mut examined = 0usize;
    'outer: for i in 0..patches.len() {
        for j in i + 1..patches.len() {
            if examined == MAX_SEPARATION_PAIRS {
                break 'outer;
            }
            examined += 1;
            match separating_compact(&patches[i], &patches[j]) {
                Ok((kk, proof)) => {
                    let holder = if proof.swapped { &patches[j] } else { &patches[i] };
                    let seen = holder.points().iter().filter(|p| kk.contains(p)).count();
                    if seen == 2 && kk.contains(&proof.x) && !kk.contains(&proof.x.inv()) {
                        separations += 1;
                    } else {
                        separation_failures.push(json!({"pair": [i, j], "reason": "unsound compact set"}));
                    }
                }
                Err(e) => separation_failures.push(json!({"pair": [i, j], "reason": e.to_string()})),
            }
        }
    }

    let n = patches.len().min(12);
    let mut d = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = chabauty_distance_exact(&patches[i], &patches[j])?;
        }
    }
    let mut metric_violations = 0usize;
    for i in 0..n {
        for j in 0..n {
            if d[i][j] != d[j][i] || (d[i][j].is_zero() != (i == j)) {
                metric_violations += 1;
            }
            for k in 0..n {
                if d[i][k] > &d[i][j] + &d[j][k] {
                    metric_violations += 1;
                }
            }
        }
    }

    let pass = surjective && partition && separation_failures.is_empty() && metric_violations == 0;
    Ok(json!({
        "pass": pass,
        "classes": cat.len(),
        "refinement": to_value(&refinement),
        "refinement_surjective": surjective,
        "clopen_window": to_value(&k),
        "clopen_classes": clopen_classes,
        "partition": partition,
        "separation_pairs": examined,
        "separations": separations,
        "separation_failures": separation_failures,
        "metric_patches": n,
        "metric_violations": metric_violations,
    }))
}

/// An open box `V` with `VV ⊆ U₀`: a quarter of `U₀`'s half-width, halved
/// until the product hull fits.
fn small_v(kind: GroupKind, u0: &Window) -> Window {
    let mut r = &u0.radius() * &Scalar::ratio(1, 4);
    loop {
        let v = Window::open_ball(kind.dim(), &r);
        if Window::product_hull(kind, &v, &v).is_subset(u0) {
            return v;
        }
        r = &r * &Scalar::ratio(1, 2);
    }
}

pub fn sample_bisections<R: Rng>(
    c: &RunConfig,
    cat: &PatchCatalog,
    u0: &Window,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Bisection>> {
    let v = small_v(c.descriptor.group(), u0);
    let centres: Vec<_> = cat
        .classes
        .iter()
        .flat_map(|cl| cl.points.iter().map(|p| p.inv()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    (0..count)
        .map(|_| {
            let x = centres.choose(rng).expect("catalog nonempty").clone();
            let size = rng.gen_range(1..=cat.len());
            let mut classes = (0..cat.len()).choose_multiple(rng, size);
            classes.sort_unstable();
            build_bisection(&x, &v, &classes, cat, u0)
        })
        .collect()
}

pub fn run_groupoid(c: &RunConfig) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let cat = enumerate_patches(&c.descriptor, &c.radius, &c.sample)?;
    let arrows = enumerate_arrows(&cat, &c.arrow_radius)?;
    let axioms = check_axioms(&cat, &arrows, c.pairs, c.triples, &mut rng);
    let flc = check_flc(&c.descriptor, &c.sample)?;
    let u0 = flc.neighbourhood.clone();
    let bisections = sample_bisections(c, &cat, &u0, c.bisections, &mut rng)?;
    let injective =
        bisections.iter().filter(|b| b.certificate.source_injective && b.certificate.range_injective).count();
    let sizes: usize = bisections.iter().map(|b| b.arrows.len()).sum();
    let pass = axioms.pass && flc.pass && injective == bisections.len();
    Ok(json!({
        "pass": pass,
        "classes": cat.len(),
        "axioms": to_value(&axioms),
        "u0": to_value(&u0),
        "bisections": bisections.len(),
        "bisection_arrows": sizes,
        "injective_bisections": injective,
    }))
}

pub fn witness_params(c: &RunConfig) -> WitnessParams {
    WitnessParams {
        radius: c.radius.clone(),
        arrow_radius: c.arrow_radius.clone(),
        sample_window: c.sample.clone(),
        compact: c.compact.clone(),
        eps: c.eps_f64(),
        n_samples: c.n_samples,
        diagonal_samples: c.diagonal_samples,
        support_pairs: c.support_pairs,
        max_n: 8,
    }
}

pub fn run_witness(c: &RunConfig) -> Result<Value> {
    Ok(to_value(&inner_amenability_report(&c.descriptor, &witness_params(c), c.seed)?))
}

fn run_one(c: &RunConfig, s: Suite) -> Result<Value> {
    match s {
        Suite::Ud => run_ud(c),
        Suite::Flc => run_flc(c),
        Suite::Patches => run_patches(c),
        Suite::Hull => run_hull(c),
        Suite::Groupoid => run_groupoid(c),
        Suite::Witness => run_witness(c),
        Suite::All => unreachable!("expanded by run_suite"),
    }
}

/// `{suite, config, seed, results: {name: report}, pass}`.
pub fn run_suite(c: &RunConfig, suite: Suite) -> Result<Value> {
    let list: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let mut results = serde_json::Map::new();
    let mut pass = true;
    for s in list {
        let v = run_one(c, s)?;
        pass &= pass_of(&v);
        results.insert(s.name().to_string(), v);
    }
    Ok(json!({
        "suite": suite.name(),
        "config": to_value(c),
        "seed": c.seed,
        "results": Value::Object(results),
        "pass": pass,
    }))
}
