//! JSON run configuration. Every number is exact: scalars are rational
//! strings (`"3/2"`, `"-4"`, `"0.25"`) or pairs `["p", "q"]` meaning
//! `p + q√d` for the descriptor's `field` `d`.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind};
use crate::pointset::PointSetDescriptor;
use crate::scalar::{parse_rational, QuadraticScalar as Scalar};
use crate::window::{Interval, Window};

pub const PRESETS: &[&str] = &["z", "z2", "heisenberg", "composite", "silver_mean"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub descriptor: PointSetDescriptor,
    /// Quadratic field of the descriptor's coordinates, if any.
    pub field: Option<u32>,
    pub radius: Scalar,
    pub arrow_radius: Scalar,
    pub sample: Window,
    pub compact: Window,
    /// Neighbourhood for the uniform-discreteness check.
    pub neighbourhood: Window,
    pub eps: Scalar,
    pub seed: u64,
    pub n_samples: usize,
    pub pairs: usize,
    pub triples: usize,
    pub bisections: usize,
    pub diagonal_samples: usize,
    pub support_pairs: usize,
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn parse_scalar(v: &Value, field: Option<u32>) -> Result<Scalar> {
    match v {
        Value::String(s) => Ok(Scalar::from_rational(parse_rational(s)?)),
        Value::Number(n) if n.is_i64() => Ok(Scalar::from_integer(n.as_i64().expect("checked"))),
        Value::Number(_) => Err(cfg(format!("{v} is a float; write it as a rational string"))),
        Value::Array(pair) if pair.len() == 2 => {
            let p = parse_rational_value(&pair[0])?;
            let q = parse_rational_value(&pair[1])?;
            if q.is_zero() {
                return Ok(Scalar::from_rational(p));
            }
            let d = field.ok_or_else(|| cfg("irrational scalar needs a \"field\""))?;
            Scalar::new(p, q, d)
        }
        _ => Err(cfg(format!("cannot read a scalar from {v}"))),
    }
}

fn parse_rational_value(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() => Ok(BigRational::from_integer(n.as_i64().expect("checked").into())),
        _ => Err(cfg(format!("cannot read a rational from {v}"))),
    }
}

fn parse_point(v: &Value, kind: GroupKind, field: Option<u32>) -> Result<GroupElement> {
    let coords = v
        .as_array()
        .ok_or_else(|| cfg(format!("point {v} is not an array")))?
        .iter()
        .map(|c| parse_scalar(c, field))
        .collect::<Result<Vec<_>>>()?;
    GroupElement::from_coords(kind, coords)
}

fn parse_interval(v: &Value, field: Option<u32>) -> Result<Interval> {
    match v {
        Value::Array(b) if b.len() == 2 => {
            Ok(Interval::closed(parse_scalar(&b[0], field)?, parse_scalar(&b[1], field)?))
        }
        Value::Object(o) => {
            let get = |k: &str| o.get(k).ok_or_else(|| cfg(format!("interval lacks \"{k}\"")));
            let lo = parse_scalar(get("lo")?, field)?;
            let hi = parse_scalar(get("hi")?, field)?;
            let open = o.get("open").and_then(Value::as_bool).unwrap_or(false);
            Ok(Interval { lo, hi, open })
        }
        _ => Err(cfg(format!("cannot read an interval from {v}"))),
    }
}

/// A window is either a list of intervals (`[lo, hi]` or `{lo, hi, open}`)
/// or a single scalar `R` meaning the closed box `B_R`.
pub fn parse_window(v: &Value, dim: usize, field: Option<u32>) -> Result<Window> {
    let w = match v {
        Value::Array(items) if items.iter().all(|i| i.is_array() || i.is_object()) && !items.is_empty() => {
            let ivs = items.iter().map(|i| parse_interval(i, field)).collect::<Result<Vec<_>>>()?;
            Window::new(ivs).map_err(|e| cfg(e.to_string()))?
        }
        _ => {
            let r = parse_scalar(v, field)?;
            if r.signum() < 0 {
                return Err(cfg("box radius must be non-negative"));
            }
            Window::ball(dim, &r)
        }
    };
    if w.dim() != dim {
        return Err(cfg(format!("window has dimension {}, expected {dim}", w.dim())));
    }
    Ok(w)
}

fn parse_group(v: &Value) -> Result<GroupKind> {
    match v {
        Value::String(s) if s.eq_ignore_ascii_case("heisenberg") => Ok(GroupKind::Heisenberg),
        Value::String(s) => s
            .strip_prefix("R^")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .map(GroupKind::Abelian)
            .ok_or_else(|| cfg(format!("unknown group {s:?}"))),
        _ => Err(cfg(format!("unknown group {v}"))),
    }
}

pub fn preset(name: &str) -> Result<PointSetDescriptor> {
    Ok(match name {
        "z" | "integers" => PointSetDescriptor::integers(),
        "z2" => PointSetDescriptor::integer_lattice(2),
        "heisenberg" => PointSetDescriptor::heisenberg_integers(),
        "composite" => PointSetDescriptor::composite_integers(),
        "silver_mean" => PointSetDescriptor::silver_mean(),
        _ => return Err(cfg(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
    })
}

fn field_of(v: &Value) -> Result<Option<u32>> {
    match v.get("field") {
        None | Some(Value::Null) => Ok(None),
        Some(f) => f
            .as_u64()
            .and_then(|d| u32::try_from(d).ok())
            .map(Some)
            .ok_or_else(|| cfg(format!("bad field {f}"))),
    }
}

/// Field used by a descriptor's coordinates (the first irrational scalar).
pub fn descriptor_field(desc: &PointSetDescriptor) -> Option<u32> {
    let scalars: Vec<&Scalar> = match desc {
        PointSetDescriptor::Lattice(l) => {
            l.basis.iter().chain(&l.offsets).flat_map(GroupElement::coords).collect()
        }
        PointSetDescriptor::ModelSet(m) => m.phys_map.iter().chain(&m.int_map).flatten().collect(),
    };
    scalars.into_iter().find_map(Scalar::field)
}

pub fn parse_descriptor(v: &Value) -> Result<PointSetDescriptor> {
    if let Some(name) = v.as_str() {
        return preset(name);
    }
    let field = field_of(v)?;
    if let Some(name) = v.get("preset").and_then(Value::as_str) {
        return match (name, v.get("window")) {
            ("silver_mean", Some(w)) => {
                let h = parse_scalar(w, field)?;
                if h.signum() <= 0 {
                    return Err(cfg("silver-mean window half-width must be positive"));
                }
                Ok(PointSetDescriptor::silver_mean_with_window(h))
            }
            (_, Some(_)) => Err(cfg(format!("preset {name:?} takes no window"))),
            (_, None) => preset(name),
        };
    }
    let kind = v
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| cfg("descriptor needs \"kind\" or \"preset\""))?;
    let list = |key: &str| -> Result<Vec<Value>> {
        Ok(v.get(key).and_then(Value::as_array).cloned().unwrap_or_default())
    };
    match kind {
        "lattice" => {
            let group = parse_group(v.get("group").ok_or_else(|| cfg("lattice needs \"group\""))?)?;
            let basis =
                list("basis")?.iter().map(|p| parse_point(p, group, field)).collect::<Result<Vec<_>>>()?;
            let offsets =
                list("offsets")?.iter().map(|p| parse_point(p, group, field)).collect::<Result<Vec<_>>>()?;
            PointSetDescriptor::lattice(group, basis, offsets).map_err(|e| cfg(e.to_string()))
        }
        "model_set" => {
            let rows = |key: &str| -> Result<Vec<Vec<Scalar>>> {
                list(key)?
                    .iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| cfg(format!("{key} rows must be arrays")))?
                            .iter()
                            .map(|s| parse_scalar(s, field))
                            .collect()
                    })
                    .collect()
            };
            let int_map = rows("int_map")?;
            let window = parse_window(
                v.get("window").ok_or_else(|| cfg("model set needs \"window\""))?,
                int_map.len(),
                field,
            )?;
            PointSetDescriptor::model_set(rows("phys_map")?, int_map, window).map_err(|e| cfg(e.to_string()))
        }
        other => Err(cfg(format!("unknown descriptor kind {other:?}"))),
    }
}

fn default_sample(desc: &PointSetDescriptor) -> Window {
    let dim = desc.group().dim();
    let r = match dim {
        1 => 20,
        2 => 4,
        _ => 2,
    };
    Window::ball(dim, &Scalar::from_integer(r))
}

fn count(v: &Value, key: &str, default: usize) -> Result<usize> {
    match v.get(key) {
        None => Ok(default),
        Some(n) => n
            .as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| cfg(format!("\"{key}\" must be a non-negative integer"))),
    }
}

impl RunConfig {
    pub fn from_descriptor(descriptor: PointSetDescriptor) -> Self {
        let dim = descriptor.group().dim();
        RunConfig {
            field: descriptor_field(&descriptor),
            sample: default_sample(&descriptor),
            descriptor,
            radius: Scalar::from_integer(3),
            arrow_radius: Scalar::from_integer(2),
            compact: Window::ball(dim, &Scalar::from_integer(2)),
            neighbourhood: Window::open_ball(dim, &Scalar::ratio(1, 2)),
            eps: Scalar::ratio(1, 1000),
            seed: 0,
            n_samples: 500,
            pairs: 1000,
            triples: 300,
            bisections: 100,
            diagonal_samples: 10_000,
            support_pairs: 10_000,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| cfg(e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let descriptor = parse_descriptor(v.get("descriptor").ok_or_else(|| cfg("missing \"descriptor\""))?)?;
        let mut c = RunConfig::from_descriptor(descriptor);
        let dim = c.descriptor.group().dim();
        let field = c.field;
        if let Some(r) = v.get("radius") {
            c.radius = parse_scalar(r, field)?;
        }
        match v.get("arrow_radius") {
            Some(r) => c.arrow_radius = parse_scalar(r, field)?,
            None => c.clamp_arrow_radius(),
        }
        if let Some(w) = v.get("sample") {
            c.sample = parse_window(w, dim, field)?;
        }
        if let Some(w) = v.get("compact") {
            c.compact = parse_window(w, dim, field)?;
        }
        if let Some(w) = v.get("neighbourhood") {
            c.neighbourhood = match w {
                Value::Array(_) => parse_window(w, dim, field)?,
                _ => Window::open_ball(dim, &parse_scalar(w, field)?),
            };
        }
        if let Some(e) = v.get("eps") {
            c.eps = parse_scalar(e, None)?;
        }
        if let Some(s) = v.get("seed") {
            c.seed = s.as_u64().ok_or_else(|| cfg("\"seed\" must be a non-negative integer"))?;
        }
        c.n_samples = count(v, "n_samples", c.n_samples)?;
        c.pairs = count(v, "pairs", c.pairs)?;
        c.triples = count(v, "triples", c.triples)?;
        c.bisections = count(v, "bisections", c.bisections)?;
        c.diagonal_samples = count(v, "diagonal_samples", c.diagonal_samples)?;
        c.support_pairs = count(v, "support_pairs", c.support_pairs)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radius.signum() <= 0 || self.arrow_radius.signum() < 0 {
            return Err(cfg("radii must be positive"));
        }
        if self.arrow_radius > self.radius {
            return Err(cfg("arrow_radius must not exceed radius"));
        }
        if self.eps.signum() <= 0 {
            return Err(cfg("eps must be positive"));
        }
        if !self.neighbourhood.is_symmetric_neighbourhood() {
            return Err(cfg("neighbourhood must be a symmetric box around the identity"));
        }
        Ok(())
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.as_rational().and_then(ToPrimitive::to_f64).unwrap_or_else(|| self.eps.to_f64())
    }

    /// Lowers the arrow radius to `R` when it exceeds it.
    pub fn clamp_arrow_radius(&mut self) {
        if self.arrow_radius > self.radius {
            self.arrow_radius = self.radius.clone();
        }
    }

    pub fn dim(&self) -> usize {
        self.descriptor.group().dim()
    }
}
