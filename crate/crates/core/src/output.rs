//! Point files: CSV with exact coordinates followed by float columns, and a
//! static SVG scatter for one- and two-dimensional samples.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::pointset::PointSample;

/// Columns `c{i}_p, c{i}_q` (the exact `p + q√d`) for every coordinate,
/// then `c{i}` as floats.
pub fn write_csv<W: Write>(sample: &PointSample, dim: usize, out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dim).flat_map(|i| [format!("c{i}_p"), format!("c{i}_q")]).collect();
    header.extend((0..dim).map(|i| format!("c{i}")));
    w.write_record(&header)?;
    for p in &sample.points {
        let mut row: Vec<String> = p
            .coords()
            .iter()
            .flat_map(|c| [c.rational_part().to_string(), c.surd_part().to_string()])
            .collect();
        row.extend(p.to_f64().iter().map(|v| format!("{v}")));
        w.write_record(&row)?;
    }
    w.flush()
}

const SIZE: f64 = 600.0;
const PAD: f64 = 30.0;

pub fn render_svg(sample: &PointSample, dim: usize) -> Result<String> {
    if dim == 0 || dim > 2 {
        return Err(Error::Precondition(format!("SVG scatter needs dimension 1 or 2, got {dim}")));
    }
    let pts: Vec<(f64, f64)> = sample
        .points
        .iter()
        .map(|p| {
            let c = p.to_f64();
            (c[0], if dim == 2 { c[1] } else { 0.0 })
        })
        .collect();
    let bounds: Vec<(f64, f64)> =
        sample.window.intervals().iter().map(|iv| (iv.lo.to_f64(), iv.hi.to_f64())).collect();
    let span = |(lo, hi): (f64, f64)| if hi > lo { hi - lo } else { 1.0 };
    let (x0, xs) = (bounds[0].0, span(bounds[0]));
    let (y0, ys) = if dim == 2 { (bounds[1].0, span(bounds[1])) } else { (-1.0, 2.0) };
    let inner = SIZE - 2.0 * PAD;
    let height = if dim == 2 { SIZE } else { 2.0 * PAD + 20.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{height}" viewBox="0 0 {SIZE} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if dim == 1 {
        let y = height / 2.0;
        let _ = writeln!(s, r#"<line x1="{PAD}" y1="{y}" x2="{}" y2="{y}" stroke="gray"/>"#, SIZE - PAD);
    }
    for (x, y) in pts {
        let cx = PAD + (x - x0) / xs * inner;
        let cy = if dim == 2 { SIZE - PAD - (y - y0) / ys * inner } else { height / 2.0 };
        let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="3" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}
