use std::fmt::Write;

use serde_json::{json, Value};

use super::{SubstitutionRule, TilingError, TilingPatch};

/// `[{"label": 1-based type, "translation": [...]}, ...]` in patch order.
pub fn patch_to_json(patch: &TilingPatch) -> Value {
    Value::Array(
        patch
            .tiles
            .iter()
            .map(|t| json!({"label": t.label + 1, "translation": t.translation.iter().collect::<Vec<_>>()}))
            .collect(),
    )
}

fn fill_color(label: usize) -> String {
    // FNV-1a over the label bytes picks the hue.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in (label as u64).to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("hsl({},65%,60%)", h % 360)
}

/// SVG of a patch for `d ≤ 2`; 1-D tiles are drawn as unit-height bars.
pub fn render_svg(rule: &SubstitutionRule, patch: &TilingPatch) -> Result<String, TilingError> {
    let d = rule.dim();
    if d > 2 {
        return Err(TilingError::RenderUnsupported { dim: d });
    }
    let rects: Vec<(usize, [f64; 4])> = patch
        .tiles
        .iter()
        .map(|t| {
            let b = rule.prototiles()[t.label].support.translate(&t.translation);
            let (x0, x1) = (b.lo()[0], b.hi()[0]);
            let (y0, y1) = if d == 2 { (b.lo()[1], b.hi()[1]) } else { (0.0, 1.0) };
            (t.label, [x0, y0, x1, y1])
        })
        .collect();
    if rects.is_empty() {
        return Err(TilingError::Empty);
    }
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (_, r) in &rects {
        x0 = x0.min(r[0]);
        y0 = y0.min(r[1]);
        x1 = x1.max(r[2]);
        y1 = y1.max(r[3]);
    }
    let (mx, my) = (0.02 * (x1 - x0), 0.02 * (y1 - y0));
    let stroke = 0.002 * (x1 - x0).max(y1 - y0);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        x0 - mx,
        -(y1 + my),
        (x1 - x0) + 2.0 * mx,
        (y1 - y0) + 2.0 * my
    )
    .expect("write to string");
    for (label, r) in &rects {
        // Flip y so the picture has the usual orientation.
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}" stroke="black" stroke-width="{}"/>"#,
            r[0],
            -r[3],
            r[2] - r[0],
            r[3] - r[1],
            fill_color(*label + 1),
            stroke
        )
        .expect("write to string");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
