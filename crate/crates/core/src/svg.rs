//! Minimal static SVG emission for the chart outputs. No styling knobs;
//! these are inspection figures, not a plotting library.

use crate::textstats::FamilyBreakdown;

pub const PALETTE: &[&str] = &[
    "#4878cf", "#d65f5f", "#59a14f", "#b07aa1", "#e49444", "#76b7b2", "#edc949", "#9c755f",
];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Horizontal stacked bars: total word occurrences per family, prose words
/// as the darker leading segment, count printed at the right of each bar.
pub fn family_bars(breakdown: &FamilyBreakdown) -> String {
    let rows = &breakdown.rows;
    let max_words = rows.iter().map(|r| r.word_occurrences).max().unwrap_or(0);
    let bar_h = 18.0;
    let gap = 8.0;
    let label_w = 240.0;
    let plot_w = 520.0;
    let height = 40.0 + rows.len() as f64 * (bar_h + gap);
    let width = label_w + plot_w + 120.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s.push_str("<text x=\"10\" y=\"20\" font-weight=\"bold\">word occurrences per family (prose share darker)</text>\n");
    for (i, r) in rows.iter().enumerate() {
        let y = 36.0 + i as f64 * (bar_h + gap);
        let scale = if max_words == 0 {
            0.0
        } else {
            plot_w / max_words as f64
        };
        let total_w = r.word_occurrences as f64 * scale;
        let prose_w = r.prose_word_occurrences as f64 * scale;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            label_w - 6.0,
            y + bar_h - 5.0,
            esc(&r.family)
        ));
        s.push_str(&format!(
            "<rect x=\"{label_w:.1}\" y=\"{y:.1}\" width=\"{total_w:.2}\" height=\"{bar_h:.1}\" fill=\"#9ecae1\"/>\n"
        ));
        if r.prose_word_occurrences > 0 {
            s.push_str(&format!(
                "<rect x=\"{label_w:.1}\" y=\"{y:.1}\" width=\"{prose_w:.2}\" height=\"{bar_h:.1}\" fill=\"#2171b5\"/>\n"
            ));
        }
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            label_w + total_w + 6.0,
            y + bar_h - 5.0,
            r.word_occurrences
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// 2-d scatter: one color per group, circles for poetry, crosses for prose.
pub fn scatter(
    points: &[(f64, f64)],
    groups: &[String],
    kinds: &[String],
    group_order: &[String],
) -> String {
    let width = 760.0;
    let height = 560.0;
    let margin = 50.0;
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    if points.is_empty() {
        min_x = 0.0;
        max_x = 1.0;
        min_y = 0.0;
        max_y = 1.0;
    }
    let span_x = (max_x - min_x).max(1e-12);
    let span_y = (max_y - min_y).max(1e-12);
    let sx = |x: f64| margin + (x - min_x) / span_x * (width - 2.0 * margin - 140.0);
    let sy = |y: f64| height - margin - (y - min_y) / span_y * (height - 2.0 * margin);
    let color_of = |group: &str| {
        let idx = group_order.iter().position(|g| g == group).unwrap_or(0);
        PALETTE[idx % PALETTE.len()]
    };
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    for (i, &(x, y)) in points.iter().enumerate() {
        let cx = sx(x);
        let cy = sy(y);
        let color = color_of(&groups[i]);
        if kinds[i] == "prose" {
            s.push_str(&format!(
                "<path class=\"marker-cross\" d=\"M {x0:.1} {y0:.1} L {x1:.1} {y1:.1} M {x0:.1} {y1:.1} L {x1:.1} {y0:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                x0 = cx - 3.5,
                y0 = cy - 3.5,
                x1 = cx + 3.5,
                y1 = cy + 3.5,
            ));
        } else {
            s.push_str(&format!(
                "<circle class=\"marker-dot\" cx=\"{cx:.1}\" cy=\"{cy:.1}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.8\"/>\n"
            ));
        }
    }
    // legend
    let lx = width - 150.0;
    let mut ly = margin;
    for group in group_order {
        let color = color_of(group);
        s.push_str(&format!(
            "<rect class=\"legend-group\" x=\"{lx:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            ly - 10.0,
            lx + 18.0,
            ly,
            esc(group)
        ));
        ly += 20.0;
    }
    ly += 10.0;
    s.push_str(&format!(
        "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#555\"/><text x=\"{:.1}\" y=\"{:.1}\">poetry</text>\n",
        lx + 6.0,
        ly - 4.0,
        lx + 18.0,
        ly
    ));
    ly += 20.0;
    s.push_str(&format!(
        "<path d=\"M {x0:.1} {y0:.1} L {x1:.1} {y1:.1} M {x0:.1} {y1:.1} L {x1:.1} {y0:.1}\" stroke=\"#555\" stroke-width=\"1.5\"/><text x=\"{:.1}\" y=\"{:.1}\">prose</text>\n",
        lx + 18.0,
        ly,
        x0 = lx + 2.0,
        y0 = ly - 8.0,
        x1 = lx + 10.0,
        y1 = ly
    ));
    s.push_str("</svg>\n");
    s
}
