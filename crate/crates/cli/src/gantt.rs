//! Gantt charts of a plan: static SVG or fixed-width text.
//!
//! One row per robot. Placement bars carry the brick id; the return leg is
//! drawn lighter and battery swaps use their own colour and glyph.

use std::fmt::Write as _;

use brickplan_core::engine::TimelineItem;
use brickplan_core::Plan;

/// Seconds per text column.
pub const TEXT_SECONDS_PER_COLUMN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GanttFormat {
    Svg,
    Text,
}

impl GanttFormat {
    /// SVG for `.svg` paths, text otherwise.
    pub fn for_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("svg") => GanttFormat::Svg,
            _ => GanttFormat::Text,
        }
    }
}

pub fn render_gantt(plan: &Plan, format: GanttFormat) -> String {
    match format {
        GanttFormat::Svg => render_svg(plan),
        GanttFormat::Text => render_text(plan),
    }
}

fn is_empty(plan: &Plan) -> bool {
    plan.placements.is_empty() && plan.swaps.is_empty()
}

fn horizon(plan: &Plan) -> f64 {
    plan.placements
        .iter()
        .map(|p| p.cycle_end)
        .chain(plan.swaps.iter().map(|s| s.end))
        .fold(0.0, f64::max)
}

fn column(t: f64) -> usize {
    (t / TEXT_SECONDS_PER_COLUMN + 1e-9).floor().max(0.0) as usize
}

fn column_end(t: f64) -> usize {
    (t / TEXT_SECONDS_PER_COLUMN - 1e-9).ceil().max(0.0) as usize
}

/// Placement bars start with `|` followed by the brick id and `=` filler,
/// the return leg is `.`, a battery swap is `S`.
pub fn render_text(plan: &Plan) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "T' = {} s, reward {}, {} s per column",
        plan.completion_time, plan.reward, TEXT_SECONDS_PER_COLUMN
    );
    if is_empty(plan) {
        return out;
    }
    let cols = column_end(horizon(plan));
    let label_w = plan.robot_ids.iter().map(|r| format!("r{r}").len()).max().unwrap_or(2);

    let mut axis = vec![b' '; cols + 1];
    for c in (0..=cols).step_by(10) {
        let mark = format!("{}", c as f64 * TEXT_SECONDS_PER_COLUMN);
        for (k, ch) in mark.bytes().enumerate() {
            if c + k < axis.len() {
                axis[c + k] = ch;
            } else {
                axis.push(ch);
            }
        }
    }
    let _ = writeln!(out, "{:label_w$} |{}", "t", String::from_utf8_lossy(&axis).trim_end());

    for &robot in &plan.robot_ids {
        let mut row = vec![b' '; cols];
        for item in plan.timeline(robot) {
            match item {
                TimelineItem::Place(p) => {
                    let (a, b) = (column(p.start), column_end(p.placed_at).max(column(p.start) + 1));
                    let label = format!("|{}", p.brick);
                    for (k, c) in (a..b.min(cols)).enumerate() {
                        row[c] = *label.as_bytes().get(k).unwrap_or(&b'=');
                    }
                    for c in b..column_end(p.cycle_end).min(cols) {
                        row[c] = b'.';
                    }
                }
                TimelineItem::Swap(s) => {
                    for c in column(s.start)..column_end(s.end).min(cols) {
                        row[c] = b'S';
                    }
                }
            }
        }
        let text = String::from_utf8_lossy(&row).trim_end().to_string();
        let _ = writeln!(out, "{:label_w$} |{text}", format!("r{robot}"));
    }
    out
}

const PX_PER_S: f64 = 3.0;
const ROW_H: f64 = 28.0;
const LEFT: f64 = 48.0;
const TOP: f64 = 36.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(plan: &Plan) -> String {
    let rows = if is_empty(plan) { 0 } else { plan.robot_ids.len() };
    let span = horizon(plan).max(TEXT_SECONDS_PER_COLUMN * 10.0);
    let width = LEFT + span * PX_PER_S + 24.0;
    let height = TOP + rows as f64 * ROW_H + 28.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="monospace" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="4" y="16">{}</text>"#,
        escape(&format!("T' = {} s, reward {}", plan.completion_time, plan.reward))
    );

    // Time axis every 50 s.
    let axis_y = TOP + rows as f64 * ROW_H + 4.0;
    let mut t = 0.0;
    while t <= span + 1e-9 {
        let x = LEFT + t * PX_PER_S;
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{axis_y:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{t}</text>"##,
            axis_y + 14.0
        );
        t += 50.0;
    }

    for (row, &robot) in plan.robot_ids.iter().enumerate().take(rows) {
        let y = TOP + row as f64 * ROW_H;
        let _ = writeln!(out, r#"<text x="4" y="{:.1}">r{robot}</text>"#, y + 18.0);
        for item in plan.timeline(robot) {
            match item {
                TimelineItem::Place(p) => {
                    let x = LEFT + p.start * PX_PER_S;
                    let w = (p.placed_at - p.start) * PX_PER_S;
                    let rw = (p.cycle_end - p.placed_at) * PX_PER_S;
                    let _ = writeln!(
                        out,
                        r##"<g class="placement"><rect x="{x:.1}" y="{:.1}" width="{w:.1}" height="{:.1}" fill="#4a7bd0" stroke="#1d3f7a"/><rect x="{:.1}" y="{:.1}" width="{rw:.1}" height="{:.1}" fill="#c5d5f0"/><text x="{:.1}" y="{:.1}" fill="#fff" text-anchor="middle">{}</text></g>"##,
                        y + 4.0,
                        ROW_H - 8.0,
                        x + w,
                        y + 10.0,
                        ROW_H - 20.0,
                        x + w / 2.0,
                        y + 18.0,
                        p.brick
                    );
                }
                TimelineItem::Swap(s) => {
                    let x = LEFT + s.start * PX_PER_S;
                    let w = (s.end - s.start) * PX_PER_S;
                    let _ = writeln!(
                        out,
                        r##"<g class="swap"><rect x="{x:.1}" y="{:.1}" width="{w:.1}" height="{:.1}" fill="#f0a030" stroke="#8a5a10" stroke-dasharray="4 2"/><text x="{:.1}" y="{:.1}" text-anchor="middle">swap</text></g>"##,
                        y + 4.0,
                        ROW_H - 8.0,
                        x + w / 2.0,
                        y + 18.0
                    );
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
