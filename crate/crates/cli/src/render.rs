//! Standalone SVG drawings of classified snapshots.
//!
//! The lattice is shifted so the cell of the coarse edge `(0,0) -> (1,0)`
//! starts at the lower-left corner; edges that wrap around the torus after
//! the shift are not drawn.

use std::fmt::Write;

use anyhow::Context;
use rkout::connectivity::{CoarseEdge, CrossingSpec};
use rkout::lattice::{Dir, Rect};
use rkout::snapshot::Snapshot;
use rkout::EdgeStatus;

/// Pixels per lattice spacing.
const UNIT: f64 = 10.0;

struct Frame {
    width: usize,
    height: usize,
    x0: i64,
    y0: i64,
}

impl Frame {
    fn local(&self, x: usize, y: usize) -> (usize, usize) {
        let lx = (x as i64 - self.x0).rem_euclid(self.width as i64) as usize;
        let ly = (y as i64 - self.y0).rem_euclid(self.height as i64) as usize;
        (lx, ly)
    }

    fn px(&self, lx: usize, ly: usize) -> (f64, f64) {
        ((lx as f64 + 1.0) * UNIT, (self.height as f64 - ly as f64) * UNIT)
    }
}

/// Renders `snap`; fails if it carries no classification.
pub fn render_svg(snap: &Snapshot, margin: Option<usize>, scale: usize) -> anyhow::Result<String> {
    let lattice = snap.lattice()?;
    let status = snap
        .status_field(&lattice)?
        .context("snapshot has no edge statuses; simulate without --raw to classify it")?;
    let corruption = snap.corruption_field(&lattice)?;
    let (w, h) = (lattice.width(), lattice.height());
    let margin = margin.unwrap_or(status.round() as usize);
    let geometry = CrossingSpec::with_scale(scale, margin)
        .ok()
        .map(|s| s.geometry(CoarseEdge::east(0, 0)))
        .filter(|g| g.cell.width <= w && g.cell.height <= h);
    let frame = match &geometry {
        Some(g) => Frame { width: w, height: h, x0: g.cell.x0, y0: g.cell.y0 },
        None => Frame { width: w, height: h, x0: 0, y0: 0 },
    };

    let mut paths = [String::new(), String::new(), String::new()];
    for e in lattice.edges() {
        let layer = match status.get(e) {
            EdgeStatus::CertainlyOccupied => 0,
            EdgeStatus::PotentiallyOccupied => 1,
            EdgeStatus::Undetermined => 2,
            EdgeStatus::CertainlyVacant => continue,
        };
        let id = lattice.edge(e);
        let (lx, ly) = frame.local(id.base.x, id.base.y);
        let (hx, hy) = match id.dir {
            Dir::East => (lx + 1, ly),
            Dir::North => (lx, ly + 1),
        };
        if hx >= w || hy >= h {
            continue;
        }
        let (ax, ay) = frame.px(lx, ly);
        let (bx, by) = frame.px(hx, hy);
        write!(paths[layer], "M{ax} {ay}L{bx} {by}")?;
    }

    let (cw, ch) = ((w as f64 + 1.0) * UNIT, (h as f64 + 1.0) * UNIT);
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{cw}" height="{ch}" viewBox="0 0 {cw} {ch}">"#
    )?;
    writeln!(svg, r#"<rect width="{cw}" height="{ch}" fill="white"/>"#)?;
    let styles = [
        r##"class="occupied" stroke="#000000" stroke-width="3" stroke-linecap="round""##,
        r##"class="potential" stroke="#9a9a9a" stroke-width="1""##,
        r##"class="undetermined" stroke="#5a5a5a" stroke-width="1" stroke-dasharray="2 2""##,
    ];
    for (d, style) in paths.iter().zip(styles) {
        if !d.is_empty() {
            writeln!(svg, r#"<path {style} fill="none" d="{d}"/>"#)?;
        }
    }
    if let Some(c) = &corruption {
        for v in c.vertices() {
            let id = lattice.vertex(v);
            let (lx, ly) = frame.local(id.x, id.y);
            let (x, y) = frame.px(lx, ly);
            writeln!(svg, r##"<circle class="corrupted" cx="{x}" cy="{y}" r="{}" fill="#000000"/>"##, 0.45 * UNIT)?;
        }
    }
    if let Some(g) = &geometry {
        outline(&mut svg, &frame, &g.cell, g.cell, "cell", "#1f5fbf", "")?;
        outline(&mut svg, &frame, &g.cell, g.central, "central", "#c0392b", r#" stroke-dasharray="6 3""#)?;
    }
    writeln!(svg, "</svg>")?;
    Ok(svg)
}

fn outline(svg: &mut String, frame: &Frame, cell: &Rect, r: Rect, class: &str, color: &str, extra: &str) -> anyhow::Result<()> {
    let lx = (r.x0 - cell.x0) as usize;
    let ly = (r.y0 - cell.y0) as usize;
    let (x, y_bottom) = frame.px(lx, ly);
    let (_, y_top) = frame.px(lx, ly + r.height - 1);
    writeln!(
        svg,
        r#"<rect class="{class}" x="{x}" y="{y_top}" width="{}" height="{}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>"#,
        (r.width - 1) as f64 * UNIT,
        y_bottom - y_top
    )?;
    Ok(())
}
