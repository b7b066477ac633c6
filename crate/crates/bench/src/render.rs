//! Top-down SVG drawing of a scenario, optionally at a trace tick.

use std::fmt::Write;

use tailbench_core::geometry::{OrientedBox, Vec2};
use tailbench_core::scenario::{ObstacleKind, ScenarioSpec};
use tailbench_core::sim::SimTrace;

pub const EGO_COLOR: &str = "orange";
pub const ROUTE_COLOR: &str = "purple";
pub const VEHICLE_COLOR: &str = "#1f77b4";
pub const PEDESTRIAN_COLOR: &str = "#2ca02c";
pub const CONE_COLOR: &str = "#d62728";
pub const LANE_COLOR: &str = "#9e9e9e";

const PX_PER_M: f64 = 4.0;
const MARGIN: f64 = 5.0;

struct Canvas {
    min: Vec2<f64>,
    max: Vec2<f64>,
    out: String,
}

impl Canvas {
    fn px(&self, p: Vec2<f64>) -> (f64, f64) {
        ((p.x - self.min.x + MARGIN) * PX_PER_M, (self.max.y - p.y + MARGIN) * PX_PER_M)
    }

    fn points(&self, pts: impl IntoIterator<Item = Vec2<f64>>) -> String {
        pts.into_iter()
            .map(|p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn polyline(&mut self, class: &str, pts: impl IntoIterator<Item = Vec2<f64>>, stroke: &str, width: f64, dash: Option<&str>) {
        let pts = self.points(pts);
        let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let _ = writeln!(
            self.out,
            r#"<polyline class="{class}" points="{pts}" fill="none" stroke="{stroke}" stroke-width="{width}"{dash}/>"#
        );
    }

    fn bbox(&mut self, class: &str, b: &OrientedBox<f64>, fill: &str) {
        let pts = self.points(b.corners());
        let _ = writeln!(self.out, r#"<polygon class="{class}" points="{pts}" fill="{fill}" stroke="black" stroke-width="0.5"/>"#);
    }
}

/// Renders `spec`. With a trace, actors come from snapshot `tick` (the last
/// one when `None`) and the past path and current plan are drawn.
pub fn render_svg(spec: &ScenarioSpec, trace: Option<&SimTrace>, tick: Option<usize>) -> String {
    let area = spec.graph.drivable_area();
    let (mut min, mut max) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for poly in area {
        let (lo, hi) = poly.bounds();
        min = Vec2::new(min.x.min(lo.x), min.y.min(lo.y));
        max = Vec2::new(max.x.max(hi.x), max.y.max(hi.y));
    }
    if !min.x.is_finite() {
        (min, max) = (Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
    }
    let w = (max.x - min.x + 2.0 * MARGIN) * PX_PER_M;
    let h = (max.y - min.y + 2.0 * MARGIN) * PX_PER_M;
    let mut c = Canvas { min, max, out: String::new() };
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(c.out, "<title>{}</title>", spec.name);
    let _ = writeln!(c.out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for poly in area {
        let pts = c.points(poly.vertices.iter().copied());
        let _ = writeln!(c.out, r##"<polygon class="drivable" points="{pts}" fill="#ececec" stroke="none"/>"##);
    }
    for lane in spec.graph.lanes() {
        for d in [-0.5 * lane.width, 0.5 * lane.width] {
            if let Ok(edge) = lane.centerline.offset(d) {
                c.polyline("lane-edge", edge.points().to_vec(), LANE_COLOR, 1.0, None);
            }
        }
        c.polyline("lane", lane.centerline.points().to_vec(), LANE_COLOR, 0.5, Some("6 6"));
    }
    for id in &spec.route.lane_sequence {
        if let Some(lane) = spec.graph.lane(id) {
            c.polyline("route", lane.centerline.points().to_vec(), ROUTE_COLOR, 3.0, None);
        }
    }
    let (gx, gy) = c.px(spec.route.goal_pose.position());
    let _ = writeln!(c.out, r#"<circle class="goal" cx="{gx:.2}" cy="{gy:.2}" r="6" fill="{ROUTE_COLOR}"/>"#);

    for o in &spec.obstacles {
        match o.kind {
            ObstacleKind::Cone => c.bbox("cone", &o.bbox, CONE_COLOR),
            other => c.bbox(&format!("obstacle {}", other.as_str()), &o.bbox, VEHICLE_COLOR),
        }
    }

    let snap = trace.and_then(|t| match tick {
        Some(k) => t.snapshots.get(k.min(t.snapshots.len().saturating_sub(1))),
        None => t.snapshots.last(),
    });
    match (trace, snap) {
        (Some(t), Some(s)) => {
            let past: Vec<Vec2<f64>> = t.snapshots[..=s.tick.min(t.snapshots.len() - 1)]
                .iter()
                .map(|p| p.ego.bbox.center.position())
                .collect();
            c.polyline("past-path", past, EGO_COLOR, 2.0, Some("4 3"));
            if let Some(plan) = &s.plan {
                c.polyline("plan", plan.iter().map(|p| p.pose.position()), EGO_COLOR, 2.0, None);
            }
            for a in s.agents.iter().filter(|a| a.active) {
                c.bbox("vehicle", &a.bbox, VEHICLE_COLOR);
            }
            for p in &s.pedestrians {
                c.bbox("pedestrian", &p.bbox, PEDESTRIAN_COLOR);
            }
            c.bbox("ego", &s.ego.bbox, EGO_COLOR);
        }
        _ => {
            for a in &spec.agents.vehicles {
                c.bbox("vehicle", &a.bbox(&spec.graph), VEHICLE_COLOR);
            }
            for p in &spec.agents.pedestrians {
                c.bbox("pedestrian", &p.bbox(), PEDESTRIAN_COLOR);
            }
            c.bbox("ego", &spec.ego.bbox(), EGO_COLOR);
        }
    }
    c.out.push_str("</svg>\n");
    c.out
}
