//! Deterministic SVG drawings of scenes, traversability graphs and action
//! timelines. Output depends only on the inputs, so files can be diffed.

use std::fmt::Write as _;

use crate::geometry::Point;
use crate::scene::{RobotId, Scene};
use crate::sequencing::{ActionKind, TimelineExport};
use crate::traversability::{Node, RelocationPlan, TGraph};

const MARGIN: f64 = 300.0;
const ROBOT_COLORS: [&str; 2] = ["#c0392b", "#2471a3"];

struct Frame {
    x0: f64,
    y_top: f64,
}

impl Frame {
    fn x(&self, p: Point) -> f64 {
        p.x - self.x0
    }

    fn y(&self, p: Point) -> f64 {
        self.y_top - p.y
    }
}

fn robot_color(scene: &Scene, robot: RobotId) -> &'static str {
    ROBOT_COLORS[scene.robot_slot(robot).unwrap_or(0) % 2]
}

fn node_point(scene: &Scene, node: Node) -> Point {
    match node {
        Node::Robot(r) => scene.robot(r).expect("robot in scene").mount,
        Node::Object(o) => scene.object(o).expect("object in scene").footprint.center,
    }
}

/// Scene drawing, optionally overlaid with one robot's T-graph and the
/// plan path, whose nodes are numbered in relocation order.
pub fn render_scene(
    scene: &Scene,
    graph: Option<&TGraph>,
    plan: Option<&RelocationPlan>,
) -> String {
    let ws = scene.workspace;
    let frame = Frame {
        x0: -MARGIN,
        y_top: ws.height + 60.0,
    };
    let width = ws.width + 2.0 * MARGIN;
    let height = frame.y_top + MARGIN;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="18">"#
    )
    .unwrap();
    writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    // three walls; the front edge (y = 0) stays open
    let corners = [
        Point::new(0.0, 0.0),
        Point::new(0.0, ws.height),
        Point::new(ws.width, ws.height),
        Point::new(ws.width, 0.0),
    ];
    let path: Vec<String> = corners
        .iter()
        .map(|&p| format!("{:.1},{:.1}", frame.x(p), frame.y(p)))
        .collect();
    writeln!(
        s,
        r##"<polyline points="{}" fill="#f4f1ea" stroke="#333333" stroke-width="4"/>"##,
        path.join(" ")
    )
    .unwrap();

    for robot in scene.robots() {
        let color = robot_color(scene, robot.id);
        let (mx, my) = (frame.x(robot.mount), frame.y(robot.mount));
        writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="40" height="40" fill="{color}"/>"#,
            mx - 20.0,
            my
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            mx,
            my + 62.0,
            robot.id
        )
        .unwrap();
        let (dx, dy) = (frame.x(robot.dropoff), frame.y(robot.dropoff));
        writeln!(
            s,
            r#"<path d="M{:.1},{:.1} l20,20 m0,-20 l-20,20" stroke="{color}" stroke-width="3"/>"#,
            dx - 10.0,
            dy - 10.0
        )
        .unwrap();
    }

    if let Some(graph) = graph {
        let color = robot_color(scene, graph.robot());
        writeln!(
            s,
            r#"<g stroke="{color}" stroke-opacity="0.35" stroke-width="2">"#
        )
        .unwrap();
        for (a, b) in graph.edges() {
            let (pa, pb) = (node_point(scene, a), node_point(scene, b));
            writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/>"#,
                frame.x(pa),
                frame.y(pa),
                frame.x(pb),
                frame.y(pb)
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }

    for obj in scene.objects() {
        let c = obj.footprint.center;
        let fill = if obj.is_target { "#f1c40f" } else { "#bdc3c7" };
        writeln!(
            s,
            r##"<circle cx="{:.1}" cy="{:.1}" r="{:.1}" fill="{fill}" stroke="#333333" stroke-width="2"/>"##,
            frame.x(c),
            frame.y(c),
            obj.footprint.radius
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" dominant-baseline="central">{}</text>"#,
            frame.x(c),
            frame.y(c),
            obj.id
        )
        .unwrap();
    }

    if let Some(plan) = plan {
        let color = robot_color(scene, plan.robot());
        let mut points = vec![node_point(scene, Node::Robot(plan.robot()))];
        points.extend(
            plan.sequence()
                .iter()
                .map(|&o| node_point(scene, Node::Object(o))),
        );
        let coords: Vec<String> = points
            .iter()
            .map(|&p| format!("{:.1},{:.1}", frame.x(p), frame.y(p)))
            .collect();
        writeln!(
            s,
            r#"<polyline class="plan" points="{}" fill="none" stroke="{color}" stroke-width="6"/>"#,
            coords.join(" ")
        )
        .unwrap();
        for (i, p) in points.iter().skip(1).enumerate() {
            writeln!(
                s,
                r#"<text class="order" x="{:.1}" y="{:.1}" fill="{color}" font-weight="bold">{}</text>"#,
                frame.x(*p) + 26.0,
                frame.y(*p) - 26.0,
                i + 1
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Gantt chart with one lane per robot.
pub fn render_gantt(timeline: &TimelineExport) -> String {
    const PX_PER_S: f64 = 12.0;
    const LANE: f64 = 50.0;
    const LEFT: f64 = 60.0;
    let mut robots: Vec<RobotId> = timeline
        .slots
        .iter()
        .flat_map(|s| s.actions.iter().map(|a| a.robot))
        .collect();
    robots.sort();
    robots.dedup();
    let width = LEFT + timeline.makespan * PX_PER_S + 40.0;
    let height = LANE * robots.len() as f64 + 60.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    for (lane, robot) in robots.iter().enumerate() {
        writeln!(
            s,
            r#"<text x="10" y="{:.1}" dominant-baseline="central">{robot}</text>"#,
            20.0 + LANE * lane as f64 + LANE / 2.0
        )
        .unwrap();
    }
    for (i, slot) in timeline.slots.iter().enumerate() {
        for a in &slot.actions {
            let lane = robots.binary_search(&a.robot).expect("robot listed");
            let fill = match a.kind {
                ActionKind::Pick => "#27ae60",
                ActionKind::Place => "#8e44ad",
                ActionKind::Standby => "#95a5a6",
            };
            let x = LEFT + slot.start * PX_PER_S;
            let y = 20.0 + LANE * lane as f64 + 5.0;
            let w = a.duration * PX_PER_S;
            let paired = if slot.actions.len() == 2 {
                " paired"
            } else {
                ""
            };
            writeln!(
                s,
                r##"<rect class="{:?}{paired}" data-slot="{i}" x="{x:.2}" y="{y:.1}" width="{w:.2}" height="{:.1}" fill="{fill}" stroke="#222222"/>"##,
                a.kind,
                LANE - 10.0
            )
            .unwrap();
            if let Some(o) = a.object {
                writeln!(
                    s,
                    r##"<text x="{:.2}" y="{:.1}" fill="#ffffff" dominant-baseline="central">{o}</text>"##,
                    x + 3.0,
                    y + (LANE - 10.0) / 2.0
                )
                .unwrap();
            }
        }
    }
    let axis_y = 20.0 + LANE * robots.len() as f64 + 10.0;
    writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{axis_y:.1}" x2="{:.2}" y2="{axis_y:.1}" stroke="#222222"/>"##,
        LEFT + timeline.makespan * PX_PER_S
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.1}" text-anchor="end">makespan {:.2} s</text>"#,
        LEFT + timeline.makespan * PX_PER_S,
        axis_y + 20.0,
        timeline.makespan
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_scene, SceneParams};
    use crate::sequencing::sequence_tasks;
    use crate::traversability::{build_tgraph, orp_plan, SceneState};

    #[test]
    fn scene_svg_is_stable_and_labels_plan() {
        let scene = generate_scene(7, &SceneParams::with_objects(10)).unwrap();
        let state = SceneState::new(&scene);
        let robot = scene.robot_ids()[0];
        let graph = build_tgraph(&state, robot);
        let plan = orp_plan(&graph, scene.target());
        let a = render_scene(&scene, Some(&graph), plan.as_ref());
        let b = render_scene(&scene, Some(&graph), plan.as_ref());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), scene.len());
        if let Some(plan) = plan {
            assert_eq!(a.matches(r#"class="order""#).count(), plan.k());
        }
    }

    #[test]
    fn gantt_has_one_bar_per_action() {
        let scene = generate_scene(3, &SceneParams::with_objects(6)).unwrap();
        let ids: Vec<_> = scene.objects().iter().map(|o| o.id).take(2).collect();
        let [r1, r2] = scene.robot_ids();
        let tl = sequence_tasks(&scene, &[(ids[0], r1), (ids[1], r2)]);
        let svg = render_gantt(&tl.export());
        assert_eq!(svg.matches("data-slot").count(), tl.actions().count());
        assert_eq!(svg.matches(" paired\"").count(), 2 * tl.paired_slots());
    }
}
