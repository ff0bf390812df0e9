//! Plan-view scene geometry and deterministic ray construction.
//!
//! Walls are zero-thickness segments for intersection purposes; their
//! material thickness only enters the in-material path length of a
//! crossing. Reflections are first order and found with the image method.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::propagation::Material;

/// Inclusive tolerance for "point lies on a wall segment", metres.
pub const ON_SEGMENT_TOL_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (other - self).norm()
    }

    /// Azimuth of this vector, degrees counter-clockwise from +x.
    pub fn azimuth_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wall {
    pub p0: Point2,
    pub p1: Point2,
    pub material: Material,
}

impl Wall {
    pub fn new(p0: Point2, p1: Point2, material: Material) -> Result<Self> {
        if !p0.is_finite() || !p1.is_finite() {
            return domain("wall endpoints must be finite");
        }
        if p0.distance(p1) <= ON_SEGMENT_TOL_M {
            return domain(format!("degenerate wall of material {}: p0 == p1", material.name));
        }
        Ok(Self { p0, p1, material })
    }

    pub fn length(&self) -> f64 {
        self.p0.distance(self.p1)
    }

    fn direction(&self) -> Point2 {
        let d = self.p1 - self.p0;
        d * (1.0 / d.norm())
    }

    /// Unit normal (left of p0→p1).
    pub fn normal(&self) -> Point2 {
        let d = self.direction();
        Point2::new(-d.y, d.x)
    }

    /// Signed distance of `p` from the wall's supporting line.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        (p - self.p0).dot(self.normal())
    }

    /// Mirror image of `p` across the wall's supporting line.
    pub fn mirror(&self, p: Point2) -> Point2 {
        p - self.normal() * (2.0 * self.signed_distance(p))
    }

    /// Intersection of the open segment `a→b` with this wall segment
    /// (endpoints inclusive). Returns the ray parameter in (0, 1) and the
    /// intersection point. Segments parallel to the wall never intersect.
    fn intersect(&self, a: Point2, b: Point2) -> Option<(f64, Point2)> {
        let r = b - a;
        let s = self.p1 - self.p0;
        let denom = r.cross(s);
        if denom.abs() < 1e-15 * r.norm() * s.norm() {
            return None;
        }
        let q = self.p0 - a;
        let t = q.cross(s) / denom;
        let u = q.cross(r) / denom;
        let r_len = r.norm();
        let s_len = s.norm();
        let t_tol = ON_SEGMENT_TOL_M / r_len;
        let u_tol = ON_SEGMENT_TOL_M / s_len;
        if t <= t_tol || t >= 1.0 - t_tol {
            return None;
        }
        if u < -u_tol || u > 1.0 + u_tol {
            return None;
        }
        Some((t, a + r * t))
    }

    /// Incidence angle (from the wall normal) of a ray travelling along `dir`.
    fn incidence_deg(&self, dir: Point2) -> f64 {
        let cos = (dir.dot(self.normal()) / dir.norm()).abs().min(1.0);
        cos.acos().to_degrees()
    }
}

/// A Tx or Rx placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub position: Point2,
    /// Antenna height; informational in the plan-view model.
    pub height_m: f64,
    /// Gimbal zero direction, degrees counter-clockwise from +x.
    pub heading_deg: f64,
}

impl Node {
    pub const DEFAULT_HEIGHT_M: f64 = 1.5;

    pub fn new(name: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            name: name.into(),
            position: Point2::new(x, y),
            height_m: Self::DEFAULT_HEIGHT_M,
            heading_deg: 0.0,
        }
    }

    pub fn with_heading(mut self, heading_deg: f64) -> Self {
        self.heading_deg = heading_deg;
        self
    }
}

/// Walls of a plan-view scene.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub name: String,
    pub walls: Vec<Wall>,
}

impl Scene {
    pub fn new(name: impl Into<String>, walls: Vec<Wall>) -> Self {
        Self {
            name: name.into(),
            walls,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Self::new(name, Vec::new())
    }

    /// All crossings of the open segment `a→b`, ordered along the segment.
    fn crossings(&self, a: Point2, b: Point2, skip: Option<usize>) -> Vec<(f64, Crossing)> {
        let dir = b - a;
        let mut hits: Vec<(f64, Crossing)> = self
            .walls
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .filter_map(|(i, wall)| {
                let (t, point) = wall.intersect(a, b)?;
                let theta = wall.incidence_deg(dir);
                let length_cm = wall.material.thickness_cm / theta.to_radians().cos();
                Some((
                    t,
                    Crossing {
                        wall: i,
                        point,
                        incident_angle_deg: theta,
                        length_cm,
                    },
                ))
            })
            .collect();
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        hits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathKind {
    Los,
    Reflected,
    Penetrating,
}

/// One wall traversal of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    /// Index into `Scene::walls`.
    pub wall: usize,
    pub point: Point2,
    pub incident_angle_deg: f64,
    /// Geometric path inside the slab, `thickness / cos(theta_i)`.
    pub length_cm: f64,
}

/// A resolved propagation path from Tx to Rx.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    pub kind: PathKind,
    pub vertices: Vec<Point2>,
    pub total_length_m: f64,
    /// Incidence on the reflecting wall, or on the first crossed wall of a
    /// penetrating path. Measured from the wall normal.
    pub incident_angle_deg: Option<f64>,
    /// Reflecting wall index for reflected paths.
    pub reflector: Option<usize>,
    pub crossings: Vec<Crossing>,
    /// Whether the direct segment is obstructed (direct paths only).
    pub blocked: bool,
}

impl RayPath {
    pub fn polyline_length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Azimuth of the departing ray at Tx, degrees.
    pub fn departure_azimuth_deg(&self) -> f64 {
        (self.vertices[1] - self.vertices[0]).azimuth_deg()
    }

    /// Azimuth at Rx of the direction the ray arrives from, degrees.
    pub fn arrival_azimuth_deg(&self) -> f64 {
        let n = self.vertices.len();
        (self.vertices[n - 2] - self.vertices[n - 1]).azimuth_deg()
    }
}

fn check_distinct(tx: &Node, rx: &Node) -> Result<()> {
    if tx.position.distance(rx.position) <= ON_SEGMENT_TOL_M {
        return domain(format!("nodes {} and {} coincide", tx.name, rx.name));
    }
    Ok(())
}

/// The direct Tx→Rx segment with every wall it crosses.
///
/// An obstructed direct path is reported as [`PathKind::Penetrating`] with
/// `blocked = true`.
pub fn trace_los(scene: &Scene, tx: &Node, rx: &Node) -> Result<RayPath> {
    check_distinct(tx, rx)?;
    let (a, b) = (tx.position, rx.position);
    let crossings: Vec<Crossing> = scene.crossings(a, b, None).into_iter().map(|(_, c)| c).collect();
    let blocked = !crossings.is_empty();
    Ok(RayPath {
        kind: if blocked { PathKind::Penetrating } else { PathKind::Los },
        vertices: vec![a, b],
        total_length_m: a.distance(b),
        incident_angle_deg: crossings.first().map(|c| c.incident_angle_deg),
        reflector: None,
        crossings,
        blocked,
    })
}

/// First-order specular reflections, one candidate per wall.
///
/// Candidates whose specular point falls off the wall segment, or whose
/// legs cross any other wall, are dropped.
pub fn trace_first_order_reflections(scene: &Scene, tx: &Node, rx: &Node) -> Result<Vec<RayPath>> {
    check_distinct(tx, rx)?;
    let (a, b) = (tx.position, rx.position);
    let mut paths = Vec::new();
    for (i, wall) in scene.walls.iter().enumerate() {
        let da = wall.signed_distance(a);
        let db = wall.signed_distance(b);
        // Both ends must sit strictly on the same side of the wall line.
        if da.abs() <= ON_SEGMENT_TOL_M || db.abs() <= ON_SEGMENT_TOL_M || da.signum() != db.signum() {
            continue;
        }
        let image = wall.mirror(a);
        let Some((_, specular)) = wall.intersect(image, b) else {
            continue;
        };
        if !scene.crossings(a, specular, Some(i)).is_empty() || !scene.crossings(specular, b, Some(i)).is_empty() {
            continue;
        }
        let vertices = vec![a, specular, b];
        let total_length_m = a.distance(specular) + specular.distance(b);
        paths.push(RayPath {
            kind: PathKind::Reflected,
            vertices,
            total_length_m,
            incident_angle_deg: Some(wall.incidence_deg(specular - a)),
            reflector: Some(i),
            crossings: Vec::new(),
            blocked: false,
        });
    }
    Ok(paths)
}

/// Direct path followed by all first-order reflections.
pub fn trace_paths(scene: &Scene, tx: &Node, rx: &Node) -> Result<Vec<RayPath>> {
    let mut paths = vec![trace_los(scene, tx, rx)?];
    paths.extend(trace_first_order_reflections(scene, tx, rx)?);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(thickness_cm: f64) -> Material {
        Material::new("m", 3.0, thickness_cm, 1.0).unwrap()
    }

    fn wall(x0: f64, y0: f64, x1: f64, y1: f64, t: f64) -> Wall {
        Wall::new(Point2::new(x0, y0), Point2::new(x1, y1), mat(t)).unwrap()
    }

    #[test]
    fn los_in_empty_scene() {
        let scene = Scene::empty("empty");
        let path = trace_los(&scene, &Node::new("tx", 0.0, 0.0), &Node::new("rx", 10.0, 0.0)).unwrap();
        assert_eq!(path.kind, PathKind::Los);
        assert!(!path.blocked);
        assert_eq!(path.total_length_m, 10.0);
        assert!(path.crossings.is_empty());
    }

    #[test]
    fn los_through_perpendicular_wall() {
        let scene = Scene::new("w", vec![wall(5.0, -3.0, 5.0, 3.0, 60.0)]);
        let path = trace_los(&scene, &Node::new("tx", 0.0, 0.0), &Node::new("rx", 10.0, 0.0)).unwrap();
        assert!(path.blocked);
        assert_eq!(path.kind, PathKind::Penetrating);
        assert_eq!(path.crossings.len(), 1);
        let c = path.crossings[0];
        assert!(c.incident_angle_deg.abs() < 1e-12);
        assert!((c.length_cm - 60.0).abs() < 1e-12);
    }

    #[test]
    fn los_through_oblique_wall() {
        // Wall along y = x - 5, at 45 degrees to the x-axis path.
        let scene = Scene::new("w", vec![wall(3.0, -2.0, 7.0, 2.0, 10.0)]);
        let path = trace_los(&scene, &Node::new("tx", 0.0, 0.0), &Node::new("rx", 10.0, 0.0)).unwrap();
        let c = path.crossings[0];
        assert!((c.incident_angle_deg - 45.0).abs() < 1e-9);
        assert!((c.length_cm - 14.142_135_623_7).abs() < 1e-9);
    }

    #[test]
    fn los_misses_short_wall_and_rejects_coincident_nodes() {
        let scene = Scene::new("w", vec![wall(5.0, 1.0, 5.0, 3.0, 10.0)]);
        let tx = Node::new("tx", 0.0, 0.0);
        let path = trace_los(&scene, &tx, &Node::new("rx", 10.0, 0.0)).unwrap();
        assert!(!path.blocked);
        assert!(trace_los(&scene, &tx, &Node::new("rx", 0.0, 0.0)).is_err());
    }

    #[test]
    fn node_on_a_wall_does_not_block() {
        let scene = Scene::new("w", vec![wall(10.0, -1.0, 10.0, 1.0, 10.0)]);
        let path = trace_los(&scene, &Node::new("tx", 0.0, 0.0), &Node::new("rx", 10.0, 0.0)).unwrap();
        assert!(!path.blocked);
    }

    #[test]
    fn specular_reflection_on_floor_wall() {
        let scene = Scene::new("w", vec![wall(-5.0, 0.0, 5.0, 0.0, 10.0)]);
        let paths =
            trace_first_order_reflections(&scene, &Node::new("tx", 0.0, 1.0), &Node::new("rx", 2.0, 1.0)).unwrap();
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.vertices.len(), 3);
        assert!(p.vertices[1].distance(Point2::new(1.0, 0.0)) < 1e-12);
        assert!((p.total_length_m - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((p.incident_angle_deg.unwrap() - 45.0).abs() < 1e-9);
    }

    #[test]
    fn short_wall_misses_specular_point() {
        let scene = Scene::new("w", vec![wall(3.0, 0.0, 5.0, 0.0, 10.0)]);
        let paths =
            trace_first_order_reflections(&scene, &Node::new("tx", 0.0, 1.0), &Node::new("rx", 2.0, 1.0)).unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn specular_point_on_wall_endpoint_is_kept() {
        let scene = Scene::new("w", vec![wall(1.0, 0.0, 4.0, 0.0, 10.0)]);
        let paths =
            trace_first_order_reflections(&scene, &Node::new("tx", 0.0, 1.0), &Node::new("rx", 2.0, 1.0)).unwrap();
        assert_eq!(paths.len(), 1);
    }

    #[test]
    fn reflection_requires_same_side_and_clear_legs() {
        let floor = wall(-5.0, 0.0, 5.0, 0.0, 10.0);
        let scene = Scene::new("w", vec![floor.clone()]);
        let opposite =
            trace_first_order_reflections(&scene, &Node::new("tx", 0.0, 1.0), &Node::new("rx", 2.0, -1.0)).unwrap();
        assert!(opposite.is_empty());

        // A screen over the Tx leg removes the bounce.
        let screen = wall(0.25, 0.2, 0.75, 0.8, 10.0);
        let scene = Scene::new("w", vec![floor, screen]);
        let paths =
            trace_first_order_reflections(&scene, &Node::new("tx", 0.0, 1.0), &Node::new("rx", 2.0, 1.0)).unwrap();
        assert!(paths.iter().all(|p| p.reflector != Some(0)));
    }

    #[test]
    fn arrival_and_departure_azimuths() {
        let scene = Scene::new("w", vec![wall(-5.0, 0.0, 5.0, 0.0, 10.0)]);
        let paths = trace_paths(&scene, &Node::new("tx", 0.0, 1.0), &Node::new("rx", 2.0, 1.0)).unwrap();
        assert_eq!(paths[0].departure_azimuth_deg(), 0.0);
        assert_eq!(paths[0].arrival_azimuth_deg(), 180.0);
        assert!((paths[1].departure_azimuth_deg() + 45.0).abs() < 1e-9);
        assert!((paths[1].arrival_azimuth_deg() + 135.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_wall_rejected() {
        assert!(Wall::new(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0), mat(1.0)).is_err());
    }
}
