//! Quickhull in three dimensions.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

pub(crate) fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

/// A closed triangulated convex polytope.
///
/// `vertex_ids` and `faces` index into the point set the hull was built
/// from; `vertices` holds the coordinates of `vertex_ids` in the same order.
/// Faces wind counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull {
    pub vertex_ids: Vec<usize>,
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
    pub volume: f64,
}

impl ConvexHull {
    pub fn vertex(&self, id: usize) -> Point3 {
        let pos = self
            .vertex_ids
            .binary_search(&id)
            .expect("face refers to a hull vertex");
        self.vertices[pos]
    }

    /// Unit outward normal and plane offset of a face.
    pub fn face_plane(&self, face: usize) -> (Point3, f64) {
        let [a, b, c] = self.faces[face].map(|v| self.vertex(v));
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        let n = if len > 0.0 { n.map(|x| x / len) } else { n };
        (n, dot(n, a))
    }

    /// Undirected edges as sorted vertex-id pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// `V − E + F`; two for any closed genus-0 surface.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_ids.len() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// Largest signed distance of any point above any face plane.
    pub fn max_outside_distance(&self, points: &[Point3]) -> f64 {
        let planes: Vec<(Point3, f64)> = (0..self.faces.len()).map(|f| self.face_plane(f)).collect();
        points
            .iter()
            .flat_map(|&p| planes.iter().map(move |&(n, off)| dot(n, p) - off))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every directed edge appears exactly once, so adjacent faces wind
    /// consistently, and the signed volume is positive.
    pub fn consistently_oriented(&self) -> bool {
        let mut directed = std::collections::HashSet::new();
        for f in &self.faces {
            for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                if !directed.insert((a, b)) {
                    return false;
                }
            }
        }
        let closed = directed.iter().all(|&(a, b)| directed.contains(&(b, a)));
        closed && self.volume > 0.0
    }
}

pub(crate) fn bbox_diagonal(points: &[Point3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    norm(sub(hi, lo))
}

struct Face {
    v: [usize; 3],
    normal: Point3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3]) -> Self {
        let [a, b, c] = v.map(|i| points[i]);
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        let normal = if len > 0.0 { n.map(|x| x / len) } else { n };
        Face {
            v,
            normal,
            offset: dot(normal, a),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: Point3) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Convex hull of at least four non-coplanar points.
pub fn convex_hull_3d(points: &[Point3]) -> Result<ConvexHull> {
    if points.len() < 4 {
        return Err(Error::Degenerate(format!(
            "{} points cannot enclose a volume",
            points.len()
        )));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("non-finite coordinate".into()));
    }
    let diag = bbox_diagonal(points);
    let tol = 1e-11 * diag.max(f64::MIN_POSITIVE);
    let simplex = initial_simplex(points, diag)?;

    let mut faces: Vec<Face> = Vec::new();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    let interior = {
        let mut c = [0.0; 3];
        for &i in &simplex {
            for d in 0..3 {
                c[d] += points[i][d] / 4.0;
            }
        }
        c
    };
    let [p0, p1, p2, p3] = simplex;
    for tri in [[p0, p1, p2], [p0, p3, p1], [p1, p3, p2], [p2, p3, p0]] {
        let mut face = Face::new(points, tri);
        if face.distance(interior) > 0.0 {
            face = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        add_face(&mut faces, &mut edge_owner, face);
    }

    let assigned: Vec<usize> = (0..points.len()).filter(|i| !simplex.contains(i)).collect();
    let live: Vec<usize> = (0..faces.len()).collect();
    assign_outside(points, &mut faces, &live, assigned, tol);

    let mut cursor = 0;
    loop {
        // next face with pending outside points, scanning in creation order
        while cursor < faces.len() && (!faces[cursor].alive || faces[cursor].outside.is_empty()) {
            cursor += 1;
        }
        if cursor == faces.len() {
            break;
        }
        let start = cursor;
        let eye = farthest(points, &faces[start]);
        let eye_point = points[eye];

        // visible region by flood fill from the start face
        let mut visible = vec![start];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(start, true)]);
        let mut queue = VecDeque::from([start]);
        while let Some(f) = queue.pop_front() {
            let v = faces[f].v;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                let nb = edge_owner[&(b, a)];
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].distance(eye_point) > tol;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                    queue.push_back(nb);
                }
            }
        }

        // horizon: edges of visible faces whose twin face is not visible
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                if !is_visible[&edge_owner[&(b, a)]] {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            let v = faces[f].v;
            for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                edge_owner.remove(&e);
            }
            orphans.append(&mut faces[f].outside);
        }
        orphans.retain(|&p| p != eye);

        let mut created = Vec::with_capacity(horizon.len());
        for (a, b) in horizon {
            let face = Face::new(points, [a, b, eye]);
            created.push(add_face(&mut faces, &mut edge_owner, face));
        }
        // faces before `start` have empty outside sets and never gain points
        assign_outside(points, &mut faces, &created, orphans, tol);
    }

    finish(points, &faces)
}

fn add_face(faces: &mut Vec<Face>, edge_owner: &mut HashMap<(usize, usize), usize>, face: Face) -> usize {
    let id = faces.len();
    let v = face.v;
    for e in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
        edge_owner.insert(e, id);
    }
    faces.push(face);
    id
}

fn assign_outside(points: &[Point3], faces: &mut [Face], candidates: &[usize], pts: Vec<usize>, tol: f64) {
    for p in pts {
        let mut best: Option<(f64, usize)> = None;
        for &f in candidates {
            let d = faces[f].distance(points[p]);
            if d > tol && best.map_or(true, |(bd, _)| d > bd) {
                best = Some((d, f));
            }
        }
        if let Some((_, f)) = best {
            faces[f].outside.push(p);
        }
    }
}

fn farthest(points: &[Point3], face: &Face) -> usize {
    let mut best = face.outside[0];
    let mut best_d = face.distance(points[best]);
    for &p in &face.outside[1..] {
        let d = face.distance(points[p]);
        if d > best_d || (d == best_d && p < best) {
            best = p;
            best_d = d;
        }
    }
    best
}

// Extreme points along each axis seed the search: the farthest pair among
// them, then the point farthest from their line, then the point farthest
// from that plane. Ties go to the lowest index.
fn initial_simplex(points: &[Point3], diag: f64) -> Result<[usize; 4]> {
    let mut extremes = Vec::with_capacity(6);
    for d in 0..3 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[d] < points[lo][d] {
                lo = i;
            }
            if p[d] > points[hi][d] {
                hi = i;
            }
        }
        extremes.push(lo);
        extremes.push(hi);
    }
    let (mut a, mut b, mut best) = (0, 0, -1.0);
    for (x, &i) in extremes.iter().enumerate() {
        for &j in &extremes[x + 1..] {
            let d = norm(sub(points[i], points[j]));
            if d > best {
                (a, b, best) = (i.min(j), i.max(j), d);
            }
        }
    }
    if best <= 0.0 {
        return Err(Error::Degenerate("all points coincide".into()));
    }

    let axis = sub(points[b], points[a]);
    let mut c = usize::MAX;
    let mut best = -1.0;
    for (i, &p) in points.iter().enumerate() {
        let d = norm(cross(axis, sub(p, points[a])));
        if d > best {
            (c, best) = (i, d);
        }
    }
    let normal = cross(axis, sub(points[c], points[a]));
    let mut d4 = usize::MAX;
    let mut best = -1.0;
    for (i, &p) in points.iter().enumerate() {
        let v = dot(normal, sub(p, points[a])).abs();
        if v > best {
            (d4, best) = (i, v);
        }
    }
    let volume = best / 6.0;
    if !(volume > 1e-12 * diag.powi(3)) {
        return Err(Error::Degenerate(format!(
            "points are coplanar (max tetrahedron volume {volume:e})"
        )));
    }
    Ok([a, b, c, d4])
}

fn finish(points: &[Point3], faces: &[Face]) -> Result<ConvexHull> {
    let tris: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    let mut vertex_ids: Vec<usize> = tris.iter().flatten().copied().collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    let vertices: Vec<Point3> = vertex_ids.iter().map(|&i| points[i]).collect();

    let mut centre = [0.0; 3];
    for v in &vertices {
        for d in 0..3 {
            centre[d] += v[d];
        }
    }
    centre = centre.map(|x| x / vertices.len() as f64);
    let volume = tris
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| sub(points[i], centre));
            dot(a, cross(b, c)) / 6.0
        })
        .sum();
    Ok(ConvexHull {
        vertex_ids,
        vertices,
        faces: tris,
        volume,
    })
}
