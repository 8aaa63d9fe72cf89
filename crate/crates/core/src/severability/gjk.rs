//! Distance and overlap queries between convex hulls.

use super::hull::{bbox_diagonal, cross, dot, norm, sub, ConvexHull, Point3};

const MAX_ITERATIONS: usize = 128;
const CONTACT_TOL: f64 = 1e-9;

fn support(vertices: &[Point3], dir: Point3) -> Point3 {
    let mut best = vertices[0];
    let mut best_d = dot(best, dir);
    for &v in &vertices[1..] {
        let d = dot(v, dir);
        if d > best_d {
            best = v;
            best_d = d;
        }
    }
    best
}

fn minkowski_support(a: &[Point3], b: &[Point3], dir: Point3) -> Point3 {
    sub(support(a, dir), support(b, dir.map(|x| -x)))
}

/// Euclidean distance between the convex hulls of two point sets by GJK,
/// with the closest point on each simplex found by enumerating its faces.
pub fn gjk_distance(a: &[Point3], b: &[Point3]) -> f64 {
    let mut v = sub(a[0], b[0]);
    let mut simplex: Vec<Point3> = Vec::with_capacity(4);
    let scale = bbox_diagonal(a).max(bbox_diagonal(b)).max(norm(v)).max(1.0);
    let mut last = f64::INFINITY;

    for _ in 0..MAX_ITERATIONS {
        let vv = dot(v, v);
        if vv <= (1e-15 * scale).powi(2) {
            return 0.0;
        }
        let w = minkowski_support(a, b, v.map(|x| -x));
        // no support point gets meaningfully closer to the origin than v
        if vv - dot(v, w) <= 1e-12 * vv {
            return vv.sqrt();
        }
        simplex.push(w);
        let (closest, support_set) = closest_on_simplex(&simplex);
        simplex = support_set;
        v = closest;
        if simplex.len() == 4 {
            return 0.0;
        }
        let dist = norm(v);
        if dist >= last {
            return dist.min(last);
        }
        last = dist;
    }
    norm(v)
}

/// Closest point to the origin on the convex hull of up to four points,
/// together with the smallest subset whose relative interior contains it.
fn closest_on_simplex(points: &[Point3]) -> (Point3, Vec<Point3>) {
    let k = points.len();
    let mut best: Option<(f64, Point3, Vec<Point3>)> = None;
    for mask in 1u32..(1 << k) {
        let subset: Vec<Point3> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| points[i]).collect();
        let Some((p, weights)) = affine_projection(&subset) else {
            continue;
        };
        if weights.iter().any(|&w| w <= 0.0) {
            continue;
        }
        let d = dot(p, p);
        let better = match &best {
            None => true,
            Some((bd, _, bs)) => d < *bd || (d == *bd && subset.len() < bs.len()),
        };
        if better {
            best = Some((d, p, subset));
        }
    }
    match best {
        Some((_, p, s)) => (p, s),
        // numerically degenerate simplex: keep the newest vertex alone
        None => (points[k - 1], vec![points[k - 1]]),
    }
}

// Projection of the origin onto the affine hull of `s`, as barycentric
// weights. `None` when the points are affinely dependent.
fn affine_projection(s: &[Point3]) -> Option<(Point3, Vec<f64>)> {
    let base = s[0];
    let dirs: Vec<Point3> = s[1..].iter().map(|&p| sub(p, base)).collect();
    let n = dirs.len();
    if n == 0 {
        return Some((base, vec![1.0]));
    }
    // Gram system (DᵀD) μ = −Dᵀ base
    let mut g = [[0.0f64; 4]; 3];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = dot(dirs[i], dirs[j]);
        }
        g[i][3] = -dot(dirs[i], base);
    }
    let trace: f64 = (0..n).map(|i| g[i][i]).sum();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| g[x][col].abs().total_cmp(&g[y][col].abs()))?;
        if g[pivot][col].abs() <= 1e-14 * trace {
            return None;
        }
        g.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = g[row][col] / g[col][col];
                for c in col..4 {
                    g[row][c] -= f * g[col][c];
                }
            }
        }
    }
    let mu: Vec<f64> = (0..n).map(|i| g[i][3] / g[i][i]).collect();
    let mut p = base;
    for (m, d) in mu.iter().zip(&dirs) {
        for c in 0..3 {
            p[c] += m * d[c];
        }
    }
    let mut weights = Vec::with_capacity(n + 1);
    weights.push(1.0 - mu.iter().sum::<f64>());
    weights.extend(mu);
    Some((p, weights))
}

/// Separating-axis test over face normals and edge-pair cross products,
/// exact for convex polytopes. True when some axis strictly separates.
pub fn separated_by_axis(h1: &ConvexHull, h2: &ConvexHull) -> bool {
    let mut axes: Vec<Point3> = Vec::new();
    for h in [h1, h2] {
        axes.extend((0..h.faces.len()).map(|f| h.face_plane(f).0));
    }
    let dir = |h: &ConvexHull, (a, b): (usize, usize)| sub(h.vertex(b), h.vertex(a));
    let e1: Vec<Point3> = h1.edges().into_iter().map(|e| dir(h1, e)).collect();
    let e2: Vec<Point3> = h2.edges().into_iter().map(|e| dir(h2, e)).collect();
    for &u in &e1 {
        for &w in &e2 {
            let c = cross(u, w);
            let len = norm(c);
            if len > 1e-12 * norm(u) * norm(w) {
                axes.push(c.map(|x| x / len));
            }
        }
    }
    let project = |vs: &[Point3], axis: Point3| {
        vs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            let d = dot(v, axis);
            (lo.min(d), hi.max(d))
        })
    };
    axes.iter().any(|&axis| {
        let (lo1, hi1) = project(&h1.vertices, axis);
        let (lo2, hi2) = project(&h2.vertices, axis);
        hi1 < lo2 || hi2 < lo1
    })
}

/// Whether two convex hulls share at least one point. GJK decides clear
/// separations; near-contact results are confirmed with separating axes.
pub fn hulls_intersect(h1: &ConvexHull, h2: &ConvexHull) -> bool {
    let dist = gjk_distance(&h1.vertices, &h2.vertices);
    let scale = bbox_diagonal(&h1.vertices).max(bbox_diagonal(&h2.vertices)).max(1.0);
    if dist > CONTACT_TOL * scale {
        return false;
    }
    !separated_by_axis(h1, h2)
}
