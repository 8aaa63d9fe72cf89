//! Independent reference computations shared by the integration suites.
//! None of these call into the library's own numerics.

#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};
use severance_core::severability::{ConvexHull, Point3};

pub fn bbox_diagonal(points: &[Point3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt()
}

pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A mix of shapes that stress a hull builder: uniform boxes, spherical
/// shells with many points on the hull, Gaussian clouds, and lattice points
/// with duplicates and coplanar runs.
pub fn point_set(rng: &mut ChaCha8Rng, case: usize) -> Vec<Point3> {
    let n = rng.gen_range(4..200);
    let scale = 10f64.powi(rng.gen_range(-3..4));
    let offset: Point3 = [rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)];
    (0..n)
        .map(|_| {
            let p: Point3 = match case % 4 {
                0 => [rng.gen(), rng.gen(), rng.gen()],
                1 => UnitSphere.sample(rng),
                2 => [
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                ],
                _ => [
                    rng.gen_range(0..4) as f64,
                    rng.gen_range(0..4) as f64,
                    rng.gen_range(0..4) as f64,
                ],
            };
            [0, 1, 2].map(|d| offset[d] + scale * p[d])
        })
        .collect()
}

/// Describes the first way `hull` fails to be the convex hull of `points`,
/// or `None` when it passes every check.
pub fn hull_violation(points: &[Point3], hull: &ConvexHull) -> Option<String> {
    let diag = bbox_diagonal(points);
    if hull.euler_characteristic() != 2 {
        return Some(format!("Euler characteristic {}", hull.euler_characteristic()));
    }
    if !hull.consistently_oriented() {
        return Some("faces not consistently outward".into());
    }
    let outside = hull.max_outside_distance(points);
    if outside > 1e-9 * diag {
        return Some(format!("a point lies {outside} outside"));
    }
    for (&id, v) in hull.vertex_ids.iter().zip(&hull.vertices) {
        if points[id] != *v {
            return Some(format!("vertex {id} does not match its input point"));
        }
    }
    // the support function of the hull equals that of the point set
    let mut rng = ChaCha8Rng::seed_from_u64(points.len() as u64);
    for _ in 0..20 {
        let u: Point3 = UnitSphere.sample(&mut rng);
        let all = points.iter().map(|&p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max);
        let on_hull = hull.vertices.iter().map(|&p| dot(p, u)).fold(f64::NEG_INFINITY, f64::max);
        if (all - on_hull).abs() > 1e-12 * (1.0 + all.abs()) {
            return Some(format!("support {on_hull} vs {all}"));
        }
    }
    None
}

pub fn unit_cube_with_centre() -> Vec<Point3> {
    let mut pts: Vec<Point3> = (0..8)
        .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
        .collect();
    pts.push([0.5; 3]);
    pts
}

/// Do the hulls share a point? Feasibility of Σλ_i p_i = Σμ_j q_j with
/// λ, μ on the simplex.
pub fn lp_intersect(p: &[Point3], q: &[Point3]) -> bool {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let lambda: Vec<_> = p.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let mu: Vec<_> = q.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    lp.add_constraint(lambda.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    lp.add_constraint(mu.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
    for d in 0..3 {
        let mut terms: Vec<_> = lambda.iter().zip(p).map(|(&v, pt)| (v, pt[d])).collect();
        terms.extend(mu.iter().zip(q).map(|(&v, pt)| (v, -pt[d])));
        lp.add_constraint(terms, ComparisonOp::Eq, 0.0);
    }
    lp.solve().is_ok()
}

/// Largest margin of a plane separating the two sets, with the normal
/// confined to the unit box; zero when the hulls meet.
pub fn lp_margin(p: &[Point3], q: &[Point3]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<_> = (0..3).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1e6));
    for pt in p {
        let mut terms: Vec<_> = (0..3).map(|d| (w[d], pt[d])).collect();
        terms.extend([(b, -1.0), (t, -1.0)]);
        lp.add_constraint(terms, ComparisonOp::Ge, 0.0);
    }
    for pt in q {
        let mut terms: Vec<_> = (0..3).map(|d| (w[d], -pt[d])).collect();
        terms.extend([(b, 1.0), (t, -1.0)]);
        lp.add_constraint(terms, ComparisonOp::Ge, 0.0);
    }
    lp.solve().unwrap().objective()
}

pub fn cloud(rng: &mut ChaCha8Rng, centre: Point3, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            let p: Point3 = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            [0, 1, 2].map(|d| centre[d] + p[d])
        })
        .collect()
}

/// A pair of Gaussian clouds at a random offset, drawn until the pair is
/// clearly either overlapping or separated.
pub struct HullPair {
    pub a: Vec<Point3>,
    pub b: Vec<Point3>,
    pub distance: f64,
    pub margin: f64,
}

pub fn hull_pair(rng: &mut ChaCha8Rng) -> HullPair {
    loop {
        let distance = rng.gen_range(0.0..7.0);
        let dir: Point3 = UnitSphere.sample(rng);
        let (na, nb) = (rng.gen_range(4..40), rng.gen_range(4..40));
        let a = cloud(rng, [0.0; 3], na);
        let b = cloud(rng, dir.map(|x| x * distance), nb);
        // skip pairs too close to touching for either method to call
        let margin = lp_margin(&a, &b);
        if margin > 0.0 && margin < 1e-6 {
            continue;
        }
        return HullPair { a, b, distance, margin };
    }
}

/// ∫ (1 + x²/ν)^(−(ν+1)/2) dx over [a, ∞) after x = tan θ, by adaptive
/// Simpson. Only the ratio of two such integrals is used, so no gamma
/// function is needed.
fn tail_integral(a: f64, nu: f64) -> f64 {
    let f = |theta: f64| {
        let c = theta.cos();
        if c <= 0.0 {
            return if nu > 1.0 { 0.0 } else { nu.sqrt() };
        }
        let x = theta.tan();
        (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0) / (c * c)
    };
    adaptive_simpson(&f, a.atan(), std::f64::consts::FRAC_PI_2, 1e-14, 50)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, [a, b], [fa, fm, fb], whole, tol, depth)
}

fn simpson_step(f: &dyn Fn(f64) -> f64, [a, b]: [f64; 2], [fa, fm, fb]: [f64; 3], whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, [a, m], [fa, flm, fm], left, tol / 2.0, depth - 1)
        + simpson_step(f, [m, b], [fm, frm, fb], right, tol / 2.0, depth - 1)
}

pub fn two_tailed_p(t: f64, nu: f64) -> f64 {
    (tail_integral(t.abs(), nu) / tail_integral(0.0, nu)).min(1.0)
}

/// Welch's statistic and Welch–Satterthwaite degrees of freedom.
pub fn welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var / n, n)
    };
    let (ma, va, na) = stats(a);
    let (mb, vb, nb) = stats(b);
    let t = (ma - mb) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    (t, df)
}

/// A random pair of trial sets with differing sizes, spreads and means.
pub fn trial_pair(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let (na, nb) = (rng.gen_range(2..31), rng.gen_range(2..31));
    let shift = rng.gen_range(-2.0..2.0);
    let (sa, sb) = (rng.gen_range(0.05..3.0), rng.gen_range(0.05..3.0));
    let a = (0..na).map(|_| rng.gen_range(-1.0..1.0) * sa).collect();
    let b = (0..nb).map(|_| shift + rng.gen_range(-1.0..1.0) * sb).collect();
    (a, b)
}

/// Mean softmax cross-entropy written out from its definition.
pub fn cross_entropy(weights: &[f64], bias: &[f64], dim: usize, rows: &[&[f64]], labels: &[usize]) -> f64 {
    let classes = bias.len();
    let mut total = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let z: Vec<f64> = (0..classes)
            .map(|c| bias[c] + (0..dim).map(|d| weights[c * dim + d] * x[d]).sum::<f64>())
            .collect();
        let log_norm = z.iter().map(|v| v.exp()).sum::<f64>().ln();
        total += log_norm - z[y];
    }
    total / rows.len() as f64
}

/// Largest relative gap between an analytic gradient and central finite
/// differences of `cross_entropy`, over every weight and bias.
pub fn gradient_gap(
    weights: &[f64],
    bias: &[f64],
    dim: usize,
    rows: &[&[f64]],
    labels: &[usize],
    grad_w: &[f64],
    grad_b: &[f64],
) -> f64 {
    let h = 1e-6;
    let rel = |analytic: f64, numeric: f64| (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
    let mut worst: f64 = 0.0;
    for i in 0..weights.len() {
        let (mut up, mut down) = (weights.to_vec(), weights.to_vec());
        up[i] += h;
        down[i] -= h;
        let numeric =
            (cross_entropy(&up, bias, dim, rows, labels) - cross_entropy(&down, bias, dim, rows, labels)) / (2.0 * h);
        worst = worst.max(rel(grad_w[i], numeric));
    }
    for c in 0..bias.len() {
        let (mut up, mut down) = (bias.to_vec(), bias.to_vec());
        up[c] += h;
        down[c] -= h;
        let numeric = (cross_entropy(weights, &up, dim, rows, labels)
            - cross_entropy(weights, &down, dim, rows, labels))
            / (2.0 * h);
        worst = worst.max(rel(grad_b[c], numeric));
    }
    worst
}

/// The toy problem for the gradient check: three samples, three classes,
/// four features.
pub struct GradientToy {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub data: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub dim: usize,
}

pub fn gradient_toy(seed: u64) -> GradientToy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (classes, dim) = (3, 4);
    GradientToy {
        weights: (0..classes * dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        bias: (0..classes).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        data: (0..3).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect(),
        labels: vec![0, 2, 1],
        dim,
    }
}

/// Nearest class centroid agrees with the label for this fraction of
/// points.
pub fn nearest_centroid_agreement(coords: &[f64], m: usize, labels: &[usize], classes: usize) -> f64 {
    let mut centroids = vec![0.0; classes * m];
    let mut counts = vec![0usize; classes];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for d in 0..m {
            centroids[l * m + d] += coords[i * m + d];
        }
    }
    for c in 0..classes {
        for d in 0..m {
            centroids[c * m + d] /= counts[c] as f64;
        }
    }
    let hits = labels
        .iter()
        .enumerate()
        .filter(|&(i, &l)| {
            let p = &coords[i * m..(i + 1) * m];
            let dist = |c: usize| (0..m).map(|d| (p[d] - centroids[c * m + d]).powi(2)).sum::<f64>();
            let nearest = (0..classes).min_by(|&a, &b| dist(a).total_cmp(&dist(b))).unwrap();
            nearest == l
        })
        .count();
    hits as f64 / labels.len() as f64
}
