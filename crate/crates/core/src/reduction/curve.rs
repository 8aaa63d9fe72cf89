use crate::error::{Error, Result};

const SAMPLES: usize = 300;
const MAX_ITERATIONS: usize = 1000;
const CONVERGENCE: f64 = 1e-8;

/// Low-dimensional similarity curve `1 / (1 + a·x^(2b))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curve {
    pub a: f64,
    pub b: f64,
    /// Sum of squared residuals at the fitted parameters.
    pub residual: f64,
}

impl Curve {
    pub fn eval(&self, x: f64) -> f64 {
        1.0 / (1.0 + self.a * x.powf(2.0 * self.b))
    }
}

/// The offset-exponential the curve is fitted against.
pub fn target_curve(x: f64, min_dist: f64, spread: f64) -> f64 {
    if x <= min_dist {
        1.0
    } else {
        (-(x - min_dist) / spread).exp()
    }
}

fn sample_grid(spread: f64) -> Vec<f64> {
    let hi = 3.0 * spread;
    (0..SAMPLES)
        .map(|i| hi * i as f64 / (SAMPLES - 1) as f64)
        .collect()
}

fn loss(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = 1.0 / (1.0 + a * x.powf(2.0 * b)) - y;
            r * r
        })
        .sum()
}

/// Least-squares fit of `(a, b)` by Levenberg–Marquardt (damped
/// Gauss–Newton) over 300 evenly spaced points in `[0, 3·spread]`.
pub fn fit_ab(min_dist: f64, spread: f64) -> Result<Curve> {
    if !(min_dist >= 0.0) || !(spread > 0.0) {
        return Err(Error::Parameter(format!(
            "curve fit needs min_dist ≥ 0 and spread > 0 (got {min_dist}, {spread})"
        )));
    }
    let xs = sample_grid(spread);
    let ys: Vec<f64> = xs.iter().map(|&x| target_curve(x, min_dist, spread)).collect();

    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut current = loss(&xs, &ys, a, b);
    let mut damping = 1e-3;

    for _ in 0..MAX_ITERATIONS {
        // normal equations of the linearised residuals
        let (mut jtj, mut jtr) = ([[0.0f64; 2]; 2], [0.0f64; 2]);
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                // f(0) = 1 for every (a, b): zero gradient
                continue;
            }
            let u = x.powf(2.0 * b);
            let denom = 1.0 + a * u;
            let r = 1.0 / denom - y;
            let da = -u / (denom * denom);
            let db = -a * u * 2.0 * x.ln() / (denom * denom);
            jtj[0][0] += da * da;
            jtj[0][1] += da * db;
            jtj[1][1] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        jtj[1][0] = jtj[0][1];

        loop {
            let m00 = jtj[0][0] * (1.0 + damping);
            let m11 = jtj[1][1] * (1.0 + damping);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < f64::MIN_POSITIVE || damping > 1e16 {
                // no further progress possible: treat the current point as
                // the optimum if the gradient has vanished
                let grad = jtr[0].hypot(jtr[1]);
                if grad < 1e-10 {
                    return Ok(Curve {
                        a,
                        b,
                        residual: current,
                    });
                }
                return Err(Error::Calibration {
                    iterations: MAX_ITERATIONS,
                    residual: current,
                });
            }
            let step_a = -(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let step_b = -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det;
            let (na, nb) = (a + step_a, b + step_b);
            let candidate = if na > 0.0 && nb > 0.0 {
                loss(&xs, &ys, na, nb)
            } else {
                f64::INFINITY
            };
            if candidate <= current {
                let improvement = current - candidate;
                a = na;
                b = nb;
                let converged = improvement <= CONVERGENCE * current.max(f64::MIN_POSITIVE)
                    || (step_a.abs() < CONVERGENCE * a && step_b.abs() < CONVERGENCE * b);
                current = candidate;
                damping = (damping * 0.1).max(1e-12);
                if converged {
                    return Ok(Curve {
                        a,
                        b,
                        residual: current,
                    });
                }
                break;
            }
            damping *= 10.0;
        }
    }
    Err(Error::Calibration {
        iterations: MAX_ITERATIONS,
        residual: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_is_one_at_origin() {
        let c = fit_ab(0.0, 1.0).unwrap();
        assert_eq!(c.eval(0.0), 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fit_ab(-0.1, 1.0).is_err());
        assert!(fit_ab(0.1, 0.0).is_err());
    }

    #[test]
    fn default_parameters() {
        let c = fit_ab(0.1, 1.0).unwrap();
        assert!((c.a - 1.577).abs() < 0.02, "a = {}", c.a);
        assert!((c.b - 0.895).abs() < 0.01, "b = {}", c.b);
    }
}
