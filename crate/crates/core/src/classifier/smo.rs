//! Sequential minimal optimization for the C-SVM dual
//!
//! ```text
//! min  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)
//! ```
//!
//! Each step picks the maximal violating pair and solves the two-variable
//! subproblem analytically.

use super::kernel::KernelCache;
use super::SvmError;

const TAU: f64 = 1e-12;

/// Hard cap on SMO iterations.
pub const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct BinaryProblem<'a> {
    pub points: &'a [&'a [f64]],
    /// +1 or -1 per point.
    pub labels: &'a [f64],
    pub c: f64,
    pub gamma: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub cache_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function offset: `f(x) = sum a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final maximal-violating-pair gap.
    pub gap: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Bound {
    Lower,
    Upper,
    Free,
}

fn bound(a: f64, c: f64) -> Bound {
    if a >= c {
        Bound::Upper
    } else if a <= 0.0 {
        Bound::Lower
    } else {
        Bound::Free
    }
}

pub fn solve(p: &BinaryProblem<'_>) -> Result<SmoSolution, SvmError> {
    let n = p.points.len();
    let y = p.labels;
    let c = p.c;
    let mut cache = KernelCache::new(p.points, p.gamma, p.cache_rows);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let diag: Vec<f64> = (0..n).map(|i| super::kernel::rbf(p.points[i], p.points[i], p.gamma)).collect();

    let mut iterations = 0;
    let gap = loop {
        // Maximal violating pair.
        let (mut gmax, mut gmin) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let st = bound(alpha[t], c);
            let v = -y[t] * grad[t];
            let up = if y[t] > 0.0 { st != Bound::Upper } else { st != Bound::Lower };
            let low = if y[t] > 0.0 { st != Bound::Lower } else { st != Bound::Upper };
            if up && v >= gmax {
                gmax = v;
                i = t;
            }
            if low && v <= gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < p.tolerance {
            break gap.max(0.0);
        }
        if iterations >= p.max_iterations {
            return Err(SvmError::Unconverged {
                iterations,
                gap,
            });
        }
        iterations += 1;

        let ki = cache.row(i);
        let kj = cache.row(j);
        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let kij = ki[j];
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * (-kij)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let dai = alpha[i] - old_ai;
        let daj = alpha[j] - old_aj;
        for t in 0..n {
            // Q_ti = y_t y_i K_ti
            grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
        }
    };

    let rho = compute_rho(&alpha, &grad, y, c);
    Ok(SmoSolution {
        alpha,
        rho,
        iterations,
        gap,
    })
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        match bound(alpha[t], c) {
            Bound::Upper => {
                if y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            }
            Bound::Lower => {
                if y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            }
            Bound::Free => {
                n_free += 1;
                sum_free += yg;
            }
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

/// Largest KKT violation of a dual solution, measured on the margins
/// `y_t f(x_t)`: points at the lower bound need margin >= 1, points at C
/// need margin <= 1, free points need margin == 1.
pub fn kkt_max_violation(points: &[&[f64]], labels: &[f64], alpha: &[f64], bias: f64, c: f64, gamma: f64) -> f64 {
    let n = points.len();
    let mut worst: f64 = 0.0;
    for t in 0..n {
        let f: f64 = (0..n)
            .filter(|&s| alpha[s] != 0.0)
            .map(|s| alpha[s] * labels[s] * super::kernel::rbf(points[s], points[t], gamma))
            .sum::<f64>()
            + bias;
        let margin = labels[t] * f;
        let v = match bound(alpha[t], c) {
            Bound::Lower => (1.0 - margin).max(0.0),
            Bound::Upper => (margin - 1.0).max(0.0),
            Bound::Free => (margin - 1.0).abs(),
        };
        worst = worst.max(v);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem<'a>(pts: &'a [&'a [f64]], y: &'a [f64], c: f64, gamma: f64) -> BinaryProblem<'a> {
        BinaryProblem {
            points: pts,
            labels: y,
            c,
            gamma,
            tolerance: 1e-3,
            max_iterations: MAX_ITERATIONS,
            cache_rows: 16,
        }
    }

    #[test]
    fn two_points_boundary_at_midpoint() {
        let data = [[0.0], [2.0]];
        let pts: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let y = [1.0, -1.0];
        let s = solve(&problem(&pts, &y, 1.0, 1.0)).unwrap();
        let f = |x: f64| {
            s.alpha[0] * (-(x * x)).exp() - s.alpha[1] * (-((x - 2.0) * (x - 2.0))).exp() - s.rho
        };
        assert!(f(1.0).abs() < 1e-9);
        assert!(f(0.0) > 0.0 && f(2.0) < 0.0);
        assert_eq!(s.alpha[0], s.alpha[1]);
    }

    #[test]
    fn unconverged_is_an_error() {
        let data = [[0.0], [1.0], [0.5], [1.5]];
        let pts: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let y = [1.0, -1.0, -1.0, 1.0];
        let mut p = problem(&pts, &y, 10.0, 1.0);
        p.max_iterations = 1;
        p.tolerance = 1e-12;
        assert!(matches!(solve(&p), Err(SvmError::Unconverged { .. })));
    }

    #[test]
    fn cache_size_does_not_change_solution() {
        let data: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin() * 2.0, (i as f64 * 0.91).cos()])
            .collect();
        let pts: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let y: Vec<f64> = data.iter().map(|v| if v[0] + 0.3 * v[1] > 0.1 { 1.0 } else { -1.0 }).collect();
        let mut a = problem(&pts, &y, 1.0, 0.5);
        a.cache_rows = 0;
        let mut b = a.clone();
        b.cache_rows = 3;
        let mut c = a.clone();
        c.cache_rows = 100;
        let (sa, sb, sc) = (solve(&a).unwrap(), solve(&b).unwrap(), solve(&c).unwrap());
        assert_eq!(sa, sb);
        assert_eq!(sa, sc);
    }
}
