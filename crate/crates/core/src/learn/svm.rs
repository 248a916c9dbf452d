use crate::error::{Error, Result};

/// Stopping tolerance on the maximal KKT violation.
pub const KKT_TOLERANCE: f64 = 1e-3;

const TAU: f64 = 1e-12;

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Dual solution of a binary soft-margin problem.
#[derive(Clone, Debug)]
pub(crate) struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision offset: `f(x) = Σ αᵢ yᵢ K(xᵢ, x) + bias`.
    pub bias: f64,
}

/// Sequential minimal optimization with second-order working-set selection.
///
/// `kernel(i, j)` returns `K(xᵢ, xⱼ)`; `y` holds ±1.
pub(crate) fn solve_dual(n: usize, kernel: impl Fn(usize, usize) -> f64, y: &[f64], cost: f64) -> Result<DualSolution> {
    if !(cost.is_finite() && cost > 0.0) {
        return Err(Error::Argument(format!("cost must be positive, got {cost}")));
    }
    let q: Vec<f64> = (0..n * n).map(|k| y[k / n] * y[k % n] * kernel(k / n, k % n)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let up = |a: f64, y: f64| (y > 0.0 && a < cost) || (y < 0.0 && a > 0.0);
    let low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < cost);
    let max_iter = (100 * n).max(1_000_000);
    let mut iterations = 0;
    while iterations < max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let a = q[i * n + i] + q[t * n + t] - 2.0 * y[i] * y[t] * q[i * n + t];
                let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < KKT_TOLERANCE {
            break;
        }
        iterations += 1;

        let (ai, aj) = (alpha[i], alpha[j]);
        let qii = q[i * n + i];
        let qjj = q[j * n + j];
        let qij = q[i * n + j];
        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            let (mut ni, mut nj) = (ai + delta, aj + delta);
            if diff > 0.0 {
                if nj < 0.0 {
                    nj = 0.0;
                    ni = diff;
                }
            } else if ni < 0.0 {
                ni = 0.0;
                nj = -diff;
            }
            if diff > 0.0 {
                if ni > cost {
                    ni = cost;
                    nj = cost - diff;
                }
            } else if nj > cost {
                nj = cost;
                ni = cost + diff;
            }
            alpha[i] = ni;
            alpha[j] = nj;
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            let (mut ni, mut nj) = (ai - delta, aj + delta);
            if sum > cost {
                if ni > cost {
                    ni = cost;
                    nj = sum - cost;
                }
            } else if nj < 0.0 {
                nj = 0.0;
                ni = sum;
            }
            if sum > cost {
                if nj > cost {
                    nj = cost;
                    ni = sum - cost;
                }
            } else if ni < 0.0 {
                ni = 0.0;
                nj = sum;
            }
            alpha[i] = ni;
            alpha[j] = nj;
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }

    // ρ from free variables, else the midpoint of the feasible interval
    let (mut ub, mut lb, mut sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= cost {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            sum += yg;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    Ok(DualSolution { alpha, bias: -rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_split_the_margin() {
        let x = [[0.0], [2.0]];
        let y = [1.0, -1.0];
        let s = solve_dual(2, |i, j| rbf(0.5, &x[i], &x[j]), &y, 10.0).unwrap();
        let f = |p: f64| {
            (0..2).map(|i| s.alpha[i] * y[i] * rbf(0.5, &x[i], &[p])).sum::<f64>() + s.bias
        };
        assert!(f(0.0) > 0.0 && f(2.0) < 0.0);
        assert!(f(1.0).abs() < 1e-9);
        assert!((s.alpha[0] - s.alpha[1]).abs() < 1e-12);
    }

    #[test]
    fn bad_cost_rejected() {
        assert!(solve_dual(1, |_, _| 1.0, &[1.0], 0.0).is_err());
    }
}
